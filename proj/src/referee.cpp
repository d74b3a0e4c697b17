#include "qbc/referee.hpp"

#include <condition_variable>
#include <deque>
#include <fstream>
#include <map>
#include <memory>
#include <mutex>
#include <thread>

#include "qbc/net.hpp"

namespace qbc::wire {

namespace {

const char* phase_name(RefereeSession::Phase p) {
  switch (p) {
    case RefereeSession::Phase::AwaitingPrepare: return "prepare";
    case RefereeSession::Phase::AwaitingMeasure: return "measure";
    case RefereeSession::Phase::AwaitingCommit: return "commit";
    case RefereeSession::Phase::AwaitingUnveil: return "unveil";
    case RefereeSession::Phase::AwaitingDecision: return "decision";
    case RefereeSession::Phase::Done: return "nothing (done)";
    case RefereeSession::Phase::Violated: return "nothing (violated)";
  }
  return "?";
}

Role peer_of(Role r) { return r == Role::Alice ? Role::Bob : Role::Alice; }

}  // namespace

RefereeSession::RefereeSession(RngSeed seed, double noise_rate) : seed_(seed), noise_rate_(noise_rate) {}

bool RefereeSession::has_role(Role r) const noexcept {
  return r == Role::Alice ? alice_ : r == Role::Bob ? bob_ : false;
}

void RefereeSession::log(std::string dir, const Message& m) {
  std::string line = encode(m);
  line.pop_back();
  transcript_.entries.push_back({transcript_.entries.size(), std::move(dir), std::move(line)});
}

void RefereeSession::emit(std::vector<Outbound>& out, Role to, Message m) {
  log(std::string("referee->") + std::string(to_string(to)), m);
  out.push_back({to, std::move(m)});
}

std::vector<Outbound> RefereeSession::join(Role role) {
  std::vector<Outbound> out;
  if (finished() || role == Role::Referee || has_role(role)) return out;
  log(std::string(to_string(role)) + "->referee", Hello{role});
  if (role == Role::Bob) {
    bob_ = true;
    emit(out, Role::Bob, Hello{Role::Referee});
  } else {
    alice_ = true;
    if (phase_ != Phase::AwaitingPrepare) {
      alice_acked_ = true;
      emit(out, Role::Alice, Hello{Role::Referee});
    }
  }
  return out;
}

std::vector<Outbound> RefereeSession::fail(Role offender, const std::string& reason) {
  std::vector<Outbound> out;
  if (finished()) return out;
  phase_ = Phase::Violated;
  transcript_.violated = true;
  if (has_role(offender)) emit(out, offender, ErrorMsg{reason});
  const Role other = peer_of(offender);
  if (has_role(other)) emit(out, other, ErrorMsg{"session aborted: " + reason});
  return out;
}

std::vector<Outbound> RefereeSession::out_of_order(Role from, const Message& m) {
  return fail(from, "out-of-order: " + std::string(type_name(m)) + " from " + std::string(to_string(from)) +
                        " while awaiting " + phase_name(phase_));
}

std::vector<Outbound> RefereeSession::receive(Role from, const Message& m) {
  if (finished()) return {};
  log(std::string(to_string(from)) + "->referee", m);

  if (const auto* e = std::get_if<ErrorMsg>(&m)) {
    return fail(from, std::string(to_string(from)) + " reported: " + e->message);
  }

  std::vector<Outbound> out;
  const std::size_t n = prepared_.size();
  auto length_ok = [&](std::size_t len, const char* what) {
    if (len == n) return true;
    out = fail(from, std::string("length mismatch: ") + what + " has " + std::to_string(len) + " entries, session n=" +
                         std::to_string(n));
    return false;
  };

  switch (phase_) {
    case Phase::AwaitingPrepare:
      if (from == Role::Bob) {
        if (const auto* p = std::get_if<Prepare>(&m)) {
          prepared_ = PreparedSequence(p->states);
          phase_ = Phase::AwaitingMeasure;
          if (alice_ && !alice_acked_) {
            alice_acked_ = true;
            emit(out, Role::Alice, Hello{Role::Referee});
          }
          return out;
        }
      }
      break;
    case Phase::AwaitingMeasure:
      if (from == Role::Alice) {
        if (const auto* meas = std::get_if<Measure>(&m)) {
          if (!length_ok(meas->bases.size(), "measure")) return out;
          auto channel = RandomStream::substream(seed_, Substream::Channel);
          emit(out, Role::Alice, Outcomes{transmit_and_measure(prepared_, meas->bases, noise_rate_, channel)});
          phase_ = Phase::AwaitingCommit;
          return out;
        }
      }
      break;
    case Phase::AwaitingCommit:
      if (from == Role::Alice) {
        if (const auto* c = std::get_if<CommitMsg>(&m)) {
          if (!length_ok(c->bits.size(), "commit")) return out;
          emit(out, Role::Bob, *c);
          phase_ = Phase::AwaitingUnveil;
          return out;
        }
      }
      break;
    case Phase::AwaitingUnveil:
      if (from == Role::Alice) {
        if (const auto* u = std::get_if<UnveilMsg>(&m)) {
          if (!length_ok(u->bases.size(), "unveil")) return out;
          emit(out, Role::Bob, *u);
          phase_ = Phase::AwaitingDecision;
          return out;
        }
      }
      break;
    case Phase::AwaitingDecision:
      if (from == Role::Bob) {
        if (const auto* d = std::get_if<DecisionMsg>(&m)) {
          emit(out, Role::Alice, *d);
          transcript_.outcome = d->value;
          phase_ = Phase::Done;
          return out;
        }
      }
      break;
    case Phase::Done:
    case Phase::Violated:
      return out;
  }
  return out_of_order(from, m);
}

struct Referee::Impl {
  struct Event {
    enum class Kind { Line, Closed } kind;
    std::size_t conn;
    std::string line;
  };

  explicit Impl(const net::Endpoint& ep) : listener(ep) {}

  void push(Event e) {
    {
      std::lock_guard lock(mu);
      events.push_back(std::move(e));
    }
    cv.notify_one();
  }

  Event pop() {
    std::unique_lock lock(mu);
    cv.wait(lock, [&] { return !events.empty(); });
    Event e = std::move(events.front());
    events.pop_front();
    return e;
  }

  std::shared_ptr<net::LineConnection> connection(std::size_t id) {
    std::lock_guard lock(mu);
    const auto it = conns.find(id);
    return it == conns.end() ? nullptr : it->second;
  }

  void accept_loop() {
    for (std::size_t id = 0;; ++id) {
      auto accepted = listener.accept();
      if (!accepted) return;
      auto conn = std::make_shared<net::LineConnection>(std::move(*accepted));
      std::lock_guard lock(mu);
      if (stopping) {
        conn->shutdown();
        return;
      }
      conns.emplace(id, conn);
      readers.emplace_back([this, id, conn] {
        while (auto line = conn->read_line()) push({Event::Kind::Line, id, std::move(*line)});
        push({Event::Kind::Closed, id, {}});
      });
    }
  }

  void stop() {
    {
      std::lock_guard lock(mu);
      stopping = true;
      for (auto& [id, c] : conns) c->shutdown();
    }
    listener.close();
    if (acceptor.joinable()) acceptor.join();
    std::vector<std::jthread> done;
    {
      std::lock_guard lock(mu);
      done.swap(readers);
    }
    done.clear();
  }

  net::Listener listener;
  std::mutex mu;
  std::condition_variable cv;
  std::deque<Event> events;
  std::map<std::size_t, std::shared_ptr<net::LineConnection>> conns;
  std::vector<std::jthread> readers;
  std::jthread acceptor;
  bool stopping = false;
};

Referee::Referee(RefereeOptions options)
    : options_(std::move(options)), impl_(std::make_unique<Impl>(net::parse_endpoint(options_.listen))) {}

Referee::~Referee() { impl_->stop(); }

std::uint16_t Referee::port() const noexcept { return impl_->listener.port(); }

SessionTranscript Referee::serve() {
  RefereeSession session(options_.seed, options_.noise_rate);
  std::map<std::size_t, Role> roles;
  std::map<Role, std::size_t> conn_of;

  impl_->acceptor = std::jthread([this] { impl_->accept_loop(); });

  auto send_to_conn = [&](std::size_t id, const Message& m) {
    if (auto c = impl_->connection(id)) c->write_all(encode(m));
  };
  auto reject = [&](std::size_t id, const std::string& why) {
    send_to_conn(id, ErrorMsg{why});
    if (auto c = impl_->connection(id)) c->shutdown();
  };
  auto deliver = [&](const std::vector<Outbound>& out) {
    for (const auto& o : out) {
      const auto it = conn_of.find(o.to);
      if (it != conn_of.end()) send_to_conn(it->second, o.message);
    }
  };

  while (!session.finished()) {
    const auto ev = impl_->pop();
    const auto known = roles.find(ev.conn);

    if (ev.kind == Impl::Event::Kind::Closed) {
      if (known != roles.end()) deliver(session.fail(known->second, "connection lost"));
      continue;
    }

    std::optional<Message> msg;
    std::string parse_error;
    try {
      msg = decode(ev.line);
    } catch (const ProtocolError& e) {
      parse_error = e.what();
    }

    if (known == roles.end()) {
      const auto* hello = msg ? std::get_if<Hello>(&*msg) : nullptr;
      if (hello == nullptr || hello->role == Role::Referee) {
        reject(ev.conn, parse_error.empty() ? "expected hello from alice or bob" : parse_error);
      } else if (session.has_role(hello->role)) {
        reject(ev.conn, "duplicate role: " + std::string(to_string(hello->role)));
      } else if (conn_of.size() == 2) {
        reject(ev.conn, "session full");
      } else {
        roles.emplace(ev.conn, hello->role);
        conn_of.emplace(hello->role, ev.conn);
        deliver(session.join(hello->role));
      }
      continue;
    }

    if (!msg) {
      deliver(session.fail(known->second, "malformed message: " + parse_error));
      continue;
    }
    deliver(session.receive(known->second, *msg));
  }

  impl_->stop();

  if (!options_.transcript_path.empty()) {
    std::ofstream out(options_.transcript_path, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write transcript: " + options_.transcript_path.string());
    out << format_transcript(session.transcript());
  }
  return session.transcript();
}

}  // namespace qbc::wire
