#include "qbc/party.hpp"

#include <ostream>

#include <json.hpp>

#include "qbc/net.hpp"

namespace qbc::wire {

namespace {

class Link {
 public:
  explicit Link(net::LineConnection conn) : conn_(std::move(conn)) {}

  void send(const Message& m) {
    if (!conn_.write_all(encode(m))) throw net::NetError("connection lost while sending " + std::string(type_name(m)));
  }

  /// Next message of type T; an error message or anything else aborts.
  template <class T>
  T expect(const char* what) {
    const auto line = conn_.read_line();
    if (!line) throw net::NetError(std::string("connection lost while awaiting ") + what);
    Message m = decode(*line);
    if (auto* t = std::get_if<T>(&m)) return std::move(*t);
    if (const auto* e = std::get_if<ErrorMsg>(&m)) throw ProtocolError("referee error: " + e->message);
    throw ProtocolError(std::string("expected ") + what + ", got " + std::string(type_name(m)));
  }

 private:
  net::LineConnection conn_;
};

void check_length(std::size_t got, std::size_t n, const char* what) {
  if (got != n) {
    throw ProtocolError(std::string(what) + " has " + std::to_string(got) + " entries, expected " + std::to_string(n));
  }
}

int run_bob(Link& link, const PartyOptions& o, std::ostream& out) {
  auto rng = RandomStream::substream(o.seed, Substream::BobPrepare);
  const PreparedSequence prepared = prepare_random_sequence(o.n, rng);
  link.send(Prepare{{prepared.begin(), prepared.end()}});

  Commitment commitment{link.expect<CommitMsg>("commit").bits};
  try {
    check_length(commitment.revealed.size(), o.n, "commit");
  } catch (const ProtocolError& e) {
    link.send(ErrorMsg{e.what()});
    throw;
  }
  const auto opened = link.expect<UnveilMsg>("unveil");
  try {
    check_length(opened.bases.size(), o.n, "unveil");
  } catch (const ProtocolError& e) {
    link.send(ErrorMsg{e.what()});
    throw;
  }

  const auto sent = prepared.bits();
  DecisionMsg verdict;
  verdict.raw = raw_correlations(sent, commitment);
  verdict.alignment = alignment_scores(sent, commitment, sift(prepared.bases(), opened.bases));
  verdict.value = decode(*verdict.alignment, o.policy);
  link.send(verdict);

  nlohmann::json j{{"role", "bob"},
                   {"n", o.n},
                   {"decision", std::string(to_string(verdict.value))},
                   {"sift_size", verdict.alignment->sift_size},
                   {"direct_matches", verdict.alignment->direct_matches},
                   {"reverse_matches", verdict.alignment->reverse_matches},
                   {"raw_direct_correlation", verdict.raw->direct},
                   {"raw_reverse_correlation", verdict.raw->reverse}};
  out << j.dump() << '\n';
  return 0;
}

int run_alice(Link& link, const PartyOptions& o, std::ostream& out) {
  auto bases_rng = RandomStream::substream(o.seed, Substream::AliceBases);
  auto error_rng = RandomStream::substream(o.seed, Substream::AliceErrors);

  MeasurementRecord record;
  record.bases = choose_random_bases(o.n, bases_rng);
  link.send(Measure{record.bases});
  record.outcomes = link.expect<Outcomes>("outcomes").bits;
  check_length(record.outcomes.size(), o.n, "outcomes");

  const auto injected = inject_errors(record.outcomes, o.error_fraction, error_rng, o.error_mode);
  const Commitment c = commit(injected.outcomes, o.bit);
  link.send(CommitMsg{c.revealed});
  link.send(UnveilMsg{unveil(record).bases});

  const auto verdict = link.expect<DecisionMsg>("decision");
  std::size_t changed = 0;
  for (std::size_t i = 0; i < injected.outcomes.size(); ++i) changed += injected.outcomes[i] != record.outcomes[i];
  nlohmann::json j{{"role", "alice"},
                   {"n", o.n},
                   {"committed_bit", to_int(o.bit)},
                   {"positions_changed", changed},
                   {"decision", std::string(to_string(verdict.value))}};
  out << j.dump() << '\n';
  return 0;
}

}  // namespace

int party_run(const PartyOptions& options, std::ostream& out, std::ostream& err) {
  const std::string who(to_string(options.role));
  try {
    if (options.role == Role::Referee) throw std::invalid_argument("party role must be alice or bob");
    Link link(net::connect_to(net::parse_endpoint(options.connect)));
    link.send(Hello{options.role});
    link.expect<Hello>("hello");
    return options.role == Role::Bob ? run_bob(link, options, out) : run_alice(link, options, out);
  } catch (const std::exception& e) {
    err << who << ": " << e.what() << '\n';
    return 1;
  }
}

}  // namespace qbc::wire
