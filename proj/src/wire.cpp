#include "qbc/wire.hpp"

#include <json.hpp>

namespace qbc::wire {

namespace {

using nlohmann::json;

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};

json bits_json(const std::vector<BitValue>& bits) {
  json a = json::array();
  for (auto b : bits) a.push_back(to_int(b));
  return a;
}

json bases_json(const std::vector<Basis>& bases) {
  json a = json::array();
  for (auto b : bases) a.push_back(std::string(1, basis_code(b)));
  return a;
}

BitValue bit_of(const json& j) {
  if (!j.is_number_integer()) throw ProtocolError("bit must be 0 or 1");
  const auto v = j.get<long long>();
  if (v != 0 && v != 1) throw ProtocolError("bit must be 0 or 1");
  return bit_from(v == 1);
}

Basis basis_of(const json& j) {
  if (!j.is_string()) throw ProtocolError("basis must be \"R\" or \"D\"");
  try {
    return basis_from_code(j.get<std::string>());
  } catch (const std::invalid_argument& e) {
    throw ProtocolError(e.what());
  }
}

const json& field(const json& obj, const char* name) {
  const auto it = obj.find(name);
  if (it == obj.end()) throw ProtocolError(std::string("missing field \"") + name + "\"");
  return *it;
}

const json& array_field(const json& obj, const char* name) {
  const json& a = field(obj, name);
  if (!a.is_array()) throw ProtocolError(std::string("field \"") + name + "\" must be a list");
  return a;
}

std::vector<BitValue> bits_of(const json& obj, const char* name) {
  std::vector<BitValue> out;
  for (const auto& v : array_field(obj, name)) out.push_back(bit_of(v));
  return out;
}

std::vector<Basis> bases_of(const json& obj, const char* name) {
  std::vector<Basis> out;
  for (const auto& v : array_field(obj, name)) out.push_back(basis_of(v));
  return out;
}

json to_json(const Message& m) {
  return std::visit(
      Overloaded{
          [](const Hello& h) { return json{{"type", "hello"}, {"role", to_string(h.role)}}; },
          [](const Prepare& p) {
            json states = json::array();
            for (const auto& s : p.states) {
              states.push_back({{"basis", std::string(1, basis_code(s.basis))}, {"bit", to_int(s.bit)}});
            }
            return json{{"type", "prepare"}, {"states", states}};
          },
          [](const Measure& m) { return json{{"type", "measure"}, {"bases", bases_json(m.bases)}}; },
          [](const Outcomes& o) { return json{{"type", "outcomes"}, {"bits", bits_json(o.bits)}}; },
          [](const CommitMsg& c) { return json{{"type", "commit"}, {"bits", bits_json(c.bits)}}; },
          [](const UnveilMsg& u) { return json{{"type", "unveil"}, {"bases", bases_json(u.bases)}}; },
          [](const DecisionMsg& d) {
            json j{{"type", "decision"}};
            if (d.value == Decision::Bit0) {
              j["value"] = 0;
            } else if (d.value == Decision::Bit1) {
              j["value"] = 1;
            } else {
              j["value"] = std::string(to_string(d.value));
            }
            if (d.alignment) {
              j["sift_size"] = d.alignment->sift_size;
              j["direct_matches"] = d.alignment->direct_matches;
              j["reverse_matches"] = d.alignment->reverse_matches;
            }
            if (d.raw) {
              j["raw_direct_correlation"] = d.raw->direct;
              j["raw_reverse_correlation"] = d.raw->reverse;
            }
            return j;
          },
          [](const ErrorMsg& e) { return json{{"type", "error"}, {"message", e.message}}; },
      },
      m);
}

Message from_json(const json& j) {
  if (!j.is_object()) throw ProtocolError("message must be a JSON object");
  const json& type = field(j, "type");
  if (!type.is_string()) throw ProtocolError("\"type\" must be a string");
  const auto t = type.get<std::string>();

  if (t == "hello") {
    const json& role = field(j, "role");
    if (!role.is_string()) throw ProtocolError("\"role\" must be a string");
    try {
      return Hello{role_from_string(role.get<std::string>())};
    } catch (const std::invalid_argument& e) {
      throw ProtocolError(e.what());
    }
  }
  if (t == "prepare") {
    Prepare p;
    for (const auto& s : array_field(j, "states")) {
      if (!s.is_object()) throw ProtocolError("prepare state must be an object");
      p.states.push_back({basis_of(field(s, "basis")), bit_of(field(s, "bit"))});
    }
    return p;
  }
  if (t == "measure") return Measure{bases_of(j, "bases")};
  if (t == "outcomes") return Outcomes{bits_of(j, "bits")};
  if (t == "commit") return CommitMsg{bits_of(j, "bits")};
  if (t == "unveil") return UnveilMsg{bases_of(j, "bases")};
  if (t == "decision") {
    DecisionMsg d;
    const json& v = field(j, "value");
    if (v.is_number_integer()) {
      d.value = bit_of(v) == BitValue::Zero ? Decision::Bit0 : Decision::Bit1;
    } else if (v.is_string() && (v == "ambiguous" || v == "cheat_suspected")) {
      d.value = decision_from_string(v.get<std::string>());
    } else {
      throw ProtocolError("decision value must be 0, 1, \"ambiguous\" or \"cheat_suspected\"");
    }
    if (j.contains("sift_size")) {
      try {
        d.alignment = AlignmentScore{j.at("sift_size").get<std::size_t>(), j.at("direct_matches").get<std::size_t>(),
                                     j.at("reverse_matches").get<std::size_t>()};
      } catch (const json::exception& e) {
        throw ProtocolError(std::string("bad decision score: ") + e.what());
      }
    }
    if (j.contains("raw_direct_correlation")) {
      try {
        d.raw = RawCorrelation{j.at("raw_direct_correlation").get<double>(),
                               j.at("raw_reverse_correlation").get<double>()};
      } catch (const json::exception& e) {
        throw ProtocolError(std::string("bad decision correlations: ") + e.what());
      }
    }
    return d;
  }
  if (t == "error") {
    const json& msg = field(j, "message");
    return ErrorMsg{msg.is_string() ? msg.get<std::string>() : msg.dump()};
  }
  throw ProtocolError("unknown message type \"" + t + "\"");
}

}  // namespace

std::string_view to_string(Role r) noexcept {
  switch (r) {
    case Role::Alice: return "alice";
    case Role::Bob: return "bob";
    case Role::Referee: return "referee";
  }
  return "referee";
}

Role role_from_string(std::string_view s) {
  if (s == "alice") return Role::Alice;
  if (s == "bob") return Role::Bob;
  if (s == "referee") return Role::Referee;
  throw std::invalid_argument("unknown role: " + std::string(s));
}

std::string_view type_name(const Message& m) noexcept {
  static constexpr std::string_view names[] = {"hello",  "prepare",  "measure", "outcomes",
                                               "commit", "unveil",   "decision", "error"};
  return names[m.index()];
}

std::string encode(const Message& m) { return to_json(m).dump() + "\n"; }

Message decode(std::string_view line) {
  while (!line.empty() && (line.back() == '\n' || line.back() == '\r')) line.remove_suffix(1);
  if (line.find('\n') != std::string_view::npos) throw ProtocolError("message spans more than one line");
  json j;
  try {
    j = json::parse(line);
  } catch (const json::parse_error& e) {
    throw ProtocolError(std::string("malformed JSON: ") + e.what());
  }
  return from_json(j);
}

std::optional<int> protocol_rank(std::string_view type) noexcept {
  static constexpr std::string_view order[] = {"prepare", "measure", "outcomes", "commit", "unveil", "decision"};
  for (int i = 0; i < 6; ++i) {
    if (order[i] == type) return i;
  }
  return std::nullopt;
}

std::string format_transcript(const SessionTranscript& t) {
  std::string out;
  for (const auto& e : t.entries) {
    json j = json::parse(e.line);
    j["dir"] = e.dir;
    j["seq"] = e.seq;
    out += j.dump();
    out += '\n';
  }
  return out;
}

SessionTranscript parse_transcript(std::string_view text) {
  SessionTranscript t;
  std::size_t start = 0;
  while (start < text.size()) {
    std::size_t end = text.find('\n', start);
    if (end == std::string_view::npos) end = text.size();
    const std::string_view line = text.substr(start, end - start);
    start = end + 1;
    if (line.empty()) continue;
    json j = json::parse(line);
    TranscriptEntry e;
    e.dir = j.at("dir").get<std::string>();
    e.seq = j.at("seq").get<std::size_t>();
    j.erase("dir");
    j.erase("seq");
    const Message m = from_json(j);
    if (std::holds_alternative<ErrorMsg>(m)) t.violated = true;
    if (const auto* d = std::get_if<DecisionMsg>(&m)) t.outcome = d->value;
    e.line = j.dump();
    t.entries.push_back(std::move(e));
  }
  return t;
}

bool respects_order(const SessionTranscript& t) {
  int last = -1;
  for (const auto& e : t.entries) {
    const auto type = json::parse(e.line).at("type").get<std::string>();
    if (const auto rank = protocol_rank(type)) {
      if (*rank < last) return false;
      last = *rank;
    }
  }
  return true;
}

bool respects_visibility(const SessionTranscript& t) {
  for (const auto& e : t.entries) {
    const auto type = json::parse(e.line).at("type").get<std::string>();
    if (type == "prepare" && e.dir.ends_with("->alice")) return false;
    if (type == "measure" && e.dir.ends_with("->bob")) return false;
  }
  return true;
}

}  // namespace qbc::wire
