#pragma once

// Line-delimited JSON messages exchanged through the referee.
//
//   {"type":"hello","role":"alice"|"bob"|"referee"}
//   {"type":"prepare","states":[{"basis":"R","bit":0},...]}     bob -> referee
//   {"type":"measure","bases":["R","D",...]}                    alice -> referee
//   {"type":"outcomes","bits":[0,1,...]}                        referee -> alice
//   {"type":"commit","bits":[...]}                              alice -> referee -> bob
//   {"type":"unveil","bases":[...]}                             alice -> referee -> bob
//   {"type":"decision","value":0|1|"ambiguous"|"cheat_suspected", ...score}
//                                                               bob -> referee -> alice
//   {"type":"error","message":"..."}
//
// Every message is one compact JSON object followed by "\n".

#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "qbc/channel.hpp"
#include "qbc/protocol.hpp"

namespace qbc::wire {

/// Malformed line, unknown type or bad payload.
class ProtocolError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class Role { Alice, Bob, Referee };
std::string_view to_string(Role r) noexcept;
Role role_from_string(std::string_view s);

struct Hello {
  Role role = Role::Alice;
};
struct Prepare {
  std::vector<PhotonState> states;
};
struct Measure {
  std::vector<Basis> bases;
};
struct Outcomes {
  std::vector<BitValue> bits;
};
struct CommitMsg {
  std::vector<BitValue> bits;
};
struct UnveilMsg {
  std::vector<Basis> bases;
};
/// Bob's verdict. The score fields let the receiving side audit the decode.
struct DecisionMsg {
  Decision value = Decision::Ambiguous;
  std::optional<AlignmentScore> alignment;
  std::optional<RawCorrelation> raw;
};
struct ErrorMsg {
  std::string message;
};

using Message = std::variant<Hello, Prepare, Measure, Outcomes, CommitMsg, UnveilMsg, DecisionMsg, ErrorMsg>;

/// "hello", "prepare", ...
std::string_view type_name(const Message& m) noexcept;

/// Compact JSON line including the trailing newline.
std::string encode(const Message& m);
/// Parses one line (trailing newline optional). Throws ProtocolError.
Message decode(std::string_view line);

/// Position in the protocol order (prepare=0 ... decision=5); hello and error
/// have no rank.
std::optional<int> protocol_rank(std::string_view type) noexcept;

/// One logged message. dir is "<from>-><to>", e.g. "alice->referee".
struct TranscriptEntry {
  std::size_t seq = 0;
  std::string dir;
  std::string line;  // encoded message without newline
};

struct SessionTranscript {
  std::vector<TranscriptEntry> entries;
  std::optional<Decision> outcome;
  bool violated = false;
};

/// One JSON object per line: the message fields plus "dir" and "seq".
std::string format_transcript(const SessionTranscript& t);
/// Reads a transcript written by format_transcript. A transcript is marked
/// violated when it contains an error message.
SessionTranscript parse_transcript(std::string_view text);

/// Ranked messages appear in nondecreasing protocol order.
bool respects_order(const SessionTranscript& t);
/// No prepare is ever sent to alice and no measure is ever sent to bob.
bool respects_visibility(const SessionTranscript& t);

}  // namespace qbc::wire
