#pragma once

#include <iosfwd>
#include <string>

#include "qbc/protocol.hpp"
#include "qbc/rng.hpp"
#include "qbc/wire.hpp"

namespace qbc::wire {

struct PartyOptions {
  Role role = Role::Alice;
  std::string connect = "127.0.0.1:7777";
  std::size_t n = 0;
  BitValue bit = BitValue::Zero;        // alice only
  double error_fraction = 0.0;          // alice only
  RngSeed seed{};
  DecisionPolicy policy{};              // bob only
  ErrorMode error_mode = ErrorMode::Randomize;
};

/// Runs one party to completion against a referee. On success prints a JSON
/// summary line to `out` and returns 0; on connection loss, a malformed or
/// error message, returns 1 with a diagnostic on `err`.
///
/// Substreams match run_honest_session: Bob prepares from BobPrepare, Alice
/// picks bases from AliceBases and errors from AliceErrors, so a referee on
/// the same seed reproduces the in-process session exactly.
int party_run(const PartyOptions& options, std::ostream& out, std::ostream& err);

}  // namespace qbc::wire
