#pragma once

// The trusted referee holds Bob's photons and measures them on Alice's
// behalf, so neither party ever sees the other's private data.
//
//   bob   -> hello, prepare              referee keeps the states
//   alice -> hello                       acknowledged once photons exist
//   alice -> measure                     referee -> alice: outcomes
//   alice -> commit, unveil              relayed to bob
//   bob   -> decision                    relayed to alice

#include <cstdint>
#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "qbc/channel.hpp"
#include "qbc/rng.hpp"
#include "qbc/wire.hpp"

namespace qbc::wire {

struct Outbound {
  Role to = Role::Alice;
  Message message;
};

/// Protocol state owner. Pure: consumes messages from registered parties and
/// returns the messages to send. Every message in or out is logged.
class RefereeSession {
 public:
  enum class Phase { AwaitingPrepare, AwaitingMeasure, AwaitingCommit, AwaitingUnveil, AwaitingDecision, Done, Violated };

  /// Outcomes use the Channel substream of `seed`.
  explicit RefereeSession(RngSeed seed, double noise_rate = 0.0);

  bool has_role(Role r) const noexcept;
  /// Registers a party whose hello has been received. The caller rejects
  /// duplicates (has_role) before calling this.
  std::vector<Outbound> join(Role role);
  std::vector<Outbound> receive(Role from, const Message& message);
  /// Aborts the session: error to the offender, notice to the other party.
  std::vector<Outbound> fail(Role offender, const std::string& reason);

  Phase phase() const noexcept { return phase_; }
  bool finished() const noexcept { return phase_ == Phase::Done || phase_ == Phase::Violated; }
  const SessionTranscript& transcript() const noexcept { return transcript_; }

 private:
  void log(std::string dir, const Message& m);
  void emit(std::vector<Outbound>& out, Role to, Message m);
  std::vector<Outbound> out_of_order(Role from, const Message& m);

  RngSeed seed_;
  double noise_rate_;
  Phase phase_ = Phase::AwaitingPrepare;
  bool alice_ = false;
  bool bob_ = false;
  bool alice_acked_ = false;
  PreparedSequence prepared_;
  SessionTranscript transcript_;
};

struct RefereeOptions {
  std::string listen = "127.0.0.1:0";
  RngSeed seed{};
  double noise_rate = 0.0;
  /// Empty: no transcript file.
  std::filesystem::path transcript_path;
};

/// TCP front end for one RefereeSession. Connections are read concurrently;
/// all state transitions happen on the thread calling serve().
class Referee {
 public:
  /// Binds immediately so port() is known before serve().
  explicit Referee(RefereeOptions options);
  ~Referee();
  Referee(const Referee&) = delete;
  Referee& operator=(const Referee&) = delete;

  std::uint16_t port() const noexcept;
  /// Runs the session to completion or violation, writes the transcript file
  /// and returns the transcript.
  SessionTranscript serve();

 private:
  struct Impl;
  RefereeOptions options_;
  std::unique_ptr<Impl> impl_;
};

}  // namespace qbc::wire
