#pragma once

#include <cstddef>
#include <filesystem>
#include <string>
#include <vector>

#include "qbc/adversary.hpp"
#include "qbc/protocol.hpp"
#include "qbc/rng.hpp"

namespace qbc {

inline constexpr const char* kToolVersion = "0.1.0";
inline constexpr int kReportSchemaVersion = 1;

enum class ModeKind { Honest, PreUnveil, Binding };

struct SweepMode {
  ModeKind kind = ModeKind::Honest;
  RebindStrategy strategy = HonestBases{};  // Binding only

  /// "honest", "preunveil", "binding:<strategy>".
  std::string label() const;
};

/// Per-cell statistic:
///   Honest    fraction of trials decoded to the committed bit
///   PreUnveil fraction of pre-unveil guesses equal to the committed bit
///   Binding   fraction of trials where Bob decoded the flipped bit
struct SweepSpec {
  std::vector<std::size_t> n_values;
  std::vector<double> error_fractions;
  std::vector<double> noise_rates{0.0};
  std::size_t trials_per_cell = 1;
  RngSeed master_seed{};
  SweepMode mode{};
  DecisionPolicy policy{};
  /// Worker threads; 0 picks hardware concurrency. Never changes the output.
  unsigned threads = 0;

  /// Throws std::invalid_argument on empty lists, zero trials or
  /// out-of-range fractions.
  void validate() const;
};

struct SweepRow {
  std::size_t n = 0;
  double error_fraction = 0.0;
  double noise_rate = 0.0;
  std::string mode;
  std::size_t trials = 0;
  double statistic_mean = 0.0;
  double ci_low = 0.0;
  double ci_high = 0.0;
  DecisionTally tally;
  /// Mean unsifted and sifted correct-alignment correlation (JSON only).
  double raw_correct_mean = 0.0;
  double sifted_correct_mean = 0.0;

  friend bool operator==(const SweepRow&, const SweepRow&) = default;
};

struct SweepReport {
  std::vector<SweepRow> rows;
  std::string tool_version = kToolVersion;
  RngSeed master_seed{};
  std::string timestamp;

  friend bool operator==(const SweepReport&, const SweepReport&) = default;
};

/// Runs every (n, e, noise) cell in list order. Trial t of cell c uses
/// trial_seed(master, c, t); per-trial results are reduced in trial order, so
/// the report is independent of the thread count. Fractions are quantized to
/// six decimals.
SweepReport run_sweep(const SweepSpec& spec);

enum class ReportFormat { Csv, Json };

/// Header and one line per row; columns:
///   n,error_fraction,noise_rate,mode,trials,statistic_mean,ci_low,ci_high,
///   decide_bit0,decide_bit1,ambiguous,cheat_suspected
std::string format_csv(const SweepReport& report);
std::string format_json(const SweepReport& report);
SweepReport parse_json_report(const std::string& text);

/// Throws std::runtime_error naming the path if it cannot be written.
void write_report(const SweepReport& report, ReportFormat format, const std::filesystem::path& path);
SweepReport read_json_report(const std::filesystem::path& path);

}  // namespace qbc
