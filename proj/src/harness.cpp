#include "qbc/harness.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <ctime>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <thread>

#include <json.hpp>

#include "qbc/stats.hpp"

namespace qbc {

namespace {

using nlohmann::json;

struct TrialOutcome {
  bool hit = false;
  Decision decision = Decision::Ambiguous;
  double raw_correct = 0.0;
  double sifted_correct = 0.0;
};

double quantize(double v) { return std::round(v * 1e6) / 1e6; }

std::string fixed6(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6f", v);
  return buf;
}

bool is_fraction(double v) { return v >= 0.0 && v <= 1.0; }

TrialOutcome run_trial(const SweepSpec& spec, std::size_t n, double e, double noise, RngSeed seed) {
  TrialOutcome out;
  switch (spec.mode.kind) {
    case ModeKind::Honest: {
      auto setup = RandomStream::substream(seed, Substream::TrialSetup);
      SessionConfig cfg;
      cfg.n = n;
      cfg.committed_bit = bit_from(setup.coin());
      cfg.error_fraction = e;
      cfg.noise_rate = noise;
      cfg.seed = seed;
      cfg.policy = spec.policy;
      const TrialReport r = run_honest_session(cfg);
      out.decision = r.decision;
      out.hit = r.decoded_correctly.value_or(false);
      out.raw_correct = cfg.committed_bit == BitValue::Zero ? r.raw.direct : r.raw.reverse;
      out.sifted_correct = r.alignment.sift_size == 0 ? 0.0
                                                      : static_cast<double>(correct_matches(r.alignment, cfg.committed_bit)) /
                                                            static_cast<double>(r.alignment.sift_size);
      break;
    }
    case ModeKind::PreUnveil: {
      const PreUnveilTrial t = run_preunveil_trial(n, e, noise, seed);
      out.hit = t.guess.guessed_bit == t.committed_bit;
      out.decision = decision_for(t.guess.guessed_bit);
      out.raw_correct = t.raw_correct;
      out.sifted_correct = t.sifted_correct;
      break;
    }
    case ModeKind::Binding: {
      const BindingTrial t = run_binding_trial(n, e, noise, spec.mode.strategy, spec.policy, seed);
      out.hit = t.flipped();
      out.decision = t.decision;
      out.raw_correct = t.raw_correct;
      out.sifted_correct = t.alignment.sift_size == 0
                               ? 0.0
                               : static_cast<double>(correct_matches(t.alignment, t.original_bit)) /
                                     static_cast<double>(t.alignment.sift_size);
      break;
    }
  }
  return out;
}

std::string utc_timestamp() {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

}  // namespace

std::string SweepMode::label() const {
  switch (kind) {
    case ModeKind::Honest: return "honest";
    case ModeKind::PreUnveil: return "preunveil";
    case ModeKind::Binding: return "binding:" + to_string(strategy);
  }
  return "honest";
}

void SweepSpec::validate() const {
  if (n_values.empty() || error_fractions.empty() || noise_rates.empty()) {
    throw std::invalid_argument("sweep: n, error and noise lists must be nonempty");
  }
  if (trials_per_cell == 0) throw std::invalid_argument("sweep: trials_per_cell must be >= 1");
  for (double e : error_fractions) {
    if (!is_fraction(e)) throw std::invalid_argument("sweep: error fraction " + fixed6(e) + " outside [0, 1]");
  }
  for (double r : noise_rates) {
    if (!is_fraction(r)) throw std::invalid_argument("sweep: noise rate " + fixed6(r) + " outside [0, 1]");
  }
  policy.validate();
}

SweepReport run_sweep(const SweepSpec& spec) {
  spec.validate();
  SweepReport report;
  report.master_seed = spec.master_seed;
  report.timestamp = utc_timestamp();

  const unsigned workers =
      std::max(1U, spec.threads != 0 ? spec.threads : std::thread::hardware_concurrency());
  const std::string label = spec.mode.label();

  std::uint64_t cell = 0;
  for (const std::size_t n : spec.n_values) {
    for (const double e : spec.error_fractions) {
      for (const double noise : spec.noise_rates) {
        std::vector<TrialOutcome> outcomes(spec.trials_per_cell);
        std::atomic<std::size_t> next{0};
        auto work = [&] {
          for (std::size_t t = next++; t < outcomes.size(); t = next++) {
            outcomes[t] = run_trial(spec, n, e, noise, trial_seed(spec.master_seed, cell, t));
          }
        };
        const unsigned used = static_cast<unsigned>(std::min<std::size_t>(workers, outcomes.size()));
        if (used <= 1) {
          work();
        } else {
          std::vector<std::jthread> pool;
          pool.reserve(used);
          for (unsigned w = 0; w < used; ++w) pool.emplace_back(work);
        }

        SweepRow row;
        row.n = n;
        row.error_fraction = quantize(e);
        row.noise_rate = quantize(noise);
        row.mode = label;
        row.trials = outcomes.size();
        std::size_t hits = 0;
        double raw_sum = 0.0;
        double sifted_sum = 0.0;
        for (const auto& o : outcomes) {
          hits += o.hit ? 1 : 0;
          row.tally.add(o.decision);
          raw_sum += o.raw_correct;
          sifted_sum += o.sifted_correct;
        }
        const double trials = static_cast<double>(row.trials);
        const auto ci = stats::binomial_ci(hits, row.trials, 0.95);
        row.statistic_mean = quantize(static_cast<double>(hits) / trials);
        row.ci_low = std::min(quantize(ci.low), row.statistic_mean);
        row.ci_high = std::max(quantize(ci.high), row.statistic_mean);
        row.raw_correct_mean = quantize(raw_sum / trials);
        row.sifted_correct_mean = quantize(sifted_sum / trials);
        report.rows.push_back(std::move(row));
        ++cell;
      }
    }
  }
  return report;
}

std::string format_csv(const SweepReport& report) {
  std::ostringstream os;
  os << "n,error_fraction,noise_rate,mode,trials,statistic_mean,ci_low,ci_high,"
        "decide_bit0,decide_bit1,ambiguous,cheat_suspected\n";
  for (const auto& r : report.rows) {
    os << r.n << ',' << fixed6(r.error_fraction) << ',' << fixed6(r.noise_rate) << ',' << r.mode << ','
       << r.trials << ',' << fixed6(r.statistic_mean) << ',' << fixed6(r.ci_low) << ',' << fixed6(r.ci_high)
       << ',' << r.tally.bit0 << ',' << r.tally.bit1 << ',' << r.tally.ambiguous << ','
       << r.tally.cheat_suspected << '\n';
  }
  return os.str();
}

std::string format_json(const SweepReport& report) {
  json rows = json::array();
  for (const auto& r : report.rows) {
    rows.push_back({{"n", r.n},
                    {"error_fraction", quantize(r.error_fraction)},
                    {"noise_rate", quantize(r.noise_rate)},
                    {"mode", r.mode},
                    {"trials", r.trials},
                    {"statistic_mean", r.statistic_mean},
                    {"ci_low", r.ci_low},
                    {"ci_high", r.ci_high},
                    {"decide_bit0", r.tally.bit0},
                    {"decide_bit1", r.tally.bit1},
                    {"ambiguous", r.tally.ambiguous},
                    {"cheat_suspected", r.tally.cheat_suspected},
                    {"raw_correct_mean", r.raw_correct_mean},
                    {"sifted_correct_mean", r.sifted_correct_mean}});
  }
  const json doc = {{"schema_version", kReportSchemaVersion},
                    {"tool_version", report.tool_version},
                    {"master_seed", report.master_seed.master},
                    {"timestamp", report.timestamp},
                    {"rows", rows}};
  return doc.dump(2) + "\n";
}

SweepReport parse_json_report(const std::string& text) {
  const json doc = json::parse(text);
  if (doc.at("schema_version").get<int>() != kReportSchemaVersion) {
    throw std::runtime_error("unsupported report schema_version");
  }
  SweepReport report;
  report.tool_version = doc.at("tool_version").get<std::string>();
  report.master_seed.master = doc.at("master_seed").get<std::uint64_t>();
  report.timestamp = doc.at("timestamp").get<std::string>();
  for (const auto& j : doc.at("rows")) {
    SweepRow r;
    r.n = j.at("n").get<std::size_t>();
    r.error_fraction = j.at("error_fraction").get<double>();
    r.noise_rate = j.at("noise_rate").get<double>();
    r.mode = j.at("mode").get<std::string>();
    r.trials = j.at("trials").get<std::size_t>();
    r.statistic_mean = j.at("statistic_mean").get<double>();
    r.ci_low = j.at("ci_low").get<double>();
    r.ci_high = j.at("ci_high").get<double>();
    r.tally.bit0 = j.at("decide_bit0").get<std::size_t>();
    r.tally.bit1 = j.at("decide_bit1").get<std::size_t>();
    r.tally.ambiguous = j.at("ambiguous").get<std::size_t>();
    r.tally.cheat_suspected = j.at("cheat_suspected").get<std::size_t>();
    r.raw_correct_mean = j.value("raw_correct_mean", 0.0);
    r.sifted_correct_mean = j.value("sifted_correct_mean", 0.0);
    report.rows.push_back(std::move(r));
  }
  return report;
}

void write_report(const SweepReport& report, ReportFormat format, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot open report for writing: " + path.string());
  out << (format == ReportFormat::Csv ? format_csv(report) : format_json(report));
  out.flush();
  if (!out) throw std::runtime_error("failed writing report: " + path.string());
}

SweepReport read_json_report(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open report for reading: " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_json_report(buf.str());
}

}  // namespace qbc
