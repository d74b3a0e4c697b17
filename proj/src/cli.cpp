#include "qbc/cli.hpp"

#include <algorithm>
#include <cstdio>
#include <iostream>
#include <optional>

#include <CLI11.hpp>
#include <json.hpp>

#include "qbc/adversary.hpp"
#include "qbc/harness.hpp"
#include "qbc/party.hpp"
#include "qbc/protocol.hpp"
#include "qbc/referee.hpp"
#include "qbc/stats.hpp"

namespace qbc {

namespace {

using nlohmann::json;

constexpr int kUsageError = 2;
constexpr int kRuntimeError = 1;

struct PolicyFlags {
  DecisionPolicy policy;

  void attach(CLI::App* app) {
    app->add_option("--delta", policy.separation_delta, "Separation band for decoding")
        ->check(CLI::Range(0.0, 1.0));
    app->add_option("--floor", policy.plausibility_floor, "Plausibility floor below which cheating is suspected")
        ->check(CLI::Range(0.0, 1.0));
    app->add_option("--min-sift", policy.min_sift, "Minimum sifted positions for a decision");
  }
};

const std::map<std::string, ErrorMode> kErrorModes{{"randomize", ErrorMode::Randomize}, {"flip", ErrorMode::Flip}};

std::string fixed6(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6f", v);
  return buf;
}

RebindStrategy make_strategy(const std::string& name, double lie_prob) {
  if (name == "honest-bases") return HonestBases{};
  if (name == "flip-all") return FlipAllBases{};
  return RandomLies{lie_prob};
}

void add_strategy_flags(CLI::App* app, std::string& name, double& lie_prob) {
  app->add_option("--strategy", name, "Alice's unveil strategy")
      ->check(CLI::IsMember({"honest-bases", "flip-all", "random-lies"}));
  app->add_option("--lie-prob", lie_prob, "Per-basis lie probability for random-lies")->check(CLI::Range(0.0, 1.0));
}

json report_json(const TrialReport& r) {
  json j{{"n", r.config.n},
         {"committed_bit", to_int(r.config.committed_bit)},
         {"error_fraction", r.config.error_fraction},
         {"error_mode", r.config.error_mode == ErrorMode::Randomize ? "randomize" : "flip"},
         {"noise_rate", r.config.noise_rate},
         {"seed", r.config.seed.master},
         {"policy",
          {{"separation_delta", r.config.policy.separation_delta},
           {"plausibility_floor", r.config.policy.plausibility_floor},
           {"min_sift", r.config.policy.min_sift}}},
         {"raw_direct_correlation", r.raw.direct},
         {"raw_reverse_correlation", r.raw.reverse},
         {"sift_size", r.alignment.sift_size},
         {"direct_matches", r.alignment.direct_matches},
         {"reverse_matches", r.alignment.reverse_matches},
         {"decision", std::string(to_string(r.decision))}};
  j["decoded_correctly"] = r.decoded_correctly ? json(*r.decoded_correctly) : json(nullptr);
  return j;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Order-encoded quantum bit commitment simulator", "qbc"};
  app.require_subcommand(1);

  // simulate
  auto* simulate = app.add_subcommand("simulate", "Run one honest session");
  SessionConfig sim;
  int sim_bit = 0;
  std::string sim_output = "text";
  PolicyFlags sim_policy;
  simulate->add_option("--n", sim.n, "Number of photons")->required();
  simulate->add_option("--bit", sim_bit, "Committed bit")->check(CLI::IsMember({0, 1}));
  simulate->add_option("--error-fraction", sim.error_fraction, "Fraction of results Alice corrupts")
      ->check(CLI::Range(0.0, 1.0));
  simulate->add_option("--error-mode", sim.error_mode, "How corrupted results change")
      ->transform(CLI::CheckedTransformer(kErrorModes));
  simulate->add_option("--noise-rate", sim.noise_rate, "Channel bit-flip probability")->check(CLI::Range(0.0, 1.0));
  simulate->add_option("--seed", sim.seed.master, "Master seed");
  simulate->add_option("--output", sim_output, "Output format")->check(CLI::IsMember({"json", "text"}));
  sim_policy.attach(simulate);

  // sweep
  auto* sweep = app.add_subcommand("sweep", "Monte Carlo sweep over n, error fraction and noise");
  SweepSpec spec;
  spec.error_fractions = {0.0};
  std::string sweep_mode = "honest";
  std::string sweep_strategy = "honest-bases";
  double sweep_lie = 0.5;
  std::string sweep_format = "csv";
  std::string sweep_out;
  PolicyFlags sweep_policy;
  sweep->add_option("--n-list", spec.n_values, "Comma-separated photon counts")->delimiter(',')->required();
  sweep->add_option("--error-list", spec.error_fractions, "Comma-separated error fractions")
      ->delimiter(',')
      ->check(CLI::Range(0.0, 1.0));
  sweep->add_option("--noise-list", spec.noise_rates, "Comma-separated noise rates")
      ->delimiter(',')
      ->check(CLI::Range(0.0, 1.0));
  sweep->add_option("--trials", spec.trials_per_cell, "Trials per cell")->check(CLI::PositiveNumber);
  sweep->add_option("--mode", sweep_mode, "Statistic to estimate")
      ->check(CLI::IsMember({"honest", "preunveil", "binding"}));
  add_strategy_flags(sweep, sweep_strategy, sweep_lie);
  sweep->add_option("--seed", spec.master_seed.master, "Master seed");
  sweep->add_option("--threads", spec.threads, "Worker threads (0 = all cores)");
  sweep->add_option("--format", sweep_format, "Report format")->check(CLI::IsMember({"csv", "json"}));
  sweep->add_option("--out", sweep_out, "Report path (default: stdout)");
  sweep_policy.attach(sweep);

  // attack
  auto* attack = app.add_subcommand("attack", "Evaluate a cheating strategy");
  attack->require_subcommand(1);
  std::size_t atk_n = 256;
  double atk_e = 0.0;
  std::size_t atk_trials = 10000;
  RngSeed atk_seed{};
  std::string atk_output = "text";
  auto* preunveil = attack->add_subcommand("preunveil", "Bob guesses the bit before bases are unveiled");
  auto* rebind = attack->add_subcommand("rebind", "Alice lies about her bases to flip the bit");
  std::string atk_strategy = "flip-all";
  double atk_lie = 0.5;
  PolicyFlags atk_policy;
  for (auto* sub : {preunveil, rebind}) {
    sub->add_option("--n", atk_n, "Number of photons");
    sub->add_option("--error-fraction", atk_e, "Fraction of results Alice randomizes")->check(CLI::Range(0.0, 1.0));
    sub->add_option("--trials", atk_trials, "Number of trials")->check(CLI::PositiveNumber);
    sub->add_option("--seed", atk_seed.master, "Master seed");
    sub->add_option("--output", atk_output, "Output format")->check(CLI::IsMember({"json", "text"}));
  }
  add_strategy_flags(rebind, atk_strategy, atk_lie);
  atk_policy.attach(rebind);

  // referee
  auto* referee = app.add_subcommand("referee", "Serve one networked session as the trusted referee");
  wire::RefereeOptions ref_opts;
  ref_opts.listen.clear();
  ref_opts.transcript_path = "transcript.jsonl";
  referee->add_option("--listen", ref_opts.listen, "HOST:PORT")->required();
  referee->add_option("--seed", ref_opts.seed.master, "Seed for the channel substream");
  referee->add_option("--noise-rate", ref_opts.noise_rate, "Channel bit-flip probability")
      ->check(CLI::Range(0.0, 1.0));
  referee->add_option("--transcript", ref_opts.transcript_path, "Transcript file (JSON lines)");

  // party
  auto* party = app.add_subcommand("party", "Run alice or bob against a referee");
  wire::PartyOptions party_opts;
  std::string party_role;
  int party_bit = 0;
  PolicyFlags party_policy;
  party->add_option("--role", party_role, "alice or bob")->required()->check(CLI::IsMember({"alice", "bob"}));
  party->add_option("--connect", party_opts.connect, "Referee HOST:PORT")->required();
  party->add_option("--n", party_opts.n, "Number of photons")->required();
  party->add_option("--bit", party_bit, "Committed bit (alice)")->check(CLI::IsMember({0, 1}));
  party->add_option("--error-fraction", party_opts.error_fraction, "Fraction of results alice randomizes")
      ->check(CLI::Range(0.0, 1.0));
  party->add_option("--seed", party_opts.seed.master, "Master seed");
  party_policy.attach(party);

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    app.exit(e, err, err);
    return kUsageError;
  }

  try {
    if (simulate->parsed()) {
      sim.committed_bit = bit_from(sim_bit == 1);
      sim.policy = sim_policy.policy;
      const TrialReport r = run_honest_session(sim);
      if (sim_output == "json") {
        out << report_json(r).dump(2) << '\n';
      } else {
        out << "n=" << sim.n << " bit=" << sim_bit << " error_fraction=" << fixed6(sim.error_fraction)
            << " noise_rate=" << fixed6(sim.noise_rate) << " seed=" << sim.seed.master << '\n'
            << "raw correlation     direct=" << fixed6(r.raw.direct) << " reverse=" << fixed6(r.raw.reverse) << '\n'
            << "sifted " << r.alignment.sift_size << " positions: direct=" << r.alignment.direct_matches
            << " reverse=" << r.alignment.reverse_matches << '\n'
            << "decision            " << to_string(r.decision) << '\n';
      }
      return 0;
    }

    if (sweep->parsed()) {
      spec.policy = sweep_policy.policy;
      if (sweep_mode == "honest") {
        spec.mode = {ModeKind::Honest, HonestBases{}};
      } else if (sweep_mode == "preunveil") {
        spec.mode = {ModeKind::PreUnveil, HonestBases{}};
      } else {
        spec.mode = {ModeKind::Binding, make_strategy(sweep_strategy, sweep_lie)};
      }
      const SweepReport report = run_sweep(spec);
      const ReportFormat fmt = sweep_format == "csv" ? ReportFormat::Csv : ReportFormat::Json;
      if (sweep_out.empty()) {
        out << (fmt == ReportFormat::Csv ? format_csv(report) : format_json(report));
      } else {
        write_report(report, fmt, sweep_out);
      }
      return 0;
    }

    if (preunveil->parsed()) {
      const double rate = estimate_preunveil_success(atk_n, atk_e, atk_trials, atk_seed);
      const auto hits = static_cast<std::size_t>(std::llround(rate * static_cast<double>(atk_trials)));
      const auto ci = stats::binomial_ci(hits, atk_trials);
      if (atk_output == "json") {
        out << json{{"attack", "preunveil"}, {"n", atk_n}, {"error_fraction", atk_e}, {"trials", atk_trials},
                    {"seed", atk_seed.master}, {"success_rate", rate}, {"ci_low", ci.low}, {"ci_high", ci.high}}
                   .dump(2)
            << '\n';
      } else {
        out << "pre-unveil guess success " << fixed6(rate) << " (95% CI " << fixed6(ci.low) << " - "
            << fixed6(ci.high) << ") over " << atk_trials << " trials\n";
      }
      return 0;
    }

    if (rebind->parsed()) {
      const RebindStrategy strategy = make_strategy(atk_strategy, atk_lie);
      const AttackReport r = evaluate_binding(atk_n, atk_e, strategy, atk_trials, atk_seed, atk_policy.policy);
      if (atk_output == "json") {
        out << json{{"attack", "rebind"},
                    {"strategy", to_string(strategy)},
                    {"n", atk_n},
                    {"error_fraction", atk_e},
                    {"trials", r.trials},
                    {"seed", atk_seed.master},
                    {"success_count", r.success_count},
                    {"detection_count", r.detection_count},
                    {"ambiguous_count", r.ambiguous_count},
                    {"original_count", r.original_count}}
                   .dump(2)
            << '\n';
      } else {
        out << "strategy " << to_string(strategy) << ": flip success " << r.success_count << '/' << r.trials
            << ", detected " << r.detection_count << ", ambiguous " << r.ambiguous_count << ", original bit "
            << r.original_count << '\n';
      }
      return 0;
    }

    if (referee->parsed()) {
      wire::Referee server(ref_opts);
      err << "referee listening on port " << server.port() << std::endl;
      const auto transcript = server.serve();
      return transcript.violated ? kRuntimeError : 0;
    }

    if (party->parsed()) {
      party_opts.role = wire::role_from_string(party_role);
      party_opts.bit = bit_from(party_bit == 1);
      party_opts.policy = party_policy.policy;
      return wire::party_run(party_opts, out, err);
    }
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kRuntimeError;
  }
  return kUsageError;
}

int cli_main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return run_cli(args, std::cout, std::cerr);
}

}  // namespace qbc
