#pragma once
// Command-line driver: sweeps, oracles, dataset generation, and the property
// suite, all referentially transparent given (flags, seed). Data goes to
// files; summaries go to standard output.

#include <CLI11.hpp>
#include <cstdint>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "qerc/analysis.hpp"
#include "qerc/csv.hpp"
#include "qerc/monte_carlo.hpp"
#include "qerc/verify.hpp"

namespace qerc::cli {

// A rate flag that accepts exact rationals ("1/9") as well as decimals, so
// conversions like eta = eps/(1+eps) can be done in integer arithmetic.
struct RateValue {
  bool is_rational = false;
  long long num = 0;
  long long den = 1;
  double value = 0.0;
};

inline RateValue parse_rate(const std::string& text, const std::string& flag) {
  RateValue r;
  const auto slash = text.find('/');
  try {
    if (slash != std::string::npos) {
      r.is_rational = true;
      r.num = std::stoll(text.substr(0, slash));
      r.den = std::stoll(text.substr(slash + 1));
      if (r.den == 0) throw std::invalid_argument("zero denominator");
      r.value = static_cast<double>(r.num) / static_cast<double>(r.den);
    } else {
      std::size_t used = 0;
      r.value = std::stod(text, &used);
      if (used != text.size()) throw std::invalid_argument("trailing characters");
    }
  } catch (const std::exception&) {
    throw CLI::ValidationError(flag, "expected a number or rational like 1/9");
  }
  return r;
}

struct RunConfig {
  std::optional<RateValue> eta;
  std::optional<RateValue> epsilon;
  double p = 0.0;
  bool p_given = false;
  double xi = 1.0;
  uint64_t trials = 1000000;
  uint64_t seed = 1;
  int shards = 1;
  protocol::AverageMode average = protocol::AverageMode::FourState;
  spdc::ClickMode detector_mode = spdc::ClickMode::Exact;
  std::string out;

  // Resolved channel parameters; eta and epsilon are mutually exclusive and
  // converted exactly when one is given as a rational.
  double resolved_eta(const std::string& context) const {
    if (eta && epsilon) {
      throw CLI::ValidationError("--eta/--epsilon",
                                 "give exactly one of --eta and --epsilon");
    }
    double value;
    if (epsilon) {
      if (epsilon->value < 0.0) {
        throw CLI::ValidationError("--epsilon", "must be >= 0");
      }
      value = epsilon->is_rational
                  ? static_cast<double>(epsilon->num) /
                        static_cast<double>(epsilon->num + epsilon->den)
                  : analysis::eta_from_epsilon(epsilon->value);
    } else if (eta) {
      value = eta->value;
    } else {
      throw CLI::ValidationError(context, "requires --eta or --epsilon");
    }
    if (!(value >= 0.0 && value < 0.5)) {
      throw CLI::ValidationError("--eta", "flip rate must be in [0, 1/2)");
    }
    return value;
  }

  double resolved_epsilon(const std::string& context) const {
    if (eta && epsilon) {
      throw CLI::ValidationError("--eta/--epsilon",
                                 "give exactly one of --eta and --epsilon");
    }
    if (epsilon) {
      if (epsilon->value < 0.0) {
        throw CLI::ValidationError("--epsilon", "must be >= 0");
      }
      return epsilon->value;
    }
    if (eta) {
      if (!(eta->value >= 0.0 && eta->value < 0.5)) {
        throw CLI::ValidationError("--eta", "flip rate must be in [0, 1/2)");
      }
      if (eta->is_rational) {
        return static_cast<double>(eta->num) /
               static_cast<double>(eta->den - eta->num);
      }
      return analysis::epsilon_from_eta(eta->value);
    }
    throw CLI::ValidationError(context, "requires --eta or --epsilon");
  }
};

namespace detail {

inline std::string fmt(double v) { return csv::format_double(v); }

inline csv::Writer curve_csv(const std::vector<analysis::CurvePoint>& points) {
  csv::Writer w("eta,e0_bloch,e0_fourstate,ec_bloch,ec_fourstate,ec_prime");
  for (const auto& c : points) {
    w.add_row({fmt(c.eta), fmt(c.e0_bloch), fmt(c.e0_fourstate), fmt(c.ec_bloch),
               fmt(c.ec_fourstate), fmt(c.ec_prime)});
  }
  return w;
}

inline int cmd_protocol_sweep(const RunConfig& cfg) {
  std::vector<double> grid;
  if (cfg.eta || cfg.epsilon) {
    grid.push_back(cfg.resolved_eta("protocol-sweep"));
  } else {
    grid = analysis::default_eta_grid();
  }
  std::vector<analysis::CurvePoint> points;
  for (double eta : grid) points.push_back(analysis::curve_point(eta, 0.0));
  const std::string path = cfg.out.empty() ? "protocol_sweep.csv" : cfg.out;
  curve_csv(points).write_file(path);
  std::cout << "protocol-sweep: wrote " << points.size() << " rows to " << path
            << "\n";
  return 0;
}

inline int cmd_fig2(const RunConfig& cfg) {
  std::vector<double> ps;
  if (cfg.p_given) {
    if (!(cfg.p > 0.0 && cfg.p < 1.0)) {
      throw CLI::ValidationError("--p", "must be in (0, 1)");
    }
    ps.push_back(cfg.p);
  } else {
    ps = {0.01, 0.005, 0.002, 0.001};
  }
  const auto grid = analysis::default_eta_grid();
  for (double p : ps) {
    std::string path;
    if (cfg.p_given && !cfg.out.empty()) {
      path = cfg.out;
    } else {
      const std::string prefix = cfg.out.empty() ? "fig2" : cfg.out;
      path = prefix + "_p" + fmt(p) + ".csv";
    }
    curve_csv(analysis::fig2_dataset(p, grid)).write_file(path);
    std::cout << "fig2: p=" << fmt(p) << " wrote " << grid.size() << " rows to "
              << path << "\n";
  }
  return 0;
}

inline int cmd_three_pair_table(const RunConfig& cfg) {
  const auto rows = analysis::three_pair_table();
  csv::Writer w(
      "state,alpha_re,alpha_im,beta_re,beta_im,flip_config,paper_coeff,"
      "oracle_coeff_paperbound,oracle_coeff_exact");
  for (const auto& r : rows) {
    w.add_row({r.state, fmt(r.alpha.real()), fmt(r.alpha.imag()),
               fmt(r.beta.real()), fmt(r.beta.imag()), spdc::to_string(r.flip),
               r.paper_coeff ? fmt(*r.paper_coeff) : std::string{},
               fmt(r.oracle_coeff_paperbound), fmt(r.oracle_coeff_exact)});
  }
  const std::string path = cfg.out.empty() ? "three_pair_table.csv" : cfg.out;
  w.write_file(path);
  std::cout << "three-pair-table: wrote " << rows.size() << " rows to " << path
            << "\n";
  std::cout << analysis::render_report(analysis::comparison_report());
  return 0;
}

inline int cmd_monte_carlo(const RunConfig& cfg) {
  spdc::MonteCarloParams params;
  params.epsilon = cfg.resolved_epsilon("monte-carlo");
  params.detector = {cfg.xi, cfg.detector_mode, spdc::MultifoldPolicy::FiveFoldAsC4};
  params.average = cfg.average;
  params.trials = cfg.trials;
  params.seed = cfg.seed;
  params.shards = cfg.shards;
  params.three_pair = cfg.p_given;
  params.p = cfg.p;
  if (cfg.trials < 1) throw CLI::ValidationError("--trials", "must be >= 1");
  if (!(cfg.xi > 0.0 && cfg.xi <= 1.0)) {
    throw CLI::ValidationError("--xi", "must be in (0, 1]");
  }
  const spdc::EventTally t = spdc::run_monte_carlo(params);
  csv::Writer w(
      "trials,n1,n4,rejected,rejected_threefold,accept_rate,conditional_error,"
      "conditional_error_se");
  w.add_row({fmt(t.trials), fmt(t.n1), fmt(t.n4), fmt(t.rejected),
             fmt(t.rejected_threefold), fmt(t.accepted() / t.trials),
             fmt(t.conditional_error()), fmt(t.conditional_error_se())});
  const std::string path = cfg.out.empty() ? "monte_carlo.csv" : cfg.out;
  w.write_file(path);
  std::cout << "monte-carlo: trials=" << fmt(t.trials) << " N1=" << fmt(t.n1)
            << " N4=" << fmt(t.n4)
            << " accept_rate=" << fmt(t.accepted() / t.trials)
            << " N4/(N1+N4)=" << fmt(t.conditional_error()) << " +- "
            << fmt(t.conditional_error_se()) << " -> " << path << "\n";
  return 0;
}

inline int cmd_verify() {
  const auto results = verify::run_all();
  bool all = true;
  for (const auto& r : results) {
    std::cout << (r.pass ? "[PASS] " : "[FAIL] ") << r.name << " - " << r.detail
              << "\n";
    all = all && r.pass;
  }
  std::cout << (all ? "verify: all checks passed\n" : "verify: FAILURES\n");
  return all ? 0 : 1;
}

}  // namespace detail

inline int run(std::vector<std::string> args) {
  CLI::App app{"2-qubit bit-flip error-rejection code simulator"};
  app.require_subcommand(1);

  RunConfig cfg;
  std::string eta_text, eps_text, average_text = "four-state",
                                  detector_text = "exact";

  auto add_common = [&](CLI::App* cmd, bool with_channel, bool with_mc) {
    if (with_channel) {
      auto* eta_opt = cmd->add_option("--eta", eta_text, "flip rate (number or a/b)");
      auto* eps_opt =
          cmd->add_option("--epsilon", eps_text, "box leak parameter (number or a/b)");
      eta_opt->excludes(eps_opt);
      eps_opt->excludes(eta_opt);
    }
    cmd->add_option("--p", cfg.p, "one-pair emission probability")
        ->each([&](const std::string&) { cfg.p_given = true; });
    cmd->add_option("--out", cfg.out, "output CSV path (or prefix)");
    if (with_mc) {
      cmd->add_option("--xi", cfg.xi, "detector efficiency in (0, 1]");
      cmd->add_option("--trials", cfg.trials, "number of Monte Carlo trials");
      cmd->add_option("--seed", cfg.seed, "master RNG seed");
      cmd->add_option("--shards", cfg.shards, "independent RNG shards");
      cmd->add_option("--average", average_text, "bloch | four-state");
      cmd->add_option("--detector-mode", detector_text, "exact | paper-bound");
    }
  };

  auto* sweep = app.add_subcommand("protocol-sweep",
                                   "error-rate grid from the qubit-level code");
  add_common(sweep, true, false);
  sweep->add_option("--average", average_text, "bloch | four-state");

  auto* fig2 = app.add_subcommand("fig2", "curve datasets for the four panel p values");
  add_common(fig2, false, false);

  auto* table = app.add_subcommand("three-pair-table",
                                   "reference-vs-oracle C4 contamination table");
  add_common(table, false, false);
  table->add_option("--detector-mode", detector_text, "exact | paper-bound");

  auto* mc = app.add_subcommand("monte-carlo", "seeded coincidence-count simulation");
  add_common(mc, true, true);

  app.add_subcommand("verify", "run the invariant property suite");

  std::vector<const char*> argv;
  argv.push_back("qerc");
  for (const auto& a : args) argv.push_back(a.c_str());

  try {
    app.parse(static_cast<int>(argv.size()), argv.data());

    if (!eta_text.empty()) cfg.eta = parse_rate(eta_text, "--eta");
    if (!eps_text.empty()) cfg.epsilon = parse_rate(eps_text, "--epsilon");
    if (average_text == "bloch") {
      cfg.average = protocol::AverageMode::BlochHaar;
    } else if (average_text == "four-state") {
      cfg.average = protocol::AverageMode::FourState;
    } else {
      throw CLI::ValidationError("--average", "must be bloch or four-state");
    }
    if (detector_text == "exact") {
      cfg.detector_mode = spdc::ClickMode::Exact;
    } else if (detector_text == "paper-bound") {
      cfg.detector_mode = spdc::ClickMode::PaperBound;
    } else {
      throw CLI::ValidationError("--detector-mode", "must be exact or paper-bound");
    }

    if (sweep->parsed()) return detail::cmd_protocol_sweep(cfg);
    if (fig2->parsed()) return detail::cmd_fig2(cfg);
    if (table->parsed()) return detail::cmd_three_pair_table(cfg);
    if (mc->parsed()) return detail::cmd_monte_carlo(cfg);
    return detail::cmd_verify();
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}

inline int run(int argc, char** argv) {
  std::vector<std::string> args;
  for (int i = 1; i < argc; ++i) args.emplace_back(argv[i]);
  return run(std::move(args));
}

}  // namespace qerc::cli
