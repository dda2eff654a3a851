#pragma once
// Closed-form curves and bounds, the four-panel sweep datasets, and the
// reference-table adjudication report.
//
// The tabulated reference coefficients shipped here (the published bound
// table for 3-pair contamination) are compared against the exact Fock oracle;
// every mismatch is reported with both numbers, never silently replaced.

#include <array>
#include <cmath>
#include <functional>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "qerc/protocol.hpp"
#include "qerc/three_pair.hpp"

namespace qerc::analysis {

using protocol::AverageMode;

inline double eta_from_epsilon(double epsilon) {
  if (epsilon < 0.0) throw std::domain_error("eta_from_epsilon: epsilon >= 0");
  return epsilon / (1.0 + epsilon);
}

inline double epsilon_from_eta(double eta) {
  if (!(eta >= 0.0 && eta < 1.0)) {
    throw std::domain_error("epsilon_from_eta: eta in [0, 1)");
  }
  return eta / (1.0 - eta);
}

// Closed forms for the error rates (the enumeration engine in protocol.hpp
// reproduces these; the closed forms drive the dataset generators).
inline double coded_error_rate_closed(double eta, AverageMode mode) {
  const double denom = (1.0 - eta) * (1.0 - eta) + eta * eta;
  const double scale = mode == AverageMode::BlochHaar ? 2.0 / 3.0 : 0.5;
  return scale * eta * eta / denom;
}

inline double direct_error_rate_closed(double eta, AverageMode mode) {
  return mode == AverageMode::BlochHaar ? 2.0 * eta / 3.0 : 0.5 * eta;
}

struct BoundParams {
  double p;
  double xi;
  double eta;

  void validate() const {
    if (!(p > 0.0 && p < 1.0)) throw std::domain_error("BoundParams: p in (0,1)");
    if (!(xi > 0.0 && xi <= 1.0)) throw std::domain_error("BoundParams: xi in (0,1]");
    if (!(eta > 0.0 && eta < 0.5)) throw std::domain_error("BoundParams: eta in (0,1/2)");
  }
};

// C4 probability from 2-pair emission: xi^4 eta^2 p^2 / 16. The 1/16 bundles
// the heralding, encoding-check and parity-check branch weights; the exact
// circuit reproduces it for a computational-basis input.
inline double lambda2(const BoundParams& params) {
  params.validate();
  const double xi4 = std::pow(params.xi, 4);
  return xi4 * params.eta * params.eta * params.p * params.p / 16.0;
}

// Flip-configuration bracket of the 3-pair bound.
inline double lambda3_bracket(double eta) {
  const double q = 1.0 - eta;
  return q * q * (19.0 / 48.0) + q * eta * (7.0 / 24.0) + eta * eta * (17.0 / 48.0);
}

// Upper bound on the C4 probability from all 3-pair emissions.
inline double lambda3(const BoundParams& params) {
  params.validate();
  const double xi4 = std::pow(params.xi, 4);
  return xi4 * lambda3_bracket(params.eta) * 0.75 * params.p * params.p * params.p;
}

// Observable error-rate bound E_c' = (1 + lambda3/lambda2) E_c. The ratio
// lambda3/lambda2 = 12 p * bracket(eta) / eta^2 carries no xi dependence.
inline double ec_prime(const BoundParams& params, AverageMode mode) {
  params.validate();
  const double ratio = lambda3(params) / lambda2(params);
  return (1.0 + ratio) * coded_error_rate_closed(params.eta, mode);
}

struct CurvePoint {
  double eta;
  double e0_bloch;
  double e0_fourstate;
  double ec_bloch;
  double ec_fourstate;
  double ec_prime;  // Bloch-based, so it dominates both E_c columns
};

inline std::vector<double> default_eta_grid() {
  std::vector<double> grid;
  grid.reserve(100);
  for (int i = 0; i < 100; ++i) {
    grid.push_back(0.005 + (0.495 - 0.005) * i / 99.0);
  }
  return grid;
}

inline CurvePoint curve_point(double eta, double p, double xi = 1.0) {
  CurvePoint c{};
  c.eta = eta;
  c.e0_bloch = direct_error_rate_closed(eta, AverageMode::BlochHaar);
  c.e0_fourstate = direct_error_rate_closed(eta, AverageMode::FourState);
  c.ec_bloch = coded_error_rate_closed(eta, AverageMode::BlochHaar);
  c.ec_fourstate = coded_error_rate_closed(eta, AverageMode::FourState);
  if (p > 0.0) {
    c.ec_prime = ec_prime({p, xi, eta}, AverageMode::BlochHaar);
  } else {
    c.ec_prime = c.ec_bloch;
  }
  return c;
}

inline std::vector<CurvePoint> fig2_dataset(double p,
                                            const std::vector<double>& grid) {
  std::vector<CurvePoint> points;
  points.reserve(grid.size());
  for (double eta : grid) points.push_back(curve_point(eta, p));
  return points;
}

// Largest eta sub-interval of the grid where E_c'(eta) < E_0(eta) / 3 (both
// Bloch columns); empty optional if no grid point qualifies.
inline std::optional<std::pair<double, double>> negligible_distortion_interval(
    double p, const std::vector<double>& grid) {
  std::optional<std::pair<double, double>> best;
  std::optional<double> start;
  double last = 0.0;
  auto close_run = [&](double end) {
    if (start && (!best || end - *start > best->second - best->first)) {
      best = std::make_pair(*start, end);
    }
    start.reset();
  };
  for (double eta : grid) {
    const CurvePoint c = curve_point(eta, p);
    if (c.ec_prime < c.e0_bloch / 3.0) {
      if (!start) start = eta;
      last = eta;
    } else {
      close_run(last);
    }
  }
  close_run(last);
  return best;
}

// --- Reference bound table ----------------------------------------------------
//
// Published reference coefficients of xi^4 for the C4 contamination from
// 3-pair emission. Layout follows the oracle's state order:
//   r0, r1pp, r3, rb, l0, l1pp, l3, lb.

namespace reference {

// Per-state four-input averages.
inline constexpr std::array<double, 8> kC4Average = {
    3.0 / 16.0, 1.0 / 16.0, 1.0 / 16.0, 17.0 / 96.0,
    5.0 / 24.0, 1.0 / 12.0, 1.0 / 12.0, 5.0 / 24.0};

// Per-input values stated for the r0 state, in bb84_amplitudes() order.
inline constexpr std::array<double, 4> kR0PerInput = {1.0 / 24.0, 1.0 / 24.0,
                                                      7.0 / 48.0, 7.0 / 48.0};

// Per-term values stated for r0 at the balanced input (1,1)/sqrt(2). The
// first entry is printed with a xi^2 typo in the source table; the row sum
// 7/48 forces 1/48.
inline constexpr std::array<double, 8> kR0BalancedTerms = {
    1.0 / 48.0, 1.0 / 48.0, 1.0 / 24.0, 1.0 / 24.0,
    1.0 / 96.0, 1.0 / 96.0, 0.0,        0.0};
inline constexpr double kR0BalancedSum = 7.0 / 48.0;

// Flip-configuration brackets used by lambda3.
inline constexpr double kBracketNoFlip = 19.0 / 48.0;
inline constexpr double kBracketOneFlip = 7.0 / 24.0;
inline constexpr double kBracketBothFlip = 17.0 / 48.0;

inline const std::array<const char*, 8>& state_names() {
  static const std::array<const char*, 8> names = {"r0", "r1pp", "r3", "rb",
                                                   "l0", "l1pp", "l3", "lb"};
  return names;
}

inline std::array<std::pair<spdc::SourceSide, spdc::FlipConfig>, 8> state_keys() {
  using spdc::FlipConfig;
  using spdc::SourceSide;
  return {std::pair{SourceSide::Right, FlipConfig::None},
          {SourceSide::Right, FlipConfig::Beam1},
          {SourceSide::Right, FlipConfig::Beam3},
          {SourceSide::Right, FlipConfig::Both},
          {SourceSide::Left, FlipConfig::None},
          {SourceSide::Left, FlipConfig::Beam1},
          {SourceSide::Left, FlipConfig::Beam3},
          {SourceSide::Left, FlipConfig::Both}};
}

}  // namespace reference

// --- Three-pair table ----------------------------------------------------------

struct ThreePairTableRow {
  std::string state;
  complexd alpha;
  complexd beta;
  spdc::FlipConfig flip;
  std::optional<double> paper_coeff;  // reference value for this cell, if stated
  double oracle_coeff_paperbound;
  double oracle_coeff_exact;
};

inline std::vector<ThreePairTableRow> three_pair_table() {
  std::vector<ThreePairTableRow> rows;
  const auto keys = reference::state_keys();
  const auto names = reference::state_names();
  spdc::DetectorModel bound{1.0, spdc::ClickMode::PaperBound,
                            spdc::MultifoldPolicy::FiveFoldAsC4};
  spdc::DetectorModel exact{1.0, spdc::ClickMode::Exact,
                            spdc::MultifoldPolicy::FiveFoldAsC4};
  for (std::size_t s = 0; s < keys.size(); ++s) {
    const auto inputs = spdc::bb84_amplitudes();
    for (std::size_t i = 0; i < inputs.size(); ++i) {
      spdc::ThreePairInput input{keys[s].first, inputs[i].first,
                                 inputs[i].second, keys[s].second};
      ThreePairTableRow row;
      row.state = names[s];
      row.alpha = input.alpha;
      row.beta = input.beta;
      row.flip = input.flip;
      if (s == 0) {
        row.paper_coeff = reference::kR0PerInput[i];
      } else {
        row.paper_coeff = reference::kC4Average[s];
      }
      row.oracle_coeff_paperbound =
          spdc::three_pair_c4_probability(input, bound).xi4_coefficient;
      row.oracle_coeff_exact =
          spdc::three_pair_c4_probability(input, exact).xi4_coefficient;
      rows.push_back(row);
    }
  }
  return rows;
}

// --- Comparison report -----------------------------------------------------------

struct ReportEntry {
  std::string label;
  double reference_value;
  double oracle_value;
  bool match;
  std::string note;
};

struct ComparisonReport {
  std::vector<ReportEntry> entries;

  std::vector<ReportEntry> mismatches() const {
    std::vector<ReportEntry> out;
    for (const auto& e : entries) {
      if (!e.match) out.push_back(e);
    }
    return out;
  }
};

inline void add_entry(ComparisonReport& report, const std::string& label,
                      double reference, double oracle, std::string note = "",
                      double tol = 1e-12) {
  report.entries.push_back(
      {label, reference, oracle, std::abs(reference - oracle) <= tol,
       std::move(note)});
}

// Tabulates reference values against the exact oracle: per-term and per-state
// C4 coefficients, the bracket coefficients behind lambda3, and the two
// error-rate conventions. Flags every mismatch with both numbers.
inline ComparisonReport comparison_report() {
  ComparisonReport report;
  spdc::DetectorModel bound{1.0, spdc::ClickMode::PaperBound,
                            spdc::MultifoldPolicy::FiveFoldAsC4};

  // r0 per-input values.
  const auto inputs = spdc::bb84_amplitudes();
  const std::array<const char*, 4> input_names = {"(1,0)", "(0,1)", "(1,1)/sqrt2",
                                                  "(1,-1)/sqrt2"};
  double oracle_r0_sum = 0.0;
  for (std::size_t i = 0; i < inputs.size(); ++i) {
    spdc::ThreePairInput input{spdc::SourceSide::Right, inputs[i].first,
                               inputs[i].second, spdc::FlipConfig::None};
    const double oracle =
        spdc::three_pair_c4_probability(input, bound).xi4_coefficient;
    oracle_r0_sum += oracle;
    add_entry(report, std::string("r0 C4 coeff at ") + input_names[i],
              reference::kR0PerInput[i], oracle);
  }

  // r0 average: the reference average, the mean of the reference per-input
  // cells, and the oracle mean.
  const double ref_cells_mean =
      (reference::kR0PerInput[0] + reference::kR0PerInput[1] +
       reference::kR0PerInput[2] + reference::kR0PerInput[3]) /
      4.0;
  add_entry(report, "r0 C4 average (reference avg vs mean of its own cells)",
            reference::kC4Average[0], ref_cells_mean,
            "reference average is not the mean of its per-input cells");
  add_entry(report, "r0 C4 average (reference avg vs oracle mean)",
            reference::kC4Average[0],
            spdc::three_pair_average_coefficient(spdc::SourceSide::Right,
                                                 spdc::FlipConfig::None, bound));

  // Per-state averages.
  const auto keys = reference::state_keys();
  const auto names = reference::state_names();
  std::array<double, 8> oracle_avg{};
  for (std::size_t s = 0; s < keys.size(); ++s) {
    oracle_avg[s] = spdc::three_pair_average_coefficient(keys[s].first,
                                                         keys[s].second, bound);
    add_entry(report, std::string(names[s]) + " C4 average coeff",
              reference::kC4Average[s], oracle_avg[s]);
  }

  // First-table per-term values at the balanced input.
  {
    spdc::ThreePairInput balanced{spdc::SourceSide::Right, 1.0 / std::sqrt(2.0),
                                  1.0 / std::sqrt(2.0), spdc::FlipConfig::None};
    const spdc::ThreePairState st = spdc::three_pair_state(balanced, bound);
    // Product kets in the tabulated order, as (nH, nV) per beam (0, I1, 2', 3'').
    const std::array<std::array<std::array<int, 2>, 4>, 8> terms = {{
        {{{2, 0}, {2, 0}, {1, 0}, {1, 0}}},  // |2H>|2H,H,H>
        {{{2, 0}, {0, 1}, {0, 2}, {0, 1}}},  // |2H>|V,2V,V>
        {{{2, 0}, {1, 0}, {1, 1}, {1, 0}}},  // |2H>|H,HV,H>
        {{{2, 0}, {1, 1}, {0, 1}, {0, 1}}},  // |2H>|HV,V,V>
        {{{1, 1}, {2, 0}, {1, 0}, {1, 0}}},  // |HV>|2H,H,H>
        {{{1, 1}, {0, 1}, {0, 2}, {0, 1}}},  // |HV>|V,2V,V>
        {{{1, 1}, {1, 0}, {1, 1}, {1, 0}}},  // |HV>|H,HV,H>
        {{{1, 1}, {1, 1}, {0, 1}, {0, 1}}},  // |HV>|HV,V,V>
    }};
    for (std::size_t t = 0; t < terms.size(); ++t) {
      const double oracle = spdc::three_pair_term_coefficient(
          st, spdc::three_pair_term_occupation(terms[t]));
      add_entry(report,
                "r0 balanced-input term " + std::to_string(t + 1) + " coeff",
                reference::kR0BalancedTerms[t], oracle,
                t == 0 ? "printed with a xi^2 exponent typo; 1/48 restored by the row sum"
                       : "");
    }
  }

  // First-table row sum at the balanced input.
  double ref_term_sum = 0.0;
  for (double t : reference::kR0BalancedTerms) ref_term_sum += t;
  add_entry(report, "r0 balanced-input term sum (reference table internal)",
            reference::kR0BalancedSum, ref_term_sum,
            "row sum of the reference per-term table");
  spdc::ThreePairInput balanced{spdc::SourceSide::Right, 1.0 / std::sqrt(2.0),
                                1.0 / std::sqrt(2.0), spdc::FlipConfig::None};
  add_entry(report, "r0 balanced-input C4 coeff (reference sum vs oracle)",
            reference::kR0BalancedSum,
            spdc::three_pair_c4_probability(balanced, bound).xi4_coefficient);

  // Bracket coefficients: reference formula vs the sum of the reference
  // per-state averages, and vs the oracle sums.
  add_entry(report, "no-flip bracket (formula vs reference-table sum)",
            reference::kBracketNoFlip,
            reference::kC4Average[0] + reference::kC4Average[4]);
  add_entry(report, "one-flip bracket (formula vs reference-table sum)",
            reference::kBracketOneFlip,
            reference::kC4Average[1] + reference::kC4Average[2] +
                reference::kC4Average[5] + reference::kC4Average[6]);
  add_entry(report, "both-flip bracket (formula vs reference-table sum)",
            reference::kBracketBothFlip,
            reference::kC4Average[3] + reference::kC4Average[7],
            "reference formula disagrees with its own table");
  add_entry(report, "no-flip bracket (formula vs oracle)",
            reference::kBracketNoFlip, oracle_avg[0] + oracle_avg[4]);
  add_entry(report, "one-flip bracket (formula vs oracle)",
            reference::kBracketOneFlip,
            oracle_avg[1] + oracle_avg[2] + oracle_avg[5] + oracle_avg[6]);
  add_entry(report, "both-flip bracket (formula vs oracle)",
            reference::kBracketBothFlip, oracle_avg[3] + oracle_avg[7]);

  // Error-rate conventions from the enumeration engine.
  const double eta = 0.1;
  add_entry(report, "direct error rate, Bloch convention (2 eta / 3)",
            2.0 * eta / 3.0,
            protocol::direct_error_rate(eta, AverageMode::BlochHaar));
  add_entry(report, "direct error rate, four-state convention (eta / 2)",
            eta / 2.0, protocol::direct_error_rate(eta, AverageMode::FourState));
  add_entry(report, "coded error rate, Bloch convention",
            coded_error_rate_closed(eta, AverageMode::BlochHaar),
            protocol::coded_error_rate(eta, AverageMode::BlochHaar));
  add_entry(report, "coded error rate, four-state convention",
            coded_error_rate_closed(eta, AverageMode::FourState),
            protocol::coded_error_rate(eta, AverageMode::FourState));

  // lambda2 normalization: exact circuit C4 probability for a basis input.
  {
    spdc::DetectorModel exact{0.5, spdc::ClickMode::Exact,
                              spdc::MultifoldPolicy::FiveFoldAsC4};
    const double eps = epsilon_from_eta(eta);
    spdc::Circuit circuit(0.0, 0.0, spdc::FlipBoxParams{eps}, exact);
    const spdc::EventTally t =
        spdc::run_exact(circuit.two_pair_emission(), circuit);
    const double p_ref = 0.002;
    const double lam2 = lambda2({p_ref, exact.xi, eta});
    add_entry(report, "lambda2 vs exact 2-pair C4 probability (basis input)",
              lam2, t.n4 * p_ref * p_ref);
  }

  return report;
}

inline std::string render_report(const ComparisonReport& report) {
  std::ostringstream os;
  os << "reference-vs-oracle comparison (" << report.entries.size()
     << " checks, " << report.mismatches().size() << " mismatches)\n";
  for (const auto& e : report.entries) {
    os << (e.match ? "  [ok]       " : "  [MISMATCH] ") << e.label
       << ": reference=" << e.reference_value << " oracle=" << e.oracle_value;
    if (!e.note.empty()) os << "  (" << e.note << ")";
    os << "\n";
  }
  return os.str();
}

}  // namespace qerc::analysis
