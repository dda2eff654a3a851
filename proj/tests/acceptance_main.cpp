// Acceptance suite: one pass/fail line per criterion, nonzero exit on any
// failure. Each criterion pins its tolerances in code.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <numbers>
#include <string>
#include <vector>

#include "qerc/analysis.hpp"
#include "qerc/cli.hpp"
#include "qerc/monte_carlo.hpp"
#include "qerc/three_pair.hpp"
#include "qerc/verify.hpp"

using namespace qerc;
using protocol::AverageMode;

namespace {

struct Outcome {
  bool pass = true;
  std::string detail;

  void require(bool ok, const std::string& what) {
    if (!ok) {
      pass = false;
      detail += (detail.empty() ? "" : "; ") + what;
    }
  }
};

std::vector<double> eta_grid_100() {
  std::vector<double> grid;
  for (int i = 0; i < 100; ++i) grid.push_back(0.004 + 0.0049 * i);
  return grid;
}

// 1. Coded error rate from exact enumeration equals the closed form.
Outcome criterion1() {
  Outcome out;
  double worst = 0.0;
  for (double eta : eta_grid_100()) {
    const double enumerated = protocol::coded_error_rate(eta, AverageMode::BlochHaar);
    const double closed =
        (2.0 / 3.0) * eta * eta / ((1.0 - eta) * (1.0 - eta) + eta * eta);
    worst = std::max(worst, std::abs(enumerated - closed));
  }
  out.require(worst <= 1e-12, "max deviation " + std::to_string(worst));
  out.detail = "100-point grid, max |enumeration - closed form| = " +
               csv::format_double(worst, 3);
  return out;
}

// 2. Both direct-rate conventions from the same enumeration engine.
Outcome criterion2() {
  Outcome out;
  double worst_bloch = 0.0, worst_four = 0.0;
  for (double eta : eta_grid_100()) {
    worst_bloch = std::max(
        worst_bloch,
        std::abs(protocol::direct_error_rate(eta, AverageMode::BlochHaar) -
                 2.0 * eta / 3.0));
    worst_four = std::max(
        worst_four,
        std::abs(protocol::direct_error_rate(eta, AverageMode::FourState) -
                 eta / 2.0));
  }
  out.require(worst_bloch <= 1e-12, "Bloch convention deviates");
  out.require(worst_four <= 1e-12, "four-state convention deviates");
  out.detail = "max deviations " + csv::format_double(worst_bloch, 3) + " (2eta/3), " +
               csv::format_double(worst_four, 3) + " (eta/2)";
  return out;
}

// 3. Full Fock circuit reproduces the closed-form conditional error.
Outcome criterion3() {
  Outcome out;
  const spdc::DetectorModel det{1.0, spdc::ClickMode::Exact,
                                spdc::MultifoldPolicy::FiveFoldAsC4};
  double worst = 0.0;
  for (double eps : {1.0 / 99.0, 1.0 / 19.0, 1.0 / 9.0, 1.0 / 3.0}) {
    const double eta = eps / (1.0 + eps);
    const double optical =
        spdc::two_pair_conditional_error(eps, det, AverageMode::BlochHaar)
            .conditional_error();
    const double closed =
        (2.0 / 3.0) * eta * eta / ((1.0 - eta) * (1.0 - eta) + eta * eta);
    worst = std::max(worst, std::abs(optical - closed));
  }
  out.require(worst <= 1e-10, "max deviation " + std::to_string(worst));
  out.detail = "eps in {1/99,1/19,1/9,1/3}, max |optical - closed| = " +
               csv::format_double(worst, 3);
  return out;
}

// 4. Single-flip branches never leave exactly one photon at the parity port.
Outcome criterion4() {
  Outcome out;
  auto reg = std::make_shared<fock::ModeRegistry>();
  reg->add_beam("beam1");
  reg->add_beam("beam3");
  int checked = 0;
  for (int gi = 0; gi <= 8; ++gi) {
    for (int pj = 0; pj < 8; ++pj) {
      const double gamma = std::numbers::pi * gi / 8.0;
      const double phi = 2.0 * std::numbers::pi * pj / 8.0;
      const complexd c = std::cos(gamma / 2.0);
      const complexd s = std::exp(complexd{0.0, phi}) * std::sin(gamma / 2.0);
      fock::FockState vac = fock::FockState::vacuum(reg);
      const fock::FockState code =
          fock::apply_creation(fock::apply_creation(vac, "beam1", fock::Pol::H),
                               "beam3", fock::Pol::H)
              .scaled(c) +
          fock::apply_creation(fock::apply_creation(vac, "beam1", fock::Pol::V),
                               "beam3", fock::Pol::V)
              .scaled(s);
      for (const char* beam : {"beam1", "beam3"}) {
        fock::FockState flipped = fock::apply_x_flip(code, beam);
        flipped = fock::apply_pbs(flipped, "beam1", "beam3", "beam1", "beam3");
        const auto [post, prob] = fock::project_photon_count(flipped, "beam3", 1);
        out.require(prob == 0.0 && post.empty(),
                    "nonzero single-photon probability at gamma=" +
                        std::to_string(gamma));
        ++checked;
      }
    }
  }
  out.detail = std::to_string(checked) + " single-flip branches, all exactly 0";
  return out;
}

// 5. Reference-table adjudication.
Outcome criterion5() {
  Outcome out;
  const spdc::DetectorModel bound{1.0, spdc::ClickMode::PaperBound,
                                  spdc::MultifoldPolicy::FiveFoldAsC4};

  // (a) Basis-input bound reproduced exactly.
  const double basis =
      spdc::three_pair_c4_probability(
          {spdc::SourceSide::Right, 1.0, 0.0, spdc::FlipConfig::None}, bound)
          .xi4_coefficient;
  out.require(std::abs(basis - 1.0 / 24.0) <= 1e-15, "basis bound != 1/24");

  // (b) The corrected per-term reference row sums to 7/48, and the oracle
  // confirms the internally consistent cells (terms 1-4, 7, 8).
  double ref_sum = 0.0;
  for (double t : analysis::reference::kR0BalancedTerms) ref_sum += t;
  out.require(std::abs(ref_sum - 7.0 / 48.0) <= 1e-15,
              "reference per-term row does not sum to 7/48");
  const auto report = analysis::comparison_report();
  auto entry = [&](const std::string& needle) -> const analysis::ReportEntry* {
    for (const auto& e : report.entries) {
      if (e.label.find(needle) != std::string::npos) return &e;
    }
    return nullptr;
  };
  for (int t : {1, 2, 3, 4, 7, 8}) {
    const auto* e = entry("term " + std::to_string(t) + " coeff");
    out.require(e != nullptr && e->match,
                "consistent term " + std::to_string(t) + " not confirmed");
  }

  // (c) One-flip bracket: the lambda3 coefficient equals the sum of the four
  // one-flip reference averages.
  const double one_flip = analysis::reference::kC4Average[1] +
                          analysis::reference::kC4Average[2] +
                          analysis::reference::kC4Average[5] +
                          analysis::reference::kC4Average[6];
  out.require(std::abs(one_flip - 7.0 / 24.0) <= 1e-15 &&
                  std::abs(analysis::reference::kBracketOneFlip - 7.0 / 24.0) <=
                      1e-15,
              "one-flip bracket != 7/24");

  // (d) The known inconsistencies are flagged with oracle values attached.
  const auto* typo = entry("term 1 coeff");
  out.require(typo != nullptr && typo->note.find("typo") != std::string::npos,
              "term-1 exponent typo not recorded");
  const auto* avg = entry("r0 C4 average (reference avg vs mean of its own cells)");
  out.require(avg != nullptr && !avg->match &&
                  std::abs(avg->reference_value - 3.0 / 16.0) < 1e-15 &&
                  std::abs(avg->oracle_value - 3.0 / 32.0) < 1e-15,
              "r0 average inconsistency not flagged");
  const auto* both = entry("both-flip bracket (formula vs reference-table sum)");
  out.require(both != nullptr && !both->match &&
                  std::abs(both->reference_value - 17.0 / 48.0) < 1e-15 &&
                  std::abs(both->oracle_value - 37.0 / 96.0) < 1e-15,
              "both-flip bracket inconsistency not flagged");

  // The oracle's own adjudication of the remaining cells (terms 5/6 and the
  // per-state averages) is emitted alongside; nothing is silently replaced.
  const auto* t5 = entry("term 5 coeff");
  out.require(t5 != nullptr && !t5->match, "term-5 oracle adjudication missing");

  out.detail = "basis bound 1/24 exact; corrected row sums to 7/48; one-flip "
               "bracket 7/24 exact; " +
               std::to_string(report.mismatches().size()) +
               " reference inconsistencies flagged with oracle values";
  return out;
}

// 6. Bound behavior and dataset generation.
Outcome criterion6() {
  Outcome out;
  const double a = analysis::ec_prime({0.002, 1.0, 0.1}, AverageMode::BlochHaar);
  const double b = analysis::ec_prime({0.002, 0.5, 0.1}, AverageMode::BlochHaar);
  const double c = analysis::ec_prime({0.002, 0.07, 0.1}, AverageMode::BlochHaar);
  out.require(std::abs(a - b) <= 1e-14 && std::abs(a - c) <= 1e-14,
              "E_c' depends on xi");
  out.require(std::abs(a - 0.014968) <= 1e-6, "E_c'(0.1, 0.002) off the pin");
  out.require(a < 0.0667, "E_c' does not beat E_0");

  const auto grid = analysis::default_eta_grid();
  std::vector<std::string> datasets;
  for (double p : {0.01, 0.005, 0.002, 0.001}) {
    csv::Writer w("eta,e0_bloch,e0_fourstate,ec_bloch,ec_fourstate,ec_prime");
    for (const auto& pt : analysis::fig2_dataset(p, grid)) {
      w.add_row({csv::format_double(pt.eta), csv::format_double(pt.e0_bloch),
                 csv::format_double(pt.e0_fourstate),
                 csv::format_double(pt.ec_bloch),
                 csv::format_double(pt.ec_fourstate),
                 csv::format_double(pt.ec_prime)});
    }
    datasets.push_back(w.str());
  }
  for (double p : {0.01, 0.005, 0.002, 0.001}) {
    csv::Writer w("eta,e0_bloch,e0_fourstate,ec_bloch,ec_fourstate,ec_prime");
    for (const auto& pt : analysis::fig2_dataset(p, grid)) {
      w.add_row({csv::format_double(pt.eta), csv::format_double(pt.e0_bloch),
                 csv::format_double(pt.e0_fourstate),
                 csv::format_double(pt.ec_bloch),
                 csv::format_double(pt.ec_fourstate),
                 csv::format_double(pt.ec_prime)});
    }
    const std::size_t idx = p == 0.01 ? 0 : p == 0.005 ? 1 : p == 0.002 ? 2 : 3;
    out.require(w.str() == datasets[idx], "dataset not byte-deterministic");
  }
  out.detail = "E_c'(eta=0.1, p=0.002) = " + csv::format_double(a, 6) +
               ", xi-invariant to 1e-14; four datasets byte-deterministic";
  return out;
}

// 7. Monte Carlo consistency and xi^4 acceptance scaling.
Outcome criterion7() {
  Outcome out;
  spdc::MonteCarloParams params;
  params.epsilon = 1.0 / 9.0;
  params.detector = {0.5, spdc::ClickMode::Exact,
                     spdc::MultifoldPolicy::FiveFoldAsC4};
  params.average = AverageMode::BlochHaar;
  params.trials = 10000000;
  params.seed = 20250810;
  params.shards = 8;
  const spdc::EventTally t = spdc::run_monte_carlo(params);
  const double exact = (2.0 / 3.0) * 0.01 / 0.82;
  const double se = t.conditional_error_se();
  out.require(se > 0.0 && std::abs(t.conditional_error() - exact) <= 5.0 * se,
              "conditional error outside 5 sigma");

  // Acceptance scaling fitted from the exact event probabilities.
  std::vector<double> xs, ys;
  for (double xi : {0.25, 0.5, 1.0}) {
    spdc::DetectorModel det{xi, spdc::ClickMode::Exact,
                            spdc::MultifoldPolicy::FiveFoldAsC4};
    spdc::Circuit circuit(1.1, 0.7, spdc::FlipBoxParams{params.epsilon}, det);
    const spdc::EventTally e = spdc::run_exact(circuit.two_pair_emission(), circuit);
    xs.push_back(std::log(xi));
    ys.push_back(std::log(e.accepted()));
  }
  double mx = 0, my = 0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    mx += xs[i] / xs.size();
    my += ys[i] / ys.size();
  }
  double num = 0, den = 0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    num += (xs[i] - mx) * (ys[i] - my);
    den += (xs[i] - mx) * (xs[i] - mx);
  }
  const double slope = num / den;
  out.require(std::abs(slope - 4.0) <= 0.01, "fitted exponent " + std::to_string(slope));

  // The Monte Carlo acceptance tracks the same scaling within 5 sigma.
  for (double xi : {0.25, 1.0}) {
    spdc::MonteCarloParams q = params;
    q.trials = 2000000;
    q.detector.xi = xi;
    const spdc::EventTally m = spdc::run_monte_carlo(q);
    const double p_exact = 0.82 / 16.0 * std::pow(xi, 4);
    const double se_acc = std::sqrt(p_exact * (1 - p_exact) / q.trials);
    out.require(std::abs(m.accepted() / m.trials - p_exact) <= 5.0 * se_acc,
                "MC acceptance off at xi=" + std::to_string(xi));
  }

  char buf[160];
  std::snprintf(buf, sizeof(buf),
                "1e7 trials: N4/(N1+N4) = %.6f vs exact %.6f (%.1f sigma); "
                "fitted exponent %.6f",
                t.conditional_error(), exact,
                std::abs(t.conditional_error() - exact) / se, slope);
  out.detail = buf;
  return out;
}

// 8. Property suite.
Outcome criterion8() {
  Outcome out;
  for (const auto& r : verify::run_all()) {
    out.require(r.pass, r.name + " failed: " + r.detail);
  }
  out.detail = "unitarity, number conservation, projector completeness, tally "
               "merge, decode branches";
  return out;
}

}  // namespace

int main() {
  using Clock = std::chrono::steady_clock;
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria = {
      {"closed-form coded error rate", criterion1},
      {"dual direct-rate conventions", criterion2},
      {"optics-protocol equivalence", criterion3},
      {"single-flip rejection guarantee", criterion4},
      {"reference-table adjudication", criterion5},
      {"bound behavior and datasets", criterion6},
      {"Monte Carlo consistency", criterion7},
      {"property suite", criterion8},
  };

  int failures = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const auto start = Clock::now();
    const Outcome out = criteria[i].second();
    const double secs =
        std::chrono::duration<double>(Clock::now() - start).count();
    std::printf("[%s] criterion %zu (%s, %.2fs): %s\n",
                out.pass ? "PASS" : "FAIL", i + 1, criteria[i].first.c_str(),
                secs, out.detail.c_str());
    if (!out.pass) ++failures;
  }
  if (failures > 0) {
    std::printf("%d criterion(s) failed\n", failures);
    return 1;
  }
  std::printf("all %zu criteria passed\n", criteria.size());
  return 0;
}
