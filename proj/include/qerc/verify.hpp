#pragma once
// Seeded property suite behind the `verify` CLI command: unitarity round
// trips, photon-number conservation, projector completeness, tally-merge
// associativity, and decode-branch equivalence.

#include <cmath>
#include <random>
#include <string>
#include <vector>

#include "qerc/fock.hpp"
#include "qerc/monte_carlo.hpp"
#include "qerc/protocol.hpp"
#include "qerc/spdc.hpp"

namespace qerc::verify {

struct CheckResult {
  std::string name;
  bool pass;
  std::string detail;
};

namespace detail {

// Haar-ish random unitary from Gram-Schmidt on Gaussian columns.
inline Matrix random_unitary(std::size_t n, std::mt19937_64& rng) {
  std::normal_distribution<double> gauss;
  std::vector<std::vector<complexd>> cols(n, std::vector<complexd>(n));
  for (auto& c : cols) {
    for (auto& v : c) v = complexd{gauss(rng), gauss(rng)};
  }
  for (std::size_t j = 0; j < n; ++j) {
    for (std::size_t k = 0; k < j; ++k) {
      const complexd proj = inner(cols[k], cols[j]);
      for (std::size_t i = 0; i < n; ++i) cols[j][i] -= proj * cols[k][i];
    }
    double norm = 0.0;
    for (const auto& v : cols[j]) norm += std::norm(v);
    norm = std::sqrt(norm);
    for (auto& v : cols[j]) v /= norm;
  }
  Matrix u(n, n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) u(i, j) = cols[j][i];
  return u;
}

inline fock::FockState random_state(const fock::RegistryPtr& reg,
                                    std::mt19937_64& rng, int max_photons = 4,
                                    int terms = 6) {
  std::uniform_int_distribution<int> mode_pick(0, static_cast<int>(reg->size()) - 1);
  std::uniform_int_distribution<int> photon_pick(0, max_photons);
  std::normal_distribution<double> gauss;
  fock::FockState s(reg);
  for (int t = 0; t < terms; ++t) {
    fock::FockState term = fock::FockState::vacuum(reg);
    const int n = photon_pick(rng);
    for (int k = 0; k < n; ++k) {
      term = fock::apply_creation(term, static_cast<std::size_t>(mode_pick(rng)));
    }
    s = s + term.scaled(complexd{gauss(rng), gauss(rng)});
  }
  if (s.norm_squared() == 0.0) return fock::FockState::vacuum(reg);
  return s.normalized();
}

}  // namespace detail

inline std::vector<CheckResult> run_all(uint64_t seed = 20240901) {
  std::vector<CheckResult> results;
  std::mt19937_64 rng(seed);

  auto reg = std::make_shared<fock::ModeRegistry>();
  reg->add_beam("a");
  reg->add_beam("b");

  auto record = [&](const std::string& name, double worst, double tol) {
    results.push_back({name, worst <= tol,
                       "max deviation " + std::to_string(worst) + " (tol " +
                           std::to_string(tol) + ")"});
  };

  // Unitarity round trip and composition.
  {
    double worst_rt = 0.0, worst_comp = 0.0, worst_norm = 0.0;
    for (int it = 0; it < 40; ++it) {
      const fock::FockState s = detail::random_state(reg, rng);
      const Matrix u = detail::random_unitary(4, rng);
      const Matrix v = detail::random_unitary(4, rng);
      const std::vector<std::size_t> modes{0, 1, 2, 3};
      const fock::FockState us = fock::apply_mode_unitary(s, u, modes);
      worst_norm = std::max(worst_norm, std::abs(us.norm_squared() - 1.0));
      const fock::FockState back =
          fock::apply_mode_unitary(us, u.adjoint(), modes);
      double dev = 0.0;
      for (const auto& [occ, amp] : s.terms()) {
        dev = std::max(dev, std::abs(amp - back.amplitude(occ)));
      }
      worst_rt = std::max(worst_rt, dev);
      const fock::FockState uv =
          fock::apply_mode_unitary(fock::apply_mode_unitary(s, v, modes), u, modes);
      const fock::FockState prod = fock::apply_mode_unitary(s, u * v, modes);
      double dev2 = 0.0;
      for (const auto& [occ, amp] : prod.terms()) {
        dev2 = std::max(dev2, std::abs(amp - uv.amplitude(occ)));
      }
      worst_comp = std::max(worst_comp, dev2);
    }
    record("unitary round trip", worst_rt, 1e-10);
    record("unitary composition", worst_comp, 1e-10);
    record("norm preservation", worst_norm, 1e-12);
  }

  // Photon-number conservation per total count.
  {
    double worst = 0.0;
    for (int it = 0; it < 40; ++it) {
      const fock::FockState s = detail::random_state(reg, rng);
      const Matrix u = detail::random_unitary(2, rng);
      const std::vector<std::size_t> modes{0, 1};
      const fock::FockState us = fock::apply_mode_unitary(s, u, modes);
      std::map<int, double> before, after;
      for (const auto& [occ, amp] : s.terms())
        before[fock::total_photons(occ)] += std::norm(amp);
      for (const auto& [occ, amp] : us.terms())
        after[fock::total_photons(occ)] += std::norm(amp);
      for (const auto& [n, w] : before)
        worst = std::max(worst, std::abs(w - after[n]));
    }
    record("photon-number conservation", worst, 1e-12);
  }

  // Projector completeness: sum over n of the projection probabilities.
  {
    double worst = 0.0;
    for (int it = 0; it < 20; ++it) {
      const fock::FockState s = detail::random_state(reg, rng);
      double total = 0.0;
      for (int n = 0; n <= 8; ++n) {
        total += fock::project_photon_count(s, "a", n).second;
      }
      worst = std::max(worst, std::abs(total - 1.0));
    }
    record("projector completeness", worst, 1e-12);
  }

  // Tally merge associativity.
  {
    std::uniform_int_distribution<int> count(0, 1000);
    bool ok = true;
    for (int it = 0; it < 50; ++it) {
      auto make = [&]() {
        spdc::EventTally t;
        t.n1 = count(rng);
        t.n4 = count(rng);
        t.rejected = count(rng);
        t.rejected_threefold = count(rng);
        t.trials = t.n1 + t.n4 + t.rejected;
        return t;
      };
      const spdc::EventTally a = make(), b = make(), c = make();
      const spdc::EventTally left = spdc::merge(spdc::merge(a, b), c);
      const spdc::EventTally right = spdc::merge(a, spdc::merge(b, c));
      ok = ok && left.n1 == right.n1 && left.n4 == right.n4 &&
           left.rejected == right.rejected && left.trials == right.trials &&
           left.rejected_threefold == right.rejected_threefold;
    }
    results.push_back({"tally merge associativity", ok, ok ? "exact" : "violated"});
  }

  // Decode-branch equivalence: both parity-decode branches give the same
  // conditional state.
  {
    std::uniform_real_distribution<double> ugamma(0.0, 3.14159);
    std::uniform_real_distribution<double> uphi(0.0, 6.28318);
    double worst = 0.0;
    for (int it = 0; it < 50; ++it) {
      const protocol::PureQubit q{ugamma(rng), uphi(rng)};
      for (const auto& pat : protocol::flip_patterns(0.2)) {
        const auto code = protocol::apply_flip_pattern(protocol::encode(q), pat);
        const auto branches = protocol::parity_check(code);
        if (branches.p_even < 1e-9) continue;
        auto [plus, minus] = protocol::decode_branches(branches.even);
        const Matrix a = plus.scaled(1.0 / plus.trace());
        const Matrix b = minus.scaled(1.0 / minus.trace());
        worst = std::max(worst, a.max_abs_diff(b));
      }
    }
    record("decode branch equivalence", worst, 1e-12);
  }

  return results;
}

}  // namespace qerc::verify
