#pragma once
// Sparse multi-photon Fock-state algebra over polarization-resolved beams.
//
// A state is a sparse map from mode-occupation vectors to complex amplitudes.
// Modes are registered once per circuit (beam name x polarization) and keep a
// fixed canonical order, so occupation vectors are directly comparable and all
// output is deterministic. States are immutable after construction; every
// operation is a pure function returning a new state.

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <numeric>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "qerc/linalg.hpp"

namespace qerc::fock {

enum class Pol : uint8_t { H, V };

inline const char* to_string(Pol p) { return p == Pol::H ? "H" : "V"; }

struct ModeLabel {
  std::string beam;
  Pol pol;

  friend bool operator==(const ModeLabel& a, const ModeLabel& b) {
    return a.beam == b.beam && a.pol == b.pol;
  }
  friend bool operator<(const ModeLabel& a, const ModeLabel& b) {
    return a.beam != b.beam ? a.beam < b.beam
                            : static_cast<int>(a.pol) < static_cast<int>(b.pol);
  }
};

// Fixed, declaration-ordered mode registry. (beam, pol) pairs are unique.
class ModeRegistry {
 public:
  std::size_t add_mode(const ModeLabel& label) {
    if (index_.count(label) != 0) {
      throw std::invalid_argument("ModeRegistry: duplicate mode " + label.beam);
    }
    modes_.push_back(label);
    index_[label] = modes_.size() - 1;
    return modes_.size() - 1;
  }

  // Registers beam.H and beam.V, in that order.
  void add_beam(const std::string& beam) {
    add_mode({beam, Pol::H});
    add_mode({beam, Pol::V});
  }

  std::size_t size() const { return modes_.size(); }
  const ModeLabel& label(std::size_t i) const { return modes_.at(i); }

  bool has(const std::string& beam, Pol pol) const {
    return index_.count({beam, pol}) != 0;
  }

  std::size_t index_of(const std::string& beam, Pol pol) const {
    auto it = index_.find({beam, pol});
    if (it == index_.end()) {
      throw std::invalid_argument("ModeRegistry: unknown mode " + beam + "." +
                                  to_string(pol));
    }
    return it->second;
  }

  // All registered modes of the beam, in registration order.
  std::vector<std::size_t> beam_modes(const std::string& beam) const {
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < modes_.size(); ++i) {
      if (modes_[i].beam == beam) out.push_back(i);
    }
    if (out.empty()) {
      throw std::invalid_argument("ModeRegistry: unknown beam " + beam);
    }
    return out;
  }

 private:
  std::vector<ModeLabel> modes_;
  std::map<ModeLabel, std::size_t> index_;
};

using RegistryPtr = std::shared_ptr<const ModeRegistry>;
using Occupation = std::vector<uint8_t>;

inline int total_photons(const Occupation& occ) {
  return std::accumulate(occ.begin(), occ.end(), 0);
}

inline double factorial(int n) {
  double f = 1.0;
  for (int i = 2; i <= n; ++i) f *= i;
  return f;
}

class FockState {
 public:
  static constexpr double kDefaultPruneThreshold = 1e-14;

  explicit FockState(RegistryPtr reg, double prune = kDefaultPruneThreshold)
      : reg_(std::move(reg)), prune_(prune) {}

  static FockState vacuum(RegistryPtr reg,
                          double prune = kDefaultPruneThreshold) {
    FockState s(std::move(reg), prune);
    s.add_term(Occupation(s.reg_->size(), 0), 1.0);
    return s;
  }

  const ModeRegistry& registry() const { return *reg_; }
  RegistryPtr registry_ptr() const { return reg_; }
  double prune_threshold() const { return prune_; }

  std::size_t term_count() const { return terms_.size(); }
  bool empty() const { return terms_.empty(); }

  const std::map<Occupation, complexd>& terms() const { return terms_; }

  complexd amplitude(const Occupation& occ) const {
    auto it = terms_.find(occ);
    return it == terms_.end() ? complexd{} : it->second;
  }

  double norm_squared() const {
    double s = 0.0;
    for (const auto& [occ, amp] : terms_) s += std::norm(amp);
    return s;
  }

  FockState normalized() const {
    const double n2 = norm_squared();
    if (n2 <= 0.0) throw std::domain_error("FockState: cannot normalize empty state");
    return scaled(1.0 / std::sqrt(n2));
  }

  FockState scaled(complexd f) const {
    FockState out(reg_, prune_);
    for (const auto& [occ, amp] : terms_) out.add_term(occ, amp * f);
    return out;
  }

  FockState operator+(const FockState& rhs) const {
    FockState out = *this;
    for (const auto& [occ, amp] : rhs.terms_) out.add_term(occ, amp);
    return out;
  }

  void add_term(const Occupation& occ, complexd amp) {
    if (occ.size() != reg_->size()) {
      throw std::invalid_argument("FockState: occupation size mismatch");
    }
    auto [it, inserted] = terms_.try_emplace(occ, amp);
    if (!inserted) it->second += amp;
    if (std::abs(it->second) < prune_) terms_.erase(it);
  }

  int photons_in_modes(const Occupation& occ,
                       const std::vector<std::size_t>& modes) const {
    int n = 0;
    for (std::size_t m : modes) n += occ[m];
    return n;
  }

 private:
  RegistryPtr reg_;
  double prune_;
  std::map<Occupation, complexd> terms_;
};

inline complexd inner_product(const FockState& a, const FockState& b) {
  complexd s = 0.0;
  for (const auto& [occ, amp] : a.terms()) s += std::conj(amp) * b.amplitude(occ);
  return s;
}

// Raw creation operator: a†|n> = sqrt(n+1)|n+1>. Leaves the state
// unnormalized; k applications to vacuum give norm² = k!.
inline FockState apply_creation(const FockState& state, std::size_t mode) {
  FockState out(state.registry_ptr(), state.prune_threshold());
  for (const auto& [occ, amp] : state.terms()) {
    Occupation next = occ;
    next[mode] += 1;
    out.add_term(next, amp * std::sqrt(static_cast<double>(next[mode])));
  }
  return out;
}

inline FockState apply_creation(const FockState& state, const std::string& beam,
                                Pol pol) {
  return apply_creation(state, state.registry().index_of(beam, pol));
}

namespace detail {

// Sparse polynomial in the creation operators of a mode subset, used for the
// multinomial expansion of a linear mode map.
using Monomial = std::vector<uint8_t>;  // exponent per listed mode
using Poly = std::map<Monomial, complexd>;

inline Poly poly_mul(const Poly& a, const Poly& b) {
  Poly out;
  for (const auto& [ma, ca] : a) {
    for (const auto& [mb, cb] : b) {
      Monomial m = ma;
      for (std::size_t i = 0; i < m.size(); ++i) m[i] += mb[i];
      out[m] += ca * cb;
    }
  }
  return out;
}

}  // namespace detail

// Rewrites each creation operator a†_j (j over `modes`, in the matrix's
// column order) as sum_k u(k,j) a†_k, expanding products with bosonic
// normalization. Photon number and norm are preserved for unitary u.
inline FockState apply_mode_unitary(const FockState& state, const Matrix& u,
                                    const std::vector<std::size_t>& modes) {
  const std::size_t m = modes.size();
  if (u.rows() != m || u.cols() != m) {
    throw std::invalid_argument("apply_mode_unitary: matrix/mode-count mismatch");
  }
  for (std::size_t mode : modes) {
    if (mode >= state.registry().size()) {
      throw std::invalid_argument("apply_mode_unitary: unknown mode index");
    }
  }
  if (!u.is_unitary(1e-10)) {
    throw std::invalid_argument("apply_mode_unitary: matrix is not unitary");
  }

  FockState out(state.registry_ptr(), state.prune_threshold());
  for (const auto& [occ, amp] : state.terms()) {
    // Polynomial product over the occupied listed modes.
    detail::Poly poly{{detail::Monomial(m, 0), 1.0}};
    double in_norm = 1.0;
    for (std::size_t j = 0; j < m; ++j) {
      const int nj = occ[modes[j]];
      if (nj == 0) continue;
      in_norm *= factorial(nj);
      detail::Poly column;
      for (std::size_t k = 0; k < m; ++k) {
        if (u(k, j) == complexd{}) continue;
        detail::Monomial mono(m, 0);
        mono[k] = 1;
        column[mono] = u(k, j);
      }
      for (int rep = 0; rep < nj; ++rep) poly = detail::poly_mul(poly, column);
    }

    for (const auto& [mono, coeff] : poly) {
      Occupation next = occ;
      for (std::size_t j = 0; j < m; ++j) next[modes[j]] = 0;
      double out_norm = 1.0;
      for (std::size_t k = 0; k < m; ++k) {
        next[modes[k]] = static_cast<uint8_t>(next[modes[k]] + mono[k]);
        out_norm *= factorial(mono[k]);
      }
      out.add_term(next, amp * coeff * std::sqrt(out_norm / in_norm));
    }
  }
  return out;
}

inline FockState apply_mode_unitary(const FockState& state, const Matrix& u,
                                    const std::vector<ModeLabel>& modes) {
  std::vector<std::size_t> idx;
  idx.reserve(modes.size());
  for (const auto& label : modes) {
    idx.push_back(state.registry().index_of(label.beam, label.pol));
  }
  return apply_mode_unitary(state, u, idx);
}

// Polarizing beam splitter: transmits H, reflects V.
//   in1.H -> out1.H, in2.H -> out2.H, in1.V -> out2.V, in2.V -> out1.V.
// Reflection coefficient is +1 by convention; `reflection_phase` multiplies
// the amplitude once per reflected photon so the convention can be probed.
inline FockState apply_pbs(const FockState& state, const std::string& in1,
                           const std::string& in2, const std::string& out1,
                           const std::string& out2,
                           complexd reflection_phase = 1.0) {
  const auto& reg = state.registry();
  const std::size_t i1h = reg.index_of(in1, Pol::H);
  const std::size_t i1v = reg.index_of(in1, Pol::V);
  const std::size_t i2h = reg.index_of(in2, Pol::H);
  const std::size_t i2v = reg.index_of(in2, Pol::V);
  const std::size_t o1h = reg.index_of(out1, Pol::H);
  const std::size_t o1v = reg.index_of(out1, Pol::V);
  const std::size_t o2h = reg.index_of(out2, Pol::H);
  const std::size_t o2v = reg.index_of(out2, Pol::V);

  FockState out(state.registry_ptr(), state.prune_threshold());
  for (const auto& [occ, amp] : state.terms()) {
    const uint8_t n1h = occ[i1h], n1v = occ[i1v], n2h = occ[i2h], n2v = occ[i2v];
    Occupation next = occ;
    next[i1h] = 0;
    next[i1v] = 0;
    next[i2h] = 0;
    next[i2v] = 0;
    next[o1h] = static_cast<uint8_t>(next[o1h] + n1h);
    next[o2h] = static_cast<uint8_t>(next[o2h] + n2h);
    next[o2v] = static_cast<uint8_t>(next[o2v] + n1v);
    next[o1v] = static_cast<uint8_t>(next[o1v] + n2v);
    complexd phase = 1.0;
    for (int r = 0; r < n1v + n2v; ++r) phase *= reflection_phase;
    out.add_term(next, amp * phase);
  }
  return out;
}

// Phase e^{i theta} per vertically polarized photon in the beam.
inline FockState apply_phase_shift_v(const FockState& state,
                                     const std::string& beam, double theta) {
  const std::size_t mv = state.registry().index_of(beam, Pol::V);
  const complexd unit = std::exp(complexd{0.0, theta});
  FockState out(state.registry_ptr(), state.prune_threshold());
  for (const auto& [occ, amp] : state.terms()) {
    complexd phase = 1.0;
    for (int r = 0; r < occ[mv]; ++r) phase *= unit;
    out.add_term(occ, amp * phase);
  }
  return out;
}

// Projects onto "exactly n photons in the beam". Returns the renormalized
// post-measurement state and the branch probability (assumes a normalized
// input; for weighted branches the caller scales accordingly).
inline std::pair<FockState, double> project_photon_count(const FockState& state,
                                                         const std::string& beam,
                                                         int n) {
  if (n < 0) throw std::invalid_argument("project_photon_count: n < 0");
  const auto modes = state.registry().beam_modes(beam);
  FockState kept(state.registry_ptr(), state.prune_threshold());
  for (const auto& [occ, amp] : state.terms()) {
    if (state.photons_in_modes(occ, modes) == n) kept.add_term(occ, amp);
  }
  const double prob = kept.norm_squared();
  if (prob == 0.0) return {kept, 0.0};
  return {kept.scaled(1.0 / std::sqrt(prob)), prob};
}

struct BasisOutcome {
  int outcome;  // 0 = first basis vector, 1 = second
  FockState state;
  double probability;
};

// Measures the single-photon subspace of a beam in the given orthonormal
// basis {psi, psi_perp} (amplitudes over (H, V)). Probabilities sum to the
// beam's single-photon weight.
inline std::vector<BasisOutcome> measure_basis(
    const FockState& state, const std::string& beam,
    const std::array<complexd, 2>& psi, const std::array<complexd, 2>& psi_perp) {
  const double gram =
      std::abs(std::norm(psi[0]) + std::norm(psi[1]) - 1.0) +
      std::abs(std::norm(psi_perp[0]) + std::norm(psi_perp[1]) - 1.0) +
      std::abs(std::conj(psi[0]) * psi_perp[0] + std::conj(psi[1]) * psi_perp[1]);
  if (gram > 1e-10) {
    throw std::invalid_argument("measure_basis: basis is not orthonormal");
  }
  // Rotate the beam so mode H carries the psi component, then project.
  Matrix w(2, 2,
           {std::conj(psi[0]), std::conj(psi[1]), std::conj(psi_perp[0]),
            std::conj(psi_perp[1])});
  const auto& reg = state.registry();
  FockState rotated = apply_mode_unitary(
      state, w, std::vector<std::size_t>{reg.index_of(beam, Pol::H),
                                         reg.index_of(beam, Pol::V)});
  const std::size_t mh = reg.index_of(beam, Pol::H);
  const std::size_t mv = reg.index_of(beam, Pol::V);

  std::vector<BasisOutcome> outcomes;
  for (int which = 0; which < 2; ++which) {
    FockState kept(state.registry_ptr(), state.prune_threshold());
    for (const auto& [occ, amp] : rotated.terms()) {
      const int nw = which == 0 ? occ[mh] : occ[mv];
      const int other = which == 0 ? occ[mv] : occ[mh];
      if (nw == 1 && other == 0) kept.add_term(occ, amp);
    }
    const double prob = kept.norm_squared();
    outcomes.push_back({which, prob > 0.0 ? kept.scaled(1.0 / std::sqrt(prob))
                                          : kept,
                        prob});
  }
  return outcomes;
}

// Wave plate of angle delta: the real rotation
//   [cos d, -sin d; sin d, cos d]
// in the (H, V) basis. Note the image of |HV> under hwp(pi/4) is
// (|2V> - |2H>)/sqrt(2); texts sometimes quote the opposite overall sign,
// which cancels in every probability.
inline Matrix hwp(double delta) {
  return Matrix(2, 2, {std::cos(delta), -std::sin(delta), std::sin(delta),
                       std::cos(delta)});
}

// diag(1, e^{i theta}) on (H, V).
inline Matrix phase_v_matrix(double theta) {
  return Matrix(2, 2, {1.0, 0.0, 0.0, std::exp(complexd{0.0, theta})});
}

inline FockState apply_hwp(const FockState& state, const std::string& beam,
                           double delta) {
  const auto& reg = state.registry();
  return apply_mode_unitary(state, hwp(delta),
                            std::vector<std::size_t>{reg.index_of(beam, Pol::H),
                                                     reg.index_of(beam, Pol::V)});
}

// Swaps the contents of two modes (used for explicit X flips and for
// polarizer sinks).
inline FockState swap_modes(const FockState& state, std::size_t a,
                            std::size_t b) {
  FockState out(state.registry_ptr(), state.prune_threshold());
  for (const auto& [occ, amp] : state.terms()) {
    Occupation next = occ;
    std::swap(next[a], next[b]);
    out.add_term(next, amp);
  }
  return out;
}

// X on a beam: exchanges the H and V occupation.
inline FockState apply_x_flip(const FockState& state, const std::string& beam) {
  const auto& reg = state.registry();
  return swap_modes(state, reg.index_of(beam, Pol::H),
                    reg.index_of(beam, Pol::V));
}

}  // namespace qerc::fock
