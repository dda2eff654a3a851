#pragma once
// Qubit-level model of the 2-bit error-rejection code: encoding, independent
// bit-flip channel, collective parity check, decoding, and exact error rates.
//
// Two-qubit states live in the basis order |00>, |01>, |10>, |11| with the
// first tensor factor the transmitted qubit and the second the ancilla.
// Mixtures are handled by enumerating flip-pattern branches with weights and
// 4x4 density operators, which is exact at this size.

#include <array>
#include <cmath>
#include <functional>
#include <numbers>
#include <stdexcept>
#include <vector>

#include "qerc/linalg.hpp"

namespace qerc::protocol {

using Vec2 = std::vector<complexd>;
using Vec4 = std::vector<complexd>;

// Unknown input state parametrized on the Bloch sphere:
//   cos(gamma/2)|0> + e^{i phi} sin(gamma/2)|1>.
struct PureQubit {
  double gamma = 0.0;  // [0, pi]
  double phi = 0.0;    // [0, 2*pi)

  Vec2 amplitudes() const {
    return {std::cos(gamma / 2.0),
            std::exp(complexd{0.0, phi}) * std::sin(gamma / 2.0)};
  }

  // The bit-flipped companion: cos(gamma/2)|1> + e^{i phi} sin(gamma/2)|0>.
  Vec2 flipped_amplitudes() const {
    auto a = amplitudes();
    return {a[1], a[0]};
  }
};

struct BitFlipChannel {
  double eta;
  explicit BitFlipChannel(double eta_) : eta(eta_) {
    if (!(eta >= 0.0 && eta < 0.5)) {
      throw std::domain_error("BitFlipChannel: eta must be in [0, 1/2)");
    }
  }
};

struct FlipPattern {
  bool flip_first = false;
  bool flip_second = false;
  double weight = 1.0;
};

// The four i.i.d. flip patterns with weights (1-eta)^2, eta(1-eta),
// eta(1-eta), eta^2.
inline std::array<FlipPattern, 4> flip_patterns(double eta) {
  BitFlipChannel check(eta);
  const double q = 1.0 - eta;
  return {FlipPattern{false, false, q * q}, FlipPattern{true, false, eta * q},
          FlipPattern{false, true, eta * q}, FlipPattern{true, true, eta * eta}};
}

enum class AverageMode { BlochHaar, FourState };

// The four test states (1,0), (0,1), (1,1)/sqrt(2), (1,-1)/sqrt(2) as
// (gamma, phi) pairs; the standard BB84 set used in place of a full Bloch
// average.
inline std::array<PureQubit, 4> bb84_states() {
  return {PureQubit{0.0, 0.0}, PureQubit{std::numbers::pi, 0.0},
          PureQubit{std::numbers::pi / 2.0, 0.0},
          PureQubit{std::numbers::pi / 2.0, std::numbers::pi}};
}

// --- Haar quadrature -------------------------------------------------------
//
// The Bloch average uses the Haar measure sin(gamma) dgamma dphi / (4 pi).
// On x = cos(gamma) this is a uniform measure on [-1, 1], handled by
// Gauss-Legendre nodes; the phi average uses a uniform periodic rule. Both are
// exact for the low-degree trigonometric polynomials that appear here.

struct QuadratureNode {
  PureQubit state;
  double weight;
};

namespace detail {

inline void gauss_legendre(int n, std::vector<double>& x, std::vector<double>& w) {
  x.assign(n, 0.0);
  w.assign(n, 0.0);
  for (int k = 0; k < n; ++k) {
    double xi = std::cos(std::numbers::pi * (k + 0.75) / (n + 0.5));
    for (int iter = 0; iter < 100; ++iter) {
      // Legendre P_n and derivative by recurrence.
      double p0 = 1.0, p1 = xi;
      for (int j = 2; j <= n; ++j) {
        const double p2 = ((2.0 * j - 1.0) * xi * p1 - (j - 1.0) * p0) / j;
        p0 = p1;
        p1 = p2;
      }
      const double dp = n * (xi * p1 - p0) / (xi * xi - 1.0);
      const double step = p1 / dp;
      xi -= step;
      if (std::abs(step) < 1e-15) break;
    }
    double p0 = 1.0, p1 = xi;
    for (int j = 2; j <= n; ++j) {
      const double p2 = ((2.0 * j - 1.0) * xi * p1 - (j - 1.0) * p0) / j;
      p0 = p1;
      p1 = p2;
    }
    const double dp = n * (xi * p1 - p0) / (xi * xi - 1.0);
    x[k] = xi;
    w[k] = 2.0 / ((1.0 - xi * xi) * dp * dp);
  }
}

}  // namespace detail

inline std::vector<QuadratureNode> bloch_quadrature(int n_cos = 8, int n_phi = 8) {
  std::vector<double> x, w;
  detail::gauss_legendre(n_cos, x, w);
  std::vector<QuadratureNode> nodes;
  nodes.reserve(static_cast<std::size_t>(n_cos) * n_phi);
  for (int i = 0; i < n_cos; ++i) {
    const double gamma = std::acos(x[i]);
    for (int j = 0; j < n_phi; ++j) {
      const double phi = 2.0 * std::numbers::pi * j / n_phi;
      nodes.push_back({PureQubit{gamma, phi}, 0.5 * w[i] / n_phi});
    }
  }
  return nodes;
}

// Averaging nodes for either convention.
inline std::vector<QuadratureNode> average_nodes(AverageMode mode) {
  if (mode == AverageMode::FourState) {
    std::vector<QuadratureNode> nodes;
    for (const auto& q : bb84_states()) nodes.push_back({q, 0.25});
    return nodes;
  }
  return bloch_quadrature();
}

// Haar average of f(gamma, phi); exact for trigonometric polynomials of
// modest degree.
inline double average_over_bloch(const std::function<double(double, double)>& f,
                                 int n_cos = 8, int n_phi = 8) {
  double s = 0.0;
  for (const auto& node : bloch_quadrature(n_cos, n_phi)) {
    s += node.weight * f(node.state.gamma, node.state.phi);
  }
  return s;
}

struct BlochEstimate {
  double value;
  double std_error;
};

// Deterministic low-discrepancy (Halton) alternative with a batched standard
// error, for integrands outside the quadrature's exactness class.
inline BlochEstimate average_over_bloch_qmc(
    const std::function<double(double, double)>& f, int samples = 1 << 14,
    int batches = 16) {
  auto radical_inverse = [](int base, long long i) {
    double inv = 1.0 / base, r = 0.0, scale = inv;
    while (i > 0) {
      r += (i % base) * scale;
      i /= base;
      scale *= inv;
    }
    return r;
  };
  std::vector<double> batch_means(batches, 0.0);
  const int per_batch = samples / batches;
  for (int b = 0; b < batches; ++b) {
    double s = 0.0;
    for (int k = 0; k < per_batch; ++k) {
      const long long i = static_cast<long long>(b) * per_batch + k + 1;
      const double x = 1.0 - 2.0 * radical_inverse(2, i);
      const double phi = 2.0 * std::numbers::pi * radical_inverse(3, i);
      s += f(std::acos(x), phi);
    }
    batch_means[b] = s / per_batch;
  }
  double mean = 0.0;
  for (double m : batch_means) mean += m;
  mean /= batches;
  double var = 0.0;
  for (double m : batch_means) var += (m - mean) * (m - mean);
  var /= (batches - 1.0);
  return {mean, std::sqrt(var / batches)};
}

// --- Pipeline ---------------------------------------------------------------

// cos(gamma/2)|00> + e^{i phi} sin(gamma/2)|11>, i.e. the conditional map
// |00> -> |00>, |10> -> |11> applied to (input x |0>).
inline Vec4 encode(const PureQubit& q) {
  const auto a = q.amplitudes();
  return {a[0], 0.0, 0.0, a[1]};
}

inline Vec4 apply_flip_pattern(const Vec4& code, const FlipPattern& pat) {
  Vec4 out(4);
  for (int i = 0; i < 4; ++i) {
    int j = i;
    if (pat.flip_first) j ^= 0b10;
    if (pat.flip_second) j ^= 0b01;
    out[j] = code[i];
  }
  return out;
}

struct ParityBranches {
  Vec4 even;  // unnormalized accept component (not dephased)
  double p_even;
  Vec4 odd;  // unnormalized reject component
  double p_odd;
};

// Two-outcome projective instrument {P_even, P_odd}. The collective
// measurement reveals only whether the bit values agree, so the accepted
// branch keeps its superposition within the even subspace.
inline ParityBranches parity_check(const Vec4& code) {
  Vec4 even{code[0], 0.0, 0.0, code[3]};
  Vec4 odd{0.0, code[1], code[2], 0.0};
  const double pe = std::norm(code[0]) + std::norm(code[3]);
  const double po = std::norm(code[1]) + std::norm(code[2]);
  return {even, pe, odd, po};
}

inline bool is_even_parity(const Vec4& code, double tol = 1e-12) {
  return std::norm(code[1]) + std::norm(code[2]) <= tol;
}

// Decodes an even-parity (unnormalized) code state: measures qubit 1 in
// |+/->, applies Z = diag(1,-1) to qubit 2 on the |-> outcome, and returns
// the resulting unnormalized mixture as a 2x2 density operator. Trace equals
// the squared norm of the input.
inline Matrix decode(const Vec4& code) {
  if (!is_even_parity(code)) {
    throw std::invalid_argument("decode: input has odd-parity support");
  }
  const double inv = 1.0 / std::sqrt(2.0);
  // <+|q> and <-|q> on qubit 1 leave qubit-2 amplitudes over (|0>, |1>).
  Vec2 plus{inv * code[0], inv * code[3]};
  Vec2 minus{inv * code[0], -inv * code[3]};
  minus[1] = -minus[1];  // Z correction on the |-> branch
  return outer(plus) + outer(minus);
}

// Per-branch decode outputs, for the branch-equivalence property.
inline std::pair<Matrix, Matrix> decode_branches(const Vec4& code) {
  const double inv = 1.0 / std::sqrt(2.0);
  Vec2 plus{inv * code[0], inv * code[3]};
  Vec2 minus{inv * code[0], -inv * code[3]};
  minus[1] = -minus[1];  // Z on the |-> outcome
  return {outer(plus), outer(minus)};
}

inline double fidelity_with(const PureQubit& q, const Matrix& rho) {
  const auto a = q.amplitudes();
  complexd s = 0.0;
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j) s += std::conj(a[i]) * rho(i, j) * a[j];
  return s.real();
}

// Exact enumeration of encode -> flip channel -> parity check -> decode for
// one input state. Returns the accepted weight and the error weight
// (accepted-and-wrong), both unconditional.
struct PipelineResult {
  double p_accept;
  double error_weight;  // sum over accepted branches of weight * (1 - fidelity)
};

inline PipelineResult run_pipeline(const PureQubit& q, double eta) {
  const Vec4 code = encode(q);
  PipelineResult r{0.0, 0.0};
  for (const auto& pat : flip_patterns(eta)) {
    const Vec4 corrupted = apply_flip_pattern(code, pat);
    const ParityBranches branches = parity_check(corrupted);
    if (branches.p_even <= 0.0) continue;
    const Matrix rho = decode(branches.even);  // trace == p_even
    r.p_accept += pat.weight * branches.p_even;
    r.error_weight += pat.weight * (branches.p_even - fidelity_with(q, rho));
  }
  return r;
}

// Average error rate of accepted qubits, by exact enumeration over flip
// patterns and the requested state average. Closed forms:
//   BlochHaar:  (2/3) eta^2 / ((1-eta)^2 + eta^2)
//   FourState:  (1/2) eta^2 / ((1-eta)^2 + eta^2)
inline double coded_error_rate(double eta, AverageMode mode) {
  BitFlipChannel check(eta);
  double err = 0.0, acc = 0.0;
  for (const auto& node : average_nodes(mode)) {
    const PipelineResult r = run_pipeline(node.state, eta);
    err += node.weight * r.error_weight;
    acc += node.weight * r.p_accept;
  }
  return acc > 0.0 ? err / acc : 0.0;
}

// Average error rate of direct (uncoded) transmission through the same
// channel: 2 eta / 3 on the Bloch sphere, eta / 2 over the four test states.
inline double direct_error_rate(double eta, AverageMode mode) {
  BitFlipChannel check(eta);
  double err = 0.0;
  for (const auto& node : average_nodes(mode)) {
    const auto a = node.state.amplitudes();
    const auto f = node.state.flipped_amplitudes();
    const double overlap = std::norm(inner(a, f));
    err += node.weight * eta * (1.0 - overlap);
  }
  return err;
}

}  // namespace qerc::protocol
