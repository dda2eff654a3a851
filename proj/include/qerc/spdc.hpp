#pragma once
// The linear-optical realization: SPDC source states, the full circuit from
// preparation through the verification measurement, exact detection
// probabilities, and coincidence-event classification.
//
// Physical paths keep a fixed mode layout:
//   beam 0 -> polarizer -> I0 (D0); absorbed V photons go to a sink mode.
//   beam 1 -> HWP1, Pv+ -> PBS1 -> flip box -> PBS2 -> Pv-, RPBS -> D1/D4.
//   beam 2 -> PBS1 -> HWP2 -> split into x (H, undetected) and x0 (V, D2).
//   beam 3 -> flip box -> PBS2 -> HWP3 -> split into y (H) and y0 (V, D3).
// A PBS swaps the V occupations of its two beams and leaves H in place, so
// beams keep their registry names throughout ("beam1" is the path that ends
// at the verification detectors).

#include <array>
#include <cmath>
#include <cstdint>
#include <memory>
#include <numbers>
#include <optional>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include "qerc/fock.hpp"
#include "qerc/linalg.hpp"
#include "qerc/protocol.hpp"

namespace qerc::spdc {

using fock::FockState;
using fock::ModeRegistry;
using fock::Pol;
using protocol::AverageMode;
using protocol::PureQubit;

// --- Flip box ---------------------------------------------------------------

// One dashed-box channel element: phase theta on V, a wave plate of angle
// asin(sqrt(eps/(1+eps))), then phase -theta on V. Acting on (|H>, |V>):
//   (|H> + sqrt(eps) e^{i theta}|V>, |V> - sqrt(eps) e^{-i theta}|H>) / sqrt(1+eps).
// With theta drawn uniformly from +-pi/2 this realizes a bit-flip channel of
// rate eta = eps / (1 + eps).
struct FlipBoxParams {
  double epsilon = 0.0;
  double theta = std::numbers::pi / 2.0;
  bool deterministic_setting = true;

  double implied_eta() const { return epsilon / (1.0 + epsilon); }
};

inline bool is_allowed_theta(double theta) {
  return std::abs(std::abs(theta) - std::numbers::pi / 2.0) < 1e-12;
}

inline Matrix flip_box_matrix(double epsilon, double theta) {
  if (epsilon < 0.0) throw std::domain_error("flip box: epsilon must be >= 0");
  const double root = std::sqrt(epsilon);
  const double norm = 1.0 / std::sqrt(1.0 + epsilon);
  const complexd up = std::exp(complexd{0.0, theta});
  const complexd dn = std::exp(complexd{0.0, -theta});
  return Matrix(2, 2, {norm, -root * dn * norm, root * up * norm, norm});
}

// The same matrix built from the physical elements, for cross-checks.
inline Matrix flip_box_matrix_from_elements(double epsilon, double theta) {
  const double delta = std::asin(std::sqrt(epsilon / (1.0 + epsilon)));
  return fock::phase_v_matrix(theta) * fock::hwp(delta) *
         fock::phase_v_matrix(-theta);
}

inline FockState apply_flip_box(const FockState& state, const std::string& beam,
                                const FlipBoxParams& params) {
  if (params.deterministic_setting && !is_allowed_theta(params.theta)) {
    throw std::invalid_argument("flip box: theta must be +-pi/2");
  }
  const auto& reg = state.registry();
  return fock::apply_mode_unitary(
      state, flip_box_matrix(params.epsilon, params.theta),
      std::vector<std::size_t>{reg.index_of(beam, Pol::H),
                               reg.index_of(beam, Pol::V)});
}

// --- Detector model ----------------------------------------------------------

enum class ClickMode { Exact, PaperBound };
enum class MultifoldPolicy { FiveFoldAsC4, DiscardFiveFold };

struct DetectorModel {
  double xi = 1.0;
  ClickMode click_mode = ClickMode::Exact;
  MultifoldPolicy multifold_policy = MultifoldPolicy::FiveFoldAsC4;

  void validate() const {
    if (!(xi > 0.0 && xi <= 1.0)) {
      throw std::domain_error("DetectorModel: xi must be in (0, 1]");
    }
  }

  // Threshold-click probability for n incident photons. Exact mode uses
  // 1 - (1 - xi)^n; PaperBound linearizes to n * xi (capped at 1), which
  // overestimates multi-photon clicks.
  double click_probability(int n) const {
    if (n <= 0) return 0.0;
    if (click_mode == ClickMode::Exact) {
      return 1.0 - std::pow(1.0 - xi, n);
    }
    return std::min(n * xi, 1.0);
  }
};

// --- Events -------------------------------------------------------------------

enum class EventClass { C1, C4, Reject };

enum Detector : int { D0 = 0, D2 = 1, D3 = 2, D1 = 3, D4 = 4 };
constexpr int kNumDetectors = 5;

// Exact 4-fold patterns map to C1/C4; the 5-fold pattern follows the policy;
// everything else is rejected.
inline EventClass classify_event(const std::array<bool, kNumDetectors>& clicks,
                                 const DetectorModel& det) {
  const bool base = clicks[D0] && clicks[D2] && clicks[D3];
  if (base && clicks[D1] && clicks[D4]) {
    return det.multifold_policy == MultifoldPolicy::FiveFoldAsC4
               ? EventClass::C4
               : EventClass::Reject;
  }
  if (base && clicks[D1]) return EventClass::C1;
  if (base && clicks[D4]) return EventClass::C4;
  return EventClass::Reject;
}

inline int click_count(const std::array<bool, kNumDetectors>& clicks) {
  int n = 0;
  for (bool c : clicks) n += c ? 1 : 0;
  return n;
}

// Counts (or, in exact mode, probability masses) of the coincidence events.
struct EventTally {
  double n1 = 0.0;
  double n4 = 0.0;
  double rejected = 0.0;
  double rejected_threefold = 0.0;  // sub-counter of `rejected`
  double trials = 0.0;

  void merge(const EventTally& other) {
    n1 += other.n1;
    n4 += other.n4;
    rejected += other.rejected;
    rejected_threefold += other.rejected_threefold;
    trials += other.trials;
  }

  double accepted() const { return n1 + n4; }
  double conditional_error() const {
    const double a = accepted();
    return a > 0.0 ? n4 / a : 0.0;
  }
  // Binomial standard error of the conditional error estimate.
  double conditional_error_se() const {
    const double a = accepted();
    if (a <= 1.0) return 0.0;
    const double r = conditional_error();
    return std::sqrt(r * (1.0 - r) / a);
  }
};

inline EventTally merge(EventTally a, const EventTally& b) {
  a.merge(b);
  return a;
}

// --- Source -------------------------------------------------------------------

enum class SourceKind { TwoPair, ThreePairL, ThreePairR };

struct SourceEmission {
  SourceKind kind;
  double probability;  // relative emission weight for the given p
  FockState state;
};

// --- Circuit -------------------------------------------------------------------

struct BoxSettings {
  double theta;    // box on the beam-1 path
  double theta1;   // box on the beam-3 path
};

// The four deterministic settings run for equal durations in place of a
// random +-pi/2 choice.
inline std::array<BoxSettings, 4> four_settings() {
  const double h = std::numbers::pi / 2.0;
  return {BoxSettings{-h, -h}, BoxSettings{-h, h}, BoxSettings{h, -h},
          BoxSettings{h, h}};
}

struct ModeUnitaryElement {
  Matrix u;
  std::vector<std::size_t> modes;
};

struct PbsElement {
  std::string in1, in2;  // beams; V occupations swap, H stays
};

struct PolarizerElement {
  std::string beam;       // V photons are absorbed into the sink mode
  std::size_t sink_mode;
};

struct XFlipElement {
  std::string beam;
};

struct CircuitElement {
  // Stages give tests access to intermediate states.
  enum class Stage {
    Prepare,
    Encode,
    ChannelBeam1,
    ChannelBeam3,
    ParityPbs,
    DetectPolarizer,
    DetectEncodeCheck,
    DetectParityCheck,
    DetectVerification
  };
  Stage stage;
  std::variant<ModeUnitaryElement, PbsElement, PolarizerElement, XFlipElement> op;
};

// Per-detector photon counts for one occupation vector.
using DetectorCounts = std::array<int, kNumDetectors>;

class Circuit;
using CircuitPtr = std::shared_ptr<const Circuit>;

// Full circuit description: mode layout, ordered element list (flip-box
// settings and channel model bound at run time), the detector model, and the
// beam-to-detector map.
class Circuit {
 public:
  Circuit(double gamma, double phi, FlipBoxParams box_template,
          DetectorModel det)
      : gamma_(gamma), phi_(phi), box_(box_template), det_(det) {
    det_.validate();
    auto reg = std::make_shared<ModeRegistry>();
    reg->add_beam("beam0");
    reg->add_beam("beam1");
    reg->add_beam("beam2");
    reg->add_beam("beam3");
    sink_ = reg->add_mode({"sink0", Pol::V});
    reg_ = reg;
    i0_ = reg_->index_of("beam0", Pol::H);
    x0_ = reg_->index_of("beam2", Pol::V);
    y0_ = reg_->index_of("beam3", Pol::V);
    d1_ = reg_->index_of("beam1", Pol::H);
    d4_ = reg_->index_of("beam1", Pol::V);
  }

  double gamma() const { return gamma_; }
  double phi() const { return phi_; }
  const DetectorModel& detector() const { return det_; }
  const FlipBoxParams& box_template() const { return box_; }
  fock::RegistryPtr registry() const { return reg_; }

  FockState vacuum() const { return FockState::vacuum(reg_); }

  // |Phi+> x |Phi+> on beams (0,1) and (2,3), weight p^2.
  SourceEmission two_pair_emission(double p = 1.0) const {
    const FockState bell01 = bell_pair("beam0", "beam1");
    const FockState bell23 = bell_pair("beam2", "beam3");
    FockState out(reg_);
    for (const auto& [occ, amp] : bell23.terms()) {
      for (const auto& [occ2, amp2] : bell01.terms()) {
        fock::Occupation sum = occ;
        for (std::size_t i = 0; i < sum.size(); ++i)
          sum[i] = static_cast<uint8_t>(sum[i] + occ2[i]);
        out.add_term(sum, amp * amp2);
      }
    }
    return {SourceKind::TwoPair, p * p, out};
  }

  // One pair on beams (0,1) and a double pair on beams (2,3); weight 3p^3/4.
  // The mirrored state has the double pair on the left. Emissions with all
  // pairs on one side never produce the coincidence and are excluded.
  SourceEmission three_pair_emission(SourceKind kind, double p = 1.0) const {
    if (kind == SourceKind::TwoPair) {
      throw std::invalid_argument("three_pair_emission: wrong kind");
    }
    const bool left_single = kind == SourceKind::ThreePairL;
    const std::string sa = left_single ? "beam0" : "beam2";
    const std::string sb = left_single ? "beam1" : "beam3";
    const std::string da = left_single ? "beam2" : "beam0";
    const std::string db = left_single ? "beam3" : "beam1";
    const FockState single = bell_pair(sa, sb);
    const FockState dbl = double_pair(da, db);
    FockState out(reg_);
    for (const auto& [occ, amp] : single.terms()) {
      for (const auto& [occ2, amp2] : dbl.terms()) {
        fock::Occupation sum = occ;
        for (std::size_t i = 0; i < sum.size(); ++i)
          sum[i] = static_cast<uint8_t>(sum[i] + occ2[i]);
        out.add_term(sum, amp * amp2);
      }
    }
    return {kind, 0.75 * p * p * p, out};
  }

  // Element list for a concrete box setting. `flips` may replace the coherent
  // boxes with explicit X flips (used by the tabulated three-pair inputs).
  std::vector<CircuitElement> elements(
      const BoxSettings& settings,
      const std::optional<std::pair<bool, bool>>& explicit_flips =
          std::nullopt) const {
    using Stage = CircuitElement::Stage;
    std::vector<CircuitElement> els;
    const auto beam_modes = [&](const std::string& beam) {
      return std::vector<std::size_t>{reg_->index_of(beam, Pol::H),
                                      reg_->index_of(beam, Pol::V)};
    };

    // Preparation: HWP1(gamma/2) then the +phi V phase on beam 1.
    els.push_back({Stage::Prepare,
                   ModeUnitaryElement{fock::hwp(gamma_ / 2.0), beam_modes("beam1")}});
    els.push_back({Stage::Prepare,
                   ModeUnitaryElement{fock::phase_v_matrix(phi_), beam_modes("beam1")}});
    // Encoding PBS.
    els.push_back({Stage::Encode, PbsElement{"beam1", "beam2"}});
    // Channel.
    if (explicit_flips) {
      if (explicit_flips->first)
        els.push_back({Stage::ChannelBeam1, XFlipElement{"beam1"}});
      if (explicit_flips->second)
        els.push_back({Stage::ChannelBeam3, XFlipElement{"beam3"}});
    } else {
      els.push_back({Stage::ChannelBeam1,
                     ModeUnitaryElement{flip_box_matrix(box_.epsilon, settings.theta),
                                        beam_modes("beam1")}});
      els.push_back({Stage::ChannelBeam3,
                     ModeUnitaryElement{flip_box_matrix(box_.epsilon, settings.theta1),
                                        beam_modes("beam3")}});
    }
    // Parity PBS.
    els.push_back({Stage::ParityPbs, PbsElement{"beam1", "beam3"}});
    // Detection optics. The polarizer feeds D0; HWP2/HWP3 turn the +/-
    // projections into the V ports x0 and y0; Pv- and the rotated PBS turn
    // the verification basis into the beam-1 H/V ports.
    els.push_back({Stage::DetectPolarizer, PolarizerElement{"beam0", sink_}});
    els.push_back({Stage::DetectEncodeCheck,
                   ModeUnitaryElement{fock::hwp(std::numbers::pi / 4.0),
                                      beam_modes("beam2")}});
    els.push_back({Stage::DetectParityCheck,
                   ModeUnitaryElement{fock::hwp(std::numbers::pi / 4.0),
                                      beam_modes("beam3")}});
    els.push_back({Stage::DetectVerification,
                   ModeUnitaryElement{fock::phase_v_matrix(-phi_), beam_modes("beam1")}});
    els.push_back({Stage::DetectVerification,
                   ModeUnitaryElement{verification_rotation(), beam_modes("beam1")}});
    return els;
  }

  // Rotation sending the verification state cos(g/2)|H> + sin(g/2)|V> to the
  // transmitted (D1) port and its orthogonal complement to the reflected (D4)
  // port.
  Matrix verification_rotation() const {
    const double c = std::cos(gamma_ / 2.0), s = std::sin(gamma_ / 2.0);
    return Matrix(2, 2, {c, s, s, -c});
  }

  static FockState apply_element(const FockState& state,
                                 const CircuitElement& el) {
    return std::visit(
        [&](const auto& op) -> FockState {
          using T = std::decay_t<decltype(op)>;
          if constexpr (std::is_same_v<T, ModeUnitaryElement>) {
            return fock::apply_mode_unitary(state, op.u, op.modes);
          } else if constexpr (std::is_same_v<T, PbsElement>) {
            return fock::apply_pbs(state, op.in1, op.in2, op.in1, op.in2);
          } else if constexpr (std::is_same_v<T, PolarizerElement>) {
            return fock::swap_modes(
                state, state.registry().index_of(op.beam, Pol::V), op.sink_mode);
          } else {
            return fock::apply_x_flip(state, op.beam);
          }
        },
        el.op);
  }

  FockState apply_elements(const FockState& state,
                           const std::vector<CircuitElement>& els) const {
    FockState s = state;
    for (const auto& el : els) s = apply_element(s, el);
    return s;
  }

  FockState propagate(const FockState& input, const BoxSettings& settings) const {
    return apply_elements(input, elements(settings));
  }

  DetectorCounts detector_counts(const fock::Occupation& occ) const {
    return {occ[i0_], occ[x0_], occ[y0_], occ[d1_], occ[d4_]};
  }

  // Exact event probabilities for a propagated final state, marginalizing
  // over undetected modes and enumerating all 2^5 click patterns.
  EventTally detection_probabilities(const FockState& final_state) const {
    EventTally tally;
    for (const auto& [occ, amp] : final_state.terms()) {
      const double w = std::norm(amp);
      if (w == 0.0) continue;
      const DetectorCounts counts = detector_counts(occ);
      double q[kNumDetectors];
      for (int d = 0; d < kNumDetectors; ++d)
        q[d] = det_.click_probability(counts[d]);
      for (int pattern = 0; pattern < (1 << kNumDetectors); ++pattern) {
        std::array<bool, kNumDetectors> clicks{};
        double pp = w;
        for (int d = 0; d < kNumDetectors; ++d) {
          clicks[d] = (pattern >> d) & 1;
          pp *= clicks[d] ? q[d] : 1.0 - q[d];
          if (pp == 0.0) break;
        }
        if (pp == 0.0) continue;
        switch (classify_event(clicks, det_)) {
          case EventClass::C1:
            tally.n1 += pp;
            break;
          case EventClass::C4:
            tally.n4 += pp;
            break;
          case EventClass::Reject:
            tally.rejected += pp;
            if (click_count(clicks) == 3) tally.rejected_threefold += pp;
            break;
        }
      }
    }
    tally.trials = tally.n1 + tally.n4 + tally.rejected;
    return tally;
  }

  // Leading-order coefficients of xi^4 for the C1 and C4 patterns:
  // sum over terms of |amp|^2 * n_I0 * n_x0 * n_y0 * n_{D1 or D4}.
  std::pair<double, double> xi4_coefficients(const FockState& final_state) const {
    double c1 = 0.0, c4 = 0.0;
    for (const auto& [occ, amp] : final_state.terms()) {
      const double w = std::norm(amp);
      const DetectorCounts n = detector_counts(occ);
      const double base = w * n[D0] * n[D2] * n[D3];
      c1 += base * n[Detector::D1];
      c4 += base * n[Detector::D4];
    }
    return {c1, c4};
  }

  std::size_t sink_mode() const { return sink_; }
  std::size_t mode_i0() const { return i0_; }
  std::size_t mode_x0() const { return x0_; }
  std::size_t mode_y0() const { return y0_; }
  std::size_t mode_d1() const { return d1_; }
  std::size_t mode_d4() const { return d4_; }

 private:
  FockState bell_pair(const std::string& a, const std::string& b) const {
    const double inv = 1.0 / std::sqrt(2.0);
    FockState vac = vacuum();
    FockState hh = fock::apply_creation(fock::apply_creation(vac, a, Pol::H), b,
                                        Pol::H);
    FockState vv = fock::apply_creation(fock::apply_creation(vac, a, Pol::V), b,
                                        Pol::V);
    return hh.scaled(inv) + vv.scaled(inv);
  }

  // (|2H>|2H> + |HV>|HV> + |2V>|2V>) / sqrt(3): the normalized double-pair
  // component of the source on one side.
  FockState double_pair(const std::string& a, const std::string& b) const {
    FockState vac = vacuum();
    auto two = [&](Pol pa, Pol pb) {
      FockState s = vac;
      s = fock::apply_creation(s, a, pa);
      s = fock::apply_creation(s, a, pb);
      s = fock::apply_creation(s, b, pa);
      s = fock::apply_creation(s, b, pb);
      return s.normalized();
    };
    const double inv = 1.0 / std::sqrt(3.0);
    return two(Pol::H, Pol::H).scaled(inv) + two(Pol::H, Pol::V).scaled(inv) +
           two(Pol::V, Pol::V).scaled(inv);
  }

  double gamma_, phi_;
  FlipBoxParams box_;
  DetectorModel det_;
  fock::RegistryPtr reg_;
  std::size_t sink_, i0_, x0_, y0_, d1_, d4_;
};

inline CircuitPtr build_circuit(double gamma, double phi, FlipBoxParams box,
                                DetectorModel det) {
  return std::make_shared<Circuit>(gamma, phi, box, det);
}

// Exact event probabilities for one emission at one setting, or averaged
// uniformly over the four deterministic settings.
inline EventTally run_exact(const SourceEmission& emission, const Circuit& circuit,
                            const std::optional<BoxSettings>& setting =
                                std::nullopt) {
  auto run_one = [&](const BoxSettings& s) {
    const FockState final_state = circuit.propagate(emission.state, s);
    return circuit.detection_probabilities(final_state);
  };
  EventTally tally;
  if (setting) {
    tally = run_one(*setting);
  } else {
    for (const auto& s : four_settings()) {
      EventTally t = run_one(s);
      t.n1 *= 0.25;
      t.n4 *= 0.25;
      t.rejected *= 0.25;
      t.rejected_threefold *= 0.25;
      t.trials *= 0.25;
      tally.merge(t);
    }
  }
  // Scale by the emission weight so tallies from different emissions compose.
  tally.n1 *= emission.probability;
  tally.n4 *= emission.probability;
  tally.rejected *= emission.probability;
  tally.rejected_threefold *= emission.probability;
  tally.trials *= emission.probability;
  return tally;
}

// Conditional accepted error of the two-pair experiment with the input state
// averaged per `mode` (exact quadrature for the Bloch case) and uniform
// averaging over the four box settings.
struct ConditionalErrorResult {
  double p_c1 = 0.0;
  double p_c4 = 0.0;
  double conditional_error() const {
    return p_c1 + p_c4 > 0.0 ? p_c4 / (p_c1 + p_c4) : 0.0;
  }
};

inline ConditionalErrorResult two_pair_conditional_error(double epsilon,
                                                         const DetectorModel& det,
                                                         AverageMode mode) {
  ConditionalErrorResult r;
  for (const auto& node : protocol::average_nodes(mode)) {
    Circuit circuit(node.state.gamma, node.state.phi,
                    FlipBoxParams{epsilon, std::numbers::pi / 2.0, true}, det);
    EventTally t = run_exact(circuit.two_pair_emission(), circuit);
    r.p_c1 += node.weight * t.n1;
    r.p_c4 += node.weight * t.n4;
  }
  return r;
}

}  // namespace qerc::spdc
