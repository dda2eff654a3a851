#pragma once
// Brute-force Fock oracle for the C4 contamination caused by 3-pair
// emissions. The eight tabulated inputs are the two coincidence-capable
// source states (single pair left + double pair right, and the mirror image)
// under the four whole-beam flip configurations of the channel, evaluated for
// a chosen prepared state (alpha, beta).
//
// Two click conventions are supported:
//   Exact      - coherent propagation, threshold clicks 1 - (1 - xi)^n.
//   PaperBound - each pre-detection term is scored independently
//                (interference between terms dropped) with the linearized
//                click probability n * xi. This reproduces the tabulated
//                reference-bound methodology.

#include <array>
#include <cmath>
#include <complex>
#include <string>
#include <vector>

#include "qerc/spdc.hpp"

namespace qerc::spdc {

enum class SourceSide { Left, Right };
enum class FlipConfig { None, Beam1, Beam3, Both };

inline const char* to_string(SourceSide s) {
  return s == SourceSide::Left ? "l" : "r";
}

inline const char* to_string(FlipConfig f) {
  switch (f) {
    case FlipConfig::None: return "none";
    case FlipConfig::Beam1: return "beam1pp";
    case FlipConfig::Beam3: return "beam3";
    case FlipConfig::Both: return "both";
  }
  return "?";
}

struct ThreePairInput {
  SourceSide side = SourceSide::Right;
  complexd alpha{1.0, 0.0};
  complexd beta{0.0, 0.0};
  FlipConfig flip = FlipConfig::None;

  double gamma() const { return 2.0 * std::atan2(std::abs(beta), std::abs(alpha)); }
  double phi() const { return std::arg(beta) - std::arg(alpha); }

  std::string state_name() const {
    std::string n = to_string(side);
    switch (flip) {
      case FlipConfig::None: n += "0"; break;
      case FlipConfig::Beam1: n += "1pp"; break;
      case FlipConfig::Beam3: n += "3"; break;
      case FlipConfig::Both: n += "b"; break;
    }
    return n;
  }
};

// The four prepared test states used for table averages.
inline std::array<std::pair<complexd, complexd>, 4> bb84_amplitudes() {
  const double inv = 1.0 / std::sqrt(2.0);
  return {std::pair<complexd, complexd>{1.0, 0.0},
          {0.0, 1.0},
          {inv, inv},
          {inv, -inv}};
}

struct ThreePairState {
  Circuit circuit;
  FockState pre_detection;  // after the parity PBS, before detection optics
  std::vector<CircuitElement> detection_elements;
};

inline ThreePairState three_pair_state(const ThreePairInput& input,
                                       const DetectorModel& det) {
  Circuit circuit(input.gamma(), input.phi(), FlipBoxParams{0.0}, det);
  const SourceEmission emission = circuit.three_pair_emission(
      input.side == SourceSide::Left ? SourceKind::ThreePairL
                                     : SourceKind::ThreePairR);
  const std::pair<bool, bool> flips{
      input.flip == FlipConfig::Beam1 || input.flip == FlipConfig::Both,
      input.flip == FlipConfig::Beam3 || input.flip == FlipConfig::Both};
  const auto els = circuit.elements(BoxSettings{0.0, 0.0}, flips);

  std::vector<CircuitElement> front, back;
  bool past_parity = false;
  for (const auto& el : els) {
    if (past_parity) {
      back.push_back(el);
    } else {
      front.push_back(el);
      if (el.stage == CircuitElement::Stage::ParityPbs) past_parity = true;
    }
  }
  FockState pre = circuit.apply_elements(emission.state, front);
  return {std::move(circuit), std::move(pre), std::move(back)};
}

struct ThreePairC4Result {
  double xi4_coefficient = 0.0;  // leading coefficient of xi^4 in P(C4)
  double probability = 0.0;      // P(C4) at det.xi under det's click model
};

// C4 probability for one tabulated input, by full Fock enumeration.
inline ThreePairC4Result three_pair_c4_probability(const ThreePairInput& input,
                                                   const DetectorModel& det) {
  ThreePairState st = three_pair_state(input, det);
  ThreePairC4Result result;
  if (det.click_mode == ClickMode::Exact) {
    const FockState final_state =
        st.circuit.apply_elements(st.pre_detection, st.detection_elements);
    result.xi4_coefficient = st.circuit.xi4_coefficients(final_state).second;
    result.probability = st.circuit.detection_probabilities(final_state).n4;
    return result;
  }
  // Per-term incoherent scoring.
  for (const auto& [occ, amp] : st.pre_detection.terms()) {
    FockState term(st.circuit.registry());
    term.add_term(occ, amp);
    const FockState final_state =
        st.circuit.apply_elements(term, st.detection_elements);
    result.xi4_coefficient += st.circuit.xi4_coefficients(final_state).second;
    result.probability += st.circuit.detection_probabilities(final_state).n4;
  }
  return result;
}

// Per-term xi^4 coefficient of one pre-detection occupation (the term is
// scored with its stored amplitude; absent terms score zero).
inline double three_pair_term_coefficient(const ThreePairState& st,
                                          const fock::Occupation& occ) {
  const complexd amp = st.pre_detection.amplitude(occ);
  if (amp == complexd{}) return 0.0;
  FockState term(st.circuit.registry());
  term.add_term(occ, amp);
  const FockState final_state =
      st.circuit.apply_elements(term, st.detection_elements);
  return st.circuit.xi4_coefficients(final_state).second;
}

// Occupation on (beam0, beam1, beam2, beam3, sink) for a product ket given as
// per-beam (nH, nV) pairs, in the tabulated beam order (0, I1, 2', 3'').
inline fock::Occupation three_pair_term_occupation(
    const std::array<std::array<int, 2>, 4>& beams) {
  fock::Occupation occ(9, 0);
  for (int b = 0; b < 4; ++b) {
    occ[2 * b] = static_cast<uint8_t>(beams[b][0]);
    occ[2 * b + 1] = static_cast<uint8_t>(beams[b][1]);
  }
  return occ;
}

// Average of the xi^4 coefficient over the four test states (arithmetic
// mean).
inline double three_pair_average_coefficient(SourceSide side, FlipConfig flip,
                                             const DetectorModel& det) {
  double sum = 0.0;
  for (const auto& [a, b] : bb84_amplitudes()) {
    sum += three_pair_c4_probability({side, a, b, flip}, det).xi4_coefficient;
  }
  return sum / 4.0;
}

}  // namespace qerc::spdc
