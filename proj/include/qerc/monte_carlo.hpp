#pragma once
// Seeded, shardable Monte Carlo over emissions, box settings, prepared
// states, detection outcomes, and detector clicks.
//
// Randomness is drawn from per-trial counter-derived streams, so a run is
// reproducible for a fixed seed and invariant under shard decomposition.
// Outcome distributions for each (emission, setting, prepared-state) cell are
// exact Fock propagations computed once and then sampled; Bloch-sphere input
// averaging samples the exact quadrature nodes, whose weighted average equals
// the Haar integral for every moment this experiment measures.

#include <cstdint>
#include <future>
#include <map>
#include <numbers>
#include <stdexcept>
#include <thread>
#include <tuple>
#include <vector>

#include "qerc/spdc.hpp"

namespace qerc::spdc {

namespace rng {

inline uint64_t mix64(uint64_t z) {
  z ^= z >> 33;
  z *= 0xff51afd7ed558ccdULL;
  z ^= z >> 33;
  z *= 0xc4ceb9fe1a85ec53ULL;
  z ^= z >> 33;
  return z;
}

// Counter-derived stream: deterministic function of (seed, trial) only.
class TrialStream {
 public:
  TrialStream(uint64_t seed, uint64_t trial)
      : state_(mix64(seed) ^ mix64(trial * 0x9E3779B97F4A7C15ULL +
                                   0x243F6A8885A308D3ULL)) {
    next();
  }

  uint64_t next() {
    state_ += 0x9E3779B97F4A7C15ULL;
    uint64_t z = state_;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
  }

  double uniform() { return (next() >> 11) * 0x1.0p-53; }

 private:
  uint64_t state_;
};

}  // namespace rng

struct MonteCarloParams {
  double epsilon = 0.0;
  DetectorModel detector;
  AverageMode average = AverageMode::FourState;
  bool three_pair = false;  // include 3-pair emissions (requires p > 0)
  double p = 0.0;           // one-pair emission probability, for 3-pair mixing
  uint64_t trials = 0;
  uint64_t seed = 0;
  int shards = 1;

  void validate() const {
    detector.validate();
    if (trials < 1) throw std::domain_error("monte carlo: trials must be >= 1");
    if (shards < 1) throw std::domain_error("monte carlo: shards must be >= 1");
    if (epsilon < 0.0) throw std::domain_error("monte carlo: epsilon must be >= 0");
    if (three_pair && !(p > 0.0 && p < 1.0)) {
      throw std::domain_error("monte carlo: 3-pair mixing requires p in (0, 1)");
    }
  }
};

namespace detail {

struct OutcomeDistribution {
  std::vector<double> cumulative;
  std::vector<DetectorCounts> counts;
};

struct McTables {
  // [kind][setting][node] -> outcome distribution
  std::vector<std::vector<std::vector<OutcomeDistribution>>> dist;
  std::vector<double> node_cumulative;
  std::vector<protocol::QuadratureNode> nodes;
  double q_two_pair = 1.0;  // P(kind == TwoPair | coincidence-capable emission)
  DetectorModel det;
  int kinds = 1;
};

inline OutcomeDistribution distribution_for(const Circuit& circuit,
                                            const SourceEmission& emission,
                                            const BoxSettings& setting) {
  const FockState final_state = circuit.propagate(emission.state, setting);
  OutcomeDistribution dist;
  double cum = 0.0;
  for (const auto& [occ, amp] : final_state.terms()) {
    const double w = std::norm(amp);
    if (w <= 0.0) continue;
    cum += w;
    dist.cumulative.push_back(cum);
    dist.counts.push_back(circuit.detector_counts(occ));
  }
  // Guard the last bin against roundoff.
  if (!dist.cumulative.empty()) dist.cumulative.back() = 1.0;
  return dist;
}

inline McTables build_tables(const MonteCarloParams& params) {
  McTables t;
  t.det = params.detector;
  t.kinds = params.three_pair ? 3 : 1;
  // 4 x 8 quadrature: exact for the x-degree-4, phi-harmonic-4 polynomials
  // that 3-pair event probabilities can reach.
  t.nodes = params.average == AverageMode::FourState
                ? protocol::average_nodes(AverageMode::FourState)
                : protocol::bloch_quadrature(4, 8);
  double cum = 0.0;
  for (const auto& node : t.nodes) {
    cum += node.weight;
    t.node_cumulative.push_back(cum);
  }
  t.node_cumulative.back() = 1.0;

  if (params.three_pair) {
    const double w2 = params.p * params.p;
    const double w3 = 0.75 * params.p * params.p * params.p;
    t.q_two_pair = w2 / (w2 + 2.0 * w3);
  }

  const auto settings = four_settings();
  t.dist.resize(t.kinds);
  for (int k = 0; k < t.kinds; ++k) {
    t.dist[k].resize(settings.size());
    for (std::size_t s = 0; s < settings.size(); ++s) {
      t.dist[k][s].resize(t.nodes.size());
      for (std::size_t n = 0; n < t.nodes.size(); ++n) {
        const auto& q = t.nodes[n].state;
        Circuit circuit(q.gamma, q.phi, FlipBoxParams{params.epsilon}, params.detector);
        const SourceKind kind = k == 0   ? SourceKind::TwoPair
                                : k == 1 ? SourceKind::ThreePairL
                                         : SourceKind::ThreePairR;
        const SourceEmission emission =
            kind == SourceKind::TwoPair ? circuit.two_pair_emission()
                                        : circuit.three_pair_emission(kind);
        t.dist[k][s][n] = distribution_for(circuit, emission, settings[s]);
      }
    }
  }
  return t;
}

inline std::size_t sample_index(const std::vector<double>& cumulative, double u) {
  std::size_t lo = 0, hi = cumulative.size() - 1;
  while (lo < hi) {
    const std::size_t mid = (lo + hi) / 2;
    if (u < cumulative[mid]) {
      hi = mid;
    } else {
      lo = mid + 1;
    }
  }
  return lo;
}

inline EventTally run_shard(const McTables& t, uint64_t seed, uint64_t begin,
                            uint64_t end) {
  EventTally tally;
  for (uint64_t trial = begin; trial < end; ++trial) {
    rng::TrialStream stream(seed, trial);
    int kind = 0;
    if (t.kinds > 1) {
      const double u = stream.uniform();
      if (u >= t.q_two_pair) {
        kind = u < t.q_two_pair + 0.5 * (1.0 - t.q_two_pair) ? 1 : 2;
      }
    }
    const std::size_t setting = stream.next() & 3;
    const std::size_t node = sample_index(t.node_cumulative, stream.uniform());
    const auto& dist = t.dist[kind][setting][node];
    const std::size_t outcome = sample_index(dist.cumulative, stream.uniform());
    const DetectorCounts& counts = dist.counts[outcome];
    std::array<bool, kNumDetectors> clicks{};
    for (int d = 0; d < kNumDetectors; ++d) {
      clicks[d] = counts[d] > 0 &&
                  stream.uniform() < t.det.click_probability(counts[d]);
    }
    switch (classify_event(clicks, t.det)) {
      case EventClass::C1:
        tally.n1 += 1.0;
        break;
      case EventClass::C4:
        tally.n4 += 1.0;
        break;
      case EventClass::Reject:
        tally.rejected += 1.0;
        if (click_count(clicks) == 3) tally.rejected_threefold += 1.0;
        break;
    }
    tally.trials += 1.0;
  }
  return tally;
}

}  // namespace detail

inline EventTally run_monte_carlo(const MonteCarloParams& params) {
  params.validate();
  const detail::McTables tables = detail::build_tables(params);

  const int shards = params.shards;
  std::vector<std::future<EventTally>> futures;
  futures.reserve(shards);
  for (int s = 0; s < shards; ++s) {
    const uint64_t begin = params.trials * s / shards;
    const uint64_t end = params.trials * (s + 1) / shards;
    futures.push_back(std::async(std::launch::async, [&tables, &params, begin,
                                                      end]() {
      return detail::run_shard(tables, params.seed, begin, end);
    }));
  }
  EventTally tally;
  for (auto& f : futures) tally.merge(f.get());
  return tally;
}

}  // namespace qerc::spdc
