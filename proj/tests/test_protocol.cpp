#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <numbers>

#include "qerc/protocol.hpp"

using namespace qerc;
using namespace qerc::protocol;
using Catch::Approx;

namespace {
constexpr double kPi = std::numbers::pi;

double closed_coded(double eta, AverageMode mode) {
  const double d = (1.0 - eta) * (1.0 - eta) + eta * eta;
  return (mode == AverageMode::BlochHaar ? 2.0 / 3.0 : 0.5) * eta * eta / d;
}
}  // namespace

TEST_CASE("encode maps the Bloch state onto the two-qubit code") {
  SECTION("gamma = 0 gives |00>") {
    const Vec4 code = encode({0.0, 0.0});
    CHECK(std::abs(code[0] - complexd{1.0}) < 1e-15);
    CHECK(std::abs(code[3]) < 1e-15);
  }
  SECTION("gamma = pi/2, phi = 0 gives (|00> + |11>)/sqrt(2)") {
    const Vec4 code = encode({kPi / 2.0, 0.0});
    const double inv = 1.0 / std::sqrt(2.0);
    CHECK(std::abs(code[0] - complexd{inv}) < 1e-15);
    CHECK(std::abs(code[3] - complexd{inv}) < 1e-15);
  }
  SECTION("gamma = pi/2, phi = pi gives (|00> - |11>)/sqrt(2)") {
    const Vec4 code = encode({kPi / 2.0, kPi});
    const double inv = 1.0 / std::sqrt(2.0);
    CHECK(std::abs(code[0] - complexd{inv}) < 1e-15);
    CHECK(std::abs(code[3] + complexd{inv}) < 1e-12);
  }
}

TEST_CASE("flip patterns") {
  const PureQubit q{1.2, 0.7};
  const Vec4 code = encode(q);

  SECTION("no flip is the identity") {
    const Vec4 out = apply_flip_pattern(code, {false, false, 1.0});
    for (int i = 0; i < 4; ++i) CHECK(out[i] == code[i]);
  }
  SECTION("double flip exchanges |00> and |11>") {
    const Vec4 out = apply_flip_pattern(code, {true, true, 1.0});
    CHECK(out[0] == code[3]);
    CHECK(out[3] == code[0]);
    CHECK(std::abs(out[1]) + std::abs(out[2]) == 0.0);
  }
  SECTION("single flips produce odd parity") {
    for (const bool first : {true, false}) {
      const Vec4 out = apply_flip_pattern(code, {first, !first, 1.0});
      CHECK_FALSE(is_even_parity(out));
    }
  }
  SECTION("weights are the i.i.d. channel weights and sum to one") {
    const auto pats = flip_patterns(0.3);
    CHECK(pats[0].weight == Approx(0.49));
    CHECK(pats[1].weight == Approx(0.21));
    CHECK(pats[2].weight == Approx(0.21));
    CHECK(pats[3].weight == Approx(0.09));
    CHECK(pats[0].weight + pats[1].weight + pats[2].weight + pats[3].weight ==
          Approx(1.0));
  }
  SECTION("eta out of range is rejected") {
    CHECK_THROWS_AS(flip_patterns(0.5), std::domain_error);
    CHECK_THROWS_AS(flip_patterns(-0.01), std::domain_error);
  }
}

TEST_CASE("parity check accepts even and rejects odd components") {
  const PureQubit q{0.9, 1.4};
  const Vec4 code = encode(q);

  SECTION("the clean code is accepted with certainty") {
    const auto branches = parity_check(code);
    CHECK(branches.p_even == Approx(1.0));
    CHECK(branches.p_odd == Approx(0.0).margin(1e-15));
  }
  SECTION("single-flip states are rejected with certainty") {
    const Vec4 flipped = apply_flip_pattern(code, {true, false, 1.0});
    const auto branches = parity_check(flipped);
    CHECK(branches.p_even == Approx(0.0).margin(1e-15));
    CHECK(branches.p_odd == Approx(1.0));
  }
  SECTION("(|01> + |00>)/sqrt(2) is accepted half the time") {
    const double inv = 1.0 / std::sqrt(2.0);
    const auto branches = parity_check(Vec4{inv, inv, 0.0, 0.0});
    CHECK(branches.p_even == Approx(0.5));
    CHECK(branches.p_odd == Approx(0.5));
  }
  SECTION("acceptance probability is state independent on a grid") {
    const double eta = 0.17;
    const double expected = (1.0 - eta) * (1.0 - eta) + eta * eta;
    for (int i = 0; i < 10; ++i) {
      for (int j = 0; j < 10; ++j) {
        const PureQubit g{kPi * i / 9.0, 2.0 * kPi * j / 10.0};
        const PipelineResult r = run_pipeline(g, eta);
        CHECK(r.p_accept == Approx(expected).margin(1e-12));
      }
    }
  }
}

TEST_CASE("decode") {
  SECTION("decode(encode(q)) recovers q exactly") {
    for (const auto& q :
         {PureQubit{0.0, 0.0}, PureQubit{1.3, 2.2}, PureQubit{kPi, 0.4}}) {
      const Matrix rho = decode(encode(q));
      CHECK(rho.trace().real() == Approx(1.0));
      CHECK(fidelity_with(q, rho) == Approx(1.0).margin(1e-12));
    }
  }
  SECTION("decoding the double-flip state yields the flipped qubit") {
    const PureQubit q{1.1, 0.6};
    const Vec4 flipped = apply_flip_pattern(encode(q), {true, true, 1.0});
    const Matrix rho = decode(flipped);
    const auto uf = q.flipped_amplitudes();
    const Matrix expect = outer(uf);
    CHECK(rho.max_abs_diff(expect) < 1e-12);
  }
  SECTION("odd-parity input is rejected") {
    const Vec4 odd{0.0, 1.0, 0.0, 0.0};
    CHECK_THROWS_AS(decode(odd), std::invalid_argument);
  }
  SECTION("both measurement branches give the same conditional state") {
    const PureQubit q{2.0, 5.1};
    for (const auto& pat : flip_patterns(0.25)) {
      const auto branches = parity_check(apply_flip_pattern(encode(q), pat));
      if (branches.p_even < 1e-12) continue;
      const auto [plus, minus] = decode_branches(branches.even);
      const Matrix a = plus.scaled(1.0 / plus.trace());
      const Matrix b = minus.scaled(1.0 / minus.trace());
      CHECK(a.max_abs_diff(b) < 1e-12);
    }
  }
  SECTION("decoding (|00>+|11>)/sqrt(2) against gamma = pi/2 states") {
    const double inv = 1.0 / std::sqrt(2.0);
    const Matrix rho = decode(Vec4{inv, 0.0, 0.0, inv});
    // Output is exactly (|0>+|1>)/sqrt(2); fidelity with gamma = pi/2, phi is
    // cos^2(phi/2).
    for (double phi : {0.0, 1.0, kPi}) {
      const double f = fidelity_with({kPi / 2.0, phi}, rho);
      CHECK(f == Approx(std::cos(phi / 2.0) * std::cos(phi / 2.0)).margin(1e-12));
    }
  }
}

TEST_CASE("coded error rate matches the closed forms") {
  SECTION("eta = 0 is error free") {
    CHECK(coded_error_rate(0.0, AverageMode::BlochHaar) == Approx(0.0).margin(1e-15));
  }
  SECTION("Bloch convention") {
    for (double eta : {0.02, 0.1, 0.27, 0.45}) {
      CHECK(coded_error_rate(eta, AverageMode::BlochHaar) ==
            Approx(closed_coded(eta, AverageMode::BlochHaar)).margin(1e-12));
    }
    CHECK(coded_error_rate(0.1, AverageMode::BlochHaar) ==
          Approx((2.0 / 3.0) * (0.01 / 0.82)).margin(1e-12));
  }
  SECTION("four-state convention") {
    for (double eta : {0.02, 0.1, 0.27, 0.45}) {
      CHECK(coded_error_rate(eta, AverageMode::FourState) ==
            Approx(closed_coded(eta, AverageMode::FourState)).margin(1e-12));
    }
  }
  SECTION("range validation") {
    CHECK_THROWS_AS(coded_error_rate(0.6, AverageMode::BlochHaar), std::domain_error);
  }
}

TEST_CASE("direct error rate reproduces both averaging conventions") {
  CHECK(direct_error_rate(0.0, AverageMode::BlochHaar) == Approx(0.0).margin(1e-15));
  CHECK(direct_error_rate(0.3, AverageMode::BlochHaar) == Approx(0.2).margin(1e-12));
  CHECK(direct_error_rate(0.3, AverageMode::FourState) == Approx(0.15).margin(1e-12));
}

TEST_CASE("coded beats direct transmission and grows monotonically") {
  double last = 0.0;
  for (int i = 1; i <= 49; ++i) {
    const double eta = 0.01 * i;
    for (const auto mode : {AverageMode::BlochHaar, AverageMode::FourState}) {
      CHECK(coded_error_rate(eta, mode) < direct_error_rate(eta, mode));
    }
    const double ec = coded_error_rate(eta, AverageMode::BlochHaar);
    CHECK(ec > last);
    last = ec;
  }
}

TEST_CASE("Haar averaging") {
  SECTION("normalization") {
    CHECK(average_over_bloch([](double, double) { return 1.0; }) ==
          Approx(1.0).margin(1e-14));
  }
  SECTION("direct-transmission error integrand gives 2 eta / 3") {
    const double eta = 0.21;
    const double avg = average_over_bloch([eta](double gamma, double phi) {
      const double overlap = std::sin(gamma) * std::cos(phi);
      return eta * (1.0 - overlap * overlap);
    });
    CHECK(avg == Approx(2.0 * eta / 3.0).margin(1e-13));
  }
  SECTION("sin^2 gamma cos^2 phi averages to 1/3") {
    const double avg = average_over_bloch([](double gamma, double phi) {
      const double v = std::sin(gamma) * std::cos(phi);
      return v * v;
    });
    CHECK(avg == Approx(1.0 / 3.0).margin(1e-13));
  }
  SECTION("low-discrepancy estimate agrees within its reported error") {
    const auto est = average_over_bloch_qmc([](double gamma, double phi) {
      const double v = std::sin(gamma) * std::cos(phi);
      return v * v;
    });
    CHECK(std::abs(est.value - 1.0 / 3.0) < 5.0 * est.std_error + 1e-3);
  }
}

TEST_CASE("four-state pipeline agrees with the per-state hand values") {
  // Per-state direct errors are eta, eta, 0, 0 over the four test states.
  const double eta = 0.3;
  const auto states = bb84_states();
  const double expected[4] = {eta, eta, 0.0, 0.0};
  for (int i = 0; i < 4; ++i) {
    const auto a = states[i].amplitudes();
    const auto f = states[i].flipped_amplitudes();
    const double err = eta * (1.0 - std::norm(inner(a, f)));
    CHECK(err == Approx(expected[i]).margin(1e-12));
  }
}
