#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <random>

#include "pairbench/rate_model.hpp"
#include "support/oracles.hpp"

using namespace pairbench;

namespace {
const RateModelParams clean{5.0, 0.1, 0.12, 0.0, 0.0, 0.0, 0.0};
}

TEST_CASE("predict_rates evaluates the count-rate model directly") {
  const RateTriple r = predict_rates(clean, 1.0, 1e-9);
  CHECK(r.r_s_cps == Catch::Approx(5e5).epsilon(1e-12));
  CHECK(r.r_i_cps == Catch::Approx(6e5).epsilon(1e-12));
  CHECK(r.r_si_cps == Catch::Approx(60300.0).epsilon(1e-12));
}

TEST_CASE("dark counts floor the singles at vanishing power") {
  RateModelParams p = clean;
  p.r_dc_s = 100.0;
  const RateTriple r = predict_rates(p, 1e-9, 1e-9);
  CHECK(r.r_s_cps == Catch::Approx(100.0).epsilon(1e-9));
}

TEST_CASE("the pair term scales with the square of the pump power") {
  const RateTriple r1 = predict_rates(clean, 1.0, 1e-9);
  const RateTriple r2 = predict_rates(clean, 2.0, 1e-9);
  const double pair1 = r1.r_si_cps - r1.r_s_cps * r1.r_i_cps * 1e-9;
  const double pair2 = r2.r_si_cps - r2.r_s_cps * r2.r_i_cps * 1e-9;
  CHECK(pair2 == Catch::Approx(4.0 * pair1).epsilon(1e-12));
  CHECK(pair2 == Catch::Approx(2.4e5).epsilon(1e-12));
}

TEST_CASE("predict_rates rejects invalid inputs") {
  RateModelParams bad = clean;
  bad.h3_s = 1.5;
  CHECK_THROWS_AS(predict_rates(bad, 1.0, 1e-9), DomainError);
  CHECK_THROWS_AS(predict_rates(clean, 0.0, 1e-9), DomainError);
  CHECK_THROWS_AS(predict_rates(clean, 1.0, 0.0), DomainError);
}

TEST_CASE("predict_rates is monotone in pump power") {
  std::mt19937_64 rng(7);
  for (int trial = 0; trial < 50; ++trial) {
    const RateModelParams p = oracles::random_params(rng);
    double prev_s = 0.0, prev_i = 0.0, prev_si = 0.0;
    for (double power : oracles::linear_powers(12)) {
      const RateTriple r = predict_rates(p, power, 1e-9);
      CHECK(r.r_s_cps > prev_s);
      CHECK(r.r_i_cps > prev_i);
      CHECK(r.r_si_cps > prev_si);
      prev_s = r.r_s_cps;
      prev_i = r.r_i_cps;
      prev_si = r.r_si_cps;
    }
  }
}

TEST_CASE("accidentals is the product rule") {
  CHECK(accidentals(1e6, 1e6, 1e-9) == Catch::Approx(1000.0).epsilon(1e-14));
  CHECK(accidentals(123.0, 0.0, 1e-9) == 0.0);
  CHECK(accidentals(5e5, 6e5, 1e-9) == Catch::Approx(300.0).epsilon(1e-14));
  CHECK_THROWS_AS(accidentals(-1.0, 1.0, 1e-9), DomainError);
}

TEST_CASE("car math and the resolvability threshold") {
  const CarResult a = car(60300.0, 300.0);
  CHECK(a.car == Catch::Approx(201.0).epsilon(1e-14));
  CHECK(a.practically_resolvable);

  // Table-style reconstruction: R_ACC derived by division.
  const CarResult b = car(1.1e6, 1.1e6 / 530.0);
  CHECK(b.car == 530.0);
  CHECK(b.practically_resolvable);

  // The threshold is strict: CAR of exactly 10 does not qualify.
  const CarResult c = car(100.0, 10.0);
  CHECK(c.car == Catch::Approx(10.0));
  CHECK_FALSE(c.practically_resolvable);

  const CarResult d = car(100.0, 0.0);
  CHECK(std::isinf(d.car));
  CHECK(d.practically_resolvable);
}

TEST_CASE("klyshko efficiency is the heralded-arm ratio") {
  CHECK(klyshko_efficiency(60300.0, 6e5) == Catch::Approx(0.1005).epsilon(1e-14));
  CHECK(klyshko_efficiency(777.0, 777.0) == 1.0);
  CHECK_THROWS_AS(klyshko_efficiency(1.0, 0.0), DomainError);
}

TEST_CASE("accidental-corrected klyshko recovers H3 exactly on clean data") {
  // beta = 0, no dark counts: (R_si - R_ACC)/R_i == H3_s algebraically.
  const auto series =
      synthesize_series(clean, oracles::linear_powers(6), 1e-9, {1.0, 0, true});
  for (const CountRatePoint& pt : series.points) {
    const double acc = accidentals(pt.r_s_cps, pt.r_i_cps, series.tau_s);
    const double k = klyshko_efficiency(pt.r_si_cps - acc, pt.r_i_cps);
    CHECK(k == Catch::Approx(clean.h3_s).epsilon(1e-12));
  }
}

TEST_CASE("synthesize_series is deterministic and noiseless mode is exact") {
  std::mt19937_64 rng(3);
  const RateModelParams p = oracles::random_params(rng);
  const auto powers = oracles::linear_powers(8);

  const auto a = synthesize_series(p, powers, 1e-9, {1.0, 99, false});
  const auto b = synthesize_series(p, powers, 1e-9, {1.0, 99, false});
  REQUIRE(a.points.size() == b.points.size());
  for (std::size_t k = 0; k < a.points.size(); ++k) {
    CHECK(a.points[k].r_s_cps == b.points[k].r_s_cps);
    CHECK(a.points[k].r_i_cps == b.points[k].r_i_cps);
    CHECK(a.points[k].r_si_cps == b.points[k].r_si_cps);
  }

  const auto exact = synthesize_series(p, powers, 1e-9, {1.0, 0, true});
  for (std::size_t k = 0; k < exact.points.size(); ++k) {
    const RateTriple model = predict_rates(p, powers[k], 1e-9);
    CHECK(exact.points[k].r_s_cps == model.r_s_cps);
    CHECK(exact.points[k].r_i_cps == model.r_i_cps);
    CHECK(exact.points[k].r_si_cps == model.r_si_cps);
  }
}

TEST_CASE("seeded draws average to the model rate") {
  const std::vector<double> one_power = {0.4, 0.5, 0.6, 0.7};
  const RateTriple model = predict_rates(clean, 0.4, 1e-9);
  double sum = 0.0;
  for (std::uint64_t seed = 0; seed < 1000; ++seed) {
    const auto s = synthesize_series(clean, one_power, 1e-9, {1.0, seed, false});
    sum += s.points[0].r_s_cps;
  }
  CHECK(std::abs(sum / 1000.0 - model.r_s_cps) < 0.01 * model.r_s_cps);
}

TEST_CASE("model CAR decreases monotonically with power when dark counts vanish") {
  RateModelParams p = clean;
  p.beta_s = 5e3;
  p.beta_i = 4e3;
  const auto series =
      synthesize_series(p, oracles::linear_powers(10), 1e-9, {1.0, 0, true});
  double prev = std::numeric_limits<double>::infinity();
  for (const CountRatePoint& pt : series.points) {
    const double acc = accidentals(pt.r_s_cps, pt.r_i_cps, series.tau_s);
    const double c = car(pt.r_si_cps, acc).car;
    CHECK(c < prev);
    prev = c;
  }
}

TEST_CASE("synthesize_series validates its inputs") {
  CHECK_THROWS_AS(synthesize_series(clean, {0.5, 0.4}, 1e-9, {}), DomainError);
  CHECK_THROWS_AS(synthesize_series(clean, {}, 1e-9, {}), DomainError);
  RateModelParams bad = clean;
  bad.b1_mcts = -1.0;
  CHECK_THROWS_AS(synthesize_series(bad, {0.1, 0.2, 0.3, 0.4}, 1e-9, {}), DomainError);
}
