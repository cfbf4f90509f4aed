#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <random>
#include <sstream>

#include "pairbench/core.hpp"

using namespace pairbench;

TEST_CASE("db_to_transmittance matches the decibel definition") {
  CHECK(db_to_transmittance(0.0) == 1.0);
  CHECK(db_to_transmittance(10.0) == Catch::Approx(0.1).epsilon(1e-14));
  CHECK(db_to_transmittance(3.0) == Catch::Approx(0.5011872336272722).epsilon(1e-14));
}

TEST_CASE("db_to_transmittance rejects bad losses") {
  CHECK_THROWS_AS(db_to_transmittance(-0.1), DomainError);
  CHECK_THROWS_AS(db_to_transmittance(std::nan("")), DomainError);
  CHECK_THROWS_AS(db_to_transmittance(std::numeric_limits<double>::infinity()),
                  DomainError);
}

TEST_CASE("db_to_transmittance is decreasing and multiplicative") {
  std::mt19937_64 rng(42);
  std::uniform_real_distribution<double> loss(0.0, 60.0);
  for (int trial = 0; trial < 200; ++trial) {
    const double a = loss(rng), b = loss(rng);
    if (a < b)
      CHECK(db_to_transmittance(a) > db_to_transmittance(b));
    const double combined = db_to_transmittance(a + b);
    const double product = db_to_transmittance(a) * db_to_transmittance(b);
    CHECK(std::abs(combined - product) <= 1e-12 * combined);
  }
}

TEST_CASE("unit canonicalization round-trips") {
  const Quantity h2_pct{93.0, 3.0, Unit::Percent, false};
  const Quantity canon = canonicalize(h2_pct);
  CHECK(canon.unit == Unit::Dimensionless);
  CHECK(canon.value == Catch::Approx(0.93));
  CHECK(canon.uncertainty == Catch::Approx(0.03));
  CHECK(render(canon, Unit::Percent) == h2_pct);

  // Already-canonical units are fixed points.
  const Quantity b{4.4, 0.1, Unit::MctsPerSecPerMilliwattSq, false};
  CHECK(canonicalize(b) == b);
  CHECK(render(b, Unit::MctsPerSecPerMilliwattSq) == b);
}

TEST_CASE("pulsed regimes require positive parameters when given") {
  CHECK(PumpRegime::cw().valid());
  CHECK(PumpRegime::pulsed().valid());
  CHECK(PumpRegime::pulsed(80e6, 1e9).valid());
  PumpRegime bad = PumpRegime::pulsed(0.0, 1e9);
  CHECK_FALSE(bad.valid());
}

TEST_CASE("measurement locations order by photon loss") {
  CHECK(MeasurementLocation::Generation < MeasurementLocation::PostSource);
  CHECK(MeasurementLocation::PostSource < MeasurementLocation::Detector);
  CHECK(intrinsic_heralding_efficiency() == 1.0);
}

namespace {

CountRateSeries well_formed(std::size_t n = 5) {
  CountRateSeries s;
  s.tau_s = 1e-9;
  s.regime = PumpRegime::cw();
  for (std::size_t k = 0; k < n; ++k) {
    const double p = 0.1 * static_cast<double>(k + 1);
    s.points.push_back({p, 1e5 * p * p, 1.2e5 * p * p, 1e4 * p * p});
  }
  return s;
}

}  // namespace

TEST_CASE("validate_series accepts a well-formed sweep") {
  const ValidationResult r = validate_series(well_formed());
  REQUIRE(r.ok());
  CHECK(r.series->points().size() == 5);
  CHECK(r.series->tau_s() == 1e-9);
}

TEST_CASE("validate_series reports repeated powers with the point index") {
  CountRateSeries s = well_formed();
  s.points[2].p_avg_mw = s.points[1].p_avg_mw;
  const ValidationResult r = validate_series(s);
  REQUIRE_FALSE(r.ok());
  REQUIRE(r.violations.size() == 1);
  CHECK(r.violations[0].rule == "powers not strictly increasing");
  CHECK(r.violations[0].point_index == 2);
}

TEST_CASE("validate_series enforces the minimum sweep length") {
  const ValidationResult r = validate_series(well_formed(3));
  REQUIRE_FALSE(r.ok());
  CHECK(r.violations[0].rule == "minimum 4 points");
}

TEST_CASE("validate_series catches every broken invariant") {
  CountRateSeries s = well_formed();
  s.tau_s = 0.0;
  s.points[1].r_i_cps = -5.0;
  s.points[3].p_avg_mw = -s.points[3].p_avg_mw;
  const ValidationResult r = validate_series(s);
  REQUIRE_FALSE(r.ok());
  CHECK(r.violations.size() >= 3);
  bool saw_tau = false, saw_rate = false, saw_power = false;
  for (const Violation& v : r.violations) {
    saw_tau = saw_tau || v.rule.find("tau") != std::string::npos;
    saw_rate = saw_rate || (v.rule.find("non-negative") != std::string::npos &&
                            v.point_index == 1);
    saw_power = saw_power || (v.rule.find("strictly positive") != std::string::npos &&
                              v.point_index == 3);
  }
  CHECK(saw_tau);
  CHECK(saw_rate);
  CHECK(saw_power);
}

TEST_CASE("series CSV round-trips through read/write") {
  const CountRateSeries s = well_formed(6);
  std::ostringstream out;
  write_series_csv(out, s);
  std::istringstream in(out.str());
  const CountRateSeries back = read_series_csv(in, s.tau_s, s.regime);
  REQUIRE(back.points.size() == s.points.size());
  for (std::size_t k = 0; k < s.points.size(); ++k) {
    CHECK(back.points[k].p_avg_mw == s.points[k].p_avg_mw);
    CHECK(back.points[k].r_s_cps == s.points[k].r_s_cps);
    CHECK(back.points[k].r_i_cps == s.points[k].r_i_cps);
    CHECK(back.points[k].r_si_cps == s.points[k].r_si_cps);
  }
}

TEST_CASE("series CSV rejects a wrong header") {
  std::istringstream in("power,rs,ri,rsi\n1,2,3,4\n");
  CHECK_THROWS_AS(read_series_csv(in, 1e-9), DomainError);
}

TEST_CASE("series CSV rejects malformed rows") {
  std::istringstream in("p_avg_mw,r_s_cps,r_i_cps,r_si_cps\n0.1,10,x,1\n");
  CHECK_THROWS_AS(read_series_csv(in, 1e-9), DomainError);
}
