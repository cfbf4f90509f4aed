#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <random>

#include "pairbench/fit.hpp"
#include "pairbench/pump_ring.hpp"
#include "support/oracles.hpp"

using namespace pairbench;

namespace {

constexpr double center = 1.2153e15;  // rad/s, ~1550 nm
constexpr double fwhm = 2.0e11;       // rad/s

/// FWHM of a sampled curve by linear interpolation of the half-max crossings.
double measured_fwhm(const std::vector<double>& x, const std::vector<double>& y) {
  double peak = 0.0;
  std::size_t ipk = 0;
  for (std::size_t k = 0; k < y.size(); ++k)
    if (y[k] > peak) {
      peak = y[k];
      ipk = k;
    }
  const double half = 0.5 * peak;
  auto cross = [&](bool rising) {
    if (rising) {
      for (std::size_t k = ipk; k > 0; --k)
        if (y[k - 1] <= half && y[k] > half) {
          const double t = (half - y[k - 1]) / (y[k] - y[k - 1]);
          return x[k - 1] + t * (x[k] - x[k - 1]);
        }
    } else {
      for (std::size_t k = ipk; k + 1 < y.size(); ++k)
        if (y[k] > half && y[k + 1] <= half) {
          const double t = (y[k] - half) / (y[k] - y[k + 1]);
          return x[k] + t * (x[k + 1] - x[k]);
        }
    }
    return 0.0;
  };
  return cross(false) - cross(true);
}

std::vector<double> intensity_of(const SpectralProfile& p) {
  std::vector<double> out(p.field.size());
  for (std::size_t k = 0; k < p.field.size(); ++k) out[k] = std::norm(p.field[k]);
  return out;
}

}  // namespace

TEST_CASE("pump_spectrum is unit energy with the requested linewidth") {
  const SpectralProfile full = pump_spectrum(center, fwhm, {4096, 16.0 * fwhm});
  CHECK(full.energy() == Catch::Approx(1.0).epsilon(1e-9));

  // Linewidths verified to within the sampling accuracy of the grid.
  const SpectralProfile half = pump_spectrum(center, 0.5 * fwhm, {4096, 16.0 * fwhm});
  const double w_full = measured_fwhm(full.omega, intensity_of(full));
  const double w_half = measured_fwhm(half.omega, intensity_of(half));
  CHECK(w_full == Catch::Approx(fwhm).epsilon(1e-3));
  CHECK(w_half == Catch::Approx(0.5 * fwhm).epsilon(1e-3));

  // Equal energy: halving the linewidth doubles the peak spectral density.
  double pk_full = 0.0, pk_half = 0.0;
  for (std::size_t k = 0; k < full.field.size(); ++k) {
    pk_full = std::max(pk_full, std::norm(full.field[k]));
    pk_half = std::max(pk_half, std::norm(half.field[k]));
  }
  CHECK(pk_half == Catch::Approx(2.0 * pk_full).epsilon(1e-3));
}

TEST_CASE("pump_spectrum rejects too-narrow grids") {
  CHECK_THROWS_AS(pump_spectrum(center, fwhm, {4096, 4.0 * fwhm}), DomainError);
  CHECK_THROWS_AS(pump_spectrum(center, 0.0, {4096, 16.0 * fwhm}), DomainError);
}

TEST_CASE("wide rings pass the pump through; vanishing rings pass nothing") {
  const SpectralProfile pump = pump_spectrum(center, fwhm, {4096, 16.0 * fwhm});

  const RingTransmission wide{center, 500.0 * fwhm, 0.0};
  CHECK(intracavity_spectrum(pump, wide).energy() > 0.99);

  const RingTransmission narrow{center, 1e-3 * fwhm, 0.0};
  CHECK(intracavity_spectrum(pump, narrow).energy() < 0.01);
}

TEST_CASE("ring transmission dips to the extinction on resonance") {
  const RingTransmission ring{center, fwhm, 0.2};
  CHECK(ring.transmission(center) == Catch::Approx(0.2).epsilon(1e-12));
  CHECK(ring.transmission(center + 100.0 * fwhm) == Catch::Approx(1.0).epsilon(1e-4));
  CHECK_THROWS_AS((RingTransmission{center, -1.0, 0.0}).validate(), DomainError);
  CHECK_THROWS_AS((RingTransmission{center, fwhm, 1.0}).validate(), DomainError);
}

TEST_CASE("resonances outside the pump grid are rejected") {
  const SpectralProfile pump = pump_spectrum(center, fwhm, {1024, 16.0 * fwhm});
  const RingTransmission far{center + 100.0 * fwhm, fwhm, 0.0};
  CHECK_THROWS_AS(intracavity_spectrum(pump, far), DomainError);
}

TEST_CASE("the coupled fraction matches a direct quadrature oracle") {
  for (double ring_scale : {0.1, 0.5, 1.0, 3.0}) {
    const PumpSimConfig config{center, fwhm,
                               {center, ring_scale * fwhm, 0.0},
                               {8192, 24.0 * fwhm}};
    const double fraction = intracavity_energy_fraction(config);
    const double oracle =
        oracles::gauss_lorentz_coupled_fraction(fwhm, ring_scale * fwhm);
    INFO("ring_scale=" << ring_scale);
    CHECK(fraction == Catch::Approx(oracle).epsilon(1e-4));
  }
}

TEST_CASE("coupled energy grows with ring linewidth, shrinks with detuning") {
  const SpectralProfile pump = pump_spectrum(center, fwhm, {4096, 24.0 * fwhm});
  double prev = 0.0;
  for (double scale : {0.2, 0.5, 1.0, 2.0, 5.0}) {
    const double e = intracavity_spectrum(pump, {center, scale * fwhm, 0.0}).energy();
    CHECK(e > prev);
    prev = e;
  }
  prev = 2.0;
  for (double detune : {0.0, 0.5, 1.0, 2.0}) {
    const double e =
        intracavity_spectrum(pump, {center + detune * fwhm, fwhm, 0.0}).energy();
    CHECK(e < prev);
    prev = e;
  }
}

TEST_CASE("a passive ring never adds energy") {
  std::mt19937_64 rng(31);
  std::uniform_real_distribution<double> scale(0.05, 10.0);
  std::uniform_real_distribution<double> ext(0.0, 0.9);
  std::uniform_real_distribution<double> detune(-3.0, 3.0);
  const SpectralProfile pump = pump_spectrum(center, fwhm, {2048, 24.0 * fwhm});
  for (int trial = 0; trial < 30; ++trial) {
    const RingTransmission ring{center + detune(rng) * fwhm, scale(rng) * fwhm,
                                ext(rng)};
    CHECK(intracavity_spectrum(pump, ring).energy() <= pump.energy() + 1e-12);
  }
}

TEST_CASE("temporal profile is the energy-preserving transform") {
  const SpectralProfile pump = pump_spectrum(center, fwhm, {4096, 16.0 * fwhm});
  const TemporalProfile t = temporal_profile(pump);
  CHECK(t.energy() == Catch::Approx(pump.energy()).epsilon(1e-9));

  // Transform-limited gaussian: FWHM_t * FWHM_w = 8 ln2 / 2 = 4 ln 2.
  const double wt = measured_fwhm(t.time, t.power);
  CHECK(wt * fwhm == Catch::Approx(4.0 * std::log(2.0)).epsilon(1e-3));

  // Halving the spectral width doubles the temporal width.
  const SpectralProfile half = pump_spectrum(center, 0.5 * fwhm, {4096, 16.0 * fwhm});
  const TemporalProfile th = temporal_profile(half);
  CHECK(measured_fwhm(th.time, th.power) == Catch::Approx(2.0 * wt).epsilon(1e-3));
}

TEST_CASE("non-uniform grids are rejected by the transform") {
  SpectralProfile bad;
  bad.omega = {0.0, 1.0, 2.5, 3.0};
  bad.field = {1.0, 1.0, 1.0, 1.0};
  CHECK_THROWS_AS(temporal_profile(bad), DomainError);
}

TEST_CASE("average power is energy times repetition rate") {
  const SpectralProfile pump = pump_spectrum(center, fwhm, {4096, 16.0 * fwhm});
  const TemporalProfile t = temporal_profile(pump);
  const double p1 = average_power_mw(t, 80e6, 1e-12);
  CHECK(p1 == Catch::Approx(80e6 * 1e-12 * 1e3).epsilon(1e-9));
  CHECK(average_power_mw(t, 160e6, 1e-12) == Catch::Approx(2.0 * p1).epsilon(1e-12));
}

TEST_CASE("equal-peak pumps: half the linewidth means half the waveguide power") {
  const SpectralProfile full = pump_spectrum(center, fwhm, {4096, 24.0 * fwhm});
  const SpectralProfile half = pump_spectrum(center, 0.5 * fwhm, {4096, 24.0 * fwhm});
  const double e_full = 1e-12;
  const double e_half = 0.5e-12;  // equal peak spectral density
  const double p_full = average_power_mw(temporal_profile(full), 80e6, e_full);
  const double p_half = average_power_mw(temporal_profile(half), 80e6, e_half);
  CHECK(p_half / p_full == Catch::Approx(0.5).epsilon(1e-6));

  // Inside a narrow ring the reduction is much less than proportional.
  const RingTransmission ring{center, 0.2 * fwhm, 0.0};
  const double pi_full = average_power_mw(
      temporal_profile(intracavity_spectrum(full, ring)), 80e6, e_full);
  const double pi_half = average_power_mw(
      temporal_profile(intracavity_spectrum(half, ring)), 80e6, e_half);
  CHECK(pi_half / pi_full > 0.5);
  CHECK(pi_half / pi_full < 1.0);
}

TEST_CASE("intracavity average power equals the overlap energy fraction") {
  const PumpSimConfig config{center, fwhm, {center, 0.5 * fwhm, 0.0}, {4096, 24.0 * fwhm}};
  const SpectralProfile pump = pump_spectrum(center, fwhm, config.grid);
  const SpectralProfile inside = intracavity_spectrum(pump, config.ring);
  const double p_wg = average_power_mw(temporal_profile(pump), 80e6, 1e-12);
  const double p_ic = average_power_mw(temporal_profile(inside), 80e6, 1e-12);
  CHECK(p_ic / p_wg == Catch::Approx(intracavity_energy_fraction(config)).epsilon(1e-9));
}

TEST_CASE("coincidence curves expose the power-reference convention") {
  const PumpSimConfig config{center, fwhm, {center, 0.4 * fwhm, 0.0}, {4096, 24.0 * fwhm}};
  const std::vector<double> powers = {0.2, 0.4, 0.6, 0.8, 1.0};
  const double b1 = 3.5;

  const auto zero = simulate_coincidence_curve(0.0, config, powers, PowerReference::Waveguide);
  for (const CoincidencePoint& pt : zero) CHECK(pt.r_si_cps == 0.0);

  const auto intra =
      simulate_coincidence_curve(b1, config, powers, PowerReference::Intracavity);
  for (const CoincidencePoint& pt : intra)
    CHECK(pt.r_si_cps ==
          Catch::Approx(b1 * counts_per_mcts * pt.p_avg_sq_mw2).epsilon(1e-12));

  const double fraction = intracavity_energy_fraction(config);
  const auto wg =
      simulate_coincidence_curve(b1, config, powers, PowerReference::Waveguide);
  for (const CoincidencePoint& pt : wg)
    CHECK(pt.r_si_cps == Catch::Approx(b1 * counts_per_mcts * fraction * fraction *
                                       pt.p_avg_sq_mw2)
                             .epsilon(1e-12));
}

TEST_CASE("intracavity-referenced brightness is insensitive to pulse linewidth") {
  const RingTransmission ring{center, 0.4 * fwhm, 0.0};
  const PumpGridSpec grid{4096, 24.0 * fwhm};
  const std::vector<double> powers = {0.25, 0.5, 0.75, 1.0};
  const double b1 = 2.0;

  auto fitted_slope = [&](double pump_fwhm, PowerReference ref) {
    const PumpSimConfig config{center, pump_fwhm, ring, grid};
    const auto pts = simulate_coincidence_curve(b1, config, powers, ref);
    double num = 0.0, den = 0.0;
    for (const CoincidencePoint& p : pts) {
      num += p.r_si_cps * p.p_avg_sq_mw2;
      den += p.p_avg_sq_mw2 * p.p_avg_sq_mw2;
    }
    return num / den / counts_per_mcts;
  };

  const double wg_full = fitted_slope(fwhm, PowerReference::Waveguide);
  const double wg_half = fitted_slope(0.5 * fwhm, PowerReference::Waveguide);
  const double ic_full = fitted_slope(fwhm, PowerReference::Intracavity);
  const double ic_half = fitted_slope(0.5 * fwhm, PowerReference::Intracavity);

  const double wg_spread = std::abs(wg_full - wg_half);
  const double ic_spread = std::abs(ic_full - ic_half);
  CHECK(ic_spread < wg_spread);
  CHECK(ic_full == Catch::Approx(b1).epsilon(1e-9));
  CHECK(ic_half == Catch::Approx(b1).epsilon(1e-9));
  // Waveguide-referenced fits understate B1 by the coupled fraction squared.
  CHECK(wg_full < b1);
}

TEST_CASE("the full fitter recovers B1 from simulated intracavity curves") {
  const PumpSimConfig config{center, fwhm, {center, 0.3 * fwhm, 0.0}, {4096, 24.0 * fwhm}};
  const std::vector<double> powers = {0.2, 0.4, 0.6, 0.8, 1.0, 1.2};
  const double b1 = 7.25;
  const auto pts =
      simulate_coincidence_curve(b1, config, powers, PowerReference::Intracavity);

  // Complete the pair curve into a full sweep with known arm parameters.
  const RateModelParams arms{b1, 0.25, 0.2, 500.0, 300.0, 50.0, 20.0};
  CountRateSeries series;
  series.tau_s = 1e-9;
  for (const CoincidencePoint& pt : pts) {
    const double p = std::sqrt(pt.p_avg_sq_mw2);
    const RateTriple r = predict_rates(arms, p, series.tau_s);
    series.points.push_back({p, r.r_s_cps, r.r_i_cps, r.r_si_cps});
  }
  const ValidationResult v = validate_series(series);
  REQUIRE(v.ok());
  const FitResult fit = fit_rates(*v.series);
  CHECK(fit.params.b1_mcts == Catch::Approx(b1).epsilon(1e-9));
}

TEST_CASE("doubling the grid resolution leaves the power unchanged") {
  for (std::size_t n : {2048u, 4096u}) {
    const PumpSimConfig coarse{center, fwhm, {center, 0.5 * fwhm, 0.0}, {n, 24.0 * fwhm}};
    const PumpSimConfig fine{center, fwhm, {center, 0.5 * fwhm, 0.0}, {2 * n, 24.0 * fwhm}};
    const double a = intracavity_energy_fraction(coarse);
    const double b = intracavity_energy_fraction(fine);
    CHECK(std::abs(a - b) / b < 1e-4);
  }
}
