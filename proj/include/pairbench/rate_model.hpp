#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <random>
#include <string>
#include <vector>

#include "pairbench/core.hpp"
#include "pairbench/errors.hpp"

namespace pairbench {

/// Counts per Mcts; brightness is carried in Mcts s^-1 mW^-2 while the rate
/// equations work in raw counts per second.
inline constexpr double counts_per_mcts = 1e6;

/// Parameters of the joint count-rate model
///   R_s  = H3_s (B1 P^2 + beta_s P) + R_DC_s
///   R_i  = H3_i (B1 P^2 + beta_i P) + R_DC_i
///   R_si = H3_s H3_i B1 P^2 + R_s R_i tau
/// with P the average pump power. B1 is the intrinsic brightness, H3 the
/// detector-level heralding efficiency per arm, beta a linear noise term and
/// R_DC the dark-count rate.
struct RateModelParams {
  double b1_mcts = 0.0;  // Mcts s^-1 mW^-2
  double h3_s = 0.0;     // fraction in (0,1]
  double h3_i = 0.0;     // fraction in (0,1]
  double beta_s = 0.0;   // cts s^-1 mW^-1
  double beta_i = 0.0;   // cts s^-1 mW^-1
  double r_dc_s = 0.0;   // cts s^-1
  double r_dc_i = 0.0;   // cts s^-1

  bool valid() const {
    return std::isfinite(b1_mcts) && b1_mcts > 0.0 && h3_s > 0.0 && h3_s <= 1.0 &&
           h3_i > 0.0 && h3_i <= 1.0 && beta_s >= 0.0 && beta_i >= 0.0 &&
           r_dc_s >= 0.0 && r_dc_i >= 0.0 && std::isfinite(beta_s) &&
           std::isfinite(beta_i) && std::isfinite(r_dc_s) && std::isfinite(r_dc_i);
  }
};

/// Canonical ordering of the 7 model parameters, used for covariance rows,
/// standard errors and serialized fit output.
inline const std::vector<std::string>& rate_param_names() {
  static const std::vector<std::string> names = {
      "b1_mcts", "h3_s", "h3_i", "beta_s", "beta_i", "r_dc_s", "r_dc_i"};
  return names;
}

struct RateTriple {
  double r_s_cps = 0.0;
  double r_i_cps = 0.0;
  double r_si_cps = 0.0;
};

/// Evaluates the rate model at one pump power. The accidental term uses the
/// predicted singles, keeping the model a pure function of the parameters.
inline RateTriple predict_rates(const RateModelParams& params, double p_avg_mw,
                                double tau_s) {
  if (!params.valid()) throw DomainError("invalid rate-model parameters");
  if (!(p_avg_mw > 0.0)) throw DomainError("pump power must be > 0");
  if (!(tau_s > 0.0)) throw DomainError("coincidence window must be > 0");

  const double pair_cts = params.b1_mcts * counts_per_mcts * p_avg_mw * p_avg_mw;
  RateTriple r;
  r.r_s_cps = params.h3_s * (pair_cts + params.beta_s * p_avg_mw) + params.r_dc_s;
  r.r_i_cps = params.h3_i * (pair_cts + params.beta_i * p_avg_mw) + params.r_dc_i;
  r.r_si_cps = params.h3_s * params.h3_i * pair_cts + r.r_s_cps * r.r_i_cps * tau_s;
  return r;
}

/// Accidental coincidence rate R_ACC = R_s * R_i * tau.
inline double accidentals(double r_s_cps, double r_i_cps, double tau_s) {
  if (r_s_cps < 0.0 || r_i_cps < 0.0)
    throw DomainError("count rates must be non-negative");
  if (!(tau_s > 0.0)) throw DomainError("coincidence window must be > 0");
  return r_s_cps * r_i_cps * tau_s;
}

/// Coincidence-to-accidental ratio with the practical-resolvability flag.
/// Coincidence events are considered practically resolvable only for CAR
/// strictly greater than 10.
struct CarResult {
  double car = 0.0;
  bool practically_resolvable = false;
};

inline constexpr double car_resolvable_threshold = 10.0;

inline CarResult car(double r_si_cps, double r_acc_cps) {
  if (r_si_cps < 0.0 || r_acc_cps < 0.0)
    throw DomainError("rates must be non-negative");
  if (r_acc_cps == 0.0)
    return {std::numeric_limits<double>::infinity(), true};
  const double value = r_si_cps / r_acc_cps;
  return {value, value > car_resolvable_threshold};
}

/// System-level heralding efficiency: coincidences divided by the heralding
/// arm's singles rate. This includes dark counts and accidentals, so it
/// cannot be equated with the source parameter H3.
inline double klyshko_efficiency(double r_si_cps, double r_heralding_arm_cps) {
  if (r_si_cps < 0.0) throw DomainError("coincidence rate must be non-negative");
  if (!(r_heralding_arm_cps > 0.0))
    throw DomainError("heralding-arm rate must be > 0");
  return r_si_cps / r_heralding_arm_cps;
}

// ---------------------------------------------------------------------------
// Synthetic sweeps (fit oracle)
// ---------------------------------------------------------------------------

struct SynthesisOptions {
  double integration_time_s = 1.0;
  std::uint64_t seed = 0;
  bool noiseless = false;  // infinite-integration limit: rates = model exactly
  PumpRegime regime = PumpRegime::cw();
};

/// Draws a power sweep from the rate model. Counts per observable are Poisson
/// with mean rate*integration_time and are converted back to rates; a fixed
/// seed reproduces the same series. The draw order is fixed (per power:
/// signal, idler, coincidences).
inline CountRateSeries synthesize_series(const RateModelParams& params,
                                         const std::vector<double>& powers_mw,
                                         double tau_s,
                                         const SynthesisOptions& options = {}) {
  if (!params.valid()) throw DomainError("invalid rate-model parameters");
  if (powers_mw.empty() || !detail::strictly_increasing(powers_mw) ||
      !(powers_mw.front() > 0.0))
    throw DomainError("powers must be strictly increasing and positive");
  if (!options.noiseless && !(options.integration_time_s > 0.0))
    throw DomainError("integration time must be > 0");

  std::mt19937_64 rng(options.seed);
  auto draw_rate = [&](double rate_cps) {
    if (options.noiseless) return rate_cps;
    const double mean = rate_cps * options.integration_time_s;
    std::poisson_distribution<long long> dist(mean);
    return static_cast<double>(dist(rng)) / options.integration_time_s;
  };

  CountRateSeries series;
  series.tau_s = tau_s;
  series.regime = options.regime;
  for (double p : powers_mw) {
    const RateTriple model = predict_rates(params, p, tau_s);
    CountRatePoint point;
    point.p_avg_mw = p;
    point.r_s_cps = draw_rate(model.r_s_cps);
    point.r_i_cps = draw_rate(model.r_i_cps);
    point.r_si_cps = draw_rate(model.r_si_cps);
    series.points.push_back(point);
  }
  return series;
}

}  // namespace pairbench
