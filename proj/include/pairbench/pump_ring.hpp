#pragma once

#include <cmath>
#include <complex>
#include <cstddef>
#include <vector>

#include "pairbench/core.hpp"
#include "pairbench/detail/numeric.hpp"
#include "pairbench/errors.hpp"
#include "pairbench/rate_model.hpp"

namespace pairbench {

/// Complex spectral amplitude sampled on a uniform angular-frequency grid.
struct SpectralProfile {
  std::vector<double> omega;                // rad/s, uniform
  std::vector<std::complex<double>> field;  // amplitude per bin

  /// Trapezoidal integral of |field|^2 over omega.
  double energy() const {
    std::vector<double> intensity(field.size());
    for (std::size_t k = 0; k < field.size(); ++k) intensity[k] = std::norm(field[k]);
    return detail::integrate(intensity, omega);
  }
};

/// All-pass microring power response: a single Lorentzian dip of the given
/// FWHM. On resonance the transmitted fraction equals `extinction`, so the
/// coupled (intracavity) fraction there is 1-extinction.
struct RingTransmission {
  double center = 0.0;     // rad/s
  double linewidth = 0.0;  // rad/s, FWHM of the dip
  double extinction = 0.0; // fraction in [0,1)

  void validate() const {
    if (!(linewidth > 0.0)) throw DomainError("ring linewidth must be > 0");
    if (extinction < 0.0 || extinction >= 1.0)
      throw DomainError("extinction must lie in [0,1)");
  }

  /// Power transmission T(omega) past the ring.
  double transmission(double w) const {
    const double hw = 0.5 * linewidth;
    const double lorentz = hw * hw / ((w - center) * (w - center) + hw * hw);
    return 1.0 - (1.0 - extinction) * lorentz;
  }
};

/// Pulse power |E(t)|^2 on a uniform time grid.
struct TemporalProfile {
  std::vector<double> time;   // s, uniform
  std::vector<double> power;  // relative W

  double energy() const { return detail::integrate(power, time); }
};

struct PumpGridSpec {
  std::size_t points = 4096;   // radix-2 sizes take the fast transform path
  double half_span = 0.0;      // rad/s around the pump center; >= 8 x fwhm
};

/// Unit-energy Gaussian pump: |field|^2 has the requested FWHM and integrates
/// to 1 over the grid.
enum class PulseShape { Gaussian };

inline SpectralProfile pump_spectrum(double center, double fwhm_linewidth,
                                     PumpGridSpec grid,
                                     PulseShape shape = PulseShape::Gaussian) {
  if (!(fwhm_linewidth > 0.0)) throw DomainError("pump linewidth must be > 0");
  if (grid.points < 2) throw DomainError("grid needs at least 2 points");
  if (grid.half_span <= 0.0) grid.half_span = 16.0 * fwhm_linewidth;
  if (grid.half_span < 8.0 * fwhm_linewidth)
    throw DomainError("grid must span at least +-8 x pump linewidth");
  (void)shape;  // Gaussian is the only shape so far

  const double sigma = fwhm_linewidth / (2.0 * std::sqrt(2.0 * std::log(2.0)));
  const double peak_density = 1.0 / (sigma * std::sqrt(2.0 * std::numbers::pi));

  SpectralProfile p;
  p.omega.resize(grid.points);
  p.field.resize(grid.points);
  for (std::size_t k = 0; k < grid.points; ++k) {
    const double w = center - grid.half_span +
                     2.0 * grid.half_span * static_cast<double>(k) /
                         static_cast<double>(grid.points - 1);
    const double d = w - center;
    p.omega[k] = w;
    p.field[k] = std::sqrt(peak_density) * std::exp(-d * d / (4.0 * sigma * sigma));
  }
  return p;
}

/// Spectral profile inside the ring: the waveguide field filtered by the
/// ring's coupling amplitude sqrt(1 - T(omega)).
inline SpectralProfile intracavity_spectrum(const SpectralProfile& pump,
                                            const RingTransmission& ring) {
  ring.validate();
  if (pump.omega.size() < 2) throw DomainError("pump grid needs at least 2 points");
  if (ring.center < pump.omega.front() || ring.center > pump.omega.back())
    throw DomainError("ring resonance lies outside the pump grid");

  SpectralProfile out;
  out.omega = pump.omega;
  out.field.resize(pump.field.size());
  for (std::size_t k = 0; k < pump.field.size(); ++k)
    out.field[k] = pump.field[k] * std::sqrt(1.0 - ring.transmission(pump.omega[k]));
  return out;
}

/// Discrete inverse transform of the spectral amplitude, scaled so the
/// temporal energy integral equals the spectral one (Parseval). The time grid
/// is centered on the pulse.
inline TemporalProfile temporal_profile(const SpectralProfile& s) {
  const double domega = detail::uniform_step(s.omega);
  const std::size_t n = s.omega.size();
  const double dt = 2.0 * std::numbers::pi / (domega * static_cast<double>(n));

  std::vector<std::complex<double>> g = detail::dft(s.field);

  // Energy-matching scale: sum |E|^2 dt == sum |F|^2 domega.
  const double scale = std::sqrt(domega / (static_cast<double>(n) * dt));

  TemporalProfile t;
  t.time.resize(n);
  t.power.resize(n);
  const std::size_t half = n / 2;
  for (std::size_t j = 0; j < n; ++j) {
    // fftshift: index half..n-1 maps to negative times.
    const std::size_t src = (j + half) % n;
    const double tj =
        (static_cast<double>(j) - static_cast<double>(half)) * dt;
    t.time[j] = tj;
    t.power[j] = std::norm(g[src] * scale);
  }
  return t;
}

/// Average power delivered by a pulse train: pulse energy x repetition rate,
/// scaled by the profile's relative energy fraction. Profiles filtered by a
/// ring carry a fraction < 1 and so yield a reduced average power.
inline double average_power_mw(const TemporalProfile& t, double rep_rate_hz,
                               double pulse_energy_j) {
  if (!(rep_rate_hz > 0.0)) throw DomainError("repetition rate must be > 0");
  if (pulse_energy_j < 0.0) throw DomainError("pulse energy must be >= 0");
  return pulse_energy_j * rep_rate_hz * t.energy() * 1e3;
}

// ---------------------------------------------------------------------------
// Coincidence-curve simulation
// ---------------------------------------------------------------------------

/// Which average power a measurement references: the conventional side-coupled
/// waveguide power, or the fraction actually accepted by the ring resonance.
enum class PowerReference { Waveguide, Intracavity };

struct PumpSimConfig {
  double pump_center = 0.0;  // rad/s
  double pump_fwhm = 0.0;    // rad/s, FWHM of |field|^2
  RingTransmission ring;
  PumpGridSpec grid;
};

/// Fraction of the waveguide pump energy accepted by the ring resonance.
inline double intracavity_energy_fraction(const PumpSimConfig& config) {
  const SpectralProfile pump =
      pump_spectrum(config.pump_center, config.pump_fwhm, config.grid);
  const SpectralProfile inside = intracavity_spectrum(pump, config.ring);
  return inside.energy() / pump.energy();
}

struct CoincidencePoint {
  double p_avg_sq_mw2 = 0.0;  // squared average power at the chosen reference
  double r_si_cps = 0.0;      // physical coincidence rate
};

/// Pair-coincidence curve against squared average pump power. The physical
/// rate is always driven by the power inside the ring; `reference` selects
/// which power the x axis reports. Waveguide-referenced points therefore
/// imply a linewidth-dependent apparent brightness, intracavity-referenced
/// points recover the configured B1.
inline std::vector<CoincidencePoint> simulate_coincidence_curve(
    double b1_mcts, const PumpSimConfig& config,
    const std::vector<double>& waveguide_powers_mw, PowerReference reference) {
  if (b1_mcts < 0.0) throw DomainError("brightness must be >= 0");
  const double fraction = intracavity_energy_fraction(config);

  std::vector<CoincidencePoint> points;
  points.reserve(waveguide_powers_mw.size());
  for (double p_wg : waveguide_powers_mw) {
    if (!(p_wg > 0.0)) throw DomainError("powers must be > 0");
    const double p_ic = fraction * p_wg;
    const double p_ref = reference == PowerReference::Waveguide ? p_wg : p_ic;
    points.push_back(
        {p_ref * p_ref, b1_mcts * counts_per_mcts * p_ic * p_ic});
  }
  return points;
}

}  // namespace pairbench
