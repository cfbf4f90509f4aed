#pragma once

#include <Eigen/Dense>
#include <Eigen/SVD>
#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

#include "pairbench/core.hpp"
#include "pairbench/detail/numeric.hpp"
#include "pairbench/errors.hpp"

namespace pairbench {

/// Discretized joint spectral intensity |JSI| on a rectangular grid of
/// signal/idler angular frequencies.
struct JointSpectrum {
  std::vector<double> omega_s;  // rad/s, strictly increasing
  std::vector<double> omega_i;  // rad/s, strictly increasing
  Eigen::MatrixXd intensity;    // |omega_s| x |omega_i|, entries >= 0

  void validate() const {
    if (omega_s.empty() || omega_i.empty())
      throw DomainError("joint spectrum grids must be non-empty");
    if (!detail::strictly_increasing(omega_s) || !detail::strictly_increasing(omega_i))
      throw DomainError("joint spectrum grids must be strictly increasing");
    if (intensity.rows() != static_cast<Eigen::Index>(omega_s.size()) ||
        intensity.cols() != static_cast<Eigen::Index>(omega_i.size()))
      throw DomainError("intensity shape does not match the frequency grids");
    bool any_positive = false;
    for (Eigen::Index r = 0; r < intensity.rows(); ++r)
      for (Eigen::Index c = 0; c < intensity.cols(); ++c) {
        const double v = intensity(r, c);
        if (!std::isfinite(v) || v < 0.0)
          throw DomainError("intensity entries must be finite and >= 0");
        any_positive = any_positive || v > 0.0;
      }
    if (!any_positive) throw DomainError("intensity must have a positive entry");
  }
};

/// Joint spectral amplitude on the same grid layout. Real-valued: the JSI
/// carries no phase, so amplitudes derived from it are flat-phase square
/// roots; callers holding phase information can populate signed values
/// directly.
struct JointAmplitude {
  std::vector<double> omega_s;
  std::vector<double> omega_i;
  Eigen::MatrixXd amplitude;
};

/// Schmidt spectrum of a joint amplitude. Coefficients are normalized to
/// sum(lambda_k^2) = 1, so lambda_k^2 is the probability weight of mode k.
struct SchmidtDecomposition {
  std::vector<double> lambdas;     // descending
  double mode_count = 0.0;         // effective K = 1 / sum(lambda_k^4)
  double fundamental_weight = 0.0; // lambda_1^2
};

/// Flat-phase amplitude: elementwise square root of the intensity, then
/// L2-normalized against the trapezoidal grid measure.
inline JointAmplitude amplitude_from_intensity(const JointSpectrum& jsi) {
  jsi.validate();
  JointAmplitude amp;
  amp.omega_s = jsi.omega_s;
  amp.omega_i = jsi.omega_i;
  amp.amplitude = jsi.intensity.cwiseSqrt();

  const std::vector<double> ws = detail::trapezoid_weights(amp.omega_s);
  const std::vector<double> wi = detail::trapezoid_weights(amp.omega_i);
  double norm_sq = 0.0;
  for (Eigen::Index r = 0; r < amp.amplitude.rows(); ++r)
    for (Eigen::Index c = 0; c < amp.amplitude.cols(); ++c)
      norm_sq += ws[static_cast<std::size_t>(r)] * wi[static_cast<std::size_t>(c)] *
                 amp.amplitude(r, c) * amp.amplitude(r, c);
  if (!(norm_sq > 0.0)) throw DomainError("amplitude has zero norm");
  amp.amplitude /= std::sqrt(norm_sq);
  return amp;
}

/// Relative floor under which Schmidt coefficients are treated as numerical
/// noise and dropped.
inline constexpr double schmidt_truncation = 1e-12;

/// Schmidt decomposition of the discretized amplitude: trapezoidal weights
/// are folded into the matrix so the singular values approximate the
/// continuum integral operator, then renormalized to sum(lambda^2) = 1.
inline SchmidtDecomposition schmidt_decompose(const JointAmplitude& amp) {
  if (amp.omega_s.empty() || amp.omega_i.empty())
    throw DomainError("amplitude grids must be non-empty");
  if (!detail::strictly_increasing(amp.omega_s) ||
      !detail::strictly_increasing(amp.omega_i))
    throw DomainError("amplitude grids must be strictly increasing");
  if (amp.amplitude.rows() != static_cast<Eigen::Index>(amp.omega_s.size()) ||
      amp.amplitude.cols() != static_cast<Eigen::Index>(amp.omega_i.size()))
    throw DomainError("amplitude shape does not match the frequency grids");

  const std::vector<double> ws = detail::trapezoid_weights(amp.omega_s);
  const std::vector<double> wi = detail::trapezoid_weights(amp.omega_i);
  Eigen::MatrixXd m = amp.amplitude;
  for (Eigen::Index r = 0; r < m.rows(); ++r)
    for (Eigen::Index c = 0; c < m.cols(); ++c)
      m(r, c) *= std::sqrt(ws[static_cast<std::size_t>(r)]) *
                 std::sqrt(wi[static_cast<std::size_t>(c)]);

  Eigen::BDCSVD<Eigen::MatrixXd> svd(m);
  if (svd.info() != Eigen::Success)
    throw NumericalError("SVD did not converge (matrix " + std::to_string(m.rows()) +
                         "x" + std::to_string(m.cols()) +
                         ", norm=" + std::to_string(m.norm()) + ")");

  const Eigen::VectorXd& sv = svd.singularValues();
  if (sv.size() == 0 || !(sv[0] > 0.0))
    throw DomainError("amplitude has zero norm");

  SchmidtDecomposition d;
  double sum_sq = 0.0;
  for (Eigen::Index k = 0; k < sv.size(); ++k) {
    if (sv[k] < schmidt_truncation * sv[0]) break;
    d.lambdas.push_back(sv[k]);
    sum_sq += sv[k] * sv[k];
  }
  const double scale = 1.0 / std::sqrt(sum_sq);
  double purity = 0.0;
  for (double& l : d.lambdas) {
    l *= scale;
    purity += l * l * l * l;
  }
  d.mode_count = 1.0 / purity;
  d.fundamental_weight = d.lambdas[0] * d.lambdas[0];
  return d;
}

/// Spectral purity P_S = sum(lambda_k^4): the squared probability weights of
/// the Schmidt modes, summed.
inline double spectral_purity(const SchmidtDecomposition& d) {
  double p = 0.0;
  for (double l : d.lambdas) p += l * l * l * l;
  return p;
}

/// Brightness available in the fundamental Schmidt mode: the total brightness
/// is split among the modes by their weights, and only the fundamental
/// mode's share interferes cleanly. Equals the total exactly at 100% purity.
inline Quantity useful_brightness(const Quantity& b_total,
                                  const SchmidtDecomposition& d) {
  if (b_total.value < 0.0) throw DomainError("brightness must be >= 0");
  return b_total.scaled(d.fundamental_weight);
}

/// Overall fidelity after n gate operations when the single-gate fidelity is
/// the spectral purity: P_S^n.
inline double fidelity_decay(double spectral_purity_value, long n_gates) {
  if (!(spectral_purity_value > 0.0) || spectral_purity_value > 1.0)
    throw DomainError("spectral purity must be in (0,1]");
  if (n_gates < 0) throw DomainError("gate count must be >= 0");
  return std::pow(spectral_purity_value, static_cast<double>(n_gates));
}

// ---------------------------------------------------------------------------
// Gaussian test family
// ---------------------------------------------------------------------------

struct GaussianJsiSpec {
  double sigma_s = 1.0;       // rad/s, std dev of the intensity marginal
  double sigma_i = 1.0;       // rad/s
  double correlation = 0.0;   // in (-1,1)
  double center_s = 0.0;      // rad/s
  double center_i = 0.0;      // rad/s
  std::size_t points_per_axis = 256;
  double span_sigmas = 5.0;   // half-span of the grid, in sigmas (>= 4)
};

struct GaussianJsiResult {
  JointSpectrum spectrum;
  std::vector<std::string> warnings;
};

/// Bivariate Gaussian intensity with the given marginal widths and
/// correlation, discretized on a symmetric grid.
inline GaussianJsiResult gaussian_jsi(const GaussianJsiSpec& spec) {
  if (!(spec.sigma_s > 0.0) || !(spec.sigma_i > 0.0))
    throw DomainError("sigmas must be > 0");
  if (!(std::abs(spec.correlation) < 1.0))
    throw DomainError("correlation must lie in (-1,1)");
  if (spec.span_sigmas < 4.0)
    throw DomainError("grid must cover at least +-4 sigma");
  if (spec.points_per_axis < 2) throw DomainError("grid needs at least 2 points");

  GaussianJsiResult result;
  if (spec.points_per_axis < 64)
    result.warnings.push_back("grid coarser than 64 points/axis; Schmidt spectrum "
                              "may be unresolved");

  auto axis = [&](double center, double sigma) {
    std::vector<double> g(spec.points_per_axis);
    const double half = spec.span_sigmas * sigma;
    for (std::size_t k = 0; k < spec.points_per_axis; ++k)
      g[k] = center - half +
             2.0 * half * static_cast<double>(k) /
                 static_cast<double>(spec.points_per_axis - 1);
    return g;
  };
  result.spectrum.omega_s = axis(spec.center_s, spec.sigma_s);
  result.spectrum.omega_i = axis(spec.center_i, spec.sigma_i);

  const double rho = spec.correlation;
  const double q = 1.0 / (2.0 * (1.0 - rho * rho));
  const std::size_t n = spec.points_per_axis;
  result.spectrum.intensity.resize(static_cast<Eigen::Index>(n),
                                   static_cast<Eigen::Index>(n));
  for (std::size_t r = 0; r < n; ++r) {
    const double x = (result.spectrum.omega_s[r] - spec.center_s) / spec.sigma_s;
    for (std::size_t c = 0; c < n; ++c) {
      const double y = (result.spectrum.omega_i[c] - spec.center_i) / spec.sigma_i;
      result.spectrum.intensity(static_cast<Eigen::Index>(r),
                                static_cast<Eigen::Index>(c)) =
          std::exp(-q * (x * x - 2.0 * rho * x * y + y * y));
    }
  }
  return result;
}

}  // namespace pairbench
