#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

#include "pairbench/core.hpp"
#include "pairbench/errors.hpp"
#include "pairbench/rate_model.hpp"

namespace pairbench {

struct FitOptions {
  /// Convergence when the infinity norm of the cost gradient drops below
  /// gradient_tol relative to the initial gradient (with an absolute floor
  /// of gradient_tol itself).
  double gradient_tol = 1e-10;
  int max_iterations = 200;
  /// Integration time behind each rate sample; sets the Poisson weights
  /// 1/max(count,1) used for the residuals.
  double integration_time_s = 1.0;
  /// Constrain the linear noise terms to zero (nested-model comparisons).
  bool fix_beta = false;
  /// Constrain the dark-count rates to zero.
  bool fix_dark = false;
  /// Secondary stop: relative step size below which iteration cannot make
  /// further progress.
  double step_tol = 1e-14;
};

using Covariance7 = std::array<std::array<double, 7>, 7>;

struct FitResult {
  RateModelParams params;
  Covariance7 covariance{};                  // symmetric PSD, fixed params zeroed
  std::array<double, 7> standard_errors{};   // sqrt of the covariance diagonal
  double residual_norm = 0.0;                // weighted L2 norm at the optimum
  int iterations = 0;
  bool converged = false;
  double gradient_norm = 0.0;                // scaled gradient norm at exit
};

namespace detail_fit {

constexpr int n_params = 7;

// Parameter index order matches rate_param_names():
// 0 b1, 1 h3_s, 2 h3_i, 3 beta_s, 4 beta_i, 5 r_dc_s, 6 r_dc_i.

inline double clamp(double x, double lo, double hi) {
  return std::min(std::max(x, lo), hi);
}

/// Positive quantities are fitted in log space and efficiencies in logit
/// space, so every iterate satisfies the model invariants by construction.
struct Transform {
  std::array<bool, n_params> free{};

  Eigen::VectorXd to_internal(const RateModelParams& p) const {
    std::array<double, n_params> phys = {p.b1_mcts, p.h3_s, p.h3_i, p.beta_s,
                                         p.beta_i,  p.r_dc_s, p.r_dc_i};
    Eigen::VectorXd u(count_free());
    int j = 0;
    for (int k = 0; k < n_params; ++k) {
      if (!free[k]) continue;
      if (k == 1 || k == 2) {
        const double h = clamp(phys[k], 1e-12, 1.0 - 1e-12);
        u[j++] = std::log(h / (1.0 - h));
      } else {
        u[j++] = std::log(std::max(phys[k], 1e-300));
      }
    }
    return u;
  }

  RateModelParams to_physical(const Eigen::VectorXd& u) const {
    std::array<double, n_params> phys{};
    int j = 0;
    for (int k = 0; k < n_params; ++k) {
      if (!free[k]) continue;
      if (k == 1 || k == 2)
        phys[k] = 1.0 / (1.0 + std::exp(-u[j++]));
      else
        phys[k] = std::exp(u[j++]);
    }
    RateModelParams p;
    p.b1_mcts = phys[0];
    p.h3_s = phys[1];
    p.h3_i = phys[2];
    p.beta_s = phys[3];
    p.beta_i = phys[4];
    p.r_dc_s = phys[5];
    p.r_dc_i = phys[6];
    return p;
  }

  /// d(physical)/d(internal) for each free coordinate.
  Eigen::VectorXd jacobian_scale(const RateModelParams& p) const {
    std::array<double, n_params> phys = {p.b1_mcts, p.h3_s, p.h3_i, p.beta_s,
                                         p.beta_i,  p.r_dc_s, p.r_dc_i};
    Eigen::VectorXd s(count_free());
    int j = 0;
    for (int k = 0; k < n_params; ++k) {
      if (!free[k]) continue;
      if (k == 1 || k == 2)
        s[j++] = phys[k] * (1.0 - phys[k]);
      else
        s[j++] = phys[k];
    }
    return s;
  }

  int count_free() const {
    int n = 0;
    for (bool f : free) n += f;
    return n;
  }

  std::vector<int> free_indices() const {
    std::vector<int> idx;
    for (int k = 0; k < n_params; ++k)
      if (free[k]) idx.push_back(k);
    return idx;
  }
};

/// Residuals r_j = (obs - model)/sigma_j and the model Jacobian in physical
/// parameter space (all 7 columns; constrained parameters are excluded
/// downstream). sigma comes from Poisson counting:
/// sigma_rate = sqrt(max(count,1))/T with count = rate*T.
struct Evaluation {
  Eigen::VectorXd residuals;
  Eigen::MatrixXd jac_physical;  // d(residual)/d(theta), m x 7
  double cost = 0.0;             // 0.5 * ||r||^2
};

inline Evaluation evaluate(const ValidatedSeries& series, const RateModelParams& p,
                           double integration_time_s) {
  const auto& pts = series.points();
  const double tau = series.tau_s();
  const double T = integration_time_s;
  const std::size_t m = 3 * pts.size();

  Evaluation ev;
  ev.residuals.resize(static_cast<Eigen::Index>(m));
  ev.jac_physical = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(m), n_params);

  for (std::size_t k = 0; k < pts.size(); ++k) {
    const double P = pts[k].p_avg_mw;
    const double pair = p.b1_mcts * counts_per_mcts * P * P;
    const double dpair_db1 = counts_per_mcts * P * P;

    const double rs = p.h3_s * (pair + p.beta_s * P) + p.r_dc_s;
    const double ri = p.h3_i * (pair + p.beta_i * P) + p.r_dc_i;
    const double rsi = p.h3_s * p.h3_i * pair + rs * ri * tau;

    // dR_s/dtheta
    std::array<double, n_params> ds{};
    ds[0] = p.h3_s * dpair_db1;
    ds[1] = pair + p.beta_s * P;
    ds[3] = p.h3_s * P;
    ds[5] = 1.0;
    // dR_i/dtheta
    std::array<double, n_params> di{};
    di[0] = p.h3_i * dpair_db1;
    di[2] = pair + p.beta_i * P;
    di[4] = p.h3_i * P;
    di[6] = 1.0;
    // dR_si/dtheta, accidental term chained through the predicted singles
    std::array<double, n_params> dsi{};
    for (int c = 0; c < n_params; ++c) dsi[c] = tau * (ri * ds[c] + rs * di[c]);
    dsi[0] += p.h3_s * p.h3_i * dpair_db1;
    dsi[1] += p.h3_i * pair;
    dsi[2] += p.h3_s * pair;

    const std::array<double, 3> obs = {pts[k].r_s_cps, pts[k].r_i_cps,
                                       pts[k].r_si_cps};
    const std::array<double, 3> model = {rs, ri, rsi};
    const std::array<const std::array<double, n_params>*, 3> grads = {&ds, &di, &dsi};

    for (int o = 0; o < 3; ++o) {
      const double sigma = std::sqrt(std::max(obs[o] * T, 1.0)) / T;
      const Eigen::Index row = static_cast<Eigen::Index>(3 * k + o);
      ev.residuals[row] = (obs[o] - model[o]) / sigma;
      for (int c = 0; c < n_params; ++c)
        ev.jac_physical(row, c) = -(*grads[o])[c] / sigma;
    }
  }
  ev.cost = 0.5 * ev.residuals.squaredNorm();
  return ev;
}

/// Starting point built from the data: heralding efficiencies from the
/// highest-power Klyshko ratios with accidentals subtracted, B1 from the
/// quadratic coefficient of the accidental-corrected coincidences, beta from
/// the residual linear component, dark counts from the lowest-power intercept.
inline RateModelParams initial_guess(const ValidatedSeries& series,
                                     const FitOptions& options) {
  const auto& pts = series.points();
  const double tau = series.tau_s();
  const std::size_t n = pts.size();

  RateModelParams p;

  // Dark counts: straight-line extrapolation of the two lowest powers to P=0.
  auto intercept = [&](auto rate_of) {
    const double p0 = pts[0].p_avg_mw, p1 = pts[1].p_avg_mw;
    const double r0 = rate_of(pts[0]), r1 = rate_of(pts[1]);
    const double slope = (r1 - r0) / (p1 - p0);
    return std::max(r0 - slope * p0, 1e-3);
  };
  p.r_dc_s = options.fix_dark ? 0.0
                              : intercept([](const CountRatePoint& q) { return q.r_s_cps; });
  p.r_dc_i = options.fix_dark ? 0.0
                              : intercept([](const CountRatePoint& q) { return q.r_i_cps; });

  // Heralding efficiencies from the top-power point.
  const CountRatePoint& top = pts[n - 1];
  const double acc_top = top.r_s_cps * top.r_i_cps * tau;
  const double pair_top = std::max(top.r_si_cps - acc_top, 1e-6);
  p.h3_s = clamp(top.r_i_cps > 0.0 ? pair_top / top.r_i_cps : 0.1, 1e-6, 1.0 - 1e-9);
  p.h3_i = clamp(top.r_s_cps > 0.0 ? pair_top / top.r_s_cps : 0.1, 1e-6, 1.0 - 1e-9);

  // B1 from least squares of accidental-corrected coincidences against P^2.
  double num = 0.0, den = 0.0;
  for (const CountRatePoint& q : pts) {
    const double y = q.r_si_cps - q.r_s_cps * q.r_i_cps * tau;
    const double x = q.p_avg_mw * q.p_avg_mw;
    num += y * x;
    den += x * x;
  }
  const double c_si = den > 0.0 ? num / den : 0.0;  // ~ h3_s h3_i B1 (cts)
  p.b1_mcts = std::max(c_si / (p.h3_s * p.h3_i * counts_per_mcts), 1e-9);

  // Linear noise from the singles after removing the pair and dark terms.
  auto beta_estimate = [&](double h, double dc, auto rate_of) {
    double bn = 0.0, bd = 0.0;
    for (const CountRatePoint& q : pts) {
      const double pair = p.b1_mcts * counts_per_mcts * q.p_avg_mw * q.p_avg_mw;
      const double resid = rate_of(q) - dc - h * pair;
      bn += resid * q.p_avg_mw;
      bd += h * q.p_avg_mw * q.p_avg_mw;
    }
    return std::max(bd > 0.0 ? bn / bd : 0.0, 1e-6);
  };
  p.beta_s = options.fix_beta
                 ? 0.0
                 : beta_estimate(p.h3_s, p.r_dc_s,
                                 [](const CountRatePoint& q) { return q.r_s_cps; });
  p.beta_i = options.fix_beta
                 ? 0.0
                 : beta_estimate(p.h3_i, p.r_dc_i,
                                 [](const CountRatePoint& q) { return q.r_i_cps; });
  return p;
}

/// Exact weighted linear least squares for the parameters the model is
/// linear in (per arm: h*beta and the dark rate), holding b1 and h fixed.
/// Escapes the log-space trap where a linear term initialized near zero has
/// a vanishing gradient and can never climb back.
inline void refresh_linear_params(const ValidatedSeries& series,
                                  const FitOptions& options, RateModelParams& p) {
  const double T = options.integration_time_s;
  auto solve_arm = [&](double h, auto rate_of, double& beta, double& dark) {
    // Normal equations for min sum w*(r - h*b*P^2 - x*P - y)^2 over x,y.
    double spp = 0.0, sp1 = 0.0, s11 = 0.0, spr = 0.0, s1r = 0.0;
    for (const CountRatePoint& q : series.points()) {
      const double obs = rate_of(q);
      const double w = T * T / std::max(obs * T, 1.0);  // 1/Var(rate)
      const double pair = p.b1_mcts * counts_per_mcts * q.p_avg_mw * q.p_avg_mw;
      const double resid = obs - h * pair;
      spp += w * q.p_avg_mw * q.p_avg_mw;
      sp1 += w * q.p_avg_mw;
      s11 += w;
      spr += w * q.p_avg_mw * resid;
      s1r += w * resid;
    }
    const double det = spp * s11 - sp1 * sp1;
    double x = 0.0, y = 0.0;
    if (det > 0.0) {
      x = (spr * s11 - s1r * sp1) / det;
      y = (spp * s1r - sp1 * spr) / det;
    }
    // Non-negativity: drop a clamped variable and re-solve the other.
    if (x < 0.0 && y < 0.0) {
      x = y = 0.0;
    } else if (x < 0.0) {
      x = 0.0;
      y = std::max(s1r / s11, 0.0);
    } else if (y < 0.0) {
      y = 0.0;
      x = std::max(spr / spp, 0.0);
    }
    beta = options.fix_beta ? 0.0 : std::max(x / h, 1e-12);
    dark = options.fix_dark ? 0.0 : std::max(y, 1e-12);
  };
  solve_arm(p.h3_s, [](const CountRatePoint& q) { return q.r_s_cps; }, p.beta_s,
            p.r_dc_s);
  solve_arm(p.h3_i, [](const CountRatePoint& q) { return q.r_i_cps; }, p.beta_i,
            p.r_dc_i);
}

/// Covariance from the physical-space Jacobian at the optimum. A
/// rank-deficient normal matrix raises DegenerateFitError naming the
/// parameters aligned with its null directions.
inline void fill_covariance(const Eigen::MatrixXd& jac_physical,
                            const std::vector<int>& free_idx, FitResult& result) {
  const int nf = static_cast<int>(free_idx.size());
  Eigen::MatrixXd jf(jac_physical.rows(), nf);
  for (int c = 0; c < nf; ++c) jf.col(c) = jac_physical.col(free_idx[c]);

  const Eigen::MatrixXd normal = jf.transpose() * jf;

  // Rank-check the correlation-scaled matrix so disparate parameter scales
  // do not masquerade as degeneracy. A vanished diagonal means that column
  // of the Jacobian is numerically zero.
  Eigen::VectorXd scale(nf);
  std::vector<std::string> bad;
  const double diag_max = normal.diagonal().maxCoeff();
  for (int c = 0; c < nf; ++c) {
    if (!(normal(c, c) > diag_max * 1e-28)) {
      bad.push_back(rate_param_names()[free_idx[c]]);
      scale[c] = 0.0;
    } else {
      scale[c] = 1.0 / std::sqrt(normal(c, c));
    }
  }

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es;
  if (bad.empty()) {
    const Eigen::MatrixXd scaled =
        scale.asDiagonal() * normal * scale.asDiagonal();
    es.compute(scaled);
    if (es.info() != Eigen::Success)
      throw NumericalError("eigendecomposition of the fit normal matrix failed");
    const double floor = 1e-12;
    for (int e = 0; e < nf; ++e) {
      if (es.eigenvalues()[e] > floor) continue;
      for (int c = 0; c < nf; ++c)
        if (std::abs(es.eigenvectors()(c, e)) > 0.3)
          bad.push_back(rate_param_names()[free_idx[c]]);
    }
    std::sort(bad.begin(), bad.end());
    bad.erase(std::unique(bad.begin(), bad.end()), bad.end());
  }
  if (!bad.empty()) {
    std::string msg = "singular Jacobian; unidentifiable parameters:";
    for (const std::string& b : bad) msg += " " + b;
    throw DegenerateFitError(msg, bad);
  }

  const Eigen::MatrixXd inv_scaled =
      es.eigenvectors() * es.eigenvalues().cwiseInverse().asDiagonal() *
      es.eigenvectors().transpose();
  const Eigen::MatrixXd cov =
      scale.asDiagonal() * inv_scaled * scale.asDiagonal();
  for (int a = 0; a < nf; ++a)
    for (int b = 0; b < nf; ++b)
      result.covariance[free_idx[a]][free_idx[b]] = cov(a, b);
  for (int k = 0; k < n_params; ++k)
    result.standard_errors[k] = std::sqrt(std::max(result.covariance[k][k], 0.0));
}

}  // namespace detail_fit

/// Joint weighted least-squares fit of the rate model to a validated power
/// sweep, over all three observables at every power. Damped Gauss-Newton
/// steps with adaptive damping; bounds are enforced through the log/logit
/// parameterization rather than constraints.
inline FitResult fit_rates(const ValidatedSeries& series, const FitOptions& options = {}) {
  using namespace detail_fit;

  Transform tf;
  tf.free = {true, true, true, !options.fix_beta, !options.fix_beta,
             !options.fix_dark, !options.fix_dark};
  const std::vector<int> free_idx = tf.free_indices();
  const int nf = tf.count_free();

  RateModelParams current = initial_guess(series, options);
  Eigen::VectorXd u = tf.to_internal(current);
  current = tf.to_physical(u);

  Evaluation ev = evaluate(series, current, options.integration_time_s);

  auto internal_jacobian = [&](const Evaluation& e, const RateModelParams& p) {
    const Eigen::VectorXd scale = tf.jacobian_scale(p);
    Eigen::MatrixXd j(e.jac_physical.rows(), nf);
    for (int c = 0; c < nf; ++c)
      j.col(c) = e.jac_physical.col(free_idx[c]) * scale[c];
    return j;
  };

  Eigen::MatrixXd jac = internal_jacobian(ev, current);
  Eigen::VectorXd gradient = jac.transpose() * ev.residuals;
  const double gradient_scale = std::max(1.0, gradient.lpNorm<Eigen::Infinity>());
  auto scaled_gradient_norm = [&](const Eigen::VectorXd& g) {
    return g.lpNorm<Eigen::Infinity>() / gradient_scale;
  };

  int iteration = 0;
  auto minimize = [&]() {
    double lambda = 1e-3;
    double nu = 2.0;
    while (scaled_gradient_norm(gradient) >= options.gradient_tol &&
           iteration < options.max_iterations) {
      ++iteration;
      const Eigen::MatrixXd normal = jac.transpose() * jac;
      Eigen::MatrixXd damped = normal;
      for (int d = 0; d < nf; ++d)
        damped(d, d) += lambda * std::max(normal(d, d), 1e-12);

      const Eigen::VectorXd step = damped.ldlt().solve(-gradient);
      if (!step.allFinite()) {
        lambda *= nu;
        nu *= 2.0;
        if (lambda > 1e15) return;
        continue;
      }

      const Eigen::VectorXd u_trial = u + step;
      const RateModelParams trial = tf.to_physical(u_trial);
      Evaluation ev_trial = evaluate(series, trial, options.integration_time_s);

      // Gain ratio against the quadratic model 0.5*||r + J step||^2.
      const double model_reduction =
          -step.dot(gradient) - 0.5 * (jac * step).squaredNorm();
      const double actual_reduction = ev.cost - ev_trial.cost;

      if (std::isfinite(ev_trial.cost) && actual_reduction > 0.0) {
        const double rho =
            model_reduction > 0.0 ? actual_reduction / model_reduction : 1.0;
        u = u_trial;
        current = trial;
        ev = std::move(ev_trial);
        jac = internal_jacobian(ev, current);
        gradient = jac.transpose() * ev.residuals;
        lambda *= std::max(1.0 / 3.0, 1.0 - std::pow(2.0 * rho - 1.0, 3));
        lambda = std::max(lambda, 1e-12);
        nu = 2.0;
        if (step.norm() <= options.step_tol * (u.norm() + options.step_tol)) return;
      } else {
        lambda *= nu;
        nu *= 2.0;
        if (lambda > 1e15) return;
      }
    }
  };

  // Alternate full minimization with an exact linear-subproblem refresh of
  // the beta/dark terms; a second round only runs when the refresh actually
  // found a lower cost.
  minimize();
  for (int round = 0; round < 3; ++round) {
    RateModelParams refreshed = current;
    refresh_linear_params(series, options, refreshed);
    const Evaluation ev_ref = evaluate(series, refreshed, options.integration_time_s);
    if (!(ev_ref.cost < ev.cost * (1.0 - 1e-12))) break;
    u = tf.to_internal(refreshed);
    current = tf.to_physical(u);
    ev = evaluate(series, current, options.integration_time_s);
    jac = internal_jacobian(ev, current);
    gradient = jac.transpose() * ev.residuals;
    minimize();
  }

  FitResult result;
  result.params = current;
  result.residual_norm = ev.residuals.norm();
  result.iterations = iteration;
  result.gradient_norm = scaled_gradient_norm(gradient);
  result.converged = result.gradient_norm < options.gradient_tol;
  fill_covariance(ev.jac_physical, free_idx, result);
  return result;
}

}  // namespace pairbench
