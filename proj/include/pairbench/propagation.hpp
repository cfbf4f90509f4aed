#pragma once

#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include "pairbench/core.hpp"
#include "pairbench/detail/csv.hpp"
#include "pairbench/errors.hpp"

namespace pairbench {

/// Per-path efficiency ledger between the three measurement locations.
/// ring_escape covers generation -> post-source (1 for waveguide sources);
/// path and detector efficiencies cover post-source -> detector per arm.
struct LossBudget {
  double ring_escape = 1.0;
  double path_s = 1.0;
  double path_i = 1.0;
  double detector_s = 1.0;
  double detector_i = 1.0;

  void validate() const {
    for (double f : {ring_escape, path_s, path_i, detector_s, detector_i})
      if (!(f > 0.0) || f > 1.0 || !std::isfinite(f))
        throw DomainError("loss-budget fractions must lie in (0,1]");
  }

  double arm_s() const { return path_s * detector_s; }
  double arm_i() const { return path_i * detector_i; }
};

enum class ParameterKind { Brightness, HeraldingEfficiency };

/// A brightness or heralding efficiency together with the location it is
/// defined at.
struct LocatedValue {
  Quantity value;
  MeasurementLocation location = MeasurementLocation::Generation;
  ParameterKind kind = ParameterKind::Brightness;

  void validate() const {
    if (!value.valid()) throw DomainError("located value is not a valid quantity");
    if (kind == ParameterKind::HeraldingEfficiency &&
        (!(value.value > 0.0) || value.value > 1.0))
      throw DomainError("heralding efficiency must lie in (0,1]");
  }
};

struct ForwardBrightness {
  Quantity b2;
  Quantity b3;
};

/// Forward propagation of intrinsic brightness. Both photons of a pair must
/// escape the ring, so ring_escape enters squared; each arm's transmittance
/// then enters once per photon.
inline ForwardBrightness forward_brightness(const Quantity& b1,
                                            const LossBudget& budget) {
  budget.validate();
  if (b1.value < 0.0) throw DomainError("brightness must be >= 0");
  ForwardBrightness out;
  out.b2 = b1.scaled(budget.ring_escape * budget.ring_escape);
  out.b3 = out.b2.scaled(budget.arm_s() * budget.arm_i());
  return out;
}

/// Back propagation from the detector-level brightness to the post-source
/// value, dividing out both arms' transmittances.
inline Quantity back_propagate_brightness(const Quantity& b3,
                                          const LossBudget& budget) {
  budget.validate();
  if (b3.value < 0.0) throw DomainError("brightness must be >= 0");
  return b3.scaled(1.0 / (budget.arm_s() * budget.arm_i()));
}

/// Source-corrected heralding efficiency from the detector-level one: divide
/// out the heralded arm's transmittance. A result above 1 means the loss
/// ledger is inconsistent with the measurement and raises an error.
inline double heralding_correct(double h3, double arm_transmittance) {
  if (!(h3 > 0.0) || h3 > 1.0) throw DomainError("H3 must lie in (0,1]");
  if (!(arm_transmittance > 0.0) || arm_transmittance > 1.0)
    throw DomainError("arm transmittance must lie in (0,1]");
  const double h2 = h3 / arm_transmittance;
  if (h2 > 1.0)
    throw InconsistentBudgetError(
        "corrected heralding efficiency " + detail::format_double(h2) +
            " exceeds 1; the loss budget understates the arm transmittance",
        h2);
  return h2;
}

// ---------------------------------------------------------------------------
// Consistency reporting
// ---------------------------------------------------------------------------

/// The propagation-relevant slice of a source record: any subset of the
/// brightnesses and heralding efficiencies may be present. Efficiencies are
/// fractions, brightness in Mcts s^-1 mW^-2.
struct ParameterSet {
  std::optional<Quantity> b1, b2, b3;
  std::optional<Quantity> h2, h3;
};

struct DerivedValue {
  std::string parameter;  // e.g. "b2"
  Quantity value;
  std::string route;      // how it was derived
};

struct Conflict {
  std::string parameter;
  Quantity reported;
  Quantity derived;
  std::string route;
  double threshold = 0.0;  // absolute tolerance that was exceeded
};

struct ConsistencyReport {
  std::vector<DerivedValue> derived;
  std::vector<Conflict> conflicts;
  std::vector<std::string> notes;  // e.g. underdetermined record

  bool consistent() const { return conflicts.empty(); }
};

namespace detail_prop {

/// Effective one-sigma spread for conflict checks: the reported error when
/// present, otherwise 10% relative for approximate values and 5% for bare
/// ones.
inline double effective_sigma(const Quantity& q) {
  if (q.uncertainty > 0.0) return q.uncertainty;
  return (q.approximate ? 0.10 : 0.05) * std::abs(q.value);
}

inline void compare_or_record(const std::string& name,
                              const std::optional<Quantity>& reported,
                              const Quantity& derived, const std::string& route,
                              ConsistencyReport& report) {
  if (!reported) {
    report.derived.push_back({name, derived, route});
    return;
  }
  const double sa = effective_sigma(*reported);
  const double sb = effective_sigma(derived);
  const double threshold = 2.0 * std::sqrt(sa * sa + sb * sb);
  if (std::abs(reported->value - derived.value) > threshold)
    report.conflicts.push_back({name, *reported, derived, route, threshold});
}

/// Relative uncertainty helper for products/ratios of independent values.
inline double combine_rel(double ra, double rb) {
  return std::sqrt(ra * ra + rb * rb);
}

inline double rel(const Quantity& q) {
  return q.value != 0.0 ? q.uncertainty / std::abs(q.value) : 0.0;
}

}  // namespace detail_prop

/// Cross-checks a record's brightnesses and heralding efficiencies against a
/// loss budget (or, failing that, against the arm transmittance implied by
/// its own H3/H2 ratio). Derivable blanks are filled; contradictions beyond
/// the combined tolerance are flagged, never resolved.
inline ConsistencyReport consistency_report(const ParameterSet& params,
                                            const std::optional<LossBudget>& budget = {}) {
  using namespace detail_prop;
  ConsistencyReport report;

  const bool any_b = params.b1 || params.b2 || params.b3;
  const bool any_h = params.h2 || params.h3;
  if (!any_b && !any_h) {
    report.notes.push_back("underdetermined: no brightness or heralding values");
    return report;
  }

  // Arm transmittances, either from the explicit budget or implied by the
  // record's own H3/H2 ratio (applied to both arms).
  std::optional<double> t_s, t_i;
  double t_rel = 0.0;  // relative uncertainty on the implied transmittance
  bool t_from_ratio = false;
  if (budget) {
    budget->validate();
    t_s = budget->arm_s();
    t_i = budget->arm_i();
  } else if (params.h2 && params.h3 && params.h2->value > 0.0) {
    const double t = params.h3->value / params.h2->value;
    if (t > 0.0 && t <= 1.0) {
      t_s = t;
      t_i = t;
      t_rel = combine_rel(rel(*params.h2), rel(*params.h3));
      t_from_ratio = true;
      report.notes.push_back("arm transmittance " + detail::format_double(t) +
                             " implied by H3/H2, applied to both arms");
    }
  }

  // Brightness chain: back-propagate B3, forward-propagate B1.
  if (t_s && t_i) {
    if (params.b3) {
      Quantity b2 = params.b3->scaled(1.0 / (*t_s * *t_i));
      const double r = combine_rel(rel(*params.b3), 2.0 * t_rel);
      b2.uncertainty = std::abs(b2.value) * r;
      compare_or_record("b2", params.b2, b2, "back-propagated from b3", report);
    }
    if (params.b2) {
      Quantity b3 = params.b2->scaled(*t_s * *t_i);
      const double r = combine_rel(rel(*params.b2), 2.0 * t_rel);
      b3.uncertainty = std::abs(b3.value) * r;
      compare_or_record("b3", params.b3, b3, "forward-propagated from b2", report);
    }
  }
  if (budget) {
    if (params.b1) {
      const ForwardBrightness fwd = forward_brightness(*params.b1, *budget);
      compare_or_record("b2", params.b2, fwd.b2, "forward-propagated from b1", report);
      compare_or_record("b3", params.b3, fwd.b3, "forward-propagated from b1", report);
    }
    // Heralding chain only makes sense against an external budget; the
    // implied-ratio route would be circular.
    if (params.h3) {
      Quantity h2 = params.h3->scaled(1.0 / budget->arm_s());
      compare_or_record("h2", params.h2, h2, "corrected h3 through signal arm", report);
    } else if (params.h2) {
      Quantity h3 = params.h2->scaled(budget->arm_s());
      compare_or_record("h3", params.h3, h3, "projected h2 through signal arm", report);
    }
  }

  if (!t_s && !budget) {
    if (any_b && !(params.b1 && params.b2))
      report.notes.push_back(
          "underdetermined: no loss budget and no H3/H2 pair to imply one");
  }
  if (t_from_ratio && !params.b3 && !params.b2)
    report.notes.push_back("underdetermined: transmittance known but no b2/b3 to link");

  return report;
}

// ---------------------------------------------------------------------------
// Budget JSON field helper (linear fraction or dB form)
// ---------------------------------------------------------------------------

/// Budgets may specify each field either as a linear fraction (key "path_s")
/// or as a loss in dB (key "path_s_db"); this converts the dB form.
inline double budget_field_from_db(double loss_db) { return db_to_transmittance(loss_db); }

}  // namespace pairbench
