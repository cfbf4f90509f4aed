#pragma once

#include <cmath>
#include <cstddef>
#include <istream>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "pairbench/detail/csv.hpp"
#include "pairbench/detail/numeric.hpp"
#include "pairbench/errors.hpp"

namespace pairbench {

/// Where in the system a brightness or heralding efficiency is defined.
/// Ordering reflects monotone photon loss along the optical path: values can
/// only decrease from Generation to Detector.
enum class MeasurementLocation : int {
  Generation = 1,   // inside the pair-generation region (intrinsic)
  PostSource = 2,   // just after the generation region, source losses applied
  Detector = 3,     // raw values recorded by the detectors
};

inline const char* to_string(MeasurementLocation loc) {
  switch (loc) {
    case MeasurementLocation::Generation: return "generation";
    case MeasurementLocation::PostSource: return "post_source";
    case MeasurementLocation::Detector: return "detector";
  }
  return "?";
}

/// The intrinsic heralding efficiency at the generation region is 1 by
/// definition; it is not a measurable parameter and is never stored.
inline constexpr double intrinsic_heralding_efficiency() { return 1.0; }

// ---------------------------------------------------------------------------
// Pump regime
// ---------------------------------------------------------------------------

enum class PumpKind { CW, Pulsed };

/// Pump laser regime. Pulsed pumps may carry repetition rate and linewidth
/// when known; both must be strictly positive when present. Brightness values
/// are never directly comparable across regimes.
struct PumpRegime {
  PumpKind kind = PumpKind::CW;
  std::optional<double> repetition_rate_hz;  // Pulsed only
  std::optional<double> linewidth_hz;        // Pulsed only

  static PumpRegime cw() { return {}; }
  static PumpRegime pulsed() { return {PumpKind::Pulsed, {}, {}}; }
  static PumpRegime pulsed(double rep_rate_hz, double lw_hz) {
    return {PumpKind::Pulsed, rep_rate_hz, lw_hz};
  }

  bool valid() const {
    if (kind == PumpKind::CW) return !repetition_rate_hz && !linewidth_hz;
    if (repetition_rate_hz && !(*repetition_rate_hz > 0.0)) return false;
    if (linewidth_hz && !(*linewidth_hz > 0.0)) return false;
    return true;
  }

  bool operator==(const PumpRegime&) const = default;
};

// ---------------------------------------------------------------------------
// Quantities and units
// ---------------------------------------------------------------------------

enum class Unit {
  MctsPerSecPerMilliwattSq,  // brightness, canonical
  Percent,                   // efficiencies/purities as reported
  CountsPerSec,              // count rates, canonical
  Milliwatt,                 // pump powers
  Seconds,                   // coincidence windows, integration times
  Dimensionless,             // efficiencies/purities as fractions, CAR
};

inline const char* to_string(Unit u) {
  switch (u) {
    case Unit::MctsPerSecPerMilliwattSq: return "mcts/s/mw^2";
    case Unit::Percent: return "percent";
    case Unit::CountsPerSec: return "cts/s";
    case Unit::Milliwatt: return "mw";
    case Unit::Seconds: return "s";
    case Unit::Dimensionless: return "dimensionless";
  }
  return "?";
}

/// A measured value with its one-sigma uncertainty. Sources that report no
/// error default to uncertainty 0; values printed as "~"/"approximately" in
/// the literature carry the approximate flag instead of an invented error bar.
struct Quantity {
  double value = 0.0;
  double uncertainty = 0.0;
  Unit unit = Unit::Dimensionless;
  bool approximate = false;

  bool valid() const {
    return std::isfinite(value) && std::isfinite(uncertainty) && uncertainty >= 0.0;
  }

  Quantity scaled(double factor) const {
    return {value * factor, uncertainty * std::abs(factor), unit, approximate};
  }

  bool operator==(const Quantity&) const = default;
};

/// Internal canonical form: efficiencies live as fractions, not percent.
/// Every other unit is already canonical.
inline Quantity canonicalize(const Quantity& q) {
  if (q.unit == Unit::Percent) {
    Quantity out = q.scaled(0.01);
    out.unit = Unit::Dimensionless;
    return out;
  }
  return q;
}

/// Renders a canonical quantity in the requested display unit. Inverse of
/// canonicalize for every supported unit.
inline Quantity render(const Quantity& q, Unit as_unit) {
  if (q.unit == as_unit) return q;
  if (q.unit == Unit::Dimensionless && as_unit == Unit::Percent) {
    Quantity out = q.scaled(100.0);
    out.unit = Unit::Percent;
    return out;
  }
  if (q.unit == Unit::Percent && as_unit == Unit::Dimensionless) return canonicalize(q);
  throw DomainError(std::string("no rendering from ") + to_string(q.unit) + " to " +
                    to_string(as_unit));
}

// ---------------------------------------------------------------------------
// Loss/transmittance conversion
// ---------------------------------------------------------------------------

/// Converts an attenuation in dB (>= 0) to a power transmittance in (0, 1].
inline double db_to_transmittance(double loss_db) {
  if (!std::isfinite(loss_db) || loss_db < 0.0)
    throw DomainError("loss must be finite and >= 0 dB, got " +
                      detail::format_double(loss_db));
  return std::pow(10.0, -loss_db / 10.0);
}

// ---------------------------------------------------------------------------
// Count-rate series
// ---------------------------------------------------------------------------

/// One row of a pump-power sweep: singles and coincidence rates at a given
/// average pump power.
struct CountRatePoint {
  double p_avg_mw = 0.0;   // average pump power
  double r_s_cps = 0.0;    // signal singles rate
  double r_i_cps = 0.0;    // idler singles rate
  double r_si_cps = 0.0;   // coincidence rate
};

/// Measured singles/coincidence rates versus average pump power, together
/// with the coincidence-window width used to histogram them.
struct CountRateSeries {
  std::vector<CountRatePoint> points;
  double tau_s = 0.0;  // coincidence-window width
  PumpRegime regime;
};

/// Minimum sweep length: the joint fit has 7 free parameters across three
/// coupled curves, so 4 powers x 3 observables = 12 values is the floor.
inline constexpr std::size_t min_series_points = 4;

struct Violation {
  std::string rule;
  std::optional<std::size_t> point_index;

  std::string describe() const {
    if (point_index) return rule + " at index " + std::to_string(*point_index);
    return rule;
  }
};

struct ValidationResult;

/// A CountRateSeries that has passed every structural invariant. Only
/// validate_series can mint one, so downstream code (the fitter) can rely on
/// the invariants without re-checking.
class ValidatedSeries {
 public:
  const CountRateSeries& series() const { return series_; }
  const std::vector<CountRatePoint>& points() const { return series_.points; }
  double tau_s() const { return series_.tau_s; }
  const PumpRegime& regime() const { return series_.regime; }

 private:
  explicit ValidatedSeries(CountRateSeries s) : series_(std::move(s)) {}
  friend ValidationResult validate_series(CountRateSeries series);

  CountRateSeries series_;
};

struct ValidationResult {
  std::optional<ValidatedSeries> series;
  std::vector<Violation> violations;

  bool ok() const { return violations.empty(); }
};

/// Checks every CountRateSeries invariant. Violations are returned as data,
/// one entry per broken rule with the offending point index where applicable.
inline ValidationResult validate_series(CountRateSeries series) {
  ValidationResult result;
  auto add = [&result](std::string rule, std::optional<std::size_t> idx = {}) {
    result.violations.push_back({std::move(rule), idx});
  };

  if (series.points.size() < min_series_points)
    add("minimum " + std::to_string(min_series_points) + " points");
  if (!(series.tau_s > 0.0) || !std::isfinite(series.tau_s))
    add("coincidence window tau must be > 0");
  if (!series.regime.valid()) add("pulsed regime parameters must be > 0 when given");

  for (std::size_t i = 0; i < series.points.size(); ++i) {
    const CountRatePoint& p = series.points[i];
    if (!std::isfinite(p.p_avg_mw) || !std::isfinite(p.r_s_cps) ||
        !std::isfinite(p.r_i_cps) || !std::isfinite(p.r_si_cps)) {
      add("non-finite value", i);
      continue;
    }
    if (!(p.p_avg_mw > 0.0)) add("powers must be strictly positive", i);
    if (i > 0 && !(p.p_avg_mw > series.points[i - 1].p_avg_mw))
      add("powers not strictly increasing", i);
    if (p.r_s_cps < 0.0 || p.r_i_cps < 0.0 || p.r_si_cps < 0.0)
      add("rates must be non-negative", i);
  }

  if (result.violations.empty()) result.series = ValidatedSeries(std::move(series));
  return result;
}

// ---------------------------------------------------------------------------
// CSV ingestion
// ---------------------------------------------------------------------------

inline constexpr const char* series_csv_header = "p_avg_mw,r_s_cps,r_i_cps,r_si_cps";

/// Reads a power sweep from CSV with the exact header
/// `p_avg_mw,r_s_cps,r_i_cps,r_si_cps`. The coincidence window and pump
/// regime are not part of the CSV; callers supply them (sidecar JSON or CLI
/// flags) before validation.
inline CountRateSeries read_series_csv(std::istream& in, double tau_s,
                                       PumpRegime regime = PumpRegime::cw()) {
  CountRateSeries series;
  series.tau_s = tau_s;
  series.regime = regime;

  std::string line;
  if (!std::getline(in, line)) throw DomainError("empty series CSV");
  {
    auto fields = detail::split_csv_line(line);
    std::string header;
    for (std::size_t i = 0; i < fields.size(); ++i)
      header += (i ? "," : "") + detail::trim(fields[i]);
    if (header != series_csv_header)
      throw DomainError("series CSV header must be '" +
                        std::string(series_csv_header) + "', got '" + header + "'");
  }

  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (detail::trim(line).empty()) continue;
    auto fields = detail::split_csv_line(line);
    if (fields.size() != 4)
      throw DomainError("series CSV line " + std::to_string(lineno) +
                        " has " + std::to_string(fields.size()) + " fields, expected 4");
    const std::string ctx = "series CSV line " + std::to_string(lineno);
    series.points.push_back({detail::parse_double(fields[0], ctx),
                             detail::parse_double(fields[1], ctx),
                             detail::parse_double(fields[2], ctx),
                             detail::parse_double(fields[3], ctx)});
  }
  return series;
}

inline void write_series_csv(std::ostream& out, const CountRateSeries& series) {
  out << series_csv_header << "\n";
  for (const CountRatePoint& p : series.points)
    out << detail::format_double(p.p_avg_mw) << ',' << detail::format_double(p.r_s_cps)
        << ',' << detail::format_double(p.r_i_cps) << ','
        << detail::format_double(p.r_si_cps) << "\n";
}

}  // namespace pairbench
