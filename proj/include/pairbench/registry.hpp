#pragma once

#include <algorithm>
#include <cmath>
#include <map>
#include <optional>
#include <ostream>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "pairbench/core.hpp"
#include "pairbench/detail/csv.hpp"
#include "pairbench/errors.hpp"
#include "pairbench/propagation.hpp"

namespace pairbench {

enum class Platform { Si, SiC, SiN, AlGaAs, USRN, Other };
enum class Architecture { ICR, PMICR, MRR, CMRR, MMW, SMW, MD, Other };

/// Machine-readable footnote semantics from published comparison tables.
enum class NoteFlag {
  RsiAtDetectors,       // coincidence rate quoted at the detectors, not on-chip
  CwPump,               // CW rather than pulsed pump laser
  PumpPowerOffChip,     // average pump power measured off-chip
  B1EqualsB2Assumed,    // waveguide source: B1 and B2 reported as equal
  HAveragedOverArms,    // heralding efficiencies averaged over signal/idler
  PurityViaG2,          // spectral purity from unheralded g2, not the JSI
  B1AveragedOverSources // B1 averaged over multiple devices
};

inline const std::vector<std::pair<NoteFlag, const char*>>& note_flag_names() {
  static const std::vector<std::pair<NoteFlag, const char*>> names = {
      {NoteFlag::RsiAtDetectors, "r_si_at_detectors"},
      {NoteFlag::CwPump, "cw_pump"},
      {NoteFlag::PumpPowerOffChip, "pump_power_off_chip"},
      {NoteFlag::B1EqualsB2Assumed, "b1_equals_b2_assumed"},
      {NoteFlag::HAveragedOverArms, "h_averaged_over_arms"},
      {NoteFlag::PurityViaG2, "purity_via_g2"},
      {NoteFlag::B1AveragedOverSources, "b1_averaged_over_sources"}};
  return names;
}

/// Normalized per-source parameter record: one published source, its
/// reported parameters in canonical units, and the footnote caveats as data.
struct SourceRecord {
  std::string citation_key;
  int year = 0;
  Platform platform = Platform::Other;
  std::string platform_name;  // set for Platform::Other
  Architecture architecture = Architecture::Other;
  std::string architecture_name;  // set for Architecture::Other
  PumpRegime regime;

  std::optional<Quantity> car;              // dimensionless
  std::optional<Quantity> r_si;             // cts/s canonical
  MeasurementLocation r_si_location = MeasurementLocation::PostSource;
  std::optional<Quantity> purity_spectral;  // fraction canonical
  std::optional<Quantity> purity_number;    // fraction canonical; metadata only
  std::optional<Quantity> h2;               // fraction canonical
  std::optional<Quantity> h3;               // fraction canonical
  std::optional<Quantity> b1;               // Mcts/s/mW^2 canonical
  std::optional<Quantity> b2;
  std::optional<Quantity> b3;

  std::vector<NoteFlag> notes;
  std::string comment;
  std::vector<std::string> provenance;  // ingestion decisions, e.g. inferred regime

  bool has_note(NoteFlag f) const {
    return std::find(notes.begin(), notes.end(), f) != notes.end();
  }

  /// Record identity covers the data fields; ingestion provenance is
  /// bookkeeping and does not participate.
  bool operator==(const SourceRecord& o) const {
    return citation_key == o.citation_key && year == o.year &&
           platform == o.platform && platform_name == o.platform_name &&
           architecture == o.architecture &&
           architecture_name == o.architecture_name && regime == o.regime &&
           car == o.car && r_si == o.r_si && r_si_location == o.r_si_location &&
           purity_spectral == o.purity_spectral && purity_number == o.purity_number &&
           h2 == o.h2 && h3 == o.h3 && b1 == o.b1 && b2 == o.b2 && b3 == o.b3 &&
           notes == o.notes && comment == o.comment;
  }
};

/// Parameters that can be compared, plotted, or reported on.
enum class Parameter { Car, RSi, PuritySpectral, PurityNumber, H2, H3, B1, B2, B3 };

inline const char* to_string(Parameter p) {
  switch (p) {
    case Parameter::Car: return "car";
    case Parameter::RSi: return "r_si";
    case Parameter::PuritySpectral: return "purity_spectral";
    case Parameter::PurityNumber: return "purity_number";
    case Parameter::H2: return "h2";
    case Parameter::H3: return "h3";
    case Parameter::B1: return "b1";
    case Parameter::B2: return "b2";
    case Parameter::B3: return "b3";
  }
  return "?";
}

inline const std::vector<Parameter>& all_parameters() {
  static const std::vector<Parameter> all = {
      Parameter::Car, Parameter::RSi,  Parameter::PuritySpectral,
      Parameter::PurityNumber, Parameter::H2, Parameter::H3,
      Parameter::B1,  Parameter::B2,  Parameter::B3};
  return all;
}

/// Parameters with comparison/timeline semantics. Photon-number purity is
/// stored as metadata only, and the raw coincidence rate is tied to a
/// location rather than being a source figure of merit.
inline const std::vector<Parameter>& analytic_parameters() {
  static const std::vector<Parameter> some = {
      Parameter::Car, Parameter::PuritySpectral, Parameter::H2, Parameter::H3,
      Parameter::B1,  Parameter::B2,  Parameter::B3};
  return some;
}

inline std::optional<Parameter> parameter_from_string(const std::string& s) {
  for (Parameter p : all_parameters())
    if (s == to_string(p)) return p;
  return std::nullopt;
}

inline const std::optional<Quantity>& parameter_of(const SourceRecord& r, Parameter p) {
  switch (p) {
    case Parameter::Car: return r.car;
    case Parameter::RSi: return r.r_si;
    case Parameter::PuritySpectral: return r.purity_spectral;
    case Parameter::PurityNumber: return r.purity_number;
    case Parameter::H2: return r.h2;
    case Parameter::H3: return r.h3;
    case Parameter::B1: return r.b1;
    case Parameter::B2: return r.b2;
    case Parameter::B3: return r.b3;
  }
  static const std::optional<Quantity> none;
  return none;
}

inline bool is_brightness(Parameter p) {
  return p == Parameter::B1 || p == Parameter::B2 || p == Parameter::B3;
}

inline bool is_fractional(Parameter p) {
  return p == Parameter::PuritySpectral || p == Parameter::PurityNumber ||
         p == Parameter::H2 || p == Parameter::H3;
}

// ---------------------------------------------------------------------------
// Ingestion
// ---------------------------------------------------------------------------

struct IngestViolation {
  std::string field;
  std::string reason;
};

struct IngestResult {
  std::optional<SourceRecord> record;
  std::vector<IngestViolation> violations;

  bool ok() const { return violations.empty(); }
};

namespace detail_registry {

using json = nlohmann::json;

inline std::optional<double> unit_factor(Parameter p, const std::string& unit) {
  if (is_fractional(p)) {
    if (unit == "percent" || unit == "%") return 0.01;
    if (unit == "fraction") return 1.0;
    return std::nullopt;
  }
  if (is_brightness(p)) {
    if (unit == "mcts/s/mw^2") return 1.0;
    if (unit == "cts/s/mw^2") return 1e-6;
    return std::nullopt;
  }
  if (p == Parameter::RSi) {
    if (unit == "cts/s") return 1.0;
    if (unit == "kcts/s") return 1e3;
    if (unit == "mcts/s") return 1e6;
    return std::nullopt;
  }
  // CAR
  if (unit.empty() || unit == "dimensionless") return 1.0;
  return std::nullopt;
}

inline Unit canonical_unit(Parameter p) {
  if (is_brightness(p)) return Unit::MctsPerSecPerMilliwattSq;
  if (p == Parameter::RSi) return Unit::CountsPerSec;
  return Unit::Dimensionless;
}

inline std::string canonical_unit_string(Parameter p) {
  if (is_brightness(p)) return "mcts/s/mw^2";
  if (p == Parameter::RSi) return "cts/s";
  if (is_fractional(p)) return "fraction";
  return "dimensionless";
}

inline std::optional<Quantity> parse_quantity(const json& doc, Parameter p,
                                              std::vector<IngestViolation>& violations) {
  const std::string field = to_string(p);
  if (!doc.contains(field)) return std::nullopt;
  const json& q = doc.at(field);
  if (!q.is_object() || !q.contains("value") || !q.at("value").is_number()) {
    violations.push_back({field, "quantity must be an object with a numeric 'value'"});
    return std::nullopt;
  }
  const double raw = q.at("value").get<double>();
  double unc = 0.0;
  if (q.contains("uncertainty")) {
    if (!q.at("uncertainty").is_number()) {
      violations.push_back({field, "uncertainty must be numeric"});
      return std::nullopt;
    }
    unc = q.at("uncertainty").get<double>();
  }
  const std::string unit = q.value("unit", std::string{});
  const std::optional<double> factor = unit_factor(p, unit);
  if (!factor) {
    violations.push_back({field, "unsupported unit '" + unit + "'"});
    return std::nullopt;
  }

  Quantity out;
  out.value = raw * *factor;
  out.uncertainty = unc * *factor;
  out.unit = canonical_unit(p);
  out.approximate = q.value("approximate", false);

  if (!out.valid() || unc < 0.0) {
    violations.push_back({field, "value/uncertainty must be finite, uncertainty >= 0"});
    return std::nullopt;
  }
  if (is_fractional(p) && (out.value <= 0.0 || out.value > 1.0))
    violations.push_back({field, "efficiency out of range (0,100]%"});
  else if (!is_fractional(p) && out.value < 0.0)
    violations.push_back({field, "must be non-negative"});
  return out;
}

inline Platform platform_from_string(const std::string& s) {
  if (s == "Si") return Platform::Si;
  if (s == "SiC") return Platform::SiC;
  if (s == "SiN") return Platform::SiN;
  if (s == "AlGaAs") return Platform::AlGaAs;
  if (s == "USRN") return Platform::USRN;
  return Platform::Other;
}

inline std::string platform_to_string(Platform p, const std::string& other) {
  switch (p) {
    case Platform::Si: return "Si";
    case Platform::SiC: return "SiC";
    case Platform::SiN: return "SiN";
    case Platform::AlGaAs: return "AlGaAs";
    case Platform::USRN: return "USRN";
    case Platform::Other: return other;
  }
  return other;
}

inline Architecture architecture_from_string(const std::string& s) {
  if (s == "ICR") return Architecture::ICR;
  if (s == "PMICR") return Architecture::PMICR;
  if (s == "MRR") return Architecture::MRR;
  if (s == "CMRR") return Architecture::CMRR;
  if (s == "MMW") return Architecture::MMW;
  if (s == "SMW") return Architecture::SMW;
  if (s == "MD") return Architecture::MD;
  return Architecture::Other;
}

inline std::string architecture_to_string(Architecture a, const std::string& other) {
  switch (a) {
    case Architecture::ICR: return "ICR";
    case Architecture::PMICR: return "PMICR";
    case Architecture::MRR: return "MRR";
    case Architecture::CMRR: return "CMRR";
    case Architecture::MMW: return "MMW";
    case Architecture::SMW: return "SMW";
    case Architecture::MD: return "MD";
    case Architecture::Other: return other;
  }
  return other;
}

}  // namespace detail_registry

/// Earliest pair source on record; anything before this is a transcription
/// error.
inline constexpr int earliest_source_year = 1946;

/// Parses and unit-canonicalizes one source-record document. Violations name
/// the field and reason; a record is only produced when none occurred.
inline IngestResult ingest_record(const nlohmann::json& doc) {
  using namespace detail_registry;
  IngestResult result;
  auto& violations = result.violations;

  if (!doc.is_object()) {
    violations.push_back({"", "record must be a JSON object"});
    return result;
  }
  if (doc.contains("h1"))
    violations.push_back(
        {"h1", "intrinsic heralding efficiency is 100% by definition; not storable"});

  SourceRecord rec;
  if (!doc.contains("citation_key") || !doc.at("citation_key").is_string() ||
      doc.at("citation_key").get<std::string>().empty())
    violations.push_back({"citation_key", "required non-empty string"});
  else
    rec.citation_key = doc.at("citation_key").get<std::string>();

  if (!doc.contains("year") || !doc.at("year").is_number_integer())
    violations.push_back({"year", "required integer"});
  else {
    rec.year = doc.at("year").get<int>();
    if (rec.year < earliest_source_year)
      violations.push_back({"year", "before " + std::to_string(earliest_source_year)});
  }

  if (doc.contains("platform") && doc.at("platform").is_string()) {
    const std::string s = doc.at("platform").get<std::string>();
    rec.platform = platform_from_string(s);
    if (rec.platform == Platform::Other) rec.platform_name = s;
  } else {
    violations.push_back({"platform", "required string"});
  }

  if (doc.contains("architecture") && doc.at("architecture").is_string()) {
    const std::string s = doc.at("architecture").get<std::string>();
    rec.architecture = architecture_from_string(s);
    if (rec.architecture == Architecture::Other) rec.architecture_name = s;
  } else {
    violations.push_back({"architecture", "required string"});
  }

  for (const auto& [flag, name] : note_flag_names())
    if (doc.contains("notes"))
      for (const auto& n : doc.at("notes"))
        if (n.is_string() && n.get<std::string>() == name) rec.notes.push_back(flag);
  rec.comment = doc.value("comment", std::string{});

  if (doc.contains("regime")) {
    const auto& rg = doc.at("regime");
    std::string kind;
    if (rg.is_string())
      kind = rg.get<std::string>();
    else if (rg.is_object())
      kind = rg.value("kind", std::string{});
    if (kind == "cw")
      rec.regime = PumpRegime::cw();
    else if (kind == "pulsed") {
      rec.regime = PumpRegime::pulsed();
      if (rg.is_object()) {
        if (rg.contains("repetition_rate_hz"))
          rec.regime.repetition_rate_hz = rg.at("repetition_rate_hz").get<double>();
        if (rg.contains("linewidth_hz"))
          rec.regime.linewidth_hz = rg.at("linewidth_hz").get<double>();
      }
      if (!rec.regime.valid())
        violations.push_back({"regime", "pulsed parameters must be > 0"});
    } else {
      violations.push_back({"regime", "kind must be 'pulsed' or 'cw'"});
    }
  } else if (rec.has_note(NoteFlag::CwPump)) {
    rec.regime = PumpRegime::cw();
    rec.provenance.push_back("regime set to cw from the cw_pump footnote");
  } else {
    rec.regime = PumpRegime::pulsed();
    rec.provenance.push_back("regime defaulted to pulsed (no regime given, no CW footnote)");
  }

  rec.car = parse_quantity(doc, Parameter::Car, violations);
  rec.r_si = parse_quantity(doc, Parameter::RSi, violations);
  rec.purity_spectral = parse_quantity(doc, Parameter::PuritySpectral, violations);
  rec.purity_number = parse_quantity(doc, Parameter::PurityNumber, violations);
  rec.h2 = parse_quantity(doc, Parameter::H2, violations);
  rec.h3 = parse_quantity(doc, Parameter::H3, violations);
  rec.b1 = parse_quantity(doc, Parameter::B1, violations);
  rec.b2 = parse_quantity(doc, Parameter::B2, violations);
  rec.b3 = parse_quantity(doc, Parameter::B3, violations);

  if (rec.r_si) {
    std::string loc = "post_source";
    if (doc.at("r_si").contains("location"))
      loc = doc.at("r_si").at("location").get<std::string>();
    else if (rec.has_note(NoteFlag::RsiAtDetectors))
      loc = "detector";
    if (loc == "post_source")
      rec.r_si_location = MeasurementLocation::PostSource;
    else if (loc == "detector")
      rec.r_si_location = MeasurementLocation::Detector;
    else
      violations.push_back({"r_si", "location must be 'post_source' or 'detector'"});
  }

  if (violations.empty()) result.record = std::move(rec);
  return result;
}

/// Serializes a record back to its document form (canonical units).
/// ingest_record(serialize_record(r)) reproduces r exactly.
inline nlohmann::ordered_json serialize_record(const SourceRecord& rec) {
  using namespace detail_registry;
  nlohmann::ordered_json doc;
  doc["citation_key"] = rec.citation_key;
  doc["year"] = rec.year;
  doc["platform"] = platform_to_string(rec.platform, rec.platform_name);
  doc["architecture"] = architecture_to_string(rec.architecture, rec.architecture_name);

  nlohmann::ordered_json rg;
  rg["kind"] = rec.regime.kind == PumpKind::CW ? "cw" : "pulsed";
  if (rec.regime.repetition_rate_hz) rg["repetition_rate_hz"] = *rec.regime.repetition_rate_hz;
  if (rec.regime.linewidth_hz) rg["linewidth_hz"] = *rec.regime.linewidth_hz;
  doc["regime"] = rg;

  auto put = [&doc, &rec](Parameter p) {
    const std::optional<Quantity>& q = parameter_of(rec, p);
    if (!q) return;
    nlohmann::ordered_json j;
    j["value"] = q->value;
    if (q->uncertainty != 0.0) j["uncertainty"] = q->uncertainty;
    j["unit"] = canonical_unit_string(p);
    if (q->approximate) j["approximate"] = true;
    if (p == Parameter::RSi) j["location"] = to_string(rec.r_si_location);
    doc[to_string(p)] = j;
  };
  for (Parameter p : all_parameters()) put(p);

  if (!rec.notes.empty()) {
    auto arr = nlohmann::ordered_json::array();
    for (NoteFlag f : rec.notes)
      for (const auto& [flag, name] : note_flag_names())
        if (flag == f) arr.push_back(name);
    doc["notes"] = arr;
  }
  if (!rec.comment.empty()) doc["comment"] = rec.comment;
  return doc;
}

// ---------------------------------------------------------------------------
// Comparison
// ---------------------------------------------------------------------------

struct ComparisonRow {
  SourceRecord record;
  std::optional<double> key_value;  // canonical units
};

struct RegimeWarning {
  std::string citation_a;  // CW side
  std::string citation_b;  // pulsed side
  Parameter parameter = Parameter::B1;
};

struct Gap {
  std::string citation_key;
  Parameter parameter = Parameter::B1;
};

/// Sorted projection of the registry plus the bookkeeping the published
/// tables leave implicit: which cells are gaps, and which ranked pairs mix
/// pump regimes.
struct ComparisonTable {
  Parameter sort_key = Parameter::B1;
  std::vector<ComparisonRow> rows;
  std::vector<Gap> gaps;
  std::vector<RegimeWarning> regime_warnings;
};

/// Ranks records by a parameter (descending; records without it follow,
/// newest first). Brightness rankings that span CW and pulsed pumps get one
/// warning per offending pair, since the regimes are not comparable.
inline ComparisonTable compare(const std::vector<SourceRecord>& records,
                               Parameter sort_key,
                               std::optional<PumpKind> regime_filter = {}) {
  if (records.empty()) throw DomainError("compare needs at least one record");
  const auto& allowed = analytic_parameters();
  if (std::find(allowed.begin(), allowed.end(), sort_key) == allowed.end())
    throw DomainError(std::string("cannot sort by ") + to_string(sort_key));

  ComparisonTable table;
  table.sort_key = sort_key;

  for (const SourceRecord& r : records) {
    if (regime_filter && r.regime.kind != *regime_filter) continue;
    ComparisonRow row{r, {}};
    if (const auto& q = parameter_of(r, sort_key)) row.key_value = q->value;
    table.rows.push_back(std::move(row));
  }
  if (table.rows.empty()) throw DomainError("no records match the regime filter");

  std::stable_sort(table.rows.begin(), table.rows.end(),
                   [](const ComparisonRow& a, const ComparisonRow& b) {
                     if (a.key_value.has_value() != b.key_value.has_value())
                       return a.key_value.has_value();
                     if (a.key_value && b.key_value && *a.key_value != *b.key_value)
                       return *a.key_value > *b.key_value;
                     if (a.record.year != b.record.year)
                       return a.record.year > b.record.year;
                     return a.record.citation_key < b.record.citation_key;
                   });

  for (const ComparisonRow& row : table.rows)
    for (Parameter p : all_parameters())
      if (!parameter_of(row.record, p))
        table.gaps.push_back({row.record.citation_key, p});

  if (is_brightness(sort_key)) {
    for (std::size_t a = 0; a < table.rows.size(); ++a) {
      if (!table.rows[a].key_value) continue;
      for (std::size_t b = a + 1; b < table.rows.size(); ++b) {
        if (!table.rows[b].key_value) continue;
        const auto ka = table.rows[a].record.regime.kind;
        const auto kb = table.rows[b].record.regime.kind;
        if (ka == kb) continue;
        const auto& cw = ka == PumpKind::CW ? table.rows[a] : table.rows[b];
        const auto& pulsed = ka == PumpKind::CW ? table.rows[b] : table.rows[a];
        table.regime_warnings.push_back(
            {cw.record.citation_key, pulsed.record.citation_key, sort_key});
      }
    }
  }
  return table;
}

/// Renders a comparison table as plot-ready CSV (display units: percent for
/// purities and efficiencies, Mcts/s for coincidence rates). Gaps print as
/// empty cells.
inline void write_comparison_csv(std::ostream& out, const ComparisonTable& table) {
  out << "citation_key,year,platform,architecture,regime,car,r_si_mcts_per_s,"
         "purity_spectral_pct,purity_number_pct,h2_pct,h3_pct,b1_mcts,b2_mcts,b3_mcts\n";
  for (const ComparisonRow& row : table.rows) {
    const SourceRecord& r = row.record;
    auto cell = [](const std::optional<Quantity>& q, double factor) {
      return q ? detail::format_double(q->value * factor) : std::string{};
    };
    out << r.citation_key << ',' << r.year << ','
        << detail_registry::platform_to_string(r.platform, r.platform_name) << ','
        << detail_registry::architecture_to_string(r.architecture, r.architecture_name)
        << ',' << (r.regime.kind == PumpKind::CW ? "cw" : "pulsed") << ','
        << cell(r.car, 1.0) << ',' << cell(r.r_si, 1e-6) << ','
        << cell(r.purity_spectral, 100.0) << ',' << cell(r.purity_number, 100.0) << ','
        << cell(r.h2, 100.0) << ',' << cell(r.h3, 100.0) << ',' << cell(r.b1, 1.0)
        << ',' << cell(r.b2, 1.0) << ',' << cell(r.b3, 1.0) << "\n";
  }
}

// ---------------------------------------------------------------------------
// Completeness and timelines
// ---------------------------------------------------------------------------

struct YearBucket {
  int year = 0;
  int reported = 0;
  int total = 0;

  double rate() const { return total ? static_cast<double>(reported) / total : 0.0; }
};

struct ParameterCompleteness {
  Parameter parameter = Parameter::B1;
  std::vector<YearBucket> by_year;  // ascending year
  int reported = 0;
  int total = 0;

  double rate() const { return total ? static_cast<double>(reported) / total : 0.0; }
};

/// Reporting rate of every parameter, per publication year and overall.
inline std::vector<ParameterCompleteness> completeness_report(
    const std::vector<SourceRecord>& records) {
  if (records.empty()) throw DomainError("completeness_report needs at least one record");
  std::vector<ParameterCompleteness> report;
  for (Parameter p : all_parameters()) {
    ParameterCompleteness pc;
    pc.parameter = p;
    std::map<int, YearBucket> buckets;
    for (const SourceRecord& r : records) {
      YearBucket& b = buckets[r.year];
      b.year = r.year;
      ++b.total;
      ++pc.total;
      if (parameter_of(r, p)) {
        ++b.reported;
        ++pc.reported;
      }
    }
    for (const auto& [year, bucket] : buckets) pc.by_year.push_back(bucket);
    report.push_back(std::move(pc));
  }
  return report;
}

struct TimelinePoint {
  int year = 0;
  double value = 0.0;        // display units (percent for fractional kinds)
  double uncertainty = 0.0;
  bool approximate = false;
  std::string citation_key;
};

/// Chronological series of one parameter across the registry, in the units
/// the published figures use. Records lacking the parameter are omitted.
inline std::vector<TimelinePoint> timeline_export(
    const std::vector<SourceRecord>& records, Parameter parameter) {
  const auto& allowed = analytic_parameters();
  if (std::find(allowed.begin(), allowed.end(), parameter) == allowed.end())
    throw DomainError(std::string("no timeline for ") + to_string(parameter));

  const double factor = is_fractional(parameter) ? 100.0 : 1.0;
  std::vector<TimelinePoint> series;
  for (const SourceRecord& r : records) {
    const auto& q = parameter_of(r, parameter);
    if (!q) continue;
    series.push_back({r.year, q->value * factor, q->uncertainty * factor,
                      q->approximate, r.citation_key});
  }
  std::sort(series.begin(), series.end(), [](const TimelinePoint& a, const TimelinePoint& b) {
    if (a.year != b.year) return a.year < b.year;
    return a.citation_key < b.citation_key;
  });
  return series;
}

inline void write_timeline_csv(std::ostream& out, Parameter parameter,
                               const std::vector<TimelinePoint>& series) {
  out << "year,citation_key," << to_string(parameter) << ",uncertainty,approximate\n";
  for (const TimelinePoint& p : series)
    out << p.year << ',' << p.citation_key << ',' << detail::format_double(p.value)
        << ',' << detail::format_double(p.uncertainty) << ','
        << (p.approximate ? "1" : "0") << "\n";
}

/// Propagation-facing view of a record (fractions/Mcts canonical already).
inline ParameterSet to_parameter_set(const SourceRecord& r) {
  ParameterSet ps;
  ps.b1 = r.b1;
  ps.b2 = r.b2;
  ps.b3 = r.b3;
  ps.h2 = r.h2;
  ps.h3 = r.h3;
  return ps;
}

}  // namespace pairbench
