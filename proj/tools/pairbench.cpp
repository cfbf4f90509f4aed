// pairbench -- command-line front end for the HSPS characterization library.
//
// Subcommands: fit, schmidt, pumpsim, propagate, db. All compute happens in
// the headers under include/pairbench; this file is argument handling and
// file I/O only. Exit codes: 0 success, 1 data-validation failure, 2 usage
// error.

#include <CLI11.hpp>
#include <json.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "pairbench/pairbench.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using nlohmann::ordered_json;

namespace {

constexpr int exit_ok = 0;
constexpr int exit_data_error = 1;
constexpr int exit_usage_error = 2;

/// Thrown for problems the user can fix by changing arguments or paths.
struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::ifstream open_input(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw UsageError("cannot open input file: " + path);
  return in;
}

json load_json(const std::string& path) {
  std::ifstream in = open_input(path);
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw pairbench::DomainError("invalid JSON in " + path + ": " + e.what());
  }
}

void write_text(const std::string& path, const std::string& text) {
  if (path == "-") {
    std::cout << text;
    return;
  }
  std::ofstream out(path);
  if (!out) throw UsageError("cannot open output file: " + path);
  out << text;
}

std::string dump(const ordered_json& doc) { return doc.dump(2) + "\n"; }

ordered_json quantity_json(const pairbench::Quantity& q) {
  ordered_json j;
  j["value"] = q.value;
  j["uncertainty"] = q.uncertainty;
  j["unit"] = pairbench::to_string(q.unit);
  if (q.approximate) j["approximate"] = true;
  return j;
}

// ---------------------------------------------------------------------------
// fit
// ---------------------------------------------------------------------------

struct FitArgs {
  std::string series_path;
  std::string meta_path;
  std::string out_path = "fit.json";
  double tau_s = 0.0;
  std::string regime = "cw";
  double rep_rate_hz = 0.0;
  double linewidth_hz = 0.0;
  pairbench::FitOptions options;
};

pairbench::PumpRegime parse_regime(const std::string& kind, double rep_rate_hz,
                                   double linewidth_hz) {
  if (kind == "cw") return pairbench::PumpRegime::cw();
  if (kind != "pulsed") throw UsageError("regime must be 'cw' or 'pulsed'");
  if (rep_rate_hz > 0.0 && linewidth_hz > 0.0)
    return pairbench::PumpRegime::pulsed(rep_rate_hz, linewidth_hz);
  return pairbench::PumpRegime::pulsed();
}

int run_fit(const FitArgs& args) {
  using namespace pairbench;

  double tau_s = args.tau_s;
  std::string regime_kind = args.regime;
  double rep_rate = args.rep_rate_hz;
  double linewidth = args.linewidth_hz;
  if (!args.meta_path.empty()) {
    const json meta = load_json(args.meta_path);
    if (meta.contains("tau_s")) tau_s = meta.at("tau_s").get<double>();
    if (meta.contains("regime")) {
      const auto& rg = meta.at("regime");
      regime_kind = rg.is_string() ? rg.get<std::string>()
                                   : rg.value("kind", regime_kind);
      if (rg.is_object()) {
        rep_rate = rg.value("repetition_rate_hz", rep_rate);
        linewidth = rg.value("linewidth_hz", linewidth);
      }
    }
  }
  if (!(tau_s > 0.0))
    throw UsageError("coincidence window required: --tau or sidecar tau_s");

  std::ifstream in = open_input(args.series_path);
  const CountRateSeries series =
      read_series_csv(in, tau_s, parse_regime(regime_kind, rep_rate, linewidth));

  ValidationResult validated = validate_series(series);
  if (!validated.ok()) {
    std::cerr << "series failed validation:\n";
    for (const Violation& v : validated.violations)
      std::cerr << "  - " << v.describe() << "\n";
    return exit_data_error;
  }

  const FitResult fit = fit_rates(*validated.series, args.options);

  ordered_json out;
  ordered_json params;
  const auto& names = rate_param_names();
  const RateModelParams& p = fit.params;
  const double values[7] = {p.b1_mcts, p.h3_s, p.h3_i, p.beta_s,
                            p.beta_i,  p.r_dc_s, p.r_dc_i};
  for (int k = 0; k < 7; ++k) params[names[k]] = values[k];
  out["params"] = params;
  ordered_json errors;
  for (int k = 0; k < 7; ++k) errors[names[k]] = fit.standard_errors[k];
  out["standard_errors"] = errors;
  ordered_json cov = ordered_json::array();
  for (int r = 0; r < 7; ++r) {
    ordered_json row = ordered_json::array();
    for (int c = 0; c < 7; ++c) row.push_back(fit.covariance[r][c]);
    cov.push_back(row);
  }
  out["covariance"] = cov;
  out["residual_norm"] = fit.residual_norm;
  out["iterations"] = fit.iterations;
  out["converged"] = fit.converged;
  out["gradient_norm"] = fit.gradient_norm;
  out["tau_s"] = tau_s;
  out["n_points"] = series.points.size();

  write_text(args.out_path, dump(out));
  return exit_ok;
}

// ---------------------------------------------------------------------------
// schmidt
// ---------------------------------------------------------------------------

pairbench::JointSpectrum read_jsi_csv(std::istream& in) {
  using pairbench::detail::parse_double;
  using pairbench::detail::split_csv_line;
  pairbench::JointSpectrum jsi;
  std::string line;
  if (!std::getline(in, line)) throw pairbench::DomainError("empty JSI CSV");
  auto head = split_csv_line(line);
  if (head.size() < 2) throw pairbench::DomainError("JSI CSV header needs axis values");
  for (std::size_t c = 1; c < head.size(); ++c)
    jsi.omega_i.push_back(parse_double(head[c], "JSI header"));

  std::vector<std::vector<double>> rows;
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (pairbench::detail::trim(line).empty()) continue;
    auto fields = split_csv_line(line);
    if (fields.size() != head.size())
      throw pairbench::DomainError("JSI CSV line " + std::to_string(lineno) +
                                   " width mismatch");
    const std::string ctx = "JSI CSV line " + std::to_string(lineno);
    jsi.omega_s.push_back(parse_double(fields[0], ctx));
    std::vector<double> row;
    for (std::size_t c = 1; c < fields.size(); ++c)
      row.push_back(parse_double(fields[c], ctx));
    rows.push_back(std::move(row));
  }
  jsi.intensity.resize(static_cast<Eigen::Index>(rows.size()),
                       static_cast<Eigen::Index>(jsi.omega_i.size()));
  for (std::size_t r = 0; r < rows.size(); ++r)
    for (std::size_t c = 0; c < rows[r].size(); ++c)
      jsi.intensity(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) =
          rows[r][c];
  return jsi;
}

pairbench::JointSpectrum read_jsi_json(const json& doc) {
  pairbench::JointSpectrum jsi;
  jsi.omega_s = doc.at("omega_s").get<std::vector<double>>();
  jsi.omega_i = doc.at("omega_i").get<std::vector<double>>();
  const auto& rows = doc.at("intensity");
  jsi.intensity.resize(static_cast<Eigen::Index>(jsi.omega_s.size()),
                       static_cast<Eigen::Index>(jsi.omega_i.size()));
  if (rows.size() != jsi.omega_s.size())
    throw pairbench::DomainError("intensity row count does not match omega_s");
  for (std::size_t r = 0; r < rows.size(); ++r) {
    if (rows[r].size() != jsi.omega_i.size())
      throw pairbench::DomainError("intensity column count does not match omega_i");
    for (std::size_t c = 0; c < jsi.omega_i.size(); ++c)
      jsi.intensity(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) =
          rows[r][c].get<double>();
  }
  return jsi;
}

struct SchmidtArgs {
  std::string jsi_csv_path;
  std::string jsi_json_path;
  std::string out_path = "-";
  double b_total = -1.0;
  double b_uncertainty = 0.0;
};

int run_schmidt(const SchmidtArgs& args) {
  using namespace pairbench;
  if (args.jsi_csv_path.empty() == args.jsi_json_path.empty())
    throw UsageError("provide exactly one of --jsi (CSV) or --jsi-json");

  JointSpectrum jsi;
  if (!args.jsi_csv_path.empty()) {
    std::ifstream in = open_input(args.jsi_csv_path);
    jsi = read_jsi_csv(in);
  } else {
    jsi = read_jsi_json(load_json(args.jsi_json_path));
  }

  const JointAmplitude amp = amplitude_from_intensity(jsi);
  const SchmidtDecomposition d = schmidt_decompose(amp);

  ordered_json out;
  out["lambdas"] = d.lambdas;
  out["spectral_purity"] = spectral_purity(d);
  out["mode_count"] = d.mode_count;
  out["fundamental_weight"] = d.fundamental_weight;
  if (args.b_total >= 0.0) {
    const Quantity b{args.b_total, args.b_uncertainty,
                     Unit::MctsPerSecPerMilliwattSq, false};
    out["useful_brightness"] = quantity_json(useful_brightness(b, d));
  }
  write_text(args.out_path, dump(out));
  return exit_ok;
}

// ---------------------------------------------------------------------------
// pumpsim
// ---------------------------------------------------------------------------

struct PumpSimArgs {
  double pump_center = 1.2153e15;  // ~1550 nm, rad/s
  double pump_fwhm = 0.0;
  double ring_fwhm = 0.0;
  double ring_center = -1.0;  // default: pump center
  double extinction = 0.0;
  double rep_rate_hz = 80e6;
  double pulse_energy_j = 1e-12;
  double b1_mcts = 1.0;
  std::size_t points = 4096;
  double max_power_mw = 1.0;
  int power_steps = 10;
  std::string emit = "csv";
  std::string out_prefix = "pumpsim";
};

int run_pumpsim(const PumpSimArgs& args) {
  using namespace pairbench;
  using pairbench::detail::format_double;

  if (args.emit != "csv") throw UsageError("--emit supports only 'csv'");
  if (!(args.pump_fwhm > 0.0)) throw UsageError("--pump-fwhm must be > 0");
  if (!(args.ring_fwhm > 0.0)) throw UsageError("--ring-fwhm must be > 0");

  const double ring_center =
      args.ring_center > 0.0 ? args.ring_center : args.pump_center;
  const RingTransmission ring{ring_center, args.ring_fwhm, args.extinction};
  const PumpGridSpec grid{args.points, 16.0 * args.pump_fwhm};

  // Two pulsed pumps at equal peak spectral density: the half-linewidth pump
  // carries half the pulse energy.
  const SpectralProfile wg_full =
      pump_spectrum(args.pump_center, args.pump_fwhm, grid);
  const SpectralProfile wg_half =
      pump_spectrum(args.pump_center, 0.5 * args.pump_fwhm, grid);
  const SpectralProfile ic_full = intracavity_spectrum(wg_full, ring);
  const SpectralProfile ic_half = intracavity_spectrum(wg_half, ring);
  const double energy_full = args.pulse_energy_j;
  const double energy_half = 0.5 * args.pulse_energy_j;

  // Fig 4a dataset: spectral densities and the ring transmission.
  {
    std::ostringstream csv;
    csv << "omega_rad_s,wg_full,wg_half,ic_full,ic_half,ring_transmission\n";
    for (std::size_t k = 0; k < wg_full.omega.size(); ++k) {
      const double w = wg_full.omega[k];
      csv << format_double(w) << ',' << format_double(std::norm(wg_full.field[k]) * energy_full)
          << ',' << format_double(std::norm(wg_half.field[k]) * energy_half) << ','
          << format_double(std::norm(ic_full.field[k]) * energy_full) << ','
          << format_double(std::norm(ic_half.field[k]) * energy_half) << ','
          << format_double(ring.transmission(w)) << "\n";
    }
    write_text(args.out_prefix + "_spectra.csv", csv.str());
  }

  // Fig 4b dataset: temporal powers and the average powers they imply.
  const TemporalProfile t_wg_full = temporal_profile(wg_full);
  const TemporalProfile t_wg_half = temporal_profile(wg_half);
  const TemporalProfile t_ic_full = temporal_profile(ic_full);
  const TemporalProfile t_ic_half = temporal_profile(ic_half);
  {
    std::ostringstream csv;
    csv << "# p_avg_mw: wg_full="
        << format_double(average_power_mw(t_wg_full, args.rep_rate_hz, energy_full))
        << " wg_half="
        << format_double(average_power_mw(t_wg_half, args.rep_rate_hz, energy_half))
        << " ic_full="
        << format_double(average_power_mw(t_ic_full, args.rep_rate_hz, energy_full))
        << " ic_half="
        << format_double(average_power_mw(t_ic_half, args.rep_rate_hz, energy_half))
        << "\n";
    csv << "time_s,wg_full,wg_half,ic_full,ic_half\n";
    for (std::size_t k = 0; k < t_wg_full.time.size(); ++k)
      csv << format_double(t_wg_full.time[k]) << ','
          << format_double(t_wg_full.power[k] * energy_full) << ','
          << format_double(t_wg_half.power[k] * energy_half) << ','
          << format_double(t_ic_full.power[k] * energy_full) << ','
          << format_double(t_ic_half.power[k] * energy_half) << "\n";
    write_text(args.out_prefix + "_temporal.csv", csv.str());
  }

  // Fig 4c dataset: R_si against squared average power under both references.
  {
    std::vector<double> powers;
    for (int s = 1; s <= args.power_steps; ++s)
      powers.push_back(args.max_power_mw * s / args.power_steps);

    std::ostringstream csv;
    csv << "reference,pump,p_avg_sq_mw2,r_si_cps\n";
    auto emit_curve = [&](const char* ref_name, PowerReference ref,
                          const char* pump_name, double fwhm, double scale) {
      PumpSimConfig config{args.pump_center, fwhm, ring, grid};
      std::vector<double> scaled;
      for (double p : powers) scaled.push_back(p * scale);
      for (const CoincidencePoint& pt :
           simulate_coincidence_curve(args.b1_mcts, config, scaled, ref))
        csv << ref_name << ',' << pump_name << ',' << format_double(pt.p_avg_sq_mw2)
            << ',' << format_double(pt.r_si_cps) << "\n";
    };
    // Half-linewidth pump at equal peak density delivers half the waveguide
    // power at each step.
    emit_curve("waveguide", PowerReference::Waveguide, "full", args.pump_fwhm, 1.0);
    emit_curve("waveguide", PowerReference::Waveguide, "half", 0.5 * args.pump_fwhm, 0.5);
    emit_curve("intracavity", PowerReference::Intracavity, "full", args.pump_fwhm, 1.0);
    emit_curve("intracavity", PowerReference::Intracavity, "half", 0.5 * args.pump_fwhm, 0.5);
    write_text(args.out_prefix + "_curves.csv", csv.str());
  }
  return exit_ok;
}

// ---------------------------------------------------------------------------
// propagate
// ---------------------------------------------------------------------------

double budget_field(const json& doc, const std::string& name, double fallback) {
  const bool linear = doc.contains(name);
  const bool db = doc.contains(name + "_db");
  if (linear && db)
    throw pairbench::DomainError("budget gives both " + name + " and " + name + "_db");
  if (linear) return doc.at(name).get<double>();
  if (db) return pairbench::db_to_transmittance(doc.at(name + "_db").get<double>());
  return fallback;
}

pairbench::LossBudget parse_budget(const json& doc) {
  pairbench::LossBudget b;
  b.ring_escape = budget_field(doc, "ring_escape", 1.0);
  b.path_s = budget_field(doc, "path_s", 1.0);
  b.path_i = budget_field(doc, "path_i", 1.0);
  b.detector_s = budget_field(doc, "detector_s", 1.0);
  b.detector_i = budget_field(doc, "detector_i", 1.0);
  b.validate();
  return b;
}

struct PropagateArgs {
  std::string record_path;
  std::string budget_path;
  std::string out_path = "-";
};

int run_propagate(const PropagateArgs& args) {
  using namespace pairbench;

  const IngestResult ingested = ingest_record(load_json(args.record_path));
  if (!ingested.ok()) {
    std::cerr << "record failed validation:\n";
    for (const IngestViolation& v : ingested.violations)
      std::cerr << "  - " << v.field << ": " << v.reason << "\n";
    return exit_data_error;
  }

  std::optional<LossBudget> budget;
  if (!args.budget_path.empty()) budget = parse_budget(load_json(args.budget_path));

  const ConsistencyReport report =
      consistency_report(to_parameter_set(*ingested.record), budget);

  ordered_json out;
  out["citation_key"] = ingested.record->citation_key;
  out["consistent"] = report.consistent();
  ordered_json derived = ordered_json::array();
  for (const DerivedValue& d : report.derived) {
    ordered_json j;
    j["parameter"] = d.parameter;
    j["value"] = quantity_json(d.value);
    j["route"] = d.route;
    derived.push_back(j);
  }
  out["derived"] = derived;
  ordered_json conflicts = ordered_json::array();
  for (const Conflict& c : report.conflicts) {
    ordered_json j;
    j["parameter"] = c.parameter;
    j["reported"] = quantity_json(c.reported);
    j["derived"] = quantity_json(c.derived);
    j["route"] = c.route;
    j["threshold"] = c.threshold;
    conflicts.push_back(j);
  }
  out["conflicts"] = conflicts;
  out["notes"] = report.notes;
  write_text(args.out_path, dump(out));
  return exit_ok;
}

// ---------------------------------------------------------------------------
// db
// ---------------------------------------------------------------------------

struct DbArgs {
  std::string command;
  std::string dir;
  std::string sort_key = "b1";
  std::string regime;
  std::string parameter = "purity_spectral";
  std::string out_path = "-";
  std::string report_path;
};

std::vector<std::pair<std::string, pairbench::IngestResult>> load_record_dir(
    const std::string& dir) {
  if (!fs::is_directory(dir)) throw UsageError("not a directory: " + dir);
  std::vector<fs::path> files;
  for (const auto& entry : fs::directory_iterator(dir))
    if (entry.is_regular_file() && entry.path().extension() == ".json")
      files.push_back(entry.path());
  std::sort(files.begin(), files.end());
  if (files.empty()) throw UsageError("no .json records in " + dir);

  std::vector<std::pair<std::string, pairbench::IngestResult>> results;
  for (const fs::path& f : files)
    results.emplace_back(f.filename().string(), pairbench::ingest_record(load_json(f.string())));
  return results;
}

std::vector<pairbench::SourceRecord> require_valid_records(
    const std::vector<std::pair<std::string, pairbench::IngestResult>>& loaded) {
  std::vector<pairbench::SourceRecord> records;
  bool any_bad = false;
  for (const auto& [file, result] : loaded) {
    if (!result.ok()) {
      any_bad = true;
      std::cerr << file << ":\n";
      for (const auto& v : result.violations)
        std::cerr << "  - " << v.field << ": " << v.reason << "\n";
      continue;
    }
    records.push_back(*result.record);
  }
  if (any_bad) throw pairbench::DomainError("registry contains invalid records");
  return records;
}

pairbench::Parameter parse_parameter(const std::string& s) {
  const auto p = pairbench::parameter_from_string(s);
  if (!p) throw UsageError("unknown parameter '" + s + "'");
  return *p;
}

int run_db(const DbArgs& args) {
  using namespace pairbench;

  const auto loaded = load_record_dir(args.dir);

  if (args.command == "validate") {
    ordered_json out = ordered_json::array();
    bool all_ok = true;
    for (const auto& [file, result] : loaded) {
      ordered_json entry;
      entry["file"] = file;
      entry["ok"] = result.ok();
      ordered_json violations = ordered_json::array();
      for (const auto& v : result.violations) {
        ordered_json j;
        j["field"] = v.field;
        j["reason"] = v.reason;
        violations.push_back(j);
      }
      entry["violations"] = violations;
      if (result.ok() && !result.record->provenance.empty())
        entry["provenance"] = result.record->provenance;
      out.push_back(entry);
      all_ok = all_ok && result.ok();
    }
    write_text(args.out_path, dump(out));
    return all_ok ? exit_ok : exit_data_error;
  }

  const std::vector<SourceRecord> records = require_valid_records(loaded);

  if (args.command == "compare") {
    std::optional<PumpKind> filter;
    if (args.regime == "cw")
      filter = PumpKind::CW;
    else if (args.regime == "pulsed")
      filter = PumpKind::Pulsed;
    else if (!args.regime.empty())
      throw UsageError("--regime must be 'cw' or 'pulsed'");

    const ComparisonTable table = compare(records, parse_parameter(args.sort_key), filter);
    std::ostringstream csv;
    write_comparison_csv(csv, table);
    write_text(args.out_path, csv.str());

    if (!args.report_path.empty()) {
      ordered_json report;
      ordered_json gaps = ordered_json::array();
      for (const Gap& g : table.gaps) {
        ordered_json j;
        j["citation_key"] = g.citation_key;
        j["parameter"] = to_string(g.parameter);
        gaps.push_back(j);
      }
      report["gaps"] = gaps;
      ordered_json warnings = ordered_json::array();
      for (const RegimeWarning& w : table.regime_warnings) {
        ordered_json j;
        j["cw"] = w.citation_a;
        j["pulsed"] = w.citation_b;
        j["parameter"] = to_string(w.parameter);
        warnings.push_back(j);
      }
      report["regime_warnings"] = warnings;
      write_text(args.report_path, dump(report));
    }
    return exit_ok;
  }

  if (args.command == "timeline") {
    const Parameter p = parse_parameter(args.parameter);
    const auto series = timeline_export(records, p);
    std::ostringstream csv;
    write_timeline_csv(csv, p, series);
    write_text(args.out_path, csv.str());
    return exit_ok;
  }

  if (args.command == "gaps") {
    const auto report = completeness_report(records);
    ordered_json out = ordered_json::array();
    for (const ParameterCompleteness& pc : report) {
      ordered_json entry;
      entry["parameter"] = to_string(pc.parameter);
      entry["reported"] = pc.reported;
      entry["total"] = pc.total;
      entry["rate"] = pc.rate();
      ordered_json by_year = ordered_json::array();
      for (const YearBucket& b : pc.by_year) {
        ordered_json j;
        j["year"] = b.year;
        j["reported"] = b.reported;
        j["total"] = b.total;
        j["rate"] = b.rate();
        by_year.push_back(j);
      }
      entry["by_year"] = by_year;
      out.push_back(entry);
    }
    write_text(args.out_path, dump(out));
    return exit_ok;
  }

  throw UsageError("unknown db command '" + args.command + "'");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"pairbench: heralded single-photon source characterization toolkit"};
  app.set_version_flag("--version", std::string("pairbench ") + pairbench::version_string);
  app.require_subcommand(1);

  FitArgs fit_args;
  CLI::App* fit = app.add_subcommand("fit", "fit B1/H3 from a count-rate power sweep");
  fit->add_option("--series", fit_args.series_path, "CSV power sweep")->required();
  fit->add_option("--tau", fit_args.tau_s, "coincidence window width (s)");
  fit->add_option("--meta", fit_args.meta_path, "sidecar JSON with tau_s and regime");
  fit->add_option("--regime", fit_args.regime, "pump regime: cw or pulsed");
  fit->add_option("--rep-rate", fit_args.rep_rate_hz, "pulsed repetition rate (Hz)");
  fit->add_option("--linewidth", fit_args.linewidth_hz, "pulsed linewidth (Hz)");
  fit->add_option("--integration-time", fit_args.options.integration_time_s,
                  "integration time per point (s), sets Poisson weights");
  fit->add_option("--gradient-tol", fit_args.options.gradient_tol, "convergence tolerance");
  fit->add_option("--max-iterations", fit_args.options.max_iterations, "iteration cap");
  fit->add_flag("--fix-beta", fit_args.options.fix_beta, "constrain linear noise to 0");
  fit->add_flag("--fix-dark", fit_args.options.fix_dark, "constrain dark counts to 0");
  fit->add_option("--out", fit_args.out_path, "output JSON path ('-' for stdout)");

  SchmidtArgs schmidt_args;
  CLI::App* schmidt = app.add_subcommand("schmidt", "Schmidt-decompose a joint spectrum");
  schmidt->add_option("--jsi", schmidt_args.jsi_csv_path,
                      "JSI CSV grid (first row/column are the frequency axes)");
  schmidt->add_option("--jsi-json", schmidt_args.jsi_json_path,
                      "JSI JSON {omega_s, omega_i, intensity}");
  schmidt->add_option("--b-total", schmidt_args.b_total,
                      "total brightness (Mcts/s/mW^2) for useful-brightness output");
  schmidt->add_option("--b-uncertainty", schmidt_args.b_uncertainty,
                      "uncertainty on --b-total");
  schmidt->add_option("--out", schmidt_args.out_path, "output JSON path ('-' for stdout)");

  PumpSimArgs pump_args;
  CLI::App* pumpsim = app.add_subcommand(
      "pumpsim", "simulate pump spectra, ring overlap and coincidence curves");
  pumpsim->add_option("--pump-fwhm", pump_args.pump_fwhm, "pump |field|^2 FWHM (rad/s)")
      ->required();
  pumpsim->add_option("--ring-fwhm", pump_args.ring_fwhm, "ring linewidth FWHM (rad/s)")
      ->required();
  pumpsim->add_option("--pump-center", pump_args.pump_center, "pump center (rad/s)");
  pumpsim->add_option("--ring-center", pump_args.ring_center,
                      "ring resonance (rad/s); defaults to the pump center");
  pumpsim->add_option("--extinction", pump_args.extinction, "on-resonance transmission");
  pumpsim->add_option("--rep-rate", pump_args.rep_rate_hz, "repetition rate (Hz)");
  pumpsim->add_option("--pulse-energy", pump_args.pulse_energy_j,
                      "full-linewidth pulse energy (J)");
  pumpsim->add_option("--b1", pump_args.b1_mcts, "intrinsic brightness (Mcts/s/mW^2)");
  pumpsim->add_option("--points", pump_args.points, "grid points (radix-2 is fastest)");
  pumpsim->add_option("--max-power", pump_args.max_power_mw, "top waveguide power (mW)");
  pumpsim->add_option("--power-steps", pump_args.power_steps, "points per curve");
  pumpsim->add_option("--emit", pump_args.emit, "output format (csv)");
  pumpsim->add_option("--out-prefix", pump_args.out_prefix, "output file prefix");

  PropagateArgs prop_args;
  CLI::App* propagate = app.add_subcommand(
      "propagate", "fill and cross-check B/H values between measurement locations");
  propagate->add_option("--record", prop_args.record_path, "source record JSON")->required();
  propagate->add_option("--budget", prop_args.budget_path,
                        "loss budget JSON (fractions, or dB with _db suffix)");
  propagate->add_option("--out", prop_args.out_path, "output JSON path ('-' for stdout)");

  DbArgs db_args;
  CLI::App* db = app.add_subcommand("db", "registry of published source records");
  db->require_subcommand(1);
  CLI::App* db_validate = db->add_subcommand("validate", "check every record");
  CLI::App* db_compare = db->add_subcommand("compare", "ranked comparison table");
  CLI::App* db_timeline = db->add_subcommand("timeline", "parameter-over-time series");
  CLI::App* db_gaps = db->add_subcommand("gaps", "per-parameter reporting rates");
  for (CLI::App* sub : {db_validate, db_compare, db_timeline, db_gaps}) {
    sub->add_option("--dir", db_args.dir, "directory of record JSON files")->required();
    sub->add_option("--out", db_args.out_path, "output path ('-' for stdout)");
  }
  db_compare->add_option("--sort-key", db_args.sort_key, "parameter to rank by");
  db_compare->add_option("--regime", db_args.regime, "filter: cw or pulsed");
  db_compare->add_option("--report", db_args.report_path, "gaps/warnings JSON path");
  db_timeline->add_option("--parameter", db_args.parameter, "parameter to export");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);  // --help/--version
    app.exit(e);
    return exit_usage_error;
  }

  try {
    if (fit->parsed()) return run_fit(fit_args);
    if (schmidt->parsed()) return run_schmidt(schmidt_args);
    if (pumpsim->parsed()) return run_pumpsim(pump_args);
    if (propagate->parsed()) return run_propagate(prop_args);
    if (db->parsed()) {
      for (CLI::App* sub : {db_validate, db_compare, db_timeline, db_gaps})
        if (sub->parsed()) {
          db_args.command = sub->get_name();
          return run_db(db_args);
        }
    }
    throw UsageError("no subcommand given");
  } catch (const UsageError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return exit_usage_error;
  } catch (const pairbench::DegenerateFitError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return exit_data_error;
  } catch (const pairbench::InconsistentBudgetError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return exit_data_error;
  } catch (const pairbench::DomainError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return exit_data_error;
  } catch (const pairbench::NumericalError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return exit_data_error;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return exit_data_error;
  }
}
