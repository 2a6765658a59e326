#include "fvlab/report.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <set>
#include <stdexcept>

#include <json.hpp>

namespace fvlab {

namespace {

using nlohmann::json;

json entry_to_json(const ReportEntry& e) {
  json j;
  j["quantity"] = e.quantity;
  j["function"] = e.function;
  j["t"] = e.time;
  j["mean"] = e.mean;
  j["stderr"] = e.stderr_mean;
  j["replicas"] = e.replicas;
  if (e.has_target) {
    j["target"] = e.target;
    j["z"] = std::isfinite(e.z) ? json(e.z) : json("inf");
  }
  if (e.checked) j["pass"] = e.pass;
  return j;
}

json report_json(const ScalingReport& r) {
  json j;
  j["experiment-id"] = r.experiment_id;
  j["kind"] = r.kind;
  j["label"] = r.label;
  j["seed"] = r.seed;
  j["replicas"] = r.replicas;
  j["particles"] = r.n_particles;
  j["z-threshold"] = r.z_threshold;
  j["exploratory"] = r.exploratory;
  j["conditions"] = r.condition_notes;
  j["notes"] = r.notes;
  j["all-pass"] = r.all_pass();
  json entries = json::array();
  for (const ReportEntry& e : r.entries) entries.push_back(entry_to_json(e));
  j["entries"] = entries;
  return j;
}

}  // namespace

ConsolidatedReport summarize(std::vector<ScalingReport> reports) {
  std::set<std::string> ids;
  for (const ScalingReport& r : reports) {
    if (!ids.insert(r.experiment_id).second) {
      throw std::invalid_argument("summarize: duplicate experiment id '" + r.experiment_id + "'");
    }
  }
  ConsolidatedReport doc;
  doc.reports = std::move(reports);
  return doc;
}

std::string report_to_json(const ScalingReport& report) { return report_json(report).dump(2); }

std::string consolidated_to_json(const ConsolidatedReport& doc) {
  json j;
  j["experiments"] = json::array();
  for (const ScalingReport& r : doc.reports) j["experiments"].push_back(report_json(r));
  return j.dump(2);
}

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

std::string csv_escape(const std::string& field) {
  if (field.find_first_of(",\"\n") == std::string::npos) return field;
  std::string out = "\"";
  for (char c : field) {
    if (c == '"') out += '"';
    out += c;
  }
  out += "\"";
  return out;
}

void write_report_files(const std::filesystem::path& out_dir, const ScalingReport& report) {
  const std::filesystem::path dir = out_dir / report.experiment_id;
  std::filesystem::create_directories(dir);
  {
    std::ofstream json_out(dir / "report.json", std::ios::binary);
    if (!json_out) throw std::runtime_error("cannot write " + (dir / "report.json").string());
    json_out << report_to_json(report) << "\n";
  }
  // One plot-data CSV per quantity channel: t, statistic, stderr, target.
  std::map<std::string, std::vector<const ReportEntry*>> channels;
  for (const ReportEntry& e : report.entries) channels[e.quantity].push_back(&e);
  for (const auto& [quantity, entries] : channels) {
    std::ofstream csv(dir / (quantity + ".csv"), std::ios::binary);
    if (!csv) throw std::runtime_error("cannot write " + (dir / (quantity + ".csv")).string());
    csv << "t,statistic,stderr,target\n";
    for (const ReportEntry* e : entries) {
      csv << format_double(e->time) << "," << format_double(e->mean) << ","
          << format_double(e->stderr_mean) << ","
          << (e->has_target ? format_double(e->target) : std::string("")) << "\n";
    }
  }
}

void write_consolidated(const std::filesystem::path& out_dir, const ConsolidatedReport& doc) {
  std::filesystem::create_directories(out_dir);
  for (const ScalingReport& r : doc.reports) write_report_files(out_dir, r);
  std::ofstream json_out(out_dir / "consolidated.json", std::ios::binary);
  if (!json_out) throw std::runtime_error("cannot write consolidated.json");
  json_out << consolidated_to_json(doc) << "\n";
}

}  // namespace fvlab
