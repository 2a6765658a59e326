#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "fvlab/scaling.hpp"

namespace fvlab {

// Consolidated multi-experiment document.
struct ConsolidatedReport {
  std::vector<ScalingReport> reports;
};

// Merges reports; duplicate experiment ids are rejected.
ConsolidatedReport summarize(std::vector<ScalingReport> reports);

std::string report_to_json(const ScalingReport& report);
std::string consolidated_to_json(const ConsolidatedReport& doc);

// Writes <out>/<experiment-id>/report.json plus one plot-data CSV per
// (quantity, function) channel with columns t, statistic, stderr, target.
void write_report_files(const std::filesystem::path& out_dir, const ScalingReport& report);

// Writes every report plus <out>/consolidated.json.
void write_consolidated(const std::filesystem::path& out_dir, const ConsolidatedReport& doc);

// RFC 4180 style field quoting (quotes only when needed).
std::string csv_escape(const std::string& field);

// Canonical float formatting used for every emitted number, so identical
// runs produce byte-identical files.
std::string format_double(double v);

}  // namespace fvlab
