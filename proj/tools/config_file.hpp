#pragma once

#include <filesystem>
#include <map>
#include <string>

#include "fvlab/scaling.hpp"

namespace fvlab::cli {

// Flat sectioned key/value text, '#' or ';' comments. Documented sections:
// [motion] alpha, dim; [schedule] kind, beta, c, n, file;
// [system] particles, eta, step, horizon;
// [init] kind, center, radius, sigma, file;
// [experiment] replicas, jobs, times, lattice-q, lattice-first,
//              lattice-count, functions, order, seed, label, snapshots;
// [output] dir. Unknown keys are rejected.
using ConfigMap = std::map<std::string, std::map<std::string, std::string>>;

ConfigMap parse_config_text(const std::string& text);
ConfigMap load_config_file(const std::filesystem::path& path);

// Builds the experiment description from a parsed config. Missing keys
// fall back to documented defaults; malformed values throw
// std::invalid_argument with the offending section/key named.
ExperimentConfig experiment_from_config(const ConfigMap& config);

// Output directory resolution: [output] dir, overridable by --out and the
// FVLAB_OUT environment variable (lowest precedence: "fvlab-out").
std::filesystem::path output_dir_from_config(const ConfigMap& config,
                                             const std::string& override_dir);

}  // namespace fvlab::cli
