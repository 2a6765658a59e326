#include "config_file.hpp"

#include <cstdlib>
#include <fstream>
#include <set>
#include <sstream>
#include <stdexcept>

namespace fvlab::cli {

namespace {

std::string trim(const std::string& s) {
  const auto begin = s.find_first_not_of(" \t\r");
  if (begin == std::string::npos) return "";
  const auto end = s.find_last_not_of(" \t\r");
  return s.substr(begin, end - begin + 1);
}

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::string cur;
  std::istringstream in(s);
  while (std::getline(in, cur, ',')) {
    cur = trim(cur);
    if (!cur.empty()) out.push_back(cur);
  }
  return out;
}

class Section {
 public:
  Section(const ConfigMap& map, std::string name) : name_(std::move(name)) {
    auto it = map.find(name_);
    if (it != map.end()) entries_ = &it->second;
  }

  bool has(const std::string& key) const {
    return entries_ != nullptr && entries_->count(key) > 0;
  }

  std::string str(const std::string& key, const std::string& fallback) const {
    if (!has(key)) return fallback;
    used_.insert(key);
    return entries_->at(key);
  }

  double number(const std::string& key, double fallback) const {
    if (!has(key)) return fallback;
    used_.insert(key);
    const std::string raw = entries_->at(key);
    try {
      std::size_t pos = 0;
      const double v = std::stod(raw, &pos);
      if (pos != raw.size()) throw std::invalid_argument(raw);
      return v;
    } catch (const std::exception&) {
      throw std::invalid_argument("config [" + name_ + "] " + key + ": not a number: '" + raw +
                                  "'");
    }
  }

  long integer(const std::string& key, long fallback) const {
    const double v = number(key, static_cast<double>(fallback));
    const long l = static_cast<long>(v);
    if (static_cast<double>(l) != v) {
      throw std::invalid_argument("config [" + name_ + "] " + key + ": expected an integer");
    }
    return l;
  }

  std::vector<double> numbers(const std::string& key) const {
    std::vector<double> out;
    if (!has(key)) return out;
    used_.insert(key);
    for (const std::string& item : split_list(entries_->at(key))) {
      try {
        out.push_back(std::stod(item));
      } catch (const std::exception&) {
        throw std::invalid_argument("config [" + name_ + "] " + key +
                                    ": not a number list entry: '" + item + "'");
      }
    }
    return out;
  }

  std::vector<std::string> list(const std::string& key) const {
    if (!has(key)) return {};
    used_.insert(key);
    return split_list(entries_->at(key));
  }

  void reject_unknown() const {
    if (!entries_) return;
    for (const auto& [key, value] : *entries_) {
      if (!used_.count(key)) {
        throw std::invalid_argument("config [" + name_ + "]: unknown key '" + key + "'");
      }
    }
  }

 private:
  std::string name_;
  const std::map<std::string, std::string>* entries_ = nullptr;
  mutable std::set<std::string> used_;
};

std::vector<std::pair<double, double>> load_schedule_table(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("config [schedule] file: cannot open '" + path + "'");
  std::vector<std::pair<double, double>> knots;
  std::string line;
  while (std::getline(in, line)) {
    line = trim(line);
    if (line.empty() || line[0] == '#') continue;
    std::istringstream row(line);
    std::string t_s, phi_s;
    if (!std::getline(row, t_s, ',') || !std::getline(row, phi_s, ',')) {
      throw std::invalid_argument("config [schedule] file: expected 't,phi' rows");
    }
    knots.emplace_back(std::stod(t_s), std::stod(phi_s));
  }
  return knots;
}

std::vector<double> load_point_rows(const std::string& path, int dim) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("config [init] file: cannot open '" + path + "'");
  std::vector<double> values;
  std::string line;
  while (std::getline(in, line)) {
    line = trim(line);
    if (line.empty() || line[0] == '#') continue;
    std::istringstream row(line);
    std::string field;
    int fields = 0;
    while (std::getline(row, field, ',')) {
      values.push_back(std::stod(field));
      ++fields;
    }
    if (fields != dim) {
      throw std::invalid_argument("config [init] file: row with " + std::to_string(fields) +
                                  " fields, expected " + std::to_string(dim));
    }
  }
  return values;
}

}  // namespace

ConfigMap parse_config_text(const std::string& text) {
  ConfigMap map;
  std::string section;
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto comment = line.find_first_of("#;");
    if (comment != std::string::npos) line = line.substr(0, comment);
    line = trim(line);
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']') {
        throw std::invalid_argument("config line " + std::to_string(lineno) +
                                    ": unterminated section header");
      }
      section = trim(line.substr(1, line.size() - 2));
      map.try_emplace(section);
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos || section.empty()) {
      throw std::invalid_argument("config line " + std::to_string(lineno) +
                                  ": expected 'key = value' inside a section");
    }
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty()) {
      throw std::invalid_argument("config line " + std::to_string(lineno) + ": empty key");
    }
    map[section][key] = value;
  }
  return map;
}

ConfigMap load_config_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::invalid_argument("cannot open config file '" + path.string() + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config_text(ss.str());
}

ExperimentConfig experiment_from_config(const ConfigMap& config) {
  ExperimentConfig out;

  const Section motion(config, "motion");
  out.base.params.alpha = motion.number("alpha", 2.0);
  out.base.params.dim = static_cast<int>(motion.integer("dim", 1));
  motion.reject_unknown();

  const Section schedule(config, "schedule");
  const std::string kind = schedule.str("kind", "exponential");
  if (kind == "constant") {
    out.base.schedule = SamplingSchedule::constant(schedule.number("c", 1.0));
  } else if (kind == "exponential") {
    out.base.schedule = SamplingSchedule::exponential(schedule.number("beta", 1.0));
  } else if (kind == "polynomial") {
    out.base.schedule = SamplingSchedule::polynomial(schedule.number("n", 4.0));
  } else if (kind == "tabulated") {
    out.base.schedule = SamplingSchedule::tabulated(
        load_schedule_table(schedule.str("file", "")));
  } else {
    throw std::invalid_argument("config [schedule] kind: unknown kind '" + kind + "'");
  }
  schedule.reject_unknown();

  const Section system(config, "system");
  out.base.n_particles = static_cast<int>(system.integer("particles", 500));
  out.base.eta = system.number("eta", 1.0);
  out.base.motion_step = system.number("step", 0.05);
  out.base.horizon = system.number("horizon", 1.0);
  system.reject_unknown();

  const Section init(config, "init");
  const std::string init_kind = init.str("kind", "point");
  std::vector<double> center = init.numbers("center");
  if (init_kind == "point") {
    out.base.init = InitialDistribution::point_mass(std::move(center));
  } else if (init_kind == "ball") {
    out.base.init = InitialDistribution::uniform_ball(init.number("radius", 1.0),
                                                      std::move(center));
  } else if (init_kind == "gaussian") {
    out.base.init =
        InitialDistribution::isotropic_gaussian(init.number("sigma", 1.0), std::move(center));
  } else if (init_kind == "empirical") {
    out.base.init = InitialDistribution::empirical_file(
        load_point_rows(init.str("file", ""), out.base.params.dim));
  } else {
    throw std::invalid_argument("config [init] kind: unknown kind '" + init_kind + "'");
  }
  init.reject_unknown();

  const Section experiment(config, "experiment");
  out.replicas = static_cast<int>(experiment.integer("replicas", 8));
  out.jobs = static_cast<int>(experiment.integer("jobs", 1));
  out.eval_times = experiment.numbers("times");
  out.lattice_q = experiment.number("lattice-q", 0.0);
  out.lattice_first = static_cast<int>(experiment.integer("lattice-first", 1));
  out.lattice_count = static_cast<int>(experiment.integer("lattice-count", 0));
  out.order = static_cast<int>(experiment.integer("order", 0));
  out.base.seed = static_cast<std::uint64_t>(experiment.integer("seed", 0));
  out.label = experiment.str("label", "");
  if (experiment.has("functions")) {
    out.functions = experiment.list("functions");
  }
  const std::vector<double> snapshots = experiment.numbers("snapshots");
  if (!snapshots.empty()) out.base.snapshot_times = snapshots;
  experiment.reject_unknown();

  const Section output(config, "output");
  output.str("dir", "");  // consumed by output_dir_from_config
  output.reject_unknown();

  return out;
}

std::filesystem::path output_dir_from_config(const ConfigMap& config,
                                             const std::string& override_dir) {
  if (!override_dir.empty()) return override_dir;
  const Section output(config, "output");
  const std::string from_file = output.str("dir", "");
  if (!from_file.empty()) return from_file;
  if (const char* env = std::getenv("FVLAB_OUT"); env != nullptr && *env != '\0') {
    return env;
  }
  return "fvlab-out";
}

}  // namespace fvlab::cli
