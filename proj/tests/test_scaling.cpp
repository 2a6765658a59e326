#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <vector>

#include "fvlab/report.hpp"
#include "fvlab/scaling.hpp"

using namespace fvlab;

namespace {

ExperimentConfig quick_experiment() {
  ExperimentConfig cfg;
  cfg.base.params = {2.0, 1};
  cfg.base.schedule = SamplingSchedule::exponential(1.0);
  cfg.base.n_particles = 100;
  cfg.base.init = InitialDistribution::point_mass();
  cfg.base.motion_step = 0.05;
  cfg.base.horizon = 2.0;
  cfg.base.seed = 4242;
  cfg.replicas = 12;
  cfg.functions = {"gaussian-bump"};
  cfg.eval_times = {1.0, 2.0};
  cfg.experiment_id = "unit-mass";
  return cfg;
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

TEST_CASE("lattice times satisfy gamma(t_n) = q^n in both branches") {
  const StableParams low{2.0, 1};
  const auto lo = lattice_times(low, 1.5, 1, 5);
  for (int n = 0; n < 5; ++n) {
    CHECK(gamma_d(low, lo[static_cast<std::size_t>(n)]) ==
          doctest::Approx(std::pow(1.5, n + 1)).epsilon(1e-12));
  }
  const StableParams critical{1.0, 1};
  const auto cr = lattice_times(critical, 1.3, 1, 4);
  for (int n = 0; n < 4; ++n) {
    CHECK(gamma_d(critical, cr[static_cast<std::size_t>(n)]) ==
          doctest::Approx(std::pow(1.3, n + 1)).epsilon(1e-12));
  }
  CHECK_THROWS_AS(lattice_times({1.0, 2}, 1.5, 1, 3), std::invalid_argument);
  CHECK_THROWS_AS(lattice_times(low, 0.9, 1, 3), std::invalid_argument);
}

TEST_CASE("mass scaling: report structure, targets and odd-function zeroes") {
  ExperimentConfig cfg = quick_experiment();
  cfg.functions = {"gaussian-bump", "odd-bump"};
  const ScalingReport rep = run_mass_scaling(cfg);
  CHECK(rep.kind == "mass-scaling");
  CHECK_FALSE(rep.exploratory);
  REQUIRE(!rep.entries.empty());
  // Every reported statistic carries its standard error and replica count.
  for (const ReportEntry& e : rep.entries) {
    CHECK(e.replicas == static_cast<std::size_t>(cfg.replicas));
    CHECK(std::isfinite(e.stderr_mean));
  }
  // Odd function: every target is exactly zero.
  for (const ReportEntry& e : rep.entries) {
    if (e.quantity.find("f1") != std::string::npos) CHECK(e.target == 0.0);
  }
}

TEST_CASE("mass scaling: order-1 targets equal order-0 targets") {
  ExperimentConfig cfg0 = quick_experiment();
  cfg0.order = 0;
  ExperimentConfig cfg1 = quick_experiment();
  cfg1.order = 1;
  const ScalingReport r0 = run_mass_scaling(cfg0);
  const ScalingReport r1 = run_mass_scaling(cfg1);
  REQUIRE(r0.entries.size() == r1.entries.size());
  for (std::size_t i = 0; i < r0.entries.size(); ++i) {
    CHECK(r0.entries[i].target == r1.entries[i].target);
  }
}

TEST_CASE("mass scaling downgrades to exploratory when the condition fails") {
  ExperimentConfig cfg = quick_experiment();
  cfg.base.schedule = SamplingSchedule::constant(1.0);
  const ScalingReport rep = run_mass_scaling(cfg);
  CHECK(rep.exploratory);
  REQUIRE(!rep.entries.empty());  // still executes
  for (const ReportEntry& e : rep.entries) CHECK_FALSE(e.checked);
}

TEST_CASE("occupation scaling rejects functions with divergent norm") {
  ExperimentConfig cfg = quick_experiment();
  cfg.base.params = {1.0, 1};  // critical dimension
  cfg.functions = {"gaussian-bump"};
  CHECK_THROWS_AS(run_occupation_scaling(cfg), std::invalid_argument);
}

TEST_CASE("occupation scaling: low dimension channels agree") {
  ExperimentConfig cfg = quick_experiment();
  cfg.base.n_particles = 80;
  cfg.base.horizon = 3.0;
  cfg.base.seed = 3;
  cfg.eval_times = {1.0, 3.0};
  cfg.replicas = 16;
  cfg.experiment_id = "unit-occ";
  const ScalingReport rep = run_occupation_scaling(cfg);
  bool found_agreement = false;
  for (const ReportEntry& e : rep.entries) {
    if (e.quantity.rfind("occupation_agreement", 0) == 0 && e.checked) {
      found_agreement = true;
      CHECK(e.pass);  // Z - Y is exactly centered
    }
  }
  CHECK(found_agreement);
}

TEST_CASE("occupation scaling: high dimension reports increments and identity") {
  ExperimentConfig cfg = quick_experiment();
  cfg.base.params = {1.0, 2};
  cfg.base.n_particles = 60;
  cfg.base.horizon = 4.0;
  cfg.base.motion_step = 0.1;
  cfg.eval_times = {0.5, 1.0, 2.0, 4.0};
  cfg.replicas = 12;
  cfg.experiment_id = "unit-occ-high";
  const ScalingReport rep = run_occupation_scaling(cfg);
  bool identity_checked = false;
  for (const ReportEntry& e : rep.entries) {
    if (e.quantity.rfind("limit_identity", 0) == 0) {
      identity_checked = true;
      CHECK(e.pass);
    }
  }
  CHECK(identity_checked);
  bool kappa_note = false;
  for (const std::string& n : rep.notes) {
    if (n.find("kappa branch skipped") != std::string::npos) kappa_note = true;
  }
  CHECK(kappa_note);
}

TEST_CASE("martingale checks: nullity, orthogonality and qv entries present") {
  ExperimentConfig cfg = quick_experiment();
  cfg.base.n_particles = 80;
  cfg.base.horizon = 2.0;
  cfg.eval_times = {0.5, 1.0, 2.0};
  cfg.replicas = 16;
  cfg.experiment_id = "unit-mart";
  const ScalingReport rep = run_martingale_checks(cfg);
  int nullity = 0, qv = 0, corr_entries = 0, second = 0;
  for (const ReportEntry& e : rep.entries) {
    if (e.quantity.rfind("corrector_mean", 0) == 0) {
      ++nullity;
      CHECK(e.checked);
    }
    if (e.quantity.rfind("qv_difference", 0) == 0) ++qv;
    if (e.quantity.rfind("increment_correlation", 0) == 0) ++corr_entries;
    if (e.quantity.rfind("second_moment_bound", 0) == 0) {
      ++second;
      CHECK(e.pass);
    }
  }
  CHECK(nullity == 3);
  CHECK(qv == 1);
  CHECK(corr_entries == 1);
  CHECK(second == 1);
}

TEST_CASE("martingale checks hold for a constant schedule too") {
  // Nullity needs no condition on phi.
  ExperimentConfig cfg = quick_experiment();
  cfg.base.schedule = SamplingSchedule::constant(1.0);
  cfg.base.n_particles = 60;
  cfg.eval_times = {0.5, 1.0, 2.0};
  cfg.replicas = 16;
  cfg.experiment_id = "unit-mart-const";
  const ScalingReport rep = run_martingale_checks(cfg);
  for (const ReportEntry& e : rep.entries) {
    if (e.quantity.rfind("corrector_mean", 0) == 0) CHECK(e.pass);
  }
}

TEST_CASE("semigroup expansion study is deterministic and decreasing") {
  ExpansionStudyConfig cfg;
  cfg.params = {2.0, 1};
  cfg.orders = {0};
  cfg.times = {4.0, 16.0, 64.0};
  const ScalingReport a = run_semigroup_expansion_study(cfg);
  const ScalingReport b = run_semigroup_expansion_study(cfg);
  REQUIRE(a.entries.size() == b.entries.size());
  for (std::size_t i = 0; i < a.entries.size(); ++i) {
    CHECK(a.entries[i].mean == b.entries[i].mean);  // bit-reproducible
  }
  CHECK(a.entries[2].mean < a.entries[1].mean);
  bool tail_note = false;
  for (const std::string& n : a.notes) {
    if (n.find("tail decreasing") != std::string::npos) tail_note = true;
  }
  CHECK(tail_note);
}

TEST_CASE("summarize: empty, disjoint union, duplicate rejection") {
  CHECK(summarize({}).reports.empty());
  ScalingReport r1;
  r1.experiment_id = "a";
  ScalingReport r2;
  r2.experiment_id = "b";
  const ConsolidatedReport doc = summarize({r1, r2});
  CHECK(doc.reports.size() == 2);
  CHECK_THROWS_AS(summarize({r1, r1}), std::invalid_argument);
}

TEST_CASE("report files: json plus per-quantity plot CSVs, byte-stable") {
  ScalingReport rep;
  rep.experiment_id = "emit-test";
  rep.kind = "mass-scaling";
  ReportEntry e;
  e.quantity = "mass_scaling.f0";
  e.function = "gaussian";
  e.time = 2.0;
  e.mean = 0.5;
  e.stderr_mean = 0.01;
  e.replicas = 8;
  e.has_target = true;
  e.target = 0.5;
  rep.entries.push_back(e);

  const std::filesystem::path dir = std::filesystem::temp_directory_path() / "fvlab-test-report";
  std::filesystem::remove_all(dir);
  write_report_files(dir, rep);
  const auto json_path = dir / "emit-test" / "report.json";
  const auto csv_path = dir / "emit-test" / "mass_scaling.f0.csv";
  REQUIRE(std::filesystem::exists(json_path));
  REQUIRE(std::filesystem::exists(csv_path));
  const std::string first_json = slurp(json_path);
  const std::string first_csv = slurp(csv_path);
  CHECK(first_csv.rfind("t,statistic,stderr,target\n", 0) == 0);
  write_report_files(dir, rep);
  CHECK(slurp(json_path) == first_json);
  CHECK(slurp(csv_path) == first_csv);
  std::filesystem::remove_all(dir);
}

TEST_CASE("csv escaping quotes only when needed") {
  CHECK(csv_escape("plain") == "plain");
  CHECK(csv_escape("with,comma") == "\"with,comma\"");
  CHECK(csv_escape("with\"quote") == "\"with\"\"quote\"");
}

TEST_CASE("semigroup grid evaluator approximates the direct computation") {
  const StableParams params{2.0, 1};
  const TestFunction f = TestFunction::gaussian_bump(1, 1.0);
  const SemigroupGridEvaluator eval(params, 0.8, f, 30.0, 2049);
  for (double x : {-3.0, 0.0, 1.7}) {
    const double direct = semigroup_apply(params, 0.8, f, std::vector<double>{x});
    CHECK(eval(std::vector<double>{x}) == doctest::Approx(direct).epsilon(1e-4));
  }
}

TEST_CASE("replica rows are independent of the thread count") {
  RunConfig base = quick_experiment().base;
  base.snapshot_times = {1.0, 2.0};
  base.tracked = {TestFunction::gaussian_bump(1, 1.0)};
  std::function<std::vector<double>(int, RunResult&&)> reduce = [](int, RunResult&& res) {
    return std::vector<double>{res.snapshots.back().state.positions[0],
                               res.snapshots.back().occupation[0],
                               static_cast<double>(res.event_count)};
  };
  const auto serial = run_replicas<std::vector<double>>(base, 6, 1, reduce);
  const auto threaded = run_replicas<std::vector<double>>(base, 6, 3, reduce);
  CHECK(serial == threaded);
}

TEST_CASE("experiment validation rejects inconsistent settings") {
  ExperimentConfig cfg = quick_experiment();
  cfg.replicas = 1;
  CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
  cfg = quick_experiment();
  cfg.eval_times = {5.0};  // beyond the horizon
  CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
  cfg = quick_experiment();
  cfg.eval_times.clear();
  CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
}
