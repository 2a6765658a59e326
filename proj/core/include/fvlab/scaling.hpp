#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "fvlab/analytics.hpp"
#include "fvlab/moran.hpp"

namespace fvlab {

// Evaluation lattice with gamma_d(t_n) = q^n: t_n = q^{alpha n/(alpha-d)}
// below the critical dimension, t_n = exp(q^n) at it. Not defined above
// it (gamma is constant there); use explicit times instead.
std::vector<double> lattice_times(const StableParams& params, double q, int first, int count);

struct ExperimentConfig {
  RunConfig base;  // tracked functions are filled in from `functions`
  int replicas = 8;
  int jobs = 1;
  std::vector<std::string> functions = {"gaussian-bump"};
  std::vector<double> eval_times;  // explicit; or use the lattice fields
  double lattice_q = 0.0;          // > 1 enables the lattice schedule
  int lattice_first = 1;
  int lattice_count = 0;
  int order = 0;  // expansion order N for mass scaling
  std::string experiment_id = "experiment";
  std::string label;
  double z_threshold = 4.0;
  // Limit checks at the final time also accept this relative deviation
  // from the asymptotic target (finite-time bias allowance).
  double rel_tolerance = 0.15;
  double condition_eps = 0.01;  // probe epsilon for the phi conditions

  // Resolves eval times (lattice or explicit), sorts and validates.
  std::vector<double> resolve_times() const;
  void validate() const;
};

struct ReportEntry {
  std::string quantity;  // file stem: <experiment-id>/<quantity>.csv
  std::string function;
  double time = 0.0;
  double mean = 0.0;
  double stderr_mean = 0.0;
  std::size_t replicas = 0;
  bool has_target = false;
  double target = 0.0;
  double z = 0.0;
  bool checked = false;  // entry participates in pass/fail
  bool pass = true;
};

struct ScalingReport {
  std::string experiment_id;
  std::string label;
  std::string kind;  // mass-scaling, occupation-scaling, ...
  bool exploratory = false;
  std::uint64_t seed = 0;
  int replicas = 0;
  int n_particles = 0;
  double z_threshold = 4.0;
  std::vector<std::string> condition_notes;
  std::vector<std::string> notes;
  std::vector<ReportEntry> entries;

  bool all_pass() const;
  void add_note(std::string n) { notes.push_back(std::move(n)); }
};

// Ensemble statistics of t^{d/alpha} X_t(f) against the order-N moment
// target. A failed growth condition downgrades the run to exploratory.
ScalingReport run_mass_scaling(const ExperimentConfig& config);

// Scaled occupation/inhabitation statistics Y_t/gamma, Z_t/gamma against
// kappa lambda(f) for d <= alpha; convergence diagnostics (Cauchy
// increments, per-path limit identity) for d > alpha.
ScalingReport run_occupation_scaling(const ExperimentConfig& config);

// Quadratic-variation matching, martingale nullity, increment
// orthogonality, second-moment bound and the L2 convergence diagnostic.
ScalingReport run_martingale_checks(const ExperimentConfig& config);

struct ExpansionStudyConfig {
  StableParams params;
  std::string function = "gaussian-bump";
  std::vector<int> orders = {0, 2};
  std::vector<double> times = {4.0, 16.0, 64.0, 256.0};
  std::string experiment_id = "expansion-study";
  std::string label;
};

// Deterministic tabulation of the scaled expansion error over a time
// grid; flags non-decreasing tails.
ScalingReport run_semigroup_expansion_study(const ExpansionStudyConfig& config);

// Runs replicas (optionally on several threads), reducing each RunResult
// to a user row immediately so at most `jobs` results are alive at once.
// Row order is by replica index regardless of the thread count, so the
// downstream reduction is byte-stable for any --jobs value.
template <typename Row>
std::vector<Row> run_replicas(const RunConfig& base, int replicas, int jobs,
                              const std::function<Row(int, RunResult&&)>& reduce);

// Interpolating evaluator for T_t f on [-extent, extent] (dim 1) or on
// radius [0, extent] (isotropic f, any supported dim).
class SemigroupGridEvaluator {
 public:
  SemigroupGridEvaluator(const StableParams& params, double t, const TestFunction& f,
                         double extent, int points = 4097);
  double operator()(std::span<const double> x) const;

 private:
  int dim_;
  bool radial_;
  double extent_;
  double step_;
  std::vector<double> values_;
};

}  // namespace fvlab

#include <atomic>
#include <mutex>
#include <stdexcept>
#include <thread>

namespace fvlab {

template <typename Row>
std::vector<Row> run_replicas(const RunConfig& base, int replicas, int jobs,
                              const std::function<Row(int, RunResult&&)>& reduce) {
  if (replicas < 1) throw std::invalid_argument("run_replicas: replicas must be >= 1");
  jobs = std::max(1, std::min(jobs, replicas));
  std::vector<Row> rows(static_cast<std::size_t>(replicas));
  std::atomic<int> next{0};
  std::atomic<bool> failed{false};
  std::string error;
  std::mutex error_mu;
  auto worker = [&] {
    while (!failed.load()) {
      const int r = next.fetch_add(1);
      if (r >= replicas) break;
      try {
        RunConfig cfg = base;
        cfg.stream = base.stream + static_cast<std::uint64_t>(r);
        rows[static_cast<std::size_t>(r)] = reduce(r, run_moran(std::move(cfg)));
      } catch (const std::exception& e) {
        std::lock_guard<std::mutex> lock(error_mu);
        failed.store(true);
        if (error.empty()) error = e.what();
      }
    }
  };
  if (jobs == 1) {
    worker();
  } else {
    std::vector<std::thread> threads;
    threads.reserve(static_cast<std::size_t>(jobs));
    for (int j = 0; j < jobs; ++j) threads.emplace_back(worker);
    for (std::thread& t : threads) t.join();
  }
  if (failed.load()) throw std::runtime_error("replica failed: " + error);
  return rows;
}

}  // namespace fvlab
