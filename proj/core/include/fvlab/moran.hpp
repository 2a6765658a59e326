#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "fvlab/genealogy.hpp"
#include "fvlab/rng.hpp"
#include "fvlab/schedule.hpp"
#include "fvlab/stable_motion.hpp"
#include "fvlab/statistics.hpp"
#include "fvlab/test_function.hpp"

namespace fvlab {

// Positions and lineage references of the N living particles.
struct ParticleState {
  double time = 0.0;
  int n_particles = 0;
  int dim = 1;
  double eta = 1.0;
  std::vector<double> positions;    // n_particles * dim, row-major
  std::vector<NodeId> lineage_ids;  // one arena node per particle

  std::span<const double> position(int i) const {
    return {positions.data() + static_cast<std::size_t>(i) * dim,
            static_cast<std::size_t>(dim)};
  }
};

// (1/N) sum_i f(x_i).
double empirical_integral(const ParticleState& state, const TestFunction& f);

struct EventRecord {
  double time = 0.0;
  int source = 0;  // the particle that moves
  int target = 0;  // the particle whose location and ancestry it adopts
};

struct EventLog {
  std::vector<EventRecord> records;
};

enum class InitialKind { PointMass, UniformBall, IsotropicGaussian, EmpiricalFile };

struct InitialDistribution {
  InitialKind kind = InitialKind::PointMass;
  std::vector<double> center;      // defaults to the origin
  double radius = 1.0;             // uniform ball
  double sigma = 1.0;              // isotropic Gaussian
  std::vector<double> empirical;   // rows * dim, sampled uniformly

  static InitialDistribution point_mass(std::vector<double> at = {});
  static InitialDistribution uniform_ball(double radius, std::vector<double> center = {});
  static InitialDistribution isotropic_gaussian(double sigma, std::vector<double> center = {});
  static InitialDistribution empirical_file(std::vector<double> rows);

  void sample(int dim, RngStream& rng, std::span<double> out) const;
  std::string describe() const;
};

struct RunConfig {
  StableParams params;
  SamplingSchedule schedule = SamplingSchedule::constant(1.0);
  int n_particles = 2;
  double eta = 1.0;
  InitialDistribution init;
  double motion_step = 0.05;
  double horizon = 1.0;
  std::vector<double> snapshot_times;
  std::uint64_t seed = 0;
  std::uint64_t stream = 0;
  std::vector<TestFunction> tracked;
  bool record_event_log = false;
  bool record_traces = false;
  bool track_genealogy = true;
  // Maintenance prune trigger (node count); 0 disables mid-run pruning so
  // the arena is compacted at snapshot boundaries only.
  std::size_t prune_node_threshold = 1u << 18;

  void validate() const;
};

struct Snapshot {
  ParticleState state;
  std::uint64_t event_count = 0;
  // One entry per tracked function.
  std::vector<double> mass;          // X_t(f)
  std::vector<double> occupation;    // Y_t(f)
  std::vector<double> inhabitation;  // Z_t(f); Z - Y is the corrector
  std::vector<double> qv_resample;   // sum of squared resampling jumps of X(f)
  std::vector<double> qv_motion;     // sum of squared motion increments of X(f)
  std::vector<double> qv_target;     // int eta (X(f^2) - X(f)^2) / phi ds
};

struct RunResult {
  std::vector<Snapshot> snapshots;
  ParticleState final_state;
  GenealogyArena arena;
  EventLog event_log;
  std::uint64_t event_count = 0;
  std::vector<FineTrace> traces;  // per tracked function, when recorded

  RunResult() : arena(1) {}
};

// Next event of the inhomogeneous pair-resampling process with intensity
// eta N(N-1) / (2 phi(s)) for s > t, generated by thinning against a
// window envelope. Returns nothing if no event occurs before max_time.
std::optional<double> next_resampling_time(const SamplingSchedule& schedule, int n_particles,
                                           double eta, double t, RngStream& rng,
                                           double max_time, double window = 0.25);

// Event-driven Moran system. One instance owns its state, arena and RNG
// stream; runs are strictly single-threaded. Replicas use distinct
// streams and disjoint instances.
class MoranSimulation {
 public:
  explicit MoranSimulation(RunConfig config);

  const ParticleState& state() const { return state_; }
  const GenealogyArena& arena() const { return arena_; }
  const RunConfig& config() const { return config_; }

  // Advances every particle by exact stable increments to state.time + dt
  // and extends the recorded lineage segments. The caller guarantees no
  // resampling event lies inside the step.
  void advance_motion(double dt);

  // Applies one resampling event at time tau in (state.time, next sync]:
  // a uniform ordered pair (i, j) is drawn, both particles are advanced
  // exactly to tau, particle i moves to particle j's position and adopts
  // its ancestry.
  void resample(double tau);

  // Runs the full event loop to the horizon.
  RunResult run() &&;

 private:
  struct Tracked {
    explicit Tracked(TestFunction fn) : f(std::move(fn)) {}
    TestFunction f;
    std::vector<double> values;  // f at each particle's observable position
    double sum1 = 0.0;           // sum_i f(x_i)
    double sum2 = 0.0;           // sum_i f(x_i)^2
    KahanSum occupation;         // int X(f) ds
    KahanSum qv_target;          // int eta (X(f^2) - X(f)^2)/phi ds
    double qv_resample = 0.0;
    double qv_motion = 0.0;
    FineTrace trace;
  };

  void accrue_to(double t);
  void refresh_sums(Tracked& tr);
  void advance_particle_exact(int p, double t);
  void record_snapshot(double t, RunResult& result);
  void prune_arena(RunResult& result);

  RunConfig config_;
  RngStream rng_;
  ParticleState state_;
  GenealogyArena arena_;
  std::vector<double> exact_time_;  // per-particle time of the exact position
  std::vector<Tracked> tracked_;
  double accrued_to_ = 0.0;
  std::uint64_t event_count_ = 0;
  EventLog log_;
};

// Convenience wrapper: build and run.
RunResult run_moran(RunConfig config);

}  // namespace fvlab
