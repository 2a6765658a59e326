#include "fvlab/moran.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace fvlab {

double empirical_integral(const ParticleState& state, const TestFunction& f) {
  if (state.n_particles <= 0) throw std::invalid_argument("empirical_integral: empty state");
  KahanSum acc;
  for (int i = 0; i < state.n_particles; ++i) acc.add(f.evaluate(state.position(i)));
  return acc.value() / static_cast<double>(state.n_particles);
}

InitialDistribution InitialDistribution::point_mass(std::vector<double> at) {
  InitialDistribution d;
  d.kind = InitialKind::PointMass;
  d.center = std::move(at);
  return d;
}

InitialDistribution InitialDistribution::uniform_ball(double radius, std::vector<double> center) {
  if (!(radius > 0.0)) throw std::invalid_argument("uniform_ball: radius must be > 0");
  InitialDistribution d;
  d.kind = InitialKind::UniformBall;
  d.radius = radius;
  d.center = std::move(center);
  return d;
}

InitialDistribution InitialDistribution::isotropic_gaussian(double sigma,
                                                            std::vector<double> center) {
  if (!(sigma > 0.0)) throw std::invalid_argument("isotropic_gaussian: sigma must be > 0");
  InitialDistribution d;
  d.kind = InitialKind::IsotropicGaussian;
  d.sigma = sigma;
  d.center = std::move(center);
  return d;
}

InitialDistribution InitialDistribution::empirical_file(std::vector<double> rows) {
  if (rows.empty()) throw std::invalid_argument("empirical_file: no rows");
  InitialDistribution d;
  d.kind = InitialKind::EmpiricalFile;
  d.empirical = std::move(rows);
  return d;
}

void InitialDistribution::sample(int dim, RngStream& rng, std::span<double> out) const {
  if (out.size() != static_cast<std::size_t>(dim)) {
    throw std::invalid_argument("InitialDistribution::sample: bad output span");
  }
  for (int i = 0; i < dim; ++i) {
    out[i] = i < static_cast<int>(center.size()) ? center[i] : 0.0;
  }
  switch (kind) {
    case InitialKind::PointMass:
      return;
    case InitialKind::UniformBall: {
      double norm = 0.0;
      std::vector<double> dir(dim);
      do {
        norm = 0.0;
        for (int i = 0; i < dim; ++i) {
          dir[i] = rng.normal();
          norm += dir[i] * dir[i];
        }
      } while (norm == 0.0);
      norm = std::sqrt(norm);
      const double r = radius * std::pow(rng.uniform01(), 1.0 / dim);
      for (int i = 0; i < dim; ++i) out[i] += r * dir[i] / norm;
      return;
    }
    case InitialKind::IsotropicGaussian:
      for (int i = 0; i < dim; ++i) out[i] += sigma * rng.normal();
      return;
    case InitialKind::EmpiricalFile: {
      if (empirical.size() % dim != 0) {
        throw std::invalid_argument("empirical initial data does not match dimension");
      }
      const std::size_t rows = empirical.size() / dim;
      const std::size_t row = rng.uniform_index(rows);
      for (int i = 0; i < dim; ++i) out[i] = empirical[row * dim + i];
      return;
    }
  }
}

std::string InitialDistribution::describe() const {
  switch (kind) {
    case InitialKind::PointMass:
      return "point-mass";
    case InitialKind::UniformBall:
      return "uniform-ball(radius=" + std::to_string(radius) + ")";
    case InitialKind::IsotropicGaussian:
      return "gaussian(sigma=" + std::to_string(sigma) + ")";
    case InitialKind::EmpiricalFile:
      return "empirical(" + std::to_string(empirical.size()) + " values)";
  }
  return "?";
}

void RunConfig::validate() const {
  params.validate();
  if (n_particles < 2) throw std::invalid_argument("RunConfig: particles must be >= 2");
  if (!(eta > 0.0)) throw std::invalid_argument("RunConfig: eta must be > 0");
  if (!(motion_step > 0.0)) throw std::invalid_argument("RunConfig: step must be > 0");
  if (!(horizon > 0.0)) throw std::invalid_argument("RunConfig: horizon must be > 0");
  for (std::size_t i = 0; i < snapshot_times.size(); ++i) {
    if (snapshot_times[i] < 0.0 || snapshot_times[i] > horizon) {
      throw std::invalid_argument("RunConfig: snapshot-times must lie within [0, horizon]");
    }
    if (i > 0 && !(snapshot_times[i] > snapshot_times[i - 1])) {
      throw std::invalid_argument("RunConfig: snapshot-times must be strictly increasing");
    }
  }
  for (const TestFunction& f : tracked) {
    if (f.dim() != params.dim) {
      throw std::invalid_argument("RunConfig: tracked function dimension mismatch");
    }
  }
}

std::optional<double> next_resampling_time(const SamplingSchedule& schedule, int n_particles,
                                           double eta, double t, RngStream& rng,
                                           double max_time, double window) {
  if (n_particles < 2) throw std::invalid_argument("next_resampling_time: need N >= 2");
  if (!(eta > 0.0)) throw std::invalid_argument("next_resampling_time: eta must be > 0");
  if (!(window > 0.0)) throw std::invalid_argument("next_resampling_time: window must be > 0");
  const double pair_rate = eta * n_particles * (n_particles - 1.0) / 2.0;
  double a = t;
  while (a < max_time) {
    const double b = std::min(a + window, max_time);
    const double phi_min = schedule.min_on(a, b);
    if (!(phi_min > 0.0) || !std::isfinite(phi_min)) {
      throw std::invalid_argument("next_resampling_time: envelope unavailable, phi not "
                                  "bounded on the lookahead window");
    }
    const double envelope = pair_rate / phi_min;
    double s = a;
    while (true) {
      s += rng.exponential() / envelope;
      if (s > b) break;
      if (rng.uniform01() <= phi_min / schedule.evaluate(s)) return s;
    }
    a = b;
  }
  return std::nullopt;
}

MoranSimulation::MoranSimulation(RunConfig config)
    : config_(std::move(config)),
      rng_(config_.seed, config_.stream),
      arena_(config_.params.dim) {
  config_.validate();
  const int n = config_.n_particles;
  const int dim = config_.params.dim;
  state_.time = 0.0;
  state_.n_particles = n;
  state_.dim = dim;
  state_.eta = config_.eta;
  state_.positions.assign(static_cast<std::size_t>(n) * dim, 0.0);
  state_.lineage_ids.assign(n, kNoNode);
  exact_time_.assign(n, 0.0);
  for (int p = 0; p < n; ++p) {
    std::span<double> pos(state_.positions.data() + static_cast<std::size_t>(p) * dim,
                          static_cast<std::size_t>(dim));
    config_.init.sample(dim, rng_, pos);
    if (config_.track_genealogy) {
      state_.lineage_ids[p] = arena_.new_root(0.0, pos);
    }
  }
  for (const TestFunction& f : config_.tracked) {
    Tracked tr(f);
    tr.values.resize(n);
    refresh_sums(tr);
    if (config_.record_traces) {
      tr.trace.times.push_back(0.0);
      tr.trace.values.push_back(tr.sum1 / n);
    }
    tracked_.push_back(std::move(tr));
  }
}

void MoranSimulation::refresh_sums(Tracked& tr) {
  KahanSum s1, s2;
  for (int p = 0; p < state_.n_particles; ++p) {
    const double v = tr.f.evaluate(state_.position(p));
    tr.values[p] = v;
    s1.add(v);
    s2.add(v * v);
  }
  tr.sum1 = s1.value();
  tr.sum2 = s2.value();
}

void MoranSimulation::accrue_to(double t) {
  if (t < accrued_to_) throw std::logic_error("MoranSimulation: accrual time went backwards");
  if (t == accrued_to_) return;
  const double n = state_.n_particles;
  const double span = t - accrued_to_;
  const double inv_phi = config_.schedule.integral_inv(accrued_to_, t);
  for (Tracked& tr : tracked_) {
    const double mean = tr.sum1 / n;
    tr.occupation.add(mean * span);
    tr.qv_target.add(config_.eta * (tr.sum2 / n - mean * mean) * inv_phi);
  }
  accrued_to_ = t;
}

void MoranSimulation::advance_particle_exact(int p, double t) {
  const double dt = t - exact_time_[p];
  if (dt <= 0.0) return;
  double* pos = state_.positions.data() + static_cast<std::size_t>(p) * state_.dim;
  add_isotropic_increment(config_.params, dt, rng_, pos);
  exact_time_[p] = t;
}

void MoranSimulation::resample(double tau) {
  if (tau < state_.time) {
    throw std::invalid_argument("resample: event time must not precede state time");
  }
  accrue_to(tau);
  const int n = state_.n_particles;
  const int i = static_cast<int>(rng_.uniform_index(n));
  int j = static_cast<int>(rng_.uniform_index(n - 1));
  if (j >= i) ++j;

  // Particle j is advanced exactly to the event time; particle i's
  // pre-jump position is overwritten and never observed, so it is not
  // advanced.
  advance_particle_exact(j, tau);

  const std::span<const double> xj = state_.position(j);
  const double inv_n = 1.0 / n;
  for (Tracked& tr : tracked_) {
    const double old_i = tr.values[i];
    const double old_j = tr.values[j];
    const double vj = tr.f.evaluate(xj);
    // The resampling jump is measured in the recorded layer (both values
    // taken at their last breakpoints), which keeps the summed squares an
    // exactly centered estimate of the sampling integral. The reveal of
    // particle j's exact position (carried by both particles afterwards)
    // is motion.
    const double jump_delta = old_j - old_i;
    const double motion_delta = 2.0 * (vj - old_j);
    tr.qv_motion += (motion_delta * inv_n) * (motion_delta * inv_n);
    tr.qv_resample += (jump_delta * inv_n) * (jump_delta * inv_n);
    tr.sum1 += (vj - old_i) + (vj - old_j);
    tr.sum2 += (vj * vj - old_i * old_i) + (vj * vj - old_j * old_j);
    tr.values[i] = vj;
    tr.values[j] = vj;
    if (config_.record_traces) {
      tr.trace.times.push_back(tau);
      tr.trace.values.push_back(tr.sum1 / n);
    }
  }

  if (config_.track_genealogy) {
    arena_.append_sample(state_.lineage_ids[j], tau, xj);
    state_.lineage_ids[i] = arena_.new_child(state_.lineage_ids[j], tau, xj);
  }
  // Particle i takes particle j's exact position.
  double* pi = state_.positions.data() + static_cast<std::size_t>(i) * state_.dim;
  for (int c = 0; c < state_.dim; ++c) pi[c] = xj[c];
  exact_time_[i] = tau;

  if (config_.record_event_log) {
    if (!log_.records.empty() && !(tau > log_.records.back().time)) {
      // Enforce strictly increasing event times even under extreme rates.
      tau = std::nextafter(log_.records.back().time, HUGE_VAL);
    }
    log_.records.push_back({tau, i, j});
  }
  ++event_count_;
  state_.time = tau;
}

void MoranSimulation::advance_motion(double dt) {
  if (!(dt > 0.0)) throw std::invalid_argument("advance_motion: dt must be > 0");
  const double target = state_.time + dt;
  accrue_to(target);
  const int n = state_.n_particles;
  const double inv_n = 1.0 / n;
  std::vector<double> delta1(tracked_.size(), 0.0);
  for (int p = 0; p < n; ++p) {
    advance_particle_exact(p, target);
    const std::span<const double> x = state_.position(p);
    for (std::size_t k = 0; k < tracked_.size(); ++k) {
      Tracked& tr = tracked_[k];
      const double v = tr.f.evaluate(x);
      delta1[k] += v - tr.values[p];
      tr.sum2 += v * v - tr.values[p] * tr.values[p];
      tr.values[p] = v;
    }
    if (config_.track_genealogy) {
      arena_.append_sample(state_.lineage_ids[p], target, x);
    }
  }
  for (std::size_t k = 0; k < tracked_.size(); ++k) {
    Tracked& tr = tracked_[k];
    tr.qv_motion += (delta1[k] * inv_n) * (delta1[k] * inv_n);
    tr.sum1 += delta1[k];
    if (config_.record_traces) {
      tr.trace.times.push_back(target);
      tr.trace.values.push_back(tr.sum1 / n);
    }
  }
  state_.time = target;
}

void MoranSimulation::record_snapshot(double t, RunResult& result) {
  Snapshot snap;
  snap.event_count = event_count_;
  for (Tracked& tr : tracked_) {
    refresh_sums(tr);  // re-anchor the incremental sums
    snap.mass.push_back(tr.sum1 / state_.n_particles);
    snap.occupation.push_back(tr.occupation.value());
    if (config_.track_genealogy) {
      snap.inhabitation.push_back(
          inhabitation_time(state_.lineage_ids, arena_, tr.f, t));
    } else {
      snap.inhabitation.push_back(std::numeric_limits<double>::quiet_NaN());
    }
    snap.qv_resample.push_back(tr.qv_resample);
    snap.qv_motion.push_back(tr.qv_motion);
    snap.qv_target.push_back(tr.qv_target.value());
  }
  snap.state = state_;
  result.snapshots.push_back(std::move(snap));
}

void MoranSimulation::prune_arena(RunResult& result) {
  if (!config_.track_genealogy) return;
  std::vector<NodeId> pins = state_.lineage_ids;
  for (const Snapshot& s : result.snapshots) {
    pins.insert(pins.end(), s.state.lineage_ids.begin(), s.state.lineage_ids.end());
  }
  const std::vector<NodeId> mapping = arena_.prune(pins);
  for (NodeId& id : state_.lineage_ids) id = mapping[static_cast<std::size_t>(id)];
  for (Snapshot& s : result.snapshots) {
    for (NodeId& id : s.state.lineage_ids) id = mapping[static_cast<std::size_t>(id)];
  }
}

RunResult MoranSimulation::run() && {
  RunResult result;

  // Sync points: motion grid, snapshot times, horizon.
  std::vector<double> syncs;
  for (std::size_t k = 1; static_cast<double>(k) * config_.motion_step < config_.horizon; ++k) {
    syncs.push_back(static_cast<double>(k) * config_.motion_step);
  }
  syncs.push_back(config_.horizon);
  syncs.insert(syncs.end(), config_.snapshot_times.begin(), config_.snapshot_times.end());
  std::sort(syncs.begin(), syncs.end());
  syncs.erase(std::unique(syncs.begin(), syncs.end()), syncs.end());

  std::size_t next_snap = 0;
  if (next_snap < config_.snapshot_times.size() && config_.snapshot_times[next_snap] == 0.0) {
    record_snapshot(0.0, result);
    ++next_snap;
  }

  const double pair_rate =
      config_.eta * config_.n_particles * (config_.n_particles - 1.0) / 2.0;
  for (double u : syncs) {
    if (u <= 0.0) continue;
    // Resampling events in (state.time, u], thinned against the window
    // envelope; for nondecreasing phi the envelope is exact at the left
    // endpoint.
    double s = state_.time;
    while (true) {
      const double phi_min = config_.schedule.min_on(s, u);
      if (!(phi_min > 0.0) || !std::isfinite(phi_min)) {
        throw std::runtime_error("run: envelope unavailable on [" + std::to_string(s) + ", " +
                                 std::to_string(u) + "]");
      }
      const double envelope = pair_rate / phi_min;
      double tau = s + rng_.exponential() / envelope;
      if (!(tau <= u)) break;
      if (tau <= s) tau = std::nextafter(s, HUGE_VAL);
      s = tau;
      if (rng_.uniform01() <= phi_min / config_.schedule.evaluate(tau)) {
        resample(tau);
      }
    }
    if (u > state_.time) {
      advance_motion(u - state_.time);
    }
    if (next_snap < config_.snapshot_times.size() && config_.snapshot_times[next_snap] == u) {
      record_snapshot(u, result);
      ++next_snap;
      prune_arena(result);
    } else if (config_.prune_node_threshold > 0 &&
               arena_.node_count() > config_.prune_node_threshold) {
      prune_arena(result);
    }
  }

  result.final_state = state_;
  result.event_count = event_count_;
  result.event_log = std::move(log_);
  if (config_.record_traces) {
    for (Tracked& tr : tracked_) result.traces.push_back(std::move(tr.trace));
  }
  result.arena = std::move(arena_);
  return result;
}

RunResult run_moran(RunConfig config) { return MoranSimulation(std::move(config)).run(); }

}  // namespace fvlab
