#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <span>
#include <vector>

#include "fvlab/stable_motion.hpp"
#include "fvlab/test_function.hpp"

namespace fvlab {

using NodeId = std::int64_t;
inline constexpr NodeId kNoNode = -1;

// Ordered (time, value) pairs, e.g. occupation/inhabitation series.
struct TimeSeries {
  std::vector<double> times;
  std::vector<double> values;

  void push(double t, double v);
  std::size_t size() const { return times.size(); }
};

// Fine trace of an observable of the particle system: the value is
// piecewise constant, changing at the recorded breakpoints. values[i]
// holds on [times[i], times[i+1]).
struct FineTrace {
  std::vector<double> times;
  std::vector<double> values;
};

// Exact integral int_0^t of the piecewise-constant trace, compensated
// summation. t past the recorded horizon is rejected.
double occupation_time(const FineTrace& trace, double t);

// Persistent ancestral store. Nodes are append-only between prune calls;
// each node owns the path samples recorded while a particle carried it,
// and ancestry is shared structurally (an adopted history is referenced,
// never copied).
class GenealogyArena {
 public:
  explicit GenealogyArena(int dim);

  NodeId new_root(double birth_time, std::span<const double> position);
  // Child adopting the parent's full history up to birth_time.
  NodeId new_child(NodeId parent, double birth_time, std::span<const double> position);
  void append_sample(NodeId node, double time, std::span<const double> position);

  NodeId parent(NodeId node) const;
  double birth_time(NodeId node) const;
  std::size_t node_count() const { return nodes_.size(); }
  std::size_t sample_count() const;
  int dim() const { return dim_; }

  // Ancestral path of `node` on [0, t] as an explicit grid, held constant
  // after t. Throws on dangling parent links.
  PathGrid ancestral_path(NodeId node, double t) const;

  // Value of the ancestral path at time u (left-constant interpolation,
  // constant after the node's last sample).
  void ancestral_position(NodeId node, double u, std::span<double> out) const;

  // Integral int_0^t f(path(s)) ds along the ancestral path of `node`,
  // with the same left-constant rule the occupation trace uses. The
  // accumulation runs root-to-leaf in a single stream so results are
  // bit-stable under prune.
  double path_integral(NodeId node, double t, const TestFunction& f) const;

  // Drops every node without a descendant in `roots` and splices out
  // single-child chains among the dead. Returns the old->new id mapping
  // (kNoNode for dropped nodes). Ancestral paths of retained nodes are
  // unchanged to the last bit.
  std::vector<NodeId> prune(std::span<const NodeId> roots);

  // Line-per-node CSV: node-id, parent-id, birth-time, segment-length.
  void export_nodes_csv(std::ostream& out) const;
  // Full-path CSV for one lineage: time, x_1..x_d.
  void export_path_csv(std::ostream& out, NodeId node, double t) const;

 private:
  struct Node {
    NodeId parent = kNoNode;
    double birth_time = 0.0;
    // Interleaved (time, x_1..x_d) samples.
    std::vector<double> samples;
  };

  const Node& at(NodeId id) const;
  Node& at(NodeId id);

  int dim_ = 1;
  int stride_ = 2;
  std::vector<Node> nodes_;
};

// Inhabitation time: (1/N) sum over living lineage ids of the ancestral
// path integral of f up to t.
double inhabitation_time(std::span<const NodeId> living, const GenealogyArena& arena,
                         const TestFunction& f, double t);

// Pointwise difference of aligned series: M = Z - Y.
TimeSeries martingale_corrector(const TimeSeries& inhabitation, const TimeSeries& occupation);

}  // namespace fvlab
