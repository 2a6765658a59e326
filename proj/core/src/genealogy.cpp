#include "fvlab/genealogy.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <stdexcept>

#include "fvlab/statistics.hpp"

namespace fvlab {

void TimeSeries::push(double t, double v) {
  if (!times.empty() && !(t > times.back())) {
    throw std::invalid_argument("TimeSeries: times must be strictly increasing");
  }
  times.push_back(t);
  values.push_back(v);
}

double occupation_time(const FineTrace& trace, double t) {
  if (trace.times.empty() || trace.times.size() != trace.values.size()) {
    throw std::invalid_argument("occupation_time: malformed trace");
  }
  if (t < trace.times.front() || t > trace.times.back() + 1e-12) {
    throw std::invalid_argument("occupation_time: t outside the recorded horizon");
  }
  KahanSum acc;
  for (std::size_t i = 0; i + 1 < trace.times.size() && trace.times[i] < t; ++i) {
    const double hi = std::min(trace.times[i + 1], t);
    acc.add(trace.values[i] * (hi - trace.times[i]));
  }
  return acc.value();
}

GenealogyArena::GenealogyArena(int dim) : dim_(dim), stride_(dim + 1) {
  if (dim < 1) throw std::invalid_argument("GenealogyArena: dim must be >= 1");
}

const GenealogyArena::Node& GenealogyArena::at(NodeId id) const {
  if (id < 0 || static_cast<std::size_t>(id) >= nodes_.size()) {
    throw std::runtime_error("GenealogyArena: dangling node reference " + std::to_string(id));
  }
  return nodes_[static_cast<std::size_t>(id)];
}

GenealogyArena::Node& GenealogyArena::at(NodeId id) {
  return const_cast<Node&>(static_cast<const GenealogyArena*>(this)->at(id));
}

NodeId GenealogyArena::new_root(double birth_time, std::span<const double> position) {
  if (position.size() != static_cast<std::size_t>(dim_)) {
    throw std::invalid_argument("GenealogyArena: position dimension mismatch");
  }
  Node n;
  n.parent = kNoNode;
  n.birth_time = birth_time;
  n.samples.reserve(stride_ * 4);
  n.samples.push_back(birth_time);
  n.samples.insert(n.samples.end(), position.begin(), position.end());
  nodes_.push_back(std::move(n));
  return static_cast<NodeId>(nodes_.size() - 1);
}

NodeId GenealogyArena::new_child(NodeId parent, double birth_time,
                                 std::span<const double> position) {
  const Node& p = at(parent);
  if (!(p.birth_time < birth_time)) {
    throw std::invalid_argument("GenealogyArena: child birth must follow parent birth");
  }
  NodeId id = new_root(birth_time, position);
  nodes_.back().parent = parent;
  return id;
}

void GenealogyArena::append_sample(NodeId node, double time, std::span<const double> position) {
  Node& n = at(node);
  if (!n.samples.empty() && !(time >= n.samples[n.samples.size() - stride_])) {
    throw std::invalid_argument("GenealogyArena: samples must be time-ordered");
  }
  n.samples.push_back(time);
  n.samples.insert(n.samples.end(), position.begin(), position.end());
}

std::size_t GenealogyArena::sample_count() const {
  std::size_t c = 0;
  for (const Node& n : nodes_) c += n.samples.size() / stride_;
  return c;
}

NodeId GenealogyArena::parent(NodeId node) const { return at(node).parent; }

double GenealogyArena::birth_time(NodeId node) const { return at(node).birth_time; }

PathGrid GenealogyArena::ancestral_path(NodeId node, double t) const {
  // Collect the chain root -> node.
  std::vector<NodeId> chain;
  for (NodeId cur = node; cur != kNoNode; cur = at(cur).parent) chain.push_back(cur);
  std::reverse(chain.begin(), chain.end());
  if (at(chain.front()).birth_time != 0.0) {
    throw std::runtime_error("GenealogyArena: chain does not reach a time-0 root");
  }

  PathGrid path;
  path.dim = dim_;
  for (std::size_t ci = 0; ci < chain.size(); ++ci) {
    const Node& n = at(chain[ci]);
    const double clip = ci + 1 < chain.size() ? at(chain[ci + 1]).birth_time : t;
    for (std::size_t s = 0; s + stride_ <= n.samples.size(); s += stride_) {
      const double time = n.samples[s];
      if (time > clip || time > t) break;
      path.times.push_back(time);
      path.positions.insert(path.positions.end(), n.samples.begin() + s + 1,
                            n.samples.begin() + s + stride_);
    }
  }
  return path;
}

void GenealogyArena::ancestral_position(NodeId node, double u, std::span<double> out) const {
  if (out.size() != static_cast<std::size_t>(dim_)) {
    throw std::invalid_argument("ancestral_position: output dimension mismatch");
  }
  // Descend to the chain node whose span covers u, then scan its samples.
  std::vector<NodeId> chain;
  for (NodeId cur = node; cur != kNoNode; cur = at(cur).parent) {
    chain.push_back(cur);
    if (at(cur).birth_time <= u) break;
  }
  const Node& n = at(chain.back());
  if (u < n.birth_time) {
    throw std::runtime_error("GenealogyArena: query before root birth");
  }
  const double* best = nullptr;
  for (std::size_t s = 0; s + stride_ <= n.samples.size(); s += stride_) {
    if (n.samples[s] <= u) {
      best = n.samples.data() + s + 1;
    } else {
      break;
    }
  }
  if (best == nullptr) throw std::runtime_error("GenealogyArena: node has no usable sample");
  std::copy(best, best + dim_, out.begin());
}

double GenealogyArena::path_integral(NodeId node, double t, const TestFunction& f) const {
  std::vector<NodeId> chain;
  for (NodeId cur = node; cur != kNoNode; cur = at(cur).parent) chain.push_back(cur);
  std::reverse(chain.begin(), chain.end());

  // Single root-to-leaf stream of quadrature terms; any regrouping of the
  // underlying samples (prune splices) reproduces the same term sequence.
  KahanSum acc;
  for (std::size_t ci = 0; ci < chain.size(); ++ci) {
    const Node& n = at(chain[ci]);
    const double clip = std::min(ci + 1 < chain.size() ? at(chain[ci + 1]).birth_time : t, t);
    const std::size_t count = n.samples.size() / stride_;
    for (std::size_t s = 0; s < count; ++s) {
      const double u0 = n.samples[s * stride_];
      if (u0 > clip) break;
      const double u1 = s + 1 < count ? std::min(n.samples[(s + 1) * stride_], clip) : clip;
      const std::span<const double> x(n.samples.data() + s * stride_ + 1,
                                      static_cast<std::size_t>(dim_));
      acc.add(f.evaluate(x) * (u1 - u0));
      if (u1 >= clip) break;
    }
  }
  return acc.value();
}

std::vector<NodeId> GenealogyArena::prune(std::span<const NodeId> roots) {
  const std::size_t n = nodes_.size();
  std::vector<char> retained(n, 0);
  std::vector<char> pinned(n, 0);
  for (NodeId r : roots) {
    at(r);  // bounds check
    pinned[static_cast<std::size_t>(r)] = 1;
    for (NodeId cur = r; cur != kNoNode && !retained[static_cast<std::size_t>(cur)];
         cur = at(cur).parent) {
      retained[static_cast<std::size_t>(cur)] = 1;
    }
  }

  std::vector<std::int32_t> retained_children(n, 0);
  for (std::size_t i = 0; i < n; ++i) {
    if (retained[i] && nodes_[i].parent != kNoNode) {
      ++retained_children[static_cast<std::size_t>(nodes_[i].parent)];
    }
  }
  // A node is spliced away when it is retained purely as a single-child
  // link in a dead chain.
  auto splice_away = [&](NodeId id) {
    const auto i = static_cast<std::size_t>(id);
    return retained[i] && !pinned[i] && retained_children[i] == 1;
  };

  std::vector<NodeId> mapping(n, kNoNode);
  std::vector<Node> next;
  for (std::size_t i = 0; i < n; ++i) {
    if (!retained[i] || splice_away(static_cast<NodeId>(i))) continue;
    Node merged = std::move(nodes_[i]);
    // Absorb any run of splice-away ancestors directly above, nearest first.
    while (merged.parent != kNoNode && splice_away(merged.parent)) {
      Node& p = at(merged.parent);
      std::vector<double> combined;
      combined.reserve(p.samples.size() + merged.samples.size());
      const std::size_t pcount = p.samples.size() / stride_;
      for (std::size_t s = 0; s < pcount; ++s) {
        if (p.samples[s * stride_] > merged.birth_time) break;
        combined.insert(combined.end(), p.samples.begin() + s * stride_,
                        p.samples.begin() + (s + 1) * stride_);
      }
      combined.insert(combined.end(), merged.samples.begin(), merged.samples.end());
      merged.samples = std::move(combined);
      merged.birth_time = p.birth_time;
      merged.parent = p.parent;
    }
    if (merged.parent != kNoNode) {
      // Parents precede children in id order and splices only move the
      // link upward, so the parent is already remapped.
      merged.parent = mapping[static_cast<std::size_t>(merged.parent)];
      if (merged.parent == kNoNode) {
        throw std::runtime_error("GenealogyArena::prune: parent dropped before child");
      }
    }
    mapping[i] = static_cast<NodeId>(next.size());
    next.push_back(std::move(merged));
  }
  nodes_ = std::move(next);
  return mapping;
}

void GenealogyArena::export_nodes_csv(std::ostream& out) const {
  out << "node-id,parent-id,birth-time,segment-length\n";
  out.precision(17);
  for (std::size_t i = 0; i < nodes_.size(); ++i) {
    out << i << "," << nodes_[i].parent << "," << nodes_[i].birth_time << ","
        << nodes_[i].samples.size() / stride_ << "\n";
  }
}

void GenealogyArena::export_path_csv(std::ostream& out, NodeId node, double t) const {
  out << "time";
  for (int i = 1; i <= dim_; ++i) out << ",x_" << i;
  out << "\n";
  out.precision(17);
  const PathGrid path = ancestral_path(node, t);
  for (std::size_t i = 0; i < path.times.size(); ++i) {
    out << path.times[i];
    for (int c = 0; c < dim_; ++c) out << "," << path.point(i)[c];
    out << "\n";
  }
}

double inhabitation_time(std::span<const NodeId> living, const GenealogyArena& arena,
                         const TestFunction& f, double t) {
  if (living.empty()) throw std::invalid_argument("inhabitation_time: empty living set");
  KahanSum acc;
  for (NodeId id : living) acc.add(arena.path_integral(id, t, f));
  return acc.value() / static_cast<double>(living.size());
}

TimeSeries martingale_corrector(const TimeSeries& inhabitation, const TimeSeries& occupation) {
  if (inhabitation.times != occupation.times) {
    throw std::invalid_argument("martingale_corrector: series grids are misaligned");
  }
  TimeSeries m;
  m.times = inhabitation.times;
  m.values.resize(inhabitation.values.size());
  for (std::size_t i = 0; i < m.values.size(); ++i) {
    m.values[i] = inhabitation.values[i] - occupation.values[i];
  }
  return m;
}

}  // namespace fvlab
