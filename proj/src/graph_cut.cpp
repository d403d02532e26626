#include "cetrace/graph_cut.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <queue>

#include "cetrace/error.hpp"

namespace cetrace {
namespace {

// Dinic's algorithm on a residual graph with paired forward/backward arcs.
class MaxFlow {
 public:
  explicit MaxFlow(int nodes) : head_(nodes, -1), level_(nodes), cursor_(nodes) {}

  void add_arc(int from, int to, double cap, double reverse_cap = 0.0) {
    arcs_.push_back({to, head_[from], cap});
    head_[from] = static_cast<int>(arcs_.size()) - 1;
    arcs_.push_back({from, head_[to], reverse_cap});
    head_[to] = static_cast<int>(arcs_.size()) - 1;
    scale_ = std::max({scale_, cap, reverse_cap});
  }

  void run(int source, int sink) {
    eps_ = 1e-13 * std::max(scale_, 1.0);
    while (bfs(source, sink)) {
      cursor_ = head_;
      while (push(source, sink, std::numeric_limits<double>::infinity()) > eps_) {
      }
    }
  }

  /// Nodes reachable from the source through arcs with residual capacity.
  std::vector<std::uint8_t> source_side(int source) const {
    std::vector<std::uint8_t> seen(head_.size(), 0);
    std::vector<int> stack{source};
    seen[source] = 1;
    while (!stack.empty()) {
      const int u = stack.back();
      stack.pop_back();
      for (int a = head_[u]; a >= 0; a = arcs_[a].next) {
        if (arcs_[a].cap > eps_ && !seen[arcs_[a].to]) {
          seen[arcs_[a].to] = 1;
          stack.push_back(arcs_[a].to);
        }
      }
    }
    return seen;
  }

 private:
  struct Arc {
    int to;
    int next;
    double cap;
  };

  bool bfs(int source, int sink) {
    std::fill(level_.begin(), level_.end(), -1);
    std::queue<int> q;
    level_[source] = 0;
    q.push(source);
    while (!q.empty()) {
      const int u = q.front();
      q.pop();
      for (int a = head_[u]; a >= 0; a = arcs_[a].next) {
        if (arcs_[a].cap > eps_ && level_[arcs_[a].to] < 0) {
          level_[arcs_[a].to] = level_[u] + 1;
          q.push(arcs_[a].to);
        }
      }
    }
    return level_[sink] >= 0;
  }

  double push(int u, int sink, double limit) {
    if (u == sink) return limit;
    for (int& a = cursor_[u]; a >= 0; a = arcs_[a].next) {
      Arc& arc = arcs_[a];
      if (arc.cap <= eps_ || level_[arc.to] != level_[u] + 1) continue;
      const double pushed = push(arc.to, sink, std::min(limit, arc.cap));
      if (pushed > eps_) {
        arc.cap -= pushed;
        arcs_[a ^ 1].cap += pushed;
        return pushed;
      }
    }
    return 0.0;
  }

  std::vector<Arc> arcs_;
  std::vector<int> head_;
  std::vector<int> level_;
  std::vector<int> cursor_;
  double scale_ = 0.0;
  double eps_ = 0.0;
};

}  // namespace

double labeling_energy(std::span<const UnaryCosts> unaries, std::span<const Edge> edges, double beta,
                       std::span<const std::uint8_t> labels) {
  if (labels.size() != unaries.size()) throw InputError("label count does not match unary count");
  double energy = 0.0;
  for (std::size_t k = 0; k < unaries.size(); ++k) energy += unaries[k][labels[k] ? 1 : 0];
  std::size_t cut = 0;
  for (const Edge& e : edges) cut += (labels[e.first] != 0) != (labels[e.second] != 0);
  return energy + 2.0 * beta * static_cast<double>(cut);
}

std::vector<std::uint8_t> graph_cut_labels(std::span<const UnaryCosts> unaries, std::span<const Edge> edges,
                                           double beta) {
  if (!(beta >= 0.0) || !std::isfinite(beta)) throw InputError("beta must be finite and >= 0");
  const int sites = static_cast<int>(unaries.size());
  for (const UnaryCosts& u : unaries) {
    if (!std::isfinite(u[0]) || !std::isfinite(u[1])) throw InputError("unary energies must be finite");
  }
  for (const Edge& e : edges) {
    if (e.first < 0 || e.second < 0 || e.first >= sites || e.second >= sites || e.first == e.second) {
      throw InputError("edge refers to an invalid site");
    }
  }
  const int source = sites;
  const int sink = sites + 1;
  MaxFlow flow(sites + 2);
  // Sink side is label 0, source side label 1: the arc from the source is cut
  // when a site takes label 0 and the arc to the sink when it takes label 1.
  for (int k = 0; k < sites; ++k) {
    const double base = std::min(unaries[k][0], unaries[k][1]);
    const double cost0 = unaries[k][0] - base;
    const double cost1 = unaries[k][1] - base;
    if (cost0 > 0.0) flow.add_arc(source, k, cost0);
    if (cost1 > 0.0) flow.add_arc(k, sink, cost1);
  }
  const double weight = 2.0 * beta;
  if (weight > 0.0) {
    for (const Edge& e : edges) flow.add_arc(e.first, e.second, weight, weight);
  }
  flow.run(source, sink);
  const std::vector<std::uint8_t> side = flow.source_side(source);
  return std::vector<std::uint8_t>(side.begin(), side.begin() + sites);
}

}  // namespace cetrace
