#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <functional>
#include <future>
#include <string>
#include <vector>

#include "infodensity/error.hpp"
#include "infodensity/linalg.hpp"
#include "infodensity/model.hpp"

namespace infodensity {

inline constexpr std::uint64_t kDefaultLoopCap = 10'000'000;

/// Rooted directed loop q_1 -> q_2 -> ... -> q_l -> q_1 on the complete
/// digraph without self-arrows. Nodes are zero-based block indices.
struct DirectedLoop {
  std::vector<Index> nodes;

  [[nodiscard]] int length() const noexcept { return static_cast<int>(nodes.size()); }
  [[nodiscard]] Index root() const { return nodes.front(); }

  friend bool operator==(const DirectedLoop&, const DirectedLoop&) = default;
};

/// Number of rooted l-loops on N nodes, tr[(J - I)^l] = (N-1)^l + (-1)^l (N-1).
[[nodiscard]] inline double rooted_loop_count(Index nodes, int l) {
  if (l < 2) return 0.0;
  const double m = static_cast<double>(nodes - 1);
  return std::pow(m, l) + ((l % 2 == 0) ? m : -m);
}

/// Cap from INFODENSITY_LOOP_CAP when set to a positive integer, else the default.
[[nodiscard]] inline std::uint64_t loop_cap_from_env() {
  if (const char* raw = std::getenv("INFODENSITY_LOOP_CAP")) {
    char* end = nullptr;
    const unsigned long long v = std::strtoull(raw, &end, 10);
    if (end != raw && *end == '\0' && v > 0) return static_cast<std::uint64_t>(v);
  }
  return kDefaultLoopCap;
}

namespace detail {

inline void check_loop_arguments(Index nodes, int l, std::uint64_t cap) {
  if (nodes < 2) throw Error(ErrorCode::InvalidParameter, "loop enumeration needs N >= 2 nodes");
  if (l < 1) throw Error(ErrorCode::InvalidParameter, "loop length must be >= 1");
  const double count = rooted_loop_count(nodes, l);
  if (count > static_cast<double>(cap)) throw CombinatorialLimitError(l, count, cap);
}

/// Depth-first, lexicographic walk over all rooted l-loops starting at `root`.
inline void visit_loops_from(Index nodes, int l, Index root,
                             const std::function<void(const std::vector<Index>&)>& visit) {
  if (l < 2) return;
  std::vector<Index> path(static_cast<std::size_t>(l));
  path[0] = root;
  std::function<void(int)> step = [&](int depth) {
    if (depth == l) {
      if (path.back() != root) visit(path);
      return;
    }
    for (Index q = 0; q < nodes; ++q) {
      if (q == path[static_cast<std::size_t>(depth - 1)]) continue;
      path[static_cast<std::size_t>(depth)] = q;
      step(depth + 1);
    }
  };
  step(1);
}

}  // namespace detail

/// All rooted l-loops on the complete N-node digraph, each cyclic arrow
/// sequence once per starting node. Ordered by root, then lexicographically.
[[nodiscard]] inline std::vector<DirectedLoop> enumerate_loops(Index nodes, int l,
                                                               std::uint64_t cap = kDefaultLoopCap) {
  detail::check_loop_arguments(nodes, l, cap);
  std::vector<DirectedLoop> loops;
  loops.reserve(static_cast<std::size_t>(rooted_loop_count(nodes, l)));
  for (Index root = 0; root < nodes; ++root) {
    detail::visit_loops_from(nodes, l, root, [&](const std::vector<Index>& p) { loops.push_back({p}); });
  }
  return loops;
}

/// tau(p) = tr(Gamma_{q_1|q_l} Gamma_{q_l|q_{l-1}} ... Gamma_{q_2|q_1}); the
/// closing arrow's block is leftmost.
[[nodiscard]] inline double tau(const DirectedLoop& loop, const GammaMatrix& gamma) {
  const auto& q = loop.nodes;
  if (q.size() < 2) return 0.0;
  const Index n = gamma.partition().block_count();
  for (Index v : q) {
    if (v < 0 || v >= n) throw Error(ErrorCode::InvalidParameter, "loop node outside the partition");
  }
  Eigen::MatrixXd product = gamma.block(q[1], q[0]);
  for (std::size_t k = 2; k < q.size(); ++k) product = (gamma.block(q[k], q[k - 1]) * product).eval();
  return (gamma.block(q.front(), q.back()) * product).trace();
}

namespace detail {

/// Sum of tau over loops rooted at `root`, products accumulated along the
/// DFS prefix. Pairwise reduction in enumeration order.
[[nodiscard]] inline double loop_sum_from(const GammaMatrix& gamma, int l, Index root) {
  const Index nodes = gamma.partition().block_count();
  std::vector<double> taus;
  std::vector<Eigen::MatrixXd> prefix(static_cast<std::size_t>(l));
  std::vector<Index> path(static_cast<std::size_t>(l));
  path[0] = root;
  std::function<void(int)> step = [&](int depth) {
    const Index prev = path[static_cast<std::size_t>(depth - 1)];
    if (depth == l) {
      if (prev != root) {
        taus.push_back((gamma.block(root, prev) * prefix[static_cast<std::size_t>(depth - 1)]).trace());
      }
      return;
    }
    for (Index q = 0; q < nodes; ++q) {
      if (q == prev) continue;
      path[static_cast<std::size_t>(depth)] = q;
      if (depth == 1) {
        prefix[1] = gamma.block(q, prev);
      } else {
        prefix[static_cast<std::size_t>(depth)] = gamma.block(q, prev) * prefix[static_cast<std::size_t>(depth - 1)];
      }
      step(depth + 1);
    }
  };
  if (l >= 2) step(1);
  return pairwise_sum(taus);
}

}  // namespace detail

/// Sum of tau over rooted loops starting at `root`; equals tr[(Gamma^l)_{root,root}].
[[nodiscard]] inline double trace_via_loops_from(const GammaMatrix& gamma, int l, Index root,
                                                 std::uint64_t cap = kDefaultLoopCap) {
  detail::check_loop_arguments(gamma.partition().block_count(), l, cap);
  return detail::loop_sum_from(gamma, l, root);
}

/// tr(Gamma^l) as the sum of tau over all rooted l-loops. Roots are evaluated
/// concurrently; the reduction is pairwise over roots in index order, so the
/// result does not depend on scheduling.
[[nodiscard]] inline double trace_via_loops(const GammaMatrix& gamma, int l,
                                            std::uint64_t cap = kDefaultLoopCap) {
  const Index nodes = gamma.partition().block_count();
  detail::check_loop_arguments(nodes, l, cap);
  if (l < 2) return 0.0;
  std::vector<std::future<double>> parts;
  parts.reserve(static_cast<std::size_t>(nodes));
  for (Index root = 0; root < nodes; ++root) {
    parts.push_back(std::async(std::launch::async, [&gamma, l, root] { return detail::loop_sum_from(gamma, l, root); }));
  }
  std::vector<double> sums;
  sums.reserve(parts.size());
  for (auto& f : parts) sums.push_back(f.get());
  return pairwise_sum(sums);
}

}  // namespace infodensity
