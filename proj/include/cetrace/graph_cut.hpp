#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <utility>
#include <vector>

namespace cetrace {

/// Undirected neighbor pair, listed once.
using Edge = std::pair<int, int>;
/// Cost of label 0 and label 1 for one site.
using UnaryCosts = std::array<double, 2>;

/// sum_k U_k(y_k) + beta * sum_k sum_{k' in N(k)} |y_k - y_k'|. The double sum
/// visits every undirected edge from both ends, so each disagreement costs 2 beta.
double labeling_energy(std::span<const UnaryCosts> unaries, std::span<const Edge> edges, double beta,
                       std::span<const std::uint8_t> labels);

/// Exact minimizer of labeling_energy via max-flow / min-cut. Among optimal
/// labelings, the one with the fewest label-1 sites (the minimal source set)
/// is returned. Throws InputError on non-finite unaries or negative beta.
std::vector<std::uint8_t> graph_cut_labels(std::span<const UnaryCosts> unaries, std::span<const Edge> edges,
                                           double beta);

}  // namespace cetrace
