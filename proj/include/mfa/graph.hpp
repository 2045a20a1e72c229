#pragma once

#include <filesystem>
#include <span>
#include <utility>
#include <vector>

#include "mfa/dataset.hpp"
#include "mfa/types.hpp"

namespace mfa {

/// Undirected symmetric neighbor graph over sample indices. Adjacency lists
/// are sorted, self-loop free, and mirror each other (j in adj(i) iff i in
/// adj(j)). Isolated nodes keep an empty list.
struct NeighborGraph {
  std::vector<std::vector<int>> adjacency;

  int node_count() const { return static_cast<int>(adjacency.size()); }

  static NeighborGraph from_edges(int n, std::span<const std::pair<int, int>> edges);
};

/// Exact brute-force k-NN graph, symmetrized by union: (i, j) is an edge iff
/// j is among the k nearest of i or i among the k nearest of j. Distance ties
/// are broken toward the smaller index, so the graph is deterministic.
NeighborGraph build_knn_graph(const SampleSet& samples, int k, int threads = 0);

const std::vector<int>& neighbors(const NeighborGraph& graph, int i);

/// Component id per node; ids are dense and assigned in order of the first
/// node seen in each component.
std::vector<int> connected_components(const NeighborGraph& graph);

int component_count(const NeighborGraph& graph);

/// True iff the subgraph induced on members is connected (every pair joined
/// by a path that stays inside the member set).
bool is_feasible_cluster(const NeighborGraph& graph, std::span<const int> members);

/// Edge list dump, one "i j" line per edge with i < j, sorted.
void save_edge_list(const NeighborGraph& graph, const std::filesystem::path& path);

}  // namespace mfa
