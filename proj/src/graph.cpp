#include "mfa/graph.hpp"

#include <algorithm>
#include <fstream>
#include <numeric>

#include "mfa/parallel.hpp"

namespace mfa {

NeighborGraph NeighborGraph::from_edges(int n, std::span<const std::pair<int, int>> edges) {
  if (n < 0) throw std::invalid_argument("graph: negative node count");
  NeighborGraph graph;
  graph.adjacency.resize(static_cast<std::size_t>(n));
  for (const auto& [a, b] : edges) {
    if (a < 0 || a >= n || b < 0 || b >= n)
      throw std::invalid_argument("graph: edge endpoint out of range");
    if (a == b) throw std::invalid_argument("graph: self-loop");
    graph.adjacency[static_cast<std::size_t>(a)].push_back(b);
    graph.adjacency[static_cast<std::size_t>(b)].push_back(a);
  }
  for (auto& adj : graph.adjacency) {
    std::sort(adj.begin(), adj.end());
    adj.erase(std::unique(adj.begin(), adj.end()), adj.end());
  }
  return graph;
}

NeighborGraph build_knn_graph(const SampleSet& samples, int k, int threads) {
  const Index m = samples.count();
  if (k < 1) throw std::invalid_argument("knn: k must be >= 1");
  if (k >= m)
    throw std::invalid_argument("knn: k = " + std::to_string(k) +
                                " must be smaller than the sample count " +
                                std::to_string(m));

  // k nearest of each query, ties toward the smaller index.
  std::vector<std::vector<int>> nearest(static_cast<std::size_t>(m));
  parallel_for(m, threads, [&](std::int64_t begin, std::int64_t end) {
    std::vector<std::pair<double, int>> dist(static_cast<std::size_t>(m - 1));
    for (std::int64_t i = begin; i < end; ++i) {
      std::size_t w = 0;
      for (Index j = 0; j < m; ++j) {
        if (j == i) continue;
        dist[w++] = {(samples.data.row(i) - samples.data.row(j)).squaredNorm(),
                     static_cast<int>(j)};
      }
      std::partial_sort(dist.begin(), dist.begin() + k, dist.end());
      auto& out = nearest[static_cast<std::size_t>(i)];
      out.resize(static_cast<std::size_t>(k));
      for (int q = 0; q < k; ++q) out[static_cast<std::size_t>(q)] = dist[static_cast<std::size_t>(q)].second;
    }
  });

  NeighborGraph graph;
  graph.adjacency.resize(static_cast<std::size_t>(m));
  for (Index i = 0; i < m; ++i)
    for (int j : nearest[static_cast<std::size_t>(i)]) {
      graph.adjacency[static_cast<std::size_t>(i)].push_back(j);
      graph.adjacency[static_cast<std::size_t>(j)].push_back(static_cast<int>(i));
    }
  for (auto& adj : graph.adjacency) {
    std::sort(adj.begin(), adj.end());
    adj.erase(std::unique(adj.begin(), adj.end()), adj.end());
  }
  return graph;
}

const std::vector<int>& neighbors(const NeighborGraph& graph, int i) {
  if (i < 0 || i >= graph.node_count())
    throw std::invalid_argument("graph: node index " + std::to_string(i) +
                                " out of range");
  return graph.adjacency[static_cast<std::size_t>(i)];
}

std::vector<int> connected_components(const NeighborGraph& graph) {
  const int n = graph.node_count();
  // Union-find with path halving.
  std::vector<int> parent(static_cast<std::size_t>(n));
  std::iota(parent.begin(), parent.end(), 0);
  auto find = [&parent](int x) {
    while (parent[static_cast<std::size_t>(x)] != x) {
      parent[static_cast<std::size_t>(x)] =
          parent[static_cast<std::size_t>(parent[static_cast<std::size_t>(x)])];
      x = parent[static_cast<std::size_t>(x)];
    }
    return x;
  };
  for (int i = 0; i < n; ++i)
    for (int j : graph.adjacency[static_cast<std::size_t>(i)]) {
      const int ri = find(i), rj = find(j);
      if (ri != rj) parent[static_cast<std::size_t>(std::max(ri, rj))] = std::min(ri, rj);
    }
  std::vector<int> component(static_cast<std::size_t>(n), -1);
  int next_id = 0;
  for (int i = 0; i < n; ++i) {
    const int root = find(i);
    if (component[static_cast<std::size_t>(root)] < 0)
      component[static_cast<std::size_t>(root)] = next_id++;
    component[static_cast<std::size_t>(i)] = component[static_cast<std::size_t>(root)];
  }
  return component;
}

int component_count(const NeighborGraph& graph) {
  const std::vector<int> component = connected_components(graph);
  return component.empty() ? 0 : 1 + *std::max_element(component.begin(), component.end());
}

bool is_feasible_cluster(const NeighborGraph& graph, std::span<const int> members) {
  if (members.empty()) throw std::invalid_argument("feasibility: empty member set");
  const int n = graph.node_count();
  // Membership mask; -1 = outside, 0 = unvisited member, 1 = visited.
  std::vector<signed char> state(static_cast<std::size_t>(n), -1);
  for (int v : members) {
    if (v < 0 || v >= n)
      throw std::invalid_argument("feasibility: member index out of range");
    state[static_cast<std::size_t>(v)] = 0;
  }
  std::vector<int> stack{members.front()};
  state[static_cast<std::size_t>(members.front())] = 1;
  std::size_t visited = 1;
  while (!stack.empty()) {
    const int v = stack.back();
    stack.pop_back();
    for (int u : graph.adjacency[static_cast<std::size_t>(v)])
      if (state[static_cast<std::size_t>(u)] == 0) {
        state[static_cast<std::size_t>(u)] = 1;
        ++visited;
        stack.push_back(u);
      }
  }
  return visited == members.size();
}

void save_edge_list(const NeighborGraph& graph, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write file: " + path.string());
  for (int i = 0; i < graph.node_count(); ++i)
    for (int j : graph.adjacency[static_cast<std::size_t>(i)])
      if (i < j) out << i << ' ' << j << '\n';
}

}  // namespace mfa
