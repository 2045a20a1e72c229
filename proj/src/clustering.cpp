#include "mfa/clustering.hpp"

#include <algorithm>
#include <optional>
#include <queue>
#include <set>

namespace mfa {

namespace {

/// Mean tangent over an index subset, stacked column-wise (unit weights).
TangentBasis mean_over_members(std::span<const int> members,
                               const std::vector<TangentBasis>& tangents) {
  const TangentBasis& first = tangents[static_cast<std::size_t>(members.front())];
  const Index n = first.ambient_dim();
  const Index d = first.subspace_dim();
  Matrix stack(n, static_cast<Index>(members.size()) * d);
  for (std::size_t i = 0; i < members.size(); ++i)
    stack.middleCols(static_cast<Index>(i) * d, d) =
        tangents[static_cast<std::size_t>(members[i])].matrix();
  return TangentBasis(dominant_subspace(stack, d));
}

struct DistanceSums {
  double sum = 0.0;
  double sq_sum = 0.0;
};

DistanceSums distance_sums(std::span<const int> members,
                           const std::vector<TangentBasis>& tangents,
                           const TangentBasis& mean) {
  DistanceSums sums;
  for (int x : members) {
    const double dist = projection_distance(tangents[static_cast<std::size_t>(x)], mean);
    sums.sum += dist;
    sums.sq_sum += dist * dist;
  }
  return sums;
}

std::vector<int> merged_members(const Cluster& ci, const Cluster& cj) {
  std::vector<int> members;
  members.reserve(ci.members.size() + cj.members.size());
  std::merge(ci.members.begin(), ci.members.end(), cj.members.begin(), cj.members.end(),
             std::back_inserter(members));
  return members;
}

}  // namespace

Cluster build_cluster(int id, std::vector<int> members,
                      const std::vector<TangentBasis>& tangents) {
  if (members.empty()) throw std::invalid_argument("cluster: empty member set");
  std::sort(members.begin(), members.end());
  Cluster cluster;
  cluster.id = id;
  cluster.members = std::move(members);
  cluster.mean = mean_over_members(cluster.members, tangents);
  const DistanceSums sums = distance_sums(cluster.members, tangents, cluster.mean);
  cluster.dist_sum = sums.sum;
  cluster.sq_dist_sum = sums.sq_sum;
  return cluster;
}

double dissimilarity_bound(const Cluster& ci, const Cluster& cj) {
  const double dist = projection_distance(ci.mean, cj.mean);
  return (ci.size() + cj.size()) * dist * dist +
         2.0 * dist * (ci.dist_sum + cj.dist_sum);
}

double dissimilarity_exact(const Cluster& ci, const Cluster& cj,
                           const std::vector<TangentBasis>& tangents) {
  const std::vector<int> members = merged_members(ci, cj);
  const TangentBasis mean = mean_over_members(members, tangents);
  const DistanceSums sums = distance_sums(members, tangents, mean);
  return sums.sq_sum - ci.sq_dist_sum - cj.sq_dist_sum;
}

Cluster merge_clusters(const Cluster& ci, const Cluster& cj,
                       const std::vector<TangentBasis>& tangents, int new_id) {
  if (ci.neighbor_ids.count(cj.id) == 0 || cj.neighbor_ids.count(ci.id) == 0)
    throw std::invalid_argument("merge: clusters " + std::to_string(ci.id) + " and " +
                                std::to_string(cj.id) + " are not fusible");
  Cluster merged = build_cluster(new_id, merged_members(ci, cj), tangents);
  std::set_union(ci.neighbor_ids.begin(), ci.neighbor_ids.end(),
                 cj.neighbor_ids.begin(), cj.neighbor_ids.end(),
                 std::inserter(merged.neighbor_ids, merged.neighbor_ids.end()));
  merged.neighbor_ids.erase(ci.id);
  merged.neighbor_ids.erase(cj.id);
  return merged;
}

double Partition::objective() const {
  double total = 0.0;
  for (const Cluster& cluster : clusters) total += cluster.sq_dist_sum;
  return total;
}

namespace {

struct Candidate {
  double cost;
  int a, b;  // a < b

  bool operator>(const Candidate& other) const {
    if (cost != other.cost) return cost > other.cost;
    if (a != other.a) return a > other.a;
    return b > other.b;
  }
};

class MergeEngine {
 public:
  MergeEngine(const NeighborGraph& graph, const std::vector<TangentBasis>& tangents,
              int target, const AcdtOptions& options)
      : graph_(graph), tangents_(tangents), target_(target), options_(options) {}

  AcdtResult run() {
    const int m = graph_.node_count();
    init_singletons();
    seed_candidates();

    AcdtResult result;
    std::set<int> snapshot_points(options_.snapshot_at.begin(), options_.snapshot_at.end());
    int live = m;
    if (snapshot_points.count(live)) result.snapshots[live] = current_labels();

    int merges = 0;
    while (live > target_) {
      const Candidate best = pop_valid();
      apply_merge(best.a, best.b);
      --live;
      ++merges;
      if (options_.verify_feasibility) verify_all_feasible();
      if (snapshot_points.count(live)) result.snapshots[live] = current_labels();
      if (options_.on_merge) options_.on_merge(merges, live);
    }

    result.iterations = merges;
    result.partition = current_partition();
    return result;
  }

 private:
  void init_singletons() {
    const int m = graph_.node_count();
    clusters_.resize(static_cast<std::size_t>(m));
    for (int i = 0; i < m; ++i) {
      Cluster& cluster = clusters_[static_cast<std::size_t>(i)].emplace();
      cluster.id = i;
      cluster.members = {i};
      cluster.mean = tangents_[static_cast<std::size_t>(i)];
      const auto& adj = graph_.adjacency[static_cast<std::size_t>(i)];
      cluster.neighbor_ids.insert(adj.begin(), adj.end());
    }
    next_id_ = m;
  }

  void seed_candidates() {
    for (int i = 0; i < graph_.node_count(); ++i)
      for (int j : graph_.adjacency[static_cast<std::size_t>(i)])
        if (i < j) push_candidate(i, j);
  }

  void push_candidate(int a, int b) {
    const Cluster& ca = *clusters_[static_cast<std::size_t>(a)];
    const Cluster& cb = *clusters_[static_cast<std::size_t>(b)];
    const double cost = options_.mode == DissimilarityMode::kBound
                            ? dissimilarity_bound(ca, cb)
                            : dissimilarity_exact(ca, cb, tangents_);
    heap_.push({cost, std::min(a, b), std::max(a, b)});
  }

  Candidate pop_valid() {
    while (!heap_.empty()) {
      const Candidate top = heap_.top();
      heap_.pop();
      // Entries touching merged (dead) clusters are invalidated lazily. Both
      // endpoints alive implies the pair is still adjacent: cluster adjacency
      // only ever grows under merges.
      if (clusters_[static_cast<std::size_t>(top.a)] &&
          clusters_[static_cast<std::size_t>(top.b)])
        return top;
    }
    throw InfeasibleError("acdt: no fusible pair left");
  }

  void apply_merge(int a, int b) {
    const Cluster merged =
        merge_clusters(*clusters_[static_cast<std::size_t>(a)],
                       *clusters_[static_cast<std::size_t>(b)], tangents_, next_id_);
    ++next_id_;
    clusters_[static_cast<std::size_t>(a)].reset();
    clusters_[static_cast<std::size_t>(b)].reset();
    clusters_.push_back(merged);
    for (int nbr : merged.neighbor_ids) {
      Cluster& other = *clusters_[static_cast<std::size_t>(nbr)];
      other.neighbor_ids.erase(a);
      other.neighbor_ids.erase(b);
      other.neighbor_ids.insert(merged.id);
    }
    // Fresh entries for the new cluster only; pairs between untouched
    // clusters keep their original costs.
    for (int nbr : merged.neighbor_ids) push_candidate(nbr, merged.id);
  }

  std::vector<const Cluster*> live_by_min_member() const {
    std::vector<const Cluster*> live;
    for (const auto& slot : clusters_)
      if (slot) live.push_back(&*slot);
    std::sort(live.begin(), live.end(), [](const Cluster* x, const Cluster* y) {
      return x->members.front() < y->members.front();
    });
    return live;
  }

  std::vector<int> current_labels() const {
    std::vector<int> labels(static_cast<std::size_t>(graph_.node_count()), -1);
    const auto live = live_by_min_member();
    for (std::size_t c = 0; c < live.size(); ++c)
      for (int x : live[c]->members) labels[static_cast<std::size_t>(x)] = static_cast<int>(c);
    return labels;
  }

  Partition current_partition() const {
    Partition partition;
    for (const Cluster* cluster : live_by_min_member()) partition.clusters.push_back(*cluster);
    partition.labels = current_labels();
    return partition;
  }

  void verify_all_feasible() const {
    for (const auto& slot : clusters_)
      if (slot && !is_feasible_cluster(graph_, slot->members))
        throw std::logic_error("acdt: cluster " + std::to_string(slot->id) +
                               " lost connectivity");
  }

  const NeighborGraph& graph_;
  const std::vector<TangentBasis>& tangents_;
  int target_;
  const AcdtOptions& options_;

  std::vector<std::optional<Cluster>> clusters_;  // indexed by cluster id
  std::priority_queue<Candidate, std::vector<Candidate>, std::greater<Candidate>> heap_;
  int next_id_ = 0;
};

}  // namespace

AcdtResult acdt(const NeighborGraph& graph, const std::vector<TangentBasis>& tangents,
                int target_clusters, const AcdtOptions& options) {
  const int m = graph.node_count();
  if (static_cast<std::size_t>(m) != tangents.size())
    throw std::invalid_argument("acdt: graph/tangent size mismatch");
  if (target_clusters < 1 || target_clusters > m)
    throw std::invalid_argument("acdt: target cluster count " +
                                std::to_string(target_clusters) +
                                " out of range [1, " + std::to_string(m) + "]");
  const int components = component_count(graph);
  if (target_clusters < components)
    throw InfeasibleError("acdt: graph has " + std::to_string(components) +
                          " connected components; cannot reach " +
                          std::to_string(target_clusters) + " clusters");
  return MergeEngine(graph, tangents, target_clusters, options).run();
}

AcdtResult acdt(const SampleSet& samples, int k, int target_clusters, Index d,
                const AcdtOptions& options) {
  validate(samples);
  if (d < 1 || d > samples.dim())
    throw std::invalid_argument("acdt: need 1 <= d <= N");
  const NeighborGraph graph = build_knn_graph(samples, k, options.threads);
  const std::vector<TangentBasis> tangents =
      estimate_tangents(samples, graph, d, options.threads);
  return acdt(graph, tangents, target_clusters, options);
}

}  // namespace mfa
