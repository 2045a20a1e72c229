#pragma once

#include <functional>
#include <map>
#include <set>
#include <vector>

#include "mfa/grassmann.hpp"

namespace mfa {

/// A live cluster in the agglomerative merge loop. `sq_dist_sum` is the
/// cluster's criterion value (tangent variance around the mean tangent);
/// `dist_sum` caches the first-power distances the merge-cost bound needs.
struct Cluster {
  int id = -1;
  std::vector<int> members;  // sorted sample indices
  TangentBasis mean;
  double dist_sum = 0.0;     // sum of D_T(M_x, mean) over members
  double sq_dist_sum = 0.0;  // sum of D_T^2(M_x, mean) over members
  std::set<int> neighbor_ids;

  int size() const { return static_cast<int>(members.size()); }
};

/// Builds a cluster from scratch: mean tangent plus exact distance sums.
/// neighbor_ids is left empty; the caller wires adjacency.
Cluster build_cluster(int id, std::vector<int> members,
                      const std::vector<TangentBasis>& tangents);

/// Upper bound on the merge cost:
///   (|Ci| + |Cj|) D^2 + 2 D (dist_sum_i + dist_sum_j)
/// with D the projection distance between the cluster means. Requires exactly
/// one new tangent-distance evaluation.
double dissimilarity_bound(const Cluster& ci, const Cluster& cj);

/// Exact merge cost p(Ci u Cj) - p(Ci) - p(Cj); recomputes the union's
/// extrinsic mean. Always >= 0 up to rounding.
double dissimilarity_exact(const Cluster& ci, const Cluster& cj,
                           const std::vector<TangentBasis>& tangents);

/// Merges two adjacent clusters: unioned members, mean recomputed exactly
/// over all member tangents, distance sums recomputed, neighbor set unioned
/// minus the parents. Throws if the pair is not fusible (no graph edge, as
/// witnessed by the neighbor sets).
Cluster merge_clusters(const Cluster& ci, const Cluster& cj,
                       const std::vector<TangentBasis>& tangents, int new_id);

enum class DissimilarityMode { kBound, kExact };

struct Partition {
  std::vector<Cluster> clusters;  // ordered by smallest member index
  std::vector<int> labels;        // per sample: index into clusters

  std::size_t cluster_count() const { return clusters.size(); }
  /// Total criterion value: sum of per-cluster tangent variances.
  double objective() const;
};

struct AcdtOptions {
  DissimilarityMode mode = DissimilarityMode::kBound;
  int threads = 0;
  /// Re-checks the connectivity invariant of every live cluster after each
  /// merge; throws std::logic_error on the first violation.
  bool verify_feasibility = false;
  /// Cluster counts at which to record intermediate label vectors.
  std::vector<int> snapshot_at;
  /// Invoked after every merge with (merges_done, clusters_left).
  std::function<void(int, int)> on_merge;
};

struct AcdtResult {
  Partition partition;
  int iterations = 0;
  std::map<int, std::vector<int>> snapshots;  // cluster count -> labels
};

/// Greedy agglomerative merge loop over precomputed tangents: starts from
/// singletons and repeatedly merges the graph-adjacent pair with the minimum
/// dissimilarity (bound or exact mode) until `target_clusters` remain.
/// Ties are broken toward the smallest (min id, max id) pair. Deterministic
/// for fixed inputs and mode.
AcdtResult acdt(const NeighborGraph& graph, const std::vector<TangentBasis>& tangents,
                int target_clusters, const AcdtOptions& options = {});

/// Full pipeline: builds the k-NN graph, estimates per-sample tangents of
/// dimension d, then runs the merge loop.
AcdtResult acdt(const SampleSet& samples, int k, int target_clusters, Index d,
                const AcdtOptions& options = {});

}  // namespace mfa
