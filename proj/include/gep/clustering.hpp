#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "gep/instance.hpp"

namespace gep {

// Ordered contiguous clustering of the time axis: ranges [start_k, end_k)
// cover 0..T-1 without gaps, so chronology is preserved by construction.
struct ChronoPartition {
  struct Range {
    int start = 0;
    int end = 0;  // exclusive
    int size() const { return end - start; }
  };
  std::vector<Range> ranges;

  int num_clusters() const { return static_cast<int>(ranges.size()); }
  int num_periods() const { return ranges.empty() ? 0 : ranges.back().end; }

  // Throws std::invalid_argument unless the ranges are non-empty, ordered,
  // disjoint and cover [0, T).
  void validate() const;

  static ChronoPartition singletons(int T);
  static ChronoPartition from_breakpoints(int T, const std::vector<int>& cuts);

  std::string to_text() const;  // "(start,end)" pairs, one per line
  static ChronoPartition from_text(const std::string& text);
};

// Per-period feature rows (demand, capacity factors, reference values) used
// by the clustering techniques.
struct FeatureMatrix {
  Mat rows;  // T x d

  int num_periods() const { return static_cast<int>(rows.rows()); }
  int dim() const { return static_cast<int>(rows.cols()); }
};

// Features from an instance; z-scored per column when standardize is set
// (constant columns are left centered at zero).
FeatureMatrix make_features(const GepInstance& inst, bool standardize = true);

// K-1 breakpoints uniform without replacement from {1..T-1}.
ChronoPartition sequential_partition(int T, int K, std::uint64_t seed);

// Near-equal blocks, remainder spread over the first T mod K blocks.
ChronoPartition uniform_partition(int T, int K);

// Lloyd's algorithm with k-means++ seeding; labels are per period and not
// necessarily chronological. Ties break toward the lower centroid index.
std::vector<int> kmeans_assign(const FeatureMatrix& features, int K, std::uint64_t seed);

// Diagonal-covariance Gaussian mixture fitted by EM (max 200 iterations,
// variance floor 1e-6); labels are argmax responsibilities.
std::vector<int> gmm_assign(const FeatureMatrix& features, int K, std::uint64_t seed);

// Log-likelihood trajectory of the EM fit behind gmm_assign (one entry per
// iteration); exposed for monotonicity checks.
std::vector<double> gmm_log_likelihoods(const FeatureMatrix& features, int K,
                                        std::uint64_t seed);

// Recovers a chronological partition from unconstrained labels: centroids are
// fixed from the labelling, then a dynamic program picks the contiguous
// K-segmentation minimizing total squared distance to each segment's best
// centroid. Reduces to the run partition when labels are already contiguous.
ChronoPartition chronologize(const std::vector<int>& labels, const FeatureMatrix& features,
                             int K);

// Exact minimum-SSE contiguous K-segmentation (O(T^2 K) dynamic program).
ChronoPartition dp_segmentation(const FeatureMatrix& features, int K);

// Total within-segment sum of squared errors of a partition, each segment
// scored against its own mean.
double partition_sse(const FeatureMatrix& features, const ChronoPartition& partition);

enum class ClusterMethod { Sequential, Uniform, KMeans, Gmm, DpSegmentation };

const char* to_string(ClusterMethod m);
ClusterMethod cluster_method_from_string(const std::string& s);

// One-call front end used by the bounds loop.
ChronoPartition make_partition(ClusterMethod method, const FeatureMatrix& features, int K,
                               std::uint64_t seed);

}  // namespace gep
