#include "gep/clustering.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>
#include <stdexcept>

#include "gep/kernels.hpp"
#include "gep/rng.hpp"

namespace gep {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

void check_k(int T, int K) {
  if (K < 1) throw std::invalid_argument("cluster count must be >= 1");
  if (K > T) throw std::invalid_argument("cluster count exceeds the number of periods");
}

// k-means++ seeding; returns K row indices.
std::vector<int> seed_centers(const Mat& rows, int K, Rng& rng) {
  const int T = static_cast<int>(rows.rows());
  const int d = static_cast<int>(rows.cols());
  std::vector<int> centers;
  centers.push_back(static_cast<int>(rng.next_below(T)));
  Vec dist(T);
  for (int t = 0; t < T; ++t)
    dist[t] = kern::sq_dist(rows.row(t).data(), rows.row(centers[0]).data(), d);
  while (static_cast<int>(centers.size()) < K) {
    const double total = dist.sum();
    int pick = -1;
    if (total > 0.0) {
      double target = rng.next_double() * total;
      for (int t = 0; t < T; ++t) {
        target -= dist[t];
        if (target <= 0.0) {
          pick = t;
          break;
        }
      }
      if (pick < 0) pick = T - 1;
    } else {
      // All remaining points coincide with a center; take the first unused.
      std::vector<char> used(T, 0);
      for (int c : centers) used[c] = 1;
      for (int t = 0; t < T; ++t)
        if (!used[t]) {
          pick = t;
          break;
        }
      if (pick < 0) pick = 0;
    }
    centers.push_back(pick);
    for (int t = 0; t < T; ++t)
      dist[t] = std::min(dist[t], kern::sq_dist(rows.row(t).data(), rows.row(pick).data(), d));
  }
  return centers;
}

int nearest_center(const Mat& rows, const Mat& centers, int t) {
  const int d = static_cast<int>(rows.cols());
  int bestk = 0;
  double bestd = kern::sq_dist(rows.row(t).data(), centers.row(0).data(), d);
  for (int k = 1; k < centers.rows(); ++k) {
    const double dd = kern::sq_dist(rows.row(t).data(), centers.row(k).data(), d);
    if (dd < bestd) {
      bestd = dd;
      bestk = k;
    }
  }
  return bestk;
}

struct GmmFit {
  std::vector<int> labels;
  std::vector<double> log_likelihoods;
};

GmmFit fit_gmm(const FeatureMatrix& features, int K, std::uint64_t seed) {
  const Mat& rows = features.rows;
  const int T = features.num_periods(), d = features.dim();
  check_k(T, K);
  constexpr double var_floor = 1e-6;
  constexpr int max_iter = 200;

  Rng rng(seed);
  const std::vector<int> init = seed_centers(rows, K, rng);
  Mat means(K, d);
  for (int k = 0; k < K; ++k) means.row(k) = rows.row(init[k]);
  Vec col_var(d);
  for (int j = 0; j < d; ++j) {
    const double m = rows.col(j).mean();
    col_var[j] = std::max(var_floor, (rows.col(j).array() - m).square().mean());
  }
  Mat vars(K, d);
  for (int k = 0; k < K; ++k) vars.row(k) = col_var;
  Vec weight = Vec::Constant(K, 1.0 / K);

  Mat resp(T, K);
  GmmFit fit;
  constexpr double log2pi = 1.8378770664093453;
  double prev_ll = -kInf;
  for (int iter = 0; iter < max_iter; ++iter) {
    // E step in log space.
    double ll = 0.0;
    for (int t = 0; t < T; ++t) {
      double maxlog = -kInf;
      for (int k = 0; k < K; ++k) {
        double lp = std::log(std::max(weight[k], 1e-300));
        for (int j = 0; j < d; ++j) {
          const double diff = rows(t, j) - means(k, j);
          lp -= 0.5 * (log2pi + std::log(vars(k, j)) + diff * diff / vars(k, j));
        }
        resp(t, k) = lp;
        maxlog = std::max(maxlog, lp);
      }
      double denom = 0.0;
      for (int k = 0; k < K; ++k) denom += std::exp(resp(t, k) - maxlog);
      const double lse = maxlog + std::log(denom);
      ll += lse;
      for (int k = 0; k < K; ++k) resp(t, k) = std::exp(resp(t, k) - lse);
    }
    fit.log_likelihoods.push_back(ll);

    // M step with a variance floor.
    for (int k = 0; k < K; ++k) {
      const double nk = std::max(resp.col(k).sum(), 1e-12);
      weight[k] = nk / T;
      for (int j = 0; j < d; ++j) {
        double m = 0.0;
        for (int t = 0; t < T; ++t) m += resp(t, k) * rows(t, j);
        m /= nk;
        double v = 0.0;
        for (int t = 0; t < T; ++t) {
          const double diff = rows(t, j) - m;
          v += resp(t, k) * diff * diff;
        }
        means(k, j) = m;
        vars(k, j) = std::max(var_floor, v / nk);
      }
    }
    if (std::abs(ll - prev_ll) <= 1e-8 * (1.0 + std::abs(ll))) break;
    prev_ll = ll;
  }

  fit.labels.resize(T);
  for (int t = 0; t < T; ++t) {
    int bestk = 0;
    double bestr = resp(t, 0);
    for (int k = 1; k < K; ++k)
      if (resp(t, k) > bestr) {
        bestr = resp(t, k);
        bestk = k;
      }
    fit.labels[t] = bestk;
  }
  return fit;
}

// Optimal contiguous K-segmentation for a precomputed segment-cost oracle.
// cost(a, b) scores [a, b); ties break toward earlier breakpoints.
template <typename CostFn>
ChronoPartition segment_dp(int T, int K, CostFn&& cost) {
  Mat dp = Mat::Constant(K + 1, T + 1, kInf);
  Eigen::MatrixXi arg = Eigen::MatrixXi::Constant(K + 1, T + 1, -1);
  dp(0, 0) = 0.0;
  for (int j = 1; j <= K; ++j) {
    // Segment j ends at b; at least one period per segment and enough
    // periods left for the remaining segments.
    for (int b = j; b <= T - (K - j); ++b) {
      for (int a = j - 1; a < b; ++a) {
        if (!std::isfinite(dp(j - 1, a))) continue;
        const double v = dp(j - 1, a) + cost(a, b);
        if (v < dp(j, b)) {
          dp(j, b) = v;
          arg(j, b) = a;
        }
      }
    }
  }
  std::vector<int> cuts;
  int b = T;
  for (int j = K; j >= 1; --j) {
    const int a = arg(j, b);
    if (a > 0) cuts.push_back(a);
    b = a;
  }
  std::sort(cuts.begin(), cuts.end());
  return ChronoPartition::from_breakpoints(T, cuts);
}

}  // namespace

void ChronoPartition::validate() const {
  if (ranges.empty()) throw std::invalid_argument("ChronoPartition: empty partition");
  int expect = 0;
  for (const Range& r : ranges) {
    if (r.start != expect)
      throw std::invalid_argument("ChronoPartition: ranges must be ordered and contiguous");
    if (r.end <= r.start) throw std::invalid_argument("ChronoPartition: empty range");
    expect = r.end;
  }
}

ChronoPartition ChronoPartition::singletons(int T) {
  ChronoPartition p;
  p.ranges.reserve(T);
  for (int t = 0; t < T; ++t) p.ranges.push_back({t, t + 1});
  return p;
}

ChronoPartition ChronoPartition::from_breakpoints(int T, const std::vector<int>& cuts) {
  ChronoPartition p;
  int start = 0;
  for (int c : cuts) {
    if (c <= start || c >= T)
      throw std::invalid_argument("ChronoPartition: breakpoints must be increasing in (0, T)");
    p.ranges.push_back({start, c});
    start = c;
  }
  p.ranges.push_back({start, T});
  p.validate();
  return p;
}

std::string ChronoPartition::to_text() const {
  std::ostringstream os;
  for (const Range& r : ranges) os << "(" << r.start << "," << r.end << ")\n";
  return os.str();
}

ChronoPartition ChronoPartition::from_text(const std::string& text) {
  ChronoPartition p;
  std::istringstream is(text);
  std::string line;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    int s = 0, e = 0;
    if (std::sscanf(line.c_str(), "(%d,%d)", &s, &e) != 2)
      throw std::invalid_argument("ChronoPartition: bad line '" + line + "'");
    p.ranges.push_back({s, e});
  }
  p.validate();
  return p;
}

FeatureMatrix make_features(const GepInstance& inst, bool standardize) {
  const int T = inst.num_periods;
  const int d = 1 + inst.num_generators + inst.num_ref;
  FeatureMatrix f;
  f.rows.resize(T, d);
  f.rows.col(0) = inst.demand;
  f.rows.middleCols(1, inst.num_generators) = inst.cap_factor;
  if (inst.num_ref > 0) f.rows.rightCols(inst.num_ref) = inst.z_ref;
  if (standardize) {
    for (int j = 0; j < d; ++j) {
      const double mean = f.rows.col(j).mean();
      const double sd = std::sqrt((f.rows.col(j).array() - mean).square().mean());
      f.rows.col(j).array() -= mean;
      if (sd > 0.0) f.rows.col(j) /= sd;
    }
  }
  return f;
}

ChronoPartition sequential_partition(int T, int K, std::uint64_t seed) {
  check_k(T, K);
  Rng rng(seed);
  std::vector<int> pool(T - 1);
  std::iota(pool.begin(), pool.end(), 1);
  // Partial Fisher-Yates: the first K-1 entries become the breakpoints.
  for (int i = 0; i < K - 1; ++i) {
    const int j = i + static_cast<int>(rng.next_below(pool.size() - i));
    std::swap(pool[i], pool[j]);
  }
  std::vector<int> cuts(pool.begin(), pool.begin() + (K - 1));
  std::sort(cuts.begin(), cuts.end());
  return ChronoPartition::from_breakpoints(T, cuts);
}

ChronoPartition uniform_partition(int T, int K) {
  check_k(T, K);
  ChronoPartition p;
  const int base = T / K, extra = T % K;
  int start = 0;
  for (int k = 0; k < K; ++k) {
    const int len = base + (k < extra ? 1 : 0);
    p.ranges.push_back({start, start + len});
    start += len;
  }
  return p;
}

std::vector<int> kmeans_assign(const FeatureMatrix& features, int K, std::uint64_t seed) {
  const Mat& rows = features.rows;
  const int T = features.num_periods(), d = features.dim();
  check_k(T, K);

  Rng rng(seed);
  const std::vector<int> init = seed_centers(rows, K, rng);
  Mat centers(K, d);
  for (int k = 0; k < K; ++k) centers.row(k) = rows.row(init[k]);

  std::vector<int> labels(T, 0);
  for (int iter = 0; iter < 100; ++iter) {
    for (int t = 0; t < T; ++t) labels[t] = nearest_center(rows, centers, t);

    Mat next = Mat::Zero(K, d);
    Eigen::VectorXi count = Eigen::VectorXi::Zero(K);
    for (int t = 0; t < T; ++t) {
      next.row(labels[t]) += rows.row(t);
      ++count[labels[t]];
    }
    for (int k = 0; k < K; ++k) {
      if (count[k] > 0) {
        next.row(k) /= count[k];
      } else {
        // Re-seed an empty cluster at the point farthest from its center.
        int far_t = 0;
        double far_d = -1.0;
        for (int t = 0; t < T; ++t) {
          const double dd =
              kern::sq_dist(rows.row(t).data(), centers.row(labels[t]).data(), d);
          if (dd > far_d) {
            far_d = dd;
            far_t = t;
          }
        }
        next.row(k) = rows.row(far_t);
      }
    }
    const double shift = (next - centers).cwiseAbs().maxCoeff();
    centers = next;
    if (shift <= 1e-6) break;
  }
  for (int t = 0; t < T; ++t) labels[t] = nearest_center(rows, centers, t);
  return labels;
}

std::vector<int> gmm_assign(const FeatureMatrix& features, int K, std::uint64_t seed) {
  return fit_gmm(features, K, seed).labels;
}

std::vector<double> gmm_log_likelihoods(const FeatureMatrix& features, int K,
                                        std::uint64_t seed) {
  return fit_gmm(features, K, seed).log_likelihoods;
}

ChronoPartition chronologize(const std::vector<int>& labels, const FeatureMatrix& features,
                             int K) {
  const int T = features.num_periods(), d = features.dim();
  if (static_cast<int>(labels.size()) != T)
    throw std::invalid_argument("chronologize: labels length must match the feature rows");
  check_k(T, K);
  for (int l : labels)
    if (l < 0 || l >= K) throw std::invalid_argument("chronologize: label out of range");

  // Centroids fixed from the unconstrained labelling.
  Mat centroids = Mat::Zero(K, d);
  Eigen::VectorXi count = Eigen::VectorXi::Zero(K);
  for (int t = 0; t < T; ++t) {
    centroids.row(labels[t]) += features.rows.row(t);
    ++count[labels[t]];
  }
  std::vector<int> present;
  for (int k = 0; k < K; ++k)
    if (count[k] > 0) {
      centroids.row(k) /= count[k];
      present.push_back(k);
    }

  // Prefix sums for O(1) segment scores against a fixed centroid.
  Mat pref = Mat::Zero(T + 1, d);
  Vec pref2 = Vec::Zero(T + 1);
  for (int t = 0; t < T; ++t) {
    pref.row(t + 1) = pref.row(t) + features.rows.row(t);
    pref2[t + 1] = pref2[t] + features.rows.row(t).squaredNorm();
  }

  // cost(a,b) = min over centroids of sum of squared distances.
  Mat cost(T, T + 1);
  for (int a = 0; a < T; ++a)
    for (int b = a + 1; b <= T; ++b) {
      const double s2 = pref2[b] - pref2[a];
      double best = kInf;
      for (int k : present) {
        const double v = s2 - 2.0 * centroids.row(k).dot(pref.row(b) - pref.row(a)) +
                         (b - a) * centroids.row(k).squaredNorm();
        if (v < best) best = v;
      }
      cost(a, b) = best;
    }

  return segment_dp(T, K, [&](int a, int b) { return cost(a, b); });
}

ChronoPartition dp_segmentation(const FeatureMatrix& features, int K) {
  const int T = features.num_periods(), d = features.dim();
  check_k(T, K);
  Mat pref = Mat::Zero(T + 1, d);
  Vec pref2 = Vec::Zero(T + 1);
  for (int t = 0; t < T; ++t) {
    pref.row(t + 1) = pref.row(t) + features.rows.row(t);
    pref2[t + 1] = pref2[t] + features.rows.row(t).squaredNorm();
  }
  // Within-segment SSE around the segment's own mean.
  auto cost = [&](int a, int b) {
    const double s2 = pref2[b] - pref2[a];
    const double norm = (pref.row(b) - pref.row(a)).squaredNorm();
    return std::max(0.0, s2 - norm / (b - a));
  };
  return segment_dp(T, K, cost);
}

double partition_sse(const FeatureMatrix& features, const ChronoPartition& partition) {
  partition.validate();
  if (partition.num_periods() != features.num_periods())
    throw std::invalid_argument("partition_sse: partition does not cover the feature rows");
  double total = 0.0;
  for (const auto& r : partition.ranges) {
    Vec mean = Vec::Zero(features.dim());
    for (int t = r.start; t < r.end; ++t) mean += features.rows.row(t).transpose();
    mean /= r.size();
    for (int t = r.start; t < r.end; ++t)
      total += (features.rows.row(t).transpose() - mean).squaredNorm();
  }
  return total;
}

const char* to_string(ClusterMethod m) {
  switch (m) {
    case ClusterMethod::Sequential: return "sequential";
    case ClusterMethod::Uniform: return "uniform";
    case ClusterMethod::KMeans: return "kmeans";
    case ClusterMethod::Gmm: return "gmm";
    case ClusterMethod::DpSegmentation: return "dp";
  }
  return "unknown";
}

ClusterMethod cluster_method_from_string(const std::string& s) {
  if (s == "sequential") return ClusterMethod::Sequential;
  if (s == "uniform") return ClusterMethod::Uniform;
  if (s == "kmeans") return ClusterMethod::KMeans;
  if (s == "gmm") return ClusterMethod::Gmm;
  if (s == "dp") return ClusterMethod::DpSegmentation;
  throw std::invalid_argument("unknown clustering method: " + s);
}

ChronoPartition make_partition(ClusterMethod method, const FeatureMatrix& features, int K,
                               std::uint64_t seed) {
  const int T = features.num_periods();
  switch (method) {
    case ClusterMethod::Sequential: return sequential_partition(T, K, seed);
    case ClusterMethod::Uniform: return uniform_partition(T, K);
    case ClusterMethod::KMeans: return chronologize(kmeans_assign(features, K, seed), features, K);
    case ClusterMethod::Gmm: return chronologize(gmm_assign(features, K, seed), features, K);
    case ClusterMethod::DpSegmentation: return dp_segmentation(features, K);
  }
  throw std::invalid_argument("unknown clustering method");
}

}  // namespace gep
