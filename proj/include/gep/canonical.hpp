#pragma once

#include <Eigen/Sparse>

#include <optional>
#include <string>
#include <vector>

#include "gep/instance.hpp"

namespace gep {

using SpMat = Eigen::SparseMatrix<double>;

// Single convex quadratic inequality 0.5 z'P z + r'z + d <= 0 (P PSD).
struct QuadConstraint {
  SpMat P;
  Vec r;
  double d = 0.0;
};

// Maps canonical variables back to model roles. Layout is fixed:
//   x [0, U)  b [U, 2U)  p (periods x G)  s ((periods+1) x N)
//   p_c (periods x N)  p_d (periods x N)  d_ns (periods)
// with U = G+N and `periods` = T for full models, K for aggregated ones.
struct VarMap {
  int G = 0, N = 0, periods = 0;
  int off_x = 0, off_b = 0, off_p = 0, off_s = 0, off_pc = 0, off_pd = 0, off_dns = 0;
  int num_vars = 0;

  static VarMap gep_layout(int G, int N, int periods);
  int x(int j) const { return off_x + j; }
  int b(int j) const { return off_b + j; }
  int p(int t, int g) const { return off_p + t * G + g; }
  int s(int t, int n) const { return off_s + t * N + n; }
  int pc(int t, int n) const { return off_pc + t * N + n; }
  int pd(int t, int n) const { return off_pd + t * N + n; }
  int dns(int t) const { return off_dns + t; }
};

// Solver-facing form shared by the full-scale, aggregated, restricted and
// metric models:
//   min 0.5 z'Q z + c'z + c0
//   s.t. a_eq z = b_eq,  a_in z <= b_in,  lower <= z <= upper,
//        optional quadratic cap, z_j integral where marked.
// Immutable after build; concurrent solves may share one instance.
struct CanonicalProblem {
  int num_vars = 0;
  SpMat Q;  // symmetric PSD, full (both triangles) storage
  Vec c;
  double c0 = 0.0;
  SpMat a_eq;
  Vec b_eq;
  SpMat a_in;
  Vec b_in;
  Vec lower, upper;  // +-infinity allowed
  std::vector<std::uint8_t> integral;  // 1 for binary b-variables
  std::optional<QuadConstraint> qcap;
  std::optional<VarMap> varmap;
  std::vector<std::string> eq_names, in_names;  // optional row labels for dumps

  int num_eq() const { return static_cast<int>(a_eq.rows()); }
  int num_in() const { return static_cast<int>(a_in.rows()); }
  int num_integral() const;

  // 0.5 z'Qz + c'z + c0.
  double objective_value(const Vec& z) const;

  // Worst violation over equality rows, inequality rows, bounds and the
  // quadratic cap; integrality is not checked here.
  double max_residual(const Vec& z) const;

  // Row-wise human-readable listing for debugging.
  std::string dump() const;
};

}  // namespace gep
