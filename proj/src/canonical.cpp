#include "gep/canonical.hpp"

#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace gep {

VarMap VarMap::gep_layout(int G, int N, int periods) {
  VarMap m;
  m.G = G;
  m.N = N;
  m.periods = periods;
  const int U = G + N;
  m.off_x = 0;
  m.off_b = U;
  m.off_p = 2 * U;
  m.off_s = m.off_p + periods * G;
  m.off_pc = m.off_s + (periods + 1) * N;
  m.off_pd = m.off_pc + periods * N;
  m.off_dns = m.off_pd + periods * N;
  m.num_vars = m.off_dns + periods;
  return m;
}

int CanonicalProblem::num_integral() const {
  int n = 0;
  for (auto f : integral) n += f != 0;
  return n;
}

double CanonicalProblem::objective_value(const Vec& z) const {
  if (z.size() != num_vars)
    throw std::invalid_argument("objective_value: primal length mismatch");
  double v = c0 + c.dot(z);
  if (Q.nonZeros() > 0) v += 0.5 * z.dot(Q * z);
  return v;
}

double CanonicalProblem::max_residual(const Vec& z) const {
  if (z.size() != num_vars)
    throw std::invalid_argument("max_residual: primal length mismatch");
  double r = 0.0;
  if (num_eq() > 0) r = std::max(r, (a_eq * z - b_eq).cwiseAbs().maxCoeff());
  if (num_in() > 0) r = std::max(r, (a_in * z - b_in).maxCoeff());
  for (int j = 0; j < num_vars; ++j) {
    if (std::isfinite(lower[j])) r = std::max(r, lower[j] - z[j]);
    if (std::isfinite(upper[j])) r = std::max(r, z[j] - upper[j]);
  }
  if (qcap) r = std::max(r, 0.5 * z.dot(qcap->P * z) + qcap->r.dot(z) + qcap->d);
  return std::max(r, 0.0);
}

namespace {

void dump_rows(std::ostream& os, const SpMat& A, const Vec& rhs, const char* rel,
               const std::vector<std::string>& names, const char* prefix) {
  SpMat At = A.transpose();  // column-major transpose = row-wise access to A
  for (int i = 0; i < A.rows(); ++i) {
    os << prefix << i;
    if (i < static_cast<int>(names.size())) os << " [" << names[i] << "]";
    os << ":";
    for (SpMat::InnerIterator it(At, i); it; ++it)
      os << " " << (it.value() >= 0 ? "+" : "") << it.value() << "*z" << it.row();
    os << " " << rel << " " << rhs[i] << "\n";
  }
}

}  // namespace

std::string CanonicalProblem::dump() const {
  std::ostringstream os;
  os << "vars " << num_vars << " eq " << num_eq() << " in " << num_in()
     << " integral " << num_integral() << " qnnz " << Q.nonZeros()
     << (qcap ? " qcap" : "") << "\n";
  os << "min 0.5 z'Qz + c'z + " << c0 << "\n";
  for (int j = 0; j < num_vars; ++j) {
    os << "z" << j << ": c=" << c[j] << " in [" << lower[j] << ", " << upper[j] << "]";
    if (!integral.empty() && integral[j]) os << " integer";
    os << "\n";
  }
  dump_rows(os, a_eq, b_eq, "=", eq_names, "eq");
  dump_rows(os, a_in, b_in, "<=", in_names, "in");
  if (qcap) os << "qcap: 0.5 z'Pz + r'z + " << qcap->d << " <= 0\n";
  return os.str();
}

}  // namespace gep
