#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <string>
#include <tuple>

namespace gep {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;  // row index = time period where applicable

// One generation-expansion-planning instance: G generators (thermal + vRES),
// N storage units, T periods of length delta hours. Costs are EUR, energies
// MWh, powers MW. Immutable after construction / validation; safe to share
// across threads read-only.
struct GepInstance {
  int num_generators = 0;  // G
  int num_storage = 0;     // N
  int num_periods = 0;     // T
  int num_ref = 0;         // R, columns of z_ref / rows of penalty_matrix
  double delta = 1.0;      // hours per period

  Vec c_inv;  // EUR/MW, length G+N (generators first, then storage)
  Vec c_p;    // EUR/MWh, length G
  double c_ns = 0.0;

  Vec demand;      // MWh, length T
  Mat cap_factor;  // T x G, in [0,1]

  Vec eta_c, eta_d;      // length N
  Vec s0;                // MWh, length N
  Vec p_s_min, p_s_max;  // MW, length 2N (charge block then discharge block)
  Vec x_min, x_max;      // MW, length G+N

  Mat penalty_matrix;  // R x (G + 3N + 1), ordered as [p, d_ns, s, p_c, p_d]
  Mat z_ref;           // T x R

  int num_units() const { return num_generators + num_storage; }
  int num_op_vars_per_period() const { return num_generators + 3 * num_storage + 1; }

  // Throws std::invalid_argument naming the offending field.
  void validate() const;
};

// Parameters for the synthetic instance generator. Costs and limits default
// to the stylized values used throughout the experiments.
struct GenConfig {
  int G = 10;
  int N = 10;
  int T = 500;
  std::uint64_t seed = 0;
  double fraction_thermal = 0.2;

  double delta = 1.0;
  double c_ns = 5000.0;
  double c_inv_thermal = 40000.0;
  double c_inv_vres = 30000.0;
  double c_inv_storage = 35000.0;
  double c_p_thermal = 50.0;
  double c_p_vres = 3.0;
  double x_min_mw = 0.1;
  double x_max_mw = 1.0;
  double p_s_max_lo = 0.3;
  double p_s_max_hi = 0.6;
  double eta_c = 0.9;
  double eta_d = 1.1;
  double z_ref_lo = 0.1;
  double z_ref_hi = 1.0;

  void validate() const;
};

// Deterministic in the seed: the same config always yields bitwise-identical
// instances. Thermal units occupy the first round(fraction_thermal*G)
// generator slots and have capacity factor fixed at 1; the remaining
// generators are vRES with a diurnal capacity-factor profile. Demand follows
// a noisy diurnal sinusoid scaled with fleet size. The quadratic penalty
// selects the storage states (reference values uniform on [z_ref_lo, z_ref_hi]).
GepInstance generate_instance(const GenConfig& config);

// JSON persistence. save_instance -> load_instance round-trips exactly.
void save_instance(const GepInstance& inst, const std::string& path);
GepInstance load_instance(const std::string& path);

// CSV ingestion with header t,demand,cf_1..cf_G,ref_1..ref_R; rows must be
// consecutive in t. Returns (demand, cap_factor, z_ref) with T = row count.
std::tuple<Vec, Mat, Mat> load_timeseries_csv(const std::string& path, int G, int R);

}  // namespace gep
