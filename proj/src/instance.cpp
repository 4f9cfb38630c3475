#include "gep/instance.hpp"

#include <json.hpp>

#include <cmath>
#include <fstream>
#include <numbers>
#include <sstream>
#include <stdexcept>

#include "gep/rng.hpp"

namespace gep {

namespace {

using nlohmann::json;

void require(bool cond, const std::string& msg) {
  if (!cond) throw std::invalid_argument(msg);
}

bool all_finite_nonneg(const Vec& v) {
  for (int i = 0; i < v.size(); ++i)
    if (!std::isfinite(v[i]) || v[i] < 0.0) return false;
  return true;
}

}  // namespace

void GepInstance::validate() const {
  const int G = num_generators, N = num_storage, T = num_periods, R = num_ref;
  require(G >= 0 && N >= 0, "num_generators/num_storage: must be >= 0");
  require(T >= 1, "num_periods: must be >= 1");
  require(R >= 0, "num_ref: must be >= 0");
  require(std::isfinite(delta) && delta > 0.0, "delta: must be positive");

  require(c_inv.size() == G + N, "c_inv: length must be G+N");
  require(all_finite_nonneg(c_inv), "c_inv: entries must be finite and >= 0");
  require(c_p.size() == G, "c_p: length must be G");
  require(all_finite_nonneg(c_p), "c_p: entries must be finite and >= 0");
  require(std::isfinite(c_ns) && c_ns >= 0.0, "c_ns: must be finite and >= 0");

  require(demand.size() == T, "demand: must have exactly T rows");
  require(all_finite_nonneg(demand), "demand: entries must be finite and >= 0");
  require(cap_factor.rows() == T && cap_factor.cols() == G,
          "cap_factor: must be T x G");
  for (int t = 0; t < T; ++t)
    for (int g = 0; g < G; ++g) {
      const double f = cap_factor(t, g);
      require(std::isfinite(f) && f >= 0.0 && f <= 1.0,
              "cap_factor: entries must lie in [0,1]");
    }

  require(eta_c.size() == N && eta_d.size() == N, "eta_c/eta_d: length must be N");
  require(all_finite_nonneg(eta_c) && all_finite_nonneg(eta_d),
          "eta_c/eta_d: entries must be finite and >= 0");
  require(s0.size() == N, "s0: length must be N");
  require(all_finite_nonneg(s0), "s0: entries must be finite and >= 0");

  require(p_s_min.size() == 2 * N && p_s_max.size() == 2 * N,
          "p_s_min/p_s_max: length must be 2N");
  require(all_finite_nonneg(p_s_min) && all_finite_nonneg(p_s_max),
          "p_s_min/p_s_max: entries must be finite and >= 0");
  for (int i = 0; i < 2 * N; ++i)
    require(p_s_min[i] <= p_s_max[i], "p_s_min: must be <= p_s_max entrywise");

  require(x_min.size() == G + N && x_max.size() == G + N,
          "x_min/x_max: length must be G+N");
  require(all_finite_nonneg(x_min) && all_finite_nonneg(x_max),
          "x_min/x_max: entries must be finite and >= 0");
  for (int i = 0; i < G + N; ++i)
    require(x_min[i] <= x_max[i], "x_min: must be <= x_max entrywise");

  require(penalty_matrix.rows() == R &&
              penalty_matrix.cols() == num_op_vars_per_period(),
          "penalty_matrix: must be R x (G+3N+1)");
  require(penalty_matrix.allFinite(), "penalty_matrix: entries must be finite");
  require(z_ref.rows() == T && z_ref.cols() == R, "z_ref: must be T x R");
  require(z_ref.allFinite(), "z_ref: entries must be finite");
}

void GenConfig::validate() const {
  require(G >= 0 && N >= 0, "GenConfig: G and N must be >= 0");
  require(T >= 1, "GenConfig: T must be >= 1");
  require(fraction_thermal >= 0.0 && fraction_thermal <= 1.0,
          "GenConfig: fraction_thermal must lie in [0,1]");
  require(delta > 0.0, "GenConfig: delta must be positive");
  require(c_ns >= 0.0 && c_inv_thermal >= 0.0 && c_inv_vres >= 0.0 &&
              c_inv_storage >= 0.0 && c_p_thermal >= 0.0 && c_p_vres >= 0.0,
          "GenConfig: costs must be >= 0");
  require(x_min_mw >= 0.0 && x_min_mw <= x_max_mw, "GenConfig: bad capacity limits");
  require(p_s_max_lo >= 0.0 && p_s_max_lo <= p_s_max_hi,
          "GenConfig: bad storage power limits");
}

GepInstance generate_instance(const GenConfig& config) {
  config.validate();
  const int G = config.G, N = config.N, T = config.T;
  const int n_thermal = static_cast<int>(std::llround(config.fraction_thermal * G));

  GepInstance inst;
  inst.num_generators = G;
  inst.num_storage = N;
  inst.num_periods = T;
  inst.num_ref = N;
  inst.delta = config.delta;

  inst.c_inv.resize(G + N);
  inst.c_p.resize(G);
  for (int g = 0; g < G; ++g) {
    const bool thermal = g < n_thermal;
    inst.c_inv[g] = thermal ? config.c_inv_thermal : config.c_inv_vres;
    inst.c_p[g] = thermal ? config.c_p_thermal : config.c_p_vres;
  }
  for (int n = 0; n < N; ++n) inst.c_inv[G + n] = config.c_inv_storage;
  inst.c_ns = config.c_ns;

  inst.x_min = Vec::Constant(G + N, config.x_min_mw);
  inst.x_max = Vec::Constant(G + N, config.x_max_mw);
  inst.eta_c = Vec::Constant(N, config.eta_c);
  inst.eta_d = Vec::Constant(N, config.eta_d);
  inst.s0 = Vec::Zero(N);

  Rng root(config.seed);
  Rng rng_demand = root.split(1);
  Rng rng_cf = root.split(2);
  Rng rng_ps = root.split(3);
  Rng rng_ref = root.split(4);

  inst.p_s_min = Vec::Zero(2 * N);
  inst.p_s_max.resize(2 * N);
  for (int i = 0; i < 2 * N; ++i)
    inst.p_s_max[i] = rng_ps.uniform(config.p_s_max_lo, config.p_s_max_hi);

  constexpr double two_pi = 2.0 * std::numbers::pi;
  const double base = 0.5 * static_cast<double>(G + N);
  inst.demand.resize(T);
  for (int t = 0; t < T; ++t) {
    const double d = base * (1.0 + 0.3 * std::sin(two_pi * t / 24.0)) +
                     rng_demand.uniform(-0.05, 0.05);
    inst.demand[t] = std::max(0.0, d);
  }

  inst.cap_factor.resize(T, G);
  for (int g = 0; g < G; ++g) {
    if (g < n_thermal) {
      inst.cap_factor.col(g).setOnes();
      continue;
    }
    const double phase = rng_cf.uniform(0.0, 24.0);
    for (int t = 0; t < T; ++t) {
      const double f = 0.5 + 0.5 * std::sin(two_pi * (t + phase) / 24.0) +
                       rng_cf.uniform(-0.1, 0.1);
      inst.cap_factor(t, g) = std::clamp(f, 0.0, 1.0);
    }
  }

  // Penalty selects the storage states out of [p, d_ns, s, p_c, p_d].
  inst.penalty_matrix = Mat::Zero(N, inst.num_op_vars_per_period());
  for (int n = 0; n < N; ++n) inst.penalty_matrix(n, G + 1 + n) = 1.0;

  inst.z_ref.resize(T, N);
  for (int t = 0; t < T; ++t)
    for (int r = 0; r < N; ++r)
      inst.z_ref(t, r) = rng_ref.uniform(config.z_ref_lo, config.z_ref_hi);

  inst.validate();
  return inst;
}

namespace {

json vec_to_json(const Vec& v) {
  json a = json::array();
  for (int i = 0; i < v.size(); ++i) a.push_back(v[i]);
  return a;
}

json mat_to_json(const Mat& m) {
  // Row-major flat array; dimensions live in sibling fields.
  json a = json::array();
  for (int r = 0; r < m.rows(); ++r)
    for (int c = 0; c < m.cols(); ++c) a.push_back(m(r, c));
  return a;
}

Vec json_to_vec(const json& j, const std::string& field, int expected) {
  if (!j.contains(field)) throw std::runtime_error("instance file: missing field '" + field + "'");
  const json& a = j.at(field);
  if (!a.is_array() || static_cast<int>(a.size()) != expected)
    throw std::runtime_error("instance file: field '" + field + "' must be an array of length " +
                             std::to_string(expected));
  Vec v(expected);
  for (int i = 0; i < expected; ++i) {
    if (!a[i].is_number())
      throw std::runtime_error("instance file: field '" + field + "' has a non-numeric entry");
    v[i] = a[i].get<double>();
  }
  return v;
}

Mat json_to_mat(const json& j, const std::string& field, int rows, int cols) {
  Vec flat = json_to_vec(j, field, rows * cols);
  Mat m(rows, cols);
  for (int r = 0; r < rows; ++r)
    for (int c = 0; c < cols; ++c) m(r, c) = flat[r * cols + c];
  return m;
}

int json_int(const json& j, const std::string& field) {
  if (!j.contains(field)) throw std::runtime_error("instance file: missing field '" + field + "'");
  if (!j.at(field).is_number_integer())
    throw std::runtime_error("instance file: field '" + field + "' must be an integer");
  return j.at(field).get<int>();
}

}  // namespace

void save_instance(const GepInstance& inst, const std::string& path) {
  json j;
  j["num_generators"] = inst.num_generators;
  j["num_storage"] = inst.num_storage;
  j["num_periods"] = inst.num_periods;
  j["num_ref"] = inst.num_ref;
  j["delta"] = inst.delta;
  j["c_inv"] = vec_to_json(inst.c_inv);
  j["c_p"] = vec_to_json(inst.c_p);
  j["c_ns"] = inst.c_ns;
  j["demand"] = vec_to_json(inst.demand);
  j["cap_factor"] = mat_to_json(inst.cap_factor);
  j["eta_c"] = vec_to_json(inst.eta_c);
  j["eta_d"] = vec_to_json(inst.eta_d);
  j["s0"] = vec_to_json(inst.s0);
  j["p_s_min"] = vec_to_json(inst.p_s_min);
  j["p_s_max"] = vec_to_json(inst.p_s_max);
  j["x_min"] = vec_to_json(inst.x_min);
  j["x_max"] = vec_to_json(inst.x_max);
  j["penalty_matrix"] = mat_to_json(inst.penalty_matrix);
  j["z_ref"] = mat_to_json(inst.z_ref);

  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open for writing: " + path);
  out << j.dump(2) << "\n";
  if (!out) throw std::runtime_error("write failed: " + path);
}

GepInstance load_instance(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open instance file: " + path);
  json j;
  try {
    in >> j;
  } catch (const json::parse_error& e) {
    throw std::runtime_error("instance file '" + path + "': " + e.what());
  }

  GepInstance inst;
  inst.num_generators = json_int(j, "num_generators");
  inst.num_storage = json_int(j, "num_storage");
  inst.num_periods = json_int(j, "num_periods");
  inst.num_ref = json_int(j, "num_ref");
  const int G = inst.num_generators, N = inst.num_storage, T = inst.num_periods,
            R = inst.num_ref;
  if (G < 0 || N < 0 || T < 1 || R < 0)
    throw std::runtime_error("instance file: invalid dimensions");
  if (!j.contains("delta") || !j.at("delta").is_number())
    throw std::runtime_error("instance file: missing field 'delta'");
  inst.delta = j.at("delta").get<double>();
  inst.c_inv = json_to_vec(j, "c_inv", G + N);
  inst.c_p = json_to_vec(j, "c_p", G);
  if (!j.contains("c_ns") || !j.at("c_ns").is_number())
    throw std::runtime_error("instance file: missing field 'c_ns'");
  inst.c_ns = j.at("c_ns").get<double>();
  inst.demand = json_to_vec(j, "demand", T);
  inst.cap_factor = json_to_mat(j, "cap_factor", T, G);
  inst.eta_c = json_to_vec(j, "eta_c", N);
  inst.eta_d = json_to_vec(j, "eta_d", N);
  inst.s0 = json_to_vec(j, "s0", N);
  inst.p_s_min = json_to_vec(j, "p_s_min", 2 * N);
  inst.p_s_max = json_to_vec(j, "p_s_max", 2 * N);
  inst.x_min = json_to_vec(j, "x_min", G + N);
  inst.x_max = json_to_vec(j, "x_max", G + N);
  inst.penalty_matrix = json_to_mat(j, "penalty_matrix", R, G + 3 * N + 1);
  inst.z_ref = json_to_mat(j, "z_ref", T, R);

  inst.validate();
  return inst;
}

std::tuple<Vec, Mat, Mat> load_timeseries_csv(const std::string& path, int G, int R) {
  if (G < 0 || R < 0) throw std::invalid_argument("load_timeseries_csv: G and R must be >= 0");
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open time-series file: " + path);

  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error(path + ": no data rows");

  // Header check: t,demand,cf_1..cf_G,ref_1..ref_R
  {
    std::string expected = "t,demand";
    for (int g = 1; g <= G; ++g) expected += ",cf_" + std::to_string(g);
    for (int r = 1; r <= R; ++r) expected += ",ref_" + std::to_string(r);
    std::string got = line;
    if (!got.empty() && got.back() == '\r') got.pop_back();
    if (got != expected)
      throw std::runtime_error(path + ": bad header, expected '" + expected + "'");
  }

  std::vector<double> dem;
  std::vector<std::vector<double>> cf, ref;
  long long expected_t = -1;
  int row_no = 1;  // header was row 1
  while (std::getline(in, line)) {
    ++row_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::stringstream ss(line);
    std::string cell;
    std::vector<double> cells;
    while (std::getline(ss, cell, ',')) {
      try {
        std::size_t pos = 0;
        const double v = std::stod(cell, &pos);
        if (pos != cell.size()) throw std::invalid_argument(cell);
        cells.push_back(v);
      } catch (const std::exception&) {
        throw std::runtime_error(path + ": non-numeric cell '" + cell + "' at row " +
                                 std::to_string(row_no));
      }
    }
    if (static_cast<int>(cells.size()) != 2 + G + R)
      throw std::runtime_error(path + ": expected " + std::to_string(2 + G + R) +
                               " columns at row " + std::to_string(row_no));
    const long long t = std::llround(cells[0]);
    if (expected_t < 0)
      expected_t = t;
    else if (t != expected_t)
      throw std::runtime_error(path + ": time index gap or disorder at row " +
                               std::to_string(row_no) + " (expected t=" +
                               std::to_string(expected_t) + ", got t=" + std::to_string(t) + ")");
    ++expected_t;
    dem.push_back(cells[1]);
    cf.emplace_back(cells.begin() + 2, cells.begin() + 2 + G);
    ref.emplace_back(cells.begin() + 2 + G, cells.end());
  }
  if (dem.empty()) throw std::runtime_error(path + ": no data rows");

  const int T = static_cast<int>(dem.size());
  Vec demand(T);
  Mat cap_factor(T, G), z_ref(T, R);
  for (int t = 0; t < T; ++t) {
    demand[t] = dem[t];
    for (int g = 0; g < G; ++g) cap_factor(t, g) = cf[t][g];
    for (int r = 0; r < R; ++r) z_ref(t, r) = ref[t][r];
  }
  return {demand, cap_factor, z_ref};
}

}  // namespace gep
