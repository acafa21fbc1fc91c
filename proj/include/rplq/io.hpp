#pragma once

// Problem-file and artifact I/O.
//
// Problems are JSON; matrix entries are serialized as decimal strings with
// 17 significant digits so values round-trip bit-exactly (plain JSON numbers
// are also accepted on input).  Artifacts (CSV traces, JSON reports) are
// written to a temporary file and renamed into place, so readers never see a
// partial file.

#include <json.hpp>

#include <charconv>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "rplq/bounds.hpp"
#include "rplq/exact_pg.hpp"
#include "rplq/params.hpp"
#include "rplq/problems.hpp"
#include "rplq/riccati.hpp"

namespace rplq {

using json = nlohmann::json;

namespace io_detail {

// Shortest decimal string that round-trips to the same double.
inline std::string fmt17(double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

inline double parse_number(const json& j, const std::string& what) {
  if (j.is_number()) return j.get<double>();
  if (j.is_string()) {
    try {
      return std::stod(j.get<std::string>());
    } catch (const std::exception&) {
      throw ConfigError("cannot parse number in " + what + ": " + j.dump());
    }
  }
  throw ConfigError("expected number or numeric string in " + what);
}

inline json matrix_to_json(const Matrix& M) {
  json rows = json::array();
  for (Eigen::Index i = 0; i < M.rows(); ++i) {
    json row = json::array();
    for (Eigen::Index j = 0; j < M.cols(); ++j) row.push_back(fmt17(M(i, j)));
    rows.push_back(std::move(row));
  }
  return rows;
}

inline Matrix matrix_from_json(const json& j, const std::string& what) {
  if (!j.is_array() || j.empty() || !j[0].is_array())
    throw ConfigError(what + " must be a 2-d array");
  Eigen::Index rows = static_cast<Eigen::Index>(j.size());
  Eigen::Index cols = static_cast<Eigen::Index>(j[0].size());
  Matrix M(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i) {
    if (static_cast<Eigen::Index>(j[i].size()) != cols)
      throw ConfigError(what + " has ragged rows");
    for (Eigen::Index c = 0; c < cols; ++c)
      M(i, c) = parse_number(j[i][c], what);
  }
  return M;
}

inline json vector_to_json(const Vector& v) {
  json a = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(fmt17(v(i)));
  return a;
}

inline Vector vector_from_json(const json& j, const std::string& what) {
  if (!j.is_array()) throw ConfigError(what + " must be an array");
  Vector v(static_cast<Eigen::Index>(j.size()));
  for (Eigen::Index i = 0; i < v.size(); ++i)
    v(i) = parse_number(j[static_cast<std::size_t>(i)], what);
  return v;
}

inline json poly_matrix_to_json(const PolyMatrix& pm) {
  json terms = json::array();
  for (const auto& t : pm.terms)
    terms.push_back({{"noise", t.noise_index},
                     {"power", t.power},
                     {"coeff", matrix_to_json(t.coeff)}});
  return {{"base", matrix_to_json(pm.base)}, {"terms", std::move(terms)}};
}

inline PolyMatrix poly_matrix_from_json(const json& j,
                                        const std::string& what) {
  PolyMatrix pm;
  pm.base = matrix_from_json(j.at("base"), what + ".base");
  for (const auto& t : j.value("terms", json::array())) {
    PolyTerm term;
    term.noise_index = t.at("noise").get<int>();
    term.power = t.at("power").get<int>();
    term.coeff = matrix_from_json(t.at("coeff"), what + ".terms.coeff");
    if (term.power < 1) throw ConfigError(what + ": term power must be >= 1");
    pm.terms.push_back(std::move(term));
  }
  return pm;
}

}  // namespace io_detail

inline void write_text_atomic(const std::filesystem::path& path,
                              const std::string& content) {
  namespace fs = std::filesystem;
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  fs::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw ConfigError("cannot open " + tmp.string() + " for writing");
    out << content;
    if (!out) throw ConfigError("write failed for " + tmp.string());
  }
  fs::rename(tmp, path);
}

inline json problem_to_json(const Problem& p) {
  json j;
  j["dims"] = {{"n", p.model.dims().n}, {"m", p.model.dims().m}};
  if (p.model.poly()) {
    const PolyNoise& pn = *p.model.poly();
    json amps = json::array();
    for (double a : pn.amplitudes) amps.push_back(io_detail::fmt17(a));
    j["model"] = {{"type", "polynoise"},
                  {"amplitudes", std::move(amps)},
                  {"A", io_detail::poly_matrix_to_json(pn.A)},
                  {"B", io_detail::poly_matrix_to_json(pn.B)},
                  {"Q", io_detail::poly_matrix_to_json(pn.Q)},
                  {"R", io_detail::poly_matrix_to_json(pn.R)}};
  } else {
    json scen = json::array();
    for (const auto& s : p.model.atoms().scenarios)
      scen.push_back({{"prob", io_detail::fmt17(s.prob)},
                      {"A", io_detail::matrix_to_json(s.A)},
                      {"B", io_detail::matrix_to_json(s.B)},
                      {"Q", io_detail::matrix_to_json(s.Q)},
                      {"R", io_detail::matrix_to_json(s.R)}});
    j["model"] = {{"type", "atoms"}, {"scenarios", std::move(scen)}};
  }
  json init;
  init["sigma0"] = io_detail::fmt17(p.init.sigma0);
  switch (p.init.kind) {
    case InitDist::Kind::PointMass:
      init["kind"] = "pointmass";
      init["point"] = io_detail::vector_to_json(p.init.mean);
      break;
    case InitDist::Kind::Gaussian:
      init["kind"] = "gaussian";
      init["mean"] = io_detail::vector_to_json(p.init.mean);
      init["cov"] = io_detail::matrix_to_json(p.init.cov);
      break;
    case InitDist::Kind::Atoms: {
      init["kind"] = "atoms";
      json atoms = json::array();
      for (const auto& [prob, x] : p.init.atoms)
        atoms.push_back({{"prob", io_detail::fmt17(prob)},
                         {"x", io_detail::vector_to_json(x)}});
      init["atoms"] = std::move(atoms);
      break;
    }
  }
  j["init"] = std::move(init);
  return j;
}

inline Problem problem_from_json(const json& j, int nodes_per_dim = 4) {
  Dims dims;
  try {
    dims.n = j.at("dims").at("n").get<int>();
    dims.m = j.at("dims").at("m").get<int>();
    if (dims.n < 1 || dims.m < 1) throw ConfigError("dims must be positive");

    const json& jm = j.at("model");
    std::string type = jm.at("type").get<std::string>();
    std::optional<ParameterModel> model;
    if (type == "polynoise") {
      PolyNoise pn;
      pn.dims = dims;
      for (const auto& a : jm.at("amplitudes"))
        pn.amplitudes.push_back(io_detail::parse_number(a, "amplitudes"));
      pn.A = io_detail::poly_matrix_from_json(jm.at("A"), "A");
      pn.B = io_detail::poly_matrix_from_json(jm.at("B"), "B");
      pn.Q = io_detail::poly_matrix_from_json(jm.at("Q"), "Q");
      pn.R = io_detail::poly_matrix_from_json(jm.at("R"), "R");
      int q = jm.value("nodes_per_dim", nodes_per_dim);
      model = ParameterModel::from_poly(std::move(pn), q);
    } else if (type == "atoms") {
      ScenarioSet set;
      set.dims = dims;
      for (const auto& s : jm.at("scenarios")) {
        ParamScenario sc;
        sc.prob = io_detail::parse_number(s.at("prob"), "prob");
        sc.A = io_detail::matrix_from_json(s.at("A"), "A");
        sc.B = io_detail::matrix_from_json(s.at("B"), "B");
        sc.Q = io_detail::matrix_from_json(s.at("Q"), "Q");
        sc.R = io_detail::matrix_from_json(s.at("R"), "R");
        set.scenarios.push_back(std::move(sc));
      }
      model = ParameterModel::from_atoms(std::move(set));
    } else {
      throw ConfigError("unknown model type: " + type);
    }

    InitDist init;
    const json& ji = j.at("init");
    std::string kind = ji.at("kind").get<std::string>();
    init.sigma0 = io_detail::parse_number(ji.value("sigma0", json(1.0)),
                                          "init.sigma0");
    if (kind == "pointmass") {
      init.kind = InitDist::Kind::PointMass;
      init.mean = io_detail::vector_from_json(ji.at("point"), "init.point");
    } else if (kind == "gaussian") {
      init.kind = InitDist::Kind::Gaussian;
      init.mean = io_detail::vector_from_json(ji.at("mean"), "init.mean");
      init.cov = io_detail::matrix_from_json(ji.at("cov"), "init.cov");
      if (init.cov.rows() != dims.n || init.cov.cols() != dims.n ||
          init.mean.size() != dims.n)
        throw ConfigError("init dimensions do not match dims.n");
    } else if (kind == "atoms") {
      init.kind = InitDist::Kind::Atoms;
      for (const auto& a : ji.at("atoms"))
        init.atoms.emplace_back(
            io_detail::parse_number(a.at("prob"), "init.atoms.prob"),
            io_detail::vector_from_json(a.at("x"), "init.atoms.x"));
    } else {
      throw ConfigError("unknown init kind: " + kind);
    }
    return Problem{std::move(*model), std::move(init)};
  } catch (const json::exception& e) {
    throw ConfigError(std::string("malformed problem file: ") + e.what());
  }
}

inline Problem load_problem(const std::filesystem::path& path,
                            int nodes_per_dim = 4) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open problem file: " + path.string());
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw ConfigError("invalid JSON in " + path.string() + ": " + e.what());
  }
  return problem_from_json(j, nodes_per_dim);
}

inline void save_problem(const std::filesystem::path& path, const Problem& p) {
  write_text_atomic(path, problem_to_json(p).dump(2) + "\n");
}

// --- CSV artifacts -------------------------------------------------------

// Exact-mode traces carry wall time; model-free traces omit it so that two
// runs with different thread counts are bitwise identical.
inline std::string trace_to_csv(const DescentTrace& trace,
                                bool with_wall_time) {
  std::string out = with_wall_time
                        ? "iter,cost,rel_error,grad_norm,step,wall_seconds\n"
                        : "iter,cost,rel_error,grad_norm,step\n";
  for (const auto& r : trace.records) {
    out += std::to_string(r.iter);
    out += ',';
    out += io_detail::fmt17(r.cost);
    out += ',';
    out += io_detail::fmt17(r.rel_error);
    out += ',';
    out += io_detail::fmt17(r.grad_norm);
    out += ',';
    out += io_detail::fmt17(r.step);
    if (with_wall_time) {
      out += ',';
      out += io_detail::fmt17(r.wall_seconds);
    }
    out += '\n';
  }
  return out;
}

// Aggregate across seeds: per-iteration median and central 95% band of the
// relative error, via interpolated quantiles.
inline std::string aggregate_to_csv(const std::vector<DescentTrace>& traces) {
  auto quantile = [](std::vector<double> v, double q) {
    std::sort(v.begin(), v.end());
    if (v.empty()) return std::numeric_limits<double>::quiet_NaN();
    double pos = q * (static_cast<double>(v.size()) - 1.0);
    std::size_t lo = static_cast<std::size_t>(pos);
    std::size_t hi = std::min(lo + 1, v.size() - 1);
    double frac = pos - static_cast<double>(lo);
    return v[lo] * (1.0 - frac) + v[hi] * frac;
  };
  std::size_t iters = 0;
  for (const auto& t : traces) iters = std::max(iters, t.records.size());
  std::string out = "iter,median_rel_error,p2_5,p97_5\n";
  for (std::size_t k = 0; k < iters; ++k) {
    std::vector<double> vals;
    for (const auto& t : traces)
      if (k < t.records.size()) vals.push_back(t.records[k].rel_error);
    out += std::to_string(k);
    out += ',';
    out += io_detail::fmt17(quantile(vals, 0.5));
    out += ',';
    out += io_detail::fmt17(quantile(vals, 0.025));
    out += ',';
    out += io_detail::fmt17(quantile(vals, 0.975));
    out += '\n';
  }
  return out;
}

inline std::string bernstein_table_to_csv(
    const std::vector<BernsteinRow>& table) {
  std::string out = "N,eps,empirical_tail,bound\n";
  for (const auto& row : table) {
    out += io_detail::fmt17(row.N);
    out += ',';
    out += io_detail::fmt17(row.eps);
    out += ',';
    out += io_detail::fmt17(row.empirical);
    out += ',';
    out += io_detail::fmt17(row.bound);
    out += '\n';
  }
  return out;
}

// --- JSON reports --------------------------------------------------------

inline json are_solution_to_json(const AreSolution& sol) {
  return {{"K", io_detail::matrix_to_json(sol.K)},
          {"L_star", io_detail::matrix_to_json(sol.L_star)},
          {"cost_star", io_detail::fmt17(sol.cost_star)},
          {"iterations", sol.iterations},
          {"residual", io_detail::fmt17(sol.residual)},
          {"rho_star", io_detail::fmt17(sol.rho_star)}};
}

inline json bounds_report_to_json(const BoundsReport& rep) {
  auto f = [](double v) { return io_detail::fmt17(v); };
  return {
      {"inputs",
       {{"t_or_l", rep.inputs.t_or_l},
        {"eps", f(rep.inputs.eps)},
        {"delta", f(rep.inputs.delta)},
        {"r", f(rep.inputs.r)}}},
      {"cost", f(rep.cost)},
      {"cost_star", f(rep.cost_star)},
      {"policy_norm", f(rep.policy_norm)},
      {"e_ABL2", f(rep.e_ABL2)},
      {"h_delta", f(rep.h_delta)},
      {"sigma_perturb_coeff", f(rep.sigma_perturb_coeff)},
      {"h_c", f(rep.h_c)},
      {"h_grad", f(rep.h_grad)},
      {"h_grad_frob", f(rep.h_grad_frob)},
      {"h_l", f(rep.h_l)},
      {"h_l_tilde", f(rep.h_l_tilde)},
      {"h_r", f(rep.h_r)},
      {"h1", f(rep.h1)},
      {"b0", f(rep.b0)},
      {"sigma0_sq", f(rep.sigma0_sq)},
      {"h_s", f(rep.h_s)},
      {"sigma_t", f(rep.sigma_t)},
      {"beta_t", f(rep.beta_t)},
      {"gamma_t", f(rep.gamma_t)},
      {"sigma_l_tilde", f(rep.sigma_l_tilde)},
      {"beta_l_tilde", f(rep.beta_l_tilde)},
      {"gamma_l_tilde", f(rep.gamma_l_tilde)},
      {"h_s_hf", f(rep.h_s_hf)},
      {"bernstein_scale", f(rep.bernstein_scale)},
      {"gamma_level", f(rep.gamma_level)},
      {"m_RL", f(rep.m_RL)},
      {"m_grad", f(rep.m_grad)},
      {"m_L", f(rep.m_L)},
      {"m_ABL", f(rep.m_ABL)},
      // bound_K over quadrature atoms is a conservative surrogate for the
      // essential supremum of the continuous noise model.
      {"bound_K_note", "max over scenario atoms"}};
}

}  // namespace rplq
