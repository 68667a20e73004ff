#pragma once

#include <cstdint>
#include <istream>
#include <ostream>
#include <set>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Core>
#include <nlohmann/json.hpp>

#include "elasmatch/matching/match.hpp"
#include "elasmatch/pipeline/distance_matrix.hpp"
#include "elasmatch/pipeline/mds.hpp"
#include "elasmatch/shapes/io.hpp"

namespace elasmatch {

/// Everything a CLI run needs besides its input paths.
struct RunConfig {
  MatchConfig matching;
  bool symmetrize = false;
  int mds_dimension = 2;
  std::uint64_t seed = 0;
  int threads = 1;
  int interpolation_steps = 11;
};

namespace detail {

using nlohmann::json;

/// Rejects keys outside `allowed` so that typos in config files surface.
inline void check_keys(const json& j, const std::string& section, std::initializer_list<const char*> allowed) {
  if (!j.is_object()) throw Error(ErrorKind::ConfigError, "section '" + section + "' must be an object");
  std::set<std::string> ok(allowed.begin(), allowed.end());
  for (const auto& [key, value] : j.items()) {
    if (!ok.count(key)) throw Error(ErrorKind::ConfigError, "unknown key '" + key + "' in '" + section + "'");
  }
}

template <class T>
void read_if(const json& j, const char* key, T& out, const std::string& section) {
  if (!j.contains(key)) return;
  try {
    out = j.at(key).get<T>();
  } catch (const json::exception& e) {
    throw Error(ErrorKind::ConfigError, section + "." + key + ": " + e.what());
  }
}

inline void read_optional(const json& j, const char* key, std::optional<double>& out, const std::string& section) {
  if (!j.contains(key)) return;
  if (j.at(key).is_null()) {
    out.reset();
    return;
  }
  double v = 0.0;
  read_if(j, key, v, section);
  out = v;
}

inline json optional_json(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }

}  // namespace detail

inline nlohmann::json to_json(const KernelConfig& k) {
  return {{"position", std::string(to_string(k.position))},
          {"direction", std::string(to_string(k.direction))},
          {"signal_scale", detail::optional_json(k.signal_scale)}};
}

inline KernelConfig kernel_config_from_json(const nlohmann::json& j, KernelConfig k = {}) {
  detail::check_keys(j, "kernel", {"position", "direction", "signal_scale"});
  std::string pos(to_string(k.position)), dir(to_string(k.direction));
  detail::read_if(j, "position", pos, "kernel");
  detail::read_if(j, "direction", dir, "kernel");
  if (pos == "gaussian") k.position = PositionKernel::Gaussian;
  else if (pos == "cauchy") k.position = PositionKernel::Cauchy;
  else throw Error(ErrorKind::ConfigError, "kernel.position must be 'gaussian' or 'cauchy'");
  if (dir == "linear") k.direction = DirectionKernel::Linear;
  else if (dir == "squared") k.direction = DirectionKernel::Squared;
  else throw Error(ErrorKind::ConfigError, "kernel.direction must be 'linear' or 'squared'");
  detail::read_optional(j, "signal_scale", k.signal_scale, "kernel");
  return k;
}

inline nlohmann::json to_json(const LbfgsSettings& s) {
  return {{"memory", s.memory},
          {"gradient_tolerance", s.gradient_tolerance},
          {"step_tolerance", s.step_tolerance},
          {"max_iterations", s.max_iterations},
          {"c1", s.line_search.c1},
          {"c2", s.line_search.c2},
          {"max_line_search_evaluations", s.line_search.max_evaluations}};
}

inline LbfgsSettings lbfgs_settings_from_json(const nlohmann::json& j, LbfgsSettings s = {}) {
  const std::string sec = "optimizer";
  detail::check_keys(j, sec, {"memory", "gradient_tolerance", "step_tolerance", "max_iterations", "c1", "c2",
                              "max_line_search_evaluations"});
  detail::read_if(j, "memory", s.memory, sec);
  detail::read_if(j, "gradient_tolerance", s.gradient_tolerance, sec);
  detail::read_if(j, "step_tolerance", s.step_tolerance, sec);
  detail::read_if(j, "max_iterations", s.max_iterations, sec);
  detail::read_if(j, "c1", s.line_search.c1, sec);
  detail::read_if(j, "c2", s.line_search.c2, sec);
  detail::read_if(j, "max_line_search_evaluations", s.line_search.max_evaluations, sec);
  if (s.memory < 0 || s.max_iterations < 0 || s.line_search.max_evaluations < 1) {
    throw Error(ErrorKind::ConfigError, "optimizer limits must be non-negative");
  }
  if (!(0.0 < s.line_search.c1 && s.line_search.c1 < s.line_search.c2 && s.line_search.c2 < 1.0)) {
    throw Error(ErrorKind::ConfigError, "line search needs 0 < c1 < c2 < 1");
  }
  return s;
}

/// Config file layout (all keys optional; missing keys keep defaults):
///   {"kernel": {...}, "matching": {...}, "optimizer": {...},
///    "symmetrize": bool, "mds_dimension": int, "seed": int,
///    "threads": int, "interpolation_steps": int}
inline nlohmann::json to_json(const RunConfig& c, bool include_threads = true) {
  const MatchConfig& m = c.matching;
  nlohmann::json j = {
      {"kernel", to_json(m.kernel)},
      {"matching",
       {{"lambda0", detail::optional_json(m.lambda0)},
        {"rho", m.rho},
        {"max_stages", m.max_stages},
        {"sigma_schedule", m.sigma_schedule},
        {"residual_tolerance", m.residual_tolerance},
        {"init", std::string(to_string(m.init))}}},
      {"optimizer", to_json(m.optimizer)},
      {"symmetrize", c.symmetrize},
      {"mds_dimension", c.mds_dimension},
      {"seed", c.seed},
      {"interpolation_steps", c.interpolation_steps}};
  if (include_threads) j["threads"] = c.threads;
  return j;
}

inline RunConfig run_config_from_json(const nlohmann::json& j) {
  RunConfig c;
  detail::check_keys(j, "config", {"kernel", "matching", "optimizer", "symmetrize", "mds_dimension", "seed",
                                   "threads", "interpolation_steps"});
  if (j.contains("kernel")) c.matching.kernel = kernel_config_from_json(j.at("kernel"));
  if (j.contains("optimizer")) c.matching.optimizer = lbfgs_settings_from_json(j.at("optimizer"));
  if (j.contains("matching")) {
    const auto& m = j.at("matching");
    const std::string sec = "matching";
    detail::check_keys(m, sec, {"lambda0", "rho", "max_stages", "sigma_schedule", "residual_tolerance", "init"});
    detail::read_optional(m, "lambda0", c.matching.lambda0, sec);
    detail::read_if(m, "rho", c.matching.rho, sec);
    detail::read_if(m, "max_stages", c.matching.max_stages, sec);
    detail::read_if(m, "sigma_schedule", c.matching.sigma_schedule, sec);
    detail::read_if(m, "residual_tolerance", c.matching.residual_tolerance, sec);
    std::string init(to_string(c.matching.init));
    detail::read_if(m, "init", init, sec);
    if (init == "template") c.matching.init = InitMode::Template;
    else if (init == "custom") c.matching.init = InitMode::Custom;
    else throw Error(ErrorKind::ConfigError, "matching.init must be 'template' or 'custom'");
  }
  detail::read_if(j, "symmetrize", c.symmetrize, "config");
  detail::read_if(j, "mds_dimension", c.mds_dimension, "config");
  detail::read_if(j, "seed", c.seed, "config");
  detail::read_if(j, "threads", c.threads, "config");
  detail::read_if(j, "interpolation_steps", c.interpolation_steps, "config");
  if (c.mds_dimension < 1) throw Error(ErrorKind::ConfigError, "mds_dimension must be at least 1");
  if (c.interpolation_steps < 2) throw Error(ErrorKind::ConfigError, "interpolation_steps must be at least 2");
  if (c.threads < 1) throw Error(ErrorKind::ConfigError, "threads must be at least 1");
  c.matching.threads = c.threads;
  c.matching.validate();
  return c;
}

inline nlohmann::json to_json(const EnergyTerms& t) {
  return {{"srnf", t.srnf}, {"varifold", t.varifold}, {"lambda", t.lambda}, {"total", t.total}};
}

inline nlohmann::json to_json(const StageRecord& s) {
  nlohmann::json j = {{"scale_index", s.scale_index},
                      {"lambda_stage", s.lambda_stage},
                      {"sigma", s.sigma},
                      {"lambda", s.lambda},
                      {"target_self", s.target_self},
                      {"final", to_json(s.final_terms)},
                      {"residual", s.residual},
                      {"tolerance", s.tolerance},
                      {"reference_residual", s.reference_residual},
                      {"iterations", s.iterations},
                      {"evaluations", s.evaluations},
                      {"gradient_norm", s.gradient_norm},
                      {"termination", std::string(to_string(s.reason))},
                      {"aborted", s.aborted}};
  if (s.aborted) j["abort_message"] = s.abort_message;
  return j;
}

/// Result summary without the shape itself (written separately). Holds no
/// timings or thread counts, so identical inputs give identical records.
template <DiscreteShape S>
nlohmann::json to_json(const MatchResult<S>& r) {
  nlohmann::json stages = nlohmann::json::array();
  for (const auto& s : r.stages) stages.push_back(to_json(s));
  return {{"converged", r.converged},
          {"aborted", r.aborted},
          {"final_residual", r.final_residual},
          {"final_tolerance", r.final_tolerance},
          {"reference_self", r.reference_self},
          {"srnf_distance", r.srnf_distance},
          {"vertex_count", r.shape.vertex_count()},
          {"cell_count", r.shape.cell_count()},
          {"stages", std::move(stages)}};
}

/// One row per recorded iterate of every stage.
template <DiscreteShape S>
std::string energy_trace_csv(const MatchResult<S>& r) {
  std::ostringstream out;
  out << "stage,scale_index,lambda_stage,iteration,sigma,lambda,srnf,varifold,total\n";
  for (std::size_t s = 0; s < r.stages.size(); ++s) {
    const auto& st = r.stages[s];
    for (std::size_t it = 0; it < st.trace.size(); ++it) {
      const auto& t = st.trace[it];
      out << s << ',' << st.scale_index << ',' << st.lambda_stage << ',' << it << ','
          << detail::format_double(st.sigma) << ',' << detail::format_double(st.lambda) << ','
          << detail::format_double(t.srnf) << ',' << detail::format_double(t.varifold) << ','
          << detail::format_double(t.total) << '\n';
    }
  }
  return out.str();
}

inline nlohmann::json to_json(const DistanceMatrixRecord& rec) {
  nlohmann::json pairs = nlohmann::json::array();
  for (const auto& p : rec.pairs) {
    nlohmann::json j = {{"template", rec.ids[p.row]},
                        {"target", rec.ids[p.col]},
                        {"ok", p.ok},
                        {"distance", p.ok ? nlohmann::json(p.distance) : nlohmann::json(nullptr)},
                        {"final_residual", p.final_residual},
                        {"stages", p.stages},
                        {"converged", p.converged}};
    if (!p.ok) j["error"] = p.error;
    pairs.push_back(std::move(j));
  }
  return {{"ids", rec.ids}, {"partial_failure", rec.partial_failure()}, {"pairs", std::move(pairs)}};
}

// Matrix CSV: header "id,<id_1>,...,<id_n>", then one "<id_i>,d_i1,..." row
// per shape. Missing entries are written as "nan".

inline void write_matrix_csv(const std::vector<std::string>& ids, const Eigen::MatrixXd& m, std::ostream& out) {
  out << "id";
  for (const auto& id : ids) out << ',' << id;
  out << '\n';
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    out << ids[static_cast<std::size_t>(i)];
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
      out << ',' << (std::isnan(m(i, j)) ? std::string("nan") : detail::format_double(m(i, j)));
    }
    out << '\n';
  }
}

inline std::pair<std::vector<std::string>, Eigen::MatrixXd> read_matrix_csv(std::istream& in) {
  std::string line;
  std::size_t lineno = 0;
  if (!std::getline(in, line)) throw ParseError("empty matrix file", 1);
  ++lineno;
  const auto header = detail::split(detail::trim(line), ',');
  if (header.empty() || detail::trim(header[0]) != "id") throw ParseError("header must start with 'id'", 1);
  std::vector<std::string> ids;
  for (std::size_t k = 1; k < header.size(); ++k) ids.emplace_back(detail::trim(header[k]));
  const auto n = static_cast<Eigen::Index>(ids.size());
  if (n == 0) throw ParseError("matrix has no columns", 1);
  Eigen::MatrixXd m(n, n);
  Eigen::Index row = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const std::string_view text = detail::trim(line);
    if (text.empty()) continue;
    if (row >= n) throw ParseError("more rows than columns", lineno);
    const auto fields = detail::split(text, ',');
    if (fields.size() != ids.size() + 1) throw ParseError("wrong number of fields", lineno);
    if (detail::trim(fields[0]) != ids[static_cast<std::size_t>(row)]) {
      throw ParseError("row label does not match column order", lineno);
    }
    for (Eigen::Index j = 0; j < n; ++j) {
      m(row, j) = detail::parse_double(fields[static_cast<std::size_t>(j) + 1], lineno);
    }
    ++row;
  }
  if (row != n) throw ParseError("matrix is not square");
  return {std::move(ids), std::move(m)};
}

inline void write_mds_csv(const std::vector<std::string>& ids, const MdsResult& mds, std::ostream& out) {
  out << "id";
  for (Eigen::Index k = 0; k < mds.coordinates.cols(); ++k) out << ",x" << k + 1;
  out << '\n';
  for (Eigen::Index i = 0; i < mds.coordinates.rows(); ++i) {
    out << ids[static_cast<std::size_t>(i)];
    for (Eigen::Index k = 0; k < mds.coordinates.cols(); ++k) {
      out << ',' << detail::format_double(mds.coordinates(i, k));
    }
    out << '\n';
  }
}

}  // namespace elasmatch
