// elasmatch command-line tool: match, distance, dist-matrix, mds, interpolate.

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#if __has_include(<CLI/CLI.hpp>)
#include <CLI/CLI.hpp>
#else
#include <CLI11.hpp>
#endif
#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include "elasmatch/elasmatch.hpp"

namespace fs = std::filesystem;
using namespace elasmatch;
using nlohmann::json;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitNumerical = 1;
constexpr int kExitInput = 2;
constexpr int kExitPartial = 3;

struct Options {
  std::string config_path;
  std::string output = ".";
  std::optional<std::uint64_t> seed;
  std::optional<int> threads;
  bool print_config = false;

  std::vector<std::string> shapes;
  std::string init_path;
  std::string matrix_path;
  std::optional<int> dim;
  std::optional<int> steps;
  bool symmetrize = false;
};

int exit_code_for(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::DegenerateCell:
    case ErrorKind::ZeroCell:
    case ErrorKind::NonFiniteValue:
      return kExitNumerical;
    default:
      return kExitInput;
  }
}

json error_record(const std::string& kind, const std::string& message, std::optional<std::size_t> line = {}) {
  json j = {{"error", kind}, {"message", message}};
  if (line) j["line"] = *line;
  return j;
}

void report_error(const json& record, const Options& opt) {
  std::cerr << record.dump() << '\n';
  std::error_code ec;
  fs::create_directories(opt.output, ec);
  std::ofstream out(fs::path(opt.output) / "error.json");
  if (out) out << record.dump(2) << '\n';
}

void configure_logging() {
  auto logger = spdlog::stderr_color_mt("elasmatch");
  spdlog::set_default_logger(logger);
  spdlog::set_pattern("[%l] %v");
  spdlog::set_level(spdlog::level::info);
  if (const char* level = std::getenv("ELASMATCH_LOG_LEVEL")) {
    spdlog::set_level(spdlog::level::from_str(level));
  }
}

RunConfig load_config(const Options& opt) {
  RunConfig cfg;
  if (!opt.config_path.empty()) {
    std::ifstream in(opt.config_path);
    if (!in) throw Error(ErrorKind::ConfigError, "cannot open config file '" + opt.config_path + "'");
    json j;
    try {
      j = json::parse(in);
    } catch (const json::parse_error& e) {
      throw Error(ErrorKind::ConfigError, "config file is not valid JSON: " + std::string(e.what()));
    }
    cfg = run_config_from_json(j);
  }
  if (opt.seed) cfg.seed = *opt.seed;
  if (opt.threads) {
    if (*opt.threads < 1) throw Error(ErrorKind::ConfigError, "--threads must be at least 1");
    cfg.threads = *opt.threads;
    cfg.matching.threads = cfg.threads;
  }
  if (opt.dim) cfg.mds_dimension = *opt.dim;
  if (opt.steps) cfg.interpolation_steps = *opt.steps;
  if (opt.symmetrize) cfg.symmetrize = true;
  return cfg;
}

fs::path prepare_output(const Options& opt) {
  const fs::path dir(opt.output);
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec || !fs::is_directory(dir)) throw Error(ErrorKind::IoError, "cannot create output directory '" + opt.output + "'");
  return dir;
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorKind::IoError, "cannot write '" + path.string() + "'");
  out << text;
}

void write_json(const fs::path& path, const json& j) { write_text(path, j.dump(2) + "\n"); }

json provenance(const RunConfig& cfg, const std::vector<std::string>& inputs) {
  return {{"config", to_json(cfg, false)}, {"seed", cfg.seed}, {"inputs", inputs}};
}

void warn_orientation(const AnyShape& s, const std::string& path) {
  if (const auto* m = std::get_if<TriMesh>(&s); m && !m->orientation_consistent()) {
    spdlog::warn("{}: face orientation is inconsistent; normals of neighbouring faces disagree", path);
  }
}

std::vector<AnyShape> read_all(const std::vector<std::string>& paths) {
  std::vector<AnyShape> out;
  for (const auto& p : paths) {
    out.push_back(read_shape(fs::path(p)));
    warn_orientation(out.back(), p);
  }
  for (const auto& s : out) {
    if (s.index() != out.front().index()) {
      throw Error(ErrorKind::UnsupportedShape, "inputs mix curves and surfaces");
    }
  }
  return out;
}

template <class S>
std::vector<S> as(const std::vector<AnyShape>& shapes, std::size_t from = 0) {
  std::vector<S> out;
  for (std::size_t i = from; i < shapes.size(); ++i) out.push_back(std::get<S>(shapes[i]));
  return out;
}

void log_stages(const auto& result) {
  for (const auto& s : result.stages) {
    spdlog::debug("scale {} stage {}: lambda {:.4g}, residual {:.4g} (tol {:.4g}), {} iterations, {}", s.scale_index,
                  s.lambda_stage, s.lambda, s.residual, s.tolerance, s.iterations, to_string(s.reason));
  }
}

int cmd_match(const Options& opt, const RunConfig& cfg) {
  if (opt.shapes.size() < 2) throw Error(ErrorKind::ConfigError, "match needs a template and at least one target");
  const auto shapes = read_all(opt.shapes);
  const fs::path out = prepare_output(opt);
  const fs::path template_path(opt.shapes.front());
  const ShapeFormat format = format_from_path(template_path);

  return std::visit(
      [&](const auto& f0) -> int {
        using S = std::decay_t<decltype(f0)>;
        std::optional<PointList<S::kDim>> initial;
        if (cfg.matching.init == InitMode::Custom) {
          if (opt.init_path.empty()) throw Error(ErrorKind::ConfigError, "init mode 'custom' needs --init PATH");
          const S init = std::get<S>(read_shape(fs::path(opt.init_path)));
          if (!init.same_structure(f0)) {
            throw Error(ErrorKind::StructureMismatch, "--init shape does not share the template's cells");
          }
          initial = init.vertices();
        }
        const std::vector<S> targets = as<S>(shapes, 1);
        const auto result = match<S>(f0, targets, cfg.matching, initial);
        log_stages(result);

        write_shape(AnyShape(result.shape), out / ("matched" + template_path.extension().string()), format);
        json record = provenance(cfg, opt.shapes);
        record["result"] = to_json(result);
        write_json(out / "result.json", record);
        write_text(out / "energy_trace.csv", energy_trace_csv(result));

        spdlog::info("final residual {:.6g} (tolerance {:.6g}), SRNF distance {:.6g}, {} stages",
                     result.final_residual, result.final_tolerance, result.srnf_distance, result.stages.size());
        if (result.aborted) {
          spdlog::error("a stage was aborted by a non-finite energy; the last valid iterate was written");
          report_error(error_record("NonFiniteValue", "matching aborted by a non-finite energy"), opt);
          return kExitNumerical;
        }
        if (!result.converged) spdlog::warn("varifold residual is above tolerance after all stages");
        return kExitOk;
      },
      shapes.front());
}

int cmd_distance(const Options& opt, const RunConfig& cfg) {
  if (opt.shapes.size() != 2) throw Error(ErrorKind::ConfigError, "distance needs exactly two shapes");
  const auto shapes = read_all(opt.shapes);
  const fs::path out = prepare_output(opt);
  return std::visit(
      [&](const auto& a) -> int {
        using S = std::decay_t<decltype(a)>;
        const S& b = std::get<S>(shapes[1]);
        const auto ab = unparametrized_distance(a, b, cfg.matching);
        json record = provenance(cfg, opt.shapes);
        record["distance"] = ab.distance;
        record["match"] = to_json(ab.match);
        bool aborted = ab.match.aborted;
        if (cfg.symmetrize) {
          const auto ba = unparametrized_distance(b, a, cfg.matching);
          record["reverse_distance"] = ba.distance;
          record["reverse_match"] = to_json(ba.match);
          record["symmetrized_distance"] = 0.5 * (ab.distance + ba.distance);
          aborted = aborted || ba.match.aborted;
        }
        write_json(out / "distance.json", record);
        std::cout << json{{"distance", record["distance"]},
                          {"symmetrized_distance", record.value("symmetrized_distance", json(nullptr))}}
                         .dump()
                  << '\n';
        if (aborted) {
          report_error(error_record("NonFiniteValue", "matching aborted by a non-finite energy"), opt);
          return kExitNumerical;
        }
        return kExitOk;
      },
      shapes.front());
}

int cmd_dist_matrix(const Options& opt, const RunConfig& cfg) {
  std::vector<std::string> ids;
  for (const auto& p : opt.shapes) ids.push_back(fs::path(p).stem().string());
  if (opt.shapes.size() < 2) throw Error(ErrorKind::ConfigError, "dist-matrix needs at least two shapes");
  const auto shapes = read_all(opt.shapes);
  const fs::path out = prepare_output(opt);
  const DistanceMatrixRecord rec = std::visit(
      [&](const auto& first) {
        using S = std::decay_t<decltype(first)>;
        return distance_matrix<S>(ids, as<S>(shapes), cfg.matching, cfg.threads);
      },
      shapes.front());

  std::ostringstream raw, sym;
  write_matrix_csv(rec.ids, rec.raw, raw);
  write_matrix_csv(rec.ids, rec.symmetrized, sym);
  write_text(out / "raw.csv", raw.str());
  write_text(out / "symmetrized.csv", sym.str());
  json record = provenance(cfg, opt.shapes);
  record["record"] = to_json(rec);
  write_json(out / "record.json", record);

  if (rec.partial_failure()) {
    std::size_t failed = 0;
    for (const auto& p : rec.pairs) {
      if (!p.ok) {
        ++failed;
        spdlog::error("pair {} -> {} failed: {}", rec.ids[p.row], rec.ids[p.col], p.error);
      }
    }
    report_error(error_record("PartialFailure", std::to_string(failed) + " of " + std::to_string(rec.pairs.size()) +
                                                    " pairs failed; their entries are missing"),
                 opt);
    return kExitPartial;
  }
  spdlog::info("{} pairs matched", rec.pairs.size());
  return kExitOk;
}

int cmd_mds(const Options& opt, const RunConfig& cfg) {
  std::ifstream in(opt.matrix_path);
  if (!in) throw ParseError("cannot open '" + opt.matrix_path + "'");
  auto [ids, d] = read_matrix_csv(in);
  if (cfg.symmetrize) d = symmetrize(d);
  const fs::path out = prepare_output(opt);
  const MdsResult r = classical_mds(d, cfg.mds_dimension);
  if (r.clamped > 0) {
    spdlog::warn("{} of the selected eigenvalues were negative and clamped to zero; the matrix is not Euclidean",
                 r.clamped);
  }
  std::ostringstream coords;
  write_mds_csv(ids, r, coords);
  write_text(out / "coordinates.csv", coords.str());
  std::vector<double> eig(r.eigenvalues.data(), r.eigenvalues.data() + r.eigenvalues.size());
  json record = provenance(cfg, {opt.matrix_path});
  record["method"] = "classical";
  record["dimension"] = cfg.mds_dimension;
  record["symmetrized"] = cfg.symmetrize;
  record["eigenvalues"] = eig;
  record["clamped"] = r.clamped;
  record["ids"] = ids;
  write_json(out / "mds.json", record);
  return kExitOk;
}

int cmd_interpolate(const Options& opt, const RunConfig& cfg) {
  if (opt.shapes.size() != 2) throw Error(ErrorKind::ConfigError, "interpolate needs exactly two shapes");
  const auto shapes = read_all(opt.shapes);
  if (!std::holds_alternative<Polyline>(shapes[0])) {
    throw Error(ErrorKind::UnsupportedShape, "interpolation is only available for planar curves");
  }
  const fs::path out = prepare_output(opt);
  const auto frames =
      srnf_interpolate(std::get<Polyline>(shapes[0]), std::get<Polyline>(shapes[1]), cfg.interpolation_steps);
  const fs::path first(opt.shapes.front());
  const ShapeFormat format = format_from_path(first);
  json list = json::array();
  for (std::size_t k = 0; k < frames.size(); ++k) {
    char name[32];
    std::snprintf(name, sizeof name, "frame_%03zu", k);
    const std::string file = name + first.extension().string();
    write_shape(AnyShape(frames[k].curve), out / file, format);
    list.push_back({{"index", k}, {"t", frames[k].t}, {"file", file}, {"residual", frames[k].residual}});
  }
  json record = provenance(cfg, opt.shapes);
  record["steps"] = frames.size();
  record["frames"] = std::move(list);
  write_json(out / "manifest.json", record);
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  configure_logging();
  Options opt;
  CLI::App app{"Elastic shape matching with SRNF and varifold fidelity"};
  app.require_subcommand(0, 1);
  app.fallthrough();
  app.add_option("--config", opt.config_path, "JSON config file");
  app.add_option("-o,--output", opt.output, "output directory");
  app.add_option("--seed", opt.seed, "random seed (recorded in outputs)");
  app.add_option("--threads", opt.threads, "worker threads");
  app.add_flag("--print-config", opt.print_config, "print the effective config and exit");

  auto* match_cmd = app.add_subcommand("match", "deform a template onto a target");
  match_cmd->add_option("shapes", opt.shapes, "TEMPLATE TARGET [TARGET...]; several targets form one shape")
      ->required();
  match_cmd->add_option("--init", opt.init_path, "initial vertices for init mode 'custom'");

  auto* distance_cmd = app.add_subcommand("distance", "elastic distance between two unparametrized shapes");
  distance_cmd->add_option("shapes", opt.shapes, "A B")->required();
  distance_cmd->add_flag("--symmetrize", opt.symmetrize, "also compute d(B, A) and the average");

  auto* matrix_cmd = app.add_subcommand("dist-matrix", "all pairwise distances");
  matrix_cmd->add_option("shapes", opt.shapes, "shape files; identifiers are the file stems")->required();

  auto* mds_cmd = app.add_subcommand("mds", "classical MDS of a distance matrix CSV");
  mds_cmd->add_option("matrix", opt.matrix_path, "matrix CSV")->required();
  mds_cmd->add_option("--dim", opt.dim, "embedding dimension");
  mds_cmd->add_flag("--symmetrize", opt.symmetrize, "symmetrize the matrix first");

  auto* interp_cmd = app.add_subcommand("interpolate", "SRNF interpolation between two curves");
  interp_cmd->add_option("shapes", opt.shapes, "A B")->required();
  interp_cmd->add_option("--steps", opt.steps, "number of frames");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    report_error(error_record("UsageError", e.what()), opt);
    return kExitInput;
  }

  try {
    const RunConfig cfg = load_config(opt);
    if (opt.print_config) {
      std::cout << to_json(cfg).dump(2) << '\n';
      return kExitOk;
    }
    if (*match_cmd) return cmd_match(opt, cfg);
    if (*distance_cmd) return cmd_distance(opt, cfg);
    if (*matrix_cmd) return cmd_dist_matrix(opt, cfg);
    if (*mds_cmd) return cmd_mds(opt, cfg);
    if (*interp_cmd) return cmd_interpolate(opt, cfg);
    std::cerr << app.help();
    return kExitInput;
  } catch (const ParseError& e) {
    report_error(error_record("ParseError", e.what(), e.line()), opt);
    return kExitInput;
  } catch (const Error& e) {
    spdlog::debug("{}", e.what());
    report_error(error_record(std::string(to_string(e.kind())), e.what()), opt);
    return exit_code_for(e.kind());
  } catch (const std::exception& e) {
    report_error(error_record("InternalError", e.what()), opt);
    return kExitNumerical;
  }
}
