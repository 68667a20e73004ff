#pragma once

#include <algorithm>
#include <array>
#include <cctype>
#include <charconv>
#include <filesystem>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>
#include <string_view>
#include <system_error>
#include <variant>
#include <vector>

#include <nlohmann/json.hpp>

#include "elasmatch/shapes/polyline.hpp"
#include "elasmatch/shapes/trimesh.hpp"

namespace elasmatch {

using AnyShape = std::variant<Polyline, TriMesh>;

enum class ShapeFormat { PolylineCsv, PolylineJson, Obj };

inline std::string_view to_string(ShapeFormat f) {
  switch (f) {
    case ShapeFormat::PolylineCsv: return "polyline-csv";
    case ShapeFormat::PolylineJson: return "polyline-json";
    case ShapeFormat::Obj: return "obj";
  }
  return "unknown";
}

inline ShapeFormat format_from_path(const std::filesystem::path& path) {
  std::string ext = path.extension().string();
  std::transform(ext.begin(), ext.end(), ext.begin(),
                 [](unsigned char ch) { return static_cast<char>(std::tolower(ch)); });
  if (ext == ".csv") return ShapeFormat::PolylineCsv;
  if (ext == ".json") return ShapeFormat::PolylineJson;
  if (ext == ".obj") return ShapeFormat::Obj;
  throw Error(ErrorKind::UnsupportedFormat, "cannot infer shape format from '" + path.string() + "'");
}

namespace detail {

/// 17 significant digits: enough to round-trip any double.
inline std::string format_double(double value) {
  std::array<char, 64> buf{};
  const auto res = std::to_chars(buf.data(), buf.data() + buf.size(), value,
                                 std::chars_format::general, 17);
  return std::string(buf.data(), res.ptr);
}

inline std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

inline double parse_double(std::string_view token, std::size_t line) {
  token = trim(token);
  if (!token.empty() && token.front() == '+') token.remove_prefix(1);
  double value = 0.0;
  const auto res = std::from_chars(token.data(), token.data() + token.size(), value);
  if (res.ec != std::errc{} || res.ptr != token.data() + token.size() || token.empty()) {
    throw ParseError("invalid number '" + std::string(token) + "'", line);
  }
  return value;
}

inline std::vector<std::string_view> split(std::string_view s, char sep) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  for (;;) {
    const std::size_t pos = s.find(sep, start);
    out.push_back(s.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

inline std::vector<std::string_view> split_whitespace(std::string_view s) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < s.size()) {
    while (i < s.size() && std::isspace(static_cast<unsigned char>(s[i]))) ++i;
    const std::size_t start = i;
    while (i < s.size() && !std::isspace(static_cast<unsigned char>(s[i]))) ++i;
    if (i > start) out.push_back(s.substr(start, i - start));
  }
  return out;
}

/// Runs a shape constructor, turning invariant violations into parse errors
/// without losing the original kind for degenerate input.
template <class F>
auto build_shape(F&& make) {
  try {
    return make();
  } catch (const DegenerateCellError&) {
    throw;
  } catch (const Error& e) {
    if (e.kind() == ErrorKind::InvalidShape) throw ParseError(e.what());
    throw;
  }
}

}  // namespace detail

// ---------------------------------------------------------------------------
// polyline-CSV:
//   # closed=true
//   x,y[,signal]
//   0,0[,s0]
// Row i carries the signal of edge (i, i+1); the last row of an open curve
// leaves the signal field empty.

inline Polyline read_polyline_csv(std::istream& in) {
  std::string line;
  std::size_t lineno = 0;
  if (!std::getline(in, line)) throw ParseError("empty file", 1);
  ++lineno;
  std::string_view first = detail::trim(line);
  bool closed = false;
  if (first == "# closed=true") {
    closed = true;
  } else if (first != "# closed=false") {
    throw ParseError("expected '# closed=true' or '# closed=false'", lineno);
  }
  if (!std::getline(in, line)) throw ParseError("missing header row", 2);
  ++lineno;
  const std::string_view header = detail::trim(line);
  bool has_signal = false;
  if (header == "x,y,signal") {
    has_signal = true;
  } else if (header == "x,y,z" || header == "x,y,z,signal") {
    throw Error(ErrorKind::UnsupportedShape, "space curves are not supported; curves must be planar");
  } else if (header != "x,y") {
    throw ParseError("expected header 'x,y' or 'x,y,signal'", lineno);
  }

  PointList<2> vertices;
  std::vector<std::optional<double>> row_signal;
  while (std::getline(in, line)) {
    ++lineno;
    const std::string_view row = detail::trim(line);
    if (row.empty() || row.front() == '#') continue;
    const auto fields = detail::split(row, ',');
    const std::size_t expected = has_signal ? 3 : 2;
    if (fields.size() != expected) {
      if (!has_signal && fields.size() == 3) {
        throw Error(ErrorKind::UnsupportedShape, "line " + std::to_string(lineno) +
                                                     ": three coordinates; curves must be planar");
      }
      throw ParseError("expected " + std::to_string(expected) + " fields", lineno);
    }
    vertices.emplace_back(detail::parse_double(fields[0], lineno),
                          detail::parse_double(fields[1], lineno));
    if (has_signal) {
      row_signal.push_back(detail::trim(fields[2]).empty()
                               ? std::nullopt
                               : std::optional(detail::parse_double(fields[2], lineno)));
    }
  }

  std::optional<std::vector<double>> sig;
  if (has_signal) {
    // Open curves: the final row has no edge of its own.
    const std::size_t cells = closed ? row_signal.size() : row_signal.size() - std::min<std::size_t>(1, row_signal.size());
    std::vector<double> values;
    for (std::size_t c = 0; c < cells; ++c) {
      if (!row_signal[c]) throw ParseError("missing signal value for edge " + std::to_string(c));
      values.push_back(*row_signal[c]);
    }
    sig = std::move(values);
  }
  return detail::build_shape([&] { return Polyline(std::move(vertices), closed, std::move(sig)); });
}

inline void write_polyline_csv(const Polyline& curve, std::ostream& out) {
  out << "# closed=" << (curve.closed() ? "true" : "false") << '\n';
  const auto& sig = curve.signal();
  out << (sig ? "x,y,signal" : "x,y") << '\n';
  const auto& v = curve.vertices();
  for (std::size_t i = 0; i < v.size(); ++i) {
    out << detail::format_double(v[i].x()) << ',' << detail::format_double(v[i].y());
    if (sig) {
      out << ',';
      if (i < sig->size()) out << detail::format_double((*sig)[i]);
    }
    out << '\n';
  }
}

// ---------------------------------------------------------------------------
// polyline-JSON: {"vertices": [[x, y], ...], "closed": bool, "signal": [...]}

inline Polyline polyline_from_json(const nlohmann::json& j) {
  if (!j.is_object() || !j.contains("vertices") || !j.contains("closed")) {
    throw ParseError("polyline JSON needs 'vertices' and 'closed'");
  }
  const auto& jv = j.at("vertices");
  if (!jv.is_array()) throw ParseError("'vertices' must be an array");
  if (!j.at("closed").is_boolean()) throw ParseError("'closed' must be a boolean");
  PointList<2> vertices;
  vertices.reserve(jv.size());
  for (std::size_t i = 0; i < jv.size(); ++i) {
    const auto& p = jv[i];
    if (!p.is_array()) throw ParseError("vertex " + std::to_string(i) + " is not an array");
    if (p.size() == 3) {
      throw Error(ErrorKind::UnsupportedShape, "vertex " + std::to_string(i) +
                                                   " has three coordinates; curves must be planar");
    }
    if (p.size() != 2 || !p[0].is_number() || !p[1].is_number()) {
      throw ParseError("vertex " + std::to_string(i) + " must be [x, y]");
    }
    vertices.emplace_back(p[0].get<double>(), p[1].get<double>());
  }
  std::optional<std::vector<double>> signal;
  if (j.contains("signal") && !j.at("signal").is_null()) {
    const auto& js = j.at("signal");
    if (!js.is_array()) throw ParseError("'signal' must be an array");
    std::vector<double> s;
    for (const auto& x : js) {
      if (!x.is_number()) throw ParseError("'signal' entries must be numbers");
      s.push_back(x.get<double>());
    }
    signal = std::move(s);
  }
  const bool closed = j.at("closed").get<bool>();
  return detail::build_shape([&] { return Polyline(std::move(vertices), closed, std::move(signal)); });
}

inline nlohmann::json polyline_to_json(const Polyline& curve) {
  nlohmann::json j;
  auto& jv = j["vertices"] = nlohmann::json::array();
  for (const auto& p : curve.vertices()) jv.push_back({p.x(), p.y()});
  j["closed"] = curve.closed();
  if (curve.signal()) j["signal"] = *curve.signal();
  return j;
}

inline Polyline read_polyline_json(std::istream& in) {
  const std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    const std::size_t upto = std::min<std::size_t>(e.byte, text.size());
    const auto line = static_cast<std::size_t>(std::count(text.begin(), text.begin() + static_cast<std::ptrdiff_t>(upto), '\n')) + 1;
    throw ParseError(e.what(), line);
  }
  return polyline_from_json(j);
}

inline void write_polyline_json(const Polyline& curve, std::ostream& out) {
  out << polyline_to_json(curve).dump(2) << '\n';
}

// ---------------------------------------------------------------------------
// OBJ: only `v` and `f` records are honoured (1-based or negative relative
// indices; `a/b/c` tokens use the position index). Per-face signals are
// stored as `#s value` comment lines in face order.

inline TriMesh read_obj(std::istream& in) {
  PointList<3> vertices;
  std::vector<Face> faces;
  std::vector<double> signal;
  std::vector<std::size_t> face_lines;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const std::string_view row = detail::trim(line);
    if (row.empty()) continue;
    const auto tokens = detail::split_whitespace(row);
    const std::string_view tag = tokens.front();
    if (tag == "v") {
      if (tokens.size() < 4) throw ParseError("vertex needs three coordinates", lineno);
      vertices.emplace_back(detail::parse_double(tokens[1], lineno),
                            detail::parse_double(tokens[2], lineno),
                            detail::parse_double(tokens[3], lineno));
    } else if (tag == "f") {
      if (tokens.size() != 4) throw ParseError("only triangular faces are supported", lineno);
      Face f{};
      for (std::size_t k = 0; k < 3; ++k) {
        const std::string_view tok = tokens[k + 1].substr(0, tokens[k + 1].find('/'));
        long long idx = 0;
        const auto res = std::from_chars(tok.data(), tok.data() + tok.size(), idx);
        if (res.ec != std::errc{} || res.ptr != tok.data() + tok.size() || idx == 0) {
          throw ParseError("invalid face index '" + std::string(tokens[k + 1]) + "'", lineno);
        }
        const long long resolved = idx > 0 ? idx - 1 : static_cast<long long>(vertices.size()) + idx;
        if (resolved < 0) throw ParseError("face index " + std::to_string(idx) + " out of range", lineno);
        f[k] = static_cast<std::size_t>(resolved);
      }
      faces.push_back(f);
      face_lines.push_back(lineno);
    } else if (tag == "#s") {
      if (tokens.size() != 2) throw ParseError("signal comment needs one value", lineno);
      signal.push_back(detail::parse_double(tokens[1], lineno));
    }
  }
  // Forward references are legal in OBJ, so range checks wait for the end.
  for (std::size_t i = 0; i < faces.size(); ++i) {
    for (std::size_t idx : faces[i]) {
      if (idx >= vertices.size()) {
        throw ParseError("face index " + std::to_string(idx + 1) + " out of range (" +
                             std::to_string(vertices.size()) + " vertices)",
                         face_lines[i]);
      }
    }
  }
  std::optional<std::vector<double>> sig;
  if (!signal.empty()) {
    if (signal.size() != faces.size()) {
      throw ParseError(std::to_string(signal.size()) + " signal values for " +
                       std::to_string(faces.size()) + " faces");
    }
    sig = std::move(signal);
  }
  return detail::build_shape([&] { return TriMesh(std::move(vertices), std::move(faces), std::move(sig)); });
}

inline void write_obj(const TriMesh& mesh, std::ostream& out) {
  for (const auto& p : mesh.vertices()) {
    out << "v " << detail::format_double(p.x()) << ' ' << detail::format_double(p.y()) << ' '
        << detail::format_double(p.z()) << '\n';
  }
  for (const Face& f : mesh.faces()) {
    out << "f " << f[0] + 1 << ' ' << f[1] + 1 << ' ' << f[2] + 1 << '\n';
  }
  if (mesh.signal()) {
    for (double s : *mesh.signal()) out << "#s " << detail::format_double(s) << '\n';
  }
}

// ---------------------------------------------------------------------------

inline AnyShape read_shape(std::istream& in, ShapeFormat format) {
  switch (format) {
    case ShapeFormat::PolylineCsv: return read_polyline_csv(in);
    case ShapeFormat::PolylineJson: return read_polyline_json(in);
    case ShapeFormat::Obj: return read_obj(in);
  }
  throw Error(ErrorKind::UnsupportedFormat, "unknown format");
}

inline AnyShape read_shape(const std::filesystem::path& path, std::optional<ShapeFormat> format = std::nullopt) {
  const ShapeFormat fmt = format ? *format : format_from_path(path);
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open '" + path.string() + "'");
  try {
    return read_shape(in, fmt);
  } catch (const ParseError& e) {
    throw ParseError(path.string() + ": " + e.what());
  }
}

inline void write_shape(const AnyShape& shape, std::ostream& out, ShapeFormat format) {
  if (const auto* curve = std::get_if<Polyline>(&shape)) {
    if (format == ShapeFormat::PolylineCsv) return write_polyline_csv(*curve, out);
    if (format == ShapeFormat::PolylineJson) return write_polyline_json(*curve, out);
    throw Error(ErrorKind::UnsupportedFormat, "polylines cannot be written as OBJ");
  }
  const auto& mesh = std::get<TriMesh>(shape);
  if (format != ShapeFormat::Obj) {
    throw Error(ErrorKind::UnsupportedFormat, "meshes can only be written as OBJ");
  }
  write_obj(mesh, out);
}

inline void write_shape(const AnyShape& shape, const std::filesystem::path& path,
                        std::optional<ShapeFormat> format = std::nullopt) {
  const ShapeFormat fmt = format ? *format : format_from_path(path);
  std::ostringstream buf;
  write_shape(shape, buf, fmt);
  std::ofstream out(path);
  if (!out) throw Error(ErrorKind::IoError, "cannot write '" + path.string() + "'");
  out << buf.str();
  if (!out) throw Error(ErrorKind::IoError, "write to '" + path.string() + "' failed");
}

}  // namespace elasmatch
