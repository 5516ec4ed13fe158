#pragma once

#include <charconv>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

#include "cvq/entanglement.hpp"
#include "cvq/gaussian_state.hpp"

namespace cvq {

using Json = nlohmann::ordered_json;

// ---------------------------------------------------------------------------
// Number formatting
// ---------------------------------------------------------------------------

/// Shortest decimal string that parses back to the same double.
inline std::string format_exact(double x) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof(buf), x);
  return std::string(buf, res.ptr);
}

/// Four significant figures, trailing zeros kept: 0.21 -> "0.2100".
inline std::string format_sig4(double x) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%#.4g", x);
  return buf;
}

namespace detail {

inline std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

inline std::vector<std::string_view> split_fields(std::string_view line, bool allow_commas) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  auto is_sep = [&](char ch) { return ch == ' ' || ch == '\t' || ch == '\r' || (allow_commas && ch == ','); };
  while (i < line.size()) {
    while (i < line.size() && is_sep(line[i])) ++i;
    const auto start = i;
    while (i < line.size() && !is_sep(line[i])) ++i;
    if (i > start) out.push_back(line.substr(start, i - start));
  }
  return out;
}

inline std::string where(const std::string& source, std::size_t line) {
  return source + ":" + std::to_string(line);
}

inline double parse_double(std::string_view field, const std::string& source, std::size_t line) {
  double value = 0.0;
  const char* first = field.data();
  const char* last = field.data() + field.size();
  if (!field.empty() && *first == '+') ++first;
  auto [ptr, ec] = std::from_chars(first, last, value);
  if (ec != std::errc() || ptr != last || !std::isfinite(value)) {
    throw Error(ErrorCode::ParseError, where(source, line) + ": '" + std::string(field) + "' is not a finite number");
  }
  return value;
}

inline int parse_int(std::string_view field, const std::string& source, std::size_t line) {
  int value = 0;
  const char* first = field.data();
  const char* last = field.data() + field.size();
  if (!field.empty() && *first == '+') ++first;
  auto [ptr, ec] = std::from_chars(first, last, value);
  if (ec != std::errc() || ptr != last) {
    throw Error(ErrorCode::ParseError, where(source, line) + ": '" + std::string(field) + "' is not an integer");
  }
  return value;
}

inline std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::ParseError, "cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

/// Row of an (X1..Xn, Y1..Yn) ordered quantity that lands at interleaved row k.
inline Eigen::Index xxpp_source(Eigen::Index k, Eigen::Index n) { return k % 2 == 0 ? k / 2 : n + k / 2; }

inline Matrix xxpp_to_interleaved(const Matrix& m) {
  const auto n = m.rows() / 2;
  Matrix out(m.rows(), m.cols());
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    for (Eigen::Index c = 0; c < m.cols(); ++c) out(r, c) = m(xxpp_source(r, n), xxpp_source(c, n));
  }
  return out;
}

inline Vector xxpp_to_interleaved(const Vector& v) {
  const auto n = v.size() / 2;
  Vector out(v.size());
  for (Eigen::Index k = 0; k < v.size(); ++k) out(k) = v(xxpp_source(k, n));
  return out;
}

}  // namespace detail

// ---------------------------------------------------------------------------
// State files
// ---------------------------------------------------------------------------
//
//   [convention]
//   sn = 0.5
//   ordering = interleaved
//   [register]
//   a H 0            # tag polarization oam
//   [mean]
//   0 0 0 0
//   [cov]
//   <2n rows of 2n numbers>
//
// '#' starts a comment. [mean] may be omitted (zero mean).

struct LoadOptions {
  /// Rescale files written with another vacuum variance instead of rejecting them.
  bool rescale = false;
  /// Reject files whose covariance violates the uncertainty relation.
  bool check_physical = true;
};

inline GaussianState finish_loaded_state(ModeRegister reg, Vector mean, Matrix cov, double sn,
                                         const LoadOptions& opts, const std::string& source) {
  if (!(sn > 0.0)) throw Error(ErrorCode::ParseError, source + ": sn must be positive");
  if (sn != kShotNoise) {
    if (!opts.rescale) {
      throw Error(ErrorCode::ConventionMismatch,
                  source + ": file uses sn = " + format_exact(sn) + ", expected 0.5 (pass rescale to convert)");
    }
    const double factor = kShotNoise / sn;
    cov *= factor;
    mean *= std::sqrt(factor);
  }
  GaussianState state(std::move(reg), std::move(mean), std::move(cov));
  if (opts.check_physical) require_valid(state, source);
  return state;
}

inline GaussianState parse_state(std::string_view text, const LoadOptions& opts = {},
                                 const std::string& source = "<state>") {
  enum class Section { None, Convention, Register, Mean, Cov };
  Section section = Section::None;
  bool seen_convention = false, seen_register = false, seen_mean = false, seen_cov = false;
  std::optional<double> sn;
  std::string ordering = "interleaved";
  std::vector<ModeLabel> labels;
  std::vector<double> mean_values;
  std::vector<std::vector<double>> cov_rows;

  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const auto eol = text.find('\n', pos);
    std::string_view line = text.substr(pos, eol == std::string_view::npos ? std::string_view::npos : eol - pos);
    pos = eol == std::string_view::npos ? text.size() + 1 : eol + 1;
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    line = detail::trim(line);
    if (line.empty()) continue;

    if (line.front() == '[') {
      if (line == "[convention]") section = Section::Convention, seen_convention = true;
      else if (line == "[register]") section = Section::Register, seen_register = true;
      else if (line == "[mean]") section = Section::Mean, seen_mean = true;
      else if (line == "[cov]") section = Section::Cov, seen_cov = true;
      else throw Error(ErrorCode::ParseError, detail::where(source, line_no) + ": unknown section " + std::string(line));
      continue;
    }
    switch (section) {
      case Section::None:
        throw Error(ErrorCode::ParseError, detail::where(source, line_no) + ": data before the first section");
      case Section::Convention: {
        const auto eq = line.find('=');
        if (eq == std::string_view::npos) {
          throw Error(ErrorCode::ParseError, detail::where(source, line_no) + ": expected key = value");
        }
        const auto key = detail::trim(line.substr(0, eq));
        const auto value = detail::trim(line.substr(eq + 1));
        if (key == "sn") sn = detail::parse_double(value, source, line_no);
        else if (key == "ordering") ordering = std::string(value);
        else throw Error(ErrorCode::ParseError, detail::where(source, line_no) + ": unknown key '" + std::string(key) + "'");
        break;
      }
      case Section::Register: {
        const auto f = detail::split_fields(line, false);
        if (f.size() != 3) {
          throw Error(ErrorCode::ParseError, detail::where(source, line_no) + ": register entry needs tag polarization oam");
        }
        const auto pol = parse_polarization(f[1]);
        if (!pol) {
          throw Error(ErrorCode::ParseError,
                      detail::where(source, line_no) + ": unknown polarization '" + std::string(f[1]) + "'");
        }
        labels.push_back({*pol, detail::parse_int(f[2], source, line_no), std::string(f[0])});
        break;
      }
      case Section::Mean:
        for (auto f : detail::split_fields(line, true)) mean_values.push_back(detail::parse_double(f, source, line_no));
        break;
      case Section::Cov: {
        std::vector<double> row;
        for (auto f : detail::split_fields(line, true)) row.push_back(detail::parse_double(f, source, line_no));
        cov_rows.push_back(std::move(row));
        break;
      }
    }
  }

  if (!seen_convention) throw Error(ErrorCode::ParseError, source + ": missing section [convention]");
  if (!sn) throw Error(ErrorCode::ParseError, source + ": section [convention] lacks 'sn'");
  if (!seen_register || labels.empty()) throw Error(ErrorCode::ParseError, source + ": missing section [register]");
  if (!seen_cov || cov_rows.empty()) throw Error(ErrorCode::ParseError, source + ": missing section [cov]");
  if (ordering != "interleaved" && ordering != "xxpp") {
    throw Error(ErrorCode::ConventionMismatch, source + ": unsupported ordering '" + ordering + "'");
  }

  const auto dim = 2 * labels.size();
  if (cov_rows.size() != dim) {
    throw Error(ErrorCode::ParseError, source + ": section [cov] has " + std::to_string(cov_rows.size()) +
                                           " rows, expected " + std::to_string(dim));
  }
  Matrix cov(static_cast<Eigen::Index>(dim), static_cast<Eigen::Index>(dim));
  for (std::size_t r = 0; r < dim; ++r) {
    if (cov_rows[r].size() != dim) {
      throw Error(ErrorCode::ParseError, source + ": row " + std::to_string(r + 1) + " of [cov] has " +
                                             std::to_string(cov_rows[r].size()) + " entries, expected " +
                                             std::to_string(dim));
    }
    for (std::size_t c = 0; c < dim; ++c) {
      cov(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = cov_rows[r][c];
    }
  }
  Vector mean = Vector::Zero(static_cast<Eigen::Index>(dim));
  if (seen_mean) {
    if (mean_values.size() != dim) {
      throw Error(ErrorCode::ParseError, source + ": section [mean] has " + std::to_string(mean_values.size()) +
                                             " entries, expected " + std::to_string(dim));
    }
    for (std::size_t k = 0; k < dim; ++k) mean(static_cast<Eigen::Index>(k)) = mean_values[k];
  }
  if (ordering == "xxpp") {
    cov = detail::xxpp_to_interleaved(cov);
    mean = detail::xxpp_to_interleaved(mean);
  }

  ModeRegister reg = [&] {
    try {
      return ModeRegister(std::move(labels));
    } catch (const Error& e) {
      throw Error(ErrorCode::ParseError, source + ": " + e.what());
    }
  }();
  return finish_loaded_state(std::move(reg), std::move(mean), std::move(cov), *sn, opts, source);
}

inline GaussianState load_state(const std::filesystem::path& path, const LoadOptions& opts = {}) {
  return parse_state(detail::read_file(path), opts, path.string());
}

inline std::string format_state(const GaussianState& state) {
  std::string out;
  out += "[convention]\nsn = " + format_exact(kShotNoise) + "\nordering = interleaved\n\n[register]\n";
  for (const auto& m : state.modes()) {
    if (m.tag.empty() || m.tag.find_first_of(" \t\r\n#[") != std::string::npos) {
      throw Error(ErrorCode::InvalidArgument, "tag '" + m.tag + "' cannot be written to a state file");
    }
    out += m.tag + " " + std::string(to_string(m.polarization)) + " " + std::to_string(m.oam) + "\n";
  }
  out += "\n[mean]\n";
  for (Eigen::Index k = 0; k < state.mean().size(); ++k) {
    if (k) out += ' ';
    out += format_exact(state.mean()(k));
  }
  out += "\n\n[cov]\n";
  for (Eigen::Index r = 0; r < state.cov().rows(); ++r) {
    for (Eigen::Index c = 0; c < state.cov().cols(); ++c) {
      if (c) out += ' ';
      out += format_exact(state.cov()(r, c));
    }
    out += '\n';
  }
  return out;
}

inline void save_state(const GaussianState& state, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::ParseError, "cannot write " + path.string());
  out << format_state(state);
}

/// Bare covariance matrix (comma or whitespace separated, '#' comments) with a
/// register supplied by the caller.
inline GaussianState parse_cov_csv(std::string_view text, ModeRegister reg, const LoadOptions& opts = {},
                                   double sn = kShotNoise, const std::string& source = "<csv>") {
  std::vector<std::vector<double>> rows;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const auto eol = text.find('\n', pos);
    std::string_view line = text.substr(pos, eol == std::string_view::npos ? std::string_view::npos : eol - pos);
    pos = eol == std::string_view::npos ? text.size() + 1 : eol + 1;
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    line = detail::trim(line);
    if (line.empty()) continue;
    std::vector<double> row;
    for (auto f : detail::split_fields(line, true)) row.push_back(detail::parse_double(f, source, line_no));
    rows.push_back(std::move(row));
  }
  const auto dim = 2 * reg.size();
  if (rows.size() != dim) {
    throw Error(ErrorCode::ParseError,
                source + ": " + std::to_string(rows.size()) + " rows, expected " + std::to_string(dim));
  }
  Matrix cov(static_cast<Eigen::Index>(dim), static_cast<Eigen::Index>(dim));
  for (std::size_t r = 0; r < dim; ++r) {
    if (rows[r].size() != dim) {
      throw Error(ErrorCode::ParseError, source + ": row " + std::to_string(r + 1) + " has " +
                                             std::to_string(rows[r].size()) + " entries, expected " +
                                             std::to_string(dim));
    }
    for (std::size_t c = 0; c < dim; ++c) cov(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = rows[r][c];
  }
  Vector mean = Vector::Zero(static_cast<Eigen::Index>(dim));
  return finish_loaded_state(std::move(reg), std::move(mean), std::move(cov), sn, opts, source);
}

inline GaussianState load_cov_csv(const std::filesystem::path& path, ModeRegister reg, const LoadOptions& opts = {},
                                  double sn = kShotNoise) {
  return parse_cov_csv(detail::read_file(path), std::move(reg), opts, sn, path.string());
}

/// "a:H:0,b:V:0" -> register.
inline ModeRegister parse_register_spec(std::string_view spec) {
  std::vector<ModeLabel> labels;
  for (auto item : detail::split_fields(spec, true)) {
    const auto c1 = item.find(':');
    const auto c2 = c1 == std::string_view::npos ? c1 : item.find(':', c1 + 1);
    if (c2 == std::string_view::npos) {
      throw Error(ErrorCode::ParseError, "mode '" + std::string(item) + "' must look like tag:POL:oam");
    }
    const auto pol = parse_polarization(item.substr(c1 + 1, c2 - c1 - 1));
    if (!pol) throw Error(ErrorCode::ParseError, "bad polarization in '" + std::string(item) + "'");
    labels.push_back({*pol, detail::parse_int(item.substr(c2 + 1), "--modes", 1), std::string(item.substr(0, c1))});
  }
  if (labels.empty()) throw Error(ErrorCode::ParseError, "empty mode list");
  return ModeRegister(std::move(labels));
}

// ---------------------------------------------------------------------------
// JSON encodings
// ---------------------------------------------------------------------------

inline Json to_json(const ModeLabel& m) {
  return Json{{"tag", m.tag}, {"polarization", std::string(to_string(m.polarization))}, {"oam", m.oam}};
}

inline Json to_json(const ModeRegister& reg) {
  Json arr = Json::array();
  for (const auto& m : reg) arr.push_back(to_json(m));
  return arr;
}

inline Json to_json(const Matrix& m) {
  Json rows = Json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    Json row = Json::array();
    for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
    rows.push_back(std::move(row));
  }
  return rows;
}

inline Json to_json(const GaussianState& s) {
  Json mean = Json::array();
  for (Eigen::Index k = 0; k < s.mean().size(); ++k) mean.push_back(s.mean()(k));
  return Json{{"sn", kShotNoise}, {"ordering", "interleaved"}, {"modes", to_json(s.modes())},
              {"mean", std::move(mean)}, {"cov", to_json(s.cov())}};
}

inline Json to_json(const EntanglementVerdict& v) {
  Json j;
  j["status"] = std::string(to_string(v.status));
  j["method"] = std::string(to_string(v.method));
  j["witness"] = v.witness ? Json(*v.witness) : Json(nullptr);
  j["log_negativity"] = v.log_negativity;
  j["iterations"] = v.iterations ? Json(*v.iterations) : Json(nullptr);
  return j;
}

inline Json to_json(const EntanglementReport& report) {
  Json doc;
  doc["modes"] = to_json(report.modes);
  Json pairs = Json::array();
  for (std::size_t i = 0; i < report.pairwise.size(); ++i) {
    for (std::size_t j = i + 1; j < report.pairwise[i].size(); ++j) {
      if (!report.pairwise[i][j]) continue;
      pairs.push_back(Json{{"i", i}, {"j", j},
                           {"modes", Json::array({report.modes[i].tag, report.modes[j].tag})},
                           {"verdict", to_json(*report.pairwise[i][j])}});
    }
  }
  doc["pairwise"] = std::move(pairs);
  Json splits = Json::array();
  for (const auto& [bp, v] : report.bipartitions) {
    splits.push_back(Json{{"side_a", bp.side_a}, {"side_b", bp.side_b}, {"verdict", to_json(v)}});
  }
  doc["bipartitions"] = std::move(splits);
  return doc;
}

namespace detail {

template <typename T>
T json_get(const Json& j, const char* key, const std::string& path) {
  if (!j.is_object() || !j.contains(key)) throw Error(ErrorCode::ParseError, path + ": missing field '" + key + "'");
  try {
    return j.at(key).get<T>();
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::ParseError, path + "." + key + ": " + e.what());
  }
}

inline Status parse_status(const std::string& s, const std::string& path) {
  if (s == "Entangled") return Status::Entangled;
  if (s == "Separable") return Status::Separable;
  if (s == "Inconclusive") return Status::Inconclusive;
  throw Error(ErrorCode::ParseError, path + ": unknown status '" + s + "'");
}

}  // namespace detail

inline ModeLabel mode_label_from_json(const Json& j, const std::string& path) {
  const auto pol_text = detail::json_get<std::string>(j, "polarization", path);
  const auto pol = parse_polarization(pol_text);
  if (!pol) throw Error(ErrorCode::ParseError, path + ": unknown polarization '" + pol_text + "'");
  return {*pol, detail::json_get<int>(j, "oam", path), detail::json_get<std::string>(j, "tag", path)};
}

inline EntanglementVerdict verdict_from_json(const Json& j, const std::string& path) {
  EntanglementVerdict v;
  v.status = detail::parse_status(detail::json_get<std::string>(j, "status", path), path);
  const auto method = detail::json_get<std::string>(j, "method", path);
  if (method == "PPT") v.method = Method::PPT;
  else if (method == "Iterative") v.method = Method::Iterative;
  else throw Error(ErrorCode::ParseError, path + ": unknown method '" + method + "'");
  if (j.contains("witness") && !j.at("witness").is_null()) v.witness = detail::json_get<double>(j, "witness", path);
  v.log_negativity = detail::json_get<double>(j, "log_negativity", path);
  if (j.contains("iterations") && !j.at("iterations").is_null()) {
    v.iterations = detail::json_get<int>(j, "iterations", path);
  }
  return v;
}

inline EntanglementReport report_from_json(const Json& doc) {
  EntanglementReport report;
  std::vector<ModeLabel> labels;
  const auto modes = detail::json_get<Json>(doc, "modes", "report");
  for (std::size_t k = 0; k < modes.size(); ++k) {
    labels.push_back(mode_label_from_json(modes.at(k), "report.modes[" + std::to_string(k) + "]"));
  }
  report.modes = ModeRegister(std::move(labels));
  const auto pairs = detail::json_get<Json>(doc, "pairwise", "report");
  if (!pairs.empty()) {
    report.pairwise.assign(report.modes.size(),
                           std::vector<std::optional<EntanglementVerdict>>(report.modes.size()));
  }
  for (std::size_t k = 0; k < pairs.size(); ++k) {
    const std::string path = "report.pairwise[" + std::to_string(k) + "]";
    const auto i = detail::json_get<std::size_t>(pairs.at(k), "i", path);
    const auto j = detail::json_get<std::size_t>(pairs.at(k), "j", path);
    if (i >= report.modes.size() || j >= report.modes.size() || i == j) {
      throw Error(ErrorCode::ParseError, path + ": bad mode indices");
    }
    const auto v = verdict_from_json(detail::json_get<Json>(pairs.at(k), "verdict", path), path + ".verdict");
    report.pairwise[i][j] = v;
    report.pairwise[j][i] = v;
  }
  const auto splits = detail::json_get<Json>(doc, "bipartitions", "report");
  for (std::size_t k = 0; k < splits.size(); ++k) {
    const std::string path = "report.bipartitions[" + std::to_string(k) + "]";
    Bipartition bp{detail::json_get<std::vector<std::size_t>>(splits.at(k), "side_a", path),
                   detail::json_get<std::vector<std::size_t>>(splits.at(k), "side_b", path)};
    report.bipartitions.emplace_back(
        std::move(bp), verdict_from_json(detail::json_get<Json>(splits.at(k), "verdict", path), path + ".verdict"));
  }
  return report;
}

// ---------------------------------------------------------------------------
// Report rendering
// ---------------------------------------------------------------------------

enum class Format { Text, Json };

inline std::string render_text(const EntanglementReport& report) {
  std::string out = "modes:";
  if (report.modes.empty()) out += " (none)";
  for (const auto& m : report.modes) out += " " + describe(m);
  out += "\n";

  auto verdict_line = [](const EntanglementVerdict& v) {
    std::string s = std::string(to_string(v.status));
    s.resize(13, ' ');
    s += std::string(to_string(v.method));
    if (v.witness) s += "  witness " + format_sig4(*v.witness);
    s += "  logneg " + format_sig4(v.log_negativity);
    if (v.iterations) s += "  iterations " + std::to_string(*v.iterations);
    return s;
  };

  if (!report.pairwise.empty()) {
    const std::size_t n = report.modes.size();
    std::size_t width = 2;
    for (const auto& m : report.modes) width = std::max(width, m.tag.size());
    auto pad = [width](std::string s) {
      s.resize(width + 2, ' ');
      return s;
    };
    out += "\npairwise entanglement of two-mode marginals (E entangled, S separable)\n";
    out += pad("");
    for (const auto& m : report.modes) out += pad(m.tag);
    out += "\n";
    for (std::size_t i = 0; i < n; ++i) {
      out += pad(report.modes[i].tag);
      for (std::size_t j = 0; j < n; ++j) {
        const auto& v = report.pairwise[i][j];
        out += pad(!v ? "-" : v->status == Status::Entangled ? "E" : v->status == Status::Separable ? "S" : "?");
      }
      out += "\n";
    }
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = i + 1; j < n; ++j) {
        if (!report.pairwise[i][j]) continue;
        std::string name = report.modes[i].tag + "-" + report.modes[j].tag;
        name.resize(2 * width + 3, ' ');
        out += "  " + name + verdict_line(*report.pairwise[i][j]) + "\n";
      }
    }
  }

  if (!report.bipartitions.empty()) {
    out += "\nbipartitions of the full state\n";
    for (const auto& [bp, v] : report.bipartitions) {
      std::string name;
      for (auto k : bp.side_a) name += report.modes[k].tag + " ";
      name += "|";
      for (auto k : bp.side_b) name += " " + report.modes[k].tag;
      if (name.size() < 24) name.resize(24, ' ');
      out += "  " + name + "  " + verdict_line(v) + "\n";
    }
  }
  return out;
}

/// JSON output is byte-stable: fixed key order, shortest round-trip numbers.
inline std::string emit_report(const EntanglementReport& report, Format format) {
  if (format == Format::Json) return to_json(report).dump(2) + "\n";
  return render_text(report);
}

}  // namespace cvq
