#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "cvq/entanglement.hpp"
#include "cvq/io.hpp"
#include "cvq/optics.hpp"
#include "cvq/reference_data.hpp"

namespace cvq {

struct FileSource {
  std::filesystem::path path;
  LoadOptions load;
};
struct StandardFormSource {
  StandardFormParams params;
};
struct OpoSource {
  double r = 0.0;
  double eta = 1.0;
};
using SourceSpec = std::variant<FileSource, StandardFormSource, OpoSource>;

struct WaveplateStep {};
struct EmbedStep {
  std::vector<ModeLabel> modes;
};
struct QPlateStep {
  QPlateSpec spec;
};
/// New order given either by tags or by indices.
struct ReorderStep {
  std::vector<std::string> tags;
  std::vector<std::size_t> indices;
};
struct LossStep {
  double eta = 1.0;
};
using Step = std::variant<WaveplateStep, EmbedStep, QPlateStep, ReorderStep, LossStep>;

enum class Analysis { Validate, Pairwise, Scan, Purity, Photons };

struct PipelineConfig {
  SourceSpec source = StandardFormSource{};
  std::vector<Step> steps;
  std::vector<Analysis> analyses;
};

inline std::string step_name(const Step& step) {
  return std::visit(
      [](const auto& s) -> std::string {
        using T = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<T, WaveplateStep>) return "waveplate";
        else if constexpr (std::is_same_v<T, EmbedStep>) return "embed";
        else if constexpr (std::is_same_v<T, QPlateStep>) return "qplate";
        else if constexpr (std::is_same_v<T, ReorderStep>) return "reorder";
        else return "loss";
      },
      step);
}

inline std::string_view to_string(Analysis a) {
  switch (a) {
    case Analysis::Validate: return "validate";
    case Analysis::Pairwise: return "pairwise";
    case Analysis::Scan: return "scan";
    case Analysis::Purity: return "purity";
    case Analysis::Photons: return "photons";
  }
  return "?";
}

/// State after the source (index 0) and after each step (index k + 1).
struct StageDiagnostic {
  std::size_t index = 0;
  std::string name;
  std::size_t modes = 0;
  double total_photons = 0.0;
  double purity = 0.0;
  double min_heisenberg_eigenvalue = 0.0;
};

struct PipelineResult {
  GaussianState final_state;
  std::vector<StageDiagnostic> diagnostics;
  std::optional<ValidityReport> validity;
  std::optional<double> purity;
  std::vector<double> photons;
  EntanglementReport report;
};

inline GaussianState apply_step(const Step& step, const GaussianState& state) {
  return std::visit(
      [&](const auto& s) -> GaussianState {
        using T = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<T, WaveplateStep>) {
          return quarter_waveplate_relabel(state);
        } else if constexpr (std::is_same_v<T, EmbedStep>) {
          return embed_with_vacua(state, s.modes);
        } else if constexpr (std::is_same_v<T, QPlateStep>) {
          return apply(qplate_transform(s.spec, state.modes()), state);
        } else if constexpr (std::is_same_v<T, ReorderStep>) {
          std::vector<std::size_t> perm = s.indices;
          if (!s.tags.empty()) {
            perm.clear();
            for (const auto& tag : s.tags) {
              const auto idx = state.modes().find_tag(tag);
              if (!idx) throw Error(ErrorCode::NotAPermutation, "no mode tagged '" + tag + "'");
              perm.push_back(*idx);
            }
          }
          return reorder(state, perm);
        } else {
          return uniform_loss(state, s.eta);
        }
      },
      step);
}

inline StageDiagnostic diagnose(std::size_t index, std::string name, const GaussianState& state) {
  StageDiagnostic d;
  d.index = index;
  d.name = std::move(name);
  d.modes = state.num_modes();
  d.total_photons = total_photon_number(state);
  d.min_heisenberg_eigenvalue = validate(state).min_heisenberg_eigenvalue;
  d.purity = purity(state);
  return d;
}

inline GaussianState load_source(const SourceSpec& source) {
  return std::visit(
      [](const auto& s) -> GaussianState {
        using T = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<T, FileSource>) return load_state(s.path, s.load);
        else if constexpr (std::is_same_v<T, StandardFormSource>) return make_standard_form(s.params);
        else return opo_source(s.r, s.eta);
      },
      source);
}

/// Runs the steps on `initial`. Every intermediate state must satisfy the
/// uncertainty relation; the first failing step aborts with a StepError.
inline PipelineResult run_pipeline(const PipelineConfig& config, const GaussianState& initial,
                                   const AnalysisOptions& opts = {}) {
  require_valid(initial, "source");
  std::vector<StageDiagnostic> diagnostics{diagnose(0, "source", initial)};
  GaussianState state = initial;
  for (std::size_t k = 0; k < config.steps.size(); ++k) {
    const auto name = step_name(config.steps[k]);
    try {
      state = apply_step(config.steps[k], state);
      require_valid(state, name);
      diagnostics.push_back(diagnose(k + 1, name, state));
    } catch (const Error& e) {
      throw StepError(k + 1, name, e);
    }
  }

  PipelineResult result{state, std::move(diagnostics), std::nullopt, std::nullopt, {}, {}};
  result.report.modes = state.modes();
  bool pairs = false, scan = false;
  for (auto a : config.analyses) {
    switch (a) {
      case Analysis::Validate: result.validity = validate(state); break;
      case Analysis::Purity: result.purity = purity(state); break;
      case Analysis::Photons:
        result.photons.clear();
        for (std::size_t m = 0; m < state.num_modes(); ++m) result.photons.push_back(mean_photon_number(state, m));
        break;
      case Analysis::Pairwise: pairs = true; break;
      case Analysis::Scan: scan = true; break;
    }
  }
  if (pairs || scan) result.report = analyze(state, pairs, scan, opts);
  return result;
}

inline PipelineResult run_pipeline(const PipelineConfig& config, const AnalysisOptions& opts = {}) {
  return run_pipeline(config, load_source(config.source), opts);
}

/// OPO beams -> quarter waveplate -> vacuum partners -> q=1/2 plate at delta=pi/2.
inline PipelineConfig reproduction_config() {
  PipelineConfig c;
  c.source = StandardFormSource{reference::experimental_two_mode()};
  c.steps.push_back(WaveplateStep{});
  c.steps.push_back(EmbedStep{reference::vacuum_partners()});
  c.steps.push_back(ReorderStep{{"a", "a~", "b", "b~"}, {}});
  c.steps.push_back(QPlateStep{QPlateSpec{0.5, reference::kHalfWaveRetardation}});
  c.analyses = {Analysis::Validate, Analysis::Purity, Analysis::Photons, Analysis::Pairwise, Analysis::Scan};
  return c;
}

// ---------------------------------------------------------------------------
// Config files (JSON)
// ---------------------------------------------------------------------------
//
// {
//   "source": {"type": "standard_form", "a": 0.72, "b": 0.72, "c1": 0.51, "c2": -0.51},
//   "steps": [
//     {"op": "waveplate"},
//     {"op": "embed", "modes": [{"tag": "a~", "polarization": "R", "oam": 1}]},
//     {"op": "reorder", "order": ["a", "a~", "b", "b~"]},
//     {"op": "qplate", "q": 0.5, "delta_pi": 0.5},
//     {"op": "loss", "eta": 0.9}
//   ],
//   "analyses": ["validate", "pairwise", "scan", "purity", "photons"]
// }
//
// Sources: standard_form {a, b, c1, c2}, opo {r, eta}, file {path, rescale}.
// A qplate takes "delta" in radians or "delta_pi" in units of pi.

inline PipelineConfig parse_config(std::string_view text, const std::filesystem::path& base_dir = {},
                                   const std::string& source_name = "<config>") {
  Json doc;
  try {
    doc = Json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw Error(ErrorCode::ParseError, source_name + ": " + e.what());
  }
  if (!doc.is_object()) throw Error(ErrorCode::ParseError, source_name + ": top level must be an object");

  PipelineConfig config;
  const std::string root = source_name;
  if (doc.contains("source")) {
    const auto& src = doc.at("source");
    const std::string path = root + ".source";
    const auto type = detail::json_get<std::string>(src, "type", path);
    if (type == "standard_form") {
      config.source = StandardFormSource{{detail::json_get<double>(src, "a", path), detail::json_get<double>(src, "b", path),
                                          detail::json_get<double>(src, "c1", path),
                                          detail::json_get<double>(src, "c2", path)}};
    } else if (type == "opo") {
      OpoSource o{detail::json_get<double>(src, "r", path), 1.0};
      if (src.contains("eta")) o.eta = detail::json_get<double>(src, "eta", path);
      config.source = o;
    } else if (type == "file") {
      FileSource f;
      f.path = detail::json_get<std::string>(src, "path", path);
      if (f.path.is_relative() && !base_dir.empty()) f.path = base_dir / f.path;
      if (src.contains("rescale")) f.load.rescale = detail::json_get<bool>(src, "rescale", path);
      config.source = f;
    } else {
      throw Error(ErrorCode::ParseError, path + ": unknown source type '" + type + "'");
    }
  }

  if (doc.contains("steps")) {
    const auto& steps = doc.at("steps");
    if (!steps.is_array()) throw Error(ErrorCode::ParseError, root + ".steps: expected an array");
    for (std::size_t k = 0; k < steps.size(); ++k) {
      const auto& s = steps.at(k);
      const std::string path = root + ".steps[" + std::to_string(k) + "]";
      const auto op = detail::json_get<std::string>(s, "op", path);
      if (op == "waveplate") {
        config.steps.push_back(WaveplateStep{});
      } else if (op == "embed") {
        EmbedStep e;
        const auto modes = detail::json_get<Json>(s, "modes", path);
        for (std::size_t m = 0; m < modes.size(); ++m) {
          e.modes.push_back(mode_label_from_json(modes.at(m), path + ".modes[" + std::to_string(m) + "]"));
        }
        config.steps.push_back(std::move(e));
      } else if (op == "qplate") {
        QPlateSpec spec;
        if (s.contains("q")) spec.q = detail::json_get<double>(s, "q", path);
        if (s.contains("delta_pi")) spec.delta = detail::json_get<double>(s, "delta_pi", path) * std::numbers::pi;
        else spec.delta = detail::json_get<double>(s, "delta", path);
        config.steps.push_back(QPlateStep{spec});
      } else if (op == "reorder") {
        const auto order = detail::json_get<Json>(s, "order", path);
        ReorderStep r;
        for (const auto& item : order) {
          if (item.is_string()) r.tags.push_back(item.get<std::string>());
          else if (item.is_number_unsigned()) r.indices.push_back(item.get<std::size_t>());
          else throw Error(ErrorCode::ParseError, path + ".order: entries must be tags or indices");
        }
        if (!r.tags.empty() && !r.indices.empty()) {
          throw Error(ErrorCode::ParseError, path + ".order: mixes tags and indices");
        }
        config.steps.push_back(std::move(r));
      } else if (op == "loss") {
        config.steps.push_back(LossStep{detail::json_get<double>(s, "eta", path)});
      } else {
        throw Error(ErrorCode::ParseError, path + ": unknown op '" + op + "'");
      }
    }
  }

  if (doc.contains("analyses")) {
    for (const auto& a : detail::json_get<std::vector<std::string>>(doc, "analyses", root)) {
      if (a == "validate") config.analyses.push_back(Analysis::Validate);
      else if (a == "pairwise") config.analyses.push_back(Analysis::Pairwise);
      else if (a == "scan") config.analyses.push_back(Analysis::Scan);
      else if (a == "purity") config.analyses.push_back(Analysis::Purity);
      else if (a == "photons") config.analyses.push_back(Analysis::Photons);
      else throw Error(ErrorCode::ParseError, root + ".analyses: unknown analysis '" + a + "'");
    }
  }
  return config;
}

inline PipelineConfig load_config(const std::filesystem::path& path) {
  return parse_config(detail::read_file(path), path.parent_path(), path.string());
}

inline Json to_json(const StageDiagnostic& d) {
  return Json{{"index", d.index},
              {"step", d.name},
              {"modes", d.modes},
              {"total_photons", d.total_photons},
              {"purity", d.purity},
              {"min_heisenberg_eigenvalue", d.min_heisenberg_eigenvalue}};
}

inline Json to_json(const ValidityReport& v) {
  return Json{{"symmetric", v.symmetric},
              {"physical", v.physical},
              {"min_heisenberg_eigenvalue", v.min_heisenberg_eigenvalue},
              {"max_asymmetry", v.max_asymmetry}};
}

inline Json to_json(const PipelineResult& r) {
  Json doc;
  doc["state"] = to_json(r.final_state);
  Json diags = Json::array();
  for (const auto& d : r.diagnostics) diags.push_back(to_json(d));
  doc["diagnostics"] = std::move(diags);
  doc["validity"] = r.validity ? to_json(*r.validity) : Json(nullptr);
  doc["purity"] = r.purity ? Json(*r.purity) : Json(nullptr);
  doc["photons"] = r.photons;
  doc["report"] = to_json(r.report);
  return doc;
}

}  // namespace cvq
