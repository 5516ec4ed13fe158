#pragma once

#include <cstdio>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "cvq/pipeline.hpp"

namespace cvq::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitInput = 2;
inline constexpr int kExitStep = 3;
inline constexpr int kExitNumerical = 4;

inline int exit_code_for(const Error& e) {
  auto numerical = [](ErrorCode c) {
    return c == ErrorCode::NumericalFailure || c == ErrorCode::ConvergenceStall ||
           c == ErrorCode::NonPositiveDeterminant;
  };
  if (const auto* step = dynamic_cast<const StepError*>(&e)) {
    return numerical(step->cause()) ? kExitNumerical : kExitStep;
  }
  return numerical(e.code()) ? kExitNumerical : kExitInput;
}

struct InputOptions {
  std::string path;
  bool csv = false;
  std::string modes;
  double sn = kShotNoise;
  bool rescale = false;
};

inline void add_input_options(CLI::App* cmd, InputOptions& in) {
  cmd->add_option("file", in.path, "state file (or bare covariance with --csv)")->required();
  cmd->add_flag("--csv", in.csv, "read a bare covariance matrix; register from --modes");
  cmd->add_option("--modes", in.modes, "register for --csv input, e.g. a:H:0,b:V:0");
  cmd->add_option("--sn", in.sn, "vacuum variance used by the --csv input");
  cmd->add_flag("--rescale", in.rescale, "convert inputs written with sn != 0.5 instead of rejecting them");
}

inline GaussianState load_input(const InputOptions& in, bool check_physical) {
  LoadOptions opts;
  opts.rescale = in.rescale;
  opts.check_physical = check_physical;
  if (in.csv) {
    if (in.modes.empty()) throw Error(ErrorCode::ParseError, "--csv needs --modes");
    return load_cov_csv(in.path, parse_register_spec(in.modes), opts, in.sn);
  }
  return load_state(in.path, opts);
}

inline std::string matrix_text(const Matrix& m) {
  std::string out;
  char buf[32];
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    out += " ";
    for (Eigen::Index c = 0; c < m.cols(); ++c) {
      std::snprintf(buf, sizeof(buf), " %8.4f", m(r, c));
      out += buf;
    }
    out += "\n";
  }
  return out;
}

inline std::string sci(double x) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.2e", x);
  return buf;
}

inline std::string validity_text(const ValidityReport& v) {
  return std::string("symmetric: ") + (v.symmetric ? "yes" : "no") + "\nphysical: " + (v.physical ? "yes" : "no") +
         "\nmin eigenvalue of cov + i*Omega/2: " + format_sig4(v.min_heisenberg_eigenvalue) + "\n";
}

inline std::string result_text(const PipelineResult& r) {
  std::string out = "stage              modes  photons    purity     min eig(cov + i*Omega/2)\n";
  char buf[160];
  for (const auto& d : r.diagnostics) {
    std::snprintf(buf, sizeof(buf), "  %-2zu %-14s %4zu  %-9s  %-9s  %s\n", d.index, d.name.c_str(), d.modes,
                  format_sig4(d.total_photons).c_str(), format_sig4(d.purity).c_str(),
                  format_sig4(d.min_heisenberg_eigenvalue).c_str());
    out += buf;
  }
  if (r.validity) out += "\n" + validity_text(*r.validity);
  if (r.purity) out += "purity: " + format_sig4(*r.purity) + "\n";
  if (!r.photons.empty()) {
    out += "mean photon number per mode:";
    for (std::size_t k = 0; k < r.photons.size(); ++k) {
      out += " " + r.final_state.modes()[k].tag + "=" + format_sig4(r.photons[k]);
    }
    out += "\n";
  }
  out += "\ncovariance (";
  for (std::size_t k = 0; k < r.final_state.num_modes(); ++k) out += (k ? " " : "") + r.final_state.modes()[k].tag;
  out += "):\n" + matrix_text(r.final_state.cov());
  if (!r.report.pairwise.empty() || !r.report.bipartitions.empty()) out += "\n" + render_text(r.report);
  return out;
}

/// Closed-form and published-matrix comparison for the reproduction run.
struct ReproductionCheck {
  double closed_form_deviation = 0.0;
  double published_deviation = 0.0;  // excluding the typo cell
  double typo_cell_published = 0.0;
  double typo_cell_computed = 0.0;
};

inline ReproductionCheck check_reproduction(const Matrix& cov) {
  ReproductionCheck c;
  c.closed_form_deviation = max_abs_diff(cov, sigma4_closed_form(reference::experimental_two_mode()));
  const Matrix published = reference::published_four_mode();
  for (Eigen::Index r = 0; r < 8; ++r) {
    for (Eigen::Index k = 0; k < 8; ++k) {
      if (r == reference::kTypoRow && k == reference::kTypoCol) continue;
      c.published_deviation = std::max(c.published_deviation, std::abs(cov(r, k) - published(r, k)));
    }
  }
  c.typo_cell_published = published(reference::kTypoRow, reference::kTypoCol);
  c.typo_cell_computed = cov(reference::kTypoRow, reference::kTypoCol);
  return c;
}

inline int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Gaussian covariance-matrix toolkit for q-plate mode splitting and entanglement analysis", "cvq"};
  app.require_subcommand(1);
  double witness_band = tol::kPhysicality;
  std::string format_name = "text";
  app.add_option("--tol", witness_band, "entanglement witness tolerance band below 1/2")
      ->check(CLI::PositiveNumber);
  app.add_option("--format", format_name, "output format")->check(CLI::IsMember({"text", "json"}));

  InputOptions validate_in;
  auto* validate_cmd = app.add_subcommand("validate", "check symmetry and the uncertainty relation");
  add_input_options(validate_cmd, validate_in);

  InputOptions analyze_in;
  bool want_pairs = false, want_scan = false;
  auto* analyze_cmd = app.add_subcommand("analyze", "entanglement of mode pairs and bipartitions");
  add_input_options(analyze_cmd, analyze_in);
  analyze_cmd->add_flag("--pairs", want_pairs, "pairwise map of two-mode marginals");
  analyze_cmd->add_flag("--scan", want_scan, "1 x (n-1) and 2 x (n-2) bipartitions");

  InputOptions transform_in;
  std::string config_path, out_path;
  auto* transform_cmd = app.add_subcommand("transform", "run pipeline steps from a config on a state file");
  add_input_options(transform_cmd, transform_in);
  transform_cmd->add_option("--config", config_path, "pipeline config (JSON)")->required();
  transform_cmd->add_option("--out", out_path, "write the final state here");

  bool reproduce_json = false;
  auto* reproduce_cmd = app.add_subcommand("reproduce-paper", "OPO beams through waveplate and q-plate, built-in data");
  reproduce_cmd->add_flag("--json", reproduce_json, "same as --format json");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "cvq: " << e.what() << "\n";
    return kExitInput;
  }

  AnalysisOptions opts;
  opts.witness_band = witness_band;
  Format format = format_name == "json" ? Format::Json : Format::Text;

  try {
    if (*validate_cmd) {
      const auto state = load_input(validate_in, false);
      const auto v = validate(state);
      if (format == Format::Json) {
        out << Json{{"file", validate_in.path}, {"modes", to_json(state.modes())}, {"validity", to_json(v)}}.dump(2)
            << "\n";
      } else {
        out << "file: " << validate_in.path << "\nmodes:";
        for (const auto& m : state.modes()) out << " " << describe(m);
        out << "\n" << validity_text(v);
      }
      return v.symmetric && v.physical ? kExitOk : kExitInput;
    }

    if (*analyze_cmd) {
      const auto state = load_input(analyze_in, true);
      if (!want_pairs && !want_scan) want_pairs = want_scan = true;
      out << emit_report(analyze(state, want_pairs, want_scan, opts), format);
      return kExitOk;
    }

    if (*transform_cmd) {
      const auto state = load_input(transform_in, true);
      const auto config = load_config(config_path);
      const auto result = run_pipeline(config, state, opts);
      if (!out_path.empty()) save_state(result.final_state, out_path);
      if (format == Format::Json) {
        out << to_json(result).dump(2) << "\n";
      } else {
        out << result_text(result);
        if (out_path.empty()) out << "\n" << format_state(result.final_state);
      }
      return kExitOk;
    }

    if (*reproduce_cmd) {
      if (reproduce_json) format = Format::Json;
      const auto result = run_pipeline(reproduction_config(), opts);
      const auto check = check_reproduction(result.final_state.cov());
      if (format == Format::Json) {
        Json doc = to_json(result);
        doc["comparison"] = Json{{"closed_form_max_deviation", check.closed_form_deviation},
                                 {"published_max_deviation", check.published_deviation},
                                 {"published_tolerance", reference::kPublishedTolerance},
                                 {"typo_cell",
                                  Json{{"row", reference::kTypoRow + 1},
                                       {"col", reference::kTypoCol + 1},
                                       {"published", check.typo_cell_published},
                                       {"computed", check.typo_cell_computed}}}};
        out << doc.dump(2) << "\n";
      } else {
        const auto p = reference::experimental_two_mode();
        out << "source: two-mode standard form a=" << format_exact(p.a) << " b=" << format_exact(p.b)
            << " c1=" << format_exact(p.c1) << " c2=" << format_exact(p.c2) << "\n"
            << "steps: quarter waveplate, embed vacua a~[R,1] b~[L,-1], q-plate q=1/2 delta=pi/2\n\n"
            << result_text(result) << "\n"
            << "max deviation from the closed form: " << sci(check.closed_form_deviation) << "\n"
            << "max deviation from the published matrix: " << format_sig4(check.published_deviation)
            << " (tolerance " << format_exact(reference::kPublishedTolerance) << ", cell ("
            << reference::kTypoRow + 1 << "," << reference::kTypoCol + 1 << ") excluded)\n"
            << "cell (" << reference::kTypoRow + 1 << "," << reference::kTypoCol + 1 << "): published "
            << format_sig4(check.typo_cell_published) << ", computed " << format_sig4(check.typo_cell_computed)
            << " (misprint; the closed form forces 0)\n";
      }
      return kExitOk;
    }
  } catch (const Error& e) {
    err << "cvq: " << e.what() << "\n";
    return exit_code_for(e);
  }
  return kExitInput;
}

inline int run(int argc, char** argv, std::ostream& out = std::cout, std::ostream& err = std::cerr) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return run(args, out, err);
}

}  // namespace cvq::cli
