#include <gtest/gtest.h>

#include <filesystem>
#include <random>

#include "test_support.hpp"

using namespace cvq;
using namespace cvq::testing;

namespace {

const std::filesystem::path kData = CVQ_DATA_DIR;

void expect_published_pattern(const EntanglementReport& report) {
  ASSERT_EQ(report.pairwise.size(), 4u);
  for (std::size_t i = 0; i < 4; ++i) {
    for (std::size_t j = i + 1; j < 4; ++j) {
      const bool same_source = (i / 2) == (j / 2);
      EXPECT_EQ(report.pairwise[i][j]->status, same_source ? Status::Separable : Status::Entangled)
          << report.modes[i].tag << "-" << report.modes[j].tag;
    }
  }
}

}  // namespace

TEST(Pipeline, ReproductionConfig) {
  const auto r = run_pipeline(reproduction_config());
  EXPECT_EQ(r.final_state.modes(), reference::four_mode_output_register());
  EXPECT_LE(max_abs_diff(r.final_state.cov(), sigma4_closed_form(reference::experimental_two_mode())), 1e-12);
  expect_published_pattern(r.report);
  ASSERT_EQ(r.report.bipartitions.size(), 7u);
  for (const auto& [bp, v] : r.report.bipartitions) EXPECT_EQ(v.status, Status::Entangled);

  ASSERT_EQ(r.diagnostics.size(), 5u);
  EXPECT_EQ(r.diagnostics[0].name, "source");
  EXPECT_EQ(r.diagnostics[4].name, "qplate");
  EXPECT_EQ(r.diagnostics[2].modes, 4u);
  for (const auto& d : r.diagnostics) {
    EXPECT_NEAR(d.total_photons, 0.44, 1e-12) << d.name;
    EXPECT_GE(d.min_heisenberg_eigenvalue, -tol::kPhysicality) << d.name;
    EXPECT_NEAR(d.purity, 1.0 / (4.0 * 0.2583), 1e-12) << d.name;
  }
  ASSERT_TRUE(r.validity);
  EXPECT_TRUE(r.validity->physical);
  ASSERT_EQ(r.photons.size(), 4u);
  for (double n : r.photons) EXPECT_NEAR(n, 0.11, 1e-12);
}

TEST(Pipeline, ConfigFileMatchesBuiltIn) {
  const auto from_file = run_pipeline(load_config(kData / "reproduce.json"));
  const auto built_in = run_pipeline(reproduction_config());
  EXPECT_EQ(from_file.final_state.modes(), built_in.final_state.modes());
  EXPECT_LE(max_abs_diff(from_file.final_state.cov(), built_in.final_state.cov()), 1e-15);
  EXPECT_EQ(from_file.report.modes, built_in.report.modes);
}

TEST(Pipeline, EmptyStepsEchoTheInput) {
  const auto input = load_state(kData / "sigma2_exp.cvq");
  PipelineConfig c;
  const auto r = run_pipeline(c, input);
  EXPECT_EQ(r.final_state, input);
  EXPECT_EQ(r.diagnostics.size(), 1u);
  EXPECT_FALSE(r.validity);
  EXPECT_TRUE(r.report.pairwise.empty());
  EXPECT_TRUE(r.report.bipartitions.empty());
}

TEST(Pipeline, VacuumInputStaysSeparable) {
  const auto r = run_pipeline(load_config(kData / "opo_vacuum.json"));
  EXPECT_LE(max_abs_diff(r.final_state.cov(), 0.5 * Matrix::Identity(8, 8)), 1e-15);
  for (std::size_t i = 0; i < 4; ++i) {
    for (std::size_t j = i + 1; j < 4; ++j) EXPECT_EQ(r.report.pairwise[i][j]->status, Status::Separable);
  }
  for (const auto& [bp, v] : r.report.bipartitions) EXPECT_EQ(v.status, Status::Separable);
}

TEST(Pipeline, FailingStepIsWrapped) {
  PipelineConfig c;
  c.source = StandardFormSource{reference::experimental_two_mode()};
  c.steps = {WaveplateStep{}, QPlateStep{}};  // no vacuum partners yet
  try {
    run_pipeline(c);
    FAIL();
  } catch (const StepError& e) {
    EXPECT_EQ(e.code(), ErrorCode::StepFailure);
    EXPECT_EQ(e.step(), 2u);
    EXPECT_EQ(e.step_name(), "qplate");
    EXPECT_EQ(e.cause(), ErrorCode::UnpairedMode);
  }

  c.steps = {QPlateStep{}};
  try {
    run_pipeline(c);
    FAIL();
  } catch (const StepError& e) {
    EXPECT_EQ(e.step(), 1u);
    EXPECT_EQ(e.cause(), ErrorCode::NotCircular);
  }

  c.steps = {WaveplateStep{}, WaveplateStep{}};
  try {
    run_pipeline(c);
    FAIL();
  } catch (const StepError& e) {
    EXPECT_EQ(e.cause(), ErrorCode::BadPolarization);
  }

  c.steps = {ReorderStep{{"a", "nope"}, {}}};
  try {
    run_pipeline(c);
    FAIL();
  } catch (const StepError& e) {
    EXPECT_EQ(e.cause(), ErrorCode::NotAPermutation);
  }
}

TEST(Pipeline, UnphysicalSourceIsRejectedBeforeAnyStep) {
  const GaussianState bad(plain_register(1), 0.1 * Matrix::Identity(2, 2));
  try {
    run_pipeline(PipelineConfig{}, bad);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::PhysicalityViolation);
  }
}

TEST(Pipeline, LossStepAndIntermediatePhysicality) {
  std::mt19937 rng(67);
  std::uniform_real_distribution<double> uni(0.0, 1.0);
  for (int trial = 0; trial < 50; ++trial) {
    auto c = reproduction_config();
    c.source = StandardFormSource{random_standard_form(rng)};
    c.steps.push_back(LossStep{uni(rng)});
    c.steps[3] = QPlateStep{QPlateSpec{0.5, 2 * std::numbers::pi * uni(rng)}};
    c.analyses.clear();
    const auto r = run_pipeline(c);
    for (const auto& d : r.diagnostics) EXPECT_GE(d.min_heisenberg_eigenvalue, -tol::kPhysicality);
  }
}

TEST(Config, ParsesAllOpsAndSources) {
  const auto c = parse_config(R"({
    "source": {"type": "standard_form", "a": 0.9, "b": 0.8, "c1": 0.3, "c2": -0.2},
    "steps": [
      {"op": "waveplate"},
      {"op": "embed", "modes": [{"tag": "x", "polarization": "R", "oam": 1}]},
      {"op": "reorder", "order": [1, 0, 2]},
      {"op": "qplate", "delta": 1.25},
      {"op": "qplate", "q": 1, "delta_pi": 0.5},
      {"op": "loss", "eta": 0.5}
    ],
    "analyses": ["validate", "purity", "photons", "pairwise", "scan"]
  })");
  const auto& src = std::get<StandardFormSource>(c.source);
  EXPECT_EQ(src.params.c2, -0.2);
  ASSERT_EQ(c.steps.size(), 6u);
  EXPECT_EQ(std::get<EmbedStep>(c.steps[1]).modes[0].tag, "x");
  EXPECT_EQ(std::get<ReorderStep>(c.steps[2]).indices, (std::vector<std::size_t>{1, 0, 2}));
  EXPECT_EQ(std::get<QPlateStep>(c.steps[3]).spec.delta, 1.25);
  EXPECT_EQ(std::get<QPlateStep>(c.steps[3]).spec.q, 0.5);
  EXPECT_EQ(std::get<QPlateStep>(c.steps[4]).spec.q, 1.0);
  EXPECT_DOUBLE_EQ(std::get<QPlateStep>(c.steps[4]).spec.delta, std::numbers::pi / 2);
  EXPECT_EQ(std::get<LossStep>(c.steps[5]).eta, 0.5);
  EXPECT_EQ(c.analyses.size(), 5u);

  const auto opo = parse_config(R"({"source": {"type": "opo", "r": 0.4}})");
  EXPECT_EQ(std::get<OpoSource>(opo.source).eta, 1.0);

  const auto file = parse_config(R"({"source": {"type": "file", "path": "s.cvq", "rescale": true}})", "/tmp/x");
  EXPECT_EQ(std::get<FileSource>(file.source).path, std::filesystem::path("/tmp/x/s.cvq"));
  EXPECT_TRUE(std::get<FileSource>(file.source).load.rescale);
}

TEST(Config, ErrorsNameTheLocation) {
  const std::vector<std::pair<std::string, std::string>> cases = {
      {"not json", "cfg"},
      {"[]", "top level"},
      {R"({"source": {"type": "laser"}})", "cfg.source"},
      {R"({"source": {"type": "opo"}})", "'r'"},
      {R"({"steps": [{"op": "mirror"}]})", "cfg.steps[0]"},
      {R"({"steps": [{"op": "waveplate"}, {"op": "qplate"}]})", "cfg.steps[1]"},
      {R"({"steps": [{"op": "reorder", "order": ["a", 1]}]})", "mixes"},
      {R"({"analyses": ["everything"]})", "everything"},
  };
  for (const auto& [text, needle] : cases) {
    try {
      parse_config(text, {}, "cfg");
      ADD_FAILURE() << text;
    } catch (const Error& e) {
      EXPECT_EQ(e.code(), ErrorCode::ParseError) << text;
      EXPECT_NE(std::string(e.what()).find(needle), std::string::npos) << e.what();
    }
  }
}

TEST(Pipeline, JsonResultCarriesDiagnosticsAndReport) {
  const auto doc = to_json(run_pipeline(reproduction_config()));
  EXPECT_EQ(doc["diagnostics"].size(), 5u);
  EXPECT_EQ(doc["diagnostics"][4]["step"], "qplate");
  EXPECT_TRUE(doc["validity"]["physical"].get<bool>());
  EXPECT_EQ(doc["report"]["pairwise"].size(), 6u);
  EXPECT_EQ(doc["state"]["modes"][1]["tag"], "a2");
}
