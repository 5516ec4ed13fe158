#include <gtest/gtest.h>

#include <filesystem>
#include <random>

#include "test_support.hpp"

using namespace cvq;
using namespace cvq::testing;

namespace {

const std::filesystem::path kData = CVQ_DATA_DIR;

ErrorCode code_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  return ErrorCode::StepFailure;
}

constexpr std::string_view kTwoMode = R"(
[convention]
sn = 0.5
[register]
a H 0
b V 0
[cov]
0.72 0 0.51 0
0 0.72 0 -0.51
0.51 0 0.72 0
0 -0.51 0 0.72
)";

}  // namespace

TEST(StateFile, FixturesLoad) {
  const auto two = load_state(kData / "sigma2_exp.cvq");
  EXPECT_EQ(two, make_standard_form(reference::experimental_two_mode()));

  const auto vac = load_state(kData / "vacuum4.cvq");
  EXPECT_EQ(vac.modes(), reference::four_mode_output_register());
  EXPECT_EQ(vac.cov(), 0.5 * Matrix::Identity(8, 8));

  const auto exact = load_state(kData / "sigma4_exact.cvq");
  EXPECT_LT(max_abs_diff(exact.cov(), sigma4_closed_form(reference::experimental_two_mode())), 1e-15);
  EXPECT_EQ(exact.modes(), reference::four_mode_output_register());
}

TEST(StateFile, MissingMeanMeansZero) {
  const auto s = parse_state(kTwoMode);
  EXPECT_EQ(s.mean(), Vector::Zero(4));
  EXPECT_EQ(s.cov()(1, 3), -0.51);
}

TEST(StateFile, TruncatedInputNamesTheSection) {
  const std::string text(kTwoMode);
  const auto cut = text.substr(0, text.find("0.51 0 0.72"));
  try {
    parse_state(cut, {}, "cut.cvq");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::ParseError);
    EXPECT_NE(std::string(e.what()).find("[cov]"), std::string::npos) << e.what();
    EXPECT_NE(std::string(e.what()).find("cut.cvq"), std::string::npos);
  }
  try {
    parse_state(text.substr(0, text.find("[cov]")));
    FAIL();
  } catch (const Error& e) {
    EXPECT_NE(std::string(e.what()).find("missing section [cov]"), std::string::npos) << e.what();
  }
}

TEST(StateFile, MalformedInputs) {
  const std::string text(kTwoMode);
  auto replaced = [&](std::string_view from, std::string_view to) {
    std::string s = text;
    s.replace(s.find(from), from.size(), to);
    return s;
  };
  EXPECT_EQ(code_of([&] { parse_state(replaced("0 0.72 0 -0.51", "0 0.72 0 oops")); }), ErrorCode::ParseError);
  EXPECT_EQ(code_of([&] { parse_state(replaced("0 0.72 0 -0.51", "0 0.72 0")); }), ErrorCode::ParseError);
  EXPECT_EQ(code_of([&] { parse_state(replaced("b V 0", "b Q 0")); }), ErrorCode::ParseError);
  EXPECT_EQ(code_of([&] { parse_state(replaced("b V 0", "a H 0")); }), ErrorCode::ParseError);
  EXPECT_EQ(code_of([&] { parse_state(replaced("[register]", "[registers]")); }), ErrorCode::ParseError);
  EXPECT_EQ(code_of([&] { parse_state(replaced("sn = 0.5", "")); }), ErrorCode::ParseError);
  EXPECT_EQ(code_of([&] { parse_state(replaced("sn = 0.5", "sn = 0.5\nordering = qp")); }),
            ErrorCode::ConventionMismatch);
  EXPECT_EQ(code_of([&] { parse_state(replaced("0.72 0 0.51 0", "0.72 0 0.9 0")); }),
            ErrorCode::PhysicalityViolation);
  LoadOptions lenient;
  lenient.check_physical = false;
  EXPECT_NO_THROW(parse_state(replaced("0.72 0 0.51 0", "0.72 0 0.9 0"), lenient));
  EXPECT_EQ(code_of([&] { load_state(kData / "no_such_file.cvq"); }), ErrorCode::ParseError);
}

TEST(StateFile, ForeignShotNoiseNeedsRescale) {
  std::string text(kTwoMode);
  text.replace(text.find("sn = 0.5"), 8, "sn = 1");
  EXPECT_EQ(code_of([&] { parse_state(text); }), ErrorCode::ConventionMismatch);
  LoadOptions opts;
  opts.rescale = true;
  opts.check_physical = false;
  // In units where the vacuum is 1 the same numbers describe half the covariance
  // (which is then below the uncertainty bound).
  const auto s = parse_state(text, opts);
  EXPECT_NEAR(s.cov()(0, 0), 0.36, 1e-15);
  EXPECT_NEAR(s.cov()(0, 2), 0.255, 1e-15);
}

TEST(StateFile, XxppOrderingIsConverted) {
  const std::string text = R"([convention]
sn = 0.5
ordering = xxpp
[register]
a H 0
b V 0
[mean]
1 2 3 4
[cov]
0.72 0.51 0 0
0.51 0.72 0 0
0 0 0.72 -0.51
0 0 -0.51 0.72
)";
  const auto s = parse_state(text);
  EXPECT_EQ(s.cov(), standard_form_matrix(reference::experimental_two_mode()));
  Vector mean(4);
  mean << 1, 3, 2, 4;
  EXPECT_EQ(s.mean(), mean);
}

TEST(StateFile, RoundTripIsBitExact) {
  std::mt19937 rng(61);
  std::normal_distribution<double> normal(0.0, 1.0);
  const auto dir = std::filesystem::temp_directory_path() / "cvq_io_test";
  std::filesystem::create_directories(dir);
  for (int trial = 0; trial < 20; ++trial) {
    const std::size_t n = 1 + trial % 4;
    Vector mean(static_cast<Eigen::Index>(2 * n));
    for (auto& x : mean) x = normal(rng);
    const GaussianState s(plain_register(n), mean, random_covariance(n, rng));
    EXPECT_EQ(parse_state(format_state(s)), s);
    const auto path = dir / ("state" + std::to_string(trial) + ".cvq");
    save_state(s, path);
    EXPECT_EQ(load_state(path), s);
  }
  std::filesystem::remove_all(dir);

  const GaussianState bad_tag(ModeRegister({{Polarization::H, 0, "has space"}}), 0.5 * Matrix::Identity(2, 2));
  EXPECT_EQ(code_of([&] { format_state(bad_tag); }), ErrorCode::InvalidArgument);
}

TEST(CsvImport, PublishedMatrixIsAsymmetric) {
  const auto reg = parse_register_spec("a1:L:0,a2:R:1,b1:R:0,b2:L:-1");
  EXPECT_EQ(reg, reference::four_mode_output_register());
  LoadOptions lenient;
  lenient.check_physical = false;
  const auto s = load_cov_csv(kData / "sigma4_published.csv", reg, lenient);
  EXPECT_EQ(s.cov(), reference::published_four_mode());
  const auto v = validate(s);
  EXPECT_FALSE(v.symmetric);
  EXPECT_NEAR(v.max_asymmetry, 0.60, 1e-15);
  EXPECT_EQ(code_of([&] { load_cov_csv(kData / "sigma4_published.csv", reg); }), ErrorCode::PhysicalityViolation);
}

TEST(CsvImport, ShapeAndRegisterErrors) {
  const auto reg = parse_register_spec("a:H:0");
  EXPECT_EQ(parse_cov_csv("0.5, 0\n0, 0.5\n", reg).cov(), 0.5 * Matrix::Identity(2, 2));
  EXPECT_EQ(code_of([&] { parse_cov_csv("1 0\n0 1\n", reg, {}, 1.0); }), ErrorCode::ConventionMismatch);
  LoadOptions rescale;
  rescale.rescale = true;
  EXPECT_EQ(parse_cov_csv("1 0\n0 1\n", reg, rescale, 1.0).cov(), 0.5 * Matrix::Identity(2, 2));
  EXPECT_EQ(code_of([&] { parse_cov_csv("0.5 0\n", reg); }), ErrorCode::ParseError);
  EXPECT_EQ(code_of([&] { parse_register_spec("a:H"); }), ErrorCode::ParseError);
  EXPECT_EQ(code_of([&] { parse_register_spec("a:X:0"); }), ErrorCode::ParseError);
  EXPECT_EQ(code_of([&] { parse_register_spec("a:H:0,a:H:0"); }), ErrorCode::DuplicateLabel);
}

TEST(Formatting, ExactAndFourSignificantFigures) {
  EXPECT_EQ(format_exact(0.1), "0.1");
  EXPECT_EQ(format_exact(0.255), "0.255");
  EXPECT_EQ(format_sig4(0.21), "0.2100");
  EXPECT_EQ(format_sig4(0.8675006), "0.8675");
  EXPECT_EQ(format_sig4(0.0), "0.000");
}

TEST(ReportJson, RoundTripIsByteIdentical) {
  const auto out = four_mode_output(reference::experimental_two_mode());
  const auto report = analyze(out, true, true);
  const std::string first = emit_report(report, Format::Json);
  const auto parsed = report_from_json(Json::parse(first));
  EXPECT_EQ(emit_report(parsed, Format::Json), first);
  EXPECT_EQ(parsed.modes, report.modes);
  EXPECT_EQ(parsed.bipartitions, report.bipartitions);
  EXPECT_EQ(parsed.pairwise, report.pairwise);

  const auto doc = Json::parse(first);
  EXPECT_EQ(doc["pairwise"].size(), 6u);
  EXPECT_EQ(doc["pairwise"][0]["modes"], Json::array({"a1", "a2"}));
  EXPECT_EQ(doc["pairwise"][0]["verdict"]["status"], "Separable");
  EXPECT_EQ(doc["bipartitions"].size(), 7u);
}

TEST(ReportJson, MalformedDocumentsAreParseErrors) {
  EXPECT_EQ(code_of([] { report_from_json(Json::parse(R"({"modes": []})")); }), ErrorCode::ParseError);
  const auto doc = Json::parse(R"({"modes": [{"tag": "a", "polarization": "H", "oam": 0},
                                           {"tag": "b", "polarization": "V", "oam": 0}],
                                 "pairwise": [{"i": 0, "j": 1, "verdict": {"status": "Maybe", "method": "PPT",
                                                                            "log_negativity": 0}}],
                                 "bipartitions": []})");
  EXPECT_EQ(code_of([&] { report_from_json(doc); }), ErrorCode::ParseError);
}

TEST(ReportText, ExperimentalStateWitness) {
  const auto report = analyze(make_standard_form(reference::experimental_two_mode()), true, false);
  const auto text = emit_report(report, Format::Text);
  EXPECT_NE(text.find("a-b"), std::string::npos) << text;
  EXPECT_NE(text.find("Entangled"), std::string::npos);
  EXPECT_NE(text.find("witness 0.2100"), std::string::npos) << text;
  EXPECT_NE(text.find("logneg 0.8675"), std::string::npos) << text;
}

TEST(ReportText, EmptyReport) {
  const EntanglementReport empty;
  EXPECT_EQ(emit_report(empty, Format::Text), "modes: (none)\n");
  const auto doc = Json::parse(emit_report(empty, Format::Json));
  EXPECT_TRUE(doc["modes"].empty());
  EXPECT_TRUE(doc["pairwise"].empty());
  EXPECT_TRUE(doc["bipartitions"].empty());
}
