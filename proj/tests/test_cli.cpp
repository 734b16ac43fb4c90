#include <gtest/gtest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <locale>
#include <sstream>
#include <string>

#include "mcinv/cli.hpp"

using namespace mcinv;

namespace {

const std::string kData = MCINV_DATA_DIR;

OneSampleData one_sample(const std::string& text) {
  std::istringstream in(text);
  return parse_one_sample_csv(in);
}

TwoSampleFile two_sample(const std::string& text, std::optional<std::string> label = std::nullopt) {
  std::istringstream in(text);
  return read_two_sample_csv(in, "<test>", label);
}

struct Outcome {
  int code;
  std::string out;
  std::string err;
};

Outcome run_spec(const RunSpec& spec) {
  std::ostringstream out, err;
  const int code = run(spec, out, err);
  return {code, out.str(), err.str()};
}

nlohmann::json json_of(const Outcome& o) { return nlohmann::json::parse(o.out); }

RunSpec spec_for(Command c, Model m, const std::string& file) {
  RunSpec s;
  s.command = c;
  s.model = m;
  s.input = kData + "/" + file;
  s.output = OutputFormat::json;
  s.threads = 1;
  return s;
}

}  // namespace

TEST(ParseOneSample, PlainLines) { EXPECT_EQ(one_sample("49\n-67\n8\n").x, (std::vector<double>{49, -67, 8})); }

TEST(ParseOneSample, UnicodeMinusAndHeader) {
  EXPECT_EQ(one_sample("diff\n49\n\xE2\x88\x92" "67\n8\r\n").x, (std::vector<double>{49, -67, 8}));
}

TEST(ParseOneSample, DarwinFile) { EXPECT_EQ(parse_one_sample_csv(kData + "/darwin.csv").n(), 15u); }

TEST(ParseOneSample, Errors) {
  try {
    one_sample("1\n2\nabc\n");
    FAIL();
  } catch (const InputError& e) {
    EXPECT_NE(std::string(e.what()).find(":3:"), std::string::npos);
  }
  EXPECT_THROW(one_sample(""), InputError);
  EXPECT_THROW(one_sample("header only\n"), InputError);
  EXPECT_THROW(one_sample("1,2\n"), InputError);
  EXPECT_THROW(one_sample("1\ninf\n"), InputError);
  EXPECT_THROW(parse_one_sample_csv("/nonexistent/file.csv"), InputError);
}

TEST(ParseTwoSample, SleepFileFirstLabelIsTreatment) {
  const auto d = parse_two_sample_csv(kData + "/sleep.csv");
  EXPECT_EQ(d.n(), 26u);
  EXPECT_EQ(d.m, 15u);
  EXPECT_EQ(d.w.front(), 35.3);
}

TEST(ParseTwoSample, TreatmentLabelReordersCanonically) {
  const auto f = two_sample("value,group\n1,a\n2,b\n3,a\n4,b\n5,b\n", "b");
  EXPECT_EQ(f.data.w, (std::vector<double>{2, 4, 5, 1, 3}));
  EXPECT_EQ(f.data.m, 3u);
  EXPECT_EQ(f.treatment_label, "b");
  EXPECT_EQ(f.control_label, "a");
}

TEST(ParseTwoSample, GroupErrors) {
  EXPECT_THROW(two_sample("1,a\n2,a\n"), InputError);
  try {
    two_sample("1,a\n2,b\n3,c\n");
    FAIL();
  } catch (const InputError& e) {
    EXPECT_NE(std::string(e.what()).find("a, b, c"), std::string::npos);
  }
  EXPECT_THROW(two_sample("1,a\n2,b\n", std::string("z")), InputError);
  EXPECT_THROW(two_sample("1,a\nx,b\n"), InputError);
  EXPECT_THROW(two_sample("1\n2\n"), InputError);
}

TEST(Run, OracleDarwin) {
  auto s = spec_for(Command::oracle, Model::one_sample, "darwin.csv");
  const auto o = run_spec(s);
  ASSERT_EQ(o.code, 0) << o.err;
  const auto j = json_of(o);
  EXPECT_NEAR(j["lower"].get<double>(), -0.167, 0.0005);
  EXPECT_NEAR(j["upper"].get<double>(), 41.0, 0.0005);
  for (const char* key : {"command", "model", "alpha", "N", "seed", "e", "side", "convention", "lower", "upper",
                          "p_value", "evaluations", "wall_time_ms", "version"}) {
    EXPECT_TRUE(j.contains(key)) << key;
  }
}

TEST(Run, TestWithoutReplicatesIsOne) {
  auto s = spec_for(Command::test, Model::one_sample, "darwin.csv");
  s.eta = 0.0;
  s.N = 0;
  const auto o = run_spec(s);
  ASSERT_EQ(o.code, 0) << o.err;
  EXPECT_EQ(json_of(o)["p_value"].get<double>(), 1.0);
}

TEST(Run, SleepInterval) {
  auto s = spec_for(Command::ci, Model::two_sample, "sleep.csv");
  s.seed = "s1";
  s.treatment_label = "0-6h";
  const auto o = run_spec(s);
  ASSERT_EQ(o.code, 0) << o.err;
  const auto j = json_of(o);
  EXPECT_NEAR(j["lower"].get<double>(), -2.333, 1.0);
  EXPECT_NEAR(j["upper"].get<double>(), 0.643, 1.0);
  EXPECT_EQ(j["seed"], "s1");
  EXPECT_EQ(j["treatment_label"], "0-6h");
}

TEST(Run, ExitCodes) {
  auto floor = spec_for(Command::ci, Model::one_sample, "darwin.csv");
  floor.N = 10;
  floor.alpha = 0.01;
  EXPECT_EQ(run_spec(floor).code, 3);

  auto missing = spec_for(Command::ci, Model::one_sample, "no-such-file.csv");
  EXPECT_EQ(run_spec(missing).code, 2);

  auto unbounded = spec_for(Command::ci, Model::one_sample, "darwin.csv");
  unbounded.N = 0;
  const auto o = run_spec(unbounded);
  EXPECT_EQ(o.code, 4);
  EXPECT_EQ(json_of(o)["lower"], "-inf");

  auto lower_only = spec_for(Command::ci, Model::one_sample, "darwin.csv");
  lower_only.N = 999;
  lower_only.side = Side::lower;
  EXPECT_EQ(run_spec(lower_only).code, 0);

  auto bad_alpha = spec_for(Command::ci, Model::one_sample, "darwin.csv");
  bad_alpha.alpha = 1.5;
  EXPECT_EQ(run_spec(bad_alpha).code, 2);

  auto too_big = spec_for(Command::oracle, Model::one_sample, "darwin.csv");
  too_big.input = "big.csv";
  {
    std::ofstream f(too_big.input);
    for (int i = 0; i < 30; ++i) f << i << '\n';
  }
  EXPECT_EQ(run_spec(too_big).code, 3);
  std::filesystem::remove(too_big.input);
}

TEST(Run, ConfigRoundTrip) {
  auto s = spec_for(Command::ci, Model::two_sample, "lizards.csv");
  s.N = 2000;
  s.seed = "hex:00ff";
  s.alpha = 0.1;
  s.treatment_label = "uninfected";
  s.side = Side::upper;
  const auto first = json_of(run_spec(s));

  RunSpec again;
  apply_config(again, first);
  again.output = OutputFormat::json;
  again.threads = 1;
  auto second = json_of(run_spec(again));
  auto a = first, b = second;
  a.erase("wall_time_ms");
  b.erase("wall_time_ms");
  EXPECT_EQ(a.dump(), b.dump());
}

TEST(Run, ByteIdenticalAcrossThreadCounts) {
  auto s = spec_for(Command::ci, Model::one_sample, "darwin.csv");
  s.N = 5000;
  auto a = json_of(run_spec(s));
  s.threads = 4;
  auto b = json_of(run_spec(s));
  a.erase("wall_time_ms");
  b.erase("wall_time_ms");
  EXPECT_EQ(a.dump(), b.dump());
}

TEST(Run, OutputIsLocaleIndependent) {
  struct Comma : std::numpunct<char> {
    char do_decimal_point() const override { return ','; }
  };
  const auto previous = std::locale::global(std::locale(std::locale::classic(), new Comma));
  auto s = spec_for(Command::oracle, Model::one_sample, "darwin.csv");
  s.output = OutputFormat::text;
  const auto text = run_spec(s).out;
  s.output = OutputFormat::json;
  const auto json = run_spec(s).out;
  std::locale::global(previous);
  EXPECT_NE(text.find("41"), std::string::npos);
  EXPECT_NE(text.find("-0.1666666667"), std::string::npos);
  EXPECT_NE(json.find("0.05"), std::string::npos);
}

TEST(Run, CoverageCommand) {
  RunSpec s;
  s.command = Command::coverage;
  s.model = Model::one_sample;
  s.N = 99;
  s.replications = 100;
  s.output = OutputFormat::json;
  s.threads = 1;
  s.tol = 1e-6;
  const auto o = run_spec(s);
  ASSERT_EQ(o.code, 0) << o.err;
  const auto j = json_of(o);
  EXPECT_EQ(j["R"], 100);
  EXPECT_EQ(j["subuniformity"].size(), 5u);
}

TEST(Run, StudentizedNeedsTwoSample) {
  auto s = spec_for(Command::ci, Model::one_sample, "darwin.csv");
  s.statistic = Statistic::studentized;
  EXPECT_EQ(run_spec(s).code, 2);
  auto t = spec_for(Command::ci, Model::two_sample, "sleep.csv");
  t.statistic = Statistic::studentized;
  t.N = 999;
  const auto o = run_spec(t);
  EXPECT_EQ(o.code, 0) << o.err;
}
