#include <CLI11.hpp>

#include <iostream>
#include <optional>
#include <string>

#include "mcinv/cli.hpp"

namespace {

struct Flags {
  std::string model;
  std::string input;
  double alpha = 0.05;
  std::size_t n_replicates = 10000;
  std::string seed = "0";
  double tol = 1e-8;
  std::string side = "two-sided";
  std::string convention = "bonferroni";
  std::string statistic = "mean";
  double eta = 0.0;
  std::string treatment_label;
  unsigned threads = 0;
  std::string output = "text";
  std::string generator = "sha256";
  std::string config;
  double theta = 0.0;
  std::size_t n = 10;
  std::size_t m = 5;
  std::size_t replications = 1000;
  std::string noise = "uniform_symmetric";
  double scale = 1.0;
};

void add_common(CLI::App* sub, Flags& f, bool needs_input) {
  sub->add_option("model", f.model, "one-sample or two-sample")->check(CLI::IsMember({"one-sample", "two-sample"}));
  if (needs_input) sub->add_option("input", f.input, "CSV data file");
  sub->add_option("--alpha", f.alpha, "significance level");
  sub->add_option("--n-replicates", f.n_replicates, "Monte Carlo replicates N");
  sub->add_option("--seed", f.seed, "PRNG seed (text, or hex:...)");
  sub->add_option("--tol", f.tol, "bisection tolerance e");
  sub->add_option("--side", f.side, "lower, upper or two-sided")
      ->check(CLI::IsMember({"lower", "upper", "two-sided"}));
  sub->add_option("--convention", f.convention, "two-sided convention")->check(CLI::IsMember({"bonferroni", "abs"}));
  sub->add_option("--statistic", f.statistic, "mean or studentized")->check(CLI::IsMember({"mean", "studentized"}));
  sub->add_option("--eta", f.eta, "hypothesized shift (test)");
  sub->add_option("--treatment-label", f.treatment_label, "group label of the treated units");
  sub->add_option("--threads", f.threads, "worker threads (0: all cores)");
  sub->add_option("--output", f.output, "text or json")->check(CLI::IsMember({"text", "json"}));
  sub->add_option("--generator", f.generator, "sha256 or mt19937")->check(CLI::IsMember({"sha256", "mt19937"}));
  sub->add_option("--config", f.config, "JSON config or previous JSON output");
}

void add_coverage(CLI::App* sub, Flags& f) {
  sub->add_option("--theta", f.theta, "true shift");
  sub->add_option("--n", f.n, "sample size");
  sub->add_option("--m", f.m, "treated units (two-sample)");
  sub->add_option("--replications", f.replications, "simulated data sets R");
  sub->add_option("--noise", f.noise, "uniform_symmetric or two_point")
      ->check(CLI::IsMember({"uniform_symmetric", "two_point"}));
  sub->add_option("--scale", f.scale, "noise scale");
}

mcinv::RunSpec build_spec(const CLI::App& app, const CLI::App* sub, const Flags& f) {
  mcinv::RunSpec spec;
  const std::string config = app.count("--config") ? f.config : (sub && sub->count("--config") ? f.config : "");
  if (!config.empty()) mcinv::apply_config(spec, mcinv::load_config_file(config));
  if (sub) spec.command = mcinv::parse_command(sub->get_name());
  if (!sub) return spec;
  auto given = [&](const char* name) { return sub->count(name) > 0; };
  if (given("model")) spec.model = mcinv::parse_model(f.model);
  if (sub->get_name() != "coverage" && given("input")) spec.input = f.input;
  if (given("--alpha")) spec.alpha = f.alpha;
  if (given("--n-replicates")) spec.N = f.n_replicates;
  if (given("--seed")) spec.seed = f.seed;
  if (given("--tol")) spec.tol = f.tol;
  if (given("--side")) spec.side = mcinv::parse_side(f.side);
  if (given("--convention")) spec.convention = mcinv::parse_convention(f.convention);
  if (given("--statistic")) spec.statistic = mcinv::parse_statistic(f.statistic);
  if (given("--eta")) spec.eta = f.eta;
  if (given("--treatment-label")) spec.treatment_label = f.treatment_label;
  if (given("--threads")) spec.threads = f.threads;
  if (given("--output")) spec.output = f.output == "json" ? mcinv::OutputFormat::json : mcinv::OutputFormat::text;
  if (given("--generator")) spec.generator = mcinv::parse_generator(f.generator);
  if (sub->get_name() == "coverage") {
    if (given("--theta")) spec.theta = f.theta;
    if (given("--n")) spec.n = f.n;
    if (given("--m")) spec.m = f.m;
    if (given("--replications")) spec.replications = f.replications;
    if (given("--noise")) spec.noise = mcinv::parse_noise(f.noise);
    if (given("--scale")) spec.scale = f.scale;
  }
  return spec;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Confidence bounds by inverting conservative Monte Carlo tests"};
  app.set_version_flag("--version", mcinv::kVersion);
  Flags f;
  std::string top_output = "text";
  app.add_option("--config", f.config, "rerun from a JSON config or previous JSON output");
  app.add_option("--output", top_output, "text or json (with --config only)")->check(CLI::IsMember({"text", "json"}));
  app.require_subcommand(0, 1);

  auto* ci = app.add_subcommand("ci", "Monte Carlo confidence bound or interval");
  auto* test = app.add_subcommand("test", "Monte Carlo P-value at one hypothesized shift");
  auto* oracle = app.add_subcommand("oracle", "exact full-group interval (small n)");
  auto* coverage = app.add_subcommand("coverage", "simulated coverage and P-value sub-uniformity");
  add_common(ci, f, true);
  add_common(test, f, true);
  add_common(oracle, f, true);
  add_common(coverage, f, false);
  add_coverage(coverage, f);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  const CLI::App* sub = nullptr;
  for (auto* s : {ci, test, oracle, coverage}) {
    if (s->parsed()) sub = s;
  }
  if (!sub && f.config.empty()) {
    std::cerr << app.help();
    return 2;
  }
  mcinv::RunSpec spec;
  try {
    spec = build_spec(app, sub, f);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
  if (!sub && app.count("--output")) {
    spec.output = top_output == "json" ? mcinv::OutputFormat::json : mcinv::OutputFormat::text;
  }
  return mcinv::run(spec, std::cout, std::cerr);
}
