#pragma once

// CSV ingestion, run specification and command dispatch for the mcinv tool.

#include <json.hpp>

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <cstddef>
#include <fstream>
#include <iomanip>
#include <istream>
#include <limits>
#include <locale>
#include <memory>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <string_view>
#include <thread>
#include <vector>

#include "mcinv/coverage.hpp"
#include "mcinv/errors.hpp"
#include "mcinv/interval.hpp"
#include "mcinv/invert.hpp"
#include "mcinv/oracle.hpp"
#include "mcinv/rng.hpp"
#include "mcinv/shift_models.hpp"

namespace mcinv {

inline constexpr const char* kVersion = "0.1.0";

// ---------------------------------------------------------------------------
// CSV

namespace detail {

inline std::string normalize_line(std::string line) {
  if (line.starts_with("\xEF\xBB\xBF")) line.erase(0, 3);
  // U+2212 MINUS SIGN -> '-'
  for (std::size_t pos; (pos = line.find("\xE2\x88\x92")) != std::string::npos;) line.replace(pos, 3, "-");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  return line;
}

inline std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t");
  return s.substr(first, last - first + 1);
}

inline std::vector<std::string> split_fields(std::string_view line) {
  std::vector<std::string> out;
  if (line.find(',') != std::string_view::npos) {
    std::size_t start = 0;
    for (;;) {
      const auto comma = line.find(',', start);
      out.emplace_back(trim(line.substr(start, comma - start)));
      if (comma == std::string_view::npos) break;
      start = comma + 1;
    }
    return out;
  }
  std::istringstream in{std::string(line)};
  for (std::string field; in >> field;) out.push_back(field);
  return out;
}

inline std::optional<double> parse_number(std::string_view s) {
  s = trim(s);
  if (s.starts_with('+')) s.remove_prefix(1);
  if (s.empty()) return std::nullopt;
  double value = 0.0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
  if (ec != std::errc() || ptr != s.data() + s.size() || !std::isfinite(value)) return std::nullopt;
  return value;
}

struct Row {
  std::size_t line = 0;
  std::vector<std::string> fields;
};

// Non-blank rows; a first row whose first field is not a number is a header.
inline std::vector<Row> read_rows(std::istream& in, const std::string& name) {
  std::vector<Row> rows;
  std::string raw;
  std::size_t line_no = 0;
  bool first = true;
  while (std::getline(in, raw)) {
    ++line_no;
    const auto line = normalize_line(raw);
    if (trim(line).empty()) continue;
    auto fields = split_fields(line);
    if (first) {
      first = false;
      if (!parse_number(fields.front())) continue;
    }
    rows.push_back({line_no, std::move(fields)});
  }
  if (rows.empty()) throw InputError(name + ": no data rows");
  return rows;
}

inline std::ifstream open_input(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open input file '" + path + "'");
  return in;
}

inline InputError row_error(const std::string& name, std::size_t line, const std::string& what) {
  return InputError(name + ":" + std::to_string(line) + ": " + what);
}

}  // namespace detail

inline OneSampleData parse_one_sample_csv(std::istream& in, const std::string& name = "<input>") {
  OneSampleData data;
  for (const auto& row : detail::read_rows(in, name)) {
    if (row.fields.size() != 1) {
      throw detail::row_error(name, row.line, "expected one value per line, got " + std::to_string(row.fields.size()));
    }
    const auto v = detail::parse_number(row.fields[0]);
    if (!v) throw detail::row_error(name, row.line, "not a number: '" + row.fields[0] + "'");
    data.x.push_back(*v);
  }
  return data;
}

inline OneSampleData parse_one_sample_csv(const std::string& path) {
  auto in = detail::open_input(path);
  return parse_one_sample_csv(in, path);
}

struct TwoSampleFile {
  TwoSampleData data;
  std::string treatment_label;
  std::string control_label;
};

// value,group rows. The first label seen is the treatment unless
// `treatment_label` names the other one. Treated units come first, each group
// in file order.
inline TwoSampleFile read_two_sample_csv(std::istream& in, const std::string& name = "<input>",
                                         const std::optional<std::string>& treatment_label = std::nullopt) {
  std::vector<std::string> labels;
  std::vector<std::pair<double, std::size_t>> units;
  for (const auto& row : detail::read_rows(in, name)) {
    if (row.fields.size() != 2) {
      throw detail::row_error(name, row.line, "expected 'value,group', got " + std::to_string(row.fields.size()) +
                                                  " fields");
    }
    const auto v = detail::parse_number(row.fields[0]);
    if (!v) throw detail::row_error(name, row.line, "not a number: '" + row.fields[0] + "'");
    const auto& label = row.fields[1];
    if (label.empty()) throw detail::row_error(name, row.line, "empty group label");
    auto it = std::find(labels.begin(), labels.end(), label);
    if (it == labels.end()) {
      labels.push_back(label);
      it = labels.end() - 1;
    }
    units.emplace_back(*v, static_cast<std::size_t>(it - labels.begin()));
  }
  if (labels.size() != 2) {
    std::string list;
    for (const auto& l : labels) list += (list.empty() ? "" : ", ") + l;
    throw InputError(name + ": expected exactly 2 groups, found " + std::to_string(labels.size()) + " (" + list + ")");
  }
  std::size_t treated = 0;
  if (treatment_label) {
    const auto it = std::find(labels.begin(), labels.end(), *treatment_label);
    if (it == labels.end()) {
      throw InputError(name + ": treatment label '" + *treatment_label + "' not found (labels: " + labels[0] + ", " +
                       labels[1] + ")");
    }
    treated = static_cast<std::size_t>(it - labels.begin());
  }
  TwoSampleFile out;
  out.treatment_label = labels[treated];
  out.control_label = labels[1 - treated];
  for (const auto& [v, g] : units) {
    if (g == treated) out.data.w.push_back(v);
  }
  out.data.m = out.data.w.size();
  for (const auto& [v, g] : units) {
    if (g != treated) out.data.w.push_back(v);
  }
  return out;
}

inline TwoSampleData parse_two_sample_csv(const std::string& path,
                                          const std::optional<std::string>& treatment_label = std::nullopt) {
  auto in = detail::open_input(path);
  return read_two_sample_csv(in, path, treatment_label).data;
}

// ---------------------------------------------------------------------------
// Run specification

enum class Command { ci, test, oracle, coverage };
enum class OutputFormat { text, json };

inline const char* to_string(Command c) {
  switch (c) {
    case Command::ci: return "ci";
    case Command::test: return "test";
    case Command::oracle: return "oracle";
    case Command::coverage: return "coverage";
  }
  return "?";
}

inline const char* to_string(GeneratorKind g) { return g == GeneratorKind::sha256 ? "sha256" : "mt19937"; }

namespace detail {

template <class E, std::size_t K>
E parse_enum(std::string_view text, const char* what, const std::array<E, K>& values) {
  for (auto v : values) {
    if (text == to_string(v)) return v;
  }
  std::string allowed;
  for (auto v : values) allowed += (allowed.empty() ? "" : ", ") + std::string(to_string(v));
  throw InputError(std::string("invalid ") + what + " '" + std::string(text) + "' (expected one of: " + allowed + ")");
}

}  // namespace detail

inline Command parse_command(std::string_view s) {
  return detail::parse_enum(s, "command",
                            std::array{Command::ci, Command::test, Command::oracle, Command::coverage});
}
inline Model parse_model(std::string_view s) {
  return detail::parse_enum(s, "model", std::array{Model::one_sample, Model::two_sample});
}
inline Side parse_side(std::string_view s) {
  return detail::parse_enum(s, "side", std::array{Side::lower, Side::upper, Side::two_sided});
}
inline Convention parse_convention(std::string_view s) {
  return detail::parse_enum(s, "convention", std::array{Convention::bonferroni, Convention::abs});
}
inline Statistic parse_statistic(std::string_view s) {
  return detail::parse_enum(s, "statistic", std::array{Statistic::mean, Statistic::studentized});
}
inline GeneratorKind parse_generator(std::string_view s) {
  return detail::parse_enum(s, "generator", std::array{GeneratorKind::sha256, GeneratorKind::mt19937});
}
inline Noise parse_noise(std::string_view s) {
  return detail::parse_enum(s, "noise", std::array{Noise::uniform_symmetric, Noise::two_point});
}

struct RunSpec {
  Command command = Command::ci;
  Model model = Model::one_sample;
  double alpha = 0.05;
  std::size_t N = 10000;
  std::string seed = "0";
  double tol = 1e-8;
  Side side = Side::two_sided;
  Convention convention = Convention::bonferroni;
  Statistic statistic = Statistic::mean;
  std::optional<double> eta;
  std::optional<std::string> treatment_label;
  unsigned threads = 0;  // 0: all cores
  OutputFormat output = OutputFormat::text;
  GeneratorKind generator = GeneratorKind::sha256;
  std::string input;
  // coverage
  double theta = 0.0;
  std::size_t n = 10;
  std::size_t m = 5;
  std::size_t replications = 1000;
  Noise noise = Noise::uniform_symmetric;
  double scale = 1.0;

  void validate() const {
    if (!(alpha > 0.0 && alpha < 1.0)) throw InputError("--alpha must lie in (0, 1)");
    if (!(tol > 0.0) || !std::isfinite(tol)) throw InputError("--tol must be positive");
    if (command != Command::coverage && input.empty()) throw InputError("an input CSV file is required");
    if (command == Command::test && !eta) throw InputError("the test command needs --eta");
    if (eta && !std::isfinite(*eta)) throw InputError("--eta must be finite");
    if (statistic == Statistic::studentized && model == Model::one_sample) {
      throw InputError("--statistic studentized is only available for two-sample data");
    }
    if (statistic == Statistic::studentized && (command == Command::oracle || command == Command::coverage)) {
      throw InputError("--statistic studentized is only available for ci and test");
    }
    if (command == Command::coverage) {
      if (replications < 1) throw InputError("--replications must be >= 1");
      if (!(scale > 0.0) || !std::isfinite(scale)) throw InputError("--scale must be positive");
      if (n < 1) throw InputError("--n must be >= 1");
      if (model == Model::two_sample && (m == 0 || m >= n)) throw InputError("coverage needs 0 < --m < --n");
    }
  }

  unsigned worker_threads() const {
    return threads > 0 ? threads : std::max(1u, std::thread::hardware_concurrency());
  }
};

// Fields of a previous JSON output (or a hand-written config) applied to a
// spec. Unknown keys and nulls are ignored so result documents can be fed back.
inline void apply_config(RunSpec& spec, const nlohmann::json& cfg) {
  if (!cfg.is_object()) throw InputError("config must be a JSON object");
  auto get = [&](const char* key) -> const nlohmann::json* {
    const auto it = cfg.find(key);
    return it == cfg.end() || it->is_null() ? nullptr : &*it;
  };
  try {
    if (auto v = get("command")) spec.command = parse_command(v->get<std::string>());
    if (auto v = get("model")) spec.model = parse_model(v->get<std::string>());
    if (auto v = get("alpha")) spec.alpha = v->get<double>();
    if (auto v = get("N")) spec.N = v->get<std::size_t>();
    if (auto v = get("seed")) spec.seed = v->get<std::string>();
    if (auto v = get("e")) spec.tol = v->get<double>();
    if (auto v = get("side")) spec.side = parse_side(v->get<std::string>());
    if (auto v = get("convention")) spec.convention = parse_convention(v->get<std::string>());
    if (auto v = get("statistic")) spec.statistic = parse_statistic(v->get<std::string>());
    if (auto v = get("eta")) spec.eta = v->get<double>();
    if (auto v = get("treatment_label")) spec.treatment_label = v->get<std::string>();
    if (auto v = get("generator")) spec.generator = parse_generator(v->get<std::string>());
    if (auto v = get("input")) spec.input = v->get<std::string>();
    if (auto v = get("theta")) spec.theta = v->get<double>();
    if (auto v = get("n")) spec.n = v->get<std::size_t>();
    if (auto v = get("m")) spec.m = v->get<std::size_t>();
    if (auto v = get("replications")) spec.replications = v->get<std::size_t>();
    if (auto v = get("noise")) spec.noise = parse_noise(v->get<std::string>());
    if (auto v = get("scale")) spec.scale = v->get<double>();
  } catch (const nlohmann::json::exception& e) {
    throw InputError(std::string("invalid config value: ") + e.what());
  }
}

inline nlohmann::json load_config_file(const std::string& path) {
  auto in = detail::open_input(path);
  try {
    return nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw InputError("cannot parse config '" + path + "': " + e.what());
  }
}

// ---------------------------------------------------------------------------
// Dispatch

namespace detail {

inline nlohmann::json json_number(double v) {
  if (std::isnan(v)) return nullptr;
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  return v;
}

inline nlohmann::json base_document(const RunSpec& spec) {
  nlohmann::json doc;
  doc["command"] = to_string(spec.command);
  doc["model"] = to_string(spec.model);
  doc["alpha"] = spec.alpha;
  doc["N"] = spec.N;
  doc["seed"] = spec.seed;
  doc["e"] = spec.tol;
  doc["side"] = to_string(spec.side);
  doc["convention"] = to_string(spec.convention);
  doc["statistic"] = to_string(spec.statistic);
  doc["generator"] = to_string(spec.generator);
  doc["input"] = spec.input.empty() ? nlohmann::json(nullptr) : nlohmann::json(spec.input);
  doc["treatment_label"] = nullptr;
  doc["eta"] = spec.eta ? json_number(*spec.eta) : nlohmann::json(nullptr);
  doc["lower"] = nullptr;
  doc["upper"] = nullptr;
  doc["p_value"] = nullptr;
  doc["evaluations"] = 0;
  return doc;
}

inline void put_interval(nlohmann::json& doc, const ConfidenceResult& r) {
  doc["lower"] = json_number(r.lower);
  doc["upper"] = json_number(r.upper);
  doc["lower_closed"] = r.lower_closed;
  doc["upper_closed"] = r.upper_closed;
  doc["p_at_eta0"] = json_number(r.p_at_eta0);
  doc["evaluations"] = r.evaluations;
  doc["diagnostics"] = r.diagnostics;
}

// Unbounded or empty on a side the user asked to bound.
inline bool unrequested_unbounded(const RunSpec& spec, const ConfidenceResult& r) {
  if (std::find(r.diagnostics.begin(), r.diagnostics.end(), "empty") != r.diagnostics.end()) return true;
  const bool want_lower = spec.side != Side::upper;
  const bool want_upper = spec.side != Side::lower;
  return (want_lower && !std::isfinite(r.lower)) || (want_upper && !std::isfinite(r.upper));
}

struct Loaded {
  std::optional<OneSampleData> one;
  std::optional<TwoSampleFile> two;
};

inline Loaded load_data(const RunSpec& spec) {
  Loaded data;
  auto in = open_input(spec.input);
  if (spec.model == Model::one_sample) {
    if (spec.treatment_label) throw InputError("--treatment-label applies to two-sample data only");
    data.one = parse_one_sample_csv(in, spec.input);
    data.one->validate();
  } else {
    data.two = read_two_sample_csv(in, spec.input, spec.treatment_label);
    data.two->data.validate();
  }
  return data;
}

inline IntervalOptions interval_options(const RunSpec& spec) {
  IntervalOptions opt;
  opt.alpha = spec.alpha;
  opt.tol = spec.tol;
  opt.side = spec.side;
  opt.convention = spec.convention;
  opt.statistic = spec.statistic;
  return opt;
}

template <class Fn>
auto with_data(const Loaded& data, Fn&& fn) {
  return data.one ? fn(*data.one) : fn(data.two->data);
}

inline std::shared_ptr<const FrozenDraws> freeze_for(const RunSpec& spec, const Loaded& data) {
  FreezeOptions fo;
  fo.threads = spec.worker_threads();
  fo.keep_assignments = spec.statistic == Statistic::studentized;
  const Bytes seed = parse_seed(spec.seed);
  return with_data(data, [&](const auto& d) {
    return std::make_shared<const FrozenDraws>(freeze(d, spec.N, seed, spec.generator, fo));
  });
}

inline int run_ci(const RunSpec& spec, nlohmann::json& doc) {
  const auto data = load_data(spec);
  if (data.two) doc["treatment_label"] = data.two->treatment_label;
  const auto draws = freeze_for(spec, data);
  const auto opt = interval_options(spec);
  const auto result = with_data(data, [&](const auto& d) { return confidence_interval(d, draws, opt); });
  put_interval(doc, result);
  return unrequested_unbounded(spec, result) ? 4 : 0;
}

inline int run_oracle(const RunSpec& spec, nlohmann::json& doc) {
  const auto data = load_data(spec);
  if (data.two) doc["treatment_label"] = data.two->treatment_label;
  const auto result = with_data(
      data, [&](const auto& d) { return full_group_interval(d, spec.alpha, spec.side, spec.convention); });
  doc["N"] = result.N;
  doc["seed"] = nullptr;
  put_interval(doc, result);
  doc["evaluations"] = result.N;
  return unrequested_unbounded(spec, result) ? 4 : 0;
}

inline int run_test(const RunSpec& spec, nlohmann::json& doc) {
  const auto data = load_data(spec);
  if (data.two) doc["treatment_label"] = data.two->treatment_label;
  const auto draws = freeze_for(spec, data);
  const auto opt = interval_options(spec);
  const double eta = *spec.eta;
  const auto p_at = [&](Side side) {
    return with_data(data, [&](const auto& d) { return pvalue_function(d, draws, side, opt)(eta); });
  };
  const double p_up = p_at(Side::lower);
  const double p_lo = p_at(Side::upper);
  const double p_two = p_at(Side::two_sided);
  doc["p_upper"] = p_up;
  doc["p_lower"] = p_lo;
  doc["p_two_sided"] = p_two;
  doc["p_value"] = spec.side == Side::lower ? p_up : spec.side == Side::upper ? p_lo : p_two;
  doc["evaluations"] = 3;
  return 0;
}

inline int run_coverage_command(const RunSpec& spec, nlohmann::json& doc) {
  CoverageConfig cfg;
  cfg.model = spec.model;
  cfg.theta_true = spec.theta;
  cfg.n = spec.n;
  cfg.m = spec.m;
  cfg.noise = spec.noise;
  cfg.scale = spec.scale;
  cfg.R = spec.replications;
  cfg.alpha = spec.alpha;
  cfg.N = spec.N;
  cfg.base_seed = parse_seed(spec.seed);
  cfg.convention = spec.convention;
  cfg.tol = spec.tol;
  cfg.threads = spec.worker_threads();
  cfg.generator = spec.generator;
  const auto report = run_coverage(cfg);
  const auto sub = run_subuniformity(cfg);
  doc["theta"] = spec.theta;
  doc["n"] = spec.n;
  doc["m"] = spec.model == Model::two_sample ? nlohmann::json(spec.m) : nlohmann::json(nullptr);
  doc["replications"] = spec.replications;
  doc["noise"] = to_string(spec.noise);
  doc["scale"] = spec.scale;
  doc["covered"] = report.covered;
  doc["R"] = report.R;
  doc["empirical_coverage"] = report.empirical_coverage;
  doc["binomial_se"] = report.binomial_se;
  doc["mean_length"] = json_number(report.mean_length);
  doc["unbounded"] = report.unbounded;
  doc["empty"] = report.empty;
  doc["coverage_ok"] = report.empirical_coverage >= 1.0 - spec.alpha - 3.0 * report.binomial_se;
  nlohmann::json rows = nlohmann::json::array();
  for (const auto& r : sub.rows) {
    rows.push_back({{"threshold", r.threshold}, {"ecdf", r.ecdf}, {"bound", r.bound}, {"pass", r.pass}});
  }
  doc["subuniformity"] = rows;
  doc["subuniformity_ok"] = sub.pass();
  return 0;
}

inline std::string format_value(const nlohmann::json& v) {
  if (v.is_null()) return "-";
  if (v.is_string()) return v.get<std::string>();
  if (v.is_number_float()) {
    std::ostringstream s;
    s.imbue(std::locale::classic());
    s << std::setprecision(10) << v.get<double>();
    return s.str();
  }
  return v.dump();
}

inline void write_text(std::ostream& out, const nlohmann::json& doc) {
  const auto cmd = doc["command"].get<std::string>();
  out << cmd << ' ' << doc["model"].get<std::string>();
  if (doc.contains("treatment_label") && !doc["treatment_label"].is_null()) {
    out << " (treatment: " << doc["treatment_label"].get<std::string>() << ')';
  }
  out << '\n';
  if (cmd == "ci" || cmd == "oracle") {
    const bool lc = doc.value("lower_closed", false);
    const bool uc = doc.value("upper_closed", false);
    out << "  " << doc["side"].get<std::string>() << ' ' << doc["convention"].get<std::string>() << " interval "
        << (lc ? '[' : '(') << format_value(doc["lower"]) << ", " << format_value(doc["upper"]) << (uc ? ']' : ')')
        << '\n';
  } else if (cmd == "test") {
    out << "  eta=" << format_value(doc["eta"]) << " p=" << format_value(doc["p_value"])
        << " (upper " << format_value(doc["p_upper"]) << ", lower " << format_value(doc["p_lower"])
        << ", two-sided " << format_value(doc["p_two_sided"]) << ")\n";
  } else {
    out << "  coverage " << format_value(doc["empirical_coverage"]) << " (" << format_value(doc["covered"]) << '/'
        << format_value(doc["R"]) << ", se " << format_value(doc["binomial_se"]) << "), mean length "
        << format_value(doc["mean_length"]) << '\n';
    for (const auto& r : doc["subuniformity"]) {
      out << "  P<=" << format_value(r["threshold"]) << ": " << format_value(r["ecdf"]) << " (bound "
          << format_value(r["bound"]) << ") " << (r["pass"].get<bool>() ? "ok" : "FAIL") << '\n';
    }
  }
  out << "  alpha=" << format_value(doc["alpha"]) << " N=" << format_value(doc["N"])
      << " seed=" << format_value(doc["seed"]) << " e=" << format_value(doc["e"])
      << " evaluations=" << format_value(doc["evaluations"]) << " time=" << format_value(doc["wall_time_ms"])
      << "ms\n";
  if (doc.contains("diagnostics") && !doc["diagnostics"].empty()) {
    out << "  diagnostics:";
    for (const auto& d : doc["diagnostics"]) out << ' ' << d.get<std::string>();
    out << '\n';
  }
}

}  // namespace detail

// Exit codes: 0 success, 1 internal error, 2 input error, 3 precondition
// failure, 4 an endpoint the user asked for is unbounded (or the set is empty).
inline int run(const RunSpec& spec, std::ostream& out, std::ostream& err) {
  try {
    spec.validate();
    const auto start = std::chrono::steady_clock::now();
    auto doc = detail::base_document(spec);
    int code = 0;
    switch (spec.command) {
      case Command::ci: code = detail::run_ci(spec, doc); break;
      case Command::test: code = detail::run_test(spec, doc); break;
      case Command::oracle: code = detail::run_oracle(spec, doc); break;
      case Command::coverage: code = detail::run_coverage_command(spec, doc); break;
    }
    const auto elapsed = std::chrono::steady_clock::now() - start;
    doc["wall_time_ms"] = std::chrono::duration<double, std::milli>(elapsed).count();
    doc["version"] = kVersion;
    if (spec.output == OutputFormat::json) {
      out << doc.dump(2) << '\n';
    } else {
      detail::write_text(out, doc);
    }
    return code;
  } catch (const InputError& e) {
    err << "error: " << e.what() << '\n';
    return 2;
  } catch (const DomainError& e) {
    err << "error: " << e.what() << '\n';
    return 2;
  } catch (const PreconditionError& e) {
    err << "error: " << e.what() << '\n';
    return 3;
  } catch (const TooLargeError& e) {
    err << "error: " << e.what() << '\n';
    return 3;
  } catch (const std::exception& e) {
    err << "internal error: " << e.what() << '\n';
    return 1;
  }
}

}  // namespace mcinv
