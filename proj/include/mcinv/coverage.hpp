#pragma once

// Simulation harness: coverage of intervals under a known shift and
// sub-uniformity of the P-value at the true shift.

#include <array>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <limits>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "mcinv/errors.hpp"
#include "mcinv/interval.hpp"
#include "mcinv/invert.hpp"
#include "mcinv/pvalues.hpp"
#include "mcinv/rng.hpp"
#include "mcinv/shift_models.hpp"

namespace mcinv {

enum class Noise { uniform_symmetric, two_point };

inline const char* to_string(Noise n) { return n == Noise::uniform_symmetric ? "uniform_symmetric" : "two_point"; }

struct CoverageConfig {
  Model model = Model::one_sample;
  double theta_true = 0.0;
  std::size_t n = 10;
  std::size_t m = 5;  // treated units, two-sample only
  Noise noise = Noise::uniform_symmetric;
  double scale = 1.0;
  std::size_t R = 1000;
  double alpha = 0.05;
  std::size_t N = 99;
  Bytes base_seed{'0'};
  Convention convention = Convention::bonferroni;
  double tol = 1e-8;
  unsigned threads = 1;
  GeneratorKind generator = GeneratorKind::sha256;

  void validate() const {
    if (R < 1) throw DomainError("coverage needs at least one replication");
    if (!(alpha > 0.0 && alpha < 1.0)) throw DomainError("alpha must lie in (0, 1)");
    if (!std::isfinite(theta_true)) throw DomainError("theta must be finite");
    if (!(scale > 0.0) || !std::isfinite(scale)) throw DomainError("noise scale must be positive");
    if (n < 1) throw DomainError("n must be >= 1");
    if (model == Model::two_sample && (m == 0 || m >= n)) throw DomainError("two-sample coverage needs 0 < m < n");
  }
};

struct CoverageReport {
  std::size_t covered = 0;
  std::size_t R = 0;
  double empirical_coverage = 0.0;
  double binomial_se = 0.0;
  // Mean over replications with both endpoints finite.
  double mean_length = 0.0;
  std::size_t unbounded = 0;
  std::size_t empty = 0;
};

struct SubuniformityRow {
  double threshold = 0.0;
  double ecdf = 0.0;
  double bound = 0.0;  // threshold + 4 SE
  bool pass = false;
};

struct SubuniformityReport {
  std::vector<SubuniformityRow> rows;
  std::size_t R = 0;
  bool pass() const {
    for (const auto& r : rows) {
      if (!r.pass) return false;
    }
    return true;
  }
};

inline constexpr std::array<double, 5> kSubuniformityThresholds{0.01, 0.05, 0.1, 0.25, 0.5};

// (t_obs, t_reps) -> P-value; the default is the +1 upper-tail estimator.
using PEstimator = std::function<double(double, std::span<const double>)>;

inline double broken_pvalue(double t_obs, std::span<const double> t_reps) {
  std::size_t count = 0;
  for (double t : t_reps) count += t > t_obs;
  return static_cast<double>(count) / static_cast<double>(t_reps.size());
}

namespace detail {

template <ByteSource G>
double draw_noise(G& gen, Noise noise, double scale) {
  if (noise == Noise::two_point) {
    std::uint8_t b = 0;
    gen.next_bytes(std::span<std::uint8_t>(&b, 1));
    return (b & 0x80u) ? scale : -scale;
  }
  return scale * (2.0 * uniform_unit(gen) - 1.0);
}

template <ByteSource G>
std::vector<double> simulate_values(G& gen, const CoverageConfig& cfg) {
  std::vector<double> v(cfg.n);
  for (std::size_t j = 0; j < cfg.n; ++j) {
    const double shift = cfg.model == Model::one_sample || j < cfg.m ? cfg.theta_true : 0.0;
    v[j] = shift + draw_noise(gen, cfg.noise, cfg.scale);
  }
  return v;
}

// Simulated data and frozen draws for replication r.
struct Replication {
  std::vector<double> values;
  std::shared_ptr<const FrozenDraws> draws;
};

template <class G>
Replication make_replication(const CoverageConfig& cfg, std::size_t r) {
  const Bytes seed = derive_seed(cfg.base_seed, r);
  G data_gen(derive_seed(seed, 0));
  const G draw_gen(derive_seed(seed, 1));
  Replication rep;
  rep.values = simulate_values(data_gen, cfg);
  if (cfg.model == Model::one_sample) {
    rep.draws = std::make_shared<const FrozenDraws>(one_sample_freeze(OneSampleData{rep.values}, cfg.N, draw_gen));
  } else {
    rep.draws =
        std::make_shared<const FrozenDraws>(two_sample_freeze(TwoSampleData{rep.values, cfg.m}, cfg.N, draw_gen));
  }
  return rep;
}

template <class Fn>
void for_each_replication(const CoverageConfig& cfg, Fn&& fn) {
  parallel_ranges(cfg.R, cfg.threads, [&](std::size_t begin, std::size_t end) {
    for (std::size_t r = begin; r < end; ++r) {
      if (cfg.generator == GeneratorKind::mt19937) {
        fn(r, make_replication<FastGenerator>(cfg, r));
      } else {
        fn(r, make_replication<SeededGenerator>(cfg, r));
      }
    }
  });
}

}  // namespace detail

inline CoverageReport run_coverage(const CoverageConfig& cfg) {
  cfg.validate();
  IntervalOptions opt;
  opt.alpha = cfg.alpha;
  opt.tol = cfg.tol;
  opt.convention = cfg.convention;
  {
    // Surface the alpha-floor precondition before any simulation.
    const double floor = cfg.N == 0 ? 1.0 : 1.0 / static_cast<double>(cfg.N + 1);
    const double eff = cfg.convention == Convention::bonferroni ? std::min(1.0, 2.0 * floor) : floor;
    detail::check_alpha_floor(PValueFn([](double) { return 1.0; }, Shape::unknown, eff), cfg.alpha);
  }
  // 0 = missed, 1 = covered; 2 marks a possibly-empty Monte Carlo set.
  std::vector<std::uint8_t> hit(cfg.R, 0);
  std::vector<double> length(cfg.R, 0.0);
  detail::for_each_replication(cfg, [&](std::size_t r, const detail::Replication& rep) {
    ConfidenceResult ci;
    try {
      if (cfg.model == Model::one_sample) {
        ci = confidence_interval(OneSampleData{rep.values}, rep.draws, opt);
      } else {
        ci = confidence_interval(TwoSampleData{rep.values, cfg.m}, rep.draws, opt);
      }
    } catch (const PreconditionError&) {
      hit[r] = 2;
      return;
    }
    hit[r] = ci.lower <= cfg.theta_true && cfg.theta_true <= ci.upper;
    length[r] = ci.upper - ci.lower;
  });
  CoverageReport report;
  report.R = cfg.R;
  double total_length = 0.0;
  std::size_t finite = 0;
  for (std::size_t r = 0; r < cfg.R; ++r) {
    if (hit[r] == 2) {
      ++report.empty;
      continue;
    }
    report.covered += hit[r];
    if (std::isfinite(length[r])) {
      total_length += length[r];
      ++finite;
    } else {
      ++report.unbounded;
    }
  }
  report.empirical_coverage = static_cast<double>(report.covered) / static_cast<double>(cfg.R);
  report.binomial_se = std::sqrt(cfg.alpha * (1.0 - cfg.alpha) / static_cast<double>(cfg.R));
  report.mean_length = finite > 0 ? total_length / static_cast<double>(finite) : std::numeric_limits<double>::infinity();
  return report;
}

// Empirical CDF of the upper-tail P-value at the true shift.
inline SubuniformityReport run_subuniformity(const CoverageConfig& cfg, PEstimator estimator = {}) {
  cfg.validate();
  if (!estimator) {
    estimator = [](double t_obs, std::span<const double> t_reps) { return p_plus_one(t_obs, t_reps, Tail::upper); };
  }
  std::vector<double> p(cfg.R, 1.0);
  detail::for_each_replication(cfg, [&](std::size_t r, const detail::Replication& rep) {
    const auto& d = *rep.draws;
    const double eta = cfg.theta_true;
    auto stat = [&](const ReplicateSummary& s) {
      return d.model == Model::one_sample ? one_sample_stat(s, eta) : two_sample_stat(s, eta);
    };
    std::vector<double> t_reps(d.size());
    for (std::size_t j = 0; j < d.size(); ++j) t_reps[j] = stat(d.replicates[j]);
    const double t_obs = d.model == Model::one_sample ? one_sample_stat(d.observed, eta) : d.observed.t0;
    p[r] = estimator(t_obs, t_reps);
  });
  SubuniformityReport report;
  report.R = cfg.R;
  const double R = static_cast<double>(cfg.R);
  for (double threshold : kSubuniformityThresholds) {
    std::size_t below = 0;
    for (double v : p) below += v <= threshold;
    SubuniformityRow row;
    row.threshold = threshold;
    row.ecdf = static_cast<double>(below) / R;
    row.bound = threshold + 4.0 * std::sqrt(threshold * (1.0 - threshold) / R);
    row.pass = row.ecdf <= row.bound;
    report.rows.push_back(row);
  }
  return report;
}

}  // namespace mcinv
