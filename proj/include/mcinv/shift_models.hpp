#pragma once

// One-sample symmetric-shift and two-sample constant-shift models.
//
// Each Monte Carlo replicate is reduced to a ReplicateSummary (t0, adj) from
// which its statistic at any hypothesized shift eta follows in O(1):
//   one-sample (sign flips):   T_eta = t0 - eta * adj,  adj = sum of signs
//   two-sample (assignments):  T_eta = t0 + eta * adj,  adj = swaps * (1/m + 1/(n-m))
// The observed statistic is  sum(x) - n * eta  (one-sample) and the constant
// observed difference in means (two-sample).

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <memory>
#include <numeric>
#include <optional>
#include <span>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include "mcinv/errors.hpp"
#include "mcinv/pvalues.hpp"
#include "mcinv/rng.hpp"

namespace mcinv {

struct OneSampleData {
  std::vector<double> x;

  std::size_t n() const { return x.size(); }

  void validate() const {
    if (x.empty()) throw DomainError("one-sample data must contain at least one value");
    for (double v : x) {
      if (!std::isfinite(v)) throw DomainError("one-sample data must be finite");
    }
  }
};

// Responses in canonical order: the first m units are the treated ones.
struct TwoSampleData {
  std::vector<double> w;
  std::size_t m = 0;

  std::size_t n() const { return w.size(); }

  void validate() const {
    if (m == 0 || m >= w.size()) {
      throw DomainError("two-sample data needs 0 < m < n (got n=" + std::to_string(w.size()) +
                        ", m=" + std::to_string(m) + ")");
    }
    for (double v : w) {
      if (!std::isfinite(v)) throw DomainError("two-sample data must be finite");
    }
  }
};

struct ReplicateSummary {
  double t0 = 0.0;
  double adj = 0.0;

  friend bool operator==(const ReplicateSummary&, const ReplicateSummary&) = default;
};

enum class Model { one_sample, two_sample };
enum class Scheme { simulation, permutation_sample, permutation_fixed_subset, randomization_sample };
enum class Statistic { mean, studentized };
enum class Estimator {
  plus_one,
  weighted_fixed_denominator,
  weighted_self_normalized,
  fixed_subset,
  weighted_assignments,
};

inline const char* to_string(Model m) { return m == Model::one_sample ? "one-sample" : "two-sample"; }

inline const char* to_string(Scheme s) {
  switch (s) {
    case Scheme::simulation: return "simulation";
    case Scheme::permutation_sample: return "permutation_sample";
    case Scheme::permutation_fixed_subset: return "permutation_fixed_subset";
    case Scheme::randomization_sample: return "randomization_sample";
  }
  return "?";
}

inline const char* to_string(Statistic s) { return s == Statistic::mean ? "mean" : "studentized"; }

// The single realization of Monte Carlo randomness reused for every eta.
struct FrozenDraws {
  Model model = Model::one_sample;
  Scheme scheme = Scheme::permutation_sample;
  std::size_t n = 0;
  std::size_t m = 0;
  ReplicateSummary observed;
  std::vector<ReplicateSummary> replicates;
  Bytes seed;
  // Importance weights or assignment probabilities, one per replicate.
  std::optional<std::vector<double>> weights;
  double weight_obs = 1.0;
  // Row-major N x n treatment labels; only kept for the Studentized statistic.
  std::vector<std::uint8_t> assignments;

  std::size_t size() const { return replicates.size(); }
};

// ---------------------------------------------------------------------------
// Statistics

inline ReplicateSummary one_sample_summary(std::span<const double> x, std::span<const std::int8_t> signs) {
  double t0 = 0.0;
  int s = 0;
  for (std::size_t j = 0; j < x.size(); ++j) {
    t0 += signs[j] > 0 ? x[j] : -x[j];
    s += signs[j];
  }
  return {t0, static_cast<double>(s)};
}

inline ReplicateSummary one_sample_observed(std::span<const double> x) {
  double t0 = 0.0;
  for (double v : x) t0 += v;
  return {t0, static_cast<double>(x.size())};
}

inline double one_sample_stat(const ReplicateSummary& s, double eta) { return s.t0 - eta * s.adj; }

inline double two_sample_adj(std::size_t swaps, std::size_t n, std::size_t m) {
  return static_cast<double>(swaps) * (1.0 / static_cast<double>(m) + 1.0 / static_cast<double>(n - m));
}

// Difference in means under `labels` plus the swap count of originally
// treated units (indices < m) moved to control. Sums run in index order so
// the original assignment reproduces the observed statistic bit for bit.
inline ReplicateSummary two_sample_summary(std::span<const double> w, std::size_t m,
                                           std::span<const std::uint8_t> labels) {
  const std::size_t n = w.size();
  double treated = 0.0;
  double control = 0.0;
  std::size_t kept = 0;
  for (std::size_t j = 0; j < n; ++j) {
    if (labels[j]) {
      treated += w[j];
      kept += j < m;
    } else {
      control += w[j];
    }
  }
  const double t0 = treated / static_cast<double>(m) - control / static_cast<double>(n - m);
  return {t0, two_sample_adj(m - kept, n, m)};
}

inline std::vector<std::uint8_t> original_assignment(std::size_t n, std::size_t m) {
  std::vector<std::uint8_t> labels(n, 0);
  std::fill_n(labels.begin(), m, std::uint8_t{1});
  return labels;
}

inline ReplicateSummary two_sample_observed(const TwoSampleData& data) {
  const auto labels = original_assignment(data.n(), data.m);
  return two_sample_summary(data.w, data.m, labels);
}

inline double two_sample_stat(const ReplicateSummary& s, double eta) { return s.t0 + eta * s.adj; }

// Welch t statistic of the null-adjusted responses w - eta * [j < m] under
// `labels`. Zero standard error maps to 0 (no difference) or +/-inf.
inline double studentized_stat(std::span<const double> w, std::size_t m, std::span<const std::uint8_t> labels,
                               double eta) {
  const std::size_t n = w.size();
  double s1 = 0.0, s0 = 0.0;
  for (std::size_t j = 0; j < n; ++j) {
    const double r = w[j] - (j < m ? eta : 0.0);
    (labels[j] ? s1 : s0) += r;
  }
  const double n1 = static_cast<double>(m);
  const double n0 = static_cast<double>(n - m);
  const double mean1 = s1 / n1;
  const double mean0 = s0 / n0;
  double q1 = 0.0, q0 = 0.0;
  for (std::size_t j = 0; j < n; ++j) {
    const double r = w[j] - (j < m ? eta : 0.0);
    if (labels[j]) {
      q1 += (r - mean1) * (r - mean1);
    } else {
      q0 += (r - mean0) * (r - mean0);
    }
  }
  const double diff = mean1 - mean0;
  const double se = std::sqrt(q1 / (n1 - 1.0) / n1 + q0 / (n0 - 1.0) / n0);
  if (se == 0.0) {
    if (diff == 0.0) return 0.0;
    return diff > 0.0 ? HUGE_VAL : -HUGE_VAL;
  }
  return diff / se;
}

// ---------------------------------------------------------------------------
// Shift families

struct ShiftFamily {
  std::function<double(double, double)> forward;
  std::function<double(double, double)> inverse;
};

inline ShiftFamily location_family() {
  return {[](double x, double eta) { return x + eta; }, [](double x, double eta) { return x - eta; }};
}

enum class ShiftDirection { forward, inverse };

inline std::vector<double> shift_transform(const ShiftFamily& family, std::span<const double> data, double eta,
                                           ShiftDirection direction = ShiftDirection::forward) {
  const auto& f = direction == ShiftDirection::forward ? family.forward : family.inverse;
  std::vector<double> out(data.size());
  std::transform(data.begin(), data.end(), out.begin(), [&](double x) { return f(x, eta); });
  return out;
}

// ---------------------------------------------------------------------------
// Freezing

namespace detail {

template <class Fn>
void parallel_ranges(std::size_t count, unsigned threads, Fn&& fn) {
  threads = std::max(1u, threads);
  if (threads == 1 || count < 2 * static_cast<std::size_t>(threads)) {
    fn(std::size_t{0}, count);
    return;
  }
  std::vector<std::thread> pool;
  const std::size_t chunk = (count + threads - 1) / threads;
  for (std::size_t begin = 0; begin < count; begin += chunk) {
    pool.emplace_back([&fn, begin, end = std::min(count, begin + chunk)] { fn(begin, end); });
  }
  for (auto& t : pool) t.join();
}

}  // namespace detail

struct FreezeOptions {
  unsigned threads = 1;
  // Keep each replicate's assignment (needed by the Studentized statistic).
  bool keep_assignments = false;
};

template <StreamGenerator G>
FrozenDraws one_sample_freeze(const OneSampleData& data, std::size_t replicates, const G& gen,
                              FreezeOptions options = {}) {
  data.validate();
  FrozenDraws draws;
  draws.model = Model::one_sample;
  draws.scheme = Scheme::permutation_sample;
  draws.n = data.n();
  draws.observed = one_sample_observed(data.x);
  draws.seed = gen.seed();
  draws.replicates.resize(replicates);
  detail::parallel_ranges(replicates, options.threads, [&](std::size_t begin, std::size_t end) {
    std::vector<std::int8_t> signs(data.n());
    Bytes scratch;
    for (std::size_t j = begin; j < end; ++j) {
      auto stream = gen.derive(j);
      random_signs_into(stream, std::span<std::int8_t>(signs), scratch);
      draws.replicates[j] = one_sample_summary(data.x, signs);
    }
  });
  return draws;
}

template <StreamGenerator G>
FrozenDraws two_sample_freeze(const TwoSampleData& data, std::size_t replicates, const G& gen,
                              FreezeOptions options = {}) {
  data.validate();
  const std::size_t n = data.n();
  FrozenDraws draws;
  draws.model = Model::two_sample;
  draws.scheme = Scheme::randomization_sample;
  draws.n = n;
  draws.m = data.m;
  draws.observed = two_sample_observed(data);
  draws.seed = gen.seed();
  draws.replicates.resize(replicates);
  if (options.keep_assignments) draws.assignments.resize(replicates * n);
  detail::parallel_ranges(replicates, options.threads, [&](std::size_t begin, std::size_t end) {
    std::vector<std::uint32_t> index;
    std::vector<std::uint8_t> labels(n);
    for (std::size_t j = begin; j < end; ++j) {
      auto stream = gen.derive(j);
      random_assignment_into(stream, n, data.m, index, std::span<std::uint8_t>(labels));
      draws.replicates[j] = two_sample_summary(data.w, data.m, labels);
      if (options.keep_assignments) {
        std::copy(labels.begin(), labels.end(), draws.assignments.begin() + static_cast<std::ptrdiff_t>(j * n));
      }
    }
  });
  return draws;
}

// Fixed-subset sign-flip scheme: one g-hat drawn uniformly from `subset`,
// replicates g_j g-hat^-1 (X). The subset must contain the identity.
template <ByteSource G>
FrozenDraws one_sample_freeze_fixed_subset(const OneSampleData& data, std::span<const SignVector> subset,
                                           G& gen) {
  data.validate();
  if (subset.empty()) throw DomainError("fixed subset must not be empty");
  bool has_identity = false;
  for (const auto& g : subset) {
    if (g.size() != data.n()) throw DomainError("fixed subset sign vectors must have length n");
    has_identity = has_identity || std::all_of(g.signs.begin(), g.signs.end(), [](auto s) { return s > 0; });
  }
  if (!has_identity) throw DomainError("fixed subset must contain the identity sign vector");
  const auto& g_hat = subset[uniform_below(gen, subset.size())];
  FrozenDraws draws;
  draws.model = Model::one_sample;
  draws.scheme = Scheme::permutation_fixed_subset;
  draws.n = data.n();
  draws.observed = one_sample_observed(data.x);
  draws.replicates.reserve(subset.size());
  std::vector<std::int8_t> tau(data.n());
  for (const auto& g : subset) {
    for (std::size_t i = 0; i < tau.size(); ++i) {
      tau[i] = static_cast<std::int8_t>(g.signs[i] * g_hat.signs[i]);
    }
    draws.replicates.push_back(one_sample_summary(data.x, tau));
  }
  return draws;
}

// Attach importance weights (or assignment probabilities) to frozen draws.
inline FrozenDraws with_weights(FrozenDraws draws, std::vector<double> weights, double weight_obs) {
  if (weights.size() != draws.size()) throw DomainError("with_weights: need one weight per replicate");
  detail::require_weight(weight_obs, "observed weight");
  for (double w : weights) detail::require_weight(w, "replicate weight");
  draws.weights = std::move(weights);
  draws.weight_obs = weight_obs;
  return draws;
}

// ---------------------------------------------------------------------------
// P-value functions over frozen draws

namespace detail {

// Maps per-replicate hits to a P-value for one estimator.
class Aggregator {
 public:
  Aggregator(const FrozenDraws& draws, Estimator estimator) : estimator_(estimator), n_(draws.size()) {
    const bool weighted = estimator == Estimator::weighted_fixed_denominator ||
                          estimator == Estimator::weighted_self_normalized ||
                          estimator == Estimator::weighted_assignments;
    switch (estimator) {
      case Estimator::plus_one:
        if (draws.scheme == Scheme::permutation_fixed_subset) {
          throw ContractError("plus_one estimator is incompatible with the fixed-subset scheme");
        }
        break;
      case Estimator::fixed_subset:
        if (draws.scheme != Scheme::permutation_fixed_subset) {
          throw ContractError("fixed_subset estimator requires fixed-subset draws");
        }
        if (n_ == 0) throw DomainError("fixed_subset estimator needs at least one replicate");
        break;
      case Estimator::weighted_fixed_denominator:
      case Estimator::weighted_self_normalized:
        if (draws.scheme == Scheme::permutation_fixed_subset) {
          throw ContractError("weighted estimators are incompatible with the fixed-subset scheme");
        }
        if (!draws.weights) throw ContractError("weighted estimator requires weights on the frozen draws");
        break;
      case Estimator::weighted_assignments:
        if (draws.scheme != Scheme::randomization_sample) {
          throw ContractError("weighted_assignments estimator requires randomization draws");
        }
        break;
    }
    if (weighted) {
      if (draws.weights) {
        weights_ = *draws.weights;
        weight_obs_ = draws.weight_obs;
      } else {
        weights_.assign(n_, 1.0);
      }
      if (estimator == Estimator::weighted_assignments) {
        if (!(weight_obs_ > 0.0)) throw DomainError("observed assignment probability must be positive");
        for (double p : weights_) {
          if (!(p > 0.0)) throw DomainError("sampled assignment probabilities must be positive");
        }
      }
      total_ = weight_obs_;
      for (double w : weights_) total_ += w;
      if (estimator != Estimator::weighted_fixed_denominator && total_ == 0.0) {
        throw DegenerateWeightsError("all weights are zero");
      }
    }
  }

  template <class Hit>
  double operator()(Hit&& hit) const {
    switch (estimator_) {
      case Estimator::plus_one: {
        std::size_t count = 0;
        for (std::size_t j = 0; j < n_; ++j) count += hit(j);
        return static_cast<double>(1 + count) / static_cast<double>(1 + n_);
      }
      case Estimator::fixed_subset: {
        std::size_t count = 0;
        for (std::size_t j = 0; j < n_; ++j) count += hit(j);
        return static_cast<double>(count) / static_cast<double>(n_);
      }
      default: break;
    }
    double numerator = weight_obs_;
    for (std::size_t j = 0; j < n_; ++j) {
      if (hit(j)) numerator += weights_[j];
    }
    const double denominator =
        estimator_ == Estimator::weighted_fixed_denominator ? static_cast<double>(1 + n_) : total_;
    return std::clamp(numerator / denominator, 0.0, 1.0);
  }

  // Weight a hit of replicate j adds to the numerator.
  double weight(std::size_t j) const { return weights_.empty() ? 1.0 : weights_[j]; }

  // P-value from the summed weight of hits (a count for unweighted estimators).
  double from_mass(double mass) const {
    switch (estimator_) {
      case Estimator::plus_one: return (1.0 + mass) / static_cast<double>(1 + n_);
      case Estimator::fixed_subset: return mass / static_cast<double>(n_);
      case Estimator::weighted_fixed_denominator:
        return std::clamp((weight_obs_ + mass) / static_cast<double>(1 + n_), 0.0, 1.0);
      default: return std::clamp((weight_obs_ + mass) / total_, 0.0, 1.0);
    }
  }

  std::size_t size() const { return n_; }

  double floor() const {
    switch (estimator_) {
      case Estimator::plus_one: return 1.0 / static_cast<double>(1 + n_);
      case Estimator::fixed_subset: return 1.0 / static_cast<double>(n_);
      case Estimator::weighted_fixed_denominator:
        return std::min(1.0, weight_obs_ / static_cast<double>(1 + n_));
      default: return std::min(1.0, weight_obs_ / total_);
    }
  }

 private:
  Estimator estimator_;
  std::size_t n_;
  std::vector<double> weights_;
  double weight_obs_ = 1.0;
  double total_ = 0.0;
};

// Per-replicate statistic lines stat_j(eta) = t0_j + k_j * eta against the
// observed line T0 + K * eta. One-sided hits are evaluated in the rearranged
// form  eta * (k_j - K) >= T0 - t0_j,  which is exactly monotone in eta
// because slopes are nonnegative and rounding is monotone. The abs
// convention compares centred statistics |a_j + b_j * eta| >= |A + B * eta|
// (the two-sample statistic is centred by subtracting eta).
struct Line {
  double gap = 0.0;    // T0 - t0_j
  double slope = 0.0;  // k_j - K >= 0
  double a = 0.0;
  double b = 0.0;
};

inline Line observed_line(Model model, const ReplicateSummary& obs) {
  if (model == Model::one_sample) return {0.0, 0.0, obs.t0, -obs.adj};
  return {0.0, 0.0, obs.t0, -1.0};
}

inline Line replicate_line(Model model, const ReplicateSummary& obs, const ReplicateSummary& r) {
  if (model == Model::one_sample) return {obs.t0 - r.t0, obs.adj - r.adj, r.t0, -r.adj};
  return {obs.t0 - r.t0, r.adj, r.t0, r.adj - 1.0};
}

struct ReplicateLines {
  std::vector<double> gap;
  std::vector<double> slope;
  std::vector<double> a, b;
  double obs_a = 0.0, obs_b = 0.0;
};

inline ReplicateLines make_lines(const FrozenDraws& draws) {
  ReplicateLines lines;
  const std::size_t N = draws.size();
  lines.gap.resize(N);
  lines.slope.resize(N);
  lines.a.resize(N);
  lines.b.resize(N);
  const auto obs = observed_line(draws.model, draws.observed);
  lines.obs_a = obs.a;
  lines.obs_b = obs.b;
  for (std::size_t j = 0; j < N; ++j) {
    const auto line = replicate_line(draws.model, draws.observed, draws.replicates[j]);
    lines.gap[j] = line.gap;
    lines.slope[j] = line.slope;
    lines.a[j] = line.a;
    lines.b[j] = line.b;
  }
  return lines;
}

inline PValueFn one_sided_fn(std::shared_ptr<const ReplicateLines> lines, std::shared_ptr<const Aggregator> agg,
                             Tail tail) {
  const double floor = agg->floor();
  if (tail == Tail::upper) {
    return PValueFn(
        [lines, agg](double eta) {
          const double* gap = lines->gap.data();
          const double* slope = lines->slope.data();
          return (*agg)([=](std::size_t j) { return eta * slope[j] >= gap[j]; });
        },
        Shape::nondecreasing, floor);
  }
  return PValueFn(
      [lines, agg](double eta) {
        const double* gap = lines->gap.data();
        const double* slope = lines->slope.data();
        return (*agg)([=](std::size_t j) { return eta * slope[j] <= gap[j]; });
      },
      Shape::nonincreasing, floor);
}

inline PValueFn abs_fn(std::shared_ptr<const ReplicateLines> lines, std::shared_ptr<const Aggregator> agg) {
  const double floor = agg->floor();
  return PValueFn(
      [lines, agg](double eta) {
        const double obs = std::abs(lines->obs_a + lines->obs_b * eta);
        const double* a = lines->a.data();
        const double* b = lines->b.data();
        return (*agg)([=](std::size_t j) { return std::abs(a[j] + b[j] * eta) >= obs; });
      },
      Shape::unknown, floor);
}

inline void check_draws(const FrozenDraws& draws, Model model, std::size_t n) {
  if (draws.model != model) throw ContractError("frozen draws were built for a different model");
  if (draws.n != n) throw ContractError("frozen draws were built for data of a different size");
}

}  // namespace detail

inline PValueFn make_pvalue_fn(const OneSampleData& data, std::shared_ptr<const FrozenDraws> draws, Tail tail,
                               Estimator estimator = Estimator::plus_one) {
  detail::check_draws(*draws, Model::one_sample, data.n());
  auto agg = std::make_shared<const detail::Aggregator>(*draws, estimator);
  auto lines = std::make_shared<const detail::ReplicateLines>(detail::make_lines(*draws));
  switch (tail) {
    case Tail::upper:
    case Tail::lower: return detail::one_sided_fn(lines, agg, tail);
    case Tail::two_sided_bonferroni:
      return two_sided(detail::one_sided_fn(lines, agg, Tail::upper), detail::one_sided_fn(lines, agg, Tail::lower));
    case Tail::two_sided_abs: return detail::abs_fn(lines, agg);
  }
  throw ContractError("unknown tail");
}

inline PValueFn make_pvalue_fn(const TwoSampleData& data, std::shared_ptr<const FrozenDraws> draws, Tail tail,
                               Estimator estimator = Estimator::plus_one, Statistic statistic = Statistic::mean) {
  detail::check_draws(*draws, Model::two_sample, data.n());
  if (draws->m != data.m) throw ContractError("frozen draws were built for a different treated count");
  auto agg = std::make_shared<const detail::Aggregator>(*draws, estimator);
  if (statistic == Statistic::mean) {
    auto lines = std::make_shared<const detail::ReplicateLines>(detail::make_lines(*draws));
    switch (tail) {
      case Tail::upper:
      case Tail::lower: return detail::one_sided_fn(lines, agg, tail);
      case Tail::two_sided_bonferroni:
        return two_sided(detail::one_sided_fn(lines, agg, Tail::upper),
                         detail::one_sided_fn(lines, agg, Tail::lower));
      case Tail::two_sided_abs: return detail::abs_fn(lines, agg);
    }
    throw ContractError("unknown tail");
  }

  // Studentized: no shortcut, recompute every replicate at every eta.
  if (data.m < 2 || data.n() - data.m < 2) {
    throw DomainError("Studentized statistic needs at least two units per group");
  }
  if (draws->assignments.size() != draws->size() * data.n()) {
    throw ContractError("Studentized statistic needs frozen draws with stored assignments");
  }
  auto w = std::make_shared<const std::vector<double>>(data.w);
  const std::size_t n = data.n();
  const std::size_t m = data.m;
  auto make = [=](Tail one_tail) {
    return PValueFn(
        [=](double eta) {
          const auto original = original_assignment(n, m);
          const double obs = studentized_stat(*w, m, original, eta);
          const double obs_abs = std::abs(obs);
          const std::uint8_t* rows = draws->assignments.data();
          return (*agg)([&](std::size_t j) {
            const double t = studentized_stat(*w, m, std::span<const std::uint8_t>(rows + j * n, n), eta);
            switch (one_tail) {
              case Tail::upper: return t >= obs;
              case Tail::lower: return t <= obs;
              default: return std::abs(t) >= obs_abs;
            }
          });
        },
        Shape::unknown, agg->floor());
  };
  if (tail == Tail::two_sided_bonferroni) return two_sided(make(Tail::upper), make(Tail::lower));
  return make(tail);
}

// Generic simulation-test P-value for a location family. `simulated` holds
// data sets drawn from the null at eta = 0; testing theta = eta applies the
// statistic to f_eta^-1(observed) and calibrates with the +1 estimator
// against the frozen simulated statistics.
inline PValueFn make_simulation_pvalue_fn(std::vector<double> observed,
                                          const std::vector<std::vector<double>>& simulated,
                                          std::function<double(std::span<const double>)> statistic, Tail tail,
                                          ShiftFamily family = location_family()) {
  detail::require_one_sided(tail, "make_simulation_pvalue_fn");
  auto obs = std::make_shared<const std::vector<double>>(std::move(observed));
  auto t_reps = std::make_shared<std::vector<double>>();
  t_reps->reserve(simulated.size());
  for (const auto& y : simulated) t_reps->push_back(statistic(y));
  const double floor = 1.0 / static_cast<double>(1 + t_reps->size());
  return PValueFn(
      [=](double eta) {
        const double t_obs = statistic(shift_transform(family, *obs, eta, ShiftDirection::inverse));
        return p_plus_one(t_obs, *t_reps, tail);
      },
      Shape::unknown, floor);
}

// ---------------------------------------------------------------------------
// Search defaults: estimate of the shift and the data range.

inline double default_eta0(const OneSampleData& data) {
  return one_sample_observed(data.x).t0 / static_cast<double>(data.n());
}

inline double default_eta0(const TwoSampleData& data) { return two_sample_observed(data).t0; }

inline double default_delta0(std::span<const double> values) {
  if (values.empty()) return 1.0;
  const auto [lo, hi] = std::minmax_element(values.begin(), values.end());
  const double range = *hi - *lo;
  return range > 0.0 && std::isfinite(range) ? range : 1.0;
}

}  // namespace mcinv
