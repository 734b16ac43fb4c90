#pragma once

// Data + frozen draws + options -> confidence bound or interval.

#include <cmath>
#include <cstddef>
#include <memory>
#include <optional>
#include <string>
#include <span>

#include "mcinv/errors.hpp"
#include "mcinv/invert.hpp"
#include "mcinv/pvalues.hpp"
#include "mcinv/rng.hpp"
#include "mcinv/shift_models.hpp"

namespace mcinv {

struct IntervalOptions {
  double alpha = 0.05;
  double tol = 1e-8;
  Side side = Side::two_sided;
  Convention convention = Convention::bonferroni;
  Estimator estimator = Estimator::plus_one;
  Statistic statistic = Statistic::mean;
  std::optional<double> eta0;
  std::optional<double> delta0;
  int max_doublings = 60;
};

// Tail whose P-value `side` inverts: a lower bound rejects small shifts with
// the upper-tail P (nondecreasing), an upper bound uses the lower tail.
inline Tail tail_for(Side side, Convention convention) {
  switch (side) {
    case Side::lower: return Tail::upper;
    case Side::upper: return Tail::lower;
    case Side::two_sided: break;
  }
  return convention == Convention::bonferroni ? Tail::two_sided_bonferroni : Tail::two_sided_abs;
}

template <class G>
FrozenDraws freeze(const OneSampleData& data, std::size_t replicates, const G& gen, FreezeOptions options = {}) {
  return one_sample_freeze(data, replicates, gen, options);
}

template <class G>
FrozenDraws freeze(const TwoSampleData& data, std::size_t replicates, const G& gen, FreezeOptions options = {}) {
  return two_sample_freeze(data, replicates, gen, options);
}

// Freeze with the chosen generator family.
template <class Data>
FrozenDraws freeze(const Data& data, std::size_t replicates, const Bytes& seed, GeneratorKind kind,
                   FreezeOptions options = {}) {
  if (kind == GeneratorKind::mt19937) return freeze(data, replicates, FastGenerator(seed), options);
  return freeze(data, replicates, SeededGenerator(seed), options);
}

namespace detail {

inline PValueFn build_pvalue(const OneSampleData& data, std::shared_ptr<const FrozenDraws> draws, Tail tail,
                             const IntervalOptions& opt) {
  if (opt.statistic != Statistic::mean) throw DomainError("the one-sample model supports the mean statistic only");
  return make_pvalue_fn(data, std::move(draws), tail, opt.estimator);
}

inline PValueFn build_pvalue(const TwoSampleData& data, std::shared_ptr<const FrozenDraws> draws, Tail tail,
                             const IntervalOptions& opt) {
  return make_pvalue_fn(data, std::move(draws), tail, opt.estimator, opt.statistic);
}

inline std::span<const double> values_of(const OneSampleData& d) { return d.x; }
inline std::span<const double> values_of(const TwoSampleData& d) { return d.w; }

}  // namespace detail

template <class Data>
SearchConfig search_config(const Data& data, const IntervalOptions& opt) {
  SearchConfig cfg;
  cfg.alpha = opt.alpha;
  cfg.tol = opt.tol;
  cfg.max_doublings = opt.max_doublings;
  cfg.eta0 = opt.eta0.value_or(default_eta0(data));
  cfg.delta0 = opt.delta0.value_or(default_delta0(detail::values_of(data)));
  return cfg;
}

// P-value for testing shift eta with the tail `side` would invert.
template <class Data>
PValueFn pvalue_function(const Data& data, std::shared_ptr<const FrozenDraws> draws, Side side,
                         const IntervalOptions& opt) {
  return detail::build_pvalue(data, std::move(draws), tail_for(side, opt.convention), opt);
}

template <class Data>
ConfidenceResult confidence_interval(const Data& data, std::shared_ptr<const FrozenDraws> draws,
                                     const IntervalOptions& opt) {
  data.validate();
  const auto cfg = search_config(data, opt);
  const auto p = pvalue_function(data, draws, opt.side, opt);
  ConfidenceResult result;
  if (opt.side == Side::two_sided) {
    result = two_sided_interval(p, cfg);
  } else {
    const auto bound = opt.side == Side::lower ? lower_bound(p, cfg) : upper_bound(p, cfg);
    result.alpha = cfg.alpha;
    result.tol = cfg.tol;
    result.side = opt.side;
    result.evaluations = bound.evaluations;
    result.p_at_eta0 = p(cfg.eta0);
    if (p.shape() == Shape::unknown) result.diagnostics.push_back("shape_unverified");
    if (opt.side == Side::lower) {
      result.lower = bound.bound;
      result.lower_unbounded = bound.unbounded && !bound.empty;
      result.upper_unbounded = true;
      if (bound.unbounded) result.diagnostics.push_back(bound.empty ? "empty" : "lower_unbounded");
    } else {
      result.upper = bound.bound;
      result.upper_unbounded = bound.unbounded && !bound.empty;
      result.lower_unbounded = true;
      if (bound.unbounded) result.diagnostics.push_back(bound.empty ? "empty" : "upper_unbounded");
    }
  }
  result.convention = opt.convention;
  result.N = draws->size();
  result.seed.assign(draws->seed.begin(), draws->seed.end());
  return result;
}

}  // namespace mcinv
