#pragma once

// Conservative Monte Carlo P-values over a fixed set of replicate statistics.
// Every comparison is weak (>= for the upper tail, <= for the lower tail), so
// ties count against rejection.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <span>
#include <string>
#include <utility>

#include "mcinv/errors.hpp"

namespace mcinv {

enum class Tail { upper, lower, two_sided_bonferroni, two_sided_abs };

enum class Shape { nondecreasing, nonincreasing, quasiconcave, unknown };

enum class WeightedVariant { fixed_denominator, self_normalized };

inline const char* to_string(Tail t) {
  switch (t) {
    case Tail::upper: return "upper";
    case Tail::lower: return "lower";
    case Tail::two_sided_bonferroni: return "two_sided_bonferroni";
    case Tail::two_sided_abs: return "two_sided_abs";
  }
  return "?";
}

inline const char* to_string(Shape s) {
  switch (s) {
    case Shape::nondecreasing: return "nondecreasing";
    case Shape::nonincreasing: return "nonincreasing";
    case Shape::quasiconcave: return "quasiconcave";
    case Shape::unknown: return "unknown";
  }
  return "?";
}

// A deterministic map eta -> P for fixed data and frozen draws, tagged with
// the shape the inversion algorithms rely on. `floor` is the smallest value
// the function can take (0 when no positive floor is known).
class PValueFn {
 public:
  using Eval = std::function<double(double)>;

  PValueFn(Eval eval, Shape shape, double floor = 0.0)
      : eval_(std::move(eval)), shape_(shape), floor_(floor) {}

  double operator()(double eta) const { return eval_(eta); }
  Shape shape() const { return shape_; }
  double floor() const { return floor_; }

 private:
  Eval eval_;
  Shape shape_;
  double floor_;
};

namespace detail {

inline void require_one_sided(Tail tail, const char* op) {
  if (tail != Tail::upper && tail != Tail::lower) {
    throw ContractError(std::string(op) + ": tail must be upper or lower, got " + to_string(tail));
  }
}

inline bool tail_hit(double t_rep, double t_obs, Tail tail) {
  return tail == Tail::upper ? t_rep >= t_obs : t_rep <= t_obs;
}

inline std::size_t tail_count(double t_obs, std::span<const double> t_reps, Tail tail) {
  std::size_t count = 0;
  if (tail == Tail::upper) {
    for (double t : t_reps) count += t >= t_obs;
  } else {
    for (double t : t_reps) count += t <= t_obs;
  }
  return count;
}

inline void require_weight(double w, const char* what) {
  if (!std::isfinite(w) || w < 0.0) {
    throw DomainError(std::string(what) + " must be finite and nonnegative");
  }
}

}  // namespace detail

// (1 + #{tail hits}) / (1 + N)
inline double p_plus_one(double t_obs, std::span<const double> t_reps, Tail tail = Tail::upper) {
  detail::require_one_sided(tail, "p_plus_one");
  const auto hits = detail::tail_count(t_obs, t_reps, tail);
  return static_cast<double>(1 + hits) / static_cast<double>(1 + t_reps.size());
}

// Importance-weighted P-values. fixed_denominator divides by 1 + N and is
// clipped to [0, 1]; self_normalized divides by the total weight.
inline double p_weighted(double t_obs, std::span<const double> t_reps, double w_obs,
                         std::span<const double> w_reps, WeightedVariant variant,
                         Tail tail = Tail::upper) {
  detail::require_one_sided(tail, "p_weighted");
  if (t_reps.size() != w_reps.size()) throw DomainError("p_weighted: statistic and weight counts differ");
  detail::require_weight(w_obs, "observed weight");
  double numerator = w_obs;
  double total = w_obs;
  for (std::size_t j = 0; j < t_reps.size(); ++j) {
    detail::require_weight(w_reps[j], "replicate weight");
    total += w_reps[j];
    if (detail::tail_hit(t_reps[j], t_obs, tail)) numerator += w_reps[j];
  }
  if (variant == WeightedVariant::fixed_denominator) {
    return std::clamp(numerator / static_cast<double>(1 + t_reps.size()), 0.0, 1.0);
  }
  if (total == 0.0) throw DegenerateWeightsError("p_weighted: all weights are zero");
  return std::clamp(numerator / total, 0.0, 1.0);
}

// #{tail hits} / N for replicates g_j g^-1(X) over a fixed subset {g_j}.
// No +1 term: the subset must contain the identity so that the observed
// configuration is among the replicates.
inline double p_fixed_subset(double t_obs, std::span<const double> t_reps, Tail tail = Tail::upper) {
  detail::require_one_sided(tail, "p_fixed_subset");
  if (t_reps.empty()) throw DomainError("p_fixed_subset: need at least one subset element");
  return static_cast<double>(detail::tail_count(t_obs, t_reps, tail)) /
         static_cast<double>(t_reps.size());
}

// Probability-weighted randomization P-value over the observed assignment
// (j = 0, which always ties itself) and N sampled assignments.
inline double p_weighted_assignments(double t_obs, std::span<const double> t_reps,
                                     std::span<const double> probs, double prob_obs,
                                     Tail tail = Tail::upper) {
  detail::require_one_sided(tail, "p_weighted_assignments");
  if (t_reps.size() != probs.size()) {
    throw DomainError("p_weighted_assignments: statistic and probability counts differ");
  }
  if (!(prob_obs > 0.0) || !std::isfinite(prob_obs)) {
    throw DomainError("p_weighted_assignments: observed assignment probability must be positive");
  }
  double numerator = prob_obs;
  double total = prob_obs;
  for (std::size_t j = 0; j < t_reps.size(); ++j) {
    if (!(probs[j] > 0.0) || !std::isfinite(probs[j])) {
      throw DomainError("p_weighted_assignments: sampled assignment probabilities must be positive");
    }
    total += probs[j];
    if (detail::tail_hit(t_reps[j], t_obs, tail)) numerator += probs[j];
  }
  return std::min(1.0, numerator / total);
}

// Bonferroni combination of two one-sided P-values: min(1, 2 min(p_up, p_lo)).
inline PValueFn two_sided(PValueFn p_up, PValueFn p_lo) {
  const bool up_ok = p_up.shape() == Shape::nondecreasing || p_up.shape() == Shape::unknown;
  const bool lo_ok = p_lo.shape() == Shape::nonincreasing || p_lo.shape() == Shape::unknown;
  if (!up_ok || !lo_ok) {
    throw ContractError(std::string("two_sided: expected nondecreasing and nonincreasing inputs, got ") +
                        to_string(p_up.shape()) + " and " + to_string(p_lo.shape()));
  }
  const Shape shape = (p_up.shape() == Shape::unknown || p_lo.shape() == Shape::unknown)
                          ? Shape::unknown
                          : Shape::quasiconcave;
  const double floor = std::min(1.0, 2.0 * std::min(p_up.floor(), p_lo.floor()));
  return PValueFn(
      [up = std::move(p_up), lo = std::move(p_lo)](double eta) {
        return std::min(1.0, 2.0 * std::min(up(eta), lo(eta)));
      },
      shape, floor);
}

}  // namespace mcinv
