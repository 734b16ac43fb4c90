#pragma once

// Conservative bisection for confidence bounds from step-function P-values.
//
// The P-value as a function of the hypothesized shift is piecewise constant
// and discontinuous, so ordinary root finding does not apply. Each search
// keeps a rejected point (p < alpha) on one side and an accepted point
// (p >= alpha) on the other and returns the rejected one once the bracket is
// narrower than the tolerance.

#include <cmath>
#include <cstddef>
#include <limits>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "mcinv/errors.hpp"
#include "mcinv/pvalues.hpp"

namespace mcinv {

enum class Side { lower, upper, two_sided };
enum class Convention { bonferroni, abs };

inline const char* to_string(Side s) {
  switch (s) {
    case Side::lower: return "lower";
    case Side::upper: return "upper";
    case Side::two_sided: return "two-sided";
  }
  return "?";
}

inline const char* to_string(Convention c) { return c == Convention::bonferroni ? "bonferroni" : "abs"; }

struct SearchConfig {
  double alpha = 0.05;
  double tol = 1e-8;
  double delta0 = 1.0;
  double eta0 = 0.0;
  int max_doublings = 60;

  void validate() const {
    if (!(alpha > 0.0 && alpha < 1.0)) throw DomainError("alpha must lie in (0, 1)");
    if (!(tol > 0.0) || !std::isfinite(tol)) throw DomainError("tolerance must be positive");
    if (!(delta0 > 0.0) || !std::isfinite(delta0)) throw DomainError("initial step must be positive");
    if (!std::isfinite(eta0)) throw DomainError("initial trial value must be finite");
    if (max_doublings < 0) throw DomainError("max_doublings must be nonnegative");
  }
};

struct BoundSearch {
  double bound = 0.0;
  bool unbounded = false;
  // Every eta was rejected: the confidence set on this side is empty.
  bool empty = false;
  std::size_t evaluations = 0;
  std::size_t bisection_steps = 0;
  // Width of the bracket handed from step 1 to step 2.
  double bracket_width = 0.0;
};

struct ConfidenceResult {
  double lower = -std::numeric_limits<double>::infinity();
  double upper = std::numeric_limits<double>::infinity();
  bool lower_unbounded = true;
  bool upper_unbounded = true;
  // Whether the endpoint itself belongs to {eta : p(eta) >= alpha}; exact
  // scans set these, bisection endpoints are always rejected points.
  bool lower_closed = false;
  bool upper_closed = false;
  double alpha = 0.0;
  double tol = 0.0;
  std::size_t N = 0;
  std::string seed;
  Side side = Side::two_sided;
  Convention convention = Convention::bonferroni;
  double p_at_eta0 = std::numeric_limits<double>::quiet_NaN();
  std::size_t evaluations = 0;
  std::vector<std::string> diagnostics;
};

namespace detail {

inline void check_alpha_floor(const PValueFn& p, double alpha) {
  const double floor = p.floor();
  if (floor < 1.0 && alpha <= floor) {
    std::ostringstream msg;
    msg << "alpha=" << alpha << " is at or below the smallest attainable P-value " << floor
        << ", so no hypothesis can be rejected; with N Monte Carlo replicates the highest attainable"
        << " non-trivial confidence level is N/(N+1). Increase the number of replicates or alpha.";
    throw PreconditionError(msg.str());
  }
}

// direction = -1 searches for the lower bound (Algorithm 1), +1 for the upper
// bound (Algorithm 2). The rejected region lies on the `direction` side.
template <class P>
BoundSearch bisect_bound(const P& p, const SearchConfig& cfg, double p_eta0, int direction) {
  BoundSearch out;
  const double alpha = cfg.alpha;
  double accepted;
  double rejected;
  double delta = cfg.delta0;
  if (p_eta0 >= alpha) {
    accepted = cfg.eta0;
    double probe = cfg.eta0 + direction * delta;
    int doublings = 0;
    for (;;) {
      ++out.evaluations;
      if (p(probe) < alpha) break;
      if (doublings++ >= cfg.max_doublings || !std::isfinite(probe)) {
        out.unbounded = true;
        out.bound = direction * std::numeric_limits<double>::infinity();
        return out;
      }
      delta *= 2.0;
      probe += direction * delta;
    }
    rejected = probe;
  } else {
    rejected = cfg.eta0;
    double probe = cfg.eta0 - direction * delta;
    int doublings = 0;
    for (;;) {
      ++out.evaluations;
      if (p(probe) >= alpha) break;
      if (doublings++ >= cfg.max_doublings || !std::isfinite(probe)) {
        out.unbounded = true;
        out.empty = true;
        out.bound = -direction * std::numeric_limits<double>::infinity();
        return out;
      }
      delta *= 2.0;
      probe -= direction * delta;
    }
    accepted = probe;
  }

  out.bracket_width = std::abs(accepted - rejected);
  while (std::abs(accepted - rejected) > cfg.tol) {
    const double mid = 0.5 * (accepted + rejected);
    if (mid == accepted || mid == rejected) break;
    ++out.evaluations;
    ++out.bisection_steps;
    if (p(mid) < alpha) {
      rejected = mid;
    } else {
      accepted = mid;
    }
  }
  out.bound = rejected;
  return out;
}

}  // namespace detail

// Lower confidence bound from a nondecreasing P-value (Algorithm 1). Returns
// a rejected point within tol below the largest valid lower bound, or -inf
// when the downward search never rejects within max_doublings.
inline BoundSearch lower_bound(const PValueFn& p, const SearchConfig& cfg) {
  cfg.validate();
  if (p.shape() != Shape::nondecreasing && p.shape() != Shape::unknown) {
    throw ContractError(std::string("lower_bound needs a nondecreasing P-value, got ") + to_string(p.shape()));
  }
  detail::check_alpha_floor(p, cfg.alpha);
  const double p0 = p(cfg.eta0);
  auto out = detail::bisect_bound(p, cfg, p0, -1);
  ++out.evaluations;
  return out;
}

// Upper confidence bound from a nonincreasing P-value (Algorithm 2).
inline BoundSearch upper_bound(const PValueFn& p, const SearchConfig& cfg) {
  cfg.validate();
  if (p.shape() != Shape::nonincreasing && p.shape() != Shape::unknown) {
    throw ContractError(std::string("upper_bound needs a nonincreasing P-value, got ") + to_string(p.shape()));
  }
  detail::check_alpha_floor(p, cfg.alpha);
  const double p0 = p(cfg.eta0);
  auto out = detail::bisect_bound(p, cfg, p0, +1);
  ++out.evaluations;
  return out;
}

// Two-sided interval from a quasiconcave P-value (Algorithm 3): both
// one-sided searches start from eta0, which must not be rejected.
inline ConfidenceResult two_sided_interval(const PValueFn& p, const SearchConfig& cfg) {
  cfg.validate();
  if (p.shape() != Shape::quasiconcave && p.shape() != Shape::unknown) {
    throw ContractError(std::string("two_sided_interval needs a quasiconcave P-value, got ") +
                        to_string(p.shape()));
  }
  detail::check_alpha_floor(p, cfg.alpha);
  ConfidenceResult result;
  result.alpha = cfg.alpha;
  result.tol = cfg.tol;
  result.side = Side::two_sided;
  result.p_at_eta0 = p(cfg.eta0);
  if (result.p_at_eta0 < cfg.alpha) {
    std::ostringstream msg;
    msg << "P-value at the initial value eta0=" << cfg.eta0 << " is " << result.p_at_eta0 << " < alpha=" << cfg.alpha
        << "; choose an eta0 inside the confidence set (the Monte Carlo confidence set may be empty)";
    throw PreconditionError(msg.str());
  }
  if (p.shape() == Shape::unknown) result.diagnostics.push_back("shape_unverified");
  const auto lo = detail::bisect_bound(p, cfg, result.p_at_eta0, -1);
  const auto hi = detail::bisect_bound(p, cfg, result.p_at_eta0, +1);
  result.lower = lo.bound;
  result.upper = hi.bound;
  result.lower_unbounded = lo.unbounded;
  result.upper_unbounded = hi.unbounded;
  if (lo.unbounded) result.diagnostics.push_back("lower_unbounded");
  if (hi.unbounded) result.diagnostics.push_back("upper_unbounded");
  result.evaluations = 1 + lo.evaluations + hi.evaluations;
  return result;
}

inline ConfidenceResult two_sided_interval(const PValueFn& p_up, const PValueFn& p_lo, const SearchConfig& cfg) {
  return two_sided_interval(two_sided(p_up, p_lo), cfg);
}

}  // namespace mcinv
