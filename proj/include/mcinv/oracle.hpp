#pragma once

// Exact computations at desk scale.
//
// Full-group P-values enumerate every sign vector (2^n) or every treatment
// assignment (C(n, m)). Exact intervals come from breakpoint analysis: each
// element's tail indicator, as a function of eta, is 1 on a union of at most
// two closed intervals, so the P-value is a step function whose superlevel
// set can be read off by sweeping the sorted interval endpoints. The same
// sweep over frozen Monte Carlo replicates gives the exact inversion that the
// bisection searches are checked against.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <numeric>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "mcinv/errors.hpp"
#include "mcinv/invert.hpp"
#include "mcinv/pvalues.hpp"
#include "mcinv/rng.hpp"
#include "mcinv/shift_models.hpp"

namespace mcinv {

inline constexpr std::uint64_t kMaxGroupSize = std::uint64_t{1} << 25;
inline constexpr std::size_t kMaxScanReplicates = std::size_t{1} << 20;

enum class GroupKind { sign_flips, assignments };

// All sign vectors or all m-of-n assignments, in lexicographic order, with a
// probability per element (uniform unless given).
class FullGroupIndex {
 public:
  static FullGroupIndex sign_flips(std::size_t n) {
    if (n == 0) throw DomainError("sign-flip group needs n >= 1");
    if (n > 25) throw TooLargeError("full sign-flip group 2^" + std::to_string(n) + " exceeds the 2^25 limit");
    return FullGroupIndex(GroupKind::sign_flips, n, 0, std::uint64_t{1} << n);
  }

  static FullGroupIndex assignments(std::size_t n, std::size_t m) {
    if (m == 0 || m >= n) throw DomainError("assignment group needs 0 < m < n");
    // C(n, m) built incrementally; stop as soon as the limit is passed.
    uint128 count = 1;
    const std::size_t k = std::min(m, n - m);
    for (std::size_t i = 1; i <= k; ++i) {
      count = count * (n - k + i) / i;
      if (count > kMaxGroupSize) {
        throw TooLargeError("full assignment group C(" + std::to_string(n) + "," + std::to_string(m) +
                            ") exceeds the 2^25 limit");
      }
    }
    return FullGroupIndex(GroupKind::assignments, n, m, static_cast<std::uint64_t>(count));
  }

  // Non-uniform element probabilities, in enumeration order.
  FullGroupIndex with_probabilities(std::vector<double> probs) const {
    if (probs.size() != size_) throw DomainError("need one probability per group element");
    double total = 0.0;
    for (double p : probs) {
      if (!(p >= 0.0) || !std::isfinite(p)) throw DomainError("group probabilities must be nonnegative");
      total += p;
    }
    if (std::abs(total - 1.0) > 0x1.0p-40) throw DomainError("group probabilities must sum to 1");
    FullGroupIndex out = *this;
    out.probs_ = std::move(probs);
    return out;
  }

  GroupKind kind() const { return kind_; }
  std::size_t n() const { return n_; }
  std::size_t m() const { return m_; }
  std::uint64_t size() const { return size_; }
  bool uniform() const { return probs_.empty(); }
  double probability(std::uint64_t index) const {
    return probs_.empty() ? 1.0 / static_cast<double>(size_) : probs_[index];
  }

  // f(index, span<const int8_t> signs); element 0 is all -1, the last all +1.
  template <class F>
  void for_each_signs(F&& f) const {
    if (kind_ != GroupKind::sign_flips) throw ContractError("group does not hold sign vectors");
    std::vector<std::int8_t> signs(n_);
    for (std::uint64_t idx = 0; idx < size_; ++idx) {
      for (std::size_t j = 0; j < n_; ++j) signs[j] = ((idx >> (n_ - 1 - j)) & 1u) ? 1 : -1;
      f(idx, std::span<const std::int8_t>(signs));
    }
  }

  // f(index, span<const uint8_t> labels); element 0 treats units 0..m-1.
  template <class F>
  void for_each_assignment(F&& f) const {
    if (kind_ != GroupKind::assignments) throw ContractError("group does not hold assignments");
    std::vector<std::size_t> chosen(m_);
    std::iota(chosen.begin(), chosen.end(), std::size_t{0});
    std::vector<std::uint8_t> labels(n_, 0);
    for (std::uint64_t idx = 0;; ++idx) {
      std::fill(labels.begin(), labels.end(), std::uint8_t{0});
      for (auto c : chosen) labels[c] = 1;
      f(idx, std::span<const std::uint8_t>(labels));
      std::size_t i = m_;
      while (i > 0 && chosen[i - 1] == n_ - m_ + i - 1) --i;
      if (i == 0) break;
      ++chosen[i - 1];
      for (std::size_t k = i; k < m_; ++k) chosen[k] = chosen[k - 1] + 1;
    }
  }

 private:
  FullGroupIndex(GroupKind kind, std::size_t n, std::size_t m, std::uint64_t size)
      : kind_(kind), n_(n), m_(m), size_(size) {}

  GroupKind kind_;
  std::size_t n_;
  std::size_t m_;
  std::uint64_t size_;
  std::vector<double> probs_;
};

// ---------------------------------------------------------------------------
// Full-group P-values by direct recomputation of the statistic.

namespace detail {

inline double brute_one_sample_stat(std::span<const double> x, std::span<const std::int8_t> signs, double eta) {
  double t = 0.0;
  for (std::size_t j = 0; j < x.size(); ++j) {
    const double d = x[j] - eta;
    t += signs[j] > 0 ? d : -d;
  }
  return t;
}

// Difference in means with the hypothesized effect added to control units
// moved to treatment and removed from treated units moved to control.
inline double brute_two_sample_stat(std::span<const double> w, std::size_t m, std::span<const std::uint8_t> labels,
                                    double eta) {
  const std::size_t n = w.size();
  double treated = 0.0, control = 0.0;
  for (std::size_t j = 0; j < n; ++j) {
    if (labels[j]) {
      treated += w[j] + (j >= m ? eta : 0.0);
    } else {
      control += w[j] - (j < m ? eta : 0.0);
    }
  }
  return treated / static_cast<double>(m) - control / static_cast<double>(n - m);
}

struct TailMasses {
  double upper = 0.0;
  double lower = 0.0;
  double abs = 0.0;
};

inline double combine_tails(const TailMasses& mass, Tail tail) {
  switch (tail) {
    case Tail::upper: return std::min(1.0, mass.upper);
    case Tail::lower: return std::min(1.0, mass.lower);
    case Tail::two_sided_bonferroni: return std::min(1.0, 2.0 * std::min(mass.upper, mass.lower));
    case Tail::two_sided_abs: return std::min(1.0, mass.abs);
  }
  return 1.0;
}

inline void accumulate_tails(TailMasses& acc, double prob, double t, double t_obs, double centre) {
  if (t >= t_obs) acc.upper += prob;
  if (t <= t_obs) acc.lower += prob;
  if (std::abs(t - centre) >= std::abs(t_obs - centre)) acc.abs += prob;
}

}  // namespace detail

inline double full_group_pvalue(const OneSampleData& data, double eta, Tail tail, const FullGroupIndex& index) {
  data.validate();
  if (index.kind() != GroupKind::sign_flips || index.n() != data.n()) {
    throw ContractError("full_group_pvalue: index does not match one-sample data");
  }
  const auto ones = std::vector<std::int8_t>(data.n(), 1);
  const double t_obs = detail::brute_one_sample_stat(data.x, ones, eta);
  detail::TailMasses mass;
  std::uint64_t up = 0, lo = 0, ab = 0;
  index.for_each_signs([&](std::uint64_t idx, std::span<const std::int8_t> signs) {
    const double t = detail::brute_one_sample_stat(data.x, signs, eta);
    if (index.uniform()) {
      up += t >= t_obs;
      lo += t <= t_obs;
      ab += std::abs(t) >= std::abs(t_obs);
    } else {
      detail::accumulate_tails(mass, index.probability(idx), t, t_obs, 0.0);
    }
  });
  if (index.uniform()) {
    const double g = static_cast<double>(index.size());
    mass = {static_cast<double>(up) / g, static_cast<double>(lo) / g, static_cast<double>(ab) / g};
  }
  return detail::combine_tails(mass, tail);
}

inline double full_group_pvalue(const TwoSampleData& data, double eta, Tail tail, const FullGroupIndex& index) {
  data.validate();
  if (index.kind() != GroupKind::assignments || index.n() != data.n() || index.m() != data.m) {
    throw ContractError("full_group_pvalue: index does not match two-sample data");
  }
  const auto original = original_assignment(data.n(), data.m);
  const double t_obs = detail::brute_two_sample_stat(data.w, data.m, original, eta);
  detail::TailMasses mass;
  std::uint64_t up = 0, lo = 0, ab = 0;
  index.for_each_assignment([&](std::uint64_t idx, std::span<const std::uint8_t> labels) {
    const double t = detail::brute_two_sample_stat(data.w, data.m, labels, eta);
    if (index.uniform()) {
      up += t >= t_obs;
      lo += t <= t_obs;
      ab += std::abs(t - eta) >= std::abs(t_obs - eta);
    } else {
      detail::accumulate_tails(mass, index.probability(idx), t, t_obs, eta);
    }
  });
  if (index.uniform()) {
    const double g = static_cast<double>(index.size());
    mass = {static_cast<double>(up) / g, static_cast<double>(lo) / g, static_cast<double>(ab) / g};
  }
  return detail::combine_tails(mass, tail);
}

// ---------------------------------------------------------------------------
// Breakpoints and step-function sweeps

struct Breakpoint {
  double eta = 0.0;
  std::size_t source = 0;
};

namespace detail {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

// Smallest double eta with fl(eta * slope) >= gap, for slope > 0.
inline double upper_threshold(double gap, double slope) {
  double q = gap / slope;
  if (q * slope >= gap) {
    for (double prev = std::nextafter(q, -kInf); prev * slope >= gap; prev = std::nextafter(q, -kInf)) q = prev;
  } else {
    do {
      q = std::nextafter(q, kInf);
    } while (!(q * slope >= gap));
  }
  return q;
}

// Largest double eta with fl(eta * slope) <= gap, for slope > 0.
inline double lower_threshold(double gap, double slope) {
  double q = gap / slope;
  if (q * slope <= gap) {
    for (double next = std::nextafter(q, kInf); next * slope <= gap; next = std::nextafter(q, kInf)) q = next;
  } else {
    do {
      q = std::nextafter(q, -kInf);
    } while (!(q * slope <= gap));
  }
  return q;
}

struct WeightedPoint {
  double eta;
  double weight;
  bool operator<(const WeightedPoint& o) const { return eta < o.eta; }
};

// Hit sets of all elements, as closed intervals [l, r] with infinite ends
// allowed: `always` covers everything, `open_left` holds mass active at -inf.
struct Sweep {
  double always = 0.0;
  double open_left = 0.0;
  std::vector<WeightedPoint> starts;
  std::vector<WeightedPoint> ends;

  void add(double l, double r, double w) {
    if (l > r) return;
    if (l == -kInf && r == kInf) {
      always += w;
      return;
    }
    if (l == -kInf) {
      open_left += w;
    } else {
      starts.push_back({l, w});
    }
    if (r != kInf) ends.push_back({r, w});
  }
};

enum class Mode { upper, lower, abs };

// Hit set of one element for the given tail mode.
inline void add_line(Sweep& sweep, const Line& line, const Line& obs, Mode mode, double w) {
  switch (mode) {
    case Mode::upper:
      if (line.slope > 0.0) {
        sweep.add(upper_threshold(line.gap, line.slope), kInf, w);
      } else if (0.0 >= line.gap) {
        sweep.add(-kInf, kInf, w);
      }
      return;
    case Mode::lower:
      if (line.slope > 0.0) {
        sweep.add(-kInf, lower_threshold(line.gap, line.slope), w);
      } else if (0.0 <= line.gap) {
        sweep.add(-kInf, kInf, w);
      }
      return;
    case Mode::abs: break;
  }
  // |a + b eta| >= |A + B eta|  <=>  (cu + du eta)(cv + dv eta) >= 0
  const double cu = line.a - obs.a, du = line.b - obs.b;
  const double cv = line.a + obs.a, dv = line.b + obs.b;
  if (du == 0.0 && dv == 0.0) {
    if (cu * cv >= 0.0) sweep.add(-kInf, kInf, w);
    return;
  }
  if (du == 0.0 || dv == 0.0) {
    const double c = du == 0.0 ? cu : cv;         // constant factor
    const double c0 = du == 0.0 ? cv : cu;        // linear factor intercept
    const double c1 = du == 0.0 ? dv : du;        // linear factor slope
    if (c == 0.0) {
      sweep.add(-kInf, kInf, w);
    } else if ((c > 0.0) == (c1 > 0.0)) {
      sweep.add(-c0 / c1, kInf, w);
    } else {
      sweep.add(-kInf, -c0 / c1, w);
    }
    return;
  }
  const double r1 = -cu / du, r2 = -cv / dv;
  const double lo = std::min(r1, r2), hi = std::max(r1, r2);
  if ((du > 0.0) == (dv > 0.0)) {
    sweep.add(-kInf, lo, w);
    sweep.add(hi, kInf, w);
  } else {
    sweep.add(lo, hi, w);
  }
}

// inf / sup of {eta : P(eta) >= alpha} for the step function described by
// the sweep, with whether each endpoint belongs to the set.
struct Hull {
  bool empty = true;
  bool interval = true;
  double lower = kInf;
  double upper = -kInf;
  bool lower_closed = false;
  bool upper_closed = false;
};

template <class PofMass, class Accept>
Hull scan_hull(Sweep& sweep, PofMass&& p_of_mass, Accept&& accept) {
  std::sort(sweep.starts.begin(), sweep.starts.end());
  std::sort(sweep.ends.begin(), sweep.ends.end());
  const auto& S = sweep.starts;
  const auto& E = sweep.ends;
  std::size_t si = 0, ei = 0;
  auto next_point = [&] {
    return std::min(si < S.size() ? S[si].eta : kInf, ei < E.size() ? E[ei].eta : kInf);
  };

  Hull hull;
  bool pending_gap = false;
  // Pieces alternate: open gap, single point, open gap, ...
  auto visit = [&](bool ok, double lo, bool lo_closed, double hi, bool hi_closed) {
    if (!ok) {
      if (!hull.empty) pending_gap = true;
      return;
    }
    if (hull.empty) {
      hull.empty = false;
      hull.lower = lo;
      hull.lower_closed = lo_closed;
    } else if (pending_gap) {
      hull.interval = false;
    }
    pending_gap = false;
    hull.upper = hi;
    hull.upper_closed = hi_closed;
  };

  double active = sweep.always + sweep.open_left;
  double left = -kInf;
  for (;;) {
    const double x = next_point();
    visit(accept(p_of_mass(active)), left, false, x, false);
    if (x == kInf) break;
    double s = 0.0, e = 0.0;
    while (si < S.size() && S[si].eta == x) s += S[si++].weight;
    while (ei < E.size() && E[ei].eta == x) e += E[ei++].weight;
    visit(accept(p_of_mass(active + s)), x, true, x, true);
    active = active + s - e;
    left = x;
  }
  return hull;
}

inline void fill_from_hull(ConfidenceResult& result, const Hull& lower_part, const Hull& upper_part) {
  result.lower = lower_part.lower;
  result.lower_closed = lower_part.lower_closed;
  result.upper = upper_part.upper;
  result.upper_closed = upper_part.upper_closed;
  result.lower_unbounded = result.lower == -kInf;
  result.upper_unbounded = result.upper == kInf;
  if (result.lower_unbounded) result.diagnostics.push_back("lower_unbounded");
  if (result.upper_unbounded) result.diagnostics.push_back("upper_unbounded");
  const bool empty = lower_part.empty || upper_part.empty || result.lower > result.upper ||
                     (result.lower == result.upper && !(result.lower_closed && result.upper_closed));
  if (empty) result.diagnostics.push_back("empty");
  if (!lower_part.interval || !upper_part.interval) result.diagnostics.push_back("not_interval");
}

// Builds one sweep per needed tail mode from elements supplied by `visit`,
// then assembles the interval for the requested side and convention.
// `visit(mode, add)` must call add(line, weight) for every element.
template <class Visit, class PofMass>
ConfidenceResult exact_interval(const Line& obs, Visit&& visit, PofMass&& p_of_mass, double alpha, Side side,
                                Convention convention) {
  if (!(alpha > 0.0 && alpha < 1.0)) throw DomainError("alpha must lie in (0, 1)");
  ConfidenceResult result;
  result.alpha = alpha;
  result.side = side;
  result.convention = convention;
  auto hull_for = [&](Mode mode, double level) {
    Sweep sweep;
    visit([&](const Line& line, double w) { add_line(sweep, line, obs, mode, w); });
    return scan_hull(sweep, p_of_mass, [level](double p) { return p >= level; });
  };
  switch (side) {
    case Side::lower: {
      const auto up = hull_for(Mode::upper, alpha);
      Hull all;
      all.empty = false;
      fill_from_hull(result, up, all);
      result.upper = kInf;
      result.upper_unbounded = true;
      std::erase(result.diagnostics, std::string("upper_unbounded"));
      break;
    }
    case Side::upper: {
      const auto lo = hull_for(Mode::lower, alpha);
      Hull all;
      all.empty = false;
      fill_from_hull(result, all, lo);
      result.lower = -kInf;
      result.lower_unbounded = true;
      std::erase(result.diagnostics, std::string("lower_unbounded"));
      break;
    }
    case Side::two_sided:
      if (convention == Convention::bonferroni) {
        const auto up = hull_for(Mode::upper, alpha / 2.0);
        const auto lo = hull_for(Mode::lower, alpha / 2.0);
        fill_from_hull(result, up, lo);
      } else {
        const auto ab = hull_for(Mode::abs, alpha);
        fill_from_hull(result, ab, ab);
      }
      break;
  }
  return result;
}

inline std::vector<Mode> modes_for(Tail tail) {
  switch (tail) {
    case Tail::upper: return {Mode::upper};
    case Tail::lower: return {Mode::lower};
    case Tail::two_sided_bonferroni: return {Mode::upper, Mode::lower};
    case Tail::two_sided_abs: return {Mode::abs};
  }
  return {};
}

}  // namespace detail

// Values of eta where some replicate's tail indicator can change, sorted.
// One-sided tails give one exact rounding threshold per replicate with a
// positive slope; Bonferroni takes both one-sided sets and the abs convention
// gives up to two roots per replicate.
inline std::vector<Breakpoint> breakpoints(const FrozenDraws& draws, Tail tail) {
  const auto modes = detail::modes_for(tail);
  const auto obs = detail::observed_line(draws.model, draws.observed);
  std::vector<Breakpoint> out;
  for (std::size_t j = 0; j < draws.size(); ++j) {
    const auto line = detail::replicate_line(draws.model, draws.observed, draws.replicates[j]);
    detail::Sweep sweep;
    for (auto mode : modes) detail::add_line(sweep, line, obs, mode, 1.0);
    for (const auto& s : sweep.starts) out.push_back({s.eta, j});
    for (const auto& e : sweep.ends) out.push_back({e.eta, j});
  }
  std::stable_sort(out.begin(), out.end(), [](const Breakpoint& a, const Breakpoint& b) { return a.eta < b.eta; });
  return out;
}


// Exact full-group confidence interval: inf / sup of {eta : P(eta) >= alpha}
// over the whole sign-flip group.
inline ConfidenceResult full_group_interval(const OneSampleData& data, double alpha, Side side = Side::two_sided,
                                            Convention convention = Convention::bonferroni) {
  data.validate();
  const auto index = FullGroupIndex::sign_flips(data.n());
  const auto obs_summary = one_sample_observed(data.x);
  const auto obs = detail::observed_line(Model::one_sample, obs_summary);
  auto visit = [&](auto&& add) {
    index.for_each_signs([&](std::uint64_t idx, std::span<const std::int8_t> signs) {
      const auto r = one_sample_summary(data.x, signs);
      add(detail::replicate_line(Model::one_sample, obs_summary, r), index.uniform() ? 1.0 : index.probability(idx));
    });
  };
  const double g = static_cast<double>(index.size());
  auto result = detail::exact_interval(
      obs, visit, [&](double mass) { return index.uniform() ? mass / g : mass; }, alpha, side, convention);
  result.N = index.size();
  return result;
}

inline ConfidenceResult full_group_interval(const TwoSampleData& data, double alpha, Side side = Side::two_sided,
                                            Convention convention = Convention::bonferroni) {
  data.validate();
  const auto index = FullGroupIndex::assignments(data.n(), data.m);
  const auto obs_summary = two_sample_observed(data);
  const auto obs = detail::observed_line(Model::two_sample, obs_summary);
  auto visit = [&](auto&& add) {
    index.for_each_assignment([&](std::uint64_t idx, std::span<const std::uint8_t> labels) {
      const auto r = two_sample_summary(data.w, data.m, labels);
      add(detail::replicate_line(Model::two_sample, obs_summary, r), index.uniform() ? 1.0 : index.probability(idx));
    });
  };
  const double g = static_cast<double>(index.size());
  auto result = detail::exact_interval(
      obs, visit, [&](double mass) { return index.uniform() ? mass / g : mass; }, alpha, side, convention);
  result.N = index.size();
  return result;
}

// Exact inversion of the Monte Carlo P-value on frozen draws.
inline ConfidenceResult breakpoint_scan_interval(const FrozenDraws& draws, double alpha, Side side = Side::two_sided,
                                                 Convention convention = Convention::bonferroni,
                                                 Estimator estimator = Estimator::plus_one) {
  if (draws.size() > kMaxScanReplicates) throw TooLargeError("breakpoint scan limited to 2^20 replicates");
  const detail::Aggregator agg(draws, estimator);
  const auto obs = detail::observed_line(draws.model, draws.observed);
  auto visit = [&](auto&& add) {
    for (std::size_t j = 0; j < draws.size(); ++j) {
      add(detail::replicate_line(draws.model, draws.observed, draws.replicates[j]), agg.weight(j));
    }
  };
  auto result = detail::exact_interval(
      obs, visit, [&](double mass) { return agg.from_mass(mass); }, alpha, side, convention);
  result.N = draws.size();
  result.seed.assign(draws.seed.begin(), draws.seed.end());
  return result;
}

template <class Data>
ConfidenceResult breakpoint_scan_interval(const Data& data, const FrozenDraws& draws, double alpha,
                                          Side side = Side::two_sided, Convention convention = Convention::bonferroni,
                                          Estimator estimator = Estimator::plus_one) {
  data.validate();
  if (draws.n != data.n()) throw ContractError("frozen draws were built for data of a different size");
  return breakpoint_scan_interval(draws, alpha, side, convention, estimator);
}

}  // namespace mcinv
