#include "driftlab/classifier.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace driftlab {
namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

// One tail of a chain seen from the origin: distance index m >= 1, with
// "outward" the rate pointing away from the origin.
struct Tail {
  const BDChain* chain;
  bool right;

  long cell(long m) const { return right ? m : 1 - m; }
  long last_in_window() const { return right ? chain->n_max : 1 - chain->n_min; }
  double outward(long m) const {
    const Rates r = chain->at(cell(m));
    return right ? r.lambda : r.mu;
  }
  double inward(long m) const {
    const Rates r = chain->at(cell(m));
    return right ? r.mu : r.lambda;
  }
};

Verdict combine(Verdict right, std::optional<Verdict> left) {
  if (!left) return right;
  if (right == Verdict::Transient || *left == Verdict::Transient) return Verdict::Transient;
  if (right == Verdict::Recurrent && *left == Verdict::Recurrent) return Verdict::Recurrent;
  return Verdict::Inconclusive;
}

void check_setting(const Tail& tail, long m) {
  if (tail.right && tail.outward(m) < tail.inward(m)) {
    throw std::domain_error("chain criterion: lambda* < mu* in the right tail at n = " +
                            std::to_string(m));
  }
}

Classification ratio_tail(const Tail& tail, long n0) {
  const long last = tail.last_in_window();
  double sup = -std::numeric_limits<double>::infinity();
  double inf = std::numeric_limits<double>::infinity();
  long arg_sup = n0;
  long arg_inf = n0;
  bool recurrent = true;
  for (long m = n0; m <= last; ++m) {
    check_setting(tail, m);
    const double ratio = tail.outward(m) / tail.inward(m);
    const double dm = static_cast<double>(m);
    if (ratio > 1.0 + 1.0 / dm) recurrent = false;
    const double scaled = dm * (ratio - 1.0);
    if (scaled > sup) sup = scaled, arg_sup = m;
    if (scaled < inf) inf = scaled, arg_inf = m;
  }
  Classification out;
  out.method = "ratio_test";
  out.window_lo = static_cast<double>(n0);
  out.window_hi = static_cast<double>(last);
  if (recurrent) {
    out.verdict = sup <= 1.0 - kDecisionMargin ? Verdict::Recurrent : Verdict::Inconclusive;
    out.c_estimate = sup;
    out.argext = static_cast<double>(tail.cell(arg_sup));
  } else {
    out.verdict = inf >= 1.0 + kDecisionMargin ? Verdict::Transient : Verdict::Inconclusive;
    out.c_estimate = inf;
    out.argext = static_cast<double>(tail.cell(arg_inf));
  }
  return out;
}

Classification series_tail(const Tail& tail, long n0, long tail_extension) {
  const long last = tail.last_in_window() + tail_extension;
  const long count = last - n0 + 1;
  if (count < 16) throw std::invalid_argument("series criterion: fewer than 16 terms");

  // Increments of the partial sum between consecutive checkpoints, each
  // accumulated separately.
  const std::array<long, 4> checkpoints{count / 8, count / 4, count / 2, count};
  std::array<double, 4> segments{};
  std::size_t segment = 0;
  double log_product = 0.0;
  double sum = 0.0;
  double term = 1.0;
  bool overflow = false;
  for (long m = n0, k = 1; m <= last; ++m, ++k) {
    check_setting(tail, m);
    log_product += std::log(tail.inward(m)) - std::log(tail.outward(m));
    term = std::exp(log_product);
    sum += term;
    segments[segment] += term;
    if (!std::isfinite(sum)) {
      overflow = true;
      break;
    }
    while (segment + 1 < segments.size() && k == checkpoints[segment]) ++segment;
  }

  Classification out;
  out.method = "bd_series";
  out.window_lo = static_cast<double>(n0);
  out.window_hi = static_cast<double>(last);
  out.argext = static_cast<double>(tail.cell(last));
  if (overflow) {
    out.verdict = Verdict::Recurrent;
    out.c_estimate = -std::numeric_limits<double>::infinity();
    return out;
  }
  const double d0 = segments[1];
  const double d1 = segments[2];
  const double d2 = segments[3];
  const double g1 = d0 > 0.0 && d1 > 0.0 ? std::log2(d1 / d0) : kNaN;
  const double g2 = d1 > 0.0 && d2 > 0.0 ? std::log2(d2 / d1) : kNaN;
  // Products ~ n^-s give increments growing by 2^(1 - s) per doubling.
  const bool converged = term < 1e-12 && d2 < 1e-9;
  // An increment that vanished outright decays faster than any power.
  out.c_estimate = std::isfinite(g2) ? 1.0 - g2
                   : converged       ? std::numeric_limits<double>::infinity()
                                     : kNaN;

  const bool shrinking = g1 <= -kDecisionMargin && g2 <= -kDecisionMargin;
  const bool growing = d2 >= 0.1 && g1 >= kDecisionMargin && g2 >= kDecisionMargin;
  if (converged || shrinking) {
    out.verdict = Verdict::Transient;
  } else if (growing) {
    out.verdict = Verdict::Recurrent;
  } else {
    out.verdict = Verdict::Inconclusive;
  }
  return out;
}

void check_n0(const BDChain& chain, long n0) {
  if (n0 < 1) throw std::invalid_argument("chain criterion: n0 must be >= 1");
  if (!chain.contains(n0)) throw std::invalid_argument("chain criterion: n0 outside the chain window");
}

template <class PerTail>
Classification both_tails(const BDChain& chain, long n0, PerTail&& per_tail) {
  chain.validate();
  check_n0(chain, n0);
  Classification right = per_tail(Tail{&chain, true});
  std::optional<Verdict> left_verdict;
  if (1 - chain.n_min >= n0) {
    Classification left = per_tail(Tail{&chain, false});
    left_verdict = left.verdict;
    if (left.verdict == Verdict::Transient && right.verdict != Verdict::Transient) {
      right.c_estimate = left.c_estimate;
      right.argext = left.argext;
    }
    right.window_lo = static_cast<double>(chain.n_min);
  }
  right.verdict = combine(right.verdict, left_verdict);
  return right;
}

}  // namespace

std::string_view to_string(Verdict v) {
  switch (v) {
    case Verdict::Recurrent:
      return "Recurrent";
    case Verdict::Transient:
      return "Transient";
    case Verdict::Inconclusive:
      return "Inconclusive";
  }
  return "Inconclusive";
}

std::optional<Verdict> parse_verdict(std::string_view s) {
  for (Verdict v : {Verdict::Recurrent, Verdict::Transient, Verdict::Inconclusive}) {
    if (to_string(v) == s) return v;
  }
  return std::nullopt;
}

Classification classify_theorem1(const DriftField& field, double x0, double x_max,
                                 std::size_t grid) {
  if (!field.in_scope()) {
    throw std::invalid_argument("classify_theorem1: signed drift fields are not classifiable");
  }
  if (!(x0 > 0.0)) throw std::invalid_argument("classify_theorem1: x0 must be > 0");
  if (!(x_max > x0) || !std::isfinite(x_max)) {
    throw std::invalid_argument("classify_theorem1: x_max must exceed x0");
  }
  if (grid < 100) throw std::invalid_argument("classify_theorem1: grid must be >= 100");

  const double log_ratio = std::log(x_max / x0);
  const std::size_t first = (grid - 1) / 2 + ((grid - 1) % 2);  // first index at or above the geometric midpoint
  double sup = -std::numeric_limits<double>::infinity();
  double inf = std::numeric_limits<double>::infinity();
  double arg_sup = x_max;
  double arg_inf = x_max;
  for (std::size_t i = first; i < grid; ++i) {
    const double x =
        i + 1 == grid ? x_max : x0 * std::exp(log_ratio * static_cast<double>(i) / (grid - 1));
    const double s = 4.0 * x * eval_phi(field, x, x * x);
    if (s > sup) sup = s, arg_sup = x;
    if (s < inf) inf = s, arg_inf = x;
  }

  Classification out;
  out.method = "theorem1";
  out.window_lo = std::sqrt(x0 * x_max);
  out.window_hi = x_max;
  if (sup <= 1.0 - kDecisionMargin) {
    out.verdict = Verdict::Recurrent;
    out.c_estimate = sup;
    out.argext = arg_sup;
  } else if (inf >= 1.0 + kDecisionMargin) {
    out.verdict = Verdict::Transient;
    out.c_estimate = inf;
    out.argext = arg_inf;
  } else {
    out.verdict = Verdict::Inconclusive;
    out.c_estimate = sup;
    out.argext = arg_sup;
  }
  return out;
}

Classification classify_mv_critical(double rho, double beta, double x0, double x_max,
                                    std::size_t grid) {
  if (!(rho > 0.0) || !std::isfinite(rho)) {
    throw std::invalid_argument("classify_mv_critical: rho must be > 0");
  }
  if (!(beta > 0.0 && beta < 1.0) || beta == 0.5) {
    throw std::invalid_argument("classify_mv_critical: beta must lie in (0, 1/2) or (1/2, 1)");
  }
  auto out = classify_theorem1(DriftField::power_law(rho, 2.0 * beta - 1.0, beta), x0, x_max, grid);
  out.method = "mv_critical";
  return out;
}

Verdict mv_critical_analytic(double rho) {
  const double c = 4.0 * rho;
  if (c < 1.0) return Verdict::Recurrent;
  if (c > 1.0) return Verdict::Transient;
  return Verdict::Inconclusive;
}

Rates BDChain::at(long n) const {
  if (contains(n)) {
    const auto i = static_cast<std::size_t>(n - n_min);
    return {lambda_star[i], mu_star[i]};
  }
  if (extend) return extend(n);
  throw std::out_of_range("BDChain: cell " + std::to_string(n) + " outside window and no extender");
}

void BDChain::validate() const {
  if (n_max < n_min) throw std::invalid_argument("BDChain: n_max < n_min");
  const auto n = static_cast<std::size_t>(n_max - n_min + 1);
  if (lambda_star.size() != n || mu_star.size() != n) {
    throw std::invalid_argument("BDChain: rate arrays do not match the window");
  }
  for (std::size_t i = 0; i < n; ++i) {
    if (!(lambda_star[i] > 0.0) || !(mu_star[i] > 0.0)) {
      throw std::invalid_argument("BDChain: non-positive rate at n = " +
                                  std::to_string(n_min + static_cast<long>(i)));
    }
  }
}

BDChain discretize_to_bd(const RateField& rf, long n_min, long n_max,
                         std::size_t quadrature_points) {
  if (!(n_min < n_max)) throw std::invalid_argument("discretize_to_bd: n_min must be < n_max");
  if (quadrature_points < 1) throw std::invalid_argument("discretize_to_bd: quadrature_points must be >= 1");

  auto cell = [rf, quadrature_points](long n) {
    const double h = 1.0 / static_cast<double>(quadrature_points);
    const double left = static_cast<double>(n - 1);
    double lambda = 0.0;
    double mu = 0.0;
    for (std::size_t j = 0; j < quadrature_points; ++j) {
      const Rates r = rf.limit(left + (static_cast<double>(j) + 0.5) * h);
      lambda += r.lambda;
      mu += r.mu;
    }
    lambda *= h;
    mu *= h;
    if (!(lambda > 0.0) || !(mu > 0.0)) {
      throw std::domain_error("discretize_to_bd: non-positive averaged rate at n = " +
                              std::to_string(n));
    }
    return Rates{lambda, mu};
  };

  BDChain chain;
  chain.n_min = n_min;
  chain.n_max = n_max;
  const auto size = static_cast<std::size_t>(n_max - n_min + 1);
  chain.lambda_star.reserve(size);
  chain.mu_star.reserve(size);
  for (long n = n_min; n <= n_max; ++n) {
    const Rates r = cell(n);
    chain.lambda_star.push_back(r.lambda);
    chain.mu_star.push_back(r.mu);
  }
  chain.extend = cell;
  return chain;
}

BDChain ratio_family_chain(double c, long n_min, long n_max) {
  if (n_min < 1 || n_max < n_min) throw std::invalid_argument("ratio family: need 1 <= n_min <= n_max");
  if (!std::isfinite(c) || !(c > -1.0)) throw std::invalid_argument("ratio family: c must exceed -1");
  auto cell = [c](long n) {
    if (n < 1) throw std::out_of_range("ratio family: defined for n >= 1 only");
    const double q = c / static_cast<double>(n);
    return Rates{(1.0 + q) / (2.0 + q), 1.0 / (2.0 + q)};
  };
  BDChain chain;
  chain.n_min = n_min;
  chain.n_max = n_max;
  for (long n = n_min; n <= n_max; ++n) {
    const Rates r = cell(n);
    chain.lambda_star.push_back(r.lambda);
    chain.mu_star.push_back(r.mu);
  }
  chain.extend = cell;
  return chain;
}

Classification ratio_test(const BDChain& chain, long n0) {
  return both_tails(chain, n0, [n0](const Tail& tail) { return ratio_tail(tail, n0); });
}

Classification bd_series_criterion(const BDChain& chain, long n0, long tail_extension) {
  if (tail_extension < 0) throw std::invalid_argument("series criterion: tail_extension must be >= 0");
  if (tail_extension > 0 && !chain.extend) {
    throw std::invalid_argument("series criterion: tail extension needs an extendable chain");
  }
  return both_tails(chain, n0, [n0, tail_extension](const Tail& tail) {
    return series_tail(tail, n0, tail_extension);
  });
}

}  // namespace driftlab
