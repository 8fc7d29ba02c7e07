#pragma once

#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "driftlab/fields.hpp"

namespace driftlab {

enum class Verdict { Recurrent, Transient, Inconclusive };

std::string_view to_string(Verdict v);
std::optional<Verdict> parse_verdict(std::string_view s);

/// Half-width of the band around c = 1 inside which every classifier
/// returns Inconclusive.
inline constexpr double kDecisionMargin = 0.05;

struct Classification {
  Verdict verdict = Verdict::Inconclusive;
  /// sup (recurrent side) or inf (transient side) of the scanned statistic.
  double c_estimate = 0.0;
  /// Range the statistic was scanned over: positions for the drift criterion,
  /// cell indices for the chain criteria.
  double window_lo = 0.0;
  double window_hi = 0.0;
  /// Where the reported extremum was attained.
  double argext = 0.0;
  std::string method;
};

/// Scans s(x) = 4x phi(x, x^2) on a geometric grid of `grid` points in
/// [x0, x_max] and takes sup/inf over the upper half [sqrt(x0 x_max), x_max].
/// Recurrent if sup s <= 1 - margin, Transient if inf s >= 1 + margin.
/// Throws std::invalid_argument for the signed family, x0 <= 0, x_max <= x0 or
/// grid < 100.
Classification classify_theorem1(const DriftField& field, double x0 = 2.0, double x_max = 1e4,
                                 std::size_t grid = 512);

/// Drift rho |x|^alpha / t^beta on the critical line alpha = 2 beta - 1,
/// classified through classify_theorem1. beta must lie in (0, 1/2) or (1/2, 1)
/// and rho > 0.
Classification classify_mv_critical(double rho, double beta, double x0 = 2.0, double x_max = 1e4,
                                    std::size_t grid = 512);

/// Closed form on the critical line: the drift criterion reads 4 rho against 1.
Verdict mv_critical_analytic(double rho);

/// Nearest-neighbour chain on the cells n in [n_min, n_max] (cell n is the
/// interval [n - 1, n]). An optional extender supplies cell rates outside the
/// window for parametric sources.
struct BDChain {
  long n_min = 0;
  long n_max = 0;
  std::vector<double> lambda_star;
  std::vector<double> mu_star;
  std::function<Rates(long)> extend;

  std::size_t size() const { return lambda_star.size(); }
  bool contains(long n) const { return n >= n_min && n <= n_max; }
  /// Rates of cell n, from the window or the extender. Throws
  /// std::out_of_range when neither covers n.
  Rates at(long n) const;
  /// Throws std::invalid_argument unless the arrays match the window and all
  /// rates are strictly positive.
  void validate() const;
};

/// Cell-averaged limit rates: lambda*_n is the composite-midpoint average of
/// lambda_x over [n - 1, n] with `quadrature_points` subintervals, mu*_n
/// likewise. The returned chain extends beyond the window by the same rule.
BDChain discretize_to_bd(const RateField& rf, long n_min, long n_max,
                         std::size_t quadrature_points = 8);

/// Chain with lambda*/mu* = 1 + c/n on cells n >= 1, normalised so that
/// lambda* + mu* = 1; extendable to any n >= 1.
BDChain ratio_family_chain(double c, long n_min, long n_max);

/// Ratio criterion on the right tail n in [n0, n_max]: Recurrent when
/// lambda*/mu* <= 1 + 1/n throughout and max n (lambda*/mu* - 1) is at most
/// 1 - margin, Transient when min n (lambda*/mu* - 1) is at least 1 + margin. Throws std::domain_error if lambda* < mu* somewhere in
/// the right tail. Cells n <= 1 - n0, when present, form the left tail and are
/// classified with the roles of the rates exchanged; either tail transient
/// makes the chain transient.
Classification ratio_test(const BDChain& chain, long n0);

/// Series criterion: S_N = sum_{n=n0}^{N} prod_{k=n0}^{n} mu*_k / lambda*_k,
/// run out to N = n_max + tail_extension through the chain's extender.
/// Checkpoints at N, N/2, N/4, N/8 terms. Transient when the last term is
/// below 1e-12 and the last doubling moved S by less than 1e-9, or when the
/// per-doubling increments shrink geometrically (growth exponent <= -margin,
/// i.e. products decay faster than n^-(1 + margin)). Recurrent when the last
/// increment is at least 0.1 and the increments grow by a factor of at least
/// 2^margin per doubling (products decay no faster than n^-(1 - margin)).
/// c_estimate is the fitted decay exponent of the products. Left tail as in
/// ratio_test.
Classification bd_series_criterion(const BDChain& chain, long n0, long tail_extension = 0);

}  // namespace driftlab
