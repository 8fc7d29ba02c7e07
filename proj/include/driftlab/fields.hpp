#pragma once

#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "driftlab/rng.hpp"

namespace driftlab {

/// Largest drift magnitude after clipping; keeps both rates strictly inside [0, 1].
inline constexpr double kPhiCap = 0.5 - 1e-12;

/// Proxy time at which t -> infinity limit rates are evaluated.
inline constexpr double kDefaultLimitTime = 1e8;

namespace drift {

struct Zero {
  bool operator==(const Zero&) const = default;
};

/// phi(x, t) = c / (4 max(|x|, x_floor)), independent of t.
struct CriticalLamperti {
  double c = 1.0;
  bool operator==(const CriticalLamperti&) const = default;
};

/// phi(x, t) = rho |x|^alpha / t^beta.
struct PowerLaw {
  double rho = 0.0;
  double alpha = 0.0;
  double beta = 1.0;
  bool operator==(const PowerLaw&) const = default;
};

/// Signed restoring drift, phi(x, t) = -kappa sign(x) min(1/2, |x|/x_floor) / 2.
/// Only meaningful for ergodic diagnostics; not a valid input to the classifier.
struct MeanReverting {
  double kappa = 0.0;
  bool operator==(const MeanReverting&) const = default;
};

/// phi sampled on a grid of |x| (ascending) by t (ascending), row-major in x.
/// Evaluated by bilinear interpolation, held constant outside the grid.
struct Tabulated {
  std::vector<double> abs_x;
  std::vector<double> t;
  std::vector<double> values;
  bool operator==(const Tabulated&) const = default;
};

}  // namespace drift

using DriftFamily = std::variant<drift::Zero, drift::CriticalLamperti, drift::PowerLaw,
                                 drift::MeanReverting, drift::Tabulated>;

/// The drift phi(x, t) of the walk. Immutable once built; construction
/// validates the family parameters and throws std::invalid_argument.
class DriftField {
 public:
  DriftField() = default;
  explicit DriftField(DriftFamily family, double x_floor = 1.0);

  static DriftField zero() { return DriftField{drift::Zero{}}; }
  static DriftField critical_lamperti(double c) { return DriftField{drift::CriticalLamperti{c}}; }
  static DriftField power_law(double rho, double alpha, double beta) {
    return DriftField{drift::PowerLaw{rho, alpha, beta}};
  }
  static DriftField mean_reverting(double kappa) { return DriftField{drift::MeanReverting{kappa}}; }

  const DriftFamily& family() const { return family_; }
  double x_floor() const { return x_floor_; }

  /// True for the nonnegative, t-nonincreasing families the classifier accepts.
  bool in_scope() const { return !std::holds_alternative<drift::MeanReverting>(family_); }

  /// Unclipped value of the family formula.
  double raw(double x, double t) const;

  bool operator==(const DriftField&) const = default;

 private:
  DriftFamily family_{drift::Zero{}};
  double x_floor_ = 1.0;
};

/// Clipped phi: [0, kPhiCap] for in-scope families, [-kPhiCap, kPhiCap] for
/// the signed family. Throws std::invalid_argument for t < 0.
double eval_phi(const DriftField& field, double x, double t);

struct Rates {
  double lambda;
  double mu;
};

/// lambda = 1/2 + phi, mu = 1/2 - phi.
class RateField {
 public:
  RateField() = default;
  explicit RateField(DriftField drift, double limit_time = kDefaultLimitTime);

  const DriftField& drift() const { return drift_; }
  double limit_time() const { return limit_time_; }

  Rates at(double x, double t) const;
  /// lambda_x, mu_x: the t -> infinity limits, evaluated at limit_time().
  Rates limit(double x) const { return at(x, limit_time_); }

 private:
  DriftField drift_;
  double limit_time_ = kDefaultLimitTime;
};

Rates eval_rates(const RateField& rf, double x, double t);

namespace jumps {

struct Constant1 {
  bool operator==(const Constant1&) const = default;
};
struct ExponentialMean1 {
  bool operator==(const ExponentialMean1&) const = default;
};
/// Gamma(shape k, scale 1/k).
struct GammaMean1 {
  double shape = 1.0;
  bool operator==(const GammaMean1&) const = default;
};
/// Uniform on (1 - d, 1 + d).
struct UniformMean1 {
  double halfwidth = 0.0;
  bool operator==(const UniformMean1&) const = default;
};

}  // namespace jumps

using JumpFamily =
    std::variant<jumps::Constant1, jumps::ExponentialMean1, jumps::GammaMean1, jumps::UniformMean1>;

/// Positive i.i.d. jump sizes with mean exactly 1.
class JumpLaw {
 public:
  JumpLaw() = default;
  explicit JumpLaw(JumpFamily family);

  static JumpLaw constant() { return JumpLaw{jumps::Constant1{}}; }
  static JumpLaw exponential() { return JumpLaw{jumps::ExponentialMean1{}}; }
  static JumpLaw gamma(double shape) { return JumpLaw{jumps::GammaMean1{shape}}; }
  static JumpLaw uniform(double halfwidth) { return JumpLaw{jumps::UniformMean1{halfwidth}}; }

  const JumpFamily& family() const { return family_; }

  static constexpr double mean() { return 1.0; }
  double variance() const;
  /// E[X^2] = Var + 1.
  double second_moment() const { return variance() + 1.0; }

  double sample(Rng& rng) const;

  bool operator==(const JumpLaw&) const = default;

 private:
  JumpFamily family_{jumps::Constant1{}};
};

inline double sample_jump(const JumpLaw& law, Rng& rng) { return law.sample(rng); }

/// Short human-readable names, e.g. "critical_lamperti{c=0.5}".
std::string describe(const DriftField& field);
std::string describe(const JumpLaw& law);

}  // namespace driftlab
