#include "driftlab/fields.hpp"

#include "driftlab/detail/overloaded.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace driftlab {
namespace {

using detail::overloaded;

void require(bool ok, const char* what) {
  if (!ok) throw std::invalid_argument(what);
}

bool strictly_ascending(const std::vector<double>& v) {
  return std::adjacent_find(v.begin(), v.end(), std::greater_equal<>{}) == v.end();
}

void validate(const drift::Tabulated& tab) {
  require(!tab.abs_x.empty() && !tab.t.empty(), "tabulated field: empty grid");
  require(tab.values.size() == tab.abs_x.size() * tab.t.size(),
          "tabulated field: values must have |x| * t entries");
  require(strictly_ascending(tab.abs_x) && strictly_ascending(tab.t),
          "tabulated field: grid axes must be strictly ascending");
  require(tab.abs_x.front() >= 0.0 && tab.t.front() >= 0.0,
          "tabulated field: grid axes must be nonnegative");
  const std::size_t nt = tab.t.size();
  for (std::size_t i = 0; i < tab.abs_x.size(); ++i) {
    for (std::size_t j = 0; j < nt; ++j) {
      const double v = tab.values[i * nt + j];
      require(std::isfinite(v) && v >= 0.0, "tabulated field: values must be finite and >= 0");
      if (j > 0) {
        require(v <= tab.values[i * nt + j - 1], "tabulated field: values must not increase in t");
      }
    }
  }
}

// Index of the left end of the bracketing segment and the weight of the right end.
std::pair<std::size_t, double> locate(const std::vector<double>& axis, double v) {
  if (axis.size() == 1 || v <= axis.front()) return {0, 0.0};
  if (v >= axis.back()) return {axis.size() - 1, 0.0};
  const auto it = std::upper_bound(axis.begin(), axis.end(), v);
  const std::size_t i = static_cast<std::size_t>(it - axis.begin()) - 1;
  return {i, (v - axis[i]) / (axis[i + 1] - axis[i])};
}

double interpolate(const drift::Tabulated& tab, double ax, double t) {
  const auto [i, wx] = locate(tab.abs_x, ax);
  const auto [j, wt] = locate(tab.t, t);
  const std::size_t nt = tab.t.size();
  auto at = [&](std::size_t a, std::size_t b) { return tab.values[a * nt + b]; };
  const std::size_t i1 = wx > 0.0 ? i + 1 : i;
  const std::size_t j1 = wt > 0.0 ? j + 1 : j;
  const double lo = (1.0 - wt) * at(i, j) + wt * at(i, j1);
  const double hi = (1.0 - wt) * at(i1, j) + wt * at(i1, j1);
  return (1.0 - wx) * lo + wx * hi;
}

}  // namespace

DriftField::DriftField(DriftFamily family, double x_floor)
    : family_(std::move(family)), x_floor_(x_floor) {
  require(std::isfinite(x_floor_) && x_floor_ > 0.0, "x_floor must be positive");
  std::visit(overloaded{
                 [](const drift::Zero&) {},
                 [](const drift::CriticalLamperti& f) {
                   require(std::isfinite(f.c) && f.c >= 0.0, "critical_lamperti: c must be >= 0");
                 },
                 [](const drift::PowerLaw& f) {
                   require(std::isfinite(f.rho) && f.rho >= 0.0, "power_law: rho must be >= 0");
                   require(std::isfinite(f.alpha), "power_law: alpha must be finite");
                   require(std::isfinite(f.beta) && f.beta >= 0.0,
                           "power_law: beta must be >= 0 (phi must not increase in t)");
                 },
                 [](const drift::MeanReverting& f) {
                   require(std::isfinite(f.kappa) && f.kappa >= 0.0,
                           "mean_reverting: kappa must be >= 0");
                 },
                 [](const drift::Tabulated& f) { validate(f); },
             },
             family_);
}

double DriftField::raw(double x, double t) const {
  const double ax = std::max(std::abs(x), x_floor_);
  return std::visit(
      overloaded{
          [](const drift::Zero&) { return 0.0; },
          [&](const drift::CriticalLamperti& f) { return f.c / (4.0 * ax); },
          [&](const drift::PowerLaw& f) {
            if (f.rho == 0.0) return 0.0;
            if (t <= 0.0 && f.beta > 0.0) return std::numeric_limits<double>::infinity();
            return f.rho * std::pow(ax, f.alpha) / std::pow(t, f.beta);
          },
          [&](const drift::MeanReverting& f) {
            const double sign = (x > 0.0) - (x < 0.0);
            return -f.kappa * sign * std::min(0.5, std::abs(x) / x_floor_) / 2.0;
          },
          [&](const drift::Tabulated& f) { return interpolate(f, std::abs(x), t); },
      },
      family_);
}

double eval_phi(const DriftField& field, double x, double t) {
  if (!(t >= 0.0)) throw std::invalid_argument("eval_phi: time must be nonnegative");
  const double lo = field.in_scope() ? 0.0 : -kPhiCap;
  return std::clamp(field.raw(x, t), lo, kPhiCap);
}

RateField::RateField(DriftField drift, double limit_time)
    : drift_(std::move(drift)), limit_time_(limit_time) {
  require(std::isfinite(limit_time_) && limit_time_ > 0.0, "limit time must be positive");
}

Rates RateField::at(double x, double t) const {
  const double phi = eval_phi(drift_, x, t);
  const double lambda = 0.5 + phi;
  // The pair sums to exactly 1.
  return {lambda, 1.0 - lambda};
}

Rates eval_rates(const RateField& rf, double x, double t) { return rf.at(x, t); }

JumpLaw::JumpLaw(JumpFamily family) : family_(std::move(family)) {
  std::visit(overloaded{
                 [](const jumps::Constant1&) {},
                 [](const jumps::ExponentialMean1&) {},
                 [](const jumps::GammaMean1& g) {
                   require(std::isfinite(g.shape) && g.shape > 0.0, "gamma: shape must be > 0");
                 },
                 [](const jumps::UniformMean1& u) {
                   require(u.halfwidth >= 0.0 && u.halfwidth < 1.0,
                           "uniform: halfwidth must lie in [0, 1)");
                 },
             },
             family_);
}

double JumpLaw::variance() const {
  return std::visit(overloaded{
                        [](const jumps::Constant1&) { return 0.0; },
                        [](const jumps::ExponentialMean1&) { return 1.0; },
                        [](const jumps::GammaMean1& g) { return 1.0 / g.shape; },
                        [](const jumps::UniformMean1& u) { return u.halfwidth * u.halfwidth / 3.0; },
                    },
                    family_);
}

double JumpLaw::sample(Rng& rng) const {
  return std::visit(overloaded{
                        [](const jumps::Constant1&) { return 1.0; },
                        [&](const jumps::ExponentialMean1&) { return driftlab::exponential(rng, 1.0); },
                        [&](const jumps::GammaMean1& g) {
                          std::gamma_distribution<double> dist(g.shape, 1.0 / g.shape);
                          for (;;) {
                            const double v = dist(rng);
                            if (v > 0.0) return v;
                          }
                        },
                        [&](const jumps::UniformMean1& u) {
                          return 1.0 - u.halfwidth + 2.0 * u.halfwidth * uniform_open(rng);
                        },
                    },
                    family_);
}

std::string describe(const DriftField& field) {
  std::ostringstream os;
  os.precision(17);
  std::visit(overloaded{
                 [&](const drift::Zero&) { os << "zero"; },
                 [&](const drift::CriticalLamperti& f) { os << "critical_lamperti{c=" << f.c << "}"; },
                 [&](const drift::PowerLaw& f) {
                   os << "power_law{rho=" << f.rho << ", alpha=" << f.alpha << ", beta=" << f.beta
                      << "}";
                 },
                 [&](const drift::MeanReverting& f) { os << "mean_reverting{kappa=" << f.kappa << "}"; },
                 [&](const drift::Tabulated& f) {
                   os << "tabulated{" << f.abs_x.size() << "x" << f.t.size() << "}";
                 },
             },
             field.family());
  return os.str();
}

std::string describe(const JumpLaw& law) {
  std::ostringstream os;
  os.precision(17);
  std::visit(overloaded{
                 [&](const jumps::Constant1&) { os << "constant"; },
                 [&](const jumps::ExponentialMean1&) { os << "exponential"; },
                 [&](const jumps::GammaMean1& g) { os << "gamma{k=" << g.shape << "}"; },
                 [&](const jumps::UniformMean1& u) { os << "uniform{d=" << u.halfwidth << "}"; },
             },
             law.family());
  return os.str();
}

}  // namespace driftlab
