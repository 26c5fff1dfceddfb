#include "cartsel/penalty.hpp"

#include <cmath>
#include <string>

namespace cartsel {

void validate(const PenaltySpec& spec) {
  if (spec.n_eff < 1) throw DataError("penalty needs n_eff >= 1");
  if (spec.p < 1) throw DataError("penalty needs p >= 1");
  if (spec.alpha < 0.0 || spec.beta < 0.0) throw DataError("alpha and beta must be >= 0");
  if (const auto& th = spec.theoretical) {
    if (th->sigma2 < 0.0 || th->rho < 0.0 || th->R < 0.0)
      throw DataError("theoretical constants must be >= 0");
    if (spec.framework == Framework::Classification && !(th->h > 0.0 && th->h <= 1.0))
      throw DataError("margin h must lie in (0, 1]");
    if (spec.framework == Framework::Regression && spec.method == Method::M2 && th->rho > 0.0 &&
        !(th->sigma2 > 0.0))
      throw DataError("m2 regression penalty needs sigma2 > 0 when rho > 0");
  }
}

double penalty_multiplier(const PenaltySpec& spec) {
  if (!spec.theoretical) return 1.0;
  const auto& th = *spec.theoretical;
  if (spec.framework == Framework::Classification) return 1.0 / th.h;
  if (spec.method == Method::M1) return th.sigma2 + th.rho * th.R;
  if (th.rho == 0.0) return th.sigma2;
  const double lg = std::log(static_cast<double>(spec.n_eff) / static_cast<double>(spec.p));
  const double r2 = th.rho * th.rho / th.sigma2;
  return th.sigma2 + r2 * r2 * th.sigma2 * lg * lg + th.rho * th.R;
}

namespace {

void check_sizes(const PenaltySpec& spec, std::size_t m, std::size_t t) {
  if (m < 1 || m > spec.p)
    throw DataError("subset size " + std::to_string(m) + " outside [1, " +
                    std::to_string(spec.p) + "]");
  if (t < 1) throw DataError("tree size must be >= 1");
}

}  // namespace

double subset_complexity(std::size_t m, std::size_t p) {
  const double md = static_cast<double>(m);
  return md * (1.0 + std::log(static_cast<double>(p) / md));
}

double leaf_coefficient(const PenaltySpec& spec, std::size_t m) {
  check_sizes(spec, m, 1);
  const double n = static_cast<double>(spec.n_eff);
  double c = spec.alpha / n;
  if (spec.method == Method::M2) {
    const double m1 = static_cast<double>(m + 1);
    c *= 1.0 + m1 * (1.0 + std::log(n / m1));
  }
  return c * penalty_multiplier(spec);
}

double subset_term(const PenaltySpec& spec, std::size_t m) {
  check_sizes(spec, m, 1);
  return spec.beta * subset_complexity(m, spec.p) / static_cast<double>(spec.n_eff) *
         penalty_multiplier(spec);
}

double penalty_value(const PenaltySpec& spec, std::size_t m, std::size_t t) {
  check_sizes(spec, m, t);
  return leaf_coefficient(spec, m) * static_cast<double>(t) + subset_term(spec, m);
}

}  // namespace cartsel
