#pragma once

#include <cstddef>
#include <optional>

#include "cartsel/dataset.hpp"

namespace cartsel {

/// Noise and margin constants. When present in a PenaltySpec the penalty is
/// scaled by the matching multiplier instead of folding it into alpha/beta.
struct TheoreticalConstants {
  double sigma2 = 0.0;  // sub-exponential variance proxy
  double rho = 0.0;     // sub-exponential scale
  double R = 0.0;       // sup-norm bound on the regression function
  double h = 1.0;       // classification margin, in (0, 1]
};

struct PenaltySpec {
  Framework framework = Framework::Regression;
  Method method = Method::M1;
  double alpha = 0.0;
  double beta = 0.0;
  std::size_t n_eff = 1;  // n2 under M1, n1 under M2
  std::size_t p = 1;
  std::optional<TheoreticalConstants> theoretical;
};

void validate(const PenaltySpec& spec);

/// 1 in practical mode; 1/h, sigma2 + rho R, or
/// sigma2 (1 + rho^4/sigma^4 log^2(n/p)) + rho R in theoretical mode.
double penalty_multiplier(const PenaltySpec& spec);

/// Coefficient of |T|: alpha/n under M1, alpha [1 + (m+1)(1 + log(n/(m+1)))]/n
/// under M2, times the multiplier.
double leaf_coefficient(const PenaltySpec& spec, std::size_t m_size);

/// beta (m/n)(1 + log(p/m)), times the multiplier.
double subset_term(const PenaltySpec& spec, std::size_t m_size);

double penalty_value(const PenaltySpec& spec, std::size_t m_size, std::size_t t_size);

/// m (1 + log(p/m)), the subset-complexity shape.
double subset_complexity(std::size_t m_size, std::size_t p);

}  // namespace cartsel
