#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace cartsel {

enum class Framework { Regression, Classification };
enum class Method { M1, M2 };

using RowIndex = std::size_t;
using Rows = std::vector<RowIndex>;

class DataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// n observations of p numeric-coded variables plus a response.
///
/// Storage is row-major. Variables are treated as ordered everywhere, so
/// categorical levels must already be coded as numbers.
class Dataset {
 public:
  Dataset(std::vector<double> x, std::size_t p, std::vector<double> y,
          Framework framework, std::vector<std::string> names = {});

  std::size_t n() const { return y_.size(); }
  std::size_t p() const { return p_; }
  Framework framework() const { return framework_; }

  double x(RowIndex i, std::size_t j) const { return x_[i * p_ + j]; }
  std::span<const double> row(RowIndex i) const {
    return {x_.data() + i * p_, p_};
  }
  double y(RowIndex i) const { return y_[i]; }
  std::span<const double> responses() const { return y_; }
  const std::vector<std::string>& names() const { return names_; }

  /// Copy with column j's values permuted by `order` (order[i] = source row).
  Dataset with_permuted_column(std::size_t j, std::span<const RowIndex> order) const;

 private:
  std::vector<double> x_;
  std::size_t p_;
  std::vector<double> y_;
  Framework framework_;
  std::vector<std::string> names_;
};

/// Disjoint index sets for growing (i1), pruning (i2) and final hold-out (i3).
struct SampleSplit {
  Rows i1, i2, i3;
  Method method = Method::M1;

  std::size_t n1() const { return i1.size(); }
  std::size_t n2() const { return i2.size(); }
  std::size_t n3() const { return i3.size(); }

  /// Rows used for pruning and penalized selection: i2 under M1, i1 under M2.
  const Rows& pruning_rows() const { return method == Method::M1 ? i2 : i1; }
};

struct SplitFractions {
  double f1 = 0.5, f2 = 0.25, f3 = 0.25;
};

/// Throws DataError unless f1, f3 > 0, f2 >= 0, the sum is at most 1, and
/// f2 > 0 under M1 or f2 = 0 under M2.
void validate_fractions(SplitFractions fractions, Method method);
/// (0.5, 0.25, 0.25) under M1, (0.75, 0, 0.25) under M2.
SplitFractions default_fractions(Method method);

Dataset load_csv(const std::filesystem::path& path, const std::string& target,
                 Framework framework);
void write_csv(const Dataset& ds, const std::filesystem::path& path,
               const std::string& target = "y");

SampleSplit split_three(const Dataset& ds, SplitFractions fractions,
                        std::uint64_t seed, Method method);
SampleSplit split_three(std::size_t n, SplitFractions fractions,
                        std::uint64_t seed, Method method);

/// Regression function of the ten-variable waveform example.
double breiman_mean(std::span<const double> x);

/// Draws n rows of the ten-variable example: X1 uniform on {-1,1}, X2..X10
/// uniform on {-1,0,1}, y = breiman_mean(x) + N(0, noise_sd^2). Columns past
/// the tenth are extra {-1,0,1} noise from their own stream, so the first ten
/// columns and y do not depend on p.
Dataset gen_breiman(std::size_t n, std::uint64_t seed, double noise_sd = 1.4142135623730951,
                    std::size_t p = 10);

/// Sub-seed derivation: splitmix64 of (seed, stream). Stream numbers used by
/// the library: 0 data, 1 sample split, 2 forward-selection permutations,
/// 3 extra noise columns.
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream);

std::string to_string(Framework f);
std::string to_string(Method m);
Framework parse_framework(const std::string& s);
Method parse_method(const std::string& s);

}  // namespace cartsel
