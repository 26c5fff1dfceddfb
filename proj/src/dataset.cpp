#include "cartsel/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <numeric>
#include <random>
#include <sstream>

namespace cartsel {

Dataset::Dataset(std::vector<double> x, std::size_t p, std::vector<double> y,
                 Framework framework, std::vector<std::string> names)
    : x_(std::move(x)), p_(p), y_(std::move(y)), framework_(framework),
      names_(std::move(names)) {
  if (p_ == 0 || y_.empty()) throw DataError("dataset needs n >= 1 and p >= 1");
  if (x_.size() != y_.size() * p_) throw DataError("x has wrong size for n x p");
  for (double v : x_)
    if (!std::isfinite(v)) throw DataError("non-finite explanatory value");
  for (double v : y_) {
    if (!std::isfinite(v)) throw DataError("non-finite response");
    if (framework_ == Framework::Classification && v != 0.0 && v != 1.0)
      throw DataError("response not in {0,1}");
  }
  if (names_.empty()) {
    for (std::size_t j = 0; j < p_; ++j) names_.push_back("X" + std::to_string(j + 1));
  } else if (names_.size() != p_) {
    throw DataError("names must have p entries");
  }
}

Dataset Dataset::with_permuted_column(std::size_t j, std::span<const RowIndex> order) const {
  std::vector<double> x = x_;
  for (RowIndex i = 0; i < order.size(); ++i) x[i * p_ + j] = x_[order[i] * p_ + j];
  return Dataset(std::move(x), p_, y_, framework_, names_);
}

namespace {

// RFC-4180 record splitter; quoted fields may contain commas and "" escapes.
// Embedded newlines inside quotes are not supported.
std::vector<std::string> split_record(const std::string& line, std::size_t lineno) {
  std::vector<std::string> out;
  std::string cur;
  bool quoted = false;
  bool was_quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    char c = line[i];
    if (quoted) {
      if (c == '"') {
        if (i + 1 < line.size() && line[i + 1] == '"') {
          cur.push_back('"');
          ++i;
        } else {
          quoted = false;
        }
      } else {
        cur.push_back(c);
      }
    } else if (c == '"' && cur.empty() && !was_quoted) {
      quoted = true;
      was_quoted = true;
    } else if (c == ',') {
      out.push_back(std::move(cur));
      cur.clear();
      was_quoted = false;
    } else {
      cur.push_back(c);
    }
  }
  if (quoted) throw DataError("unterminated quote at line " + std::to_string(lineno));
  out.push_back(std::move(cur));
  return out;
}

std::string trim(const std::string& s) {
  auto b = s.find_first_not_of(" \t");
  if (b == std::string::npos) return {};
  auto e = s.find_last_not_of(" \t");
  return s.substr(b, e - b + 1);
}

}  // namespace

Dataset load_csv(const std::filesystem::path& path, const std::string& target,
                 Framework framework) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open " + path.string());

  std::string line;
  if (!std::getline(in, line)) throw DataError("missing header row");
  if (line.size() >= 3 && line.compare(0, 3, "\xEF\xBB\xBF") == 0) line.erase(0, 3);
  if (!line.empty() && line.back() == '\r') line.pop_back();
  auto header = split_record(line, 1);
  for (auto& h : header) h = trim(h);

  auto tit = std::find(header.begin(), header.end(), target);
  if (tit == header.end()) throw DataError("target column '" + target + "' not found");
  const std::size_t tcol = static_cast<std::size_t>(tit - header.begin());
  const std::size_t cols = header.size();
  if (cols < 2) throw DataError("need at least one explanatory column");

  std::vector<std::string> names;
  for (std::size_t c = 0; c < cols; ++c)
    if (c != tcol) names.push_back(header[c]);

  std::vector<double> x, y;
  std::size_t row = 0;
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    ++row;
    auto fields = split_record(line, lineno);
    if (fields.size() != cols)
      throw DataError("row " + std::to_string(row) + " has " + std::to_string(fields.size()) +
                      " fields, expected " + std::to_string(cols));
    for (std::size_t c = 0; c < cols; ++c) {
      std::string f = trim(fields[c]);
      if (f.empty())
        throw DataError("missing value at row " + std::to_string(row) + ", column " +
                        std::to_string(c + 1));
      double v = 0.0;
      std::size_t used = 0;
      try {
        v = std::stod(f, &used);
      } catch (const std::exception&) {
        used = 0;
      }
      if (used != f.size() || !std::isfinite(v))
        throw DataError("parse failure at row " + std::to_string(row) + ", column " +
                        std::to_string(c + 1) + ": '" + f + "'");
      if (c == tcol) {
        if (framework == Framework::Classification && v != 0.0 && v != 1.0)
          throw DataError("response not in {0,1} at row " + std::to_string(row));
        y.push_back(v);
      } else {
        x.push_back(v);
      }
    }
  }
  if (y.empty()) throw DataError("no data rows");
  return Dataset(std::move(x), cols - 1, std::move(y), framework, std::move(names));
}

void write_csv(const Dataset& ds, const std::filesystem::path& path, const std::string& target) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write " + path.string());
  for (const auto& name : ds.names()) out << name << ',';
  out << target << '\n';
  out << std::setprecision(17);
  for (RowIndex i = 0; i < ds.n(); ++i) {
    for (std::size_t j = 0; j < ds.p(); ++j) out << ds.x(i, j) << ',';
    out << ds.y(i) << '\n';
  }
}

namespace {
constexpr double kSumTol = 1e-9;
}

void validate_fractions(SplitFractions fr, Method method) {
  if (!(fr.f1 > 0.0) || !(fr.f3 > 0.0) || !(fr.f2 >= 0.0))
    throw DataError("split fractions need f1 > 0, f3 > 0, f2 >= 0");
  if (fr.f1 + fr.f2 + fr.f3 > 1.0 + kSumTol) throw DataError("split fractions sum above 1");
  if (method == Method::M1 && !(fr.f2 > 0.0)) throw DataError("method m1 needs f2 > 0");
  if (method == Method::M2 && fr.f2 != 0.0) throw DataError("method m2 needs f2 = 0");
}

SplitFractions default_fractions(Method method) {
  return method == Method::M1 ? SplitFractions{0.5, 0.25, 0.25} : SplitFractions{0.75, 0.0, 0.25};
}

SampleSplit split_three(std::size_t n, SplitFractions fr, std::uint64_t seed, Method method) {
  validate_fractions(fr, method);

  const auto n1 = static_cast<std::size_t>(std::floor(fr.f1 * static_cast<double>(n) + 0.5));
  const auto n2 = static_cast<std::size_t>(std::floor(fr.f2 * static_cast<double>(n) + 0.5));
  if (n1 + n2 > n) throw DataError("split sizes exceed n");
  std::size_t n3 = n - n1 - n2;
  if (std::abs(fr.f1 + fr.f2 + fr.f3 - 1.0) > kSumTol)
    n3 = std::min(n3, static_cast<std::size_t>(std::floor(fr.f3 * static_cast<double>(n) + 0.5)));
  if (n1 == 0 || n3 == 0 || (method == Method::M1 && n2 == 0))
    throw DataError("split leaves a mandatory part empty");

  Rows perm(n);
  std::iota(perm.begin(), perm.end(), RowIndex{0});
  std::mt19937_64 rng(derive_seed(seed, 1));
  std::shuffle(perm.begin(), perm.end(), rng);

  SampleSplit s;
  s.method = method;
  s.i1.assign(perm.begin(), perm.begin() + static_cast<std::ptrdiff_t>(n1));
  s.i2.assign(perm.begin() + static_cast<std::ptrdiff_t>(n1),
              perm.begin() + static_cast<std::ptrdiff_t>(n1 + n2));
  s.i3.assign(perm.begin() + static_cast<std::ptrdiff_t>(n1 + n2),
              perm.begin() + static_cast<std::ptrdiff_t>(n1 + n2 + n3));
  return s;
}

SampleSplit split_three(const Dataset& ds, SplitFractions fractions, std::uint64_t seed,
                        Method method) {
  return split_three(ds.n(), fractions, seed, method);
}

double breiman_mean(std::span<const double> x) {
  if (x[0] > 0.0) return 3.0 + 3.0 * x[1] + 2.0 * x[2] + x[3];
  return -3.0 + 3.0 * x[4] + 2.0 * x[5] + x[6];
}

Dataset gen_breiman(std::size_t n, std::uint64_t seed, double noise_sd, std::size_t p) {
  if (n < 1) throw DataError("gen_breiman needs n >= 1");
  constexpr std::size_t base = 10;
  if (p < base) throw DataError("gen_breiman needs p >= 10");
  std::mt19937_64 rng(derive_seed(seed, 0));
  std::mt19937_64 extra(derive_seed(seed, 3));
  std::uniform_int_distribution<int> coin(0, 1);
  std::uniform_int_distribution<int> three(-1, 1);
  std::normal_distribution<double> noise(0.0, noise_sd);

  std::vector<double> x(n * p), y(n);
  for (std::size_t i = 0; i < n; ++i) {
    double* r = x.data() + i * p;
    r[0] = coin(rng) == 0 ? -1.0 : 1.0;
    for (std::size_t j = 1; j < base; ++j) r[j] = static_cast<double>(three(rng));
    y[i] = breiman_mean({r, base}) + noise(rng);
    for (std::size_t j = base; j < p; ++j) r[j] = static_cast<double>(three(extra));
  }
  return Dataset(std::move(x), p, std::move(y), Framework::Regression);
}

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) {
  std::uint64_t z = seed + 0x9E3779B97F4A7C15ULL * (stream + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

std::string to_string(Framework f) {
  return f == Framework::Regression ? "regression" : "classification";
}
std::string to_string(Method m) { return m == Method::M1 ? "m1" : "m2"; }

Framework parse_framework(const std::string& s) {
  if (s == "regression") return Framework::Regression;
  if (s == "classification") return Framework::Classification;
  throw DataError("unknown framework '" + s + "'");
}

Method parse_method(const std::string& s) {
  if (s == "m1" || s == "M1") return Method::M1;
  if (s == "m2" || s == "M2") return Method::M2;
  throw DataError("unknown method '" + s + "'");
}

}  // namespace cartsel
