#include <algorithm>
#include <cmath>
#include <fstream>
#include <memory>
#include <sstream>

#include "semisep/kernel.hpp"

namespace semisep {

namespace {

constexpr double kDomainSlack = 1e-12;

}  // namespace

OperatorFunction::OperatorFunction(Index rows, Index cols, Interval iv, Evaluator f)
    : rows_(rows), cols_(cols), iv_(iv), f_(std::move(f)) {
  if (rows < 0 || cols < 0) throw DimensionError("OperatorFunction: negative dimension");
  if (!iv.finite() || !(iv.b > iv.a)) throw DomainError("OperatorFunction: bad interval");
  if (!f_) throw ContractError("OperatorFunction: empty evaluator");
}

OperatorFunction OperatorFunction::constant(const CMatrix& m, Interval iv) {
  numerics::require_finite(m, "OperatorFunction::constant");
  return OperatorFunction(m.rows(), m.cols(), iv, [m](double) { return m; });
}

OperatorFunction OperatorFunction::zero(Index rows, Index cols, Interval iv) {
  return constant(CMatrix::Zero(rows, cols), iv);
}

CMatrix OperatorFunction::operator()(double x) const {
  if (!f_) throw ContractError("OperatorFunction: evaluation of empty function");
  const double slack = kDomainSlack * std::max(1.0, std::abs(iv_.a) + std::abs(iv_.b));
  if (!(x >= iv_.a - slack && x <= iv_.b + slack)) {
    std::ostringstream os;
    os << "OperatorFunction: x = " << x << " outside [" << iv_.a << ", " << iv_.b << "]";
    throw DomainError(os.str());
  }
  CMatrix m = f_(x);
  if (m.rows() != rows_ || m.cols() != cols_) {
    std::ostringstream os;
    os << "OperatorFunction: evaluator returned " << m.rows() << "x" << m.cols()
       << ", declared " << rows_ << "x" << cols_;
    throw DimensionError(os.str());
  }
  numerics::require_finite(m, "OperatorFunction");
  return m;
}

OperatorFunction OperatorFunction::sampled(std::vector<double> xs, std::vector<CMatrix> samples,
                                           int degree) {
  if (degree < 0 || degree > 3) throw DomainError("sampled: interpolation degree must be 0..3");
  if (xs.size() != samples.size() || xs.size() < 2)
    throw DimensionError("sampled: need >= 2 samples with matching abscissae");
  for (std::size_t i = 1; i < xs.size(); ++i)
    if (xs[i] < xs[i - 1]) throw DomainError("sampled: abscissae must be nondecreasing");
  const Index r = samples[0].rows(), c = samples[0].cols();
  for (auto& s : samples) {
    if (s.rows() != r || s.cols() != c) throw DimensionError("sampled: inconsistent shapes");
    numerics::require_finite(s, "sampled");
  }
  // Segments between repeated abscissae.
  std::vector<std::size_t> seg_start{0};
  for (std::size_t i = 1; i < xs.size(); ++i)
    if (xs[i] == xs[i - 1]) seg_start.push_back(i);
  struct Data {
    std::vector<double> xs;
    std::vector<CMatrix> ys;
    std::vector<std::size_t> seg;
    int deg;
  };
  auto data = std::make_shared<Data>(Data{std::move(xs), std::move(samples), seg_start, degree});
  Interval iv{data->xs.front(), data->xs.back()};
  auto eval = [data](double x) -> CMatrix {
    const auto& X = data->xs;
    std::size_t s = 0;
    while (s + 1 < data->seg.size() && x >= X[data->seg[s + 1]]) ++s;
    const std::size_t lo = data->seg[s];
    const std::size_t hi = (s + 1 < data->seg.size() ? data->seg[s + 1] : X.size()) - 1;
    const std::size_t count = hi - lo + 1;
    const std::size_t m = std::min<std::size_t>(data->deg + 1, count);
    // interval index j with X[j] <= x <= X[j+1]
    auto it = std::upper_bound(X.begin() + lo, X.begin() + hi + 1, x);
    std::size_t j = it == X.begin() + lo ? lo : static_cast<std::size_t>(it - X.begin()) - 1;
    j = std::min(j, hi);
    std::ptrdiff_t first = static_cast<std::ptrdiff_t>(j) - static_cast<std::ptrdiff_t>((m - 1) / 2);
    first = std::max<std::ptrdiff_t>(first, lo);
    first = std::min<std::ptrdiff_t>(first, static_cast<std::ptrdiff_t>(hi + 1 - m));
    CMatrix acc = CMatrix::Zero(data->ys[0].rows(), data->ys[0].cols());
    for (std::size_t a = 0; a < m; ++a) {
      double l = 1;
      const double xa = X[first + a];
      for (std::size_t b = 0; b < m; ++b)
        if (b != a) l *= (x - X[first + b]) / (xa - X[first + b]);
      acc += l * data->ys[first + a];
    }
    return acc;
  };
  OperatorFunction f(r, c, iv, eval);
  f.degree_ = degree;
  return f;
}

OperatorFunction load_operator_function_csv(const std::string& path, Index rows, Index cols,
                                            int degree) {
  std::ifstream in(path);
  if (!in) throw std::ios_base::failure("cannot open " + path);
  std::string line;
  if (!std::getline(in, line)) throw ConfigError(path + ": empty file (header row required)");
  std::vector<double> xs;
  std::vector<CMatrix> ms;
  const std::size_t expected = 1 + 2 * static_cast<std::size_t>(rows * cols);
  int lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    std::vector<double> vals;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) {
      try {
        std::size_t pos = 0;
        vals.push_back(std::stod(cell, &pos));
      } catch (const std::exception&) {
        throw ConfigError(path + ":" + std::to_string(lineno) + ": bad number '" + cell + "'");
      }
    }
    if (vals.size() != expected)
      throw ConfigError(path + ":" + std::to_string(lineno) + ": expected " +
                        std::to_string(expected) + " columns, got " + std::to_string(vals.size()));
    CMatrix m(rows, cols);
    for (Index i = 0; i < rows; ++i)
      for (Index j = 0; j < cols; ++j) {
        const std::size_t k = 1 + 2 * static_cast<std::size_t>(i * cols + j);
        m(i, j) = Complex(vals[k], vals[k + 1]);
      }
    xs.push_back(vals[0]);
    ms.push_back(m);
  }
  return OperatorFunction::sampled(std::move(xs), std::move(ms), degree);
}

}  // namespace semisep
