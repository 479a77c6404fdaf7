#include <cmath>
#include <random>

#include "semisep/kernel.hpp"

namespace semisep::families {

namespace {

OperatorFunction scalar_fn(std::function<Complex(double)> f, Interval iv) {
  return OperatorFunction(1, 1, iv, [f = std::move(f)](double x) {
    CMatrix m(1, 1);
    m(0, 0) = f(x);
    return m;
  });
}

// a + b x + c cos(w x + phi), per entry.
struct SmoothEntries {
  Index rows, cols;
  std::vector<Complex> a, b, c;
  std::vector<double> w, phi;

  SmoothEntries(Index r, Index cl, std::mt19937_64& rng, double scale) : rows(r), cols(cl) {
    std::uniform_real_distribution<double> u(-1.0, 1.0), uw(0.5, 3.0), up(0.0, 6.283185307179586);
    const std::size_t n = static_cast<std::size_t>(r * cl);
    for (std::size_t i = 0; i < n; ++i) {
      a.emplace_back(scale * u(rng), scale * u(rng));
      b.emplace_back(0.5 * scale * u(rng), 0.5 * scale * u(rng));
      c.emplace_back(0.5 * scale * u(rng), 0.5 * scale * u(rng));
      w.push_back(uw(rng));
      phi.push_back(up(rng));
    }
  }

  CMatrix operator()(double x) const {
    CMatrix m(rows, cols);
    for (Index i = 0; i < rows; ++i)
      for (Index j = 0; j < cols; ++j) {
        const std::size_t k = static_cast<std::size_t>(i * cols + j);
        m(i, j) = a[k] + b[k] * x + c[k] * std::cos(w[k] * x + phi[k]);
      }
    return m;
  }
};

}  // namespace

SemiSeparableKernel rank_one(Interval iv) {
  auto one = OperatorFunction::constant(CMatrix::Ones(1, 1), iv);
  return SemiSeparableKernel(one, one, one, one);
}

SemiSeparableKernel scalar(std::function<Complex(double)> f1, std::function<Complex(double)> g1,
                           std::function<Complex(double)> f2, std::function<Complex(double)> g2,
                           Interval iv) {
  return SemiSeparableKernel(scalar_fn(std::move(f1), iv), scalar_fn(std::move(g1), iv),
                             scalar_fn(std::move(f2), iv), scalar_fn(std::move(g2), iv));
}

SemiSeparableKernel exponential_green(double mu, Interval iv) {
  return scalar([mu](double x) { return Complex(std::exp(-mu * x)); },
                [mu](double x) { return Complex(std::exp(mu * x)); },
                [mu](double x) { return Complex(std::exp(mu * x)); },
                [mu](double x) { return Complex(std::exp(-mu * x)); }, iv);
}

SemiSeparableKernel random_smooth(const RandomSmoothSpec& spec) {
  if (spec.d < 1 || spec.n1 < 1 || spec.n2 < 1)
    throw DimensionError("random_smooth: dimensions must be positive");
  std::mt19937_64 rng(spec.seed);
  const Interval iv = spec.iv;
  SmoothEntries f1(spec.d, spec.n1, rng, spec.scale), g1(spec.n1, spec.d, rng, spec.scale);
  auto F1 = OperatorFunction(spec.d, spec.n1, iv, f1);
  auto G1 = OperatorFunction(spec.n1, spec.d, iv, g1);
  if (!spec.trace_consistent) {
    SmoothEntries f2(spec.d, spec.n2, rng, spec.scale), g2(spec.n2, spec.d, rng, spec.scale);
    return SemiSeparableKernel(F1, G1, OperatorFunction(spec.d, spec.n2, iv, f2),
                               OperatorFunction(spec.n2, spec.d, iv, g2));
  }
  // S(x) = I + (x - a) M / L with ||M|| < 1/2 stays invertible on the interval.
  const Index n1 = spec.n1;
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  CMatrix m(n1, n1);
  for (Index i = 0; i < n1; ++i)
    for (Index j = 0; j < n1; ++j) m(i, j) = Complex(u(rng), u(rng));
  const double nrm = m.operatorNorm();
  if (nrm > 0) m *= 0.45 / nrm;
  auto S = [m, iv, n1](double x) {
    return CMatrix(CMatrix::Identity(n1, n1) + ((x - iv.a) / iv.length()) * m);
  };
  auto F2 = OperatorFunction(spec.d, n1, iv, [f1, S](double x) { return CMatrix(f1(x) * S(x)); });
  auto G2 = OperatorFunction(n1, spec.d, iv, [g1, S](double x) {
    return CMatrix(S(x).partialPivLu().solve(g1(x)));
  });
  return SemiSeparableKernel(F1, G1, F2, G2);
}

}  // namespace semisep::families
