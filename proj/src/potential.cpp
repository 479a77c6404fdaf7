#include <algorithm>
#include <cmath>
#include <sstream>

#include "semisep/schrodinger.hpp"

namespace semisep {

SpectralPoint SpectralPoint::make(Complex z, double z_min) {
  if (!std::isfinite(z.real()) || !std::isfinite(z.imag()))
    throw DomainError("SpectralPoint: non-finite z");
  if (std::abs(z) < z_min) {
    std::ostringstream os;
    os << "SpectralPoint: |z| = " << std::abs(z) << " below z_min = " << z_min;
    throw DomainError(os.str());
  }
  Complex k = std::sqrt(z);
  if (k.imag() < 0 || (k.imag() == 0 && k.real() < 0)) k = -k;
  return {z, k};
}

SpectralPoint SpectralPoint::conjugate() const {
  SpectralPoint s{std::conj(z), -std::conj(k)};
  if (s.k.imag() == 0 && s.k.real() < 0) s.k = -s.k;
  return s;
}

CMatrix Potential::operator()(double x) const {
  if (!V) throw ContractError("Potential: empty evaluator");
  CMatrix m = V(x);
  if (m.rows() != d || m.cols() != d) {
    std::ostringstream os;
    os << "Potential " << name << ": evaluator returned " << m.rows() << "x" << m.cols()
       << ", declared d = " << d;
    throw DimensionError(os.str());
  }
  numerics::require_finite(m, "Potential");
  return m;
}

void validate_potential(const Potential& v, double herm_tol) {
  double lo = -20, hi = 20;
  if (v.domain == LineDomain::HalfLine) lo = 1e-6;
  if (v.support) {
    lo = std::max(lo, v.support->a);
    hi = std::min(hi, v.support->b);
  }
  const int n = 257;
  for (int i = 0; i < n; ++i) {
    const double x = lo + (hi - lo) * (i + 0.5) / n;
    const CMatrix m = v(x);
    if (v.hermitian && numerics::hermiticity_defect(m) > herm_tol) {
      std::ostringstream os;
      os << "Potential " << v.name << ": flagged Hermitian but ||V - V*|| relative = "
         << numerics::hermiticity_defect(m) << " at x = " << x;
      throw ContractError(os.str());
    }
    if (v.envelope) {
      Eigen::JacobiSVD<CMatrix> svd(m);
      const double tn = svd.singularValues().sum();
      if (tn > v.envelope(x) * (1 + 1e-10) + 1e-14) {
        std::ostringstream os;
        os << "Potential " << v.name << ": envelope " << v.envelope(x)
           << " does not dominate ||V||_1 = " << tn << " at x = " << x;
        throw ContractError(os.str());
      }
    }
  }
}

namespace potentials {

namespace {

CMatrix scalar(double v) {
  CMatrix m(1, 1);
  m(0, 0) = v;
  return m;
}

double trace_norm(const CMatrix& m) {
  Eigen::JacobiSVD<CMatrix> svd(m);
  return svd.singularValues().sum();
}

}  // namespace

Potential zero(Index d, LineDomain dom) {
  Potential p;
  p.d = d;
  p.domain = dom;
  p.V = [d](double) { return CMatrix(CMatrix::Zero(d, d)); };
  p.envelope = [](double) { return 0.0; };
  p.name = "zero";
  return p;
}

Potential square_well(double depth, double width, double center, LineDomain dom) {
  if (!(width > 0)) throw DomainError("square_well: width must be positive");
  const double a = center - 0.5 * width, b = center + 0.5 * width;
  if (dom == LineDomain::HalfLine && a < 0)
    throw DomainError("square_well: half-line well must lie in [0, inf)");
  Potential p;
  p.domain = dom;
  p.V = [=](double x) { return scalar(x >= a && x <= b ? -depth : 0.0); };
  p.envelope = [=](double x) { return x >= a && x <= b ? std::abs(depth) : 0.0; };
  p.support = Interval{a, b};
  p.breakpoints = {a, b};
  p.weight_class = dom == LineDomain::HalfLine ? WeightClass::L1_weighted : WeightClass::L1;
  p.name = "square_well";
  return p;
}

Potential gaussian(double amplitude, double sigma, double center, LineDomain dom) {
  if (!(sigma > 0)) throw DomainError("gaussian: sigma must be positive");
  Potential p;
  p.domain = dom;
  p.V = [=](double x) {
    const double t = (x - center) / sigma;
    return scalar(amplitude * std::exp(-t * t));
  };
  p.envelope = [=](double x) {
    const double t = (x - center) / sigma;
    return std::abs(amplitude) * std::exp(-t * t);
  };
  p.weight_class = dom == LineDomain::HalfLine ? WeightClass::L1_weighted : WeightClass::L1;
  p.name = "gaussian";
  return p;
}

Potential exponential(double amplitude, double rate) {
  if (!(rate > 0)) throw DomainError("exponential: rate must be positive");
  Potential p;
  p.domain = LineDomain::HalfLine;
  p.V = [=](double x) { return scalar(amplitude * std::exp(-rate * x)); };
  p.envelope = [=](double x) { return std::abs(amplitude) * std::exp(-rate * x); };
  p.exp_envelope = ExponentialEnvelope{std::abs(amplitude), rate, 0.0};
  p.weight_class = WeightClass::L1_weighted;
  p.name = "exponential";
  return p;
}

Potential matrix_diag(const std::vector<Potential>& ch) {
  if (ch.empty()) throw DimensionError("matrix_diag: no channels");
  Potential p;
  p.domain = ch[0].domain;
  p.d = 0;
  bool all_support = true, all_exp = true;
  Interval sup{INFINITY, -INFINITY};
  double amp = 0, rate = INFINITY;
  for (const auto& c : ch) {
    if (c.domain != p.domain) throw DomainError("matrix_diag: channels on different domains");
    p.d += c.d;
    p.hermitian = p.hermitian && c.hermitian;
    if (c.weight_class == WeightClass::L1_weighted) p.weight_class = WeightClass::L1_weighted;
    p.breakpoints.insert(p.breakpoints.end(), c.breakpoints.begin(), c.breakpoints.end());
    if (c.support) {
      sup.a = std::min(sup.a, c.support->a);
      sup.b = std::max(sup.b, c.support->b);
    } else {
      all_support = false;
    }
    if (c.exp_envelope && c.exp_envelope->center == 0) {
      amp += c.exp_envelope->amplitude;
      rate = std::min(rate, c.exp_envelope->rate);
    } else {
      all_exp = false;
    }
  }
  if (all_support) p.support = sup;
  if (all_exp && p.domain == LineDomain::HalfLine) p.exp_envelope = ExponentialEnvelope{amp, rate, 0};
  const Index d = p.d;
  p.V = [ch, d](double x) {
    CMatrix m = CMatrix::Zero(d, d);
    Index off = 0;
    for (const auto& c : ch) {
      m.block(off, off, c.d, c.d) = c(x);
      off += c.d;
    }
    return m;
  };
  p.envelope = [ch](double x) {
    double s = 0;
    for (const auto& c : ch) s += c.envelope(x);
    return s;
  };
  p.name = "matrix_diag";
  return p;
}

Potential matrix_coupled(const CMatrix& amplitude, const Potential& profile) {
  if (profile.d != 1) throw DimensionError("matrix_coupled: profile must be scalar");
  if (amplitude.rows() != amplitude.cols() || amplitude.rows() < 1)
    throw DimensionError("matrix_coupled: amplitude must be square");
  numerics::require_finite(amplitude, "matrix_coupled");
  Potential p = profile;
  p.d = amplitude.rows();
  p.hermitian = profile.hermitian && numerics::hermiticity_defect(amplitude) <= 1e-12;
  const double tn = trace_norm(amplitude);
  p.V = [amplitude, profile](double x) { return CMatrix(amplitude * profile(x)(0, 0)); };
  auto env = profile.envelope;
  p.envelope = [env, tn](double x) { return tn * env(x); };
  if (profile.exp_envelope) {
    p.exp_envelope = *profile.exp_envelope;
    p.exp_envelope->amplitude *= tn;
  }
  p.name = "matrix_coupled";
  return p;
}

Potential sum(const Potential& a, const Potential& b) {
  if (a.d != b.d) throw DimensionError("potentials::sum: dimension mismatch");
  if (a.domain != b.domain) throw DomainError("potentials::sum: domain mismatch");
  Potential p;
  p.d = a.d;
  p.domain = a.domain;
  p.hermitian = a.hermitian && b.hermitian;
  p.weight_class = (a.weight_class == WeightClass::L1_weighted ||
                    b.weight_class == WeightClass::L1_weighted)
                       ? WeightClass::L1_weighted
                       : WeightClass::L1;
  p.V = [a, b](double x) { return CMatrix(a(x) + b(x)); };
  auto ea = a.envelope, eb = b.envelope;
  p.envelope = [ea, eb](double x) { return ea(x) + eb(x); };
  if (a.support && b.support)
    p.support = Interval{std::min(a.support->a, b.support->a), std::max(a.support->b, b.support->b)};
  p.breakpoints = a.breakpoints;
  p.breakpoints.insert(p.breakpoints.end(), b.breakpoints.begin(), b.breakpoints.end());
  p.name = a.name + "+" + b.name;
  return p;
}

}  // namespace potentials

PotentialGrid make_grid(const Potential& v, const GridSpec& spec) {
  PotentialGrid out;
  const Interval original = v.domain == LineDomain::FullLine ? Interval{-INFINITY, INFINITY}
                                                             : Interval{0.0, INFINITY};
  if (v.support) {
    Interval iv = *v.support;
    if (v.domain == LineDomain::HalfLine) iv.a = 0.0;  // the boundary is part of the problem
    out.truncation = {original, iv, 0.0, spec.truncation_tol};
  } else if (!v.envelope) {
    throw ContractError("make_grid: potential without support needs an envelope");
  } else if (v.exp_envelope && v.weight_class == WeightClass::L1) {
    out.truncation = truncate_interval(*v.exp_envelope, original, spec.truncation_tol);
  } else {
    std::function<double(double)> env = v.envelope;
    if (v.weight_class == WeightClass::L1_weighted)
      env = [e = v.envelope](double x) { return (1 + std::abs(x)) * e(x); };
    out.truncation = truncate_interval(env, original, spec.truncation_tol);
  }
  out.grid = build_grid_aligned(out.truncation.truncated, spec.nodes_per_panel, spec.panels,
                                v.breakpoints, spec.scheme);
  return out;
}

double bargmann_bound(const Potential& v, const Quadrature& grid) {
  if (!v.hermitian) throw ContractError("bargmann_bound: potential is not self-adjoint");
  if (v.domain != LineDomain::HalfLine)
    throw DomainError("bargmann_bound: defined for half-line potentials");
  if (grid.interval().a < 0) throw DomainError("bargmann_bound: grid must lie in (0, inf)");
  double s = 0;
  for (Index i = 0; i < grid.size(); ++i) {
    const double x = grid.nodes()[i];
    s += grid.weights()[i] * x * numerics::herm_negative_part(v(x)).trace().real();
  }
  return s;
}

double bargmann_bound(const Potential& v, const GridSpec& spec) {
  if (!v.hermitian) throw ContractError("bargmann_bound: potential is not self-adjoint");
  return bargmann_bound(v, make_grid(v, spec).grid);
}

}  // namespace semisep
