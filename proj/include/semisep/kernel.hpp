#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "semisep/numerics.hpp"
#include "semisep/quadrature.hpp"

namespace semisep {

// Matrix-valued function of one real variable with fixed shape.
class OperatorFunction {
 public:
  using Evaluator = std::function<CMatrix(double)>;

  OperatorFunction() = default;
  OperatorFunction(Index rows, Index cols, Interval iv, Evaluator f);

  static OperatorFunction constant(const CMatrix& m, Interval iv);
  static OperatorFunction zero(Index rows, Index cols, Interval iv);
  // Local Lagrange interpolation of the given degree (0..3). A repeated
  // abscissa marks a jump: stencils never reach across it.
  static OperatorFunction sampled(std::vector<double> xs, std::vector<CMatrix> samples,
                                  int degree);

  // Shape, domain and finiteness are checked on every call.
  CMatrix operator()(double x) const;

  Index rows() const { return rows_; }
  Index cols() const { return cols_; }
  const Interval& interval() const { return iv_; }
  int interp_degree() const { return degree_; }  // -1 for closed forms
  bool empty() const { return !f_; }

 private:
  Index rows_ = 0, cols_ = 0;
  Interval iv_{0, 1};
  Evaluator f_;
  int degree_ = -1;
};

// CSV layout: header row, then x, Re M11, Im M11, Re M12, ... (row-major).
OperatorFunction load_operator_function_csv(const std::string& path, Index rows, Index cols,
                                            int degree = 3);

enum class DiagonalConvention { Average, LowerBranch, UpperBranch, ZeroDiagonal };

struct NodalFactors {
  std::vector<CMatrix> F1, G1, F2, G2;
};

// K(x,x') = F1(x)G1(x') for x' < x, F2(x)G2(x') for x < x'.
class SemiSeparableKernel {
 public:
  SemiSeparableKernel() = default;
  SemiSeparableKernel(OperatorFunction F1, OperatorFunction G1, OperatorFunction F2,
                      OperatorFunction G2,
                      DiagonalConvention conv = DiagonalConvention::Average);

  Index d() const { return f1_.rows(); }
  Index n1() const { return f1_.cols(); }
  Index n2() const { return f2_.cols(); }
  Index n() const { return n1() + n2(); }
  const Interval& interval() const { return iv_; }
  DiagonalConvention diagonal_convention() const { return conv_; }
  SemiSeparableKernel with_convention(DiagonalConvention c) const;

  const OperatorFunction& F1() const { return f1_; }
  const OperatorFunction& G1() const { return g1_; }
  const OperatorFunction& F2() const { return f2_; }
  const OperatorFunction& G2() const { return g2_; }

  CMatrix eval_kernel(double x, double xp) const;
  CMatrix eval_H(double x, double xp) const;
  CMatrix block_C(double x) const;  // [F1 F2]
  CMatrix block_B(double x) const;  // [G1; -G2]
  CMatrix block_A(double x) const;  // B(x) C(x)
  CMatrix P0() const;               // diag(0, I_n2)

  NodalFactors sample(const Quadrature& q) const;

 private:
  OperatorFunction f1_, g1_, f2_, g2_;
  Interval iv_{0, 1};
  DiagonalConvention conv_ = DiagonalConvention::Average;
};

// Free-function spellings.
CMatrix eval_kernel(const SemiSeparableKernel& k, double x, double xp);
CMatrix eval_H(const SemiSeparableKernel& k, double x, double xp);
CMatrix block_A(const SemiSeparableKernel& k, double x);

// Applies a diagonal convention to the two branch values at x = x'.
CMatrix diagonal_value(DiagonalConvention c, const CMatrix& lower, const CMatrix& upper);

namespace families {

// F1 = F2 = G1 = G2 = 1: the operator f -> int f.
SemiSeparableKernel rank_one(Interval iv = {0, 1});

// Scalar factors given by lambdas.
SemiSeparableKernel scalar(std::function<Complex(double)> f1, std::function<Complex(double)> g1,
                           std::function<Complex(double)> f2, std::function<Complex(double)> g2,
                           Interval iv);

// K(x,x') = e^{-mu|x-x'|}
SemiSeparableKernel exponential_green(double mu, Interval iv = {0, 1});

struct RandomSmoothSpec {
  Index d = 2, n1 = 1, n2 = 1;
  std::uint64_t seed = 1;
  Interval iv{0, 1};
  double scale = 1.0;
  // n2 = n1, F2 = F1 S, G2 = S^{-1} G1 with S(x) = I + x M: the kernel is
  // then continuous across the diagonal and trace class consistent.
  bool trace_consistent = false;
};

// Entries a + b x + c cos(w x + phi) with seeded coefficients.
SemiSeparableKernel random_smooth(const RandomSmoothSpec& spec);

}  // namespace families
}  // namespace semisep
