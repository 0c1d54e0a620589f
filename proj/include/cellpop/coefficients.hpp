#pragma once

#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "cellpop/errors.hpp"
#include "cellpop/grid.hpp"

namespace cellpop {

// Regular samples on an (a,x) rectangle, bilinear interpolation in between.
// Values are clamped to the table edges outside the sampled range.
struct Table2D {
  std::vector<double> a, x;     // strictly increasing axes
  std::vector<double> v;        // row-major in a
  double value(double aa, double xx) const;
  double d_dx(double aa, double xx) const;  // centered difference
};

// Growth field Gamma(a,x): the content increase rate. Gamma(a,0)=0 and
// Gamma <= 0 beyond x_max, so characteristics stay inside [0,x_max].
class GrowthField {
 public:
  static GrowthField case1(double c1, double x_max);                 // C1 x (xM - x)
  static GrowthField case2(double c1, double alpha, double beta, double x_max);
  static GrowthField case3(double c1, double c2, double r1, double r2, double c4);
  static GrowthField tabulated(Table2D table, double x_max);

  double x_max() const { return x_max_; }
  double operator()(double age, double x) const;   // Gamma(a,x)
  double dx(double age, double x) const;           // d/dx Gamma(a,x)
  // Zero curve x0(a): content where Gamma changes sign; x_max when Gamma > 0
  // on the whole of (0,x_max).
  double zero_curve(double age) const;
  bool zero_curve_nondecreasing(double a_max) const;

 private:
  enum class Kind { Case1, Case2, Case3, Tabulated };
  GrowthField() = default;
  void check_domain(double age, double x) const;

  Kind kind_ = Kind::Case1;
  double x_max_ = 0.0;
  double p1_ = 0.0, p2_ = 0.0, p3_ = 0.0, p4_ = 0.0, p5_ = 0.0;
  Table2D table_;
};

// Total division rate B(a,x) >= 0.
class DivisionRate {
 public:
  static constexpr double unbounded = std::numeric_limits<double>::infinity();

  static DivisionRate power_window(double c2, double gamma, double a_star, double a1);
  static DivisionRate hill_age(double k1, double k2, double gamma1, double a_star);
  static DivisionRate constant_window(double level, double age_end);
  static DivisionRate tabulated(Table2D table);
  static DivisionRate zero();

  double operator()(double age, double x) const;
  double sup(double x_max) const;          // bound on B over ages x in [0,x_max]
  bool compact_age_support() const;
  double age_support_end() const;          // A1 / A, or `unbounded`
  // Ages where the rate jumps (window edges); quadrature splits across them.
  std::vector<double> age_breakpoints() const;

 private:
  enum class Kind { PowerWindow, HillAge, ConstantWindow, Tabulated, Zero };
  DivisionRate() = default;
  Kind kind_ = Kind::Zero;
  double p1_ = 0.0, p2_ = 0.0, p3_ = 0.0, p4_ = 0.0;
  Table2D table_;
};

// Repartition of mother content y onto a daughter of content x. The Dirac
// (equal mitosis) kernel is kept symbolic: only its atom y/2 and rate B are
// ever evaluated, never a numeric spike.
class RepartitionKernel {
 public:
  static RepartitionKernel uniform();
  static RepartitionKernel truncated_uniform(double eta);   // eta in (0, 1/2)
  static RepartitionKernel equal_mitosis();
  // Tabulated daughter-fraction profile rho(u) on u in [0,1]:
  // b(a,x,y) = B(a,y)/y * rho(x/y). Samples are renormalized to unit mass.
  static RepartitionKernel tabulated_profile(std::vector<double> u, std::vector<double> rho);

  bool is_dirac() const { return kind_ == Kind::EqualMitosis; }
  bool is_uniform() const { return kind_ == Kind::Uniform; }
  bool is_profile() const { return kind_ == Kind::TabulatedProfile; }
  double eta() const { return eta_; }

  // Pointwise density b(a,x,y); throws for the Dirac kernel.
  double density(const DivisionRate& rate, double a, double x, double y) const;
  // Exact mass integral of b(a,.,y) over [x_lo, x_hi] (atom inclusion for Dirac).
  double mass(const DivisionRate& rate, double a, double x_lo, double x_hi, double y) const;
  // Same with the rate value B(a,y) already evaluated (hot assembly loops).
  double mass_given(double b, double x_lo, double x_hi, double y) const;
  // Exact first moment: integral of x b(a,x,y) dx over the full support.
  double first_moment(const DivisionRate& rate, double a, double y) const;
  // Integral of b(a,y',y) f(y') dy' for a sampled daughter function f.
  // `f_nodes` are x nodes, `f` nodal values, `f_prefix` trapezoid prefix integrals.
  double daughter_integral(const DivisionRate& rate, double a, double y,
                           const std::vector<double>& f_nodes,
                           const std::vector<double>& f,
                           const std::vector<double>& f_prefix) const;

 private:
  enum class Kind { Uniform, TruncatedUniform, EqualMitosis, TabulatedProfile };
  RepartitionKernel() = default;
  double profile_mass(double u_lo, double u_hi) const;  // integral of rho over [u_lo,u_hi]
  Kind kind_ = Kind::Uniform;
  double eta_ = 0.0;
  std::vector<double> prof_u_, prof_rho_, prof_cum_;
};

struct KernelMomentReport {
  double max_zeroth_residual = 0.0;  // sup |int b dx - B|
  double max_first_residual = 0.0;   // sup |2 int x b dx - y B|
};

// Moment consistency of a kernel/rate pair over the grid nodes, using the
// exact per-mother mass and first-moment integrals of the kernel.
KernelMomentReport check_kernel_consistency(const RepartitionKernel& kernel,
                                            const DivisionRate& rate,
                                            const Grid& grid);

// Proliferating -> quiescent transition rate L(a,x).
class TransitionRate {
 public:
  static TransitionRate constant(double level);
  static TransitionRate hill_in_x(double a3, double a2, double gamma2, double a_bar);
  double operator()(double age, double x) const;
  bool is_constant() const { return kind_ == Kind::Constant; }
  double sup() const;
  double mean_over(const Grid& grid) const;

 private:
  enum class Kind { Constant, HillInX };
  TransitionRate() = default;
  Kind kind_ = Kind::Constant;
  double p1_ = 0.0, p2_ = 0.0, p3_ = 0.0, p4_ = 0.0;
};

struct TwoPhaseParams {
  double d1 = 0.0, d2 = 0.0;
  TransitionRate transition = TransitionRate::constant(0.0);
  double alpha1 = 0.0, alpha2 = 0.0, theta = 1.0, hill_n = 1.0;
  // Observable weights phi*, psi*; empty means constant 1 (total population).
  Field phi_weight, psi_weight;

  void validate() const;
  // Hill recruitment G(N) = (alpha1 theta^n + alpha2 N^n)/(theta^n + N^n).
  double recruitment(double n_val) const;
};

// The full model data of one problem instance.
struct ModelCoefficients {
  GrowthField growth = GrowthField::case1(1.0, 1.0);
  DivisionRate division = DivisionRate::zero();
  RepartitionKernel kernel = RepartitionKernel::uniform();
  std::optional<TwoPhaseParams> two_phase;

  double x_max() const { return growth.x_max(); }
};

}  // namespace cellpop
