#include "cellpop/coefficients.hpp"

#include <algorithm>
#include <cmath>

#include "cellpop/numeric.hpp"

namespace cellpop {

namespace {

constexpr double kDomainSlack = 1e-9;
constexpr double kBreakTol = 1e-9;

double overlap(double lo1, double hi1, double lo2, double hi2) {
  return std::max(0.0, std::min(hi1, hi2) - std::max(lo1, lo2));
}

}  // namespace

// ---------------------------------------------------------------- Table2D

double Table2D::value(double aa, double xx) const {
  auto locate = [](const std::vector<double>& axis, double t, std::size_t& lo,
                   double& frac) {
    if (axis.size() < 2 || t <= axis.front()) {
      lo = 0;
      frac = 0.0;
      return;
    }
    if (t >= axis.back()) {
      lo = axis.size() - 2;
      frac = 1.0;
      return;
    }
    auto it = std::upper_bound(axis.begin(), axis.end(), t);
    lo = std::size_t(it - axis.begin()) - 1;
    frac = (t - axis[lo]) / (axis[lo + 1] - axis[lo]);
  };
  std::size_t ia = 0, ix = 0;
  double fa = 0.0, fx = 0.0;
  locate(a, aa, ia, fa);
  locate(x, xx, ix, fx);
  std::size_t nx = x.size();
  auto at = [&](std::size_t i, std::size_t j) { return v[i * nx + j]; };
  if (a.size() < 2) return (1 - fx) * at(0, ix) + fx * at(0, std::min(ix + 1, nx - 1));
  double lo_row = (1 - fx) * at(ia, ix) + fx * at(ia, ix + 1);
  double hi_row = (1 - fx) * at(ia + 1, ix) + fx * at(ia + 1, ix + 1);
  return (1 - fa) * lo_row + fa * hi_row;
}

double Table2D::d_dx(double aa, double xx) const {
  double h = (x.back() - x.front()) / double(std::max<std::size_t>(x.size() - 1, 1));
  double lo = std::max(x.front(), xx - 0.5 * h);
  double hi = std::min(x.back(), xx + 0.5 * h);
  if (hi <= lo) return 0.0;
  return (value(aa, hi) - value(aa, lo)) / (hi - lo);
}

// ------------------------------------------------------------- GrowthField

GrowthField GrowthField::case1(double c1, double x_max) {
  if (c1 <= 0.0 || x_max <= 0.0) throw config_error("case1 growth: need C1 > 0 and x_M > 0");
  GrowthField g;
  g.kind_ = Kind::Case1;
  g.p1_ = c1;
  g.x_max_ = x_max;
  return g;
}

GrowthField GrowthField::case2(double c1, double alpha, double beta, double x_max) {
  if (c1 <= 0.0 || x_max <= 0.0) throw config_error("case2 growth: need C1 > 0 and x_M > 0");
  if (!(alpha > 0.0 && alpha < 1.0)) throw config_error("case2 growth: alpha must lie in (0,1)");
  if (beta <= 0.0) throw config_error("case2 growth: beta must be positive");
  GrowthField g;
  g.kind_ = Kind::Case2;
  g.p1_ = c1;
  g.p2_ = alpha;
  g.p3_ = beta;
  g.x_max_ = x_max;
  return g;
}

GrowthField GrowthField::case3(double c1, double c2, double r1, double r2, double c4) {
  if (c1 <= 0.0 || c2 <= 0.0 || r1 <= 0.0 || r2 <= 0.0 || c4 <= 0.0)
    throw config_error("case3 growth: all parameters must be positive");
  if (!(c2 / c1 < r1 - r2))
    throw config_error("case3 growth: requires c2/c1 < r1 - r2");
  GrowthField g;
  g.kind_ = Kind::Case3;
  g.p1_ = c1;
  g.p2_ = c2;
  g.p3_ = r1;
  g.p4_ = r2;
  g.p5_ = c4;
  g.x_max_ = (c1 / c2) * r1 - 1.0;
  return g;
}

GrowthField GrowthField::tabulated(Table2D table, double x_max) {
  if (table.x.size() < 2 || table.a.empty() ||
      table.v.size() != table.a.size() * table.x.size())
    throw config_error("tabulated growth: inconsistent table dimensions");
  GrowthField g;
  g.kind_ = Kind::Tabulated;
  g.table_ = std::move(table);
  g.x_max_ = x_max;
  return g;
}

void GrowthField::check_domain(double age, double x) const {
  if (age < -kDomainSlack) throw std::domain_error("growth field: negative age");
  if (x < -kDomainSlack * x_max_ || x > x_max_ * (1.0 + kDomainSlack))
    throw std::domain_error("growth field: content " + std::to_string(x) +
                            " outside [0," + std::to_string(x_max_) + "]");
}

double GrowthField::operator()(double age, double x) const {
  check_domain(age, x);
  x = std::clamp(x, 0.0, x_max_);
  switch (kind_) {
    case Kind::Case1:
      return p1_ * x * (x_max_ - x);
    case Kind::Case2:
      return p1_ * std::pow(x, p2_) * std::pow(x_max_ - x, p3_);
    case Kind::Case3:
      return p1_ * x / (1.0 + x) * (p3_ - p4_ * std::exp(-p5_ * age)) - p2_ * x;
    case Kind::Tabulated:
      return table_.value(age, x);
  }
  return 0.0;
}

double GrowthField::dx(double age, double x) const {
  check_domain(age, x);
  x = std::clamp(x, 0.0, x_max_);
  switch (kind_) {
    case Kind::Case1:
      return p1_ * (x_max_ - 2.0 * x);
    case Kind::Case2: {
      double xs = std::max(x, 1e-12 * x_max_);
      return p1_ * (p2_ * std::pow(xs, p2_ - 1.0) * std::pow(x_max_ - x, p3_) -
                    p3_ * std::pow(xs, p2_) * std::pow(std::max(x_max_ - x, 0.0), p3_ - 1.0));
    }
    case Kind::Case3: {
      double d = 1.0 + x;
      return p1_ * (p3_ - p4_ * std::exp(-p5_ * age)) / (d * d) - p2_;
    }
    case Kind::Tabulated:
      return table_.d_dx(age, x);
  }
  return 0.0;
}

double GrowthField::zero_curve(double age) const {
  switch (kind_) {
    case Kind::Case1:
    case Kind::Case2:
      return x_max_;
    case Kind::Case3:
      return std::clamp((p1_ / p2_) * (p3_ - p4_ * std::exp(-p5_ * age)) - 1.0,
                        0.0, x_max_);
    case Kind::Tabulated: {
      // scan for the first sign change of Gamma(age, .)
      const int n = 256;
      double prev = (*this)(age, 0.5 * x_max_ / n);
      if (prev <= 0.0) return 0.0;
      for (int i = 1; i <= n; ++i) {
        double xi = double(i) / n * x_max_;
        double cur = (*this)(age, xi);
        if (cur <= 0.0)
          return bisect_root([&](double t) { return (*this)(age, t); },
                             double(i - 1) / n * x_max_, xi, 1e-12 * x_max_);
        prev = cur;
      }
      return x_max_;
    }
  }
  return x_max_;
}

bool GrowthField::zero_curve_nondecreasing(double a_max) const {
  const int n = 200;
  double prev = zero_curve(0.0);
  for (int i = 1; i <= n; ++i) {
    double cur = zero_curve(double(i) / n * a_max);
    if (cur < prev - 1e-9 * x_max_) return false;
    prev = cur;
  }
  return true;
}

// ------------------------------------------------------------ DivisionRate

DivisionRate DivisionRate::power_window(double c2, double gamma, double a_star, double a1) {
  if (c2 < 0.0 || gamma < 1.0 || a_star < 0.0 || a1 < a_star)
    throw config_error("power_window rate: need C2 >= 0, gamma >= 1, 0 <= A* <= A1");
  DivisionRate r;
  r.kind_ = Kind::PowerWindow;
  r.p1_ = c2;
  r.p2_ = gamma;
  r.p3_ = a_star;
  r.p4_ = a1;
  return r;
}

DivisionRate DivisionRate::hill_age(double k1, double k2, double gamma1, double a_star) {
  if (k1 < 0.0 || k2 <= 0.0 || gamma1 <= 0.0 || a_star < 0.0)
    throw config_error("hill_age rate: need k1 >= 0, k2 > 0, gamma1 > 0, A* >= 0");
  DivisionRate r;
  r.kind_ = Kind::HillAge;
  r.p1_ = k1;
  r.p2_ = k2;
  r.p3_ = gamma1;
  r.p4_ = a_star;
  return r;
}

DivisionRate DivisionRate::constant_window(double level, double age_end) {
  if (level < 0.0 || age_end <= 0.0)
    throw config_error("constant_window rate: need B >= 0 and A > 0");
  DivisionRate r;
  r.kind_ = Kind::ConstantWindow;
  r.p1_ = level;
  r.p2_ = age_end;
  return r;
}

DivisionRate DivisionRate::tabulated(Table2D table) {
  for (double v : table.v)
    if (v < 0.0) throw config_error("tabulated rate: negative sample");
  DivisionRate r;
  r.kind_ = Kind::Tabulated;
  r.table_ = std::move(table);
  return r;
}

DivisionRate DivisionRate::zero() { return DivisionRate(); }

double DivisionRate::operator()(double age, double x) const {
  // Interior window edges count with half weight so that trapezoid sums
  // across the jump stay second order when the edge sits on a grid node.
  // The edge at age 0 is not a jump of the integrand on [0, infinity).
  auto window = [](double a, double lo, double hi) {
    if (lo > 0.0 && std::abs(a - lo) < kBreakTol) return 0.5;
    if (hi < unbounded && std::abs(a - hi) < kBreakTol) return 0.5;
    return (a >= lo && a < hi) ? 1.0 : 0.0;
  };
  switch (kind_) {
    case Kind::PowerWindow:
      return p1_ * std::pow(x, p2_) * window(age, p3_, p4_);
    case Kind::HillAge: {
      double xg = std::pow(x, p3_);
      return p1_ * xg / (std::pow(p2_, p3_) + xg) * window(age, p4_, unbounded);
    }
    case Kind::ConstantWindow:
      return p1_ * window(age, 0.0, p2_);
    case Kind::Tabulated:
      return std::max(0.0, table_.value(age, x));
    case Kind::Zero:
      return 0.0;
  }
  return 0.0;
}

double DivisionRate::sup(double x_max) const {
  switch (kind_) {
    case Kind::PowerWindow:
      return p1_ * std::pow(x_max, p2_);
    case Kind::HillAge: {
      double xg = std::pow(x_max, p3_);
      return p1_ * xg / (std::pow(p2_, p3_) + xg);
    }
    case Kind::ConstantWindow:
      return p1_;
    case Kind::Tabulated: {
      double m = 0.0;
      for (double v : table_.v) m = std::max(m, v);
      return m;
    }
    case Kind::Zero:
      return 0.0;
  }
  return 0.0;
}

bool DivisionRate::compact_age_support() const {
  return age_support_end() < unbounded;
}

double DivisionRate::age_support_end() const {
  switch (kind_) {
    case Kind::PowerWindow:
      return p4_;
    case Kind::ConstantWindow:
      return p2_;
    case Kind::Tabulated:
      return table_.a.empty() ? unbounded : unbounded;  // treated as unbounded (clamped)
    default:
      return unbounded;
  }
}

std::vector<double> DivisionRate::age_breakpoints() const {
  switch (kind_) {
    case Kind::PowerWindow:
      return p4_ < unbounded ? std::vector<double>{p3_, p4_} : std::vector<double>{p3_};
    case Kind::HillAge:
      return {p4_};
    case Kind::ConstantWindow:
      return {p2_};
    default:
      return {};
  }
}

// ------------------------------------------------------- RepartitionKernel

RepartitionKernel RepartitionKernel::uniform() { return RepartitionKernel(); }

RepartitionKernel RepartitionKernel::truncated_uniform(double eta) {
  if (!(eta > 0.0 && eta < 0.5))
    throw config_error("truncated_uniform kernel: eta must lie in (0, 1/2)");
  RepartitionKernel k;
  k.kind_ = Kind::TruncatedUniform;
  k.eta_ = eta;
  return k;
}

RepartitionKernel RepartitionKernel::equal_mitosis() {
  RepartitionKernel k;
  k.kind_ = Kind::EqualMitosis;
  return k;
}

RepartitionKernel RepartitionKernel::tabulated_profile(std::vector<double> u,
                                                       std::vector<double> rho) {
  if (u.size() != rho.size() || u.size() < 2)
    throw config_error("tabulated kernel profile: inconsistent samples");
  RepartitionKernel k;
  k.kind_ = Kind::TabulatedProfile;
  k.prof_u_ = std::move(u);
  k.prof_rho_ = std::move(rho);
  k.prof_cum_ = prefix_trapezoid(k.prof_u_, k.prof_rho_);
  double total = k.prof_cum_.back();
  if (total <= 0.0) throw config_error("tabulated kernel profile: zero mass");
  for (auto& v : k.prof_rho_) v /= total;
  for (auto& v : k.prof_cum_) v /= total;
  return k;
}

double RepartitionKernel::profile_mass(double u_lo, double u_hi) const {
  double lo = interp_linear(prof_u_, prof_cum_, u_lo);
  double hi = interp_linear(prof_u_, prof_cum_, u_hi);
  return std::max(0.0, hi - lo);
}

double RepartitionKernel::density(const DivisionRate& rate, double a, double x,
                                  double y) const {
  if (kind_ == Kind::EqualMitosis)
    throw std::logic_error("equal-mitosis kernel has no pointwise density");
  if (y <= 0.0 || x < 0.0 || x > y) return 0.0;
  double b = rate(a, y);
  switch (kind_) {
    case Kind::Uniform:
      return b / y;
    case Kind::TruncatedUniform:
      return (x >= eta_ * y && x <= (1.0 - eta_) * y) ? b / (y * (1.0 - 2.0 * eta_))
                                                      : 0.0;
    case Kind::TabulatedProfile:
      return b / y * interp_linear(prof_u_, prof_rho_, x / y);
    default:
      return 0.0;
  }
}

double RepartitionKernel::mass(const DivisionRate& rate, double a, double x_lo,
                               double x_hi, double y) const {
  return mass_given(rate(a, std::max(y, 0.0)), x_lo, x_hi, y);
}

double RepartitionKernel::mass_given(double b, double x_lo, double x_hi,
                                     double y) const {
  if (x_hi <= x_lo || b == 0.0) return 0.0;
  if (y <= 0.0)  // degenerate mother: all mass at content 0
    return (x_lo <= 0.0 && x_hi > 0.0) ? b : 0.0;
  switch (kind_) {
    case Kind::Uniform:
      return b * overlap(x_lo, x_hi, 0.0, y) / y;
    case Kind::TruncatedUniform:
      return b * overlap(x_lo, x_hi, eta_ * y, (1.0 - eta_) * y) /
             (y * (1.0 - 2.0 * eta_));
    case Kind::EqualMitosis: {
      double atom = 0.5 * y;
      return (x_lo <= atom && atom < x_hi) ? b : 0.0;
    }
    case Kind::TabulatedProfile:
      return b * profile_mass(std::clamp(x_lo / y, 0.0, 1.0),
                              std::clamp(x_hi / y, 0.0, 1.0));
  }
  return 0.0;
}

double RepartitionKernel::first_moment(const DivisionRate& rate, double a,
                                       double y) const {
  double b = rate(a, std::max(y, 0.0));
  if (b == 0.0 || y <= 0.0) return 0.0;
  if (kind_ == Kind::TabulatedProfile) {
    // integral of u rho(u) du for the piecewise-linear profile, times b y.
    double m = 0.0;
    for (std::size_t j = 0; j + 1 < prof_u_.size(); ++j) {
      double h = prof_u_[j + 1] - prof_u_[j];
      double r0 = prof_rho_[j], r1 = prof_rho_[j + 1];
      m += h * (prof_u_[j] * (2.0 * r0 + r1) + prof_u_[j + 1] * (r0 + 2.0 * r1)) / 6.0;
    }
    return b * y * m;
  }
  // Uniform, TruncatedUniform and the equal-mitosis atom all have mean y/2.
  return 0.5 * b * y;
}

double RepartitionKernel::daughter_integral(const DivisionRate& rate, double a,
                                            double y,
                                            const std::vector<double>& f_nodes,
                                            const std::vector<double>& f,
                                            const std::vector<double>& f_prefix) const {
  double b = rate(a, std::max(y, 0.0));
  if (b == 0.0) return 0.0;
  if (y <= 0.0) return b * f.front();
  switch (kind_) {
    case Kind::Uniform:
      return b / y * interp_linear(f_nodes, f_prefix, y);
    case Kind::TruncatedUniform: {
      double lo = interp_linear(f_nodes, f_prefix, eta_ * y);
      double hi = interp_linear(f_nodes, f_prefix, (1.0 - eta_) * y);
      return b * (hi - lo) / (y * (1.0 - 2.0 * eta_));
    }
    case Kind::EqualMitosis:
      return b * interp_linear(f_nodes, f, 0.5 * y);
    case Kind::TabulatedProfile: {
      double s = 0.0;
      for (std::size_t j = 0; j + 1 < f_nodes.size(); ++j) {
        double h = f_nodes[j + 1] - f_nodes[j];
        double d0 = density(rate, a, f_nodes[j], y);
        double d1 = density(rate, a, f_nodes[j + 1], y);
        s += 0.5 * h * (d0 * f[j] + d1 * f[j + 1]);
      }
      return s;
    }
  }
  return 0.0;
}

KernelMomentReport check_kernel_consistency(const RepartitionKernel& kernel,
                                            const DivisionRate& rate,
                                            const Grid& grid) {
  KernelMomentReport rep;
  for (std::size_t k = 0; k < grid.na(); ++k) {
    double a = grid.a[k];
    for (std::size_t j = 1; j < grid.nx(); ++j) {
      double y = grid.x[j];
      double b_total = rate(a, y);
      double q0 = kernel.mass(rate, a, 0.0, grid.x_max, y);
      double q1 = kernel.first_moment(rate, a, y);
      rep.max_zeroth_residual = std::max(rep.max_zeroth_residual, std::abs(q0 - b_total));
      rep.max_first_residual = std::max(rep.max_first_residual, std::abs(2.0 * q1 - y * b_total));
    }
  }
  return rep;
}

// ---------------------------------------------------------- TransitionRate

TransitionRate TransitionRate::constant(double level) {
  if (level < 0.0) throw config_error("transition rate must be nonnegative");
  TransitionRate t;
  t.p1_ = level;
  return t;
}

TransitionRate TransitionRate::hill_in_x(double a3, double a2, double gamma2, double a_bar) {
  if (a3 < 0.0 || a2 <= 0.0 || gamma2 <= 0.0 || a_bar < 0.0)
    throw config_error("hill transition rate: need A3 >= 0, A2 > 0, gamma2 > 0, Abar >= 0");
  TransitionRate t;
  t.kind_ = Kind::HillInX;
  t.p1_ = a3;
  t.p2_ = a2;
  t.p3_ = gamma2;
  t.p4_ = a_bar;
  return t;
}

double TransitionRate::operator()(double age, double x) const {
  if (kind_ == Kind::Constant) return p1_;
  double w = 1.0;
  if (p4_ > 0.0 && std::abs(age - p4_) < kBreakTol)
    w = 0.5;
  else if (age < p4_)
    return 0.0;
  double ag = std::pow(p2_, p3_);
  return w * p1_ * ag / (ag + std::pow(x, p3_));
}

double TransitionRate::sup() const { return p1_; }

double TransitionRate::mean_over(const Grid& grid) const {
  if (kind_ == Kind::Constant) return p1_;
  double num = 0.0, den = 0.0;
  for (std::size_t i = 0; i < grid.na(); ++i)
    for (std::size_t j = 0; j < grid.nx(); ++j) {
      double w = grid.wa[i] * grid.wx[j];
      num += w * (*this)(grid.a[i], grid.x[j]);
      den += w;
    }
  return den > 0.0 ? num / den : 0.0;
}

// ---------------------------------------------------------- TwoPhaseParams

void TwoPhaseParams::validate() const {
  if (d1 < 0.0 || d2 < 0.0) throw config_error("two-phase death rates must be nonnegative");
  if (!(alpha1 > alpha2 && alpha2 >= 0.0))
    throw config_error("recruitment requires alpha1 > alpha2 >= 0");
  if (theta <= 0.0) throw config_error("recruitment theta must be positive");
  if (hill_n <= 0.0) throw config_error("recruitment exponent n must be positive");
}

double TwoPhaseParams::recruitment(double n_val) const {
  if (n_val < 0.0) n_val = 0.0;
  double tn = std::pow(theta, hill_n);
  double nn = std::pow(n_val, hill_n);
  return (alpha1 * tn + alpha2 * nn) / (tn + nn);
}

}  // namespace cellpop
