#pragma once

#include <cstddef>
#include <functional>
#include <vector>

#include "cellpop/characteristics.hpp"
#include "cellpop/coefficients.hpp"
#include "cellpop/grid.hpp"

namespace cellpop {

// Dense Nystrom discretization of the birth operator: the a-integral is
// folded into each entry, so m maps nodal values of the boundary profile to
// nodal values of the image, quadrature weights included.
struct KernelOperator {
  std::vector<double> nodes;    // collocation contents
  std::vector<double> weights;  // trapezoid weights on `nodes`
  std::vector<double> m;        // row-major, n x n
  double tail_bound = 0.0;      // estimate of the truncated a > A_max mass

  std::size_t n() const { return nodes.size(); }
  double at(std::size_t i, std::size_t j) const { return m[i * n() + j]; }
  double& at(std::size_t i, std::size_t j) { return m[i * n() + j]; }
  std::vector<double> apply(const std::vector<double>& v) const;
};

// Caches the characteristic traces once per (model, grid) so that repeated
// assemblies across lambda and epsilon only redo cheap arithmetic.
class OperatorAssembler {
 public:
  OperatorAssembler(const ModelCoefficients& model, const Grid& grid,
                    int threads = 1);

  const Grid& grid() const { return grid_; }
  const FlowSolver& flow() const { return flow_; }
  const ModelCoefficients& model() const { return model_; }
  bool dirac() const { return model_.kernel.is_dirac(); }
  // Collocation nodes of the eigenproblem: the x grid, or [0, x_M/2] for the
  // equal-mitosis variant.
  const std::vector<double>& nodes() const;
  const std::vector<double>& node_weights() const;
  const Trace& trace_at(std::size_t j) const { return traces_[j]; }

  KernelOperator assemble(double lambda, double eps) const;
  KernelOperator assemble_adjoint(double lambda, double eps) const;

  // Launch points for field reconstruction: the x nodes plus geometric
  // refinement toward the ends, where the flow map degenerates and uniform
  // launches leave the far field unsampled.
  const std::vector<double>& recon_launches() const { return recon_x_; }
  const Trace& recon_trace(std::size_t j) const { return recon_traces_[j]; }

  // Extend a Dirac boundary profile (on the [0,x_M/2] nodes) to the x grid.
  std::vector<double> extend_dirac_boundary(const std::vector<double>& g,
                                            double lambda) const;

 private:
  void assemble_standard(KernelOperator& op, double lambda, double eps) const;
  void assemble_dirac(KernelOperator& op, double lambda, double eps) const;
  void assemble_adjoint_standard(KernelOperator& op, double lambda, double eps) const;
  void assemble_adjoint_dirac(KernelOperator& op, double lambda, double eps) const;
  void parallel_columns(std::size_t n, const std::function<void(std::size_t)>& body) const;

  ModelCoefficients model_;
  Grid grid_;
  FlowSolver flow_;
  std::vector<Trace> traces_;        // launches at the x nodes
  std::vector<Trace> half_traces_;   // launches at the [0,x_M/2] nodes (Dirac)
  std::vector<double> recon_x_;
  std::vector<Trace> recon_traces_;
  std::vector<double> z_, wz_;       // Dirac collocation nodes/weights
  int threads_ = 1;
};

struct EigenPair {
  double mu = 0.0;
  std::vector<double> v;  // positive, unit x-integral
  int iterations = 0;
};

// Dominant eigenpair by power iteration (relative Rayleigh tolerance).
EigenPair leading_eigenpair(const KernelOperator& op, double tol = 1e-10,
                            std::size_t max_iter = 100000,
                            const std::vector<double>* start = nullptr);

double mu_of_lambda(const OperatorAssembler& assembler, double lambda, double eps);

struct ResidualReport {
  double r_B = 0.0;        // |lambda0 - integral of B N|
  double r_x = 0.0;        // |lambda0 int xN - int Gamma N|
  double r_a = 0.0;        // |lambda0 int aN + int aBN - 1|
  double r_adjoint = 0.0;  // |lambda1 - lambda0|
  std::vector<double> eta{0.25, 0.5, 0.75};
  std::vector<double> eta_moment;  // integral of e^{lambda0 eta a} N
  std::vector<double> eta_bound;   // 1/(1-eta)
  bool eta_ok = true;
};

struct EigenSolution {
  double lambda0 = 0.0;
  double lambda1 = 0.0;
  std::vector<double> boundary;   // N0 on the x nodes, unit integral
  Field density;                  // N(a,x), unit double integral
  Field adjoint;                  // phi(a,x), int N phi = 1
  double mu_at_zero = 0.0;        // mu(0, eps_min)
  std::vector<double> eps_schedule, lambda_eps;
  ResidualReport residuals;
};

// Bisection on mu(lambda, eps) = 1 per epsilon, then linear extrapolation of
// lambda(eps) to eps = 0. Throws subcritical_error when mu(0, eps) <= 1.
EigenSolution solve_eigenvalue(const ModelCoefficients& model, const Grid& grid,
                               std::vector<double> eps_schedule = {1e-2, 1e-3, 1e-4},
                               double tol = 1e-8, int threads = 1);

// Density from its boundary profile along characteristics, normalized to
// unit double integral.
Field reconstruct_density(const std::vector<double>& boundary,
                          const OperatorAssembler& assembler, double lambda0);

struct AdjointResult {
  double lambda1 = 0.0;
  std::vector<double> boundary;       // phi0 on the x nodes
  Field phi;                          // unnormalized phi(a,x)
  std::vector<double> lambda_eps;
};

AdjointResult solve_adjoint(const OperatorAssembler& assembler, double lambda0,
                            std::vector<double> eps_schedule, double tol);

ResidualReport eigen_diagnostics(const EigenSolution& sol,
                                 const ModelCoefficients& model, const Grid& grid);

}  // namespace cellpop
