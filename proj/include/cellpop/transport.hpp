#pragma once

#include <cstddef>
#include <vector>

#include "cellpop/coefficients.hpp"
#include "cellpop/eigensolver.hpp"
#include "cellpop/grid.hpp"

namespace cellpop {

// Convex entropy weight H with H(1) = 0.
class EntropyFunctional {
 public:
  static EntropyFunctional quadratic();  // (u-1)^2
  static EntropyFunctional absolute();   // |u-1|
  static EntropyFunctional tabulated(std::vector<double> u, std::vector<double> h);

  double operator()(double u) const;

 private:
  enum class Kind { Quadratic, Absolute, Tabulated };
  EntropyFunctional() = default;
  Kind kind_ = Kind::Quadratic;
  std::vector<double> u_, h_;
};

// One upwind step of the renewal transport equation with dt = da: exact age
// shift, conservative finite-volume flux in x, multiplicative survival sinks,
// and the birth integral refilling the a = 0 row.
class TransportStepper {
 public:
  TransportStepper(const ModelCoefficients& model, const Grid& grid,
                   double lambda0 = 0.0, bool renormalize = false);

  double dt() const { return grid_.da; }
  const Grid& grid() const { return grid_; }

  // Advances n in place by dt.
  void step(Field& n) const;

  // Birth row 2 int b(a,x,y) n(a,y) dy da evaluated on the current field.
  std::vector<double> renewal_row(const Field& n) const;

 private:
  ModelCoefficients model_;
  Grid grid_;
  double lamfac_ = 1.0;               // exp(-dt lambda0) when renormalized
  std::vector<double> surv_;          // exp(-dt B(a_mid, x_j)), rows 1..na-1
  std::vector<double> iface_;         // interface velocities, rows 1..na-1
  std::vector<double> birth_;         // B(a_i, y_k) on the nodes
  std::vector<double> frac_;          // daughter deposition shares, nx x nx
};

struct ObservableSeries {
  std::vector<double> t, mass, duality, entropy, distance;
};

struct Snapshot {
  double t = 0.0;
  Field n;
};

struct SimulationResult {
  ObservableSeries series;
  std::vector<Snapshot> snapshots;
  Field final_state;
  double dt = 0.0;
  double m0 = 0.0;  // conserved dual mass, int n0 phi
};

struct SimulateOptions {
  double horizon = 10.0;
  bool renormalize = true;
  EntropyFunctional entropy = EntropyFunctional::quadratic();
  std::vector<double> snapshot_times;
};

// H(t) = int N phi H(n/N) over the support of the reference density.
double gre_entropy(const Field& n, const EigenSolution& ref, const Grid& grid,
                   const EntropyFunctional& H);

// d(t) = int |n - m0 N| phi.
double phi_distance(const Field& n, const EigenSolution& ref, const Grid& grid,
                    double m0);

// Runs the (renormalized) evolution to the horizon, recording observables at
// every step and field snapshots at the requested times.
SimulationResult simulate(const Field& n0, const ModelCoefficients& model,
                          const EigenSolution& sol, const Grid& grid,
                          const SimulateOptions& opts);

}  // namespace cellpop
