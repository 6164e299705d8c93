#pragma once

#include <memory>
#include <vector>

#include "nep/geometry.hpp"
#include "nep/neumann.hpp"
#include "nep/quadrature.hpp"

namespace nep::bie {

/// Discretized window flux density from the collocation solve: phi_i at
/// Gauss-Legendre nodes on each window plus the boundary average C_eps.
struct BoundaryDensity {
    std::vector<double> nodes;             // GL nodes t_k in (-1,1), shared per window
    std::vector<double> gl_weights;        // matching GL weights
    std::vector<std::vector<double>> phi;  // phi[i][k], physical du/dnu
    double C_eps = 0.0;
};

/// Solution of the Neumann-Robin model by collocation of the Green
/// representation on the windows. Immutable; the evaluator is thread-safe.
class RobinSolution {
public:
    RobinSolution(ProblemSpec spec, NeumannKernel kernel, BoundaryDensity density);

    const BoundaryDensity& density() const { return density_; }
    double C_eps() const { return density_.C_eps; }

    /// u_r(x) = g(x) + sum_i int N(x,y) phi_i(y) dsigma(y) + C_eps.
    /// x must be interior and away from the windows (the representation
    /// kernel is integrated by plain quadrature there).
    double evaluate(const Vec2& x) const;

    /// int_{window i} phi_i dsigma (1-based index).
    double flux_integral(int i) const;

    /// Max Robin residual recorded at construction (16 check points/window).
    double residual() const { return residual_; }

    /// phi_i at arbitrary local coordinate, interpolated through the nodes.
    double density_at(int i, double t) const;

    /// u_r at the boundary point of window i with local coordinate t; the
    /// self-window log singularity is integrated by product quadrature.
    double evaluate_on_window(int i, double t) const;

    const ProblemSpec& spec() const { return spec_; }

private:
    friend double robin_residual(const RobinSolution&, const ProblemSpec&, int);
    ProblemSpec spec_;
    NeumannKernel kernel_;
    BoundaryDensity density_;
    std::vector<std::vector<NeumannKernel::Source>> sources_;  // per window node
    std::vector<std::vector<BoundaryPoint>> window_pts_;
    double residual_ = 0.0;
    void prepare();
};

/// Collocation solve; resolution = Gauss-Legendre nodes per window (>= 16).
/// Assembly runs in parallel; `parallel_assembly = false` keeps the serial
/// reference path.
RobinSolution solve_robin(const ProblemSpec& spec, const NeumannKernel& kernel,
                          int resolution = 32, bool parallel_assembly = true);

/// Max |du/dnu + u/L_i - L_i/2| over n_check off-collocation points per
/// window.
double robin_residual(const RobinSolution& sol, const ProblemSpec& spec, int n_check);

struct ComparisonRecord {
    double u_asym = 0.0;
    double u_bie = 0.0;
    double rel_err = 0.0;
};

/// Asymptotic vs boundary-integral value at x; rel_err = |u_bie - u_asym| / u_bie.
ComparisonRecord compare(const ProblemSpec& spec, const NeumannKernel& kernel, const Vec2& x,
                         int resolution = 32);

/// Raw collocation matrix and rhs, exposed for the serial/parallel assembly
/// equivalence test and the benchmark.
struct DenseSystem {
    std::vector<double> A;  // row-major dim x dim
    std::vector<double> b;
    int dim = 0;
};
DenseSystem assemble_collocation(const ProblemSpec& spec, const NeumannKernel& kernel,
                                 int resolution, bool parallel);

}  // namespace nep::bie
