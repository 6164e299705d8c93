#pragma once

#include <string>
#include <vector>

#include "nep/geometry.hpp"
#include "nep/neumann.hpp"

namespace nep::asym {

/// Robin coefficients (alpha, beta) = (1/L, L/2) of the reduced neck
/// condition du/dnu + alpha u = beta on the window.
std::pair<double, double> robin_coefficients(double neck_length);

/// Dimensionless geometry factors of the logarithmic terms.
/// F_i = (eps_i/L_i) / sum_k (eps_k/L_k);  T_ij = (eps_i eps_j / L_i L_j) / (sum_k eps_k/L_k)^2.
struct GeometryFactors {
    std::vector<std::vector<double>> T;  // symmetric, T[i][i] unused
    std::vector<double> F;
};

GeometryFactors geometry_factors(const ProblemSpec& spec);

/// Two-neck pair factor in the closed Theorem form
/// T = e1 e2 / ((L2/L1) e1^2 + 2 e1 e2 + (L1/L2) e2^2); equals T[0][1].
double pair_factor_two(double L1, double L2, double eps1, double eps2);

/// The (N+1)x(N+1) interaction system for the flux constants C_i and the
/// boundary average C_eps. Diagonal L_i/(2 eps_i) - ln(eps_i)/pi
/// - (2 ln 2 - 3)/(2 pi) + r_ii; off-diagonal -ln|s_i - s_j|/pi + r_ij with
/// chord distances; bordered by the compatibility row/column.
struct AssembledSystem {
    std::vector<std::vector<double>> K;  // (N+1) x (N+1)
    std::vector<double> rhs;             // rhs_i = L_i^2/2 - g(s_i); rhs_N = -|O|
};

AssembledSystem assemble_system(const ProblemSpec& spec, const NeumannKernel& kernel);

struct FluxConstants {
    std::vector<double> C;  // per window, each negative, sum = -|O|
    double C_eps = 0.0;
};

/// Dense direct solve; throws on (near-)singular systems.
FluxConstants solve_constants(const AssembledSystem& sys);

/// The O(1) constant of the two-neck expansion (needs N = 2).
double constant_C(const ProblemSpec& spec, const NeumannKernel& kernel,
                  const GeometryFactors& factors);

/// Q(x) = g(x) - w1 |O| N(x,s1) - w2 |O| N(x,s2) with the leading flux
/// weights w_i. Requires dist(x, each window center) > 10 max(eps).
double q_term(const ProblemSpec& spec, const NeumannKernel& kernel, const Vec2& x);

/// Theorem expansion for two necks: leading + log + C + Q(x).
double mfpt_two(const ProblemSpec& spec, const NeumannKernel& kernel, const Vec2& x);

/// Closed disk form for two equal necks (length L, half-width eps, window
/// centers at arc positions s1, s2 on the unit circle).
double mfpt_two_disk_symmetric(double L, double eps, double s1, double s2, const Vec2& x);

/// N-neck expansion. Identical necks (same L and eps) get the full O(1)
/// constant; heterogeneous necks with N != 2 get leading + log terms only.
double mfpt_n(const ProblemSpec& spec, const NeumannKernel& kernel, const Vec2& x);

/// Leading-order MFPT |O| / (2 sum eps_i/L_i); no kernel needed. Used for
/// step budgets and quick scale estimates.
double mfpt_leading(const ProblemSpec& spec);

/// Window flux density phi_i(t), t in (-1,1):
/// C_i/(2 eps_i) - C_i (2 ln 2 - 3)/(2 pi L_i) + C_i/(2 pi L_i) L[1](t).
double flux_density(const FluxConstants& fc, const ProblemSpec& spec, int i, double t);

/// Bundle of the solved expansion for one problem.
struct AsymptoticSolution {
    FluxConstants constants;
    GeometryFactors factors;
    double C_const = 0.0;       // NaN when not available (heterogeneous N > 2)
    std::string error_order;
    ProblemSpec spec;
    NeumannKernel kernel;

    double evaluate(const Vec2& x) const;
};

AsymptoticSolution solve_asymptotic(const ProblemSpec& spec, const NeumannKernel& kernel);

/// Data-parallel evaluation of the expansion over many points.
std::vector<double> mfpt_batch(const ProblemSpec& spec, const NeumannKernel& kernel,
                               const std::vector<Vec2>& pts);

}  // namespace nep::asym
