#pragma once

#include <vector>

namespace nep::quad {

/// Gauss-Legendre rule on [-1,1].
struct GaussLegendre {
    std::vector<double> nodes;
    std::vector<double> weights;
    int size() const { return static_cast<int>(nodes.size()); }
};

/// Nodes and weights by Newton iteration on P_n; n up to a few hundred.
GaussLegendre gauss_legendre(int n);

/// L[1](t) = int_{-1}^{1} ln|t-s| ds = (1+t)ln(1+t) + (1-t)ln(1-t) - 2,
/// with 0*ln 0 = 0 at the endpoints.
double log_moment0(double t);

/// Legendre moments q_m(tau) = int_{-1}^{1} ln|tau-s| P_m(s) ds for m = 0..nmax,
/// tau strictly inside (-1,1). Closed form via on-cut Legendre Q functions:
/// q_m = 2/(2m+1) (Q_{m+1} - Q_{m-1}).
std::vector<double> log_legendre_moments(int nmax, double tau);

/// Product-integration weights W_k such that
///   int_{-1}^{1} ln|tau-s| f(s) ds  ~=  sum_k W_k f(s_k)
/// with s_k the Gauss-Legendre nodes of `gl`. Exact when f is a polynomial of
/// degree < gl.size(); spectrally accurate for smooth f.
std::vector<double> log_product_weights(const GaussLegendre& gl, double tau);

/// Quadrature weights R_j(t) for the periodic log kernel:
///   int_0^{2pi} ln(4 sin^2((t - s)/2)) F(s) ds  ~=  sum_j R_j(t) F(s_j),
/// s_j = 2 pi j / n uniform, n even. Valid for any t (also off-grid).
std::vector<double> periodic_log_weights(int n, double t);

/// Lagrange interpolation through the GL nodes (barycentric form).
double interpolate_at(const GaussLegendre& gl, const std::vector<double>& values, double t);

}  // namespace nep::quad
