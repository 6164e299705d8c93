#include "nep/quadrature.hpp"

#include <cmath>
#include <stdexcept>

namespace nep::quad {

GaussLegendre gauss_legendre(int n) {
    if (n < 1) throw std::invalid_argument("gauss_legendre: n must be >= 1");
    GaussLegendre gl;
    gl.nodes.resize(n);
    gl.weights.resize(n);
    const int m = (n + 1) / 2;
    for (int i = 0; i < m; ++i) {
        // Chebyshev initial guess, Newton on P_n.
        double x = std::cos(M_PI * (i + 0.75) / (n + 0.5));
        double pp = 0.0;
        for (int it = 0; it < 100; ++it) {
            double p0 = 1.0, p1 = 0.0;
            for (int j = 0; j < n; ++j) {
                const double p2 = p1;
                p1 = p0;
                p0 = ((2.0 * j + 1.0) * x * p1 - j * p2) / (j + 1.0);
            }
            pp = n * (x * p0 - p1) / (x * x - 1.0);
            const double dx = p0 / pp;
            x -= dx;
            if (std::abs(dx) < 1e-15) break;
        }
        gl.nodes[i] = -x;
        gl.nodes[n - 1 - i] = x;
        gl.weights[i] = 2.0 / ((1.0 - x * x) * pp * pp);
        gl.weights[n - 1 - i] = gl.weights[i];
    }
    return gl;
}

double log_moment0(double t) {
    const double a = 1.0 + t, b = 1.0 - t;
    const double la = a > 0.0 ? a * std::log(a) : 0.0;
    const double lb = b > 0.0 ? b * std::log(b) : 0.0;
    return la + lb - 2.0;
}

std::vector<double> log_legendre_moments(int nmax, double tau) {
    std::vector<double> q(nmax + 1);
    q[0] = log_moment0(tau);
    if (nmax == 0) return q;
    // On-cut Legendre Q_n, forward recurrence; both solutions are bounded on
    // (-1,1) so this is stable for the orders used here.
    std::vector<double> Q(nmax + 2);
    Q[0] = 0.5 * std::log((1.0 + tau) / (1.0 - tau));
    Q[1] = tau * Q[0] - 1.0;
    for (int k = 1; k <= nmax; ++k)
        Q[k + 1] = ((2.0 * k + 1.0) * tau * Q[k] - k * Q[k - 1]) / (k + 1.0);
    for (int m = 1; m <= nmax; ++m)
        q[m] = 2.0 / (2.0 * m + 1.0) * (Q[m + 1] - Q[m - 1]);
    return q;
}

std::vector<double> log_product_weights(const GaussLegendre& gl, double tau) {
    const int n = gl.size();
    const std::vector<double> q = log_legendre_moments(n - 1, tau);
    // P_m at the nodes
    std::vector<std::vector<double>> P(n, std::vector<double>(n));
    for (int k = 0; k < n; ++k) {
        P[0][k] = 1.0;
        if (n > 1) P[1][k] = gl.nodes[k];
    }
    for (int m = 1; m + 1 < n; ++m)
        for (int k = 0; k < n; ++k)
            P[m + 1][k] = ((2.0 * m + 1.0) * gl.nodes[k] * P[m][k] - m * P[m - 1][k]) / (m + 1.0);
    // W_k = w_k/2 * sum_m (2m+1) P_m(s_k) q_m(tau): discrete Legendre transform
    // of the interpolant, integrated against the closed-form moments.
    std::vector<double> W(n);
    for (int k = 0; k < n; ++k) {
        double s = 0.0;
        for (int m = 0; m < n; ++m) s += (2.0 * m + 1.0) * P[m][k] * q[m];
        W[k] = 0.5 * gl.weights[k] * s;
    }
    return W;
}

std::vector<double> periodic_log_weights(int n, double t) {
    if (n < 2 || n % 2 != 0) throw std::invalid_argument("periodic_log_weights: n must be even");
    const int m = n / 2;
    std::vector<double> R(n);
    for (int j = 0; j < n; ++j) {
        const double d = t - 2.0 * M_PI * j / n;
        double s = 0.0;
        for (int k = 1; k < m; ++k) s += std::cos(k * d) / k;
        R[j] = -(4.0 * M_PI / n) * s - (2.0 * M_PI / (n * m)) * std::cos(m * d);
    }
    return R;
}

double interpolate_at(const GaussLegendre& gl, const std::vector<double>& values, double t) {
    const int n = gl.size();
    // barycentric weights for GL nodes: b_k proportional to (-1)^k sqrt((1-x_k^2) w_k)
    double num = 0.0, den = 0.0;
    for (int k = 0; k < n; ++k) {
        const double dx = t - gl.nodes[k];
        if (std::abs(dx) < 1e-14) return values[k];
        const double sign = (k % 2 == 0) ? 1.0 : -1.0;
        const double bk = sign * std::sqrt((1.0 - gl.nodes[k] * gl.nodes[k]) * gl.weights[k]);
        const double c = bk / dx;
        num += c * values[k];
        den += c;
    }
    return num / den;
}

}  // namespace nep::quad
