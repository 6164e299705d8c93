#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "nep/quadrature.hpp"

using namespace nep;

TEST_CASE("gauss-legendre integrates polynomials exactly") {
    const quad::GaussLegendre gl = quad::gauss_legendre(8);
    double s0 = 0.0, s1 = 0.0;
    for (int k = 0; k < gl.size(); ++k) {
        s0 += gl.weights[k];
        s1 += gl.weights[k] * std::pow(gl.nodes[k], 14);  // degree 14 < 2*8
    }
    CHECK(s0 == doctest::Approx(2.0).epsilon(1e-14));
    CHECK(s1 == doctest::Approx(2.0 / 15.0).epsilon(1e-13));
}

TEST_CASE("log moment closed form") {
    CHECK(quad::log_moment0(0.0) == doctest::Approx(-2.0).epsilon(1e-15));
    CHECK(quad::log_moment0(1.0) == doctest::Approx(2.0 * std::log(2.0) - 2.0).epsilon(1e-15));
    CHECK(quad::log_moment0(-1.0) == doctest::Approx(2.0 * std::log(2.0) - 2.0).epsilon(1e-15));
    // frozen values computed with an independent quadrature
    const auto q = quad::log_legendre_moments(1, 0.5);
    CHECK(q[0] == doctest::Approx(-1.738375928117726).epsilon(1e-13));
    CHECK(q[1] == doctest::Approx(-0.9119796082505411).epsilon(1e-13));
}

// brute-force oracle: graded log quadrature of ln|tau-s| f(s) over [-1,1]
static double log_integral_oracle(double tau, double (*f)(double)) {
    const quad::GaussLegendre gl = quad::gauss_legendre(16);
    double total = 0.0;
    for (int side = 0; side < 2; ++side) {
        const double span = side == 0 ? tau + 1.0 : 1.0 - tau;
        for (int lev = 0; lev < 48; ++lev) {
            const double hi = span * std::pow(0.5, lev);
            const double lo = lev == 47 ? 0.0 : span * std::pow(0.5, lev + 1);
            for (int k = 0; k < gl.size(); ++k) {
                const double u = 0.5 * (hi + lo) + 0.5 * (hi - lo) * gl.nodes[k];
                const double s = side == 0 ? tau - u : tau + u;
                total += 0.5 * (hi - lo) * gl.weights[k] * std::log(u) * f(s);
            }
        }
    }
    return total;
}

TEST_CASE("log product weights match a graded-quadrature oracle") {
    const quad::GaussLegendre gl = quad::gauss_legendre(24);
    const auto f = [](double s) { return std::cos(2.3 * s) + s * s * s - 0.5; };
    for (double tau : {0.0, 0.3, -0.77, 0.95}) {
        const std::vector<double> W = quad::log_product_weights(gl, tau);
        double approx = 0.0;
        for (int k = 0; k < gl.size(); ++k) approx += W[k] * f(gl.nodes[k]);
        const double exact = log_integral_oracle(tau, +[](double s) {
            return std::cos(2.3 * s) + s * s * s - 0.5;
        });
        CHECK(approx == doctest::Approx(exact).epsilon(1e-11));
    }
}

TEST_CASE("weights reproduce the constant moment") {
    const quad::GaussLegendre gl = quad::gauss_legendre(16);
    const std::vector<double> W = quad::log_product_weights(gl, 0.25);
    double s = 0.0;
    for (double w : W) s += w;
    CHECK(s == doctest::Approx(quad::log_moment0(0.25)).epsilon(1e-13));
}

TEST_CASE("periodic log weights integrate ln(4 sin^2) against smooth data") {
    // ln(4 sin^2(u/2)) = -2 sum_k cos(k u)/k, so the exact integral against
    // cos(m s) is -(2 pi / m) cos(m t).
    const int n = 64;
    for (double t : {0.0, 1.234}) {
        const std::vector<double> R = quad::periodic_log_weights(n, t);
        for (int m : {1, 3, 7}) {
            double acc = 0.0;
            for (int j = 0; j < n; ++j) acc += R[j] * std::cos(m * (2.0 * M_PI * j / n));
            CHECK(acc == doctest::Approx(-(2.0 * M_PI / m) * std::cos(m * t)).epsilon(1e-12));
        }
        // constant integrates to zero
        double c = 0.0;
        for (int j = 0; j < n; ++j) c += R[j];
        CHECK(std::abs(c) < 1e-12);
    }
}

TEST_CASE("barycentric interpolation through GL nodes") {
    const quad::GaussLegendre gl = quad::gauss_legendre(12);
    // exactness on a polynomial of degree n-1
    std::vector<double> pv(gl.size());
    const auto poly = [](double x) {
        double p = 0.3;
        for (int d = 1; d <= 11; ++d) p = p * x + (d % 3 - 1) * 0.7;
        return p;
    };
    for (int k = 0; k < gl.size(); ++k) pv[k] = poly(gl.nodes[k]);
    for (double t : {-0.95, -0.3, 0.11, 0.77})
        CHECK(quad::interpolate_at(gl, pv, t) == doctest::Approx(poly(t)).epsilon(1e-12));
    // smooth non-polynomial: truncation-level accuracy
    std::vector<double> vals(gl.size());
    const auto f = [](double x) { return std::exp(x) * std::sin(3.0 * x); };
    for (int k = 0; k < gl.size(); ++k) vals[k] = f(gl.nodes[k]);
    for (double t : {-0.9, -0.3, 0.11, 0.77})
        CHECK(quad::interpolate_at(gl, vals, t) == doctest::Approx(f(t)).epsilon(1e-5));
    CHECK(quad::interpolate_at(gl, vals, gl.nodes[5]) == doctest::Approx(vals[5]).epsilon(1e-15));
}
