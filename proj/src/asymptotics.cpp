#include "nep/asymptotics.hpp"

#include <Eigen/Dense>
#include <cmath>
#include <limits>
#include <stdexcept>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace nep::asym {

namespace {

const double kLog2 = std::log(2.0);

double max_epsilon(const ProblemSpec& spec) {
    double m = 0.0;
    for (const NeckSpec& n : spec.necks) m = std::max(m, n.epsilon);
    return m;
}

// c0 convention: points strictly closer than 10 max(eps) to a window center
// are rejected (equality allowed, so the Table-3 eps = 0.1 sweep can still
// evaluate at the disk center).
void check_eval_guard(const ProblemSpec& spec, const Vec2& x) {
    const double guard = 10.0 * max_epsilon(spec);
    for (int i = 1; i <= spec.neck_count(); ++i) {
        if (distance(x, window_center(spec, i).p) < guard)
            throw std::domain_error("evaluation point too close to window " + std::to_string(i));
    }
}

bool identical_necks(const ProblemSpec& spec) {
    const NeckSpec& a = spec.necks.front();
    for (const NeckSpec& n : spec.necks) {
        if (std::abs(n.epsilon - a.epsilon) > 1e-12 * a.epsilon) return false;
        if (std::abs(n.length - a.length) > 1e-12 * a.length) return false;
    }
    return true;
}

}  // namespace

std::pair<double, double> robin_coefficients(double neck_length) {
    if (!(neck_length > 0.0))
        throw std::invalid_argument("robin_coefficients: neck length must be positive");
    return {1.0 / neck_length, 0.5 * neck_length};
}

GeometryFactors geometry_factors(const ProblemSpec& spec) {
    const int N = spec.neck_count();
    double denom = 0.0;
    for (const NeckSpec& n : spec.necks) denom += n.epsilon / n.length;
    GeometryFactors gf;
    gf.F.resize(N);
    gf.T.assign(N, std::vector<double>(N, 0.0));
    for (int i = 0; i < N; ++i) {
        gf.F[i] = (spec.necks[i].epsilon / spec.necks[i].length) / denom;
        for (int j = 0; j < N; ++j)
            gf.T[i][j] = (spec.necks[i].epsilon * spec.necks[j].epsilon /
                          (spec.necks[i].length * spec.necks[j].length)) /
                         (denom * denom);
    }
    return gf;
}

double pair_factor_two(double L1, double L2, double eps1, double eps2) {
    return eps1 * eps2 /
           ((L2 / L1) * eps1 * eps1 + 2.0 * eps1 * eps2 + (L1 / L2) * eps2 * eps2);
}

AssembledSystem assemble_system(const ProblemSpec& spec, const NeumannKernel& kernel) {
    const int N = spec.neck_count();
    AssembledSystem sys;
    sys.K.assign(N + 1, std::vector<double>(N + 1, 0.0));
    sys.rhs.assign(N + 1, 0.0);

    std::vector<BoundaryPoint> centers(N);
    std::vector<NeumannKernel::Source> src(N);
    for (int i = 0; i < N; ++i) {
        centers[i] = window_center(spec, i + 1);
        src[i] = kernel.prepare_source(centers[i]);
    }
    for (int i = 0; i < N; ++i) {
        const NeckSpec& n = spec.necks[i];
        const double r_ii = kernel.regular_part_at(src[i], centers[i]);
        sys.K[i][i] = n.length / (2.0 * n.epsilon) - std::log(n.epsilon) / M_PI -
                      (2.0 * kLog2 - 3.0) / (2.0 * M_PI) + r_ii;
        for (int j = i + 1; j < N; ++j) {
            const double chord = distance(centers[i].p, centers[j].p);
            const double r_ij = kernel.regular_part_at(src[j], centers[i]);
            sys.K[i][j] = sys.K[j][i] = -std::log(chord) / M_PI + r_ij;
        }
        sys.K[i][N] = sys.K[N][i] = 1.0;
        sys.rhs[i] = 0.5 * n.length * n.length - kernel.g(centers[i]);
    }
    sys.rhs[N] = -spec.head.area();
    return sys;
}

FluxConstants solve_constants(const AssembledSystem& sys) {
    const int dim = static_cast<int>(sys.rhs.size());
    Eigen::MatrixXd K(dim, dim);
    Eigen::VectorXd b(dim);
    for (int i = 0; i < dim; ++i) {
        b[i] = sys.rhs[i];
        for (int j = 0; j < dim; ++j) K(i, j) = sys.K[i][j];
    }
    Eigen::PartialPivLU<Eigen::MatrixXd> lu(K);
    if (lu.rcond() < 1e-14)
        throw std::runtime_error("solve_constants: interaction system is singular");
    const Eigen::VectorXd x = lu.solve(b);
    FluxConstants fc;
    fc.C.assign(x.data(), x.data() + dim - 1);
    fc.C_eps = x[dim - 1];
    return fc;
}

double constant_C(const ProblemSpec& spec, const NeumannKernel& kernel,
                  const GeometryFactors& factors) {
    if (spec.neck_count() != 2)
        throw std::invalid_argument("constant_C: defined for two necks");
    const NeckSpec& n1 = spec.necks[0];
    const NeckSpec& n2 = spec.necks[1];
    const BoundaryPoint s1 = window_center(spec, 1);
    const BoundaryPoint s2 = window_center(spec, 2);
    const auto src1 = kernel.prepare_source(s1);
    const auto src2 = kernel.prepare_source(s2);
    const double r11 = kernel.regular_part_at(src1, s1);
    const double r22 = kernel.regular_part_at(src2, s2);
    const double r12 = kernel.regular_part_at(src2, s1);
    const double area = spec.head.area();
    const double chord = distance(s1.p, s2.p);
    const double T = factors.T[0][1];
    // Full double sum over i,j: the cross term r12 enters twice.
    const double rsum = r11 + r22 - 2.0 * r12;
    double C = -(rsum + (2.0 * std::log(chord) - 2.0 * kLog2 + 3.0) / M_PI) * T * area;
    C += area * factors.F[0] * (-(2.0 * kLog2 - 3.0) / (2.0 * M_PI) + r11) +
         area * factors.F[1] * (-(2.0 * kLog2 - 3.0) / (2.0 * M_PI) + r22);
    C += factors.F[0] * (0.5 * n1.length * n1.length - kernel.g(s1)) +
         factors.F[1] * (0.5 * n2.length * n2.length - kernel.g(s2));
    return C;
}

double q_term(const ProblemSpec& spec, const NeumannKernel& kernel, const Vec2& x) {
    if (spec.neck_count() != 2)
        throw std::invalid_argument("q_term: defined for two necks");
    check_eval_guard(spec, x);
    const NeckSpec& n1 = spec.necks[0];
    const NeckSpec& n2 = spec.necks[1];
    const double denom = n2.epsilon * n1.length + n1.epsilon * n2.length;
    const double w1 = n1.epsilon * n2.length / denom;
    const double w2 = n2.epsilon * n1.length / denom;
    const double area = spec.head.area();
    return kernel.g(x) - w1 * area * kernel.boundary_neumann(x, window_center(spec, 1)) -
           w2 * area * kernel.boundary_neumann(x, window_center(spec, 2));
}

double mfpt_two(const ProblemSpec& spec, const NeumannKernel& kernel, const Vec2& x) {
    if (spec.neck_count() != 2)
        throw std::invalid_argument("mfpt_two: defined for two necks");
    const NeckSpec& n1 = spec.necks[0];
    const NeckSpec& n2 = spec.necks[1];
    const GeometryFactors gf = geometry_factors(spec);
    const double area = spec.head.area();
    const double lead = area / (2.0 * (n1.epsilon / n1.length + n2.epsilon / n2.length));
    const double T = gf.T[0][1];
    const double logt = area / M_PI *
                        ((T - gf.F[0]) * std::log(n1.epsilon) + (T - gf.F[1]) * std::log(n2.epsilon));
    return lead + logt + constant_C(spec, kernel, gf) + q_term(spec, kernel, x);
}

double mfpt_two_disk_symmetric(double L, double eps, double s1, double s2, const Vec2& x) {
    const double area = M_PI;
    const Vec2 p1{std::cos(s1), std::sin(s1)};
    const Vec2 p2{std::cos(s2), std::sin(s2)};
    const double chord = distance(p1, p2);
    double u = area * L / (4.0 * eps) - area / (2.0 * M_PI) * std::log(eps) -
               area / (4.0 * M_PI) * (2.0 * kLog2 - 3.0) + 0.5 * L * L -
               area / (2.0 * M_PI) * std::log(chord) + 0.25 * (1.0 - x.norm_sq());
    // N(x, s_i) = -(1/pi) ln|x - s_i| on the disk
    u -= 0.5 * area * (-(std::log(distance(x, p1)) + std::log(distance(x, p2))) / M_PI);
    return u;
}

double mfpt_leading(const ProblemSpec& spec) {
    double denom = 0.0;
    for (const NeckSpec& n : spec.necks) denom += n.epsilon / n.length;
    return spec.head.area() / (2.0 * denom);
}

double mfpt_n(const ProblemSpec& spec, const NeumannKernel& kernel, const Vec2& x) {
    const int N = spec.neck_count();
    if (N < 1) throw std::invalid_argument("mfpt_n: need at least one neck");
    check_eval_guard(spec, x);
    const double area = spec.head.area();

    if (!identical_necks(spec)) {
        // Heterogeneous necks: leading + log terms only (error order O(1)).
        const GeometryFactors gf = geometry_factors(spec);
        double logt = 0.0;
        for (int i = 0; i < N; ++i) {
            for (int j = i + 1; j < N; ++j)
                logt += gf.T[i][j] * std::log(spec.necks[i].epsilon * spec.necks[j].epsilon);
            logt -= gf.F[i] * std::log(spec.necks[i].epsilon);
        }
        return mfpt_leading(spec) + area / M_PI * logt;
    }

    const double L = spec.necks.front().length;
    const double eps = spec.necks.front().epsilon;
    std::vector<BoundaryPoint> centers(N);
    std::vector<NeumannKernel::Source> src(N);
    for (int i = 0; i < N; ++i) {
        centers[i] = window_center(spec, i + 1);
        src[i] = kernel.prepare_source(centers[i]);
    }
    double u = area * L / (2.0 * N * eps) - area / (M_PI * N) * std::log(eps) -
               area * (2.0 * kLog2 - 3.0) / (2.0 * M_PI * N) + 0.5 * L * L;
    double pair_log = 0.0, r_diag = 0.0, r_cross = 0.0, g_centers = 0.0, n_sum = 0.0;
    for (int i = 0; i < N; ++i) {
        g_centers += kernel.g(centers[i]);
        r_diag += kernel.regular_part_at(src[i], centers[i]);
        n_sum += kernel.boundary_neumann_at(src[i], x);
        for (int j = i + 1; j < N; ++j) {
            pair_log += std::log(distance(centers[i].p, centers[j].p));
            r_cross += kernel.regular_part_at(src[j], centers[i]);
        }
    }
    u += -2.0 * area / (M_PI * N * N) * pair_log;
    u += kernel.g(x) - g_centers / N - area / N * n_sum;
    u += area / (N * N) * r_diag + 2.0 * area / (N * N) * r_cross;
    return u;
}

double flux_density(const FluxConstants& fc, const ProblemSpec& spec, int i, double t) {
    if (i < 1 || i > spec.neck_count())
        throw std::out_of_range("flux_density: neck index out of range");
    if (std::abs(t) >= 1.0)
        throw std::invalid_argument("flux_density: t must lie strictly inside (-1,1)");
    const NeckSpec& n = spec.necks[i - 1];
    const double Ci = fc.C[i - 1];
    return Ci / (2.0 * n.epsilon) - Ci * (2.0 * kLog2 - 3.0) / (2.0 * M_PI * n.length) +
           Ci / (2.0 * M_PI * n.length) * log_op_L1(t);
}

double AsymptoticSolution::evaluate(const Vec2& x) const {
    if (spec.neck_count() == 2) return mfpt_two(spec, kernel, x);
    return mfpt_n(spec, kernel, x);
}

AsymptoticSolution solve_asymptotic(const ProblemSpec& spec, const NeumannKernel& kernel) {
    AsymptoticSolution sol{.constants = solve_constants(assemble_system(spec, kernel)),
                           .factors = geometry_factors(spec),
                           .C_const = std::numeric_limits<double>::quiet_NaN(),
                           .error_order = "",
                           .spec = spec,
                           .kernel = kernel};
    const int N = spec.neck_count();
    if (N == 2) {
        sol.C_const = constant_C(spec, kernel, sol.factors);
        sol.error_order = "O(sqrt(eps1^2+eps2^2) ln(eps1) ln(eps2))";
    } else if (identical_necks(spec)) {
        sol.error_order = "O(eps ln^2 eps)";
    } else {
        sol.error_order = "O(1)";
    }
    return sol;
}

std::vector<double> mfpt_batch(const ProblemSpec& spec, const NeumannKernel& kernel,
                               const std::vector<Vec2>& pts) {
    std::vector<double> out(pts.size());
    const int n = static_cast<int>(pts.size());
#pragma omp parallel for schedule(dynamic)
    for (int k = 0; k < n; ++k) {
        out[k] = spec.neck_count() == 2 ? mfpt_two(spec, kernel, pts[k])
                                        : mfpt_n(spec, kernel, pts[k]);
    }
    return out;
}

}  // namespace nep::asym
