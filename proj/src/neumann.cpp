#include "nep/neumann.hpp"

#include <Eigen/Dense>
#include <cmath>
#include <stdexcept>

#include "nep/quadrature.hpp"

namespace nep {

namespace {
constexpr double kTwoPi = 2.0 * M_PI;
}

double log_op_L1(double t) {
    if (std::abs(t) > 1.0 + 1e-12) throw std::invalid_argument("log_op_L1: |t| must be <= 1");
    return quad::log_moment0(std::clamp(t, -1.0, 1.0));
}

struct NeumannKernel::Impl {
    HeadDomain head;
    bool exact_disk = false;
    int n = 0;

    // Nystrom data (numerical mode)
    std::vector<double> theta, speed, kappa, w;  // w = trapezoid dsigma weight
    std::vector<Vec2> node, normal;
    Eigen::PartialPivLU<Eigen::MatrixXd> lu;
    Eigen::MatrixXd log_w;        // log_w(i,j): periodic log weights at grid node i
    std::vector<double> g_dens;   // density of the harmonic part of g, times |gamma'|
    double g_const = 0.0;
    Vec2 centroid;

    explicit Impl(HeadDomain h) : head(std::move(h)) {}

    // ---- numerical mode internals -------------------------------------

    // Per-node weights for int_0^{2pi} ln|x(s) - z| F(s) ds with z = x(tz) on
    // the curve: split off ln(2|sin((s-tz)/2)|), which has exact Fourier
    // weights; the remaining factor is smooth and handled by the trapezoid
    // rule.
    std::vector<double> boundary_log_plan(const BoundaryPoint& z) const {
        std::vector<double> W = quad::periodic_log_weights(n, z.theta);
        for (int j = 0; j < n; ++j) {
            const double dsin = 2.0 * std::abs(std::sin(0.5 * (theta[j] - z.theta)));
            const double chord = (node[j] - z.p).norm();
            const double sm = (dsin < 1e-13 || chord < 1e-15)
                                  ? std::log(speed[j])  // limit chord / (2 sin(d/2))
                                  : std::log(chord / dsin);
            W[j] = 0.5 * W[j] + (kTwoPi / n) * sm;
        }
        return W;
    }

    double boundary_log_integral(const std::vector<double>& F, const BoundaryPoint& z) const {
        const std::vector<double> W = boundary_log_plan(z);
        double acc = 0.0;
        for (int j = 0; j < n; ++j) acc += W[j] * F[j];
        return acc;
    }

    // Single layer S[psi](x) for interior x, F = psi * |gamma'| at nodes.
    // Near the boundary the trapezoid rule is refined on a trigonometric
    // interpolant of F until the node spacing resolves the distance.
    double single_layer_interior(const std::vector<double>& F, const Vec2& x) const {
        const double d = head.boundary_distance(x);
        const double h = kTwoPi / n;
        int factor = 1;
        if (d < 5.0 * h) factor = std::min(64, static_cast<int>(std::ceil(5.0 * h / std::max(d, 5.0 * h / 64.0))));
        double acc = 0.0;
        if (factor == 1) {
            for (int j = 0; j < n; ++j)
                acc += std::log((x - node[j]).norm()) * F[j];
            acc *= h;
        } else {
            const int m = n * factor;
            for (int j = 0; j < m; ++j) {
                const double t = kTwoPi * j / m;
                acc += std::log((x - head.point(t)).norm()) * trig_interp(F, t);
            }
            acc *= kTwoPi / m;
        }
        return -acc / kTwoPi;
    }

    double single_layer_boundary(const std::vector<double>& F, const BoundaryPoint& x) const {
        return -boundary_log_integral(F, x) / kTwoPi;
    }

    // Trigonometric interpolation of grid samples (n even).
    double trig_interp(const std::vector<double>& F, double t) const {
        const int m = n / 2;
        double acc = 0.0;
        for (int j = 0; j < n; ++j) {
            const double u = t - theta[j];
            if (std::abs(std::sin(0.5 * u)) < 1e-14) return F[j];
            double s = 1.0;
            for (int k = 1; k < m; ++k) s += 2.0 * std::cos(k * u);
            s += std::cos(m * u);
            acc += F[j] * s / n;
        }
        return acc;
    }

    // Interior trace of d/dnu of the single layer:
    // (1/2) psi(x_i) + sum_j K*(x_i, x_j) psi(x_j) w_j, dens = psi * |gamma'|.
    double normal_derivative_trace(const std::vector<double>& dens, int i) const {
        double acc = 0.5 * dens[i] / speed[i];
        for (int j = 0; j < n; ++j) {
            double Kij;
            if (i == j) {
                Kij = -kappa[i] / (4.0 * M_PI);
            } else {
                const Vec2 r = node[i] - node[j];
                Kij = -r.dot(normal[i]) / (2.0 * M_PI * r.norm_sq());
            }
            acc += Kij * dens[j] * (kTwoPi / n);
        }
        return acc;
    }

    // Neumann data of R(., z): -1/|dO| + (1/pi) <x-z, nu_x>/|x-z|^2.
    double neumann_data(int i, const BoundaryPoint& z) const {
        const Vec2 r = node[i] - z.p;
        const double rr = r.norm_sq();
        const double dip = rr < 1e-26 ? 0.5 * kappa[i] : r.dot(normal[i]) / rr;
        return -1.0 / head.perimeter() + dip / M_PI;
    }

    Source solve_source(const BoundaryPoint& z) const {
        Source src;
        src.z = z;
        if (exact_disk) return src;
        Eigen::VectorXd h(n);
        for (int i = 0; i < n; ++i) h[i] = neumann_data(i, z);
        const Eigen::VectorXd psi = lu.solve(h);
        src.density.resize(n);
        for (int i = 0; i < n; ++i) src.density[i] = psi[i] * speed[i];
        // Normalize so that int_dO N(., z) dsigma = 0:
        //   c = ( (1/pi) int ln|x-z| dsigma - int S[psi] dsigma ) / |dO|
        std::vector<double> sp_F(speed.begin(), speed.end());
        const double target = boundary_log_integral(sp_F, z) / M_PI;
        double mean_S = 0.0;
        for (int i = 0; i < n; ++i) {
            double Si = 0.0;
            for (int j = 0; j < n; ++j) Si += log_w(i, j) * src.density[j];
            mean_S += -Si / kTwoPi * w[i];
        }
        src.constant = (target - mean_S) / head.perimeter();
        return src;
    }

    // Precomputed combined boundary log weights: row i integrates
    // ln|x_i - x(s)| F(s) ds over the grid (smooth split + Fourier part).
    void build_log_weight_matrix() {
        log_w.resize(n, n);
        for (int i = 0; i < n; ++i) {
            const std::vector<double> R = quad::periodic_log_weights(n, theta[i]);
            for (int j = 0; j < n; ++j) {
                double sm;
                if (i == j) {
                    sm = std::log(speed[j]);
                } else {
                    const double dsin = 2.0 * std::abs(std::sin(0.5 * (theta[j] - theta[i])));
                    sm = std::log((node[j] - node[i]).norm() / dsin);
                }
                log_w(i, j) = (kTwoPi / n) * sm + 0.5 * R[j];
            }
        }
    }

    void build_numerical(int nodes) {
        n = nodes;
        theta.resize(n);
        speed.resize(n);
        kappa.resize(n);
        w.resize(n);
        node.resize(n);
        normal.resize(n);
        Vec2 cent{0.0, 0.0};
        for (int i = 0; i < n; ++i) {
            theta[i] = kTwoPi * i / n;
            node[i] = head.point(theta[i]);
            speed[i] = head.speed(theta[i]);
            normal[i] = head.outward_normal(theta[i]);
            kappa[i] = head.curvature(theta[i]);
            w[i] = kTwoPi / n * speed[i];
            cent += node[i] * w[i];
        }
        centroid = cent / head.perimeter();
        build_log_weight_matrix();

        // (1/2 I + K* + mean) psi = h, K*(x,y) = -(1/2pi) <x-y,nu_x>/|x-y|^2.
        Eigen::MatrixXd A = Eigen::MatrixXd::Zero(n, n);
        for (int i = 0; i < n; ++i) {
            for (int j = 0; j < n; ++j) {
                double Kij;
                if (i == j) {
                    Kij = -kappa[i] / (4.0 * M_PI);
                } else {
                    const Vec2 r = node[i] - node[j];
                    Kij = -r.dot(normal[i]) / (kTwoPi * r.norm_sq());
                }
                A(i, j) = Kij * w[j] + w[j] / head.perimeter();
            }
            A(i, i) += 0.5;
        }
        lu.compute(A);

        // Harmonic part of g = -|x-x0|^2/4 + h:
        //   dh/dnu = -|O|/|dO| + <x-x0, nu>/2, zero-mean compatible.
        Eigen::VectorXd hg(n);
        for (int i = 0; i < n; ++i)
            hg[i] = -head.area() / head.perimeter() + 0.5 * (node[i] - centroid).dot(normal[i]);
        const Eigen::VectorXd psi_g = lu.solve(hg);
        g_dens.resize(n);
        for (int i = 0; i < n; ++i) g_dens[i] = psi_g[i] * speed[i];
        // int_dO g dsigma = 0
        double mean = 0.0;
        for (int i = 0; i < n; ++i) {
            double Si = 0.0;
            for (int j = 0; j < n; ++j) Si += log_w(i, j) * g_dens[j];
            const double gi = -0.25 * (node[i] - centroid).norm_sq() - Si / kTwoPi;
            mean += gi * w[i];
        }
        g_const = -mean / head.perimeter();
    }
};

NeumannKernel NeumannKernel::exact_disk(const HeadDomain& head) {
    if (!head.is_unit_disk())
        throw std::invalid_argument("NeumannKernel::exact_disk: head is not the unit disk");
    auto impl = std::make_shared<Impl>(head);
    impl->exact_disk = true;
    return NeumannKernel(std::move(impl));
}

NeumannKernel NeumannKernel::numerical(const HeadDomain& head, int nodes) {
    if (nodes < 32 || nodes % 2 != 0)
        throw std::invalid_argument("NeumannKernel::numerical: nodes must be even and >= 32");
    auto impl = std::make_shared<Impl>(head);
    impl->exact_disk = false;
    impl->build_numerical(nodes);
    return NeumannKernel(std::move(impl));
}

NeumannKernel NeumannKernel::for_head(const HeadDomain& head, int nodes) {
    return head.is_unit_disk() ? exact_disk(head) : numerical(head, nodes);
}

bool NeumannKernel::exact() const { return impl_->exact_disk; }
const HeadDomain& NeumannKernel::head() const { return impl_->head; }

NeumannKernel::Source NeumannKernel::prepare_source(const BoundaryPoint& z) const {
    return impl_->solve_source(z);
}

double NeumannKernel::regular_part_at(const Source& src, const Vec2& x) const {
    if (impl_->exact_disk) return 0.0;
    return impl_->single_layer_interior(src.density, x) + src.constant;
}

double NeumannKernel::regular_part_at(const Source& src, const BoundaryPoint& x) const {
    if (impl_->exact_disk) return 0.0;
    return impl_->single_layer_boundary(src.density, x) + src.constant;
}

NeumannKernel::BoundaryEval NeumannKernel::prepare_boundary_eval(const BoundaryPoint& x) const {
    BoundaryEval plan;
    plan.x = x;
    if (!impl_->exact_disk) plan.weights = impl_->boundary_log_plan(x);
    return plan;
}

double NeumannKernel::regular_part_at(const BoundaryEval& plan, const Source& src) const {
    if (impl_->exact_disk) return 0.0;
    double acc = 0.0;
    for (int j = 0; j < impl_->n; ++j) acc += plan.weights[j] * src.density[j];
    return -acc / kTwoPi + src.constant;
}

double NeumannKernel::regular_part(const Vec2& x, const BoundaryPoint& z) const {
    if (impl_->exact_disk) return 0.0;
    return regular_part_at(prepare_source(z), x);
}

double NeumannKernel::regular_part(const BoundaryPoint& x, const BoundaryPoint& z) const {
    if (impl_->exact_disk) return 0.0;
    return regular_part_at(prepare_source(z), x);
}

double NeumannKernel::regular_part(const Vec2& x, const Vec2& z) const {
    const double tz = impl_->head.project(z);
    return regular_part(x, BoundaryPoint{tz, impl_->head.point(tz)});
}

double NeumannKernel::boundary_neumann(const Vec2& x, const BoundaryPoint& z) const {
    const double r = (x - z.p).norm();
    if (r < 1e-14)
        throw std::domain_error("boundary_neumann: x coincides with the source point");
    return -std::log(r) / M_PI + regular_part(x, z);
}

double NeumannKernel::boundary_neumann(const Vec2& x, const Vec2& z) const {
    const double tz = impl_->head.project(z);
    return boundary_neumann(x, BoundaryPoint{tz, impl_->head.point(tz)});
}

double NeumannKernel::boundary_neumann_at(const Source& src, const Vec2& x) const {
    const double r = (x - src.z.p).norm();
    if (r < 1e-14)
        throw std::domain_error("boundary_neumann: x coincides with the source point");
    return -std::log(r) / M_PI + regular_part_at(src, x);
}

double NeumannKernel::g(const Vec2& x) const {
    if (impl_->exact_disk) return 0.25 * (1.0 - x.norm_sq());
    return -0.25 * (x - impl_->centroid).norm_sq() +
           impl_->single_layer_interior(impl_->g_dens, x) + impl_->g_const;
}

double NeumannKernel::g(const BoundaryPoint& x) const {
    if (impl_->exact_disk) return 0.25 * (1.0 - x.p.norm_sq());
    return -0.25 * (x.p - impl_->centroid).norm_sq() +
           impl_->single_layer_boundary(impl_->g_dens, x) + impl_->g_const;
}

double NeumannKernel::flux_residual(const Source& src) const {
    if (impl_->exact_disk) return 0.0;
    const Impl& im = *impl_;
    double worst = 0.0;
    for (int i = 0; i < im.n; ++i) {
        const double dn = im.normal_derivative_trace(src.density, i);
        worst = std::max(worst, std::abs(dn - im.neumann_data(i, src.z)));
    }
    return worst;
}

double NeumannKernel::g_flux_residual() const {
    if (impl_->exact_disk) return 0.0;
    const Impl& im = *impl_;
    const double target = -im.head.area() / im.head.perimeter();
    double worst = 0.0;
    for (int i = 0; i < im.n; ++i) {
        // d/dnu of -|x-x0|^2/4 is -<x-x0,nu>/2
        const double quad_part = -0.5 * (im.node[i] - im.centroid).dot(im.normal[i]);
        const double dn = quad_part + im.normal_derivative_trace(im.g_dens, i);
        worst = std::max(worst, std::abs(dn - target));
    }
    return worst;
}

void NeumannKernel::dump_regular_part_csv(std::ostream& os, int nodes_x, int nodes_z) const {
    os << "theta_x,theta_z,value\n";
    for (int j = 0; j < nodes_z; ++j) {
        const double tz = kTwoPi * j / nodes_z;
        const BoundaryPoint z{tz, impl_->head.point(tz)};
        const Source src = prepare_source(z);
        for (int i = 0; i < nodes_x; ++i) {
            const double tx = kTwoPi * i / nodes_x;
            const BoundaryPoint x{tx, impl_->head.point(tx)};
            char buf[64];
            std::snprintf(buf, sizeof(buf), "%.17g,%.17g,%.17g\n", tx, tz,
                          regular_part_at(src, x));
            os << buf;
        }
    }
}

}  // namespace nep
