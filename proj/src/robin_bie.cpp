#include "nep/robin_bie.hpp"

#include <Eigen/Dense>
#include <cmath>
#include <stdexcept>

#include "nep/asymptotics.hpp"

namespace nep::bie {

namespace {

// Coefficients of sum_j int_{G_j} N(x,y) phi_j(y) dsigma(y) against the node
// values phi[j][k], for x on window i at local coordinate tau. The
// self-window log kernel splits as ln(eps|t-s|) + smooth remainder; the
// |t-s| part uses the analytic-moment product weights.
void representation_row(const ProblemSpec& spec, const NeumannKernel& kernel,
                        const quad::GaussLegendre& gl,
                        const std::vector<std::vector<BoundaryPoint>>& pts,
                        const std::vector<std::vector<NeumannKernel::Source>>& sources,
                        int i, double tau, const BoundaryPoint& x, double* coeff) {
    const int N = spec.neck_count();
    const int nw = gl.size();
    const bool numeric = !kernel.exact();
    const std::vector<double> Wlog = quad::log_product_weights(gl, tau);
    NeumannKernel::BoundaryEval plan;
    if (numeric) plan = kernel.prepare_boundary_eval(x);
    for (int j = 0; j < N; ++j) {
        const double eps_j = spec.necks[j].epsilon;
        for (int k = 0; k < nw; ++k) {
            double c;
            if (j == i) {
                double val = std::log(eps_j) * gl.weights[k] + Wlog[k];
                const double dt = tau - gl.nodes[k];
                if (std::abs(dt) > 1e-14) {
                    const double chord = distance(x.p, pts[i][k].p);
                    val += gl.weights[k] * std::log(chord / (eps_j * std::abs(dt)));
                }
                c = -(eps_j / M_PI) * val;
            } else {
                const double chord = distance(x.p, pts[j][k].p);
                c = -(eps_j / M_PI) * gl.weights[k] * std::log(chord);
            }
            if (numeric)
                c += eps_j * gl.weights[k] * kernel.regular_part_at(plan, sources[j][k]);
            coeff[j * nw + k] = c;
        }
    }
}

std::vector<std::vector<BoundaryPoint>> window_nodes(const ProblemSpec& spec,
                                                     const quad::GaussLegendre& gl) {
    std::vector<std::vector<BoundaryPoint>> pts(spec.neck_count());
    for (int i = 0; i < spec.neck_count(); ++i) {
        pts[i].resize(gl.size());
        for (int m = 0; m < gl.size(); ++m) pts[i][m] = window_point(spec, i + 1, gl.nodes[m]);
    }
    return pts;
}

std::vector<std::vector<NeumannKernel::Source>> window_sources(
    const NeumannKernel& kernel, const std::vector<std::vector<BoundaryPoint>>& pts) {
    std::vector<std::vector<NeumannKernel::Source>> src;
    if (kernel.exact()) return src;
    src.resize(pts.size());
    for (size_t i = 0; i < pts.size(); ++i) {
        src[i].resize(pts[i].size());
        for (size_t m = 0; m < pts[i].size(); ++m) src[i][m] = kernel.prepare_source(pts[i][m]);
    }
    return src;
}

}  // namespace

DenseSystem assemble_collocation(const ProblemSpec& spec, const NeumannKernel& kernel,
                                 int resolution, bool parallel) {
    if (resolution < 16)
        throw std::invalid_argument("solve_robin: resolution must be >= 16 nodes per window");
    const quad::GaussLegendre gl = quad::gauss_legendre(resolution);
    const auto pts = window_nodes(spec, gl);
    const auto sources = window_sources(kernel, pts);
    const int N = spec.neck_count(), nw = resolution;
    const int dim = N * nw + 1;
    DenseSystem sys;
    sys.dim = dim;
    sys.A.assign(static_cast<size_t>(dim) * dim, 0.0);
    sys.b.assign(dim, 0.0);

    const int rows = N * nw;
#pragma omp parallel for schedule(dynamic) if (parallel)
    for (int row = 0; row < rows; ++row) {
        const int i = row / nw, m = row % nw;
        double* a = &sys.A[static_cast<size_t>(row) * dim];
        representation_row(spec, kernel, gl, pts, sources, i, gl.nodes[m], pts[i][m], a);
        a[i * nw + m] += spec.necks[i].length;
        a[dim - 1] = 1.0;
        const double L = spec.necks[i].length;
        sys.b[row] = 0.5 * L * L - kernel.g(pts[i][m]);
    }
    // compatibility row: total flux = -|O|
    double* last = &sys.A[static_cast<size_t>(dim - 1) * dim];
    for (int j = 0; j < N; ++j)
        for (int k = 0; k < nw; ++k) last[j * nw + k] = spec.necks[j].epsilon * gl.weights[k];
    sys.b[dim - 1] = -spec.head.area();
    return sys;
}

RobinSolution solve_robin(const ProblemSpec& spec, const NeumannKernel& kernel, int resolution,
                          bool parallel_assembly) {
    DenseSystem sys = assemble_collocation(spec, kernel, resolution, parallel_assembly);
    using RowMat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
    Eigen::Map<RowMat> A(sys.A.data(), sys.dim, sys.dim);
    Eigen::Map<Eigen::VectorXd> b(sys.b.data(), sys.dim);
    Eigen::PartialPivLU<Eigen::MatrixXd> lu(A);
    const double rc = lu.rcond();
    if (rc < 1e-12)
        throw std::runtime_error("solve_robin: collocation system ill-conditioned (cond ~ " +
                                 std::to_string(1.0 / std::max(rc, 1e-300)) + ")");
    const Eigen::VectorXd x = lu.solve(b);

    const quad::GaussLegendre gl = quad::gauss_legendre(resolution);
    BoundaryDensity dens;
    dens.nodes = gl.nodes;
    dens.gl_weights = gl.weights;
    dens.phi.resize(spec.neck_count());
    for (int i = 0; i < spec.neck_count(); ++i)
        dens.phi[i].assign(x.data() + i * resolution, x.data() + (i + 1) * resolution);
    dens.C_eps = x[sys.dim - 1];
    return RobinSolution(spec, kernel, std::move(dens));
}

RobinSolution::RobinSolution(ProblemSpec spec, NeumannKernel kernel, BoundaryDensity density)
    : spec_(std::move(spec)), kernel_(std::move(kernel)), density_(std::move(density)) {
    prepare();
}

void RobinSolution::prepare() {
    quad::GaussLegendre gl;
    gl.nodes = density_.nodes;
    gl.weights = density_.gl_weights;
    window_pts_ = window_nodes(spec_, gl);
    sources_ = window_sources(kernel_, window_pts_);
    residual_ = robin_residual(*this, spec_, 16);
}

double RobinSolution::evaluate(const Vec2& x) const {
    double guard = 0.0;
    for (const NeckSpec& n : spec_.necks) guard = std::max(guard, 10.0 * n.epsilon);
    for (int i = 0; i < spec_.neck_count(); ++i)
        if (distance(x, window_pts_[i][0].p) < guard ||
            distance(x, window_pts_[i].back().p) < guard)
            throw std::domain_error("evaluation point too close to window " + std::to_string(i + 1));

    double u = kernel_.g(x) + density_.C_eps;
    const int nw = static_cast<int>(density_.nodes.size());
    for (int j = 0; j < spec_.neck_count(); ++j) {
        const double eps = spec_.necks[j].epsilon;
        for (int k = 0; k < nw; ++k) {
            double Nxy = -std::log(distance(x, window_pts_[j][k].p)) / M_PI;
            if (!kernel_.exact()) Nxy += kernel_.regular_part_at(sources_[j][k], x);
            u += eps * density_.gl_weights[k] * Nxy * density_.phi[j][k];
        }
    }
    return u;
}

double RobinSolution::flux_integral(int i) const {
    if (i < 1 || i > spec_.neck_count())
        throw std::out_of_range("flux_integral: window index out of range");
    const double eps = spec_.necks[i - 1].epsilon;
    double s = 0.0;
    const int nw = static_cast<int>(density_.nodes.size());
    for (int k = 0; k < nw; ++k) s += density_.gl_weights[k] * density_.phi[i - 1][k];
    return eps * s;
}

double RobinSolution::density_at(int i, double t) const {
    quad::GaussLegendre gl;
    gl.nodes = density_.nodes;
    gl.weights = density_.gl_weights;
    return quad::interpolate_at(gl, density_.phi[i - 1], t);
}

double RobinSolution::evaluate_on_window(int i, double t) const {
    quad::GaussLegendre gl;
    gl.nodes = density_.nodes;
    gl.weights = density_.gl_weights;
    const BoundaryPoint x = window_point(spec_, i, t);
    const int nw = gl.size();
    std::vector<double> coeff(spec_.neck_count() * nw, 0.0);
    representation_row(spec_, kernel_, gl, window_pts_, sources_, i - 1, t, x, coeff.data());
    double u = kernel_.g(x) + density_.C_eps;
    for (int j = 0; j < spec_.neck_count(); ++j)
        for (int k = 0; k < nw; ++k) u += coeff[j * nw + k] * density_.phi[j][k];
    return u;
}

double robin_residual(const RobinSolution& sol, const ProblemSpec& spec, int n_check) {
    double worst = 0.0;
    for (int i = 1; i <= spec.neck_count(); ++i) {
        const double L = spec.necks[i - 1].length;
        for (int q = 0; q < n_check; ++q) {
            const double t = -1.0 + 2.0 * (q + 0.5) / n_check;
            const double phi = sol.density_at(i, t);
            const double u = sol.evaluate_on_window(i, t);
            worst = std::max(worst, std::abs(phi + u / L - 0.5 * L));
        }
    }
    return worst;
}

ComparisonRecord compare(const ProblemSpec& spec, const NeumannKernel& kernel, const Vec2& x,
                         int resolution) {
    ComparisonRecord rec;
    rec.u_asym = spec.neck_count() == 2 ? asym::mfpt_two(spec, kernel, x)
                                        : asym::mfpt_n(spec, kernel, x);
    rec.u_bie = solve_robin(spec, kernel, resolution).evaluate(x);
    rec.rel_err = std::abs(rec.u_bie - rec.u_asym) / std::abs(rec.u_bie);
    return rec;
}

}  // namespace nep::bie
