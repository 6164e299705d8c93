#include "nep/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "nep/quadrature.hpp"

namespace nep {

namespace {

constexpr double kTwoPi = 2.0 * M_PI;

double wrap_2pi(double t) {
    t = std::fmod(t, kTwoPi);
    return t < 0.0 ? t + kTwoPi : t;
}

/// Periodic cubic spline through uniformly spaced samples on [0, 2pi).
class PeriodicSpline {
public:
    PeriodicSpline() = default;
    explicit PeriodicSpline(std::vector<double> y) : y_(std::move(y)) {
        const int n = static_cast<int>(y_.size());
        h_ = kTwoPi / n;
        // Second derivatives m_i from the cyclic tridiagonal system
        //   (h/6) m_{i-1} + (2h/3) m_i + (h/6) m_{i+1} = d2_i / h
        std::vector<double> rhs(n);
        for (int i = 0; i < n; ++i) {
            const double ym = y_[(i + n - 1) % n], yp = y_[(i + 1) % n];
            rhs[i] = (yp - 2.0 * y_[i] + ym) / h_;
        }
        m_ = solve_cyclic(h_ / 6.0, 2.0 * h_ / 3.0, h_ / 6.0, rhs);
    }

    double value(double t) const {
        const auto [i, u] = locate(t);
        const int n = static_cast<int>(y_.size());
        const int j = (i + 1) % n;
        const double a = 1.0 - u;
        return a * y_[i] + u * y_[j] +
               ((a * a * a - a) * m_[i] + (u * u * u - u) * m_[j]) * h_ * h_ / 6.0;
    }

    double deriv(double t) const {
        const auto [i, u] = locate(t);
        const int n = static_cast<int>(y_.size());
        const int j = (i + 1) % n;
        const double a = 1.0 - u;
        return (y_[j] - y_[i]) / h_ +
               h_ * ((1.0 - 3.0 * a * a) * m_[i] + (3.0 * u * u - 1.0) * m_[j]) / 6.0;
    }

    double deriv2(double t) const {
        const auto [i, u] = locate(t);
        const int n = static_cast<int>(y_.size());
        return (1.0 - u) * m_[i] + u * m_[(i + 1) % n];
    }

private:
    std::pair<int, double> locate(double t) const {
        const int n = static_cast<int>(y_.size());
        t = wrap_2pi(t);
        int i = static_cast<int>(t / h_);
        if (i >= n) i = n - 1;
        return {i, (t - i * h_) / h_};
    }

    // Thomas algorithm plus Sherman-Morrison for the cyclic corner entries.
    static std::vector<double> solve_cyclic(double a, double b, double c,
                                            const std::vector<double>& rhs) {
        const int n = static_cast<int>(rhs.size());
        const double gamma = -b;
        std::vector<double> bb(n, b), u(n, 0.0);
        bb[0] -= gamma;
        bb[n - 1] -= a * c / gamma;
        u[0] = gamma;
        u[n - 1] = a;
        auto tri = [&](const std::vector<double>& d) {
            std::vector<double> x(n), cp(n);
            cp[0] = c / bb[0];
            x[0] = d[0] / bb[0];
            for (int i = 1; i < n; ++i) {
                const double m = bb[i] - a * cp[i - 1];
                cp[i] = c / m;
                x[i] = (d[i] - a * x[i - 1]) / m;
            }
            for (int i = n - 2; i >= 0; --i) x[i] -= cp[i] * x[i + 1];
            return x;
        };
        std::vector<double> x = tri(rhs);
        std::vector<double> z = tri(u);
        const double fact = (x[0] + c * x[n - 1] / gamma) /
                            (1.0 + z[0] + c * z[n - 1] / gamma);
        for (int i = 0; i < n; ++i) x[i] -= fact * z[i];
        return x;
    }

    std::vector<double> y_;
    std::vector<double> m_;
    double h_ = 0.0;
};

}  // namespace

struct HeadDomain::Impl {
    Kind kind = Kind::UnitDisk;
    std::function<Vec2(double)> f, df, ddf;
    double area = 0.0;
    double perimeter = 0.0;
    // cumulative arc length on a uniform theta grid, arc[k] = s(2 pi k / M)
    std::vector<double> arc;
    int M = 0;

    Vec2 pt(double t) const { return f(t); }

    double speed(double t) const { return df(t).norm(); }

    void build_tables(int segments) {
        M = segments;
        const quad::GaussLegendre gl = quad::gauss_legendre(8);
        arc.assign(M + 1, 0.0);
        double area2 = 0.0;
        const double h = kTwoPi / M;
        for (int k = 0; k < M; ++k) {
            const double t0 = k * h;
            double len = 0.0;
            for (int q = 0; q < gl.size(); ++q) {
                const double t = t0 + 0.5 * h * (gl.nodes[q] + 1.0);
                const Vec2 d = df(t);
                len += 0.5 * h * gl.weights[q] * d.norm();
                area2 += 0.5 * h * gl.weights[q] * f(t).cross(d);
            }
            arc[k + 1] = arc[k] + len;
        }
        perimeter = arc[M];
        area = 0.5 * area2;
    }

    double arc_length(double theta) const {
        if (kind == Kind::UnitDisk) return theta;
        const double t = wrap_2pi(theta);
        const double h = kTwoPi / M;
        int k = std::min(static_cast<int>(t / h), M - 1);
        const quad::GaussLegendre gl = quad::gauss_legendre(8);
        double s = arc[k];
        const double t0 = k * h, dt = t - t0;
        for (int q = 0; q < gl.size(); ++q)
            s += 0.5 * dt * gl.weights[q] * speed(t0 + 0.5 * dt * (gl.nodes[q] + 1.0));
        return s;
    }

    double theta_at_arc(double s) const {
        if (kind == Kind::UnitDisk) return wrap_2pi(s);
        s = std::fmod(s, perimeter);
        if (s < 0.0) s += perimeter;
        const auto it = std::upper_bound(arc.begin(), arc.end(), s);
        int k = std::max(0, static_cast<int>(it - arc.begin()) - 1);
        const double h = kTwoPi / M;
        double t = k * h + h * (s - arc[k]) / std::max(arc[k + 1] - arc[k], 1e-300);
        for (int it2 = 0; it2 < 8; ++it2) {
            const double d = (arc_length(t) - s) / speed(t);
            t -= d;
            if (std::abs(d) < 1e-15) break;
        }
        return wrap_2pi(t);
    }
};

HeadDomain HeadDomain::unit_disk() {
    auto impl = std::make_shared<Impl>();
    impl->kind = Kind::UnitDisk;
    impl->f = [](double t) { return Vec2{std::cos(t), std::sin(t)}; };
    impl->df = [](double t) { return Vec2{-std::sin(t), std::cos(t)}; };
    impl->ddf = [](double t) { return Vec2{-std::cos(t), -std::sin(t)}; };
    impl->build_tables(1024);
    impl->area = M_PI;
    impl->perimeter = kTwoPi;
    return HeadDomain(std::move(impl));
}

HeadDomain HeadDomain::from_points(const std::vector<Vec2>& pts) {
    if (pts.size() < 16)
        throw std::invalid_argument("HeadDomain::from_points: need at least 16 points");
    std::vector<double> xs(pts.size()), ys(pts.size());
    for (size_t i = 0; i < pts.size(); ++i) {
        xs[i] = pts[i].x;
        ys[i] = pts[i].y;
    }
    auto sx = std::make_shared<PeriodicSpline>(std::move(xs));
    auto sy = std::make_shared<PeriodicSpline>(std::move(ys));
    auto impl = std::make_shared<Impl>();
    impl->kind = Kind::Curve;
    impl->f = [sx, sy](double t) { return Vec2{sx->value(t), sy->value(t)}; };
    impl->df = [sx, sy](double t) { return Vec2{sx->deriv(t), sy->deriv(t)}; };
    impl->ddf = [sx, sy](double t) { return Vec2{sx->deriv2(t), sy->deriv2(t)}; };
    impl->build_tables(4096);
    if (impl->area < 0.0)
        throw std::invalid_argument("HeadDomain::from_points: points must run counterclockwise");
    return HeadDomain(std::move(impl));
}

HeadDomain HeadDomain::from_curve(std::function<Vec2(double)> f,
                                  std::function<Vec2(double)> df,
                                  std::function<Vec2(double)> ddf) {
    auto impl = std::make_shared<Impl>();
    impl->kind = Kind::Curve;
    impl->f = std::move(f);
    impl->df = std::move(df);
    impl->ddf = std::move(ddf);
    impl->build_tables(4096);
    if (impl->area < 0.0)
        throw std::invalid_argument("HeadDomain::from_curve: curve must run counterclockwise");
    return HeadDomain(std::move(impl));
}

HeadDomain::Kind HeadDomain::kind() const { return impl_->kind; }
bool HeadDomain::is_unit_disk() const { return impl_->kind == Kind::UnitDisk; }
Vec2 HeadDomain::point(double theta) const { return impl_->f(theta); }
Vec2 HeadDomain::derivative(double theta) const { return impl_->df(theta); }
Vec2 HeadDomain::second_derivative(double theta) const { return impl_->ddf(theta); }
double HeadDomain::speed(double theta) const { return impl_->speed(theta); }

Vec2 HeadDomain::outward_normal(double theta) const {
    const Vec2 d = impl_->df(theta);
    return Vec2{d.y, -d.x}.normalized();
}

double HeadDomain::curvature(double theta) const {
    const Vec2 d = impl_->df(theta);
    const Vec2 dd = impl_->ddf(theta);
    const double sp = d.norm();
    return d.cross(dd) / (sp * sp * sp);
}

double HeadDomain::area() const { return impl_->area; }
double HeadDomain::perimeter() const { return impl_->perimeter; }
double HeadDomain::arc_length(double theta) const { return impl_->arc_length(theta); }
double HeadDomain::theta_at_arc(double s) const { return impl_->theta_at_arc(s); }

BoundaryPoint HeadDomain::at_arc(double s) const {
    const double t = impl_->theta_at_arc(s);
    return BoundaryPoint{t, impl_->f(t)};
}

double HeadDomain::project(const Vec2& x) const {
    if (is_unit_disk()) return wrap_2pi(std::atan2(x.y, x.x));
    // coarse scan, then Newton on (x - gamma(t)) . gamma'(t) = 0
    const int M = 512;
    double best = 0.0, bd = std::numeric_limits<double>::max();
    for (int k = 0; k < M; ++k) {
        const double t = kTwoPi * k / M;
        const double d = (x - impl_->f(t)).norm_sq();
        if (d < bd) {
            bd = d;
            best = t;
        }
    }
    double t = best;
    for (int it = 0; it < 30; ++it) {
        const Vec2 r = x - impl_->f(t);
        const Vec2 d = impl_->df(t);
        const Vec2 dd = impl_->ddf(t);
        const double g = r.dot(d);
        const double gp = r.dot(dd) - d.dot(d);
        if (std::abs(gp) < 1e-300) break;
        const double step = g / gp;
        t -= step;
        if (std::abs(step) < 1e-14) break;
    }
    return wrap_2pi(t);
}

double HeadDomain::boundary_distance(const Vec2& x) const {
    if (is_unit_disk()) return std::abs(1.0 - x.norm());
    return (x - impl_->f(project(x))).norm();
}

namespace {

bool segments_intersect(const Vec2& a, const Vec2& b, const Vec2& c, const Vec2& d) {
    const auto orient = [](const Vec2& p, const Vec2& q, const Vec2& r) {
        return (q - p).cross(r - p);
    };
    const double o1 = orient(a, b, c), o2 = orient(a, b, d);
    const double o3 = orient(c, d, a), o4 = orient(c, d, b);
    return ((o1 > 0) != (o2 > 0)) && ((o3 > 0) != (o4 > 0));
}

}  // namespace

ValidationReport validate(const ProblemSpec& spec) {
    ValidationReport rep;
    const auto fail = [&rep](std::string msg) {
        rep.pass = false;
        rep.violations.push_back(std::move(msg));
    };
    const HeadDomain& head = spec.head;

    if ((head.point(0.0) - head.point(kTwoPi)).norm() > 1e-12)
        fail("curve is not closed: point(0) != point(2*pi)");

    // Simplicity and curvature proxy on a fine polyline.
    const int M = 2048;
    std::vector<Vec2> poly(M);
    for (int k = 0; k < M; ++k) poly[k] = head.point(kTwoPi * k / M);
    bool simple = true;
    for (int i = 0; i < M && simple; ++i) {
        for (int j = i + 2; j < M; ++j) {
            if (i == 0 && j == M - 1) continue;  // adjacent around the seam
            if (segments_intersect(poly[i], poly[(i + 1) % M], poly[j], poly[(j + 1) % M])) {
                simple = false;
                break;
            }
        }
    }
    if (!simple) fail("curve is not simple (self-intersection detected)");

    std::vector<double> kappa(M);
    bool finite = true;
    for (int k = 0; k < M; ++k) {
        const Vec2& a = poly[(k + M - 1) % M];
        const Vec2& b = poly[k];
        const Vec2& c = poly[(k + 1) % M];
        const double den = (b - a).norm() * (c - b).norm() * (c - a).norm();
        kappa[k] = den > 0.0 ? 2.0 * (b - a).cross(c - b) / den : 0.0;
        if (!std::isfinite(kappa[k])) finite = false;
    }
    double kmax = 0.0, jump = 0.0;
    for (int k = 0; k < M; ++k) {
        kmax = std::max(kmax, std::abs(kappa[k]));
        jump = std::max(jump, std::abs(kappa[(k + 1) % M] - kappa[k]));
    }
    if (!finite || kmax > 1e6)
        fail("discrete curvature is unbounded (boundary is not C2)");
    else if (jump > 0.25 * std::max(1.0, kmax))
        fail("discrete curvature jumps between neighboring samples (boundary is not C2)");

    // Area / perimeter agreement against an independent finer quadrature.
    {
        const quad::GaussLegendre gl = quad::gauss_legendre(10);
        const int S = 8192;
        const double h = kTwoPi / S;
        double per = 0.0, area2 = 0.0;
        for (int k = 0; k < S; ++k) {
            for (int q = 0; q < gl.size(); ++q) {
                const double t = k * h + 0.5 * h * (gl.nodes[q] + 1.0);
                const Vec2 d = head.derivative(t);
                per += 0.5 * h * gl.weights[q] * d.norm();
                area2 += 0.5 * h * gl.weights[q] * head.point(t).cross(d);
            }
        }
        if (std::abs(per - head.perimeter()) > 1e-8 * head.perimeter())
            fail("stored perimeter disagrees with the curve");
        if (std::abs(0.5 * area2 - head.area()) > 1e-8 * head.area())
            fail("stored area disagrees with the curve");
    }

    if (spec.necks.empty()) fail("problem needs at least one neck");
    double max_eps = 0.0;
    for (size_t i = 0; i < spec.necks.size(); ++i) {
        const NeckSpec& n = spec.necks[i];
        const std::string tag = "neck " + std::to_string(i + 1);
        if (!(n.epsilon > 0.0)) fail(tag + ": epsilon must be positive");
        if (!(n.length > 0.0)) fail(tag + ": length must be positive");
        if (n.epsilon > 0.0 && n.length > 0.0) {
            const double ratio = n.epsilon / n.length;
            if (ratio > 0.2)
                fail(tag + ": thinness violated (epsilon/length = " + std::to_string(ratio) +
                     " > 0.2)");
            else if (ratio > 0.1)
                rep.warnings.push_back(tag + ": epsilon/length = " + std::to_string(ratio) +
                                       " > 0.1, asymptotics may be inaccurate");
        }
        max_eps = std::max(max_eps, n.epsilon);
    }

    // Pairwise separation: arc distance >= eps_i + eps_j + 10 * max(eps).
    const double per = head.perimeter();
    for (size_t i = 0; i < spec.necks.size(); ++i) {
        for (size_t j = i + 1; j < spec.necks.size(); ++j) {
            double d = std::fmod(std::abs(spec.necks[i].s - spec.necks[j].s), per);
            d = std::min(d, per - d);
            const double need = spec.necks[i].epsilon + spec.necks[j].epsilon + 10.0 * max_eps;
            if (d < need)
                fail("windows " + std::to_string(i + 1) + " and " + std::to_string(j + 1) +
                     " overlap or are too close (arc distance " + std::to_string(d) +
                     " < " + std::to_string(need) + ")");
        }
    }
    return rep;
}

BoundaryPoint window_point(const ProblemSpec& spec, int i, double t) {
    if (i < 1 || i > spec.neck_count())
        throw std::out_of_range("window_point: neck index out of range");
    if (std::abs(t) > 1.0 + 1e-12)
        throw std::invalid_argument("window_point: |t| must be <= 1");
    const NeckSpec& n = spec.necks[i - 1];
    return spec.head.at_arc(n.s + n.epsilon * t);
}

BoundaryPoint window_center(const ProblemSpec& spec, int i) { return window_point(spec, i, 0.0); }

}  // namespace nep
