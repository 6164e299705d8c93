#pragma once

#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "nep/vec2.hpp"

namespace nep {

/// Point on the head boundary, carrying both the curve parameter and the
/// ambient coordinates. The parameter avoids point->parameter projections in
/// the kernel code paths that need it.
struct BoundaryPoint {
    double theta = 0.0;
    Vec2 p;
};

/// Smooth closed head boundary. Immutable after construction; cheap to copy
/// (shared internals) and safe to share across threads.
class HeadDomain {
public:
    enum class Kind { UnitDisk, Curve };

    static HeadDomain unit_disk();
    /// Closed curve through the given sample points (periodic cubic
    /// interpolation, uniform parameter). At least 16 points.
    static HeadDomain from_points(const std::vector<Vec2>& pts);
    /// Analytic parametrization on [0, 2pi) with first and second derivatives.
    static HeadDomain from_curve(std::function<Vec2(double)> f,
                                 std::function<Vec2(double)> df,
                                 std::function<Vec2(double)> ddf);

    Kind kind() const;
    bool is_unit_disk() const;

    Vec2 point(double theta) const;
    Vec2 derivative(double theta) const;
    Vec2 second_derivative(double theta) const;
    /// |gamma'(theta)|
    double speed(double theta) const;
    /// Unit outward normal (counterclockwise orientation assumed).
    Vec2 outward_normal(double theta) const;
    /// Signed curvature, positive where the domain is locally convex.
    double curvature(double theta) const;

    double area() const;
    double perimeter() const;

    /// Arc length from theta = 0, monotone in theta.
    double arc_length(double theta) const;
    /// Inverse of arc_length; s is taken modulo the perimeter.
    double theta_at_arc(double s) const;
    BoundaryPoint at_arc(double s) const;

    /// Distance from x to the boundary (nonnegative; approximate for curves,
    /// exact for the disk). Used by evaluation-guard and quadrature logic.
    double boundary_distance(const Vec2& x) const;
    /// Nearest boundary parameter to x.
    double project(const Vec2& x) const;

private:
    struct Impl;
    std::shared_ptr<const Impl> impl_;
    explicit HeadDomain(std::shared_ptr<const Impl> impl) : impl_(std::move(impl)) {}
};

/// One neck: window center at arc-length s on the head boundary, window
/// half-width epsilon, neck length.
struct NeckSpec {
    double s = 0.0;
    double epsilon = 0.0;
    double length = 0.0;
};

struct ProblemSpec {
    HeadDomain head;
    std::vector<NeckSpec> necks;

    int neck_count() const { return static_cast<int>(necks.size()); }
};

struct ValidationReport {
    bool pass = true;
    std::vector<std::string> violations;
    std::vector<std::string> warnings;
};

/// Checks all spec invariants (curve closure/simplicity/curvature, neck
/// positivity and thinness, pairwise window separation). Never throws.
ValidationReport validate(const ProblemSpec& spec);

/// Boundary point at arc length s_i + epsilon_i * t, t in [-1,1];
/// t = 0 is the window center. Neck index is 1-based per the problem
/// statement convention used throughout.
BoundaryPoint window_point(const ProblemSpec& spec, int i, double t);

BoundaryPoint window_center(const ProblemSpec& spec, int i);

}  // namespace nep
