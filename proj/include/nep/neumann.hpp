#pragma once

#include <memory>
#include <ostream>
#include <vector>

#include "nep/geometry.hpp"

namespace nep {

/// Evaluator for the Neumann function machinery of a head domain: the
/// boundary kernel N(x,z) = -(1/pi) ln|x-z| + R(x,z), its regular part R,
/// and the Poisson auxiliary g with Delta g = -1, dg/dnu = -|O|/|dO|,
/// zero boundary mean.
///
/// Two modes. On the unit disk everything is closed form (R = 0,
/// g = (1-|x|^2)/4). On a general smooth head, R(.,z) and the harmonic part
/// of g are solved by a second-kind Nystrom discretization of the interior
/// Neumann problem (periodic trapezoid rule, rank-one mean correction); the
/// additive constants are fixed by the zero-boundary-mean normalizations.
///
/// Immutable after construction, cheap to copy, thread-safe to evaluate.
class NeumannKernel {
public:
    static NeumannKernel exact_disk(const HeadDomain& head);
    static NeumannKernel numerical(const HeadDomain& head, int nodes = 256);
    /// exact_disk for the unit disk, numerical otherwise.
    static NeumannKernel for_head(const HeadDomain& head, int nodes = 256);

    bool exact() const;
    const HeadDomain& head() const;

    /// Solver state for one boundary source z: everything needed to evaluate
    /// R(x, z) at arbitrary x without re-solving.
    struct Source {
        BoundaryPoint z;
        std::vector<double> density;  // psi * |gamma'| at the grid nodes (empty in disk mode)
        double constant = 0.0;
    };

    Source prepare_source(const BoundaryPoint& z) const;

    /// R(x, z) for interior (or near-boundary) x.
    double regular_part_at(const Source& src, const Vec2& x) const;
    /// R(x, z) with x on the boundary (spectrally accurate log quadrature).
    double regular_part_at(const Source& src, const BoundaryPoint& x) const;

    /// Precomputed boundary-evaluation weights for one boundary point x,
    /// reusable across many sources (assembly loops evaluate R(x, z_k) for
    /// a fixed collocation point against all source nodes).
    struct BoundaryEval {
        BoundaryPoint x;
        std::vector<double> weights;  // empty in disk mode
    };
    BoundaryEval prepare_boundary_eval(const BoundaryPoint& x) const;
    double regular_part_at(const BoundaryEval& plan, const Source& src) const;

    /// Convenience single-shot forms (one solve per call in numerical mode).
    double regular_part(const Vec2& x, const BoundaryPoint& z) const;
    double regular_part(const BoundaryPoint& x, const BoundaryPoint& z) const;
    /// z located by projection onto the boundary.
    double regular_part(const Vec2& x, const Vec2& z) const;

    /// N(x,z) = -(1/pi) ln|x-z| + R(x,z). Throws if |x-z| < 1e-14.
    double boundary_neumann(const Vec2& x, const BoundaryPoint& z) const;
    double boundary_neumann(const Vec2& x, const Vec2& z) const;
    double boundary_neumann_at(const Source& src, const Vec2& x) const;

    /// g(x) for x in the closed head domain.
    double g(const Vec2& x) const;
    /// Boundary-accurate path.
    double g(const BoundaryPoint& x) const;

    /// Max-norm mismatch between the discrete normal derivative of R(., z)
    /// (interior trace of the solved layer density) and its Neumann data at
    /// the collocation nodes. Zero in disk mode.
    double flux_residual(const Source& src) const;
    /// Same check for the harmonic part of g against -|O|/|dO|.
    double g_flux_residual() const;

    /// Debug dump of R at nodes_x x nodes_z boundary parameter pairs,
    /// CSV columns theta_x, theta_z, value.
    void dump_regular_part_csv(std::ostream& os, int nodes_x, int nodes_z) const;

private:
    struct Impl;
    std::shared_ptr<const Impl> impl_;
    explicit NeumannKernel(std::shared_ptr<const Impl> impl) : impl_(std::move(impl)) {}
};

/// L[1](t) on [-1,1]; closed form with the 0 ln 0 = 0 convention.
double log_op_L1(double t);

}  // namespace nep
