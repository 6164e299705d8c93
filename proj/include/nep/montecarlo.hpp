#pragma once

#include <cstdint>
#include <memory>
#include <vector>

#include "nep/geometry.hpp"

namespace nep::mc {

/// Head-plus-necks composite domain flattened to wall segments: a polygonal
/// head boundary with the window arcs removed, rectangular neck walls, and
/// absorbing far ends. Includes a uniform-grid acceleration structure with
/// per-cell safe distances so interior steps skip collision tests.
///
/// The head/neck sliver near each window belongs to whichever region claims
/// it by point location (in-head or in-any-neck); reflections resolve against
/// the first wall hit along a substep.
class CompositeGeometry {
public:
    static CompositeGeometry build(const ProblemSpec& spec, int head_segments = 4096);

    bool contains(const Vec2& p) const;
    /// Signed step outcome: advances `pos` by `disp` with specular
    /// reflections; returns the consumed fraction of the step at absorption,
    /// or -1 if the walker was not absorbed.
    double advance(Vec2& pos, Vec2 disp) const;
    /// One full walker path keyed by (seed, walker_index); returns the first
    /// passage time or -1 if the step budget ran out.
    double walk_one(const Vec2& x0, double dt, long budget, std::uint64_t seed,
                    int walker_index) const;

    const ProblemSpec& spec() const;
    /// Window center and unit neck direction (into the neck) for neck i.
    Vec2 neck_base(int i) const;
    Vec2 neck_direction(int i) const;

    /// Largest deviation between any neck-rectangle base and its window
    /// chord (diagnostic for the geometry invariant).
    double base_chord_mismatch() const;

private:
    struct Impl;
    std::shared_ptr<const Impl> impl_;
    explicit CompositeGeometry(std::shared_ptr<const Impl> impl) : impl_(std::move(impl)) {}
};

struct McParams {
    double dt = 1e-4;
    int n_walkers = 10000;
    std::uint64_t seed = 1;
    /// 0 = auto: 10x the expected step count from the leading-order MFPT.
    long max_steps = 0;
    bool collect_fpt = false;
};

struct WalkerStats {
    double mean_fpt = 0.0;
    double std_error = 0.0;
    int n_walkers = 0;
    double dt = 0.0;
    std::uint64_t seed = 0;
    double absorbed_fraction = 0.0;
    int budget_exceeded = 0;
    std::vector<double> fpt;  // per-walker first passage times if requested (-1 = not absorbed)
};

/// dt ceiling from the spec rule: min((min eps)^2 / 4, 1e-4).
double default_dt(const ProblemSpec& spec);

/// Walker-parallel (OpenMP) Euler-Maruyama with specular reflection.
/// Deterministic for a fixed seed regardless of thread count: walker i draws
/// from a counter-based stream keyed by (seed, i) and results aggregate in
/// walker order.
WalkerStats simulate(const CompositeGeometry& geom, const Vec2& x0, const McParams& params);
WalkerStats simulate(const ProblemSpec& spec, const Vec2& x0, const McParams& params);

/// Serial reference implementation; bit-identical statistics to simulate().
WalkerStats simulate_serial(const CompositeGeometry& geom, const Vec2& x0, const McParams& params);

/// MFPT estimates along the axis of neck i fitted to the one-dimensional
/// profile a (L-x)^2 + b (L-x) + c.
struct NeckProfile {
    std::vector<double> offsets;     // distance from the window along the neck axis
    std::vector<double> mfpt;
    std::vector<double> std_error;
    double quad_coeff = 0.0;         // fitted a; the reduced neck equation gives -1/2
    double fitted_C = 0.0;           // fitted profile value at the window (x = 0)
    double rms_misfit = 0.0;
};

NeckProfile neck_profile_check(const ProblemSpec& spec, int neck, int n_walkers,
                               std::uint64_t seed, double dt = 0.0);

}  // namespace nep::mc
