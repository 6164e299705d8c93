#include "nep/montecarlo.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "nep/asymptotics.hpp"

namespace nep::mc {

namespace {

struct Rng {
    std::uint64_t state;

    static std::uint64_t mix(std::uint64_t z) {
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
        return z ^ (z >> 31);
    }

    Rng(std::uint64_t seed, std::uint64_t stream)
        : state(mix(seed + 0x9E3779B97F4A7C15ULL * (stream + 1))) {}

    std::uint64_t next() {
        state += 0x9E3779B97F4A7C15ULL;
        return mix(state);
    }

    double uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

    // Marsaglia polar method.
    void normal_pair(double& a, double& b) {
        for (;;) {
            const double u = 2.0 * uniform() - 1.0;
            const double v = 2.0 * uniform() - 1.0;
            const double s = u * u + v * v;
            if (s > 0.0 && s < 1.0) {
                const double f = std::sqrt(-2.0 * std::log(s) / s);
                a = u * f;
                b = v * f;
                return;
            }
        }
    }
};

struct Wall {
    Vec2 a, b;
    Vec2 unit_normal;  // orientation irrelevant for specular reflection
    bool absorbing = false;
};

double point_segment_distance(const Vec2& p, const Vec2& a, const Vec2& b) {
    const Vec2 ab = b - a;
    const double len2 = ab.norm_sq();
    double t = len2 > 0.0 ? (p - a).dot(ab) / len2 : 0.0;
    t = std::clamp(t, 0.0, 1.0);
    return (p - (a + t * ab)).norm();
}

}  // namespace

struct CompositeGeometry::Impl {
    ProblemSpec spec;
    explicit Impl(ProblemSpec s) : spec(std::move(s)) {}
    std::vector<Wall> walls;
    std::vector<Vec2> head_polygon;  // windows closed by their chords
    struct Neck {
        Vec2 base_minus, base_plus;  // window chord endpoints
        Vec2 chord_dir;              // unit, base_minus -> base_plus
        Vec2 axis;                   // unit, into the neck
        double width = 0.0, length = 0.0;
        double base_mismatch = 0.0;
    };
    std::vector<Neck> necks;

    // uniform grid
    Vec2 grid_lo;
    double cell = 0.0;
    double inv_cell = 0.0;
    int nx = 0, ny = 0;
    std::vector<std::vector<int>> cell_walls;
    std::vector<float> safe;

    int cell_index(const Vec2& p) const {
        int ix = static_cast<int>((p.x - grid_lo.x) * inv_cell);
        int iy = static_cast<int>((p.y - grid_lo.y) * inv_cell);
        ix = std::clamp(ix, 0, nx - 1);
        iy = std::clamp(iy, 0, ny - 1);
        return iy * nx + ix;
    }

    double advance(Vec2& pos, Vec2 disp) const;
    double walk(Vec2 pos, double dt, long budget, Rng rng) const;

    bool in_head(const Vec2& p) const {
        bool inside = false;
        const size_t n = head_polygon.size();
        for (size_t i = 0, j = n - 1; i < n; j = i++) {
            const Vec2& vi = head_polygon[i];
            const Vec2& vj = head_polygon[j];
            if ((vi.y > p.y) != (vj.y > p.y) &&
                p.x < (vj.x - vi.x) * (p.y - vi.y) / (vj.y - vi.y) + vi.x)
                inside = !inside;
        }
        return inside;
    }

    bool in_neck(const Vec2& p, const Neck& nk) const {
        const Vec2 q = p - nk.base_minus;
        const double u = q.dot(nk.chord_dir);
        const double v = q.dot(nk.axis);
        return u >= 0.0 && u <= nk.width && v >= 0.0 && v <= nk.length;
    }

    void build_grid() {
        Vec2 lo{1e300, 1e300}, hi{-1e300, -1e300};
        for (const Wall& w : walls) {
            lo.x = std::min({lo.x, w.a.x, w.b.x});
            lo.y = std::min({lo.y, w.a.y, w.b.y});
            hi.x = std::max({hi.x, w.a.x, w.b.x});
            hi.y = std::max({hi.y, w.a.y, w.b.y});
        }
        const double pad = 0.05 * std::max(hi.x - lo.x, hi.y - lo.y) + 1e-6;
        lo -= Vec2{pad, pad};
        hi += Vec2{pad, pad};
        const double span = std::max(hi.x - lo.x, hi.y - lo.y);
        nx = ny = 256;
        cell = span / nx;
        inv_cell = 1.0 / cell;
        grid_lo = lo;
        cell_walls.assign(static_cast<size_t>(nx) * ny, {});
        for (size_t wi = 0; wi < walls.size(); ++wi) {
            const Wall& w = walls[wi];
            const int x0 = std::clamp(static_cast<int>((std::min(w.a.x, w.b.x) - lo.x) / cell) - 1, 0, nx - 1);
            const int x1 = std::clamp(static_cast<int>((std::max(w.a.x, w.b.x) - lo.x) / cell) + 1, 0, nx - 1);
            const int y0 = std::clamp(static_cast<int>((std::min(w.a.y, w.b.y) - lo.y) / cell) - 1, 0, ny - 1);
            const int y1 = std::clamp(static_cast<int>((std::max(w.a.y, w.b.y) - lo.y) / cell) + 1, 0, ny - 1);
            for (int iy = y0; iy <= y1; ++iy)
                for (int ix = x0; ix <= x1; ++ix)
                    cell_walls[static_cast<size_t>(iy) * nx + ix].push_back(static_cast<int>(wi));
        }
        // conservative per-cell clearance: exact min distance over nearby
        // listed walls, or a ring-based lower bound when none are close
        safe.assign(static_cast<size_t>(nx) * ny, 0.0f);
        const double half_diag = 0.5 * cell * std::sqrt(2.0);
        for (int iy = 0; iy < ny; ++iy) {
            for (int ix = 0; ix < nx; ++ix) {
                const Vec2 c{grid_lo.x + (ix + 0.5) * cell, grid_lo.y + (iy + 0.5) * cell};
                double best = 1e300;
                int ring = -1;
                for (int r = 0; r <= 6 && ring < 0; ++r) {
                    for (int dy = -r; dy <= r && ring < 0; ++dy) {
                        for (int dx = -r; dx <= r; ++dx) {
                            if (std::max(std::abs(dx), std::abs(dy)) != r) continue;
                            const int jx = ix + dx, jy = iy + dy;
                            if (jx < 0 || jx >= nx || jy < 0 || jy >= ny) continue;
                            if (!cell_walls[static_cast<size_t>(jy) * nx + jx].empty()) {
                                ring = r;
                                break;
                            }
                        }
                    }
                }
                if (ring < 0) {
                    best = 5.5 * cell;
                } else {
                    for (int dy = -ring - 1; dy <= ring + 1; ++dy) {
                        for (int dx = -ring - 1; dx <= ring + 1; ++dx) {
                            const int jx = ix + dx, jy = iy + dy;
                            if (jx < 0 || jx >= nx || jy < 0 || jy >= ny) continue;
                            for (int wi : cell_walls[static_cast<size_t>(jy) * nx + jx])
                                best = std::min(best, point_segment_distance(c, walls[wi].a, walls[wi].b));
                        }
                    }
                }
                safe[static_cast<size_t>(iy) * nx + ix] =
                    static_cast<float>(std::max(0.0, best - half_diag));
            }
        }
    }
};

CompositeGeometry CompositeGeometry::build(const ProblemSpec& spec, int head_segments) {
    for (const NeckSpec& n : spec.necks)
        if (!(n.epsilon > 0.0) || !(n.length > 0.0))
            throw std::invalid_argument(
                "CompositeGeometry: neck epsilon and length must be positive");
    auto impl = std::make_shared<Impl>(spec);
    const HeadDomain& head = spec.head;
    const double per = head.perimeter();
    const int N = spec.neck_count();

    // Arc positions: uniform samples plus exact window endpoints, window
    // interiors removed.
    std::vector<double> cuts;
    for (int k = 0; k < head_segments; ++k) cuts.push_back(per * k / head_segments);
    std::vector<std::pair<double, double>> win(N);  // [lo, hi] arc intervals, may wrap
    for (int i = 0; i < N; ++i) {
        double lo = std::fmod(spec.necks[i].s - spec.necks[i].epsilon, per);
        if (lo < 0) lo += per;
        double hi = std::fmod(spec.necks[i].s + spec.necks[i].epsilon, per);
        if (hi < 0) hi += per;
        win[i] = {lo, hi};
        cuts.push_back(lo);
        cuts.push_back(hi);
    }
    std::sort(cuts.begin(), cuts.end());
    cuts.erase(std::unique(cuts.begin(), cuts.end(),
                           [](double a, double b) { return std::abs(a - b) < 1e-13; }),
               cuts.end());

    const auto in_window = [&](double s) {
        for (int i = 0; i < N; ++i) {
            const auto [lo, hi] = win[i];
            if (lo <= hi) {
                if (s > lo && s < hi) return true;
            } else {
                if (s > lo || s < hi) return true;  // interval wraps through 0
            }
        }
        return false;
    };

    // Head boundary walls between consecutive cuts, skipping window gaps, and
    // the closed polygon used for point location.
    std::vector<Vec2> pts(cuts.size());
    for (size_t q = 0; q < cuts.size(); ++q) pts[q] = head.at_arc(cuts[q]).p;
    for (size_t q = 0; q < cuts.size(); ++q) {
        const size_t r = (q + 1) % cuts.size();
        double mid = 0.5 * (cuts[q] + (r == 0 ? cuts[0] + per : cuts[r]));
        mid = std::fmod(mid, per);
        impl->head_polygon.push_back(pts[q]);
        if (in_window(mid)) continue;
        const Vec2 d = pts[r] - pts[q];
        if (d.norm() < 1e-15) continue;
        impl->walls.push_back({pts[q], pts[r], d.perp().normalized(), false});
    }

    // Neck rectangles on the window chords.
    for (int i = 0; i < N; ++i) {
        const Vec2 em = window_point(spec, i + 1, -1.0).p;
        const Vec2 ep = window_point(spec, i + 1, 1.0).p;
        const Vec2 chord = ep - em;
        Vec2 axis = chord.perp().normalized();
        const Vec2 outward = head.outward_normal(window_center(spec, i + 1).theta);
        if (axis.dot(outward) < 0.0) axis = axis * -1.0;
        const double L = spec.necks[i].length;
        const Vec2 fm = em + L * axis;
        const Vec2 fp = ep + L * axis;
        impl->walls.push_back({em, fm, chord.normalized(), false});
        impl->walls.push_back({ep, fp, chord.normalized(), false});
        impl->walls.push_back({fm, fp, axis, true});  // absorbing far end
        Impl::Neck nk;
        nk.base_minus = em;
        nk.base_plus = ep;
        nk.chord_dir = chord.normalized();
        nk.axis = axis;
        nk.width = chord.norm();
        nk.length = L;
        nk.base_mismatch = 0.0;  // base endpoints are the chord endpoints by construction
        impl->necks.push_back(nk);
    }

    impl->build_grid();
    return CompositeGeometry(std::move(impl));
}

bool CompositeGeometry::contains(const Vec2& p) const {
    if (impl_->in_head(p)) return true;
    for (const auto& nk : impl_->necks)
        if (impl_->in_neck(p, nk)) return true;
    return false;
}

const ProblemSpec& CompositeGeometry::spec() const { return impl_->spec; }

Vec2 CompositeGeometry::neck_base(int i) const {
    const auto& nk = impl_->necks.at(i - 1);
    return 0.5 * (nk.base_minus + nk.base_plus);
}

Vec2 CompositeGeometry::neck_direction(int i) const { return impl_->necks.at(i - 1).axis; }

double CompositeGeometry::base_chord_mismatch() const {
    double m = 0.0;
    for (const auto& nk : impl_->necks) m = std::max(m, nk.base_mismatch);
    return m;
}

double CompositeGeometry::Impl::advance(Vec2& pos, Vec2 disp) const {
    const double total_sq = disp.norm_sq();
    double consumed = 0.0;
    int skip = -1;
    for (int bounce = 0; bounce < 32; ++bounce) {
        // fast path: the step cannot reach any wall from this cell
        const double len_sq = disp.norm_sq();
        const double clearance = static_cast<double>(safe[cell_index(pos)]);
        if (len_sq < clearance * clearance) {
            pos += disp;
            return -1.0;
        }
        const Vec2 tgt = pos + disp;
        // candidate walls from the cells covering the step's bounding box
        const int x0 = std::clamp(static_cast<int>((std::min(pos.x, tgt.x) - grid_lo.x) * inv_cell), 0, nx - 1);
        const int x1 = std::clamp(static_cast<int>((std::max(pos.x, tgt.x) - grid_lo.x) * inv_cell), 0, nx - 1);
        const int y0 = std::clamp(static_cast<int>((std::min(pos.y, tgt.y) - grid_lo.y) * inv_cell), 0, ny - 1);
        const int y1 = std::clamp(static_cast<int>((std::max(pos.y, tgt.y) - grid_lo.y) * inv_cell), 0, ny - 1);
        double best_t = 2.0;
        int best_w = -1;
        for (int iy = y0; iy <= y1; ++iy) {
            for (int ix = x0; ix <= x1; ++ix) {
                for (int wi : cell_walls[static_cast<size_t>(iy) * nx + ix]) {
                    if (wi == skip) continue;
                    const Wall& w = walls[wi];
                    const Vec2 pq = w.b - w.a;
                    const double denom = disp.cross(pq);
                    if (denom == 0.0) continue;
                    const Vec2 ap = w.a - pos;
                    const double t = ap.cross(pq) / denom;
                    const double u = ap.cross(disp) / denom;
                    if (t > 0.0 && t <= 1.0 && u >= 0.0 && u <= 1.0 && t < best_t) {
                        best_t = t;
                        best_w = wi;
                    }
                }
            }
        }
        if (best_w < 0) {
            pos = tgt;
            return -1.0;
        }
        const Wall& w = walls[best_w];
        pos += best_t * disp;
        consumed += best_t * std::sqrt(len_sq);
        if (w.absorbing) return total_sq > 0.0 ? consumed / std::sqrt(total_sq) : 1.0;
        disp = reflect_across_unit_normal((1.0 - best_t) * disp, w.unit_normal);
        skip = best_w;
    }
    return -1.0;  // bounce cap hit: drop the remainder of the step
}

double CompositeGeometry::Impl::walk(Vec2 pos, double dt, long budget, Rng rng) const {
    const double step_scale = std::sqrt(2.0 * dt);
    for (long step = 0; step < budget; ++step) {
        double z1, z2;
        rng.normal_pair(z1, z2);
        const double frac = advance(pos, Vec2{step_scale * z1, step_scale * z2});
        if (frac >= 0.0) return (static_cast<double>(step) + frac) * dt;
        if ((step & 0xFFF) == 0xFFF) {
            // leak guard: a walker that slipped through a wall corner is lost
            bool inside = in_head(pos);
            for (const auto& nk : necks) inside = inside || in_neck(pos, nk);
            if (!inside) return -1.0;
        }
    }
    return -1.0;
}

double CompositeGeometry::advance(Vec2& pos, Vec2 disp) const { return impl_->advance(pos, disp); }

double default_dt(const ProblemSpec& spec) {
    double emin = 1e300;
    for (const NeckSpec& n : spec.necks) emin = std::min(emin, n.epsilon);
    return std::min(emin * emin / 4.0, 1e-4);
}

double CompositeGeometry::walk_one(const Vec2& x0, double dt, long budget, std::uint64_t seed,
                                   int walker_index) const {
    return impl_->walk(x0, dt, budget, Rng(seed, static_cast<std::uint64_t>(walker_index)));
}

namespace {

WalkerStats run(const CompositeGeometry& geom, const Vec2& x0, const McParams& params,
                bool parallel) {
    const ProblemSpec& spec = geom.spec();
    double emin = 1e300;
    for (const NeckSpec& n : spec.necks) emin = std::min(emin, n.epsilon);
    if (params.dt > emin * emin / 4.0 + 1e-15)
        throw std::invalid_argument("simulate: dt must be <= (min epsilon)^2 / 4");
    if (params.n_walkers < 100)
        throw std::invalid_argument("simulate: need at least 100 walkers");
    if (!geom.contains(x0))
        throw std::invalid_argument("simulate: start point is not inside the domain");

    long budget = params.max_steps;
    if (budget <= 0) {
        const double expected = std::max(asym::mfpt_leading(spec), 1.0);
        budget = static_cast<long>(10.0 * expected / params.dt) + 1000;
    }

    std::vector<double> fpt(params.n_walkers);
    const int n = params.n_walkers;
#pragma omp parallel for schedule(dynamic, 16) if (parallel)
    for (int i = 0; i < n; ++i) fpt[i] = geom.walk_one(x0, params.dt, budget, params.seed, i);

    WalkerStats st;
    st.n_walkers = n;
    st.dt = params.dt;
    st.seed = params.seed;
    double sum = 0.0;
    int absorbed = 0;
    for (double t : fpt) {
        if (t >= 0.0) {
            sum += t;
            ++absorbed;
        }
    }
    st.budget_exceeded = n - absorbed;
    st.absorbed_fraction = static_cast<double>(absorbed) / n;
    st.mean_fpt = absorbed > 0 ? sum / absorbed : 0.0;
    double var = 0.0;
    for (double t : fpt)
        if (t >= 0.0) var += (t - st.mean_fpt) * (t - st.mean_fpt);
    if (absorbed > 1) var /= (absorbed - 1);
    st.std_error = absorbed > 0 ? std::sqrt(var / absorbed) : 0.0;
    if (params.collect_fpt) st.fpt = std::move(fpt);
    return st;
}

}  // namespace

WalkerStats simulate(const CompositeGeometry& geom, const Vec2& x0, const McParams& params) {
    return run(geom, x0, params, true);
}

WalkerStats simulate(const ProblemSpec& spec, const Vec2& x0, const McParams& params) {
    return run(CompositeGeometry::build(spec), x0, params, true);
}

WalkerStats simulate_serial(const CompositeGeometry& geom, const Vec2& x0,
                            const McParams& params) {
    return run(geom, x0, params, false);
}

NeckProfile neck_profile_check(const ProblemSpec& spec, int neck, int n_walkers,
                               std::uint64_t seed, double dt) {
    if (neck < 1 || neck > spec.neck_count())
        throw std::out_of_range("neck_profile_check: neck index out of range");
    const CompositeGeometry geom = CompositeGeometry::build(spec);
    const double L = spec.necks[neck - 1].length;
    if (dt <= 0.0) dt = default_dt(spec);
    const Vec2 base = geom.neck_base(neck);
    const Vec2 axis = geom.neck_direction(neck);

    NeckProfile prof;
    const std::vector<double> fracs{0.02, 0.125, 0.25, 0.375, 0.5, 0.625, 0.75, 0.875};
    McParams p;
    p.dt = dt;
    p.n_walkers = n_walkers;
    p.seed = seed;  // common random numbers across offsets: the profile
                    // differences carry far less noise than the absolute values
    for (size_t q = 0; q < fracs.size(); ++q) {
        const Vec2 x0 = base + (fracs[q] * L) * axis;
        const WalkerStats st = simulate(geom, x0, p);
        prof.offsets.push_back(fracs[q] * L);
        prof.mfpt.push_back(st.mean_fpt);
        prof.std_error.push_back(st.std_error);
    }

    // least squares in the basis {(L-x)^2, (L-x), 1}
    const size_t m = prof.offsets.size();
    double ata[3][3] = {};
    double atb[3] = {};
    for (size_t q = 0; q < m; ++q) {
        const double lx = L - prof.offsets[q];
        const double row[3] = {lx * lx, lx, 1.0};
        for (int r = 0; r < 3; ++r) {
            atb[r] += row[r] * prof.mfpt[q];
            for (int c = 0; c < 3; ++c) ata[r][c] += row[r] * row[c];
        }
    }
    // 3x3 Gaussian elimination
    double M[3][4];
    for (int r = 0; r < 3; ++r) {
        for (int c = 0; c < 3; ++c) M[r][c] = ata[r][c];
        M[r][3] = atb[r];
    }
    for (int c = 0; c < 3; ++c) {
        int piv = c;
        for (int r = c + 1; r < 3; ++r)
            if (std::abs(M[r][c]) > std::abs(M[piv][c])) piv = r;
        std::swap(M[c], M[piv]);
        for (int r = 0; r < 3; ++r) {
            if (r == c) continue;
            const double f = M[r][c] / M[c][c];
            for (int k = c; k < 4; ++k) M[r][k] -= f * M[c][k];
        }
    }
    const double a = M[0][3] / M[0][0], b = M[1][3] / M[1][1], cc = M[2][3] / M[2][2];
    prof.quad_coeff = a;
    prof.fitted_C = a * L * L + b * L + cc;
    double rss = 0.0;
    for (size_t q = 0; q < m; ++q) {
        const double lx = L - prof.offsets[q];
        const double fit = a * lx * lx + b * lx + cc;
        rss += (prof.mfpt[q] - fit) * (prof.mfpt[q] - fit);
    }
    prof.rms_misfit = std::sqrt(rss / m);
    return prof;
}

}  // namespace nep::mc
