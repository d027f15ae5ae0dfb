#pragma once

// Scalar fields (analytic or lattice-backed), domains, and the ball queries
// (sup, inf, mean) that every operator evaluation needs.

#include <algorithm>
#include <array>
#include <bit>
#include <cmath>
#include <cstdint>
#include <functional>
#include <fstream>
#include <memory>
#include <numbers>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "plgame/core.hpp"

namespace plgame {

using Point = std::vector<double>;

inline double norm(const Point& x) {
    double s = 0.0;
    for (double v : x) s += v * v;
    return std::sqrt(s);
}

inline Point axpy(const Point& x, double t, const Point& dir) {
    Point y = x;
    for (std::size_t i = 0; i < y.size(); ++i) y[i] += t * dir[i];
    return y;
}

// ---------------------------------------------------------------------------
// Analytic backing

/// Closed-form field with optional analytic gradient / Hessian and an
/// optional closed-form p-Laplacian for points where the gradient vanishes.
struct AnalyticField {
    int d = 1;
    std::function<double(const Point&)> value;
    std::function<Point(const Point&)> gradient;                       // optional
    std::function<std::vector<double>(const Point&)> hessian;          // row-major, optional
    std::function<double(const Point&, const Params&)> p_laplacian;    // optional closed form
};

/// |grad phi|^{p-2} * (lap phi + (p-2) <D2 phi n, n>), the verification oracle.
/// Falls back to the field's closed form at (numerically) critical points.
inline double analytic_p_laplacian(const AnalyticField& phi, const Point& x, const Params& prm) {
    if (!phi.gradient || !phi.hessian) {
        if (phi.p_laplacian) return phi.p_laplacian(x, prm);
        throw std::invalid_argument("analytic_p_laplacian: field has no derivatives");
    }
    const Point g = phi.gradient(x);
    const std::vector<double> H = phi.hessian(x);
    const int d = phi.d;
    const double gn = norm(g);
    const double scale = 1.0 + std::abs(phi.value(x));
    if (gn <= 1e-12 * scale) {
        if (phi.p_laplacian) return phi.p_laplacian(x, prm);
        throw std::domain_error("analytic_p_laplacian: critical point");
    }
    double trace = 0.0, quad = 0.0;
    for (int i = 0; i < d; ++i) {
        trace += H[static_cast<std::size_t>(i) * d + i];
        for (int j = 0; j < d; ++j)
            quad += H[static_cast<std::size_t>(i) * d + j] * g[static_cast<std::size_t>(i)] *
                    g[static_cast<std::size_t>(j)];
    }
    quad /= gn * gn;
    return std::pow(gn, prm.p - 2.0) * (trace + (prm.p - 2.0) * quad);
}

// ---------------------------------------------------------------------------
// Lattice backing

/// Uniform grid of node values with multilinear interpolation. Nodes sit at
/// origin + i*h componentwise; interpolated values never leave the hull of
/// the surrounding cell's corners.
class LatticeField {
public:
    LatticeField() = default;
    LatticeField(int d, Point origin, double h, std::vector<int> shape)
        : d_(d), origin_(std::move(origin)), h_(h), shape_(std::move(shape)) {
        if (d_ < 1 || static_cast<int>(origin_.size()) != d_ ||
            static_cast<int>(shape_.size()) != d_ || h_ <= 0.0)
            throw std::invalid_argument("LatticeField: inconsistent geometry");
        std::size_t n = 1;
        for (int s : shape_) {
            if (s < 2) throw std::invalid_argument("LatticeField: need >= 2 nodes per axis");
            n *= static_cast<std::size_t>(s);
        }
        values_.assign(n, 0.0);
    }

    int dim() const { return d_; }
    double h() const { return h_; }
    const Point& origin() const { return origin_; }
    const std::vector<int>& shape() const { return shape_; }
    std::vector<double>& values() { return values_; }
    const std::vector<double>& values() const { return values_; }

    std::size_t size() const { return values_.size(); }

    std::size_t flat(const std::vector<int>& idx) const {
        std::size_t f = 0;
        for (int k = 0; k < d_; ++k) f = f * static_cast<std::size_t>(shape_[k]) + idx[k];
        return f;
    }

    std::vector<int> unflat(std::size_t f) const {
        std::vector<int> idx(d_);
        for (int k = d_ - 1; k >= 0; --k) {
            idx[k] = static_cast<int>(f % static_cast<std::size_t>(shape_[k]));
            f /= static_cast<std::size_t>(shape_[k]);
        }
        return idx;
    }

    Point node(const std::vector<int>& idx) const {
        Point x(d_);
        for (int k = 0; k < d_; ++k) x[k] = origin_[k] + h_ * idx[k];
        return x;
    }

    double& at(const std::vector<int>& idx) { return values_[flat(idx)]; }
    double at(const std::vector<int>& idx) const { return values_[flat(idx)]; }

    bool covers(const Point& x, double margin = 0.0) const {
        for (int k = 0; k < d_; ++k) {
            if (x[k] < origin_[k] - margin || x[k] > origin_[k] + h_ * (shape_[k] - 1) + margin)
                return false;
        }
        return true;
    }

    /// Multilinear interpolation; clamps to the grid hull.
    double eval(const Point& x) const {
        std::array<int, 4> base{};
        std::array<double, 4> frac{};
        for (int k = 0; k < d_; ++k) {
            double s = (x[k] - origin_[k]) / h_;
            s = std::min(std::max(s, 0.0), static_cast<double>(shape_[k] - 1));
            int i = std::min(static_cast<int>(std::floor(s)), shape_[k] - 2);
            base[k] = i;
            frac[k] = s - i;
        }
        double acc = 0.0;
        const int corners = 1 << d_;
        std::vector<int> idx(d_);
        for (int c = 0; c < corners; ++c) {
            double w = 1.0;
            for (int k = 0; k < d_; ++k) {
                const int bit = (c >> k) & 1;
                idx[k] = base[k] + bit;
                w *= bit ? frac[k] : (1.0 - frac[k]);
            }
            if (w != 0.0) acc += w * at(idx);
        }
        return acc;
    }

    void fill(const std::function<double(const Point&)>& f) {
        for (std::size_t i = 0; i < values_.size(); ++i) values_[i] = f(node(unflat(i)));
    }

    // CSV round-trip: header row (d, h, origin..., shape...), one value per line.
    void save_csv(const std::string& path) const {
        std::ofstream out(path);
        if (!out) throw std::runtime_error("LatticeField: cannot write " + path);
        out.precision(17);
        out << d_ << "," << h_;
        for (double o : origin_) out << "," << o;
        for (int s : shape_) out << "," << s;
        out << "\n";
        for (double v : values_) out << v << "\n";
    }

    static LatticeField load_csv(const std::string& path) {
        std::ifstream in(path);
        if (!in) throw std::runtime_error("LatticeField: cannot read " + path);
        std::string header;
        std::getline(in, header);
        std::stringstream hs(header);
        std::string tok;
        std::vector<double> head;
        while (std::getline(hs, tok, ',')) head.push_back(std::stod(tok));
        if (head.size() < 4) throw std::runtime_error("LatticeField: bad header");
        const int d = static_cast<int>(head[0]);
        if (static_cast<int>(head.size()) != 2 + 2 * d)
            throw std::runtime_error("LatticeField: bad header");
        Point origin(head.begin() + 2, head.begin() + 2 + d);
        std::vector<int> shape;
        for (int k = 0; k < d; ++k) shape.push_back(static_cast<int>(head[2 + d + k]));
        LatticeField lf(d, origin, head[1], shape);
        for (std::size_t i = 0; i < lf.size(); ++i) {
            if (!(in >> lf.values()[i])) throw std::runtime_error("LatticeField: truncated values");
        }
        return lf;
    }

private:
    int d_ = 0;
    Point origin_;
    double h_ = 0.0;
    std::vector<int> shape_;
    std::vector<double> values_;
};

struct BallStats {
    double sup = 0.0;
    double inf = 0.0;
    double mean = 0.0;
};

// ---------------------------------------------------------------------------
// Constant-time ball queries on 1-d lattices

/// Sparse range-extremum tables plus a prefix integral of the multilinear
/// interpolant. One build is O(n log n); every window query is O(1). The
/// query semantics match ball_stats on a 1-d lattice backing.
class Lattice1DCache {
public:
    explicit Lattice1DCache(const LatticeField& f) : f_(&f), h_(f.h()), o_(f.origin()[0]) {
        if (f.dim() != 1) throw std::invalid_argument("Lattice1DCache: 1-d lattices only");
        n_ = f.shape()[0];
        const auto& v = f.values();
        int levels = 1;
        while ((1 << levels) <= n_) ++levels;
        max_idx_.assign(levels, std::vector<int>(n_));
        min_idx_.assign(levels, std::vector<int>(n_));
        for (int i = 0; i < n_; ++i) max_idx_[0][i] = min_idx_[0][i] = i;
        for (int l = 1; l < levels; ++l) {
            const int half = 1 << (l - 1);
            for (int i = 0; i + (1 << l) <= n_; ++i) {
                const int a = max_idx_[l - 1][i], b = max_idx_[l - 1][i + half];
                max_idx_[l][i] = v[b] > v[a] ? b : a;
                const int c = min_idx_[l - 1][i], d = min_idx_[l - 1][i + half];
                min_idx_[l][i] = v[d] < v[c] ? d : c;
            }
        }
        prefix_.assign(n_, 0.0);
        for (int i = 1; i < n_; ++i) prefix_[i] = prefix_[i - 1] + 0.5 * h_ * (v[i] + v[i - 1]);
    }

    /// Index of the extreme node value on the closed index range [a, b].
    int range_arg(int a, int b, bool maximize) const {
        const int l = std::bit_width(static_cast<unsigned>(b - a + 1)) - 1;
        const auto& t = maximize ? max_idx_ : min_idx_;
        const int i = t[l][a], j = t[l][b - (1 << l) + 1];
        const auto& v = f_->values();
        if (maximize) return v[j] > v[i] ? j : i;
        return v[j] < v[i] ? j : i;
    }

    /// Nodes strictly inside (x-r, x+r): [lo, hi] or empty when lo > hi.
    void inner_nodes(double x, double r, int& lo, int& hi) const {
        lo = static_cast<int>(std::floor((x - r - o_) / h_)) + 1;
        hi = static_cast<int>(std::ceil((x + r - o_) / h_)) - 1;
        lo = std::max(lo, 0);
        hi = std::min(hi, n_ - 1);
    }

    /// Integral of the interpolant from the grid origin to s (node units).
    double cumint(double s) const {
        s = std::min(std::max(s, 0.0), static_cast<double>(n_ - 1));
        const int i = std::min(static_cast<int>(std::floor(s)), n_ - 2);
        const double f = s - i;
        const auto& v = f_->values();
        return prefix_[i] + h_ * (v[i] * f + 0.5 * (v[i + 1] - v[i]) * f * f);
    }

    BallStats stats(double x, double r) const {
        const double vc = f_->eval({x});
        const double vl = f_->eval({x - r}), vr = f_->eval({x + r});
        double sup = std::max({vc, vl, vr});
        double inf = std::min({vc, vl, vr});
        int lo, hi;
        inner_nodes(x, r, lo, hi);
        if (lo <= hi) {
            const auto& v = f_->values();
            sup = std::max(sup, v[range_arg(lo, hi, true)]);
            inf = std::min(inf, v[range_arg(lo, hi, false)]);
        }
        const double sa = std::min(std::max((x - r - o_) / h_, 0.0), static_cast<double>(n_ - 1));
        const double sb = std::min(std::max((x + r - o_) / h_, 0.0), static_cast<double>(n_ - 1));
        const double mean = sb > sa ? (cumint(sb) - cumint(sa)) / ((sb - sa) * h_) : vc;
        return {sup, inf, mean};
    }

    /// Position of the sampled extremum over the same sample set as stats.
    double argopt(double x, double r, bool maximize) const {
        double best_x = x, best = f_->eval({x});
        auto consider = [&](double y, double val) {
            if (maximize ? val > best : val < best) {
                best = val;
                best_x = y;
            }
        };
        consider(x - r, f_->eval({x - r}));
        consider(x + r, f_->eval({x + r}));
        int lo, hi;
        inner_nodes(x, r, lo, hi);
        if (lo <= hi) {
            const int i = range_arg(lo, hi, maximize);
            consider(o_ + i * h_, f_->values()[i]);
        }
        return best_x;
    }

private:
    const LatticeField* f_;
    int n_ = 0;
    double h_ = 0.0, o_ = 0.0;
    std::vector<std::vector<int>> max_idx_, min_idx_;
    std::vector<double> prefix_;
};

// ---------------------------------------------------------------------------
// ScalarField: one handle over both backings

class ScalarField {
public:
    ScalarField() = default;
    explicit ScalarField(AnalyticField a) : analytic_(std::make_shared<AnalyticField>(std::move(a))) {}
    explicit ScalarField(LatticeField l, bool build_cache = false)
        : lattice_(std::make_shared<LatticeField>(std::move(l))) {
        if (build_cache && lattice_->dim() == 1)
            cache_ = std::make_shared<Lattice1DCache>(*lattice_);
    }

    bool is_lattice() const { return static_cast<bool>(lattice_); }
    bool is_analytic() const { return static_cast<bool>(analytic_); }
    const LatticeField& lattice() const { return *lattice_; }
    const AnalyticField& analytic() const { return *analytic_; }
    const Lattice1DCache* cache() const { return cache_.get(); }

    int dim() const { return lattice_ ? lattice_->dim() : analytic_->d; }

    double eval(const Point& x) const {
        return lattice_ ? lattice_->eval(x) : analytic_->value(x);
    }

private:
    std::shared_ptr<const AnalyticField> analytic_;
    std::shared_ptr<const LatticeField> lattice_;
    std::shared_ptr<const Lattice1DCache> cache_;
};

// ---------------------------------------------------------------------------
// Domains

enum class DomainShape { box, ball };

/// Axis-aligned box or ball; both satisfy the uniform exterior ball condition
/// in the way the experiments use them.
struct Domain {
    DomainShape shape = DomainShape::box;
    Point lo, hi;       // box corners
    Point center;       // ball center
    double radius = 0;  // ball radius

    static Domain make_box(Point lo_, Point hi_) {
        Domain d;
        d.shape = DomainShape::box;
        d.lo = std::move(lo_);
        d.hi = std::move(hi_);
        return d;
    }
    static Domain make_ball(Point c, double r) {
        Domain d;
        d.shape = DomainShape::ball;
        d.center = std::move(c);
        d.radius = r;
        return d;
    }

    bool contains(const Point& x) const {
        if (shape == DomainShape::box) {
            for (std::size_t k = 0; k < lo.size(); ++k)
                if (x[k] <= lo[k] || x[k] >= hi[k]) return false;
            return true;
        }
        Point dxy = x;
        for (std::size_t k = 0; k < dxy.size(); ++k) dxy[k] -= center[k];
        return norm(dxy) < radius;
    }

    /// Distance to the complement of the domain (0 outside).
    double interior_distance(const Point& x) const {
        if (!contains(x)) return 0.0;
        if (shape == DomainShape::box) {
            double d = kInf;
            for (std::size_t k = 0; k < lo.size(); ++k)
                d = std::min(d, std::min(x[k] - lo[k], hi[k] - x[k]));
            return d;
        }
        Point dxy = x;
        for (std::size_t k = 0; k < dxy.size(); ++k) dxy[k] -= center[k];
        return radius - norm(dxy);
    }

    /// Distance from an exterior point to the closure of the domain.
    double exterior_distance(const Point& x) const {
        if (contains(x)) return 0.0;
        if (shape == DomainShape::box) {
            double s = 0.0;
            for (std::size_t k = 0; k < lo.size(); ++k) {
                double g = std::max({lo[k] - x[k], x[k] - hi[k], 0.0});
                s += g * g;
            }
            return std::sqrt(s);
        }
        Point dxy = x;
        for (std::size_t k = 0; k < dxy.size(); ++k) dxy[k] -= center[k];
        return std::max(0.0, norm(dxy) - radius);
    }

    /// True on the exterior band of the given width (disjoint from contains).
    bool in_exterior_band(const Point& x, double band) const {
        if (contains(x)) return false;
        return exterior_distance(x) <= band;
    }
};

// ---------------------------------------------------------------------------
// Ball statistics

/// Sampling resolution for sup/inf over balls. Boundary points come in
/// antipodal pairs so affine fields see exactly symmetric extrema; interior
/// shells serve the analytic backing (the lattice contributes its own nodes).
struct SamplingSpec {
    int boundary_points = 16;  // minimum count on the boundary sphere
    int interior_shells = 4;   // radial shells for analytic backings
    int gauss_order = 8;       // fixed-order quadrature for analytic means

    SamplingSpec refined(int factor) const {
        SamplingSpec s = *this;
        s.boundary_points *= factor;
        s.interior_shells *= factor;
        return s;
    }
};

namespace detail {

/// Deterministic low-discrepancy directions on the unit sphere, emitted in
/// antipodal pairs. d=1 degenerates to {+1,-1}.
inline std::vector<Point> sphere_directions(int d, int count) {
    std::vector<Point> dirs;
    if (d == 1) {
        dirs.push_back({1.0});
        dirs.push_back({-1.0});
        return dirs;
    }
    const int pairs = std::max(1, (count + 1) / 2);
    if (d == 2) {
        for (int i = 0; i < pairs; ++i) {
            // golden-angle placement, fixed phase
            double theta = 2.0 * std::numbers::pi * std::fmod(0.5 + i * 0.6180339887498949, 1.0);
            dirs.push_back({std::cos(theta), std::sin(theta)});
            dirs.push_back({-std::cos(theta), -std::sin(theta)});
        }
        return dirs;
    }
    // d >= 3: Fibonacci-style lattice on the sphere via two rotations.
    for (int i = 0; i < pairs; ++i) {
        double u = std::fmod(0.5 + i * 0.6180339887498949, 1.0) * 2.0 - 1.0;
        double theta = 2.0 * std::numbers::pi * std::fmod(0.25 + i * 0.7548776662466927, 1.0);
        double r = std::sqrt(std::max(0.0, 1.0 - u * u));
        Point dir(d, 0.0);
        dir[0] = r * std::cos(theta);
        dir[1] = r * std::sin(theta);
        dir[2] = u;
        dirs.push_back(dir);
        Point neg = dir;
        for (double& v : neg) v = -v;
        dirs.push_back(neg);
    }
    return dirs;
}

inline void gauss_legendre(int n, std::vector<double>& nodes, std::vector<double>& weights) {
    // Nodes/weights on [-1,1] by Newton iteration on Legendre polynomials.
    nodes.assign(n, 0.0);
    weights.assign(n, 0.0);
    for (int i = 0; i < (n + 1) / 2; ++i) {
        double x = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
        double pp = 0.0;
        for (int it = 0; it < 100; ++it) {
            double p0 = 1.0, p1 = 0.0;
            for (int j = 0; j < n; ++j) {
                double p2 = p1;
                p1 = p0;
                p0 = ((2.0 * j + 1.0) * x * p1 - j * p2) / (j + 1.0);
            }
            pp = n * (x * p0 - p1) / (x * x - 1.0);
            double dx = p0 / pp;
            x -= dx;
            if (std::abs(dx) < 1e-15) break;
        }
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        weights[i] = 2.0 / ((1.0 - x * x) * pp * pp);
        weights[n - 1 - i] = weights[i];
    }
}

/// Mean of the multilinear interpolant over an interval [a,b] (d=1): exact
/// piecewise-linear integration, so the Monte Carlo noise branch and the
/// operator share one notion of ball average.
inline double interval_interp_mean(const LatticeField& lf, double a, double b) {
    const double h = lf.h();
    const double o = lf.origin()[0];
    const int n = lf.shape()[0];
    auto clamp_s = [&](double x) {
        double s = (x - o) / h;
        return std::min(std::max(s, 0.0), static_cast<double>(n - 1));
    };
    double sa = clamp_s(a), sb = clamp_s(b);
    if (sb <= sa) return lf.eval({a});
    double total = 0.0;
    int i0 = std::min(static_cast<int>(std::floor(sa)), n - 2);
    int i1 = std::min(static_cast<int>(std::floor(sb)), n - 2);
    for (int i = i0; i <= i1; ++i) {
        double lo = std::max(sa, static_cast<double>(i));
        double hi = std::min(sb, static_cast<double>(i + 1));
        if (hi <= lo) continue;
        const double v0 = lf.values()[i], v1 = lf.values()[i + 1];
        // integral of v0 + (s-i)(v1-v0) over s in [lo,hi]
        double fl = lo - i, fh = hi - i;
        total += v0 * (fh - fl) + 0.5 * (v1 - v0) * (fh * fh - fl * fl);
    }
    return total / (sb - sa);
}

}  // namespace detail

/// Sampled sup/inf/mean over the closed ball B_radius(center).
///
/// Sup/inf are maxima/minima over: the center, every lattice node strictly
/// inside the ball (lattice backing), boundary-sphere points in antipodal
/// pairs, and interior shells (analytic backing). Sampled extrema are inner
/// approximations: they underestimate the true sup and overestimate the true
/// inf. Lattice balls below resolution (radius < h/2) fall back to center
/// value plus interpolated boundary points; the fallback count is reported
/// through the optional counter.
inline BallStats ball_stats(const ScalarField& phi, const Point& center, double radius,
                            const SamplingSpec& spec, long* fallback_count = nullptr) {
    if (radius <= 0.0) throw std::invalid_argument("ball_stats: radius must be positive");
    const int d = phi.dim();

    if (phi.cache()) {
        if (fallback_count && radius < 0.5 * phi.lattice().h()) ++(*fallback_count);
        return phi.cache()->stats(center[0], radius);
    }

    double sup = phi.eval(center);
    double inf = sup;
    auto visit = [&](double v) {
        sup = std::max(sup, v);
        inf = std::min(inf, v);
    };

    const auto dirs = detail::sphere_directions(d, spec.boundary_points);
    for (const auto& dir : dirs) visit(phi.eval(axpy(center, radius, dir)));

    double mean = 0.0;
    if (phi.is_lattice()) {
        const LatticeField& lf = phi.lattice();
        const double h = lf.h();
        if (radius < 0.5 * h) {
            if (fallback_count) ++(*fallback_count);
            // Below resolution: center + boundary samples only; the mean
            // degrades to the center value (documented bias, exact on
            // constants and affine fields in d=1 by symmetry).
            if (d == 1) {
                mean = detail::interval_interp_mean(lf, center[0] - radius, center[0] + radius);
            } else {
                mean = phi.eval(center);
            }
            return {sup, inf, mean};
        }
        // Nodes strictly inside the ball.
        std::vector<int> lo(d), hi(d), idx(d);
        for (int k = 0; k < d; ++k) {
            lo[k] = std::max(0, static_cast<int>(std::ceil((center[k] - radius - lf.origin()[k]) / h)));
            hi[k] = std::min(lf.shape()[k] - 1,
                             static_cast<int>(std::floor((center[k] + radius - lf.origin()[k]) / h)));
        }
        double cell_sum = 0.0;
        std::size_t cell_count = 0;
        std::function<void(int)> rec = [&](int k) {
            if (k == d) {
                Point x = lf.node(idx);
                Point rel = x;
                for (int j = 0; j < d; ++j) rel[j] -= center[j];
                double r = norm(rel);
                if (r < radius) {
                    double v = lf.at(idx);
                    visit(v);
                    if (d >= 2) {
                        cell_sum += v;  // midpoint rule over cells centered at nodes
                        ++cell_count;
                    }
                }
                return;
            }
            for (idx[k] = lo[k]; idx[k] <= hi[k]; ++idx[k]) rec(k + 1);
        };
        rec(0);
        if (d == 1) {
            mean = detail::interval_interp_mean(lf, center[0] - radius, center[0] + radius);
        } else {
            mean = cell_count > 0 ? cell_sum / static_cast<double>(cell_count) : phi.eval(center);
        }
        return {sup, inf, mean};
    }

    // Analytic backing: interior shells refine the extrema, polar Gauss
    // quadrature gives the mean.
    for (int s = 1; s <= spec.interior_shells; ++s) {
        double r = radius * static_cast<double>(s) / (spec.interior_shells + 1);
        for (const auto& dir : dirs) visit(phi.eval(axpy(center, r, dir)));
    }

    std::vector<double> gn, gw;
    detail::gauss_legendre(spec.gauss_order, gn, gw);
    if (d == 1) {
        double acc = 0.0;
        for (int i = 0; i < spec.gauss_order; ++i)
            acc += gw[i] * phi.eval({center[0] + radius * gn[i]});
        mean = acc / 2.0;
    } else {
        // Volume mean in polar shells: weight r^{d-1} in radius, trapezoid in
        // angle (d=2) or the antipodal direction set (d>=3).
        const auto mean_dirs = detail::sphere_directions(d, std::max(spec.boundary_points, 32));
        double acc = 0.0, wsum = 0.0;
        for (int i = 0; i < spec.gauss_order; ++i) {
            double r = radius * 0.5 * (gn[i] + 1.0);
            double w = gw[i] * std::pow(r, d - 1);
            for (const auto& dir : mean_dirs) {
                acc += w * phi.eval(axpy(center, r, dir));
                wsum += w;
            }
        }
        mean = acc / wsum;
    }
    return {sup, inf, mean};
}

}  // namespace plgame
