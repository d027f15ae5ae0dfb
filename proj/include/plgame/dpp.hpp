#pragma once

// Explicit Euler iteration of the averaging operator: bounded-domain
// Dirichlet problems, the truncated whole-space problem, barriers, and the
// regularity diagnostics.

#include <algorithm>
#include <atomic>
#include <cmath>
#include <fstream>
#include <functional>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include "plgame/core.hpp"
#include "plgame/field.hpp"
#include "plgame/operator.hpp"

namespace plgame {

/// Default cell size: a quarter of the smallest ball radius the operator can
/// request, eps^2 * m_eps^{1-alpha} / 4. Coarser overrides trip the
/// below-resolution fallback, which solvers count and report.
inline double default_grid_h(const Params& prm) {
    return prm.small_radius(prm.m_eps) / 4.0;
}

/// Worker cap for per-node evaluations inside one step. 1 = serial.
inline int& dpp_threads() {
    static int n = 1;
    return n;
}

struct DirichletProblem {
    Domain domain;
    std::function<double(const Point&)> u0;  // on the closure of the domain
    std::function<double(const Point&)> g;   // on the exterior band, time-independent
    double T = 1.0;
    Params params{1, 3.0, 0.3};
    double h = 0.0;  // 0 = default_grid_h
    int n_c = 48;
    SamplingSpec sampling;

    double cell() const { return h > 0.0 ? h : default_grid_h(params); }
};

/// Lattice covering the domain plus the full operator reach on every side.
inline LatticeField make_solver_lattice(const DirichletProblem& prob) {
    const double h = prob.cell();
    const double pad = prob.params.reach() + 2.0 * h;
    const int d = prob.params.d;
    Point lo(d), hi(d);
    if (prob.domain.shape == DomainShape::box) {
        lo = prob.domain.lo;
        hi = prob.domain.hi;
    } else {
        for (int k = 0; k < d; ++k) {
            lo[k] = prob.domain.center[k] - prob.domain.radius;
            hi[k] = prob.domain.center[k] + prob.domain.radius;
        }
    }
    Point origin(d);
    std::vector<int> shape(d);
    for (int k = 0; k < d; ++k) {
        origin[k] = lo[k] - pad;
        shape[k] = static_cast<int>(std::ceil((hi[k] - lo[k] + 2.0 * pad) / h)) + 1;
    }
    return LatticeField(d, origin, h, shape);
}

namespace detail {

inline void parallel_for(std::size_t n, const std::function<void(std::size_t, std::size_t)>& body) {
    const int nt = std::max(1, dpp_threads());
    if (nt == 1 || n < 64) {
        body(0, n);
        return;
    }
    std::vector<std::thread> pool;
    const std::size_t chunk = (n + nt - 1) / nt;
    for (int t = 0; t < nt; ++t) {
        std::size_t a = std::min(n, t * chunk), b = std::min(n, (t + 1) * chunk);
        if (a < b) pool.emplace_back([&, a, b] { body(a, b); });
    }
    for (auto& th : pool) th.join();
}

}  // namespace detail

/// One Euler step: interior nodes get the operator value of the previous
/// field, exterior nodes get g, so the output inherits the sup bound
/// max(input sup, sup |g|).
inline LatticeField dpp_step(const LatticeField& u, const DirichletProblem& prob,
                             const CGrid& cgrid, long* fallback_count = nullptr) {
    if (u.h() > prob.params.band_width)
        throw std::invalid_argument("dpp_step: grid coarser than the exterior band");
    LatticeField next = u;
    const ScalarField prev{u, /*build_cache=*/true};
    std::vector<long> local_fallbacks(std::max(1, dpp_threads()), 0);
    std::atomic<int> worker{0};
    detail::parallel_for(u.size(), [&](std::size_t a, std::size_t b) {
        long* fb = fallback_count ? &local_fallbacks[worker.fetch_add(1) % local_fallbacks.size()]
                                  : nullptr;
        for (std::size_t i = a; i < b; ++i) {
            const Point x = u.node(u.unflat(i));
            if (prob.domain.contains(x)) {
                next.values()[i] = a_eps(prev, x, prob.params, cgrid, prob.sampling, fb);
            } else {
                next.values()[i] = prob.g(x);
            }
        }
    });
    if (fallback_count)
        for (long f : local_fallbacks) *fallback_count += f;
    return next;
}

struct SpaceTimeSolution {
    Params params{1, 3.0, 0.3};
    std::vector<double> times;         // t_j = j * tau
    std::vector<LatticeField> fields;  // one per time
    std::vector<double> sup_norms;     // over all nodes, per time
    long fallback_count = 0;
    bool whole_space = false;
    double truncation_bound = 0.0;  // whole-space a-priori tail bound

    int steps() const { return static_cast<int>(times.size()) - 1; }

    double eval(const Point& x, int j) const { return fields.at(j).eval(x); }

    /// Piecewise-linear-in-time interpolant on the mesh.
    double eval_linear(const Point& x, double t) const {
        const double tau = params.tau;
        if (t <= 0.0) return fields.front().eval(x);
        if (t >= times.back()) return fields.back().eval(x);
        const int j = static_cast<int>(std::floor(t / tau));
        const double w = (t - times[j]) / tau;
        return (1.0 - w) * fields[j].eval(x) + w * fields[j + 1].eval(x);
    }

    /// Left-constant-in-time interpolant: holds the value of the latest mesh
    /// point not exceeding t.
    double eval_left_const(const Point& x, double t) const {
        if (t <= 0.0) return fields.front().eval(x);
        if (t >= times.back()) return fields.back().eval(x);
        const int j = static_cast<int>(std::floor(t / params.tau));
        return fields[j].eval(x);
    }

    /// One CSV per recorded time plus a JSON manifest; stride downsamples the
    /// time axis.
    void save(const std::string& dir, const std::string& stem, int stride = 1,
              const std::string& config_hash = "") const {
        for (std::size_t j = 0; j < fields.size(); j += static_cast<std::size_t>(stride))
            fields[j].save_csv(dir + "/" + stem + "_t" + std::to_string(j) + ".csv");
        std::ofstream man(dir + "/" + stem + "_manifest.json");
        if (!man) throw std::runtime_error("SpaceTimeSolution: cannot write manifest");
        man.precision(17);
        man << "{\n  \"d\": " << params.d << ",\n  \"p\": " << params.p
            << ",\n  \"eps\": " << params.eps << ",\n  \"tau\": " << params.tau
            << ",\n  \"steps\": " << steps() << ",\n  \"whole_space\": "
            << (whole_space ? "true" : "false") << ",\n  \"truncation_bound\": "
            << truncation_bound << ",\n  \"fallback_count\": " << fallback_count
            << ",\n  \"config_hash\": \"" << config_hash << "\",\n  \"sup_norms\": [";
        for (std::size_t j = 0; j < sup_norms.size(); ++j)
            man << (j ? ", " : "") << sup_norms[j];
        man << "]\n}\n";
    }
};

namespace detail {

inline double lattice_sup_norm(const LatticeField& f) {
    double s = 0.0;
    for (double v : f.values()) s = std::max(s, std::abs(v));
    return s;
}

}  // namespace detail

/// Forward iteration from u0 with exterior datum g, recording every step up
/// to the first mesh time >= T.
inline SpaceTimeSolution solve_bounded(const DirichletProblem& prob) {
    const CGrid cgrid = CGrid::make(prob.params, prob.n_c);
    SpaceTimeSolution sol;
    sol.params = prob.params;

    LatticeField u = make_solver_lattice(prob);
    for (std::size_t i = 0; i < u.size(); ++i) {
        const Point x = u.node(u.unflat(i));
        u.values()[i] = prob.domain.contains(x) ? prob.u0(x) : prob.g(x);
    }
    const int J = static_cast<int>(std::ceil(prob.T / prob.params.tau - 1e-12));
    sol.times.push_back(0.0);
    sol.sup_norms.push_back(detail::lattice_sup_norm(u));
    sol.fields.push_back(u);
    for (int j = 1; j <= J; ++j) {
        u = dpp_step(u, prob, cgrid, &sol.fallback_count);
        for (double v : u.values())
            if (!std::isfinite(v)) throw std::runtime_error("solve_bounded: non-finite value");
        sol.times.push_back(j * prob.params.tau);
        sol.sup_norms.push_back(detail::lattice_sup_norm(u));
        sol.fields.push_back(u);
    }
    return sol;
}

/// Growth rate of the exponential supersolution.
inline double exponential_barrier_rate(const Params& prm) {
    return 2.0 * std::pow(prm.p - 1.0, 1.0 / (prm.p - 1.0));
}

/// Whole-space problem truncated to the box [-K, K]^d with zero exterior
/// datum. The initial datum must obey |u0| <= C e^{-|x|}; K must make the
/// barrier tail C e^{LT} e^{-K} fit under eta.
inline SpaceTimeSolution solve_whole_space(const std::function<double(const Point&)>& u0,
                                           double decay_C, double K, double T,
                                           const Params& prm, double h = 0.0,
                                           double eta = 0.0, int n_c = 48) {
    DirichletProblem prob;
    prob.params = prm;
    prob.T = T;
    prob.h = h;
    prob.n_c = n_c;
    prob.u0 = u0;
    prob.g = [](const Point&) { return 0.0; };
    prob.domain = Domain::make_box(Point(prm.d, -K), Point(prm.d, K));

    // Decay envelope check on a deterministic sample sweep. c_eff is the
    // smallest envelope amplitude the sweep actually needs; the tail bound
    // uses it so data far below the stated envelope are not penalized.
    double u0_sup = 0.0, c_eff = 0.0;
    for (int i = 0; i <= 256; ++i) {
        for (int axis = 0; axis < prm.d; ++axis) {
            Point x(prm.d, 0.0);
            x[axis] = -K + 2.0 * K * i / 256.0;
            const double v = std::abs(u0(x));
            u0_sup = std::max(u0_sup, v);
            c_eff = std::max(c_eff, v * std::exp(norm(x)));
            if (v > decay_C * std::exp(-norm(x)) * (1.0 + 1e-9))
                throw std::invalid_argument("solve_whole_space: u0 violates the decay envelope");
        }
    }
    if (eta <= 0.0) eta = 1e-3 * std::max(u0_sup, 1e-300);
    const double L = exponential_barrier_rate(prm);
    const double tail = std::min(decay_C, c_eff) * std::exp(L * T) * std::exp(-K);
    if (tail > eta)
        throw std::invalid_argument("solve_whole_space: box too small for the requested tolerance");

    SpaceTimeSolution sol = solve_bounded(prob);
    sol.whole_space = true;
    sol.truncation_bound = eta;
    return sol;
}

// ---------------------------------------------------------------------------
// Barriers

enum class BarrierKind { boundary_lower, boundary_upper, initial_lower, initial_upper, exponential };

/// Inputs the barrier constants depend on. r is the continuity radius of the
/// relevant datum at the anchor (how far the datum stays within eta/2).
struct BarrierData {
    Point anchor;           // x0 on the boundary (boundary kinds) or inside (initial kinds)
    double eta = 0.1;
    double T = 1.0;
    double u0_norm = 0.0;   // sup |u0|
    double g_norm = 0.0;    // sup |g|
    double datum_at_anchor = 0.0;  // g(x0) or u0(x0)
    double r = 0.1;
    double domain_diam = 2.0;
    double dist_to_boundary = 1.0;  // dist(x0, boundary), initial kinds
    Point z0;               // exterior ball center, boundary kinds
    double R = 0.0;         // exterior ball radius, boundary kinds
    double C = 1.0;         // exponential kind amplitude
};

struct Barrier {
    BarrierKind kind = BarrierKind::initial_lower;
    Params params{1, 3.0, 0.3};
    BarrierData data;
    double k = 0.0;         // boundary kinds
    double alpha_exp = 0.0; // (p+d-2)/(p-1)
    double k1 = 0.0, k2 = 0.0;  // initial kinds
    double beta_exp = 0.0;  // (3p-2)/(p-1)
    double L = 0.0;         // exponential kind

    double eval(const Point& x, double t) const {
        const double S = data.u0_norm + data.g_norm;
        switch (kind) {
            case BarrierKind::boundary_lower: {
                Point rel = x;
                for (std::size_t i = 0; i < rel.size(); ++i) rel[i] -= data.z0[i];
                const double rz = norm(rel);
                return k * (std::pow(rz, -alpha_exp) - std::pow(data.R, -alpha_exp)) +
                       data.datum_at_anchor - data.eta +
                       (-t * t / (data.T * data.T) + 2.0 * t / data.T - 1.0) * S;
            }
            case BarrierKind::boundary_upper: {
                Point rel = x;
                for (std::size_t i = 0; i < rel.size(); ++i) rel[i] -= data.z0[i];
                const double rz = norm(rel);
                return k * (std::pow(data.R, -alpha_exp) - std::pow(rz, -alpha_exp)) +
                       data.datum_at_anchor + data.eta +
                       (t * t / (data.T * data.T) - 2.0 * t / data.T + 1.0) * S;
            }
            case BarrierKind::initial_lower: {
                Point rel = x;
                for (std::size_t i = 0; i < rel.size(); ++i) rel[i] -= data.anchor[i];
                return k1 * (1.0 - std::exp(t + 1.0)) - k2 * S * std::pow(norm(rel), beta_exp) +
                       data.datum_at_anchor - data.eta;
            }
            case BarrierKind::initial_upper: {
                Point rel = x;
                for (std::size_t i = 0; i < rel.size(); ++i) rel[i] -= data.anchor[i];
                return k1 * (std::exp(t + 1.0) - 1.0) + k2 * S * std::pow(norm(rel), beta_exp) +
                       data.datum_at_anchor + data.eta;
            }
            case BarrierKind::exponential:
                return data.C * std::exp(L * t) * std::exp(x[0]);
        }
        return 0.0;
    }
};

/// Instantiates every constant from the closed-form recipes. Initial kinds:
/// k2 = 2 max{2 r^{-b}, (2/dist)^b}, k1 = C_{d,p} diam^2 k2 (|u0|+|g|) + 2
/// with C_{d,p} = ((3p-2)/(p-1)) (2p-2+d)^{1/(p-1)}. Boundary kinds size k to
/// dominate both the equation defect and the far-boundary datum gap.
inline Barrier build_barrier(BarrierKind kind, const BarrierData& data, const Params& prm) {
    if (data.eta <= 0.0) throw std::invalid_argument("build_barrier: eta must be positive");
    Barrier b;
    b.kind = kind;
    b.params = prm;
    b.data = data;
    const double p = prm.p, d = prm.d;
    const double S = data.u0_norm + data.g_norm;
    switch (kind) {
        case BarrierKind::initial_lower:
        case BarrierKind::initial_upper: {
            if (data.dist_to_boundary <= 0.0)
                throw std::invalid_argument("build_barrier: anchor must be interior");
            b.beta_exp = (3.0 * p - 2.0) / (p - 1.0);
            b.k2 = 2.0 * std::max(2.0 * std::pow(data.r, -b.beta_exp),
                                  std::pow(2.0 / data.dist_to_boundary, b.beta_exp));
            const double C_dp =
                ((3.0 * p - 2.0) / (p - 1.0)) * std::pow(2.0 * p - 2.0 + d, 1.0 / (p - 1.0));
            b.k1 = C_dp * data.domain_diam * data.domain_diam * b.k2 * S + 2.0;
            break;
        }
        case BarrierKind::boundary_lower:
        case BarrierKind::boundary_upper: {
            if (data.R <= 0.0)
                throw std::invalid_argument("build_barrier: exterior ball radius required");
            b.alpha_exp = (p + d - 2.0) / (p - 1.0);
            const double a = b.alpha_exp;
            // equation defect: k a (a(p-1)+p-d)^{1/(p-1)} (diam+R)^{-a-p/(p-1)} >= 1 + 2S/T
            const double defect_gain = a * std::pow(a * (p - 1.0) + p - d, 1.0 / (p - 1.0)) *
                                       std::pow(data.domain_diam + data.R, -a - p / (p - 1.0));
            const double k_eq = (1.0 + 2.0 * S / data.T) / defect_gain;
            // far-boundary gap: k (R^{-a} - (R+r)^{-a}) >= 2 |g| sup
            const double gap = std::pow(data.R, -a) - std::pow(data.R + data.r, -a);
            const double k_far = gap > 0.0 ? 2.0 * std::max(data.g_norm, 1.0) / gap : k_eq;
            b.k = std::max(k_eq, k_far);
            break;
        }
        case BarrierKind::exponential:
            b.L = exponential_barrier_rate(prm);
            break;
    }
    return b;
}

struct OrderingReport {
    long checked = 0;
    long violations = 0;
    double worst = 0.0;      // most negative margin observed
    Point worst_x;
    double worst_t = 0.0;
};

/// Compares barrier against the solution at every node and recorded time.
/// sense below: barrier <= solution; above: barrier >= solution. Violations
/// are data, not errors.
inline OrderingReport check_barrier_ordering(const SpaceTimeSolution& sol, const Barrier& bar,
                                             bool below, double skip_radius = 0.0) {
    OrderingReport rep;
    for (std::size_t j = 0; j < sol.fields.size(); ++j) {
        const LatticeField& f = sol.fields[j];
        for (std::size_t i = 0; i < f.size(); ++i) {
            const Point x = f.node(f.unflat(i));
            if (skip_radius > 0.0) {
                Point rel = x;
                for (std::size_t k = 0; k < rel.size(); ++k) rel[k] -= bar.data.z0[k];
                if (norm(rel) <= skip_radius) continue;
            }
            const double w = bar.eval(x, sol.times[j]);
            const double u = f.values()[i];
            const double margin = below ? u - w : w - u;
            ++rep.checked;
            if (margin < rep.worst || rep.checked == 1) {
                rep.worst = margin;
                rep.worst_x = x;
                rep.worst_t = sol.times[j];
            }
            if (margin < 0.0) ++rep.violations;
        }
    }
    return rep;
}

struct RegularityReport {
    std::vector<double> translation_sup;     // per recorded time
    double u0_translation_sup = 0.0;         // the right-hand side of the estimate
    std::vector<double> time_ratios;         // ||u^{k+1}-u^k|| / tau^{lambda/2}
    double max_time_ratio = 0.0;
    double interpolant_gap = 0.0;            // max |linear - left-const| off-mesh
};

/// Translation and time-regularity diagnostics for whole-space solutions.
/// The shift must be an integer number of cells.
inline RegularityReport regularity_report(const SpaceTimeSolution& sol, double shift,
                                          double lambda = 1.0) {
    const LatticeField& f0 = sol.fields.front();
    const double h = f0.h();
    const double cells = shift / h;
    const long ic = std::lround(cells);
    if (std::abs(cells - ic) > 1e-9)
        throw std::invalid_argument("regularity_report: shift must be a lattice multiple");
    RegularityReport rep;

    const int n = f0.shape()[0];  // shifts act along the first axis
    for (std::size_t j = 0; j < sol.fields.size(); ++j) {
        const LatticeField& f = sol.fields[j];
        double s = 0.0;
        std::vector<int> idx(f.dim(), 0);
        for (std::size_t i = 0; i < f.size(); ++i) {
            idx = f.unflat(i);
            if (idx[0] + ic < 0 || idx[0] + ic >= n) continue;
            std::vector<int> sh = idx;
            sh[0] += static_cast<int>(ic);
            s = std::max(s, std::abs(f.at(sh) - f.at(idx)));
        }
        rep.translation_sup.push_back(s);
        if (j == 0) rep.u0_translation_sup = s;
    }

    for (std::size_t j = 1; j < sol.fields.size(); ++j) {
        double diff = 0.0;
        for (std::size_t i = 0; i < sol.fields[j].size(); ++i)
            diff = std::max(diff,
                            std::abs(sol.fields[j].values()[i] - sol.fields[j - 1].values()[i]));
        const double ratio = diff / std::pow(sol.params.tau, lambda / 2.0);
        rep.time_ratios.push_back(ratio);
        rep.max_time_ratio = std::max(rep.max_time_ratio, ratio);
    }

    // Interpolant distance at off-mesh probes.
    const LatticeField& fl = sol.fields.front();
    Point probe = fl.origin();
    for (int k = 0; k < fl.dim(); ++k) probe[k] += 0.5 * fl.h() * (fl.shape()[k] - 1);
    for (int q = 1; q < 40; ++q) {
        const double t = sol.times.back() * q / 40.0 + 0.37 * sol.params.tau;
        if (t >= sol.times.back()) break;
        rep.interpolant_gap = std::max(
            rep.interpolant_gap, std::abs(sol.eval_linear(probe, t) - sol.eval_left_const(probe, t)));
    }
    return rep;
}

}  // namespace plgame
