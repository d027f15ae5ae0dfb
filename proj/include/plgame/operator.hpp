#pragma once

// The averaging operator: M_rho, the full two-branch operator over the
// truncated c interval, and the asymptotic-expansion error harness.

#include <algorithm>
#include <cmath>
#include <fstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "plgame/core.hpp"
#include "plgame/field.hpp"

namespace plgame {

/// Log-uniform discretization of the c interval [m_eps, M_eps].
struct CGrid {
    std::vector<double> nodes;

    static CGrid make(const Params& prm, int n_c = 48) {
        if (n_c < 2) throw std::invalid_argument("CGrid: need at least 2 nodes");
        CGrid g;
        g.nodes.resize(n_c);
        const double lm = std::log(prm.m_eps), lM = std::log(prm.M_eps);
        for (int i = 0; i < n_c; ++i)
            g.nodes[i] = std::exp(lm + (lM - lm) * i / (n_c - 1));
        g.nodes.front() = prm.m_eps;
        g.nodes.back() = prm.M_eps;
        return g;
    }
};

/// M_rho[phi](x) = (beta/2)(sup + inf over B_{gamma rho}(x)) + (1-beta) mean.
inline double m_rho(const ScalarField& phi, const Point& x, double rho, const Params& prm,
                    const SamplingSpec& spec = {}, long* fallback_count = nullptr) {
    const BallStats s = ball_stats(phi, x, prm.gamma * rho, spec, fallback_count);
    return 0.5 * prm.beta * (s.sup + s.inf) + (1.0 - prm.beta) * s.mean;
}

/// The two optimization branches of the operator, before combining with
/// phi(x). branch_lo is the inner min (heads side), branch_hi the inner max.
struct OperatorBranches {
    double branch_lo = 0.0;
    double branch_hi = 0.0;
    double lo_c = 0.0;  // argmin c of the heads branch
    double hi_c = 0.0;  // argmax c of the tails branch
};

inline OperatorBranches a_eps_branches(const ScalarField& phi, const Point& x, const Params& prm,
                                       const CGrid& cgrid, const SamplingSpec& spec = {},
                                       long* fallback_count = nullptr) {
    if (cgrid.nodes.empty()) throw std::invalid_argument("a_eps: empty cgrid");
    OperatorBranches out;
    out.branch_lo = kInf;
    out.branch_hi = -kInf;
    for (double c : cgrid.nodes) {
        const double r_small = prm.small_radius(c);
        const BallStats small = ball_stats(phi, x, r_small, spec, fallback_count);
        const double avg = m_rho(phi, x, prm.eps * std::pow(c, -prm.alpha / 2.0), prm, spec,
                                 fallback_count);
        const double heads = prm.alpha * small.sup + (1.0 - prm.alpha) * avg;
        const double tails = prm.alpha * small.inf + (1.0 - prm.alpha) * avg;
        if (heads < out.branch_lo) {
            out.branch_lo = heads;
            out.lo_c = c;
        }
        if (tails > out.branch_hi) {
            out.branch_hi = tails;
            out.hi_c = c;
        }
    }
    return out;
}

/// A_eps[phi](x): half the max of the heads branch against phi(x) plus half
/// the min of the tails branch against phi(x).
inline double a_eps(const ScalarField& phi, const Point& x, const Params& prm, const CGrid& cgrid,
                    const SamplingSpec& spec = {}, long* fallback_count = nullptr) {
    const OperatorBranches b = a_eps_branches(phi, x, prm, cgrid, spec, fallback_count);
    const double px = phi.eval(x);
    return 0.5 * std::max(b.branch_lo, px) + 0.5 * std::min(b.branch_hi, px);
}

/// Signed expansion defect: (A_eps[phi](x) - phi(x)) * 2/eps^2 minus the
/// signed (p-1)-th root of the p-Laplacian. Tends to 0 along eps ladders for
/// smooth fields.
inline double expansion_error(const ScalarField& phi, const Point& x, const Params& prm,
                              const CGrid& cgrid, const SamplingSpec& spec = {}) {
    if (!phi.is_analytic()) throw std::invalid_argument("expansion_error: analytic field required");
    const double plap = phi.analytic().p_laplacian
                            ? phi.analytic().p_laplacian(x, prm)
                            : analytic_p_laplacian(phi.analytic(), x, prm);
    const double quotient = (a_eps(phi, x, prm, cgrid, spec) - phi.eval(x)) * 2.0 / (prm.eps * prm.eps);
    return quotient - signed_pow(plap, 1.0 / (prm.p - 1.0));
}

struct ExpansionReport {
    std::vector<double> eps_ladder;
    std::vector<double> errors;    // absolute values, same length as ladder
    double fitted_slope = 0.0;
    double reference_slope = 0.0;
    bool degenerate = false;       // errors at float noise floor, slope unreliable

    void save_csv(const std::string& path) const {
        std::ofstream out(path);
        if (!out) throw std::runtime_error("ExpansionReport: cannot write " + path);
        out.precision(17);
        out << "eps,abs_error\n";
        for (std::size_t i = 0; i < eps_ladder.size(); ++i)
            out << eps_ladder[i] << "," << errors[i] << "\n";
        out << "slope," << fitted_slope << "\n";
        out << "reference_slope," << reference_slope << "\n";
    }
};

/// Least-squares slope of log|E| against log eps. Zeros and sub-noise-floor
/// errors are excluded; if fewer than 3 usable points remain the fit is
/// flagged degenerate.
inline ExpansionReport order_fit(const std::vector<double>& eps_ladder,
                                 const std::vector<double>& errors, double p) {
    if (eps_ladder.size() != errors.size() || eps_ladder.size() < 3)
        throw std::invalid_argument("order_fit: need ladder of length >= 3");
    for (std::size_t i = 1; i < eps_ladder.size(); ++i)
        if (eps_ladder[i] >= eps_ladder[i - 1])
            throw std::invalid_argument("order_fit: ladder must be strictly decreasing");
    ExpansionReport rep;
    rep.eps_ladder = eps_ladder;
    rep.errors.reserve(errors.size());
    for (double e : errors) rep.errors.push_back(std::abs(e));
    rep.reference_slope = std::min(2.0 - 4.0 / p, 2.0 / (3.0 * p - 4.0));

    std::vector<double> lx, ly;
    for (std::size_t i = 0; i < rep.errors.size(); ++i) {
        if (rep.errors[i] > 1e-14) {
            lx.push_back(std::log(eps_ladder[i]));
            ly.push_back(std::log(rep.errors[i]));
        }
    }
    if (lx.size() < 3) {
        rep.degenerate = true;
        return rep;
    }
    double mx = 0.0, my = 0.0;
    for (std::size_t i = 0; i < lx.size(); ++i) {
        mx += lx[i];
        my += ly[i];
    }
    mx /= lx.size();
    my /= ly.size();
    double sxx = 0.0, sxy = 0.0;
    for (std::size_t i = 0; i < lx.size(); ++i) {
        sxx += (lx[i] - mx) * (lx[i] - mx);
        sxy += (lx[i] - mx) * (ly[i] - my);
    }
    if (sxx == 0.0) {
        rep.degenerate = true;
        return rep;
    }
    rep.fitted_slope = sxy / sxx;
    return rep;
}

}  // namespace plgame
