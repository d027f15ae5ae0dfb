#pragma once

// Problem parameters and the scalar building blocks: signed powers, the
// truncated geometric-mean identity, and closed-form p-Laplacians used as
// oracles throughout the test suites.

#include <cmath>
#include <cstddef>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

namespace plgame {

constexpr double kInf = std::numeric_limits<double>::infinity();

/// All derived constants are pure functions of (d, p, eps).
struct Params {
    int d = 1;           // spatial dimension
    double p = 3.0;      // nonlinearity exponent, p > 2
    double eps = 0.3;    // scale parameter, in (0,1)

    double alpha = 0.0;  // (p-2)/(p-1)
    double beta = 0.0;   // (p-2)/(p+d)
    double gamma = 0.0;  // sqrt(2(p+d))
    double tau = 0.0;    // eps^2/2
    double m_eps = 0.0;  // eps^{2(p-1)/(3p-4)}
    double M_eps = 0.0;  // eps^{-2+2/p}
    double band_width = 0.0;

    Params() { recompute(); }
    Params(int d_, double p_, double eps_) : d(d_), p(p_), eps(eps_) {
        if (d < 1) throw std::invalid_argument("Params: d must be >= 1");
        if (!(p > 2.0)) throw std::invalid_argument("Params: requires p > 2");
        if (!(eps > 0.0 && eps < 1.0))
            throw std::invalid_argument("Params: requires eps in (0,1)");
        recompute();
    }

    void recompute() {
        alpha = (p - 2.0) / (p - 1.0);
        beta = (p - 2.0) / (p + d);
        gamma = std::sqrt(2.0 * (p + d));
        tau = eps * eps / 2.0;
        m_eps = std::pow(eps, 2.0 * (p - 1.0) / (3.0 * p - 4.0));
        M_eps = std::pow(eps, -2.0 + 2.0 / p);
        band_width = std::max(eps * eps * std::pow(M_eps, 1.0 - alpha),
                              eps * std::pow(m_eps, -alpha / 2.0));
    }

    /// Radius of the extremum ball B_{eps^2 c^{1-alpha}}(x).
    double small_radius(double c) const { return eps * eps * std::pow(c, 1.0 - alpha); }
    /// Radius gamma*rho of the averaging ball, rho = eps*c^{-alpha/2}.
    double tug_radius(double c) const { return gamma * eps * std::pow(c, -alpha / 2.0); }
    /// Largest distance any ball of the operator reaches from its center.
    double reach() const { return std::max(small_radius(M_eps), tug_radius(m_eps)); }
};

/// Signed power sgn(a)*|a|^q, odd and monotone in a.
inline double signed_pow(double a, double q) {
    if (a == 0.0) return 0.0;
    return a > 0.0 ? std::pow(a, q) : -std::pow(-a, q);
}

/// inf over c in [m,M] of alpha*c^{1-alpha}*a + (1-alpha)*c^{-alpha}*b.
///
/// With m=0, M=inf this is the geometric mean a^alpha * b^{1-alpha}; with a
/// truncated interval the infimum sits at the stationary point clamped to
/// [m, M]. The dense-scan oracle lives in the tests.
inline double geometric_mean_inf(double a, double b, double alpha, double m, double M) {
    if (a < 0.0 || b < 0.0)
        throw std::invalid_argument("geometric_mean_inf: a, b must be nonnegative");
    if (!(alpha > 0.0 && alpha < 1.0))
        throw std::invalid_argument("geometric_mean_inf: alpha must be in (0,1)");
    if (!(m >= 0.0 && m < M))
        throw std::invalid_argument("geometric_mean_inf: requires 0 <= m < M");

    auto objective = [&](double c) {
        return alpha * std::pow(c, 1.0 - alpha) * a + (1.0 - alpha) * std::pow(c, -alpha) * b;
    };

    // Stationary point of the objective: c* = b/a (any positive power of the
    // ratio collapses to b/a after differentiating).
    if (a == 0.0) {
        // Only the decreasing b-term remains; infimum at the largest admissible c.
        return M == kInf ? 0.0 : objective(M);
    }
    if (b == 0.0) {
        return m == 0.0 ? 0.0 : objective(m);
    }
    double c_star = b / a;
    double c = std::min(std::max(c_star, m), M);
    return objective(c);
}

enum class RadialKind { neg_power, pos_power };

/// Closed-form p-Laplacian of |x|^{-a} (neg_power) and |x|^{b} (pos_power).
inline double p_laplacian_radial(RadialKind kind, double exponent, double r, const Params& prm) {
    const double p = prm.p;
    const double d = static_cast<double>(prm.d);
    if (exponent <= 0.0)
        throw std::invalid_argument("p_laplacian_radial: exponent must be positive");
    if (kind == RadialKind::neg_power) {
        if (r <= 0.0) throw std::invalid_argument("p_laplacian_radial: r > 0 required for neg_power");
        const double a = exponent;
        return std::pow(a, p - 1.0) * (a * (p - 1.0) + p - d) * std::pow(r, -a * (p - 1.0) - p);
    }
    const double b = exponent;
    const double power = b * (p - 1.0) - p;
    if (r == 0.0) {
        if (power > 0.0) return 0.0;  // continuous extension
        throw std::invalid_argument("p_laplacian_radial: pos_power at r=0 needs b(p-1) > p");
    }
    return std::pow(b, p - 1.0) * (b * (p - 1.0) + d - p) * std::pow(r, power);
}

}  // namespace plgame
