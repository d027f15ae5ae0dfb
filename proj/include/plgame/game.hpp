#pragma once

// Two-player zero-sum game whose value is the DPP solution: round mechanics,
// strategies (greedy against a solved DPP plus adversarial baselines),
// Monte Carlo value estimation, and martingale diagnostics.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <functional>
#include <memory>
#include <stdexcept>
#include <string>
#include <vector>

#include "plgame/core.hpp"
#include "plgame/dpp.hpp"
#include "plgame/field.hpp"
#include "plgame/operator.hpp"
#include "plgame/rng.hpp"

namespace plgame {

struct GameProblem {
    Domain domain;
    std::function<double(const Point&)> u0;  // payoff when time runs out inside
    std::function<double(const Point&)> g;   // payoff on spatial exit
    Params params{1, 3.0, 0.3};
    bool whole_space = false;  // disables the spatial exit test
};

enum class BranchTag { stay, alpha_ball, tug_I, tug_II, uniform_noise };

struct GameState {
    Point x;
    double t = 0.0;
    int k = 0;
    bool terminated = false;
    double payoff = 0.0;  // valid once terminated
};

struct RoundRecord {
    int k = 0;
    Point x;  // position after the round
    double t = 0.0;
    BranchTag branch = BranchTag::stay;
    int mover = 0;  // 1 or 2
};

struct EpisodeRecord {
    double payoff = 0.0;
    int rounds = 0;
    long protocol_violations = 0;
    std::vector<RoundRecord> trace;  // filled only when tracing
};

/// Decision contract for one player. Point-picking entries must return
/// points in the prescribed ball; out-of-ball returns are clamped to the
/// boundary along the ray and counted as protocol violations.
class Strategy {
public:
    virtual ~Strategy() = default;
    /// Mover decision: true keeps the position for this round.
    virtual bool stay_or_play(const GameState& s) = 0;
    /// Opponent decision: the c parameter in [m_eps, M_eps].
    virtual double pick_c(const GameState& s) = 0;
    virtual Point pick_small_ball_point(const GameState& s, double c) = 0;
    virtual Point pick_tug_point(const GameState& s, double c) = 0;
    /// Re-keys any internal randomness; called once per episode.
    virtual void reset_episode(std::uint64_t, std::uint64_t) {}
};

namespace detail {

inline Point clamp_to_ball(const Point& center, double radius, const Point& y, long* violations) {
    Point rel = y;
    for (std::size_t i = 0; i < rel.size(); ++i) rel[i] -= center[i];
    const double r = norm(rel);
    if (r <= radius * (1.0 + 1e-12)) return y;
    if (violations) ++(*violations);
    Point out = center;
    for (std::size_t i = 0; i < out.size(); ++i) out[i] += rel[i] * (radius / r);
    return out;
}

inline Point uniform_in_ball(const Point& center, double radius, int d, CounterRng& rng) {
    if (d == 1) return {center[0] + rng.uniform(-radius, radius)};
    // rejection from the bounding box
    for (;;) {
        Point y(d);
        double s = 0.0;
        for (int k = 0; k < d; ++k) {
            y[k] = rng.uniform(-radius, radius);
            s += y[k] * y[k];
        }
        if (s <= radius * radius) {
            for (int k = 0; k < d; ++k) y[k] += center[k];
            return y;
        }
    }
}

}  // namespace detail

/// One round, implementing the fixed coin order (fair coin, alpha coin,
/// beta coin, tug fair coin, uniform draw). t always decreases by tau.
inline GameState play_round(const GameState& s, Strategy& S_I, Strategy& S_II,
                            const GameProblem& prob, CounterRng& rng,
                            long* violations = nullptr, RoundRecord* rec = nullptr) {
    if (s.terminated) throw std::logic_error("play_round: episode already terminated");
    const Params& prm = prob.params;
    GameState next = s;
    next.k = s.k + 1;
    next.t = s.t - prm.tau;

    const bool heads = rng.coin(0.5);  // heads: Player I moves
    Strategy& mover = heads ? S_I : S_II;
    Strategy& opponent = heads ? S_II : S_I;
    BranchTag tag = BranchTag::stay;

    if (!mover.stay_or_play(s)) {
        double c = opponent.pick_c(s);
        c = std::min(std::max(c, prm.m_eps), prm.M_eps);
        if (rng.coin(prm.alpha)) {
            const double r = prm.small_radius(c);
            next.x = detail::clamp_to_ball(s.x, r, mover.pick_small_ball_point(s, c), violations);
            tag = BranchTag::alpha_ball;
        } else {
            const double r = prm.tug_radius(c);
            if (rng.coin(prm.beta)) {
                const bool tug_heads = rng.coin(0.5);
                Strategy& tugger = tug_heads ? S_I : S_II;
                next.x = detail::clamp_to_ball(s.x, r, tugger.pick_tug_point(s, c), violations);
                tag = tug_heads ? BranchTag::tug_I : BranchTag::tug_II;
            } else {
                next.x = detail::uniform_in_ball(s.x, r, prm.d, rng);
                tag = BranchTag::uniform_noise;
            }
        }
    }

    if (next.t <= 1e-12) {
        next.terminated = true;
        next.payoff = (prob.whole_space || prob.domain.contains(next.x)) ? prob.u0(next.x)
                                                                         : prob.g(next.x);
    } else if (!prob.whole_space && !prob.domain.contains(next.x)) {
        next.terminated = true;
        next.payoff = prob.g(next.x);
    }

    if (rec) {
        rec->k = next.k;
        rec->x = next.x;
        rec->t = next.t;
        rec->branch = tag;
        rec->mover = heads ? 1 : 2;
    }
    return next;
}

inline EpisodeRecord run_episode(const Point& x0, double t0, Strategy& S_I, Strategy& S_II,
                                 const GameProblem& prob, CounterRng& rng, bool trace = false) {
    if (t0 <= 0.0) throw std::invalid_argument("run_episode: t0 must be positive");
    if (!prob.whole_space && !prob.domain.contains(x0))
        throw std::invalid_argument("run_episode: x0 outside the domain");
    EpisodeRecord rec;
    GameState s;
    s.x = x0;
    s.t = t0;
    while (!s.terminated) {
        RoundRecord rr;
        s = play_round(s, S_I, S_II, prob, rng, &rec.protocol_violations, trace ? &rr : nullptr);
        ++rec.rounds;
        if (trace) rec.trace.push_back(rr);
    }
    rec.payoff = s.payoff;
    return rec;
}

// ---------------------------------------------------------------------------
// Strategies

namespace detail {

/// Sampled argmax/argmin of a field over a ball, using the same sample set
/// as ball_stats (center, interior lattice nodes, boundary directions).
inline Point ball_argopt(const ScalarField& phi, const Point& center, double radius,
                         const SamplingSpec& spec, bool maximize) {
    if (phi.cache()) return {phi.cache()->argopt(center[0], radius, maximize)};
    Point best_x = center;
    double best = phi.eval(center);
    auto consider = [&](const Point& y) {
        const double v = phi.eval(y);
        if (maximize ? v > best : v < best) {
            best = v;
            best_x = y;
        }
    };
    for (const auto& dir : sphere_directions(phi.dim(), spec.boundary_points))
        consider(axpy(center, radius, dir));
    if (phi.is_lattice()) {
        const LatticeField& lf = phi.lattice();
        const int d = lf.dim();
        std::vector<int> lo(d), hi(d), idx(d);
        for (int k = 0; k < d; ++k) {
            lo[k] = std::max(0, static_cast<int>(std::ceil(
                                    (center[k] - radius - lf.origin()[k]) / lf.h())));
            hi[k] = std::min(lf.shape()[k] - 1,
                             static_cast<int>(std::floor(
                                 (center[k] + radius - lf.origin()[k]) / lf.h())));
        }
        std::function<void(int)> rec = [&](int k) {
            if (k == d) {
                Point y = lf.node(idx);
                Point rel = y;
                for (int j = 0; j < d; ++j) rel[j] -= center[j];
                if (norm(rel) < radius) consider(y);
                return;
            }
            for (idx[k] = lo[k]; idx[k] <= hi[k]; ++idx[k]) rec(k + 1);
        };
        rec(0);
    } else {
        for (int sh = 1; sh <= spec.interior_shells; ++sh) {
            const double r = radius * sh / (spec.interior_shells + 1);
            for (const auto& dir : sphere_directions(phi.dim(), spec.boundary_points))
                consider(axpy(center, r, dir));
        }
    }
    return best_x;
}

}  // namespace detail

/// Greedy strategy derived from a solved DPP. Role I maximizes, role II
/// minimizes; point and c choices optimize the sampled next-level field, so
/// the eta/2^{k+1} slack of the value argument is met relative to the
/// sampled extrema the DPP itself uses.
class GreedyStrategy : public Strategy {
public:
    GreedyStrategy(const SpaceTimeSolution& sol, int role, double eta, int n_c = 48,
                   SamplingSpec spec = {})
        : sol_(&sol), role_(role), eta_(eta), cgrid_(CGrid::make(sol.params, n_c)), spec_(spec) {
        if (role != 1 && role != 2) throw std::invalid_argument("GreedyStrategy: role is 1 or 2");
        if (eta <= 0.0) throw std::invalid_argument("GreedyStrategy: eta must be positive");
        levels_.reserve(sol.fields.size());
        for (const auto& f : sol.fields) levels_.emplace_back(f, /*build_cache=*/true);
    }

    const Params& params() const { return sol_->params; }

    /// Field at the next time level t - tau (mesh-aligned by construction).
    const ScalarField& next_field(double t) const {
        const double tn = t - sol_->params.tau;
        int j = static_cast<int>(std::lround(tn / sol_->params.tau));
        j = std::min(std::max(j, 0), static_cast<int>(levels_.size()) - 1);
        return levels_[static_cast<std::size_t>(j)];
    }

    bool stay_or_play(const GameState& s) override {
        const ScalarField& f = next_field(s.t);
        const OperatorBranches b = a_eps_branches(f, s.x, sol_->params, cgrid_, spec_);
        const double here = f.eval(s.x);
        // Ties (constant regions) must resolve to staying; the branch values
        // carry O(1e-16) quadrature dust, so compare with a dead band.
        const double tie = 1e-12 * (1.0 + std::abs(here));
        return role_ == 1 ? here >= b.branch_lo - tie : here <= b.branch_hi + tie;
    }

    double pick_c(const GameState& s) override {
        const ScalarField& f = next_field(s.t);
        const OperatorBranches b = a_eps_branches(f, s.x, sol_->params, cgrid_, spec_);
        // As c-chooser, role I drives the tails branch up, role II drives the
        // heads branch down.
        return role_ == 1 ? b.hi_c : b.lo_c;
    }

    Point pick_small_ball_point(const GameState& s, double c) override {
        return detail::ball_argopt(next_field(s.t), s.x, sol_->params.small_radius(c), spec_,
                                   role_ == 1);
    }

    Point pick_tug_point(const GameState& s, double c) override {
        return detail::ball_argopt(next_field(s.t), s.x, sol_->params.tug_radius(c), spec_,
                                   role_ == 1);
    }

private:
    const SpaceTimeSolution* sol_;
    int role_;
    double eta_;
    CGrid cgrid_;
    SamplingSpec spec_;
    std::vector<ScalarField> levels_;
};

/// Adversarial baselines for bracketing the value empirically.
class UniformRandomStrategy : public Strategy {
public:
    explicit UniformRandomStrategy(const Params& prm, std::uint64_t salt = 0)
        : prm_(prm), salt_(salt), rng_(salt, 0) {}

    void reset_episode(std::uint64_t master, std::uint64_t episode) override {
        rng_ = CounterRng(master ^ salt_, episode * 2 + 1);
    }

    bool stay_or_play(const GameState&) override { return rng_.coin(0.5); }

    double pick_c(const GameState&) override {
        const double lm = std::log(prm_.m_eps), lM = std::log(prm_.M_eps);
        return std::exp(rng_.uniform(lm, lM));
    }

    Point pick_small_ball_point(const GameState& s, double c) override {
        return detail::uniform_in_ball(s.x, prm_.small_radius(c), prm_.d, rng_);
    }

    Point pick_tug_point(const GameState& s, double c) override {
        return detail::uniform_in_ball(s.x, prm_.tug_radius(c), prm_.d, rng_);
    }

private:
    Params prm_;
    std::uint64_t salt_;
    CounterRng rng_;
};

/// Always stays as mover; forced picks return the current position.
class AlwaysStayStrategy : public Strategy {
public:
    explicit AlwaysStayStrategy(const Params& prm) : prm_(prm) {}
    bool stay_or_play(const GameState&) override { return true; }
    double pick_c(const GameState&) override { return prm_.m_eps; }
    Point pick_small_ball_point(const GameState& s, double) override { return s.x; }
    Point pick_tug_point(const GameState& s, double) override { return s.x; }

private:
    Params prm_;
};

/// Always plays but never moves the token itself; position changes only
/// through the uniform-noise branch or the opponent.
class CenterStayStrategy : public Strategy {
public:
    explicit CenterStayStrategy(const Params& prm) : prm_(prm) {}
    bool stay_or_play(const GameState&) override { return false; }
    double pick_c(const GameState&) override { return prm_.M_eps; }
    Point pick_small_ball_point(const GameState& s, double) override { return s.x; }
    Point pick_tug_point(const GameState& s, double) override { return s.x; }

private:
    Params prm_;
};

/// Steers every pick toward the sampled worst point for the given victim
/// role (worst for role 1 = sampled minimum of the next-level field).
class WorstSampledPointStrategy : public Strategy {
public:
    WorstSampledPointStrategy(const SpaceTimeSolution& sol, int victim_role, int n_c = 48,
                              SamplingSpec spec = {})
        : greedy_(sol, victim_role == 1 ? 2 : 1, 1e-9, n_c, spec) {}

    bool stay_or_play(const GameState&) override { return false; }
    double pick_c(const GameState& s) override { return greedy_.pick_c(s); }
    Point pick_small_ball_point(const GameState& s, double c) override {
        return greedy_.pick_small_ball_point(s, c);
    }
    Point pick_tug_point(const GameState& s, double c) override {
        return greedy_.pick_tug_point(s, c);
    }

private:
    GreedyStrategy greedy_;
};

// ---------------------------------------------------------------------------
// Monte Carlo estimation

struct ValueEstimate {
    double mean = 0.0;
    double stderr_ = 0.0;
    long n = 0;
    std::vector<long> histogram;  // fixed bin count over [hist_lo, hist_hi]
    double hist_lo = 0.0, hist_hi = 0.0;
    long protocol_violations = 0;

    void save_json(const std::string& path) const {
        std::ofstream out(path);
        if (!out) throw std::runtime_error("ValueEstimate: cannot write " + path);
        out.precision(17);
        out << "{\n  \"mean\": " << mean << ",\n  \"stderr\": " << stderr_
            << ",\n  \"n\": " << n << ",\n  \"protocol_violations\": " << protocol_violations
            << ",\n  \"hist_lo\": " << hist_lo << ",\n  \"hist_hi\": " << hist_hi
            << ",\n  \"histogram\": [";
        for (std::size_t i = 0; i < histogram.size(); ++i) out << (i ? ", " : "") << histogram[i];
        out << "]\n}\n";
    }
};

/// Independent episodes on per-episode derived streams.
inline ValueEstimate estimate_value(const Point& x0, double t0, Strategy& S_I, Strategy& S_II,
                                    const GameProblem& prob, long n_episodes, std::uint64_t seed,
                                    std::vector<EpisodeRecord>* traced = nullptr) {
    if (n_episodes < 100) throw std::invalid_argument("estimate_value: need >= 100 episodes");
    std::vector<double> payoffs;
    payoffs.reserve(static_cast<std::size_t>(n_episodes));
    ValueEstimate est;
    for (long e = 0; e < n_episodes; ++e) {
        CounterRng rng(seed, static_cast<std::uint64_t>(e));
        S_I.reset_episode(seed, static_cast<std::uint64_t>(e));
        S_II.reset_episode(seed, static_cast<std::uint64_t>(e) + 0x8000000000000000ULL);
        EpisodeRecord rec = run_episode(x0, t0, S_I, S_II, prob, rng, traced != nullptr);
        payoffs.push_back(rec.payoff);
        est.protocol_violations += rec.protocol_violations;
        if (traced) traced->push_back(std::move(rec));
    }
    est.n = n_episodes;
    double m = 0.0;
    for (double v : payoffs) m += v;
    m /= static_cast<double>(n_episodes);
    double s2 = 0.0;
    for (double v : payoffs) s2 += (v - m) * (v - m);
    s2 /= static_cast<double>(n_episodes - 1);
    est.mean = m;
    est.stderr_ = std::sqrt(s2 / static_cast<double>(n_episodes));

    est.hist_lo = *std::min_element(payoffs.begin(), payoffs.end());
    est.hist_hi = *std::max_element(payoffs.begin(), payoffs.end());
    const int bins = 20;
    est.histogram.assign(bins, 0);
    const double span = std::max(est.hist_hi - est.hist_lo, 1e-300);
    for (double v : payoffs) {
        int b = static_cast<int>((v - est.hist_lo) / span * bins);
        ++est.histogram[static_cast<std::size_t>(std::min(b, bins - 1))];
    }
    return est;
}

struct MartingaleReport {
    double mean_increment = 0.0;
    double stderr_ = 0.0;
    long increments = 0;
};

/// Per-round increments of M_k = u_eps(x_k, t_k) -+ eta/2^k. Role 1 uses the
/// minus variant (submartingale under greedy I), role 2 the plus variant.
inline MartingaleReport martingale_diagnostic(const std::vector<EpisodeRecord>& episodes,
                                              const SpaceTimeSolution& sol, const Point& x0,
                                              double t0, double eta, int role) {
    if (role != 1 && role != 2) throw std::invalid_argument("martingale_diagnostic: role is 1 or 2");
    auto u_at = [&](const Point& x, double t) {
        int j = static_cast<int>(std::lround(t / sol.params.tau));
        j = std::min(std::max(j, 0), static_cast<int>(sol.fields.size()) - 1);
        return sol.fields[static_cast<std::size_t>(j)].eval(x);
    };
    const double sign = role == 1 ? -1.0 : 1.0;
    std::vector<double> incs;
    for (const auto& ep : episodes) {
        if (ep.trace.empty()) throw std::invalid_argument("martingale_diagnostic: untraced episode");
        double prev = u_at(x0, t0) + sign * eta;  // k = 0
        double slack = eta;
        for (const auto& rr : ep.trace) {
            slack *= 0.5;
            const double cur = u_at(rr.x, rr.t) + sign * slack;
            incs.push_back(cur - prev);
            prev = cur;
        }
    }
    MartingaleReport rep;
    rep.increments = static_cast<long>(incs.size());
    if (incs.empty()) return rep;
    double m = 0.0;
    for (double v : incs) m += v;
    m /= static_cast<double>(incs.size());
    double s2 = 0.0;
    for (double v : incs) s2 += (v - m) * (v - m);
    s2 /= std::max<std::size_t>(incs.size() - 1, 1);
    rep.mean_increment = m;
    rep.stderr_ = std::sqrt(s2 / static_cast<double>(incs.size()));
    return rep;
}

/// Compact trace export: k, x components, t, branch tag, payoff on the final
/// row of each episode.
inline void save_traces_csv(const std::vector<EpisodeRecord>& episodes, int d,
                            const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("save_traces_csv: cannot write " + path);
    out.precision(17);
    out << "episode,k";
    for (int k = 0; k < d; ++k) out << ",x" << k;
    out << ",t,branch,payoff\n";
    const char* names[] = {"stay", "alpha_ball", "tug_I", "tug_II", "uniform_noise"};
    for (std::size_t e = 0; e < episodes.size(); ++e) {
        const auto& ep = episodes[e];
        for (std::size_t r = 0; r < ep.trace.size(); ++r) {
            const auto& rr = ep.trace[r];
            out << e << "," << rr.k;
            for (int k = 0; k < d; ++k) out << "," << rr.x[k];
            out << "," << rr.t << "," << names[static_cast<int>(rr.branch)] << ",";
            if (r + 1 == ep.trace.size()) out << ep.payoff;
            out << "\n";
        }
    }
}

}  // namespace plgame
