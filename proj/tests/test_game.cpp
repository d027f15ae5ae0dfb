#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "approx.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>

#include "plgame/game.hpp"
#include "plgame/test_functions.hpp"

using namespace plgame;

namespace {

GameProblem simple_problem(double eps = 0.3) {
    GameProblem prob;
    prob.params = Params(1, 3.0, eps);
    prob.domain = Domain::make_box({-1.0}, {1.0});
    prob.u0 = [](const Point& x) { return std::cos(1.3 * x[0]) + 0.3 * x[0]; };
    prob.g = [](const Point& x) { return 0.2 * x[0]; };
    return prob;
}

SpaceTimeSolution solve_for(const GameProblem& game, double T) {
    DirichletProblem prob;
    prob.params = game.params;
    prob.domain = game.domain;
    prob.u0 = game.u0;
    prob.g = game.g;
    prob.T = T;
    return solve_bounded(prob);
}

class OutOfBallStrategy : public Strategy {
public:
    explicit OutOfBallStrategy(const Params& prm) : prm_(prm) {}
    bool stay_or_play(const GameState&) override { return false; }
    double pick_c(const GameState&) override { return prm_.m_eps; }
    Point pick_small_ball_point(const GameState& s, double) override { return {s.x[0] + 100.0}; }
    Point pick_tug_point(const GameState& s, double) override { return {s.x[0] + 100.0}; }

private:
    Params prm_;
};

}  // namespace

TEST_CASE("always-stay episodes are deterministic in length and payoff") {
    GameProblem prob = simple_problem();
    const double tau = prob.params.tau;
    AlwaysStayStrategy stay(prob.params);
    const double t0 = 7.0 * tau;
    CounterRng rng(5, 0);
    EpisodeRecord rec = run_episode({0.25}, t0, stay, stay, prob, rng, true);
    CHECK(rec.rounds == 7);  // exactly ceil(2 t0 / eps^2)
    CHECK(rec.payoff == Approx(prob.u0({0.25})));
    for (const auto& rr : rec.trace) {
        CHECK(rr.x[0] == 0.25);
        CHECK(rr.branch == BranchTag::stay);
    }
}

TEST_CASE("constant data give constant payoff with zero spread") {
    GameProblem prob = simple_problem();
    prob.u0 = [](const Point&) { return 3.5; };
    prob.g = [](const Point&) { return 3.5; };
    UniformRandomStrategy sI(prob.params, 1), sII(prob.params, 2);
    ValueEstimate est = estimate_value({0.0}, 0.4, sI, sII, prob, 200, 9);
    CHECK(est.mean == Approx(3.5));
    CHECK(est.stderr_ == 0.0);
    CHECK(est.n == 200);
}

TEST_CASE("t0 within one step terminates after exactly one round") {
    GameProblem prob = simple_problem();
    AlwaysStayStrategy stay(prob.params);
    CounterRng rng(77, 0);
    EpisodeRecord rec = run_episode({0.1}, prob.params.tau * 0.9, stay, stay, prob, rng);
    CHECK(rec.rounds == 1);
    CHECK(rec.payoff == Approx(prob.u0({0.1})));
}

TEST_CASE("episode length bound and payoff bounds") {
    GameProblem prob = simple_problem();
    UniformRandomStrategy sI(prob.params, 3), sII(prob.params, 4);
    const double t0 = 0.5;
    const long cap = static_cast<long>(std::ceil(2.0 * t0 / (0.3 * 0.3))) + 1;
    double payoff_lo = kInf, payoff_hi = -kInf;
    // data bounds over the reachable region
    for (double x = -3.0; x <= 3.0; x += 0.01) {
        const double v = Domain::make_box({-1.0}, {1.0}).contains({x}) ? prob.u0({x}) : prob.g({x});
        payoff_lo = std::min(payoff_lo, v);
        payoff_hi = std::max(payoff_hi, v);
    }
    for (int e = 0; e < 300; ++e) {
        CounterRng rng(123, static_cast<std::uint64_t>(e));
        sI.reset_episode(123, static_cast<std::uint64_t>(e));
        sII.reset_episode(123, static_cast<std::uint64_t>(e) + 1000000);
        EpisodeRecord rec = run_episode({0.0}, t0, sI, sII, prob, rng);
        CHECK(rec.rounds <= cap);
        CHECK(rec.payoff >= payoff_lo - 1e-12);
        CHECK(rec.payoff <= payoff_hi + 1e-12);
    }
}

TEST_CASE("identical seeds reproduce trajectories bit for bit") {
    GameProblem prob = simple_problem();
    UniformRandomStrategy sI(prob.params, 3), sII(prob.params, 4);
    auto run_one = [&](std::uint64_t seed) {
        CounterRng rng(seed, 0);
        sI.reset_episode(seed, 0);
        sII.reset_episode(seed, 1);
        return run_episode({0.0}, 0.4, sI, sII, prob, rng, true);
    };
    EpisodeRecord a = run_one(99);
    EpisodeRecord b = run_one(99);
    REQUIRE(a.trace.size() == b.trace.size());
    CHECK(a.payoff == b.payoff);
    for (std::size_t i = 0; i < a.trace.size(); ++i) {
        CHECK(a.trace[i].x[0] == b.trace[i].x[0]);
        CHECK(a.trace[i].branch == b.trace[i].branch);
    }
}

TEST_CASE("raising the data never lowers paired-seed payoffs") {
    GameProblem lo = simple_problem();
    GameProblem hi = simple_problem();
    hi.u0 = [](const Point& x) { return std::cos(1.3 * x[0]) + 0.3 * x[0] + 0.4; };
    hi.g = [](const Point& x) { return 0.2 * x[0] + 0.4; };
    UniformRandomStrategy sI(lo.params, 3), sII(lo.params, 4);
    for (int e = 0; e < 200; ++e) {
        auto run_one = [&](const GameProblem& prob) {
            CounterRng rng(31, static_cast<std::uint64_t>(e));
            sI.reset_episode(31, static_cast<std::uint64_t>(e));
            sII.reset_episode(31, static_cast<std::uint64_t>(e) + 500000);
            return run_episode({0.0}, 0.4, sI, sII, prob, rng).payoff;
        };
        CHECK(run_one(lo) <= run_one(hi) + 1e-12);
    }
}

TEST_CASE("out-of-ball picks are clamped and counted") {
    GameProblem prob = simple_problem();
    OutOfBallStrategy bad(prob.params);
    AlwaysStayStrategy stay(prob.params);
    long violations = 0;
    GameState s;
    s.x = {0.0};
    s.t = 1.0;
    int picked_moves = 0;
    CounterRng rng(55, 0);
    for (int i = 0; i < 200 && !s.terminated; ++i) {
        RoundRecord rr;
        GameState n = play_round(s, bad, bad, prob, rng, &violations, &rr);
        if (n.x[0] != s.x[0]) {
            // clamped step cannot exceed the largest admissible radius
            CHECK(std::abs(n.x[0] - s.x[0]) <= prob.params.reach() + 1e-12);
        }
        // uniform-noise moves come from the referee, not a strategy pick
        if (rr.branch == BranchTag::alpha_ball || rr.branch == BranchTag::tug_I ||
            rr.branch == BranchTag::tug_II)
            ++picked_moves;
        s = n;
        (void)stay;
    }
    CHECK(picked_moves > 0);
    CHECK(violations >= picked_moves);
}

TEST_CASE("branch frequencies track the operator coefficients") {
    GameProblem prob = simple_problem();
    prob.whole_space = true;  // keep rounds alive regardless of position
    const Params& prm = prob.params;
    CenterStayStrategy play(prm);
    long counts[5] = {0, 0, 0, 0, 0};
    long plays = 0;
    const long rounds = 30000;
    CounterRng rng(2024, 0);
    for (long i = 0; i < rounds; ++i) {
        GameState s;
        s.x = {0.0};
        s.t = 1.0;
        RoundRecord rr;
        play_round(s, play, play, prob, rng, nullptr, &rr);
        ++counts[static_cast<int>(rr.branch)];
        if (rr.branch != BranchTag::stay) ++plays;
    }
    CHECK(counts[static_cast<int>(BranchTag::stay)] == 0);  // CenterStay always plays
    const double probs[4] = {prm.alpha, (1.0 - prm.alpha) * prm.beta / 2.0,
                             (1.0 - prm.alpha) * prm.beta / 2.0,
                             (1.0 - prm.alpha) * (1.0 - prm.beta)};
    const int tags[4] = {static_cast<int>(BranchTag::alpha_ball), static_cast<int>(BranchTag::tug_I),
                         static_cast<int>(BranchTag::tug_II),
                         static_cast<int>(BranchTag::uniform_noise)};
    for (int i = 0; i < 4; ++i) {
        const double freq = static_cast<double>(counts[tags[i]]) / static_cast<double>(plays);
        const double sigma = std::sqrt(probs[i] * (1.0 - probs[i]) / static_cast<double>(plays));
        CHECK(std::abs(freq - probs[i]) <= 4.0 * sigma);
    }
}

TEST_CASE("greedy value matches the DPP solution at the probe") {
    GameProblem prob = simple_problem();
    const double t0 = std::round(0.5 / prob.params.tau) * prob.params.tau;
    SpaceTimeSolution sol = solve_for(prob, t0);
    // payoff through the same lattice data the DPP uses
    const LatticeField f0 = sol.fields.front();
    prob.u0 = [f0](const Point& x) { return f0.eval(x); };

    const double eta = 1e-3;
    GreedyStrategy sI(sol, 1, eta), sII(sol, 2, eta);
    ValueEstimate est = estimate_value({0.0}, t0, sI, sII, prob, 4000, 17);
    const double u_probe = sol.eval_linear({0.0}, t0);
    CHECK(std::abs(est.mean - u_probe) <= 3.0 * est.stderr_ + eta + 1e-3);
}

TEST_CASE("martingale diagnostics: constant field slack and greedy drift") {
    GameProblem prob = simple_problem();
    const double eta = 0.01;
    const double t0 = 6.0 * prob.params.tau;

    // constant data: increments are exactly the slack decay +eta/2^{k+1} (role 1)
    GameProblem cprob = prob;
    cprob.u0 = [](const Point&) { return 1.0; };
    cprob.g = [](const Point&) { return 1.0; };
    SpaceTimeSolution csol = solve_for(cprob, t0);
    GreedyStrategy cI(csol, 1, eta), cII(csol, 2, eta);
    std::vector<EpisodeRecord> ceps;
    estimate_value({0.0}, t0, cI, cII, cprob, 100, 3, &ceps);
    MartingaleReport crep = martingale_diagnostic(ceps, csol, {0.0}, t0, eta, 1);
    // only the slack decays: per-round increments are +eta/2^{k+1}, k = 0..5
    CHECK(crep.increments == 600);
    CHECK(crep.mean_increment ==
          Approx(eta * (1.0 - std::pow(0.5, 6)) / 6.0).epsilon(1e-12));

    // greedy role 1 on real data: submartingale within noise
    SpaceTimeSolution sol = solve_for(prob, t0);
    const LatticeField f0 = sol.fields.front();
    prob.u0 = [f0](const Point& x) { return f0.eval(x); };
    GreedyStrategy sI(sol, 1, eta), sII(sol, 2, eta);
    std::vector<EpisodeRecord> eps1;
    estimate_value({0.0}, t0, sI, sII, prob, 800, 21, &eps1);
    MartingaleReport rep1 = martingale_diagnostic(eps1, sol, {0.0}, t0, eta, 1);
    CHECK(rep1.mean_increment >= -3.0 * rep1.stderr_);
    MartingaleReport rep2 = martingale_diagnostic(eps1, sol, {0.0}, t0, eta, 2);
    CHECK(rep2.mean_increment <= 3.0 * rep2.stderr_ + eta);

    CHECK_THROWS_AS(martingale_diagnostic({EpisodeRecord{}}, sol, {0.0}, t0, eta, 1),
                    std::invalid_argument);
}

TEST_CASE("trace CSV export shape") {
    GameProblem prob = simple_problem();
    AlwaysStayStrategy stay(prob.params);
    std::vector<EpisodeRecord> eps;
    estimate_value({0.0}, 3.0 * prob.params.tau, stay, stay, prob, 100, 1, &eps);
    const std::string path = "traces_test.csv";
    save_traces_csv(eps, 1, path);
    std::ifstream in(path);
    std::string header;
    std::getline(in, header);
    CHECK(header == "episode,k,x0,t,branch,payoff");
    long rows = 0;
    std::string line;
    while (std::getline(in, line)) ++rows;
    CHECK(rows == 300);  // 100 episodes x 3 rounds
    std::remove(path.c_str());
}
