// Experiment runner: loads a JSON config, wires the library modules into one
// reproducible run, and writes CSV/JSON artifacts with the config hash
// embedded. Exit codes: 0 success, 2 validation failure, 3 numerical abort.

#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "plgame/core.hpp"
#include "plgame/dpp.hpp"
#include "plgame/field.hpp"
#include "plgame/game.hpp"
#include "plgame/operator.hpp"
#include "plgame/test_functions.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace plgame;

namespace {

std::string fnv1a_hex(const std::string& bytes) {
    std::uint64_t h = 1469598103934665603ULL;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 1099511628211ULL;
    }
    std::ostringstream os;
    os << std::hex << h;
    return os.str();
}

Point json_point(const json& j) {
    Point p;
    for (const auto& v : j) p.push_back(v.get<double>());
    return p;
}

struct NamedDatum {
    std::string name = "constant";
    double scale = 1.0;
    double offset = 0.0;
};

NamedDatum parse_datum(const json& j) {
    NamedDatum d;
    if (j.is_string()) {
        d.name = j.get<std::string>();
    } else {
        d.name = j.at("name").get<std::string>();
        d.scale = j.value("scale", 1.0);
        d.offset = j.value("offset", 0.0);
    }
    return d;
}

std::function<double(const Point&)> datum_fn(const NamedDatum& d, int dim, const Params& prm) {
    TestFunction tf = make_test_function(d.name, dim, prm);
    const double scale = d.scale, offset = d.offset;
    auto value = tf.field.value;
    return [value, scale, offset](const Point& x) { return scale * value(x) + offset; };
}

struct Config {
    std::string kind;
    json raw;
    std::string hash;
};

Config load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::invalid_argument("cannot open config: " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    Config c;
    c.hash = fnv1a_hex(ss.str());
    c.raw = json::parse(ss.str());
    c.kind = c.raw.at("kind").get<std::string>();
    return c;
}

Params params_from(const json& p, double eps_override) {
    const double eps = eps_override > 0.0 ? eps_override
                                          : (p.contains("eps") ? p.at("eps").get<double>()
                                                               : p.at("eps_ladder")[0].get<double>());
    return Params(p.value("d", 1), p.value("p", 3.0), eps);
}

void validate_config(const Config& c) {
    const json& p = c.raw.at("params");
    if (!p.contains("eps") && !p.contains("eps_ladder"))
        throw std::invalid_argument("params needs eps or eps_ladder");
    if (p.contains("eps_ladder")) {
        const auto& lad = p.at("eps_ladder");
        for (std::size_t i = 1; i < lad.size(); ++i)
            if (lad[i].get<double>() >= lad[i - 1].get<double>())
                throw std::invalid_argument("eps_ladder must be strictly decreasing");
    }
    params_from(p, 0.0);  // rejects bad d, p, eps
    static const std::vector<std::string> kinds = {"expansion", "dirichlet", "whole_space",
                                                   "game_value", "property_suite"};
    if (std::find(kinds.begin(), kinds.end(), c.kind) == kinds.end())
        throw std::invalid_argument("unknown kind: " + c.kind);
    if (c.raw.contains("data")) {
        for (const auto& [key, val] : c.raw.at("data").items()) {
            if (!val.is_string() && !val.is_object()) continue;  // points, scalars
            make_test_function(parse_datum(val).name, params_from(p, 0.0).d, params_from(p, 0.0));
        }
    }
}

fs::path output_dir(const Config& c) {
    std::string dir = ".";
    if (c.raw.contains("run")) dir = c.raw.at("run").value("output_dir", ".");
    fs::path out(dir);
    if (out.is_relative()) {
        if (const char* root = std::getenv("PLGAME_OUTPUT_ROOT")) out = fs::path(root) / out;
    }
    fs::create_directories(out);
    return out;
}

void write_manifest(const fs::path& dir, const Config& c, const json& extra, double wall_s) {
    json m;
    m["config_hash"] = c.hash;
    m["kind"] = c.kind;
    m["wall_seconds"] = wall_s;
    m["library_version"] = "1.0.0";
    m["extra"] = extra;
    std::ofstream out(dir / "manifest.json");
    out << m.dump(2) << "\n";
}

DirichletProblem problem_from(const Config& c, const Params& prm) {
    DirichletProblem prob;
    prob.params = prm;
    const json& geo = c.raw.at("geometry");
    const std::string shape = geo.value("shape", "box");
    if (shape == "box")
        prob.domain = Domain::make_box(json_point(geo.at("lo")), json_point(geo.at("hi")));
    else if (shape == "ball")
        prob.domain = Domain::make_ball(json_point(geo.at("center")), geo.at("radius").get<double>());
    else
        throw std::invalid_argument("unknown geometry shape: " + shape);
    const json& data = c.raw.at("data");
    prob.u0 = datum_fn(parse_datum(data.at("u0")), prm.d, prm);
    prob.g = datum_fn(parse_datum(data.at("g")), prm.d, prm);
    if (c.raw.contains("run")) {
        const json& run = c.raw.at("run");
        prob.T = run.value("T", 1.0);
        prob.n_c = run.value("n_c", 48);
        prob.h = run.value("h", 0.0);
    }
    return prob;
}

json solution_summary(const SpaceTimeSolution& sol) {
    json s;
    s["steps"] = sol.steps();
    s["sup_norms"] = sol.sup_norms;
    s["fallback_count"] = sol.fallback_count;
    s["truncation_bound"] = sol.truncation_bound;
    return s;
}

int run_expansion(const Config& c, const fs::path& out) {
    const json& p = c.raw.at("params");
    std::vector<double> ladder;
    if (p.contains("eps_ladder"))
        for (const auto& v : p.at("eps_ladder")) ladder.push_back(v.get<double>());
    else
        ladder.push_back(p.at("eps").get<double>());
    const json& data = c.raw.at("data");
    const NamedDatum phi_d = parse_datum(data.at("phi"));
    Point x = data.contains("point") ? json_point(data.at("point"))
                                     : Point(p.value("d", 1), 0.0);
    const int n_c = c.raw.contains("run") ? c.raw.at("run").value("n_c", 48) : 48;

    std::vector<double> errors;
    for (double eps : ladder) {
        Params prm = params_from(p, eps);
        TestFunction tf = make_test_function(phi_d.name, prm.d, prm);
        ScalarField phi{tf.field};
        errors.push_back(expansion_error(phi, x, prm, CGrid::make(prm, n_c)));
    }
    json extra;
    if (ladder.size() >= 3) {
        ExpansionReport rep = order_fit(ladder, errors, params_from(p, ladder[0]).p);
        rep.save_csv((out / "expansion_report.csv").string());
        extra["fitted_slope"] = rep.fitted_slope;
        extra["reference_slope"] = rep.reference_slope;
        extra["degenerate"] = rep.degenerate;
    } else {
        std::ofstream f(out / "expansion_report.csv");
        f.precision(17);
        f << "eps,abs_error\n";
        for (std::size_t i = 0; i < ladder.size(); ++i)
            f << ladder[i] << "," << std::abs(errors[i]) << "\n";
    }
    extra["errors"] = errors;
    write_manifest(out, c, extra, 0.0);
    return 0;
}

int run_dirichlet(const Config& c, const fs::path& out) {
    Params prm = params_from(c.raw.at("params"), 0.0);
    DirichletProblem prob = problem_from(c, prm);
    SpaceTimeSolution sol = solve_bounded(prob);
    const int stride = c.raw.contains("run") ? c.raw.at("run").value("stride", 1) : 1;
    sol.save(out.string(), "solution", stride, c.hash);
    write_manifest(out, c, solution_summary(sol), 0.0);
    return 0;
}

int run_whole_space(const Config& c, const fs::path& out) {
    Params prm = params_from(c.raw.at("params"), 0.0);
    const json& geo = c.raw.at("geometry");
    const double K = geo.at("K").get<double>();
    const json& data = c.raw.at("data");
    auto u0 = datum_fn(parse_datum(data.at("u0")), prm.d, prm);
    const double C = data.value("decay_C", 1.0);
    const json& run = c.raw.at("run");
    SpaceTimeSolution sol = solve_whole_space(u0, C, K, run.value("T", 0.5), prm,
                                              run.value("h", 0.0), run.value("eta", 0.0),
                                              run.value("n_c", 48));
    sol.save(out.string(), "solution", run.value("stride", 1), c.hash);
    RegularityReport rr = regularity_report(sol, sol.fields.front().h());
    json extra = solution_summary(sol);
    extra["translation_sup"] = rr.translation_sup;
    extra["max_time_ratio"] = rr.max_time_ratio;
    extra["interpolant_gap"] = rr.interpolant_gap;
    write_manifest(out, c, extra, 0.0);
    return 0;
}

int run_game_value(const Config& c, const fs::path& out) {
    Params prm = params_from(c.raw.at("params"), 0.0);
    DirichletProblem prob = problem_from(c, prm);
    const json& run = c.raw.at("run");
    const json& data = c.raw.at("data");
    const double t0 = run.value("t0", prob.T);
    Point x0 = data.contains("x0") ? json_point(data.at("x0")) : Point(prm.d, 0.0);
    const double eta = run.value("eta", 1e-3);
    const long n = run.value("n_episodes", 1000L);
    const std::uint64_t seed = run.value("seed", 1ULL);

    prob.T = std::ceil(t0 / prm.tau - 1e-12) * prm.tau;
    SpaceTimeSolution sol = solve_bounded(prob);

    GameProblem game;
    game.domain = prob.domain;
    game.params = prm;
    const LatticeField payoff_field = sol.fields.front();
    game.u0 = [payoff_field](const Point& x) { return payoff_field.eval(x); };
    game.g = prob.g;

    GreedyStrategy sI(sol, 1, eta, prob.n_c, prob.sampling);
    GreedyStrategy sII(sol, 2, eta, prob.n_c, prob.sampling);
    const double t0_mesh = std::round(t0 / prm.tau) * prm.tau;
    ValueEstimate est = estimate_value(x0, t0_mesh, sI, sII, game, n, seed);
    est.save_json((out / "value_estimate.json").string());

    json extra = solution_summary(sol);
    extra["u_eps_probe"] = sol.eval_linear(x0, t0_mesh);
    extra["t0_mesh"] = t0_mesh;
    extra["mc_mean"] = est.mean;
    extra["mc_stderr"] = est.stderr_;
    write_manifest(out, c, extra, 0.0);
    return 0;
}

int run_property_suite(const Config& c, const fs::path& out) {
    Params prm = params_from(c.raw.at("params"), 0.0);
    const CGrid cgrid = CGrid::make(prm);
    json results;
    bool ok = true;

    // Constant fixed point.
    {
        TestFunction tf = make_constant(prm.d, 4.25);
        ScalarField phi{tf.field};
        const double v = a_eps(phi, Point(prm.d, 0.0), prm, cgrid);
        const bool pass = std::abs(v - 4.25) <= 1e-12;
        results["constant_fixed_point"] = pass;
        ok = ok && pass;
    }
    // Affine exactness.
    {
        Point a(prm.d);
        for (int k = 0; k < prm.d; ++k) a[k] = 0.5 + k;
        TestFunction tf = make_affine(prm.d, a, -0.3);
        ScalarField phi{tf.field};
        Point x(prm.d, 0.1);
        const double v = a_eps(phi, x, prm, cgrid);
        const bool pass = std::abs(v - tf.field.value(x)) <= 1e-12;
        results["affine_exactness"] = pass;
        ok = ok && pass;
    }
    // Shift equivariance.
    {
        TestFunction tf = make_gaussian(prm.d, 1.0);
        ScalarField phi{tf.field};
        AnalyticField shifted = tf.field;
        auto base = tf.field.value;
        shifted.value = [base](const Point& x) { return base(x) + 2.5; };
        ScalarField psi{shifted};
        Point x(prm.d, 0.2);
        const double dv = a_eps(psi, x, prm, cgrid) - a_eps(phi, x, prm, cgrid);
        const bool pass = std::abs(dv - 2.5) <= 1e-10;
        results["shift_equivariance"] = pass;
        ok = ok && pass;
    }
    write_manifest(out, c, results, 0.0);
    return ok ? 0 : 3;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"numerical laboratory for a doubly nonlinear diffusion game"};
    app.require_subcommand(1);

    std::string config_path;
    double eps_override = 0.0;
    long n_override = 0;
    std::int64_t seed_override = -1;
    int threads = 1;
    std::string out_override;

    CLI::App* run = app.add_subcommand("run", "execute an experiment config");
    run->add_option("config", config_path, "path to JSON config")->required();
    run->add_option("--eps", eps_override, "override params.eps");
    run->add_option("--n-episodes", n_override, "override run.n_episodes");
    run->add_option("--seed", seed_override, "override run.seed");
    run->add_option("--threads", threads, "worker cap for per-node evaluation");
    run->add_option("--output", out_override, "override run.output_dir");

    CLI::App* validate = app.add_subcommand("validate", "check a config without running");
    validate->add_option("config", config_path, "path to JSON config")->required();

    CLI::App* list = app.add_subcommand("list-test-functions", "print the registered fields");

    CLI11_PARSE(app, argc, argv);

    if (list->parsed()) {
        for (const auto& [name, desc] : test_function_catalog())
            std::cout << name << "  " << desc << "\n";
        return 0;
    }

    Config cfg;
    try {
        cfg = load_config(config_path);
        validate_config(cfg);
    } catch (const std::exception& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    }
    if (validate->parsed()) {
        std::cout << "ok " << cfg.hash << "\n";
        return 0;
    }

    // flag overrides win over file values
    if (eps_override > 0.0) cfg.raw["params"]["eps"] = eps_override;
    if (n_override > 0) cfg.raw["run"]["n_episodes"] = n_override;
    if (seed_override >= 0) cfg.raw["run"]["seed"] = static_cast<std::uint64_t>(seed_override);
    if (!out_override.empty()) cfg.raw["run"]["output_dir"] = out_override;
    dpp_threads() = threads;

    try {
        const fs::path out = output_dir(cfg);
        const auto start = std::chrono::steady_clock::now();
        int rc;
        if (cfg.kind == "expansion") rc = run_expansion(cfg, out);
        else if (cfg.kind == "dirichlet") rc = run_dirichlet(cfg, out);
        else if (cfg.kind == "whole_space") rc = run_whole_space(cfg, out);
        else if (cfg.kind == "game_value") rc = run_game_value(cfg, out);
        else rc = run_property_suite(cfg, out);
        const double wall =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        std::cerr << "done in " << wall << " s, artifacts in " << out << "\n";
        return rc;
    } catch (const std::invalid_argument& e) {
        std::cerr << "validation error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "numerical abort: " << e.what() << "\n";
        return 3;
    }
}
