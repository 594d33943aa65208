#include "invextopo/cli.hpp"

#include <algorithm>
#include <cctype>
#include <chrono>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "invextopo/certify.hpp"
#include "invextopo/games.hpp"
#include "invextopo/minimax.hpp"
#include "invextopo/minimax_problem.hpp"
#include "invextopo/mountainpass.hpp"
#include "invextopo/report.hpp"
#include "invextopo/topology.hpp"

namespace invextopo {

namespace {

using nlohmann::json;

// Usage/config problems; mapped to exit code 2.
struct CliError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

std::vector<std::string> split(const std::string& text, char sep) {
    std::vector<std::string> out;
    std::string cur;
    for (char ch : text) {
        if (ch == sep) {
            out.push_back(cur);
            cur.clear();
        } else {
            cur.push_back(ch);
        }
    }
    out.push_back(cur);
    return out;
}

std::vector<double> parse_reals(const std::string& text, const char* what) {
    std::vector<double> out;
    for (const std::string& tok : split(text, ',')) {
        try {
            std::size_t used = 0;
            out.push_back(std::stod(tok, &used));
            if (used != tok.size()) throw std::invalid_argument(tok);
        } catch (const std::exception&) {
            throw CliError(std::string(what) + ": '" + tok + "' is not a number");
        }
    }
    return out;
}

std::vector<int> parse_ints(const std::string& text, const char* what) {
    std::vector<int> out;
    for (double v : parse_reals(text, what)) {
        const int n = static_cast<int>(v);
        if (v != n) throw CliError(std::string(what) + ": expected integers");
        out.push_back(n);
    }
    return out;
}

// Boxes are written lo,hi per axis: "-3,3,-3,3" is [-3,3]^2.
BoxDomain parse_box(const std::string& text, int dim, const char* what) {
    const std::vector<double> v = parse_reals(text, what);
    if (static_cast<int>(v.size()) != 2 * dim)
        throw CliError(std::string(what) + ": expected " + std::to_string(2 * dim) +
                       " comma-separated numbers (lo,hi per axis), got " +
                       std::to_string(v.size()));
    BoxDomain box;
    for (int i = 0; i < dim; ++i) {
        box.lo.push_back(v[2 * i]);
        box.hi.push_back(v[2 * i + 1]);
    }
    try {
        box.validate();
    } catch (const std::invalid_argument& e) {
        throw CliError(std::string(what) + ": " + e.what());
    }
    return box;
}

std::vector<double> interleaved(const BoxDomain& box) {
    std::vector<double> out;
    for (int i = 0; i < box.dim(); ++i) {
        out.push_back(box.lo[i]);
        out.push_back(box.hi[i]);
    }
    return out;
}

BoxDomain axis_slice(const BoxDomain& box, int first, int count) {
    BoxDomain out;
    out.lo.assign(box.lo.begin() + first, box.lo.begin() + first + count);
    out.hi.assign(box.hi.begin() + first, box.hi.begin() + first + count);
    return out;
}

// ---- run state ------------------------------------------------------------------

struct Ctx {
    json config = json::object();   // canonical semantic fields (hashed)
    json results = json::object();  // per-command payload
    std::vector<Verdict> verdicts;  // drives the exit code
    std::vector<std::pair<std::string, std::string>> artifacts;  // name -> content
};

// ---- sources --------------------------------------------------------------------

struct FieldOpts {
    std::string builtin;
    std::string expr;
    int dim = 0;
};

void add_field_options(CLI::App* cmd, FieldOpts& opts) {
    cmd->add_option("--builtin", opts.builtin, "Builtin field name");
    cmd->add_option("--expr", opts.expr, "Expression over x0..x{n-1}");
    cmd->add_option("--dim", opts.dim, "Variable count for --expr");
}

ScalarField resolve_field(const FieldOpts& opts, json& cfg) {
    if (opts.builtin.empty() == opts.expr.empty())
        throw CliError("need exactly one function source: --builtin or --expr");
    try {
        if (!opts.builtin.empty()) {
            cfg["builtin"] = opts.builtin;
            return builtin_field(opts.builtin);
        }
        if (opts.dim < 1) throw CliError("--expr needs --dim >= 1");
        cfg["expr"] = opts.expr;
        cfg["dim"] = opts.dim;
        return parse_field(opts.expr, opts.dim);
    } catch (const ParseError& e) {
        throw CliError(std::string("expression: ") + e.what());
    } catch (const std::invalid_argument& e) {
        throw CliError(e.what());
    }
}

struct GameOpts {
    std::string builtin;
    std::string json_path;
};

void add_game_options(CLI::App* cmd, GameOpts& opts) {
    cmd->add_option("--builtin", opts.builtin, "Builtin game name");
    cmd->add_option("--game-json", opts.json_path, "Path to a game JSON document");
}

GameSpec resolve_game(const GameOpts& opts, json& cfg) {
    if (opts.builtin.empty() == opts.json_path.empty())
        throw CliError("need exactly one game source: --builtin or --game-json");
    try {
        if (!opts.builtin.empty()) {
            cfg["builtin"] = opts.builtin;
            return builtin_game(opts.builtin);
        }
        std::ifstream in(opts.json_path);
        if (!in) throw CliError("cannot read game file: " + opts.json_path);
        std::stringstream buf;
        buf << in.rdbuf();
        // Hash the parsed document, not the path, so the config hash tracks
        // the game's content.
        cfg["game"] = json::parse(buf.str());
        return game_from_json(buf.str());
    } catch (const json::exception& e) {
        throw CliError(std::string("game JSON: ") + e.what());
    } catch (const ParseError& e) {
        throw CliError(std::string("game expression: ") + e.what());
    } catch (const std::invalid_argument& e) {
        throw CliError(e.what());
    }
}

BoxDomain box_or_default(const std::string& text, int dim, const BoxDomain& dflt,
                         const char* what) {
    return text.empty() ? dflt : parse_box(text, dim, what);
}

MinimaxProblem split_problem(const ScalarField& f, int nx, const BoxDomain& joint) {
    if (nx < 1 || nx >= f.dim)
        throw CliError("--nx must split the variables into two non-empty blocks");
    return make_minimax(f, nx, axis_slice(joint, 0, nx), axis_slice(joint, nx, f.dim - nx));
}

Block parse_block(const std::string& name) {
    if (name == "x") return Block::X;
    if (name == "y") return Block::Y;
    throw CliError("--block must be x or y");
}

void record(Ctx& ctx, const char* key, const Certificate& cert) {
    ctx.results[key] = to_json(cert);
    ctx.verdicts.push_back(cert.verdict);
}

// ---- per-command handlers ---------------------------------------------------------

struct SublevelOpts {
    FieldOpts field;
    std::string box, res = "101", anchor = "above-min";
    double level = 1e-6;
    bool csv = false;
};

void run_sublevel(const SublevelOpts& o, Ctx& ctx) {
    ScalarField f = resolve_field(o.field, ctx.config);
    const BoxDomain box =
        box_or_default(o.box, f.dim, square_box(-3.0, 3.0, f.dim), "--box");
    const std::vector<int> res = parse_ints(o.res, "--res");
    if (res.empty()) throw CliError("--res needs at least one resolution");
    LevelAnchor anchor;
    if (o.anchor == "above-min")
        anchor = LevelAnchor::AboveMin;
    else if (o.anchor == "absolute")
        anchor = LevelAnchor::Absolute;
    else
        throw CliError("--anchor must be above-min or absolute");

    ctx.config["box"] = interleaved(box);
    ctx.config["level"] = o.level;
    ctx.config["res"] = res;
    ctx.config["anchor"] = o.anchor;

    json reports = json::array();
    json counts = json::array();
    for (int r : res) {
        const RegularGrid grid = make_grid(box, r);
        const SublevelReport rep = sublevel_connectedness(f, grid, o.level, anchor);
        json j = to_json(rep);
        j["res"] = r;
        reports.push_back(std::move(j));
        counts.push_back(rep.component_count);
        if (o.csv) {
            const std::vector<double> values = sample_lattice(f, grid);
            const NodeMask mask = level_mask(values, o.level, anchor);
            const Components comps = connected_components(grid, mask);
            ctx.artifacts.emplace_back("sublevel_res" + std::to_string(r) + ".csv",
                                       labeling_csv(grid, values, mask, comps));
        }
    }
    ctx.results["reports"] = std::move(reports);
    ctx.results["counts"] = std::move(counts);
}

struct CertifyPlOpts {
    FieldOpts field;
    std::string box, block;
    int res = 201, nx = 1, starts = 64;
    bool two_sided = false;
    double mu1 = 0.0, mu2 = 0.0, mu = 0.0, alpha = 2.0, exclusion = -1.0;
    std::optional<double> fstar;
    unsigned seed = 42;
    bool mu_set = false, mu1_set = false, mu2_set = false;
};

void run_certify_pl(const CertifyPlOpts& o, Ctx& ctx) {
    ScalarField f = resolve_field(o.field, ctx.config);
    const BoxDomain box =
        box_or_default(o.box, f.dim, square_box(-3.0, 3.0, f.dim), "--box");
    const RegularGrid grid = make_grid(box, o.res);
    ctx.config["box"] = interleaved(box);
    ctx.config["res"] = o.res;
    ctx.config["exclusion"] = o.exclusion;

    if (o.two_sided) {
        if (!o.mu1_set || !o.mu2_set) throw CliError("--two-sided needs --mu1 and --mu2");
        ctx.config["two-sided"] = true;
        ctx.config["mu1"] = o.mu1;
        ctx.config["mu2"] = o.mu2;
        ctx.config["nx"] = o.nx;
        ctx.config["starts"] = o.starts;
        ctx.config["seed"] = o.seed;
        const MinimaxProblem problem = split_problem(f, o.nx, box);
        const auto [cx, cy] =
            check_two_sided_pl(problem, grid, o.mu1, o.mu2, o.exclusion, o.starts, o.seed);
        record(ctx, "x_block", cx);
        record(ctx, "y_block", cy);
        return;
    }
    if (!o.mu_set) throw CliError("need --mu (or --two-sided with --mu1/--mu2)");
    ctx.config["mu"] = o.mu;
    ctx.config["alpha"] = o.alpha;
    if (!o.block.empty()) {
        ctx.config["block"] = o.block;
        ctx.config["nx"] = o.nx;
        const MinimaxProblem problem = split_problem(f, o.nx, box);
        record(ctx, "certificate",
               check_block_pl(problem, grid, parse_block(o.block), o.mu, o.alpha, o.exclusion));
        return;
    }
    if (o.fstar) ctx.config["fstar"] = *o.fstar;
    record(ctx, "certificate",
           check_alpha_pl(f, grid, o.alpha, o.mu, o.exclusion, o.fstar));
}

struct CertifyGrowthOpts {
    FieldOpts field;
    std::string box, block;
    int res = 201, nx = 1;
    double beta = 2.0, eta = 0.0, mask_tol = 1e-9, exclusion = -1.0;
    std::optional<double> fstar;
    bool eta_set = false;
};

void run_certify_growth(const CertifyGrowthOpts& o, Ctx& ctx) {
    if (!o.eta_set) throw CliError("need --eta");
    ScalarField f = resolve_field(o.field, ctx.config);
    const BoxDomain box =
        box_or_default(o.box, f.dim, square_box(-3.0, 3.0, f.dim), "--box");
    const RegularGrid grid = make_grid(box, o.res);
    ctx.config["box"] = interleaved(box);
    ctx.config["res"] = o.res;
    ctx.config["beta"] = o.beta;
    ctx.config["eta"] = o.eta;
    ctx.config["mask-tol"] = o.mask_tol;
    ctx.config["exclusion"] = o.exclusion;

    if (!o.block.empty()) {
        ctx.config["block"] = o.block;
        ctx.config["nx"] = o.nx;
        const MinimaxProblem problem = split_problem(f, o.nx, box);
        record(ctx, "certificate",
               check_block_growth(problem, grid, parse_block(o.block), o.beta, o.eta,
                                  o.mask_tol, o.exclusion));
        return;
    }
    if (o.fstar) ctx.config["fstar"] = *o.fstar;
    const std::vector<double> values = sample_lattice(f, grid);
    const NodeMask minima = level_mask(values, o.mask_tol, LevelAnchor::AboveMin);
    record(ctx, "certificate",
           check_growth(f, grid, o.beta, o.eta, minima, o.exclusion, o.fstar));
}

struct CertifyInvexOpts {
    FieldOpts field;
    std::string box;
    double tol_grad = 1e-6, tol_val = 1e-4;
    int starts = 64;
    unsigned seed = 42;
};

void run_certify_invex(const CertifyInvexOpts& o, Ctx& ctx) {
    ScalarField f = resolve_field(o.field, ctx.config);
    const BoxDomain box =
        box_or_default(o.box, f.dim, square_box(-3.0, 3.0, f.dim), "--box");
    ctx.config["box"] = interleaved(box);
    ctx.config["tol-grad"] = o.tol_grad;
    ctx.config["tol-val"] = o.tol_val;
    ctx.config["starts"] = o.starts;
    ctx.config["seed"] = o.seed;
    ctx.results["minimum"] =
        to_json(estimate_minimum(f, box, o.starts, 400, 1e-6, o.seed));
    record(ctx, "certificate", invexity_verdict(f, box, o.tol_grad, o.tol_val, o.seed));
}

struct IncreasingOpts {
    FieldOpts field;
    std::string center, radii = "2,4,8,16,32";
    double level = 0.0;
    int dirs = 64;
};

void run_increasing(const IncreasingOpts& o, Ctx& ctx) {
    ScalarField f = resolve_field(o.field, ctx.config);
    std::vector<double> center(f.dim, 0.0);
    if (!o.center.empty()) {
        center = parse_reals(o.center, "--center");
        if (static_cast<int>(center.size()) != f.dim)
            throw CliError("--center needs one coordinate per variable");
    }
    const std::vector<double> radii = parse_reals(o.radii, "--radii");
    ctx.config["center"] = center;
    ctx.config["radii"] = radii;
    ctx.config["level"] = o.level;
    ctx.config["dirs"] = o.dirs;
    try {
        record(ctx, "certificate",
               check_increasing_at_infinity(f, center, radii, o.level, o.dirs));
    } catch (const std::invalid_argument& e) {
        throw CliError(e.what());
    }
}

struct MountainPassOpts {
    FieldOpts field;
    std::string x0, x1, clamp, box;
    int nodes = 33, iters = 5000, res = 201;
    double tol = 1e-6, step_rel = 1e-2;
    std::optional<double> verify_level;
    bool csv = false;
};

void run_mountain_pass(const MountainPassOpts& o, Ctx& ctx) {
    ScalarField f = resolve_field(o.field, ctx.config);
    if (o.x0.empty() || o.x1.empty()) throw CliError("need --x0 and --x1");
    const std::vector<double> x0 = parse_reals(o.x0, "--x0");
    const std::vector<double> x1 = parse_reals(o.x1, "--x1");
    if (static_cast<int>(x0.size()) != f.dim || static_cast<int>(x1.size()) != f.dim)
        throw CliError("--x0/--x1 need one coordinate per variable");
    PassOptions opt;
    opt.m = o.nodes;
    opt.iters = o.iters;
    opt.tol = o.tol;
    opt.step_rel = o.step_rel;
    if (!o.clamp.empty()) opt.clamp = parse_box(o.clamp, f.dim, "--clamp");

    ctx.config["x0"] = x0;
    ctx.config["x1"] = x1;
    ctx.config["nodes"] = o.nodes;
    ctx.config["iters"] = o.iters;
    ctx.config["tol"] = o.tol;
    ctx.config["step-rel"] = o.step_rel;
    if (opt.clamp) ctx.config["clamp"] = interleaved(*opt.clamp);

    PassResult result;
    try {
        result = find_mountain_pass(f, x0, x1, opt);
    } catch (const std::invalid_argument& e) {
        throw CliError(e.what());
    }
    ctx.results["pass"] = to_json(result);
    if (result.inconclusive) ctx.verdicts.push_back(Verdict::Inconclusive);

    if (o.verify_level) {
        const BoxDomain box =
            box_or_default(o.box, f.dim, square_box(-3.0, 3.0, f.dim), "--box");
        ctx.config["verify-level"] = *o.verify_level;
        ctx.config["box"] = interleaved(box);
        ctx.config["res"] = o.res;
        try {
            ctx.results["separated"] =
                verify_separation(f, make_grid(box, o.res), x0, x1, *o.verify_level);
        } catch (const std::invalid_argument& e) {
            throw CliError(e.what());
        }
    }
    if (o.csv) ctx.artifacts.emplace_back("path_trace.csv", path_trace_csv(f, result));
}

struct PlFlowOpts {
    FieldOpts field;
    std::string x0;
    double alpha = 2.0, fstar = 0.0, stop_gap = 1e-6, dt = 1e-3, max_time = 1e3;
    int max_steps = 200000;
    std::optional<double> mu;
};

void run_pl_flow(const PlFlowOpts& o, Ctx& ctx) {
    ScalarField f = resolve_field(o.field, ctx.config);
    if (o.x0.empty()) throw CliError("need --x0");
    const std::vector<double> x0 = parse_reals(o.x0, "--x0");
    if (static_cast<int>(x0.size()) != f.dim)
        throw CliError("--x0 needs one coordinate per variable");
    FlowOptions opt;
    opt.stop_gap = o.stop_gap;
    opt.initial_dt = o.dt;
    opt.max_time = o.max_time;
    opt.max_steps = o.max_steps;
    opt.mu = o.mu;

    ctx.config["x0"] = x0;
    ctx.config["alpha"] = o.alpha;
    ctx.config["fstar"] = o.fstar;
    ctx.config["stop-gap"] = o.stop_gap;
    ctx.config["dt"] = o.dt;
    ctx.config["max-time"] = o.max_time;
    ctx.config["max-steps"] = o.max_steps;
    if (o.mu) ctx.config["mu"] = *o.mu;

    FlowTrace trace;
    try {
        trace = pl_gradient_flow(f, x0, o.alpha, o.fstar, opt);
        if (o.mu) ctx.results["growth_constant"] = pl_growth_constant(o.alpha, *o.mu);
    } catch (const std::invalid_argument& e) {
        throw CliError(e.what());
    }
    ctx.results["flow"] = to_json(trace);
    if (trace.diverged || !trace.bound_satisfied)
        ctx.verdicts.push_back(Verdict::Fail);
    else if (!trace.converged)
        ctx.verdicts.push_back(Verdict::Inconclusive);
}

struct MinimaxClassifyOpts {
    FieldOpts field;
    std::string box, s1, s2;
    int nx = 1, res = 201, starts = 64;
    double tol_val = 1e-6, tol_grad = 1e-6, product_tol = 1e-6, inter_tol = 1e-6;
    unsigned seed = 42;
};

void run_minimax_classify(const MinimaxClassifyOpts& o, Ctx& ctx) {
    ScalarField f = resolve_field(o.field, ctx.config);
    const BoxDomain box =
        box_or_default(o.box, f.dim, square_box(-3.0, 3.0, f.dim), "--box");
    const MinimaxProblem problem = split_problem(f, o.nx, box);
    const RegularGrid grid = make_grid(box, o.res);

    ctx.config["box"] = interleaved(box);
    ctx.config["nx"] = o.nx;
    ctx.config["res"] = o.res;
    ctx.config["tol-val"] = o.tol_val;
    ctx.config["tol-grad"] = o.tol_grad;
    ctx.config["product-tol"] = o.product_tol;
    ctx.config["starts"] = o.starts;
    ctx.config["seed"] = o.seed;

    const SolutionClassification cls =
        classify_solutions(problem, grid, o.tol_val, o.tol_grad, o.starts, o.seed);
    ctx.results["classification"] = to_json(cls);
    if (cls.inconclusive) ctx.verdicts.push_back(Verdict::Inconclusive);
    record(ctx, "product_structure", product_structure_check(cls, o.product_tol));

    if (!o.s1.empty() || !o.s2.empty()) {
        if (o.s1.empty() || o.s2.empty()) throw CliError("--s1 and --s2 go together");
        const std::vector<double> s1 = parse_reals(o.s1, "--s1");
        const std::vector<double> s2 = parse_reals(o.s2, "--s2");
        if (static_cast<int>(s1.size()) != f.dim || static_cast<int>(s2.size()) != f.dim)
            throw CliError("--s1/--s2 need one coordinate per variable");
        ctx.config["s1"] = s1;
        ctx.config["s2"] = s2;
        ctx.config["inter-tol"] = o.inter_tol;
        record(ctx, "interchangeability",
               interchangeability_check(problem, s1, s2, o.inter_tol));
    }
}

struct MinimaxModulusOpts {
    FieldOpts field;
    std::string box, base, mode = "lipschitz", block = "y";
    std::string deltas = "0.1,0.03,0.01,0.003,0.001";
    int nx = 1, res = 201, starts = 64;
    double br_tol = 1e-9;
    unsigned seed = 42;
};

void run_minimax_modulus(const MinimaxModulusOpts& o, Ctx& ctx) {
    ScalarField f = resolve_field(o.field, ctx.config);
    const BoxDomain box =
        box_or_default(o.box, f.dim, square_box(-3.0, 3.0, f.dim), "--box");
    const MinimaxProblem problem = split_problem(f, o.nx, box);
    if (o.base.empty()) throw CliError("need --base (joint coordinates)");
    const std::vector<double> base = parse_reals(o.base, "--base");
    if (static_cast<int>(base.size()) != f.dim)
        throw CliError("--base needs one coordinate per variable");
    const std::vector<double> deltas = parse_reals(o.deltas, "--deltas");

    ModulusMode mode;
    if (o.mode == "lipschitz")
        mode = ModulusMode::Lipschitz;
    else if (o.mode == "hoelder")
        mode = ModulusMode::Hoelder;
    else if (o.mode == "error-bound")
        mode = ModulusMode::ErrorBound;
    else
        throw CliError("--mode must be lipschitz, hoelder, or error-bound");

    const Block responding = parse_block(o.block);
    const BoxDomain block_box = responding == Block::X
                                    ? axis_slice(box, 0, o.nx)
                                    : axis_slice(box, o.nx, f.dim - o.nx);
    const RegularGrid block_grid = make_grid(block_box, o.res);

    ctx.config["box"] = interleaved(box);
    ctx.config["nx"] = o.nx;
    ctx.config["mode"] = o.mode;
    ctx.config["block"] = o.block;
    ctx.config["base"] = base;
    ctx.config["deltas"] = deltas;
    ctx.config["res"] = o.res;
    ctx.config["br-tol"] = o.br_tol;
    ctx.config["starts"] = o.starts;
    ctx.config["seed"] = o.seed;

    try {
        ctx.results["estimate"] = to_json(estimate_inner_modulus(
            problem, responding, base, deltas, block_grid, mode, o.br_tol, o.starts, o.seed));
    } catch (const std::invalid_argument& e) {
        throw CliError(e.what());
    }
}

// Per-player probe grids over an optional window box ("lo,hi per joint axis").
std::vector<RegularGrid> game_grids(const GameSpec& game, const std::string& window,
                                    const std::string& res_text, json& cfg) {
    const BoxDomain joint =
        window.empty() ? game.joint_box()
                       : parse_box(window, game.joint_dim(), "--box");
    std::vector<int> res = parse_ints(res_text, "--res");
    if (res.size() == 1) res.assign(game.player_count(), res[0]);
    if (static_cast<int>(res.size()) != game.player_count())
        throw CliError("--res needs one resolution per player (or a single shared one)");
    cfg["box"] = interleaved(joint);
    cfg["res"] = res;
    std::vector<RegularGrid> grids;
    for (int i = 0; i < game.player_count(); ++i)
        grids.push_back(
            make_grid(axis_slice(joint, game.axis_offset(i), game.players[i].dim), res[i]));
    return grids;
}

struct GameNashOpts {
    GameOpts game;
    std::string box, res = "101";
    double tol = 5e-4;
};

void run_game_nash(const GameNashOpts& o, Ctx& ctx) {
    const GameSpec game = resolve_game(o.game, ctx.config);
    const std::vector<RegularGrid> grids = game_grids(game, o.box, o.res, ctx.config);
    ctx.config["tol"] = o.tol;
    try {
        ctx.results["nash"] = to_json(find_nash(game, grids, o.tol));
    } catch (const std::invalid_argument& e) {
        throw CliError(e.what());
    }
}

struct GameRationalizeOpts {
    GameOpts game;
    std::string box, res = "41";
    double tol = 1e-3;
    int max_k = 20;
    std::size_t budget = kProfileBudget;
    bool check_compact = false, csv = false;
};

void run_game_rationalize(const GameRationalizeOpts& o, Ctx& ctx) {
    const GameSpec game = resolve_game(o.game, ctx.config);
    const std::vector<RegularGrid> grids = game_grids(game, o.box, o.res, ctx.config);
    ctx.config["tol"] = o.tol;
    ctx.config["max-k"] = o.max_k;
    ctx.config["budget"] = o.budget;

    try {
        const JointGridSet S0 = full_strategy_set(game, grids);
        if (o.check_compact) {
            ctx.config["check-compact"] = true;
            record(ctx, "compactness",
                   strategic_compactness_check(game, S0, 1e-9, o.budget));
        }
        const RationalizabilityTrace trace =
            iterate_rationalizable(game, S0, o.max_k, o.tol, o.budget);
        ctx.results["trace"] = to_json(trace);
        if (trace.budget_exceeded) ctx.verdicts.push_back(Verdict::Inconclusive);
        if (o.csv) ctx.artifacts.emplace_back("trace.csv", rationalizable_trace_csv(trace));
    } catch (const std::runtime_error& e) {  // profile budget refusal
        throw CliError(e.what());
    }
}

struct GamePotentialOpts {
    GameOpts game;
    std::string box, candidate;
    int res = 101;
    double tol = 0.0;
};

void run_game_potential(const GamePotentialOpts& o, Ctx& ctx) {
    const GameSpec game = resolve_game(o.game, ctx.config);
    const BoxDomain joint =
        o.box.empty() ? game.joint_box() : parse_box(o.box, game.joint_dim(), "--box");
    const RegularGrid grid = make_grid(joint, o.res);
    ctx.config["box"] = interleaved(joint);
    ctx.config["res"] = o.res;
    ctx.config["tol"] = o.tol;

    ScalarField candidate;
    if (!o.candidate.empty()) {
        try {
            candidate = parse_field(o.candidate, game.joint_dim());
        } catch (const ParseError& e) {
            throw CliError(std::string("--candidate: ") + e.what());
        }
        ctx.config["candidate"] = o.candidate;
    } else if (game.potential) {
        candidate = *game.potential;
    } else {
        throw CliError("the game declares no potential; supply --candidate");
    }
    try {
        record(ctx, "potential", potential_consistency_check(game, candidate, grid, o.tol));
    } catch (const std::invalid_argument& e) {
        throw CliError(e.what());
    }
}

// ---- expectations -----------------------------------------------------------------

// --expect path=value: `path` is a dot-separated route into the report JSON
// (array steps are numeric); `value` is compared against the node's compact
// dump (strings without quotes).
bool check_expectations(const json& report, const std::vector<std::string>& expects,
                        std::ostream& err) {
    bool ok = true;
    for (const std::string& e : expects) {
        const std::size_t eq = e.find('=');
        if (eq == std::string::npos) throw CliError("--expect needs path=value, got: " + e);
        const std::string path = e.substr(0, eq);
        const std::string want = e.substr(eq + 1);
        const json* node = &report;
        bool found = true;
        for (const std::string& tok : split(path, '.')) {
            if (node->is_object() && node->contains(tok)) {
                node = &(*node)[tok];
            } else if (node->is_array() && !tok.empty() &&
                       tok.find_first_not_of("0123456789") == std::string::npos &&
                       std::stoul(tok) < node->size()) {
                node = &(*node)[std::stoul(tok)];
            } else {
                err << "expect: report has no field '" << path << "'\n";
                ok = false;
                found = false;
                break;
            }
        }
        if (!found) continue;
        const std::string got = node->is_string() ? node->get<std::string>() : node->dump();
        if (got != want) {
            err << "expect mismatch at '" << path << "': got " << got << ", want " << want
                << "\n";
            ok = false;
        }
    }
    return ok;
}

// ---- argv preprocessing -------------------------------------------------------------

// Joins "--opt" with a following negative-number value ("--box -3,3" ->
// "--box=-3,3") so boxes and coordinates survive flag classification.
std::vector<std::string> normalize_args(const std::vector<std::string>& in) {
    std::vector<std::string> out;
    for (std::size_t i = 0; i < in.size(); ++i) {
        const std::string& s = in[i];
        if (s.rfind("--", 0) == 0 && s.find('=') == std::string::npos && i + 1 < in.size()) {
            const std::string& next = in[i + 1];
            if (next.size() > 1 && next[0] == '-' &&
                (std::isdigit(static_cast<unsigned char>(next[1])) || next[1] == '.')) {
                out.push_back(s + "=" + next);
                ++i;
                continue;
            }
        }
        out.push_back(s);
    }
    return out;
}

// Expands `--config file.json` into equivalent command-line arguments. The
// document holds {"command": "...", "<flag>": value, ...}; true booleans
// become bare flags, arrays join with commas.
std::vector<std::string> expand_config(const std::vector<std::string>& in) {
    std::vector<std::string> out;
    std::string path;
    for (std::size_t i = 0; i < in.size(); ++i) {
        if (in[i] == "--config") {
            if (i + 1 >= in.size()) throw CliError("--config needs a file path");
            path = in[++i];
        } else if (in[i].rfind("--config=", 0) == 0) {
            path = in[i].substr(9);
        } else {
            out.push_back(in[i]);
        }
    }
    if (path.empty()) return in;

    std::ifstream file(path);
    if (!file) throw CliError("cannot read config file: " + path);
    json doc;
    try {
        doc = json::parse(file);
    } catch (const json::exception& e) {
        throw CliError("config file: " + std::string(e.what()));
    }
    if (!doc.is_object() || !doc.contains("command") || !doc["command"].is_string())
        throw CliError("config file needs an object with a \"command\" string");

    std::vector<std::string> args{doc["command"].get<std::string>()};
    for (const auto& [key, value] : doc.items()) {
        if (key == "command") continue;
        if (value.is_boolean()) {
            if (value.get<bool>()) args.push_back("--" + key);
        } else if (value.is_array()) {
            std::string joined;
            for (const auto& item : value) {
                if (!joined.empty()) joined += ',';
                joined += item.is_string() ? item.get<std::string>() : item.dump();
            }
            args.push_back("--" + key + "=" + joined);
        } else if (value.is_string()) {
            args.push_back("--" + key + "=" + value.get<std::string>());
        } else {
            args.push_back("--" + key + "=" + value.dump());
        }
    }
    // Flags given alongside --config (e.g. --out) stay in effect.
    args.insert(args.end(), out.begin(), out.end());
    return args;
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"Landscape topology toolkit: sublevel connectedness, landscape "
                 "condition certificates, mountain passes, minimax classification, "
                 "and continuous-game rationalizability."};
    app.require_subcommand(1);

    std::string out_dir;
    std::vector<std::string> expects;

    SublevelOpts sublevel;
    CLI::App* c_sub = app.add_subcommand(
        "sublevel", "Connected components of sublevel sets across resolutions");
    add_field_options(c_sub, sublevel.field);
    c_sub->add_option("--box", sublevel.box, "Window, lo,hi per axis (default -3,3 each)");
    c_sub->add_option("--level", sublevel.level, "Level offset c (default 1e-6)");
    c_sub->add_option("--res", sublevel.res, "Comma list of resolutions (default 101)");
    c_sub->add_option("--anchor", sublevel.anchor, "above-min (default) or absolute");
    c_sub->add_flag("--csv", sublevel.csv, "Write per-node labeling CSVs");

    CertifyPlOpts pl;
    CLI::App* c_pl = app.add_subcommand("certify-pl", "Gradient-dominance certificates");
    add_field_options(c_pl, pl.field);
    c_pl->add_option("--box", pl.box, "Grid box (default -3,3 per axis)");
    c_pl->add_option("--res", pl.res, "Grid resolution (default 201)");
    c_pl->add_flag("--two-sided", pl.two_sided, "Blockwise check against inner optima");
    c_pl->add_option("--mu1", pl.mu1, "x-block constant (--two-sided)")
        ->each([&pl](const std::string&) { pl.mu1_set = true; });
    c_pl->add_option("--mu2", pl.mu2, "y-block constant (--two-sided)")
        ->each([&pl](const std::string&) { pl.mu2_set = true; });
    c_pl->add_option("--mu", pl.mu, "Dominance constant")
        ->each([&pl](const std::string&) { pl.mu_set = true; });
    c_pl->add_option("--alpha", pl.alpha, "Gradient exponent (default 2)");
    c_pl->add_option("--block", pl.block, "x or y: slice-anchored blockwise check");
    c_pl->add_option("--nx", pl.nx, "First-block variable count (default 1)");
    c_pl->add_option("--exclusion", pl.exclusion, "Near-optimum exclusion band");
    c_pl->add_option("--fstar", [&pl](const std::vector<std::string>& v) {
        try { pl.fstar = std::stod(v[0]); } catch (...) { return false; }
        return true;
    }, "Reference minimum value (default: grid minimum)");
    c_pl->add_option("--starts", pl.starts, "Multistart count for inner solves");
    c_pl->add_option("--seed", pl.seed, "Deterministic seed (default 42)");

    CertifyGrowthOpts growth;
    CLI::App* c_growth = app.add_subcommand("certify-growth", "Growth-from-minima certificates");
    add_field_options(c_growth, growth.field);
    c_growth->add_option("--box", growth.box, "Grid box (default -3,3 per axis)");
    c_growth->add_option("--res", growth.res, "Grid resolution (default 201)");
    c_growth->add_option("--beta", growth.beta, "Growth exponent (default 2)");
    c_growth->add_option("--eta", growth.eta, "Growth constant")
        ->each([&growth](const std::string&) { growth.eta_set = true; });
    c_growth->add_option("--block", growth.block, "x or y: per-slice blockwise check");
    c_growth->add_option("--nx", growth.nx, "First-block variable count (default 1)");
    c_growth->add_option("--mask-tol", growth.mask_tol, "Minima plateau tolerance");
    c_growth->add_option("--exclusion", growth.exclusion, "Near-minima exclusion band");
    c_growth->add_option("--fstar", [&growth](const std::vector<std::string>& v) {
        try { growth.fstar = std::stod(v[0]); } catch (...) { return false; }
        return true;
    }, "Reference minimum value (default: grid minimum)");

    CertifyInvexOpts invex;
    CLI::App* c_invex = app.add_subcommand(
        "certify-invex", "Every-stationary-point-is-global-minimum check");
    add_field_options(c_invex, invex.field);
    c_invex->add_option("--box", invex.box, "Search box (default -3,3 per axis)");
    c_invex->add_option("--tol-grad", invex.tol_grad, "Stationarity threshold");
    c_invex->add_option("--tol-val", invex.tol_val, "Allowed value gap above the minimum");
    c_invex->add_option("--starts", invex.starts, "Multistart count");
    c_invex->add_option("--seed", invex.seed, "Deterministic seed (default 42)");

    IncreasingOpts incr;
    CLI::App* c_incr = app.add_subcommand(
        "increasing-at-infinity", "Shell-minima growth check on expanding radii");
    add_field_options(c_incr, incr.field);
    c_incr->add_option("--center", incr.center, "Shell center (default origin)");
    c_incr->add_option("--radii", incr.radii, "Comma list of radii (default 2,4,8,16,32)");
    c_incr->add_option("--level", incr.level, "Threshold the shell minima must exceed");
    c_incr->add_option("--dirs", incr.dirs, "Directions per dimension (default 64)");

    MountainPassOpts pass;
    CLI::App* c_pass = app.add_subcommand(
        "mountain-pass", "String-method saddle search between two points");
    add_field_options(c_pass, pass.field);
    c_pass->add_option("--x0", pass.x0, "First endpoint");
    c_pass->add_option("--x1", pass.x1, "Second endpoint");
    c_pass->add_option("--nodes", pass.nodes, "Path nodes (default 33)");
    c_pass->add_option("--iters", pass.iters, "String iteration budget (default 5000)");
    c_pass->add_option("--tol", pass.tol, "Gradient norm target at the pass point");
    c_pass->add_option("--step-rel", pass.step_rel, "Step size relative to ||x1-x0||");
    c_pass->add_option("--clamp", pass.clamp, "Clamp box, lo,hi per axis");
    c_pass->add_option("--verify-level", [&pass](const std::vector<std::string>& v) {
        try { pass.verify_level = std::stod(v[0]); } catch (...) { return false; }
        return true;
    }, "Also check the endpoints' sublevel components separate at this level");
    c_pass->add_option("--box", pass.box, "Grid box for the separation check");
    c_pass->add_option("--res", pass.res, "Grid resolution for the separation check");
    c_pass->add_flag("--csv", pass.csv, "Write the path trace CSV");

    PlFlowOpts flow;
    CLI::App* c_flow = app.add_subcommand(
        "pl-flow", "Sharpified gradient flow with finite-length stopping");
    add_field_options(c_flow, flow.field);
    c_flow->add_option("--x0", flow.x0, "Start point");
    c_flow->add_option("--alpha", flow.alpha, "Dominance exponent (default 2)");
    c_flow->add_option("--fstar", flow.fstar, "Reference minimum value (default 0)");
    c_flow->add_option("--mu", [&flow](const std::vector<std::string>& v) {
        try { flow.mu = std::stod(v[0]); } catch (...) { return false; }
        return true;
    }, "Dominance constant; enables the terminal-time bound check");
    c_flow->add_option("--stop-gap", flow.stop_gap, "Stop once f - fstar falls below this");
    c_flow->add_option("--dt", flow.dt, "Initial step (default 1e-3)");
    c_flow->add_option("--max-time", flow.max_time, "Flow time budget (default 1e3)");
    c_flow->add_option("--max-steps", flow.max_steps, "Step budget (default 200000)");

    MinimaxClassifyOpts cls;
    CLI::App* c_cls = app.add_subcommand(
        "minimax-classify", "Primal/dual/saddle set classification on a joint grid");
    add_field_options(c_cls, cls.field);
    c_cls->add_option("--box", cls.box, "Joint box (default -3,3 per axis)");
    c_cls->add_option("--nx", cls.nx, "First-block variable count (default 1)");
    c_cls->add_option("--res", cls.res, "Joint grid resolution (default 201)");
    c_cls->add_option("--tol-val", cls.tol_val, "Value tolerance for the optimal sets");
    c_cls->add_option("--tol-grad", cls.tol_grad, "Stationarity threshold for saddles");
    c_cls->add_option("--product-tol", cls.product_tol, "Product-structure pair tolerance");
    c_cls->add_option("--s1", cls.s1, "First saddle for the interchangeability check");
    c_cls->add_option("--s2", cls.s2, "Second saddle for the interchangeability check");
    c_cls->add_option("--inter-tol", cls.inter_tol, "Interchangeability tolerance");
    c_cls->add_option("--starts", cls.starts, "Multistart count for inner solves");
    c_cls->add_option("--seed", cls.seed, "Deterministic seed (default 42)");

    MinimaxModulusOpts mod;
    CLI::App* c_mod = app.add_subcommand(
        "minimax-modulus", "Best-response continuity / error-bound moduli");
    add_field_options(c_mod, mod.field);
    c_mod->add_option("--box", mod.box, "Joint box (default -3,3 per axis)");
    c_mod->add_option("--nx", mod.nx, "First-block variable count (default 1)");
    c_mod->add_option("--mode", mod.mode, "lipschitz (default), hoelder, or error-bound");
    c_mod->add_option("--block", mod.block, "Responding block, x or y (default y)");
    c_mod->add_option("--base", mod.base, "Base point (joint coordinates)");
    c_mod->add_option("--deltas", mod.deltas, "Perturbation radii (comma list)");
    c_mod->add_option("--res", mod.res, "Responding-block grid resolution");
    c_mod->add_option("--br-tol", mod.br_tol, "Best-response plateau tolerance");
    c_mod->add_option("--starts", mod.starts, "Multistart count for inner solves");
    c_mod->add_option("--seed", mod.seed, "Deterministic seed (default 42)");

    GameNashOpts nash;
    CLI::App* c_nash = app.add_subcommand(
        "game-nash", "Joint-lattice equilibrium scan with component clustering");
    add_game_options(c_nash, nash.game);
    c_nash->add_option("--box", nash.box, "Probe window (default: the strategy boxes)");
    c_nash->add_option("--res", nash.res, "Per-player resolutions (default 101)");
    c_nash->add_option("--tol", nash.tol, "Slice-gap tolerance, relative (default 5e-4)");

    GameRationalizeOpts rat;
    CLI::App* c_rat = app.add_subcommand(
        "game-rationalize", "Iterated best-response elimination to a fixed set");
    add_game_options(c_rat, rat.game);
    c_rat->add_option("--box", rat.box, "Start set (default: the strategy boxes)");
    c_rat->add_option("--res", rat.res, "Per-player resolutions (default 41)");
    c_rat->add_option("--tol", rat.tol, "Best-response tolerance (default 1e-3)");
    c_rat->add_option("--max-k", rat.max_k, "Iteration budget (default 20)");
    c_rat->add_option("--budget", rat.budget, "Opponent-profile budget per step");
    c_rat->add_flag("--check-compact", rat.check_compact,
                    "First certify the start set maps into itself");
    c_rat->add_flag("--csv", rat.csv, "Write the per-step membership CSV");

    GamePotentialOpts pot;
    CLI::App* c_pot = app.add_subcommand(
        "game-potential", "Potential-gradient consistency across players");
    add_game_options(c_pot, pot.game);
    c_pot->add_option("--box", pot.box, "Probe box (default: the joint strategy box)");
    c_pot->add_option("--res", pot.res, "Probe grid resolution (default 101)");
    c_pot->add_option("--tol", pot.tol, "Per-axis gradient mismatch bound (default 0)");
    c_pot->add_option("--candidate", pot.candidate,
                      "Candidate potential expression (default: the game's own)");

    for (CLI::App* sub :
         {c_sub, c_pl, c_growth, c_invex, c_incr, c_pass, c_flow, c_cls, c_mod, c_nash, c_rat,
          c_pot}) {
        sub->add_option("--expect", expects,
                        "path=value assertion against the report (repeatable)");
        sub->add_option("--out", out_dir, "Directory for report.json and CSV artifacts");
    }

    // ---- parse ------------------------------------------------------------------
    std::vector<std::string> raw(argv + 1, argv + argc);
    std::vector<std::string> args;
    try {
        args = normalize_args(expand_config(raw));
    } catch (const CliError& e) {
        err << "error: " << e.what() << "\n";
        return 2;
    }
    std::reverse(args.begin(), args.end());  // CLI11 consumes the vector back-to-front
    try {
        app.parse(args);
    } catch (const CLI::CallForHelp&) {
        const auto subs = app.get_subcommands();
        out << (subs.empty() ? app.help() : subs.front()->help());
        return 0;
    } catch (const CLI::CallForAllHelp&) {
        out << app.help("", CLI::AppFormatMode::All);
        return 0;
    } catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << "\n";
        return 2;
    }

    // ---- dispatch ---------------------------------------------------------------
    Ctx ctx;
    std::string command;
    const auto t0 = std::chrono::steady_clock::now();
    try {
        if (c_sub->parsed()) {
            command = "sublevel";
            run_sublevel(sublevel, ctx);
        } else if (c_pl->parsed()) {
            command = "certify-pl";
            run_certify_pl(pl, ctx);
        } else if (c_growth->parsed()) {
            command = "certify-growth";
            run_certify_growth(growth, ctx);
        } else if (c_invex->parsed()) {
            command = "certify-invex";
            run_certify_invex(invex, ctx);
        } else if (c_incr->parsed()) {
            command = "increasing-at-infinity";
            run_increasing(incr, ctx);
        } else if (c_pass->parsed()) {
            command = "mountain-pass";
            run_mountain_pass(pass, ctx);
        } else if (c_flow->parsed()) {
            command = "pl-flow";
            run_pl_flow(flow, ctx);
        } else if (c_cls->parsed()) {
            command = "minimax-classify";
            run_minimax_classify(cls, ctx);
        } else if (c_mod->parsed()) {
            command = "minimax-modulus";
            run_minimax_modulus(mod, ctx);
        } else if (c_nash->parsed()) {
            command = "game-nash";
            run_game_nash(nash, ctx);
        } else if (c_rat->parsed()) {
            command = "game-rationalize";
            run_game_rationalize(rat, ctx);
        } else if (c_pot->parsed()) {
            command = "game-potential";
            run_game_potential(pot, ctx);
        }
    } catch (const CliError& e) {
        err << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::invalid_argument& e) {
        err << "error: " << e.what() << "\n";
        return 2;
    } catch (const EvalError& e) {
        err << "error: " << e.what() << "\n";
        return 2;
    }
    const auto t1 = std::chrono::steady_clock::now();

    ctx.config["command"] = command;
    json report{{"schema_version", kReportSchemaVersion},
                {"toolkit_version", std::string(kToolkitVersion)},
                {"command", command},
                {"config", ctx.config},
                {"config_hash", config_hash_hex(ctx.config)},
                {"results", ctx.results},
                {"timings_ms",
                 {{"total", std::chrono::duration<double, std::milli>(t1 - t0).count()}}}};

    bool expect_ok = true;
    try {
        expect_ok = check_expectations(report, expects, err);
    } catch (const CliError& e) {
        err << "error: " << e.what() << "\n";
        return 2;
    }

    out << report.dump(2) << "\n";

    if (!out_dir.empty()) {
        try {
            const std::filesystem::path dir(out_dir);
            std::filesystem::create_directories(dir);
            std::ofstream rf(dir / "report.json");
            rf << report.dump(2) << "\n";
            if (!rf) throw CliError("cannot write report.json under " + out_dir);
            for (const auto& [name, content] : ctx.artifacts) {
                std::ofstream af(dir / name);
                af << content;
                if (!af) throw CliError("cannot write artifact " + name);
            }
        } catch (const std::exception& e) {
            err << "error: " << e.what() << "\n";
            return 2;
        }
    }

    bool any_fail = false, any_inconclusive = false;
    for (Verdict v : ctx.verdicts) {
        any_fail = any_fail || v == Verdict::Fail;
        any_inconclusive = any_inconclusive || v == Verdict::Inconclusive;
    }
    if (any_fail || !expect_ok) return 1;
    if (any_inconclusive) return 3;
    return 0;
}

int run_cli(int argc, const char* const* argv) {
    return run_cli(argc, argv, std::cout, std::cerr);
}

}  // namespace invextopo
