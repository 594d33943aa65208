#include "invextopo/games.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>
#include <stdexcept>
#include <utility>

#include "json.hpp"

#include "invextopo/optimize.hpp"

namespace invextopo {

namespace {

constexpr double kBoxSlack = 1e-12;

void require_player(const GameSpec& game, int player) {
    if (player < 0 || player >= game.player_count())
        throw std::invalid_argument("player index " + std::to_string(player) +
                                    " out of range (game has " +
                                    std::to_string(game.player_count()) + " players)");
}

void require_subbox(const BoxDomain& inner, const BoxDomain& outer, const std::string& what) {
    if (inner.dim() != outer.dim())
        throw std::invalid_argument(what + ": dimension " + std::to_string(inner.dim()) +
                                    " does not match " + std::to_string(outer.dim()));
    for (int a = 0; a < inner.dim(); ++a)
        if (inner.lo[a] < outer.lo[a] - kBoxSlack || inner.hi[a] > outer.hi[a] + kBoxSlack)
            throw std::invalid_argument(what + ": axis " + std::to_string(a) + " range [" +
                                        std::to_string(inner.lo[a]) + ", " +
                                        std::to_string(inner.hi[a]) + "] leaves the box [" +
                                        std::to_string(outer.lo[a]) + ", " +
                                        std::to_string(outer.hi[a]) + "]");
}

void require_grid(const GameSpec& game, int player, const RegularGrid& grid) {
    grid.validate();
    if (grid.dim() != game.players[player].dim)
        throw std::invalid_argument("player " + std::to_string(player) + " grid has dimension " +
                                    std::to_string(grid.dim()) + ", the player has " +
                                    std::to_string(game.players[player].dim));
    require_subbox(grid.box, game.players[player].box,
                   "player " + std::to_string(player) + " grid");
}

void require_set(const GameSpec& game, const JointGridSet& S) {
    if (static_cast<int>(S.grids.size()) != game.player_count() ||
        S.masks.size() != S.grids.size())
        throw std::invalid_argument("strategy set must carry one grid and one mask per player");
    for (int i = 0; i < game.player_count(); ++i) {
        require_grid(game, i, S.grids[i]);
        if (S.masks[i].in.size() != S.grids[i].node_count())
            throw std::invalid_argument("player " + std::to_string(i) + " mask has " +
                                        std::to_string(S.masks[i].in.size()) + " flags for " +
                                        std::to_string(S.grids[i].node_count()) + " nodes");
    }
}

std::size_t saturating_mul(std::size_t a, std::size_t b) {
    if (a == 0 || b == 0) return 0;
    if (a > std::numeric_limits<std::size_t>::max() / b)
        return std::numeric_limits<std::size_t>::max();
    return a * b;
}

std::size_t saturating_add(std::size_t a, std::size_t b) {
    if (a > std::numeric_limits<std::size_t>::max() - b)
        return std::numeric_limits<std::size_t>::max();
    return a + b;
}

// Coordinates of every node, flat (node k occupies [k*d, (k+1)*d)).
std::vector<double> all_node_coords(const RegularGrid& grid) {
    const int d = grid.dim();
    std::vector<double> out(grid.node_count() * static_cast<std::size_t>(d));
    std::vector<double> pt(d);
    for (std::size_t k = 0; k < grid.node_count(); ++k) {
        grid.node_point(k, pt);
        std::copy(pt.begin(), pt.end(), out.begin() + static_cast<std::ptrdiff_t>(k) * d);
    }
    return out;
}

// Evaluates one player's slice (own coordinates swept over the lattice, the
// rest of joint already frozen) into vals; returns the lattice max.
double slice_values(const ScalarField& u, const std::vector<double>& own_coords, int d, int off,
                    std::vector<double>& joint, std::vector<double>& vals) {
    double best = -std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < vals.size(); ++k) {
        std::copy(own_coords.begin() + static_cast<std::ptrdiff_t>(k) * d,
                  own_coords.begin() + static_cast<std::ptrdiff_t>(k + 1) * d,
                  joint.begin() + off);
        vals[k] = evaluate(u, joint);
        best = std::max(best, vals[k]);
    }
    return best;
}

}  // namespace

// ---- GameSpec ---------------------------------------------------------------

int GameSpec::joint_dim() const {
    int n = 0;
    for (const Player& p : players) n += p.dim;
    return n;
}

BoxDomain GameSpec::joint_box() const {
    BoxDomain out;
    for (const Player& p : players) {
        out.lo.insert(out.lo.end(), p.box.lo.begin(), p.box.lo.end());
        out.hi.insert(out.hi.end(), p.box.hi.begin(), p.box.hi.end());
    }
    return out;
}

int GameSpec::axis_offset(int player) const {
    int off = 0;
    for (int i = 0; i < player; ++i) off += players[i].dim;
    return off;
}

std::vector<int> GameSpec::player_axes(int player) const {
    std::vector<int> axes(players[player].dim);
    std::iota(axes.begin(), axes.end(), axis_offset(player));
    return axes;
}

void GameSpec::validate() const {
    if (players.empty()) throw std::invalid_argument("game needs at least one player");
    if (utilities.size() != players.size())
        throw std::invalid_argument("game has " + std::to_string(players.size()) +
                                    " players but " + std::to_string(utilities.size()) +
                                    " utilities");
    for (std::size_t i = 0; i < players.size(); ++i) {
        const Player& p = players[i];
        if (p.dim < 1)
            throw std::invalid_argument("player " + std::to_string(i) +
                                        " dimension must be >= 1");
        if (p.box.dim() != p.dim)
            throw std::invalid_argument("player " + std::to_string(i) + " box has dimension " +
                                        std::to_string(p.box.dim()) + " for an action space of " +
                                        std::to_string(p.dim));
        p.box.validate();
    }
    const int n = joint_dim();
    for (std::size_t i = 0; i < utilities.size(); ++i)
        if (utilities[i].dim != n)
            throw std::invalid_argument("utility " + std::to_string(i) + " reads " +
                                        std::to_string(utilities[i].dim) +
                                        " variables; the joint space has " + std::to_string(n));
    if (potential && potential->dim != n)
        throw std::invalid_argument("potential reads " + std::to_string(potential->dim) +
                                    " variables; the joint space has " + std::to_string(n));
}

// ---- loading ----------------------------------------------------------------

GameSpec game_from_json(std::string_view text) {
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(text);
    } catch (const nlohmann::json::exception& e) {
        throw std::invalid_argument(std::string("game JSON: ") + e.what());
    }
    if (!doc.is_object()) throw std::invalid_argument("game JSON: top level must be an object");
    if (!doc.contains("players") || !doc["players"].is_array() || doc["players"].empty())
        throw std::invalid_argument("game JSON: needs a non-empty players array");
    if (!doc.contains("utilities") || !doc["utilities"].is_array())
        throw std::invalid_argument("game JSON: needs a utilities array");

    GameSpec game;
    for (const auto& pj : doc["players"]) {
        if (!pj.is_object() || !pj.contains("dim") || !pj.contains("box"))
            throw std::invalid_argument("game JSON: each player needs dim and box");
        if (!pj["dim"].is_number_integer())
            throw std::invalid_argument("game JSON: player dim must be an integer");
        Player p;
        p.dim = pj["dim"].get<int>();
        if (p.dim < 1) throw std::invalid_argument("game JSON: player dim must be >= 1");
        const auto& bj = pj["box"];
        if (!bj.is_array() || bj.size() != static_cast<std::size_t>(2 * p.dim))
            throw std::invalid_argument(
                "game JSON: box needs 2*dim interleaved lo/hi values, got " +
                std::to_string(bj.size()));
        for (int a = 0; a < p.dim; ++a) {
            if (!bj[2 * a].is_number() || !bj[2 * a + 1].is_number())
                throw std::invalid_argument("game JSON: box entries must be numbers");
            p.box.lo.push_back(bj[2 * a].get<double>());
            p.box.hi.push_back(bj[2 * a + 1].get<double>());
        }
        game.players.push_back(std::move(p));
    }
    const int n = game.joint_dim();
    for (const auto& uj : doc["utilities"]) {
        if (!uj.is_string())
            throw std::invalid_argument("game JSON: utilities must be expression strings");
        game.utilities.push_back(parse_field(uj.get<std::string>(), n));
    }
    if (doc.contains("potential") && !doc["potential"].is_null()) {
        if (!doc["potential"].is_string())
            throw std::invalid_argument("game JSON: potential must be an expression string");
        game.potential = parse_field(doc["potential"].get<std::string>(), n);
    }
    game.validate();
    return game;
}

GameSpec builtin_game(std::string_view name) {
    GameSpec game;
    if (name == "fig4") {
        // Boxes wide enough that every best response to a profile in the
        // usual probe window [-2.5,2.5] is interior: the cubic signal
        // a1^3 - 2*a1 reaches 10.625 at a1 = 2.5. A tight box would add
        // corner equilibria of the truncated game at its own vertices.
        game.players = {Player{1, square_box(-11.0, 11.0, 1)},
                        Player{1, square_box(-11.0, 11.0, 1)}};
        game.utilities = {builtin_field("fig4_u1"), builtin_field("fig4_u2")};
    } else if (name == "econ_quadratic") {
        game.players = {Player{1, square_box(-2.0, 2.0, 1)}, Player{1, square_box(-2.0, 2.0, 1)}};
        game.utilities = {parse_field("-(x0 + x1)^2 - x0^2", 2),
                          parse_field("-(x0 + x1)^2 - x1^2", 2)};
        game.potential = parse_field("-(x0 + x1)^2 - x0^2 - x1^2", 2);
    } else {
        throw std::invalid_argument("unknown builtin game: " + std::string(name));
    }
    game.validate();
    return game;
}

std::vector<std::string> builtin_game_names() { return {"fig4", "econ_quadratic"}; }

// ---- product strategy sets ----------------------------------------------------

bool JointGridSet::empty() const {
    if (masks.empty()) return true;
    for (const NodeMask& m : masks)
        if (m.count() == 0) return true;
    return false;
}

std::vector<std::size_t> JointGridSet::mask_sizes() const {
    std::vector<std::size_t> out;
    out.reserve(masks.size());
    for (const NodeMask& m : masks) out.push_back(m.count());
    return out;
}

std::vector<int> JointGridSet::component_counts() const {
    std::vector<int> out;
    out.reserve(masks.size());
    for (std::size_t i = 0; i < masks.size(); ++i)
        out.push_back(connected_components(grids[i], masks[i]).count);
    return out;
}

bool JointGridSet::same_masks(const JointGridSet& other) const { return masks == other.masks; }

JointGridSet full_strategy_set(const GameSpec& game, std::vector<RegularGrid> grids) {
    game.validate();
    if (static_cast<int>(grids.size()) != game.player_count())
        throw std::invalid_argument("full_strategy_set: need one grid per player, got " +
                                    std::to_string(grids.size()));
    JointGridSet S;
    S.grids = std::move(grids);
    for (int i = 0; i < game.player_count(); ++i) {
        require_grid(game, i, S.grids[i]);
        S.masks.push_back(NodeMask{std::vector<char>(S.grids[i].node_count(), 1)});
    }
    return S;
}

NodeMask nodes_in_box(const RegularGrid& grid, const BoxDomain& box, double slack) {
    if (box.dim() != grid.dim())
        throw std::invalid_argument("nodes_in_box: box dimension " + std::to_string(box.dim()) +
                                    " does not match the grid's " + std::to_string(grid.dim()));
    box.validate();
    NodeMask mask;
    mask.in.assign(grid.node_count(), 0);
    std::vector<double> pt(grid.dim());
    for (std::size_t k = 0; k < mask.in.size(); ++k) {
        grid.node_point(k, pt);
        mask.in[k] = box.contains(pt, slack) ? 1 : 0;
    }
    return mask;
}

// ---- best responses and the image operator ------------------------------------

NodeMask player_best_response(const GameSpec& game, int player, std::span<const double> others,
                              const RegularGrid& grid_i, double tol) {
    game.validate();
    require_player(game, player);
    require_grid(game, player, grid_i);
    if (tol < 0.0) throw std::invalid_argument("player_best_response: tol must be >= 0");
    const int n = game.joint_dim();
    const int d = game.players[player].dim;
    if (static_cast<int>(others.size()) != n - d)
        throw std::invalid_argument("player_best_response: expected " + std::to_string(n - d) +
                                    " opponent coordinates, got " + std::to_string(others.size()));
    const int off = game.axis_offset(player);
    std::vector<double> joint(n, 0.0);
    int src = 0;
    for (int a = 0; a < n; ++a)
        if (a < off || a >= off + d) joint[a] = others[src++];

    const std::vector<double> own = all_node_coords(grid_i);
    std::vector<double> vals(grid_i.node_count());
    const double best = slice_values(game.utilities[player], own, d, off, joint, vals);
    NodeMask mask;
    mask.in.assign(vals.size(), 0);
    for (std::size_t k = 0; k < vals.size(); ++k)
        if (vals[k] >= best - tol) mask.in[k] = 1;
    return mask;
}

std::size_t lambda_profile_count(const JointGridSet& S) {
    std::size_t total = 0;
    for (std::size_t i = 0; i < S.masks.size(); ++i) {
        std::size_t profiles = 1;
        for (std::size_t j = 0; j < S.masks.size(); ++j)
            if (j != i) profiles = saturating_mul(profiles, S.masks[j].count());
        total = saturating_add(total, profiles);
    }
    return total;
}

JointGridSet lambda_operator(const GameSpec& game, const JointGridSet& S, double tol,
                             std::size_t budget) {
    game.validate();
    require_set(game, S);
    if (tol < 0.0) throw std::invalid_argument("lambda_operator: tol must be >= 0");
    const std::size_t need = lambda_profile_count(S);
    if (need > budget) {
        std::ostringstream msg;
        msg << "lambda_operator: " << need << " opponent profiles exceed the budget of " << budget
            << " (per-player mask sizes:";
        for (const NodeMask& m : S.masks) msg << ' ' << m.count();
        msg << ')';
        throw std::runtime_error(msg.str());
    }

    const int n = game.joint_dim();
    JointGridSet out;
    out.grids = S.grids;
    out.masks.resize(S.masks.size());

    for (int i = 0; i < game.player_count(); ++i) {
        const RegularGrid& grid_i = S.grids[i];
        const int d = game.players[i].dim;
        const int off = game.axis_offset(i);
        NodeMask image;
        image.in.assign(grid_i.node_count(), 0);

        // The other players' masked node coordinates, flat per opponent.
        std::vector<std::vector<double>> opp_pts;
        std::vector<int> opp_dim, opp_off;
        std::vector<std::size_t> opp_count;
        bool any_empty = false;
        for (int j = 0; j < game.player_count(); ++j) {
            if (j == i) continue;
            const RegularGrid& gj = S.grids[j];
            std::vector<double> pts;
            std::vector<double> pt(gj.dim());
            for (std::size_t k = 0; k < gj.node_count(); ++k) {
                if (!S.masks[j].in[k]) continue;
                gj.node_point(k, pt);
                pts.insert(pts.end(), pt.begin(), pt.end());
            }
            const std::size_t count = pts.size() / static_cast<std::size_t>(gj.dim());
            if (count == 0) any_empty = true;
            opp_pts.push_back(std::move(pts));
            opp_dim.push_back(gj.dim());
            opp_off.push_back(game.axis_offset(j));
            opp_count.push_back(count);
        }

        if (!any_empty) {
            const std::vector<double> own = all_node_coords(grid_i);
            std::vector<double> vals(grid_i.node_count());
            std::vector<double> joint(n, 0.0);
            std::vector<std::size_t> choice(opp_pts.size(), 0);
            std::size_t filled = 0;
            const std::size_t full = grid_i.node_count();
            auto advance = [&]() -> bool {
                for (std::size_t pos = choice.size(); pos-- > 0;) {
                    if (++choice[pos] < opp_count[pos]) return true;
                    choice[pos] = 0;
                }
                return false;
            };
            do {
                for (std::size_t j = 0; j < opp_pts.size(); ++j)
                    std::copy(opp_pts[j].begin() +
                                  static_cast<std::ptrdiff_t>(choice[j]) * opp_dim[j],
                              opp_pts[j].begin() +
                                  static_cast<std::ptrdiff_t>(choice[j] + 1) * opp_dim[j],
                              joint.begin() + opp_off[j]);
                const double best = slice_values(game.utilities[i], own, d, off, joint, vals);
                for (std::size_t k = 0; k < vals.size(); ++k)
                    if (!image.in[k] && vals[k] >= best - tol) {
                        image.in[k] = 1;
                        ++filled;
                    }
                // The union only grows; once it saturates the grid, stop.
                if (filled == full) break;
            } while (advance());
        }
        out.masks[i] = std::move(image);
    }
    return out;
}

RationalizabilityTrace iterate_rationalizable(const GameSpec& game, const JointGridSet& S0,
                                              int max_k, double tol, std::size_t budget) {
    game.validate();
    require_set(game, S0);
    if (max_k < 0) throw std::invalid_argument("iterate_rationalizable: max_k must be >= 0");
    RationalizabilityTrace trace;
    auto push = [&trace](int k, JointGridSet set) {
        RationalizabilityTrace::Step st;
        st.k = k;
        st.sizes = set.mask_sizes();
        st.components = set.component_counts();
        st.set = std::move(set);
        trace.steps.push_back(std::move(st));
    };
    push(0, S0);
    for (int k = 1; k <= max_k; ++k) {
        const JointGridSet& prev = trace.steps.back().set;
        if (lambda_profile_count(prev) > budget) {
            trace.budget_exceeded = true;
            break;
        }
        JointGridSet next = lambda_operator(game, prev, tol, budget);
        const bool fixed = next.same_masks(prev);
        push(k, std::move(next));
        if (fixed) {
            trace.fixed_point_reached = true;
            break;
        }
    }
    return trace;
}

Certificate strategic_compactness_check(const GameSpec& game, const JointGridSet& K, double tol,
                                        std::size_t budget) {
    Certificate cert;
    cert.condition = "strategic_compactness";
    cert.params = {{"tol", tol}};
    const JointGridSet image = lambda_operator(game, K, tol, budget);  // validates inputs

    double worst = 0.0;
    std::vector<double> witness;
    std::string worst_note;
    std::size_t samples = 0;
    for (int i = 0; i < game.player_count(); ++i) {
        const RegularGrid& grid = K.grids[i];
        const double spacing = grid.max_spacing();
        std::vector<double> pt(grid.dim());
        for (std::size_t k = 0; k < grid.node_count(); ++k) {
            if (!image.masks[i].in[k]) continue;
            ++samples;
            grid.node_point(k, pt);
            const double ratio = distance_to_mask(grid, K.masks[i], pt) / spacing;
            if (ratio > worst) {
                worst = ratio;
                witness.assign(pt.begin(), pt.end());
                worst_note = "player " + std::to_string(i) + " response at";
            }
        }
    }
    cert.samples_checked = samples;
    cert.worst_ratio = worst;
    cert.witness = std::move(witness);
    if (samples == 0) {
        cert.verdict = Verdict::Inconclusive;
        cert.note = "best-response image is empty; nothing to compare";
    } else if (worst <= 1.0 + kRatioSlack) {
        cert.verdict = Verdict::Pass;
        cert.note = "every response node lies within one grid spacing of the set";
    } else {
        cert.verdict = Verdict::Fail;
        cert.note = worst_note + " " + std::to_string(worst) + " spacings from the set";
    }
    return cert;
}

std::string rationalizable_trace_csv(const RationalizabilityTrace& trace) {
    int max_dim = 0;
    for (const auto& st : trace.steps)
        for (const RegularGrid& g : st.set.grids) max_dim = std::max(max_dim, g.dim());
    std::ostringstream os;
    os.precision(17);
    os << "k,player,node,in_mask";
    for (int a = 0; a < max_dim; ++a) os << ",c" << a;
    os << '\n';
    for (const auto& st : trace.steps) {
        for (std::size_t i = 0; i < st.set.grids.size(); ++i) {
            const RegularGrid& g = st.set.grids[i];
            std::vector<double> pt(g.dim());
            for (std::size_t k = 0; k < g.node_count(); ++k) {
                g.node_point(k, pt);
                os << st.k << ',' << i << ',' << k << ','
                   << (st.set.masks[i].in[k] ? 1 : 0);
                for (int a = 0; a < max_dim; ++a) {
                    os << ',';
                    if (a < g.dim()) os << pt[a];
                }
                os << '\n';
            }
        }
    }
    return os.str();
}

// ---- equilibria ----------------------------------------------------------------

NashResult find_nash(const GameSpec& game, const std::vector<RegularGrid>& grids, double tol) {
    game.validate();
    if (static_cast<int>(grids.size()) != game.player_count())
        throw std::invalid_argument("find_nash: need one grid per player, got " +
                                    std::to_string(grids.size()));
    for (int i = 0; i < game.player_count(); ++i) require_grid(game, i, grids[i]);
    if (tol < 0.0) throw std::invalid_argument("find_nash: tol must be >= 0");

    NashResult res;
    BoxDomain jbox;
    std::vector<int> jres;
    for (const RegularGrid& g : grids) {
        jbox.lo.insert(jbox.lo.end(), g.box.lo.begin(), g.box.lo.end());
        jbox.hi.insert(jbox.hi.end(), g.box.hi.begin(), g.box.hi.end());
        jres.insert(jres.end(), g.res.begin(), g.res.end());
    }
    res.joint_grid = make_grid(jbox, std::move(jres));
    const RegularGrid& J = res.joint_grid;
    const std::size_t total = J.node_count();
    const int n = game.joint_dim();
    const int np = game.player_count();

    std::vector<std::vector<double>> vals(np);
    for (int i = 0; i < np; ++i) vals[i] = sample_lattice(game.utilities[i], J);

    // Per player: flat key over the axes the player does not own, plus the
    // slice max/min those keys index.
    std::vector<std::vector<std::size_t>> keys(np, std::vector<std::size_t>(total));
    std::vector<std::vector<double>> smax(np), smin(np);
    for (int i = 0; i < np; ++i) {
        std::size_t own = 1;
        for (int a : game.player_axes(i)) own *= static_cast<std::size_t>(J.res[a]);
        smax[i].assign(total / own, -std::numeric_limits<double>::infinity());
        smin[i].assign(total / own, std::numeric_limits<double>::infinity());
    }
    std::vector<int> idx(n);
    for (std::size_t k = 0; k < total; ++k) {
        J.unflatten(k, idx);
        for (int i = 0; i < np; ++i) {
            const int off = game.axis_offset(i);
            const int d = game.players[i].dim;
            std::size_t key = 0;
            for (int a = 0; a < n; ++a)
                if (a < off || a >= off + d)
                    key = key * static_cast<std::size_t>(J.res[a]) +
                          static_cast<std::size_t>(idx[a]);
            keys[i][k] = key;
            smax[i][key] = std::max(smax[i][key], vals[i][k]);
            smin[i][key] = std::min(smin[i][key], vals[i][k]);
        }
    }

    // Equilibrium is a property of the game, not of the probe window: the
    // slice optimum must cover the player's whole strategy box, or a window
    // smaller than the box would manufacture "equilibria" at its own edges
    // wherever the true best response lies outside the window. Sweep a box
    // lattice at the window's spacing and fold it into the slice extrema
    // (skipped when the window already spans the box at that spacing).
    for (int i = 0; i < np; ++i) {
        const Player& pl = game.players[i];
        const RegularGrid& wg = grids[i];
        RegularGrid ext;
        ext.box = pl.box;
        for (int la = 0; la < pl.dim; ++la) {
            const double extent = pl.box.hi[la] - pl.box.lo[la];
            const int steps = static_cast<int>(std::ceil(extent / wg.spacing(la) - 1e-9));
            ext.res.push_back(std::max(steps, 1) + 1);
        }
        if (ext.box.lo == wg.box.lo && ext.box.hi == wg.box.hi && ext.res == wg.res) continue;
        ext.validate();

        const int d = pl.dim;
        const int off = game.axis_offset(i);
        const std::vector<double> own = all_node_coords(ext);
        std::vector<int> other_axes;
        for (int a = 0; a < n; ++a)
            if (a < off || a >= off + d) other_axes.push_back(a);
        std::vector<std::vector<double>> tab;  // window node coordinates per other axis
        for (int a : other_axes) {
            std::vector<double> col(J.res[a]);
            for (int j = 0; j < J.res[a]; ++j)
                col[j] = (j == J.res[a] - 1) ? J.box.hi[a] : J.box.lo[a] + j * J.spacing(a);
            tab.push_back(std::move(col));
        }
        std::vector<int> tup(other_axes.size(), 0);
        std::vector<double> joint(n, 0.0);
        std::vector<double> slice(ext.node_count());
        while (true) {
            std::size_t key = 0;
            for (std::size_t t = 0; t < other_axes.size(); ++t) {
                key = key * static_cast<std::size_t>(J.res[other_axes[t]]) +
                      static_cast<std::size_t>(tup[t]);
                joint[other_axes[t]] = tab[t][tup[t]];
            }
            const double gmax = slice_values(game.utilities[i], own, d, off, joint, slice);
            double gmin = gmax;
            for (double v : slice) gmin = std::min(gmin, v);
            smax[i][key] = std::max(smax[i][key], gmax);
            smin[i][key] = std::min(smin[i][key], gmin);
            std::size_t pos = tup.size();
            bool done = true;
            while (pos-- > 0) {
                if (++tup[pos] < J.res[other_axes[pos]]) {
                    done = false;
                    break;
                }
                tup[pos] = 0;
            }
            if (done) break;
        }
    }

    res.mask.in.assign(total, 0);
    for (std::size_t k = 0; k < total; ++k) {
        bool ok = true;
        for (int i = 0; i < np && ok; ++i) {
            const std::size_t key = keys[i][k];
            const double range = smax[i][key] - smin[i][key];
            if (range > 0.0 && vals[i][k] < smax[i][key] - tol * range) ok = false;
        }
        res.mask.in[k] = ok ? 1 : 0;
    }
    res.components = connected_components(J, res.mask);

    // First-order residual of the joint action profile: summed squared
    // own-gradient norms, differentiated through each utility's Hessian.
    auto phi = [&game, n](std::span<const double> a, std::span<double> grad_out) {
        double val = 0.0;
        std::fill(grad_out.begin(), grad_out.end(), 0.0);
        for (int i = 0; i < game.player_count(); ++i) {
            const ScalarField& u = game.utilities[i];
            const std::vector<double> g = gradient(u, a);
            std::vector<double> e(n, 0.0);
            for (int axis : game.player_axes(i)) {
                const double gown = g[axis];
                val += gown * gown;
                e.assign(n, 0.0);
                e[axis] = 1.0;
                const std::vector<double> hv = hessian_vector(u, a, e);
                for (int b = 0; b < n; ++b) grad_out[b] += 2.0 * gown * hv[b];
            }
        }
        return val;
    };

    DescentOptions polish_opt;
    polish_opt.max_iters = 400;
    polish_opt.tol_grad = 1e-12;
    for (int c = 0; c < res.components.count; ++c) {
        std::size_t best_k = res.components.representative[c];
        double best_gap = std::numeric_limits<double>::infinity();
        for (std::size_t k = 0; k < total; ++k) {
            if (res.components.label[k] != c) continue;
            double gap = 0.0;
            for (int i = 0; i < np; ++i) {
                const std::size_t key = keys[i][k];
                const double range = smax[i][key] - smin[i][key];
                if (range > 0.0) gap = std::max(gap, (smax[i][key] - vals[i][k]) / range);
            }
            if (gap < best_gap) {
                best_gap = gap;
                best_k = k;
            }
        }
        std::vector<double> node_pt = J.node_point(best_k);
        const DescentResult r = projected_descent(phi, jbox, node_pt, polish_opt);
        std::vector<double> grad_scratch(n);
        const double phi_node = phi(node_pt, grad_scratch);
        const bool improved = r.value <= phi_node;
        res.representatives.push_back(improved ? r.point : node_pt);
        res.residuals.push_back(std::sqrt(std::max(improved ? r.value : phi_node, 0.0)));
        res.node_representatives.push_back(std::move(node_pt));
    }
    return res;
}

Certificate potential_consistency_check(const GameSpec& game, const ScalarField& P,
                                        const RegularGrid& grid, double tol) {
    game.validate();
    const int n = game.joint_dim();
    if (P.dim != n)
        throw std::invalid_argument("potential_consistency_check: candidate reads " +
                                    std::to_string(P.dim) +
                                    " variables; the joint space has " + std::to_string(n));
    if (grid.dim() != n)
        throw std::invalid_argument("potential_consistency_check: grid dimension " +
                                    std::to_string(grid.dim()) +
                                    " does not match the joint space " + std::to_string(n));
    require_subbox(grid.box, game.joint_box(), "potential grid");
    if (tol < 0.0) throw std::invalid_argument("potential_consistency_check: tol must be >= 0");
    grid.validate();

    Certificate cert;
    cert.condition = "potential_consistency";
    cert.params = {{"tol", tol}};
    double worst = -1.0;  // below any |diff|, so exact agreement still records a witness
    std::vector<double> witness;
    std::string worst_note;
    std::size_t samples = 0;
    std::vector<double> pt(n);
    for (std::size_t k = 0; k < grid.node_count(); ++k) {
        grid.node_point(k, pt);
        const std::vector<double> gp = gradient(P, pt);
        for (int i = 0; i < game.player_count(); ++i) {
            const std::vector<double> gu = gradient(game.utilities[i], pt);
            const int off = game.axis_offset(i);
            for (int a = off; a < off + game.players[i].dim; ++a) {
                ++samples;
                const double diff = std::abs(gp[a] - gu[a]);
                if (diff > worst) {
                    worst = diff;
                    witness.assign(pt.begin(), pt.end());
                    worst_note = "player " + std::to_string(i) + ", axis " + std::to_string(a);
                }
            }
        }
    }
    cert.samples_checked = samples;
    cert.worst_ratio = std::max(worst, 0.0);
    cert.witness = std::move(witness);
    if (samples == 0) {
        cert.verdict = Verdict::Inconclusive;
        cert.note = "no gradient comparisons were made";
    } else if (cert.worst_ratio <= tol) {
        cert.verdict = Verdict::Pass;
        cert.note = "largest own-gradient discrepancy " + std::to_string(cert.worst_ratio) +
                    " (" + worst_note + ")";
    } else {
        cert.verdict = Verdict::Fail;
        cert.note = "own-gradient mismatch of " + std::to_string(cert.worst_ratio) + " (" +
                    worst_note + ")";
    }
    return cert;
}

}  // namespace invextopo
