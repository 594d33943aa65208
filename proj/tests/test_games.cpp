#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

#include "doctest.h"
#include "invextopo/games.hpp"

using namespace invextopo;

namespace {

constexpr double kSqrt3 = 1.7320508075688772;

std::vector<RegularGrid> pair_grids(double lo, double hi, int res) {
    const RegularGrid g = make_grid(square_box(lo, hi, 1), res);
    return {g, g};
}

// Flat index of a 2-d joint node from its per-axis indices.
std::size_t joint_flat(const RegularGrid& joint, int i0, int i1) {
    const std::array<int, 2> idx{i0, i1};
    return joint.flat_index(idx);
}

bool masks_nested(const JointGridSet& inner, const JointGridSet& outer) {
    for (std::size_t i = 0; i < inner.masks.size(); ++i)
        for (std::size_t k = 0; k < inner.masks[i].in.size(); ++k)
            if (inner.masks[i].in[k] && !outer.masks[i].in[k]) return false;
    return true;
}

// Two-player quadratic game with a cubic reply curve for the second player:
// u1 = -a1^2/2 + a1*a2 (reply a1 = a2), u2 = -a2^2/2 + a2*(a1^3 - 2*a1)
// (reply a2 = a1^3 - 2*a1).  Equilibria at (0,0) and +/-(sqrt3, sqrt3).
GameSpec cubic_reply_game() { return builtin_game("fig4"); }

// Two-player quadratic game with exact potential -(a1+a2)^2 - a1^2 - a2^2 and
// unique equilibrium at the origin.
GameSpec quadratic_potential_game() { return builtin_game("econ_quadratic"); }

}  // namespace

TEST_CASE("builtin games expose their structure") {
    const auto names = builtin_game_names();
    CHECK(std::find(names.begin(), names.end(), "fig4") != names.end());
    CHECK(std::find(names.begin(), names.end(), "econ_quadratic") != names.end());
    CHECK_THROWS_AS(builtin_game("nonesuch"), std::invalid_argument);

    const GameSpec cubic = cubic_reply_game();
    REQUIRE(cubic.player_count() == 2);
    CHECK(cubic.joint_dim() == 2);
    CHECK(cubic.axis_offset(0) == 0);
    CHECK(cubic.axis_offset(1) == 1);
    CHECK(cubic.player_axes(1) == std::vector<int>{1});
    for (const Player& p : cubic.players) {
        CHECK(p.dim == 1);
        // Wide enough that the cubic reply a1^3 - 2*a1 stays interior on the
        // probe windows used below (at a1 = 2.5 the reply is 10.625).
        CHECK(p.box.lo[0] == -11.0);
        CHECK(p.box.hi[0] == 11.0);
    }
    CHECK(cubic.utilities.size() == 2);
    CHECK(cubic.utilities[0].dim == 2);
    CHECK_FALSE(cubic.potential.has_value());
    CHECK_NOTHROW(cubic.validate());

    const GameSpec econ = quadratic_potential_game();
    REQUIRE(econ.potential.has_value());
    CHECK(econ.potential->dim == 2);
    for (const Player& p : econ.players) {
        CHECK(p.box.lo[0] == -2.0);
        CHECK(p.box.hi[0] == 2.0);
    }
    // P = u1 + u2 - cross terms collapses to -(a1+a2)^2 - a1^2 - a2^2 here;
    // spot-check the defining identity dP/da_i = du_i/da_i at one point.
    const std::vector<double> pt{0.3, -0.7};
    const auto gp = gradient(*econ.potential, pt);
    const auto g1 = gradient(econ.utilities[0], pt);
    const auto g2 = gradient(econ.utilities[1], pt);
    CHECK(gp[0] == doctest::Approx(g1[0]).epsilon(1e-12));
    CHECK(gp[1] == doctest::Approx(g2[1]).epsilon(1e-12));
}

TEST_CASE("GameSpec::validate rejects malformed structures") {
    GameSpec g;
    CHECK_THROWS_AS(g.validate(), std::invalid_argument);  // no players

    g.players = {Player{1, square_box(-1.0, 1.0, 1)}, Player{1, square_box(-1.0, 1.0, 1)}};
    g.utilities = {parse_field("x0*x1", 2)};
    CHECK_THROWS_AS(g.validate(), std::invalid_argument);  // one utility for two players

    g.utilities = {parse_field("x0*x1", 2), parse_field("x0", 1)};
    CHECK_THROWS_AS(g.validate(), std::invalid_argument);  // arity != joint dimension

    g.utilities = {parse_field("x0*x1", 2), parse_field("x0 - x1", 2)};
    CHECK_NOTHROW(g.validate());

    g.potential = parse_field("x0", 1);
    CHECK_THROWS_AS(g.validate(), std::invalid_argument);  // potential arity mismatch
    g.potential.reset();

    g.players[1].dim = 0;
    CHECK_THROWS_AS(g.validate(), std::invalid_argument);  // non-positive dimension
    g.players[1].dim = 2;
    CHECK_THROWS_AS(g.validate(), std::invalid_argument);  // box dimension mismatch
}

TEST_CASE("game_from_json loads documents and rejects malformed ones") {
    const char* doc = R"({
        "players": [{"dim": 1, "box": [-1.0, 2.0]}, {"dim": 1, "box": [-3.0, 4.0]}],
        "utilities": ["x0*x1", "x0 - x1"],
        "potential": "x0 + x1"
    })";
    const GameSpec g = game_from_json(doc);
    REQUIRE(g.player_count() == 2);
    CHECK(g.players[0].box.lo[0] == -1.0);
    CHECK(g.players[0].box.hi[0] == 2.0);
    CHECK(g.players[1].box.lo[0] == -3.0);
    CHECK(g.players[1].box.hi[0] == 4.0);
    REQUIRE(g.potential.has_value());
    const std::vector<double> pt{1.5, -2.0};
    CHECK(evaluate(g.utilities[0], pt) == doctest::Approx(-3.0));
    CHECK(evaluate(g.utilities[1], pt) == doctest::Approx(3.5));
    CHECK(evaluate(*g.potential, pt) == doctest::Approx(-0.5));

    // Multi-dimensional player: box entries interleave lo/hi per axis.
    const GameSpec wide = game_from_json(
        R"({"players": [{"dim": 2, "box": [0.0, 1.0, -1.0, 1.0]}], "utilities": ["x0 + x1"]})");
    CHECK(wide.joint_dim() == 2);
    CHECK(wide.players[0].box.lo[1] == -1.0);

    CHECK_THROWS_AS(game_from_json("not json"), std::invalid_argument);
    CHECK_THROWS_AS(game_from_json("[1,2]"), std::invalid_argument);
    CHECK_THROWS_AS(game_from_json(R"({"utilities": ["x0"]})"), std::invalid_argument);
    CHECK_THROWS_AS(game_from_json(R"({"players": [], "utilities": []})"),
                    std::invalid_argument);
    CHECK_THROWS_AS(
        game_from_json(R"({"players": [{"dim": 2, "box": [0, 1]}], "utilities": ["x0"]})"),
        std::invalid_argument);  // box needs 2*dim entries
    CHECK_THROWS_AS(
        game_from_json(R"({"players": [{"dim": 1, "box": [0, 1]}], "utilities": [7]})"),
        std::invalid_argument);  // utilities must be strings
    CHECK_THROWS_AS(
        game_from_json(R"({"players": [{"dim": 1, "box": [0, 1]}], "utilities": ["x0 +"]})"),
        ParseError);  // structural JSON is fine, the expression is not
    CHECK_THROWS_AS(
        game_from_json(R"({"players": [{"dim": 1, "box": [0, 1]}], "utilities": ["x5"]})"),
        ParseError);  // variable beyond the joint dimension
}

TEST_CASE("player_best_response matches slice optima") {
    const GameSpec cubic = cubic_reply_game();
    const RegularGrid g41 = make_grid(square_box(-2.0, 2.0, 1), 41);  // spacing 0.1

    // Player 1 replies with a1 = a2; player 2 with a2 = a1^3 - 2*a1.
    {
        const std::vector<double> others{1.0};
        const NodeMask br = player_best_response(cubic, 0, others, g41, 1e-9);
        REQUIRE(br.count() == 1);
        for (std::size_t k = 0; k < br.in.size(); ++k)
            if (br.in[k]) CHECK(g41.node_point(k)[0] == doctest::Approx(1.0).epsilon(1e-12));
    }
    {
        const std::vector<double> others{0.0};
        const NodeMask br = player_best_response(cubic, 1, others, g41, 1e-9);
        REQUIRE(br.count() == 1);
        for (std::size_t k = 0; k < br.in.size(); ++k)
            if (br.in[k]) CHECK(g41.node_point(k)[0] == 0.0);
    }
    {
        // Reply to a1 = 1.5 is 1.5^3 - 3 = 0.375; nearest lattice winner is 0.4.
        const std::vector<double> others{1.5};
        const NodeMask br = player_best_response(cubic, 1, others, g41, 1e-9);
        REQUIRE(br.count() == 1);
        for (std::size_t k = 0; k < br.in.size(); ++k)
            if (br.in[k]) CHECK(g41.node_point(k)[0] == doctest::Approx(0.4).epsilon(1e-12));
    }
    {
        // Dyadic tie: at a2 = 0.0625 the slice peak a1 = 0.0625 falls midway
        // between the spacing-0.125 nodes 0 and 0.125, and both slice values
        // are exactly 0, so tol = 0 must keep both.
        const RegularGrid g33 = make_grid(square_box(-2.0, 2.0, 1), 33);
        const std::vector<double> others{0.0625};
        const NodeMask br = player_best_response(cubic, 0, others, g33, 0.0);
        REQUIRE(br.count() == 2);
        std::vector<double> winners;
        for (std::size_t k = 0; k < br.in.size(); ++k)
            if (br.in[k]) winners.push_back(g33.node_point(k)[0]);
        CHECK(winners[0] == 0.0);
        CHECK(winners[1] == 0.125);
    }
    {
        // A utility constant in the player's own action marks every node.
        GameSpec flat;
        flat.players = {Player{1, square_box(-1.0, 1.0, 1)}, Player{1, square_box(-1.0, 1.0, 1)}};
        flat.utilities = {parse_field("x1", 2), parse_field("x0", 2)};
        const RegularGrid g5 = make_grid(square_box(-1.0, 1.0, 1), 5);
        const std::vector<double> others{0.5};
        CHECK(player_best_response(flat, 0, others, g5, 0.0).count() == 5);
    }

    const std::vector<double> one{0.0};
    const std::vector<double> two{0.0, 0.0};
    CHECK_THROWS_AS(player_best_response(cubic, 2, one, g41, 1e-9), std::invalid_argument);
    CHECK_THROWS_AS(player_best_response(cubic, 0, two, g41, 1e-9), std::invalid_argument);
    CHECK_THROWS_AS(player_best_response(cubic, 0, one, g41, -1.0), std::invalid_argument);
    const RegularGrid outside = make_grid(square_box(-12.0, 12.0, 1), 11);
    CHECK_THROWS_AS(player_best_response(cubic, 0, one, outside, 1e-9), std::invalid_argument);
}

TEST_CASE("strategy sets: full sets, box restriction, component counts") {
    const GameSpec econ = quadratic_potential_game();
    const auto grids = pair_grids(-2.0, 2.0, 41);

    const JointGridSet full = full_strategy_set(econ, grids);
    CHECK_FALSE(full.empty());
    CHECK(full.mask_sizes() == std::vector<std::size_t>{41, 41});
    CHECK(full.component_counts() == std::vector<int>{1, 1});
    CHECK(full.same_masks(full));

    const NodeMask inner = nodes_in_box(grids[0], square_box(-1.0, 1.0, 1));
    CHECK(inner.count() == 21);

    JointGridSet split = full;
    split.masks[0].in.assign(41, 0);
    for (std::size_t k : {std::size_t{0}, std::size_t{1}, std::size_t{2}, std::size_t{10},
                          std::size_t{11}})
        split.masks[0].in[k] = 1;
    CHECK(split.component_counts() == std::vector<int>{2, 1});
    CHECK_FALSE(split.same_masks(full));

    JointGridSet drained = full;
    drained.masks[1].in.assign(41, 0);
    CHECK(drained.empty());

    // Grids must live inside the strategy boxes, one per player.
    CHECK_THROWS_AS(full_strategy_set(econ, {grids[0]}), std::invalid_argument);
    CHECK_THROWS_AS(full_strategy_set(econ, pair_grids(-3.0, 3.0, 11)), std::invalid_argument);
    CHECK_THROWS_AS(nodes_in_box(grids[0], square_box(-1.0, 1.0, 2)), std::invalid_argument);

    JointGridSet bad = full;
    bad.masks[0].in.resize(40);
    CHECK_THROWS_AS(lambda_operator(econ, bad, 1e-9), std::invalid_argument);
}

TEST_CASE("lambda operator maps sets to best-response unions") {
    const GameSpec cubic = cubic_reply_game();

    // Against the singleton (0,0) each player's unique reply is 0.
    {
        const auto grids = pair_grids(-2.5, 2.5, 101);
        JointGridSet S;
        S.grids = grids;
        for (int i = 0; i < 2; ++i) {
            NodeMask m;
            m.in.assign(grids[i].node_count(), 0);
            m.in[50] = 1;  // node at 0.0
            S.masks.push_back(m);
        }
        const JointGridSet img = lambda_operator(cubic, S, 1e-9);
        CHECK(img.mask_sizes() == std::vector<std::size_t>{1, 1});
        CHECK(img.masks[0].in[50] == 1);
        CHECK(img.masks[1].in[50] == 1);
    }

    // The square [-sqrt3, sqrt3]^2 maps onto itself when the grids stop at
    // the square's edge: the cubic reply folds the interval into itself.
    {
        const auto grids = pair_grids(-kSqrt3, kSqrt3, 61);
        const JointGridSet K = full_strategy_set(cubic, grids);
        const JointGridSet img = lambda_operator(cubic, K, 0.03);
        CHECK(img.same_masks(K));
    }

    // Monotone: a larger input set can only enlarge the image.
    {
        const auto grids = pair_grids(-2.5, 2.5, 101);
        JointGridSet small, large;
        small.grids = large.grids = grids;
        for (int i = 0; i < 2; ++i) {
            small.masks.push_back(nodes_in_box(grids[i], square_box(-1.0, 1.0, 1)));
            large.masks.push_back(nodes_in_box(grids[i], square_box(-1.5, 1.5, 1)));
        }
        const JointGridSet li = lambda_operator(cubic, small, 1e-3);
        const JointGridSet lo = lambda_operator(cubic, large, 1e-3);
        CHECK(masks_nested(li, lo));
    }

    // An empty opponent mask empties the image; a single-player image never
    // depends on the input mask at all (there is nobody to respond to).
    {
        const auto grids = pair_grids(-2.5, 2.5, 101);
        JointGridSet empty;
        empty.grids = grids;
        empty.masks = {NodeMask{std::vector<char>(101, 0)}, NodeMask{std::vector<char>(101, 0)}};
        const JointGridSet img = lambda_operator(cubic, empty, 1e-9);
        CHECK(img.mask_sizes() == std::vector<std::size_t>{0, 0});

        GameSpec solo;
        solo.players = {Player{1, square_box(-2.0, 2.0, 1)}};
        solo.utilities = {parse_field("-(x0 - 0.5)^2", 1)};
        const RegularGrid g = make_grid(square_box(-2.0, 2.0, 1), 41);
        JointGridSet none;
        none.grids = {g};
        none.masks = {NodeMask{std::vector<char>(g.node_count(), 0)}};
        const JointGridSet from_none = lambda_operator(solo, none, 1e-9);
        const JointGridSet from_full = lambda_operator(solo, full_strategy_set(solo, {g}), 1e-9);
        CHECK(from_none.same_masks(from_full));
        CHECK(from_full.mask_sizes() == std::vector<std::size_t>{1});
    }
}

TEST_CASE("lambda profile budget is enforced") {
    const GameSpec cubic = cubic_reply_game();
    const JointGridSet full = full_strategy_set(cubic, pair_grids(-2.5, 2.5, 101));
    CHECK(lambda_profile_count(full) == 202);  // 101 opponent profiles per player
    CHECK_THROWS_AS(lambda_operator(cubic, full, 1e-3, 100), std::runtime_error);
    CHECK_NOTHROW(lambda_operator(cubic, full, 1e-3, 202));

    RationalizabilityTrace tr = iterate_rationalizable(cubic, full, 10, 1e-3, 100);
    CHECK(tr.budget_exceeded);
    CHECK_FALSE(tr.fixed_point_reached);
    CHECK(tr.steps.size() == 1);  // only the starting set was recorded
}

TEST_CASE("rationalizability iterates to fixed points") {
    const GameSpec cubic = cubic_reply_game();

    // Starting from the invariant square the very first step repeats it.
    {
        const JointGridSet K = full_strategy_set(cubic, pair_grids(-kSqrt3, kSqrt3, 61));
        const RationalizabilityTrace tr = iterate_rationalizable(cubic, K, 10, 0.03);
        REQUIRE(tr.steps.size() == 2);
        CHECK(tr.fixed_point_reached);
        CHECK_FALSE(tr.budget_exceeded);
        CHECK(tr.steps[0].k == 0);
        CHECK(tr.steps[1].k == 1);
        CHECK(tr.steps[1].set.same_masks(tr.steps[0].set));
        CHECK(tr.steps[1].components == std::vector<int>{1, 1});
    }

    // A slightly larger window shrinks into the square and stabilizes.
    {
        const JointGridSet S0 = full_strategy_set(cubic, pair_grids(-1.6, 1.6, 65));
        const RationalizabilityTrace tr = iterate_rationalizable(cubic, S0, 10, 0.03);
        REQUIRE(tr.steps.size() == 4);
        CHECK(tr.fixed_point_reached);
        CHECK(tr.steps[1].sizes == std::vector<std::size_t>{65, 53});
        CHECK(tr.steps[2].sizes == std::vector<std::size_t>{61, 53});
        CHECK(tr.steps[3].sizes == std::vector<std::size_t>{61, 53});
        CHECK(tr.steps[3].set.same_masks(tr.steps[2].set));
        for (std::size_t s = 1; s < tr.steps.size(); ++s)
            CHECK(masks_nested(tr.steps[s].set, tr.steps[s - 1].set));
        // Every surviving action sits inside the invariant square.
        for (int i = 0; i < 2; ++i) {
            const auto& st = tr.steps.back().set;
            for (std::size_t k = 0; k < st.masks[i].in.size(); ++k)
                if (st.masks[i].in[k])
                    CHECK(std::abs(st.grids[i].node_point(k)[0]) <= kSqrt3 + 1e-12);
        }
    }

    // A single-player game needs one step to reach its argmax and one to
    // confirm it.
    {
        GameSpec solo;
        solo.players = {Player{1, square_box(-2.0, 2.0, 1)}};
        solo.utilities = {parse_field("-(x0 - 0.5)^2", 1)};
        const RegularGrid g = make_grid(square_box(-2.0, 2.0, 1), 41);
        const RationalizabilityTrace tr =
            iterate_rationalizable(solo, full_strategy_set(solo, {g}), 10, 1e-9);
        REQUIRE(tr.steps.size() == 3);
        CHECK(tr.fixed_point_reached);
        CHECK(tr.steps.back().sizes == std::vector<std::size_t>{1});
    }

    // max_k = 0 records the starting set and stops without flags.
    {
        const JointGridSet K = full_strategy_set(cubic, pair_grids(-kSqrt3, kSqrt3, 21));
        const RationalizabilityTrace tr = iterate_rationalizable(cubic, K, 0, 0.03);
        CHECK(tr.steps.size() == 1);
        CHECK_FALSE(tr.fixed_point_reached);
        CHECK_FALSE(tr.budget_exceeded);
    }
}

TEST_CASE("iterates stay nested once the set maps into itself") {
    // On grids spanning the full strategy boxes the square [-sqrt3, sqrt3]^2
    // is no longer exactly invariant (its edge falls between nodes), but the
    // chain of iterates still decreases monotonically.
    const GameSpec cubic = cubic_reply_game();
    const auto grids = pair_grids(-11.0, 11.0, 441);
    JointGridSet K;
    K.grids = grids;
    K.masks = {nodes_in_box(grids[0], square_box(-kSqrt3, kSqrt3, 1)),
               nodes_in_box(grids[1], square_box(-kSqrt3, kSqrt3, 1))};
    const RationalizabilityTrace tr = iterate_rationalizable(cubic, K, 4, 1e-9);
    REQUIRE(tr.steps.size() == 5);
    CHECK(tr.steps[0].sizes == std::vector<std::size_t>{69, 69});
    CHECK(tr.steps.back().sizes == std::vector<std::size_t>{31, 31});
    for (std::size_t s = 1; s < tr.steps.size(); ++s) {
        CHECK(masks_nested(tr.steps[s].set, tr.steps[s - 1].set));
        CHECK(tr.steps[s].sizes[0] <= tr.steps[s - 1].sizes[0]);
        CHECK(tr.steps[s].sizes[1] <= tr.steps[s - 1].sizes[1]);
    }
}

TEST_CASE("strategic compactness certificates") {
    const GameSpec cubic = cubic_reply_game();
    const auto grids = pair_grids(-11.0, 11.0, 441);  // spacing 0.05

    {
        JointGridSet K;
        K.grids = grids;
        K.masks = {nodes_in_box(grids[0], square_box(-kSqrt3, kSqrt3, 1)),
                   nodes_in_box(grids[1], square_box(-kSqrt3, kSqrt3, 1))};
        const Certificate cert = strategic_compactness_check(cubic, K);
        CHECK(cert.condition == "strategic_compactness");
        CHECK(cert.passed());
        CHECK(cert.worst_ratio == 0.0);  // the image lands on K's own nodes
        CHECK(cert.samples_checked == 114);
    }
    {
        // [-1,1]^2 is too small: the reply to a1 near -0.8165 is about 1.089,
        // two spacings outside the mask.
        JointGridSet K;
        K.grids = grids;
        K.masks = {nodes_in_box(grids[0], square_box(-1.0, 1.0, 1)),
                   nodes_in_box(grids[1], square_box(-1.0, 1.0, 1))};
        const Certificate cert = strategic_compactness_check(cubic, K);
        CHECK_FALSE(cert.passed());
        CHECK(cert.verdict == Verdict::Fail);
        CHECK(cert.worst_ratio == doctest::Approx(2.0).epsilon(1e-12));
        REQUIRE(cert.witness.size() == 1);
        CHECK(std::abs(cert.witness[0]) == doctest::Approx(1.10).epsilon(1e-12));
    }
    {
        // An empty candidate produces an empty image: nothing to check.
        JointGridSet K;
        K.grids = grids;
        K.masks = {NodeMask{std::vector<char>(441, 0)}, NodeMask{std::vector<char>(441, 0)}};
        const Certificate cert = strategic_compactness_check(cubic, K);
        CHECK(cert.verdict == Verdict::Inconclusive);
        CHECK(cert.samples_checked == 0);
    }
}

TEST_CASE("find_nash separates the three cubic-reply equilibria") {
    const GameSpec cubic = cubic_reply_game();
    const auto grids = pair_grids(-2.5, 2.5, 101);  // window inside the strategy boxes
    const NashResult nr = find_nash(cubic, grids, 5e-4);

    CHECK(nr.joint_grid.node_count() == 101 * 101);
    CHECK(nr.mask.count() == 75);
    REQUIRE(nr.components.count == 3);
    std::vector<std::size_t> sizes = nr.components.size;
    std::sort(sizes.begin(), sizes.end());
    CHECK(sizes == std::vector<std::size_t>{21, 21, 33});

    // The probe window is smaller than the strategy boxes, so its edge nodes
    // must not masquerade as equilibria of a truncated game: the corners of
    // the window fail the test against actions outside the window.
    CHECK_FALSE(nr.mask.in[joint_flat(nr.joint_grid, 0, 0)]);
    CHECK_FALSE(nr.mask.in[joint_flat(nr.joint_grid, 100, 100)]);

    // Each true equilibrium is matched by exactly one polished representative.
    const std::vector<std::vector<double>> targets{
        {-kSqrt3, -kSqrt3}, {0.0, 0.0}, {kSqrt3, kSqrt3}};
    std::vector<int> hits(targets.size(), 0);
    for (int c = 0; c < nr.components.count; ++c) {
        CHECK(nr.residuals[c] <= 1e-6);
        for (std::size_t t = 0; t < targets.size(); ++t) {
            if (std::abs(nr.representatives[c][0] - targets[t][0]) < 1e-5 &&
                std::abs(nr.representatives[c][1] - targets[t][1]) < 1e-5)
                ++hits[t];
        }
    }
    CHECK(hits == std::vector<int>{1, 1, 1});

    // Node representatives stay on the lattice near their equilibria.
    for (int c = 0; c < nr.components.count; ++c) {
        CHECK(std::abs(nr.node_representatives[c][0]) <= 2.5);
        const double d0 = std::abs(nr.node_representatives[c][0] - nr.representatives[c][0]);
        const double d1 = std::abs(nr.node_representatives[c][1] - nr.representatives[c][1]);
        CHECK(d0 <= 0.05);
        CHECK(d1 <= 0.10);
    }
}

TEST_CASE("find_nash on the full strategy box reports the truncated corners") {
    // When the window spans the whole box, the box edges genuinely clip the
    // replies and the corner profiles become honest equilibria of the game.
    const GameSpec cubic = cubic_reply_game();
    const auto grids = pair_grids(-11.0, 11.0, 441);
    const NashResult nr = find_nash(cubic, grids, 1e-6);
    CHECK(nr.mask.count() == 3);
    CHECK(nr.components.count == 3);
    CHECK(nr.mask.in[joint_flat(nr.joint_grid, 0, 0)]);        // (-11, -11)
    CHECK(nr.mask.in[joint_flat(nr.joint_grid, 220, 220)]);    // (0, 0)
    CHECK(nr.mask.in[joint_flat(nr.joint_grid, 440, 440)]);    // (11, 11)
}

TEST_CASE("find_nash pins the quadratic-potential equilibrium at the potential argmax") {
    const GameSpec econ = quadratic_potential_game();

    // Unequal per-player resolutions keep the slice peaks off the midpoints
    // between nodes, so no spurious tie profiles enter the mask.
    const std::vector<RegularGrid> grids{make_grid(square_box(-2.0, 2.0, 1), 101),
                                         make_grid(square_box(-2.0, 2.0, 1), 81)};
    const NashResult nr = find_nash(econ, grids, 5e-5);
    CHECK(nr.mask.count() == 1);
    REQUIRE(nr.components.count == 1);
    CHECK(nr.node_representatives[0][0] == 0.0);
    CHECK(nr.node_representatives[0][1] == 0.0);
    CHECK(std::abs(nr.representatives[0][0]) <= 1e-9);
    CHECK(std::abs(nr.representatives[0][1]) <= 1e-9);
    CHECK(nr.residuals[0] <= 1e-9);

    // The equilibrium node maximizes the potential on the same lattice.
    std::size_t nash_flat = 0;
    for (std::size_t k = 0; k < nr.mask.in.size(); ++k)
        if (nr.mask.in[k]) nash_flat = k;
    const std::vector<double> pvals = sample_lattice(*econ.potential, nr.joint_grid);
    const std::size_t pmax =
        static_cast<std::size_t>(std::max_element(pvals.begin(), pvals.end()) - pvals.begin());
    CHECK(pmax == nash_flat);

    // With equal resolutions the peak -a2/2 on the row a2 = 0.04 falls exactly
    // midway between nodes, creating bit-exact tie profiles at (0.04, -0.04)
    // and (-0.04, 0.04) that persist at every tolerance.
    const NashResult sym = find_nash(econ, pair_grids(-2.0, 2.0, 101), 1e-6);
    CHECK(sym.mask.count() == 3);
    CHECK(sym.components.count == 3);
    CHECK(sym.mask.in[joint_flat(sym.joint_grid, 50, 50)]);
    CHECK(sym.mask.in[joint_flat(sym.joint_grid, 51, 49)]);
    CHECK(sym.mask.in[joint_flat(sym.joint_grid, 49, 51)]);
}

TEST_CASE("find_nash handles single-player games and rejects bad inputs") {
    GameSpec solo;
    solo.players = {Player{1, square_box(-2.0, 2.0, 1)}};
    solo.utilities = {parse_field("-(x0 - 0.5)^2", 1)};
    const RegularGrid g = make_grid(square_box(-2.0, 2.0, 1), 41);
    const NashResult nr = find_nash(solo, {g}, 1e-9);
    CHECK(nr.mask.count() == 1);
    CHECK(nr.components.count == 1);
    CHECK(nr.node_representatives[0][0] == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(nr.representatives[0][0] == doctest::Approx(0.5).epsilon(1e-9));

    const GameSpec cubic = cubic_reply_game();
    CHECK_THROWS_AS(find_nash(cubic, {g}, 1e-4), std::invalid_argument);
    CHECK_THROWS_AS(find_nash(cubic, pair_grids(-2.5, 2.5, 101), -1.0), std::invalid_argument);
    CHECK_THROWS_AS(find_nash(cubic, pair_grids(-12.0, 12.0, 11), 1e-4), std::invalid_argument);
}

TEST_CASE("potential consistency certificates") {
    const GameSpec econ = quadratic_potential_game();
    const RegularGrid joint = make_grid(econ.joint_box(), 101);

    // The builtin potential matches its utilities' own-gradients bit-exactly.
    {
        const Certificate cert = potential_consistency_check(econ, *econ.potential, joint, 0.0);
        CHECK(cert.condition == "potential_consistency");
        CHECK(cert.passed());
        CHECK(cert.worst_ratio == 0.0);
        CHECK(cert.samples_checked == 101 * 101 * 2);
    }

    // A plausible-looking candidate for the cubic-reply game fails loudly:
    // dP/da2 reproduces du2/da2 but dP/da1 misses the cubic by |3a - a^3|.
    {
        const GameSpec cubic = cubic_reply_game();
        const ScalarField bad = parse_field("-0.5*x0^2 - 0.5*x1^2 + x0*x1", 2);
        const RegularGrid probe = make_grid(square_box(-2.5, 2.5, 2), 101);
        const Certificate cert = potential_consistency_check(cubic, bad, probe, 1e-6);
        CHECK_FALSE(cert.passed());
        CHECK(cert.verdict == Verdict::Fail);
        CHECK(cert.worst_ratio == doctest::Approx(8.125).epsilon(1e-12));
        REQUIRE(cert.witness.size() == 2);
        CHECK(std::abs(cert.witness[0]) == doctest::Approx(2.5));
    }

    // For a single player the utility is trivially its own potential.
    {
        GameSpec solo;
        solo.players = {Player{1, square_box(-2.0, 2.0, 1)}};
        solo.utilities = {parse_field("-(x0 - 0.5)^2", 1)};
        const RegularGrid g = make_grid(square_box(-2.0, 2.0, 1), 41);
        const Certificate cert =
            potential_consistency_check(solo, solo.utilities[0], g, 0.0);
        CHECK(cert.passed());
        CHECK(cert.worst_ratio == 0.0);
    }

    CHECK_THROWS_AS(potential_consistency_check(econ, parse_field("x0", 1), joint, 1e-6),
                    std::invalid_argument);
    CHECK_THROWS_AS(potential_consistency_check(econ, *econ.potential, joint, -1.0),
                    std::invalid_argument);
    CHECK_THROWS_AS(potential_consistency_check(
                        econ, *econ.potential, make_grid(square_box(-3.0, 3.0, 2), 11), 1e-6),
                    std::invalid_argument);
}

TEST_CASE("rationalizable_trace_csv lays out one row per step, player, and node") {
    const GameSpec econ = quadratic_potential_game();
    const RationalizabilityTrace tr =
        iterate_rationalizable(econ, full_strategy_set(econ, pair_grids(-2.0, 2.0, 5)), 3, 1e-3);
    const std::string csv = rationalizable_trace_csv(tr);
    REQUIRE(tr.steps.size() == 3);
    CHECK(csv.rfind("k,player,node,in_mask,c0\n", 0) == 0);
    CHECK(std::count(csv.begin(), csv.end(), '\n') == 31);  // header + 3 steps * 2 * 5 nodes
    CHECK(csv.find("\n0,0,0,1,-2\n") != std::string::npos);  // -2 survives in the start set
    CHECK(csv.find("\n1,0,0,0,-2\n") != std::string::npos);  // and is never a best reply
}

TEST_CASE("equilibria survive iterated elimination") {
    // Quadratic-potential game: the iteration collapses to a small fixed set
    // that still contains the equilibrium node.
    {
        const GameSpec econ = quadratic_potential_game();
        const RationalizabilityTrace tr = iterate_rationalizable(
            econ, full_strategy_set(econ, pair_grids(-2.0, 2.0, 101)), 20, 1e-3);
        CHECK(tr.fixed_point_reached);
        const JointGridSet& fixed = tr.steps.back().set;
        CHECK(fixed.mask_sizes() == std::vector<std::size_t>{3, 3});
        CHECK(fixed.masks[0].in[50] == 1);  // node 0.0 for player 1
        CHECK(fixed.masks[1].in[50] == 1);  // node 0.0 for player 2
    }

    // Cubic-reply game: every polished equilibrium projects into the fixed
    // set reached from the invariant square.
    {
        const GameSpec cubic = cubic_reply_game();
        const auto kgrids = pair_grids(-kSqrt3, kSqrt3, 61);
        const RationalizabilityTrace tr =
            iterate_rationalizable(cubic, full_strategy_set(cubic, kgrids), 10, 0.03);
        REQUIRE(tr.fixed_point_reached);
        const JointGridSet& fixed = tr.steps.back().set;

        const NashResult nr = find_nash(cubic, pair_grids(-2.5, 2.5, 101), 5e-4);
        REQUIRE(nr.components.count == 3);
        for (int c = 0; c < nr.components.count; ++c)
            for (int i = 0; i < 2; ++i) {
                const std::vector<double> coord{nr.representatives[c][i]};
                const std::size_t node = fixed.grids[i].nearest_node(coord);
                CHECK(fixed.masks[i].in[node] == 1);
            }
    }
}
