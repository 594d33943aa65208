#pragma once

// Continuous games on box strategy sets: grid best responses, the
// best-response image operator, rationalizability iteration, strategic
// compactness, grid Nash sets with polished representatives, and potential
// consistency. Strategy sets are product-structured: one grid and one node
// mask per player, the joint set being the Cartesian product of the
// per-player masked nodes.

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "invextopo/certify.hpp"
#include "invextopo/grid.hpp"
#include "invextopo/topology.hpp"

namespace invextopo {

struct Player {
    int dim = 1;
    BoxDomain box;
};

// Joint variables are the players' action coordinates concatenated in player
// order, so utility i is a field of arity joint_dim() reading player 0's
// actions first.
struct GameSpec {
    std::vector<Player> players;
    std::vector<ScalarField> utilities;  // one per player
    std::optional<ScalarField> potential;

    int player_count() const { return static_cast<int>(players.size()); }
    int joint_dim() const;
    BoxDomain joint_box() const;
    int axis_offset(int player) const;  // first joint axis owned by the player
    std::vector<int> player_axes(int player) const;
    void validate() const;  // throws std::invalid_argument
};

// Document shape:
//   {"players": [{"dim": 1, "box": [lo0, hi0, lo1, hi1, ...]}, ...],
//    "utilities": ["expr", ...], "potential": "expr"}
// box holds interleaved lo/hi pairs (length 2*dim); potential is optional.
// Structural problems throw std::invalid_argument; malformed expressions
// propagate ParseError.
GameSpec game_from_json(std::string_view text);

// Named reference games: fig4 (quadratic tracker vs cubic signal, three
// equilibria), econ_quadratic (joint-cost duopoly with an exact potential).
// Throws std::invalid_argument for unknown names.
GameSpec builtin_game(std::string_view name);
std::vector<std::string> builtin_game_names();

// ---- product strategy sets ------------------------------------------------

struct JointGridSet {
    std::vector<RegularGrid> grids;  // one per player
    std::vector<NodeMask> masks;     // one per grid

    bool empty() const;  // true if any player's mask is empty
    std::vector<std::size_t> mask_sizes() const;
    std::vector<int> component_counts() const;  // per-player face adjacency
    bool same_masks(const JointGridSet& other) const;
};

// Every node of every grid. Grid i must live inside player i's box.
JointGridSet full_strategy_set(const GameSpec& game, std::vector<RegularGrid> grids);

// Nodes whose point lies in box, each coordinate within slack of the bounds.
NodeMask nodes_in_box(const RegularGrid& grid, const BoxDomain& box, double slack = 1e-12);

// ---- best responses and the image operator --------------------------------

// Lattice best response of one player against a fixed profile of the others
// (their coordinates concatenated in player order, the responder skipped):
// nodes of grid_i whose utility is >= (lattice max) - tol, ties included.
NodeMask player_best_response(const GameSpec& game, int player, std::span<const double> others,
                              const RegularGrid& grid_i, double tol);

// Opponent profiles a single lambda_operator call may enumerate before it is
// refused. Enumeration is always exhaustive; there is no approximate mode.
inline constexpr std::size_t kProfileBudget = 20'000'000;

// Profiles lambda_operator would enumerate for S: sum over players of the
// product of the other players' mask sizes (saturating).
std::size_t lambda_profile_count(const JointGridSet& S);

// Best-response image of S: per player, the union of player_best_response
// over every profile drawn from the product of the other players' masks,
// on that player's own grid. Throws std::runtime_error (listing the
// per-player profile counts) when the enumeration would exceed budget.
JointGridSet lambda_operator(const GameSpec& game, const JointGridSet& S, double tol,
                             std::size_t budget = kProfileBudget);

struct RationalizabilityTrace {
    struct Step {
        int k = 0;
        JointGridSet set;
        std::vector<std::size_t> sizes;  // per-player mask size
        std::vector<int> components;     // per-player component count
    };
    std::vector<Step> steps;           // steps[0] holds the starting set
    bool fixed_point_reached = false;  // some step repeated the previous masks
    bool budget_exceeded = false;      // stopped early; steps hold the finished prefix
};

// Iterates the image operator from S0 until the masks repeat exactly, max_k
// steps have been taken, or the profile budget would trip (recorded on the
// trace instead of thrown).
RationalizabilityTrace iterate_rationalizable(const GameSpec& game, const JointGridSet& S0,
                                              int max_k, double tol,
                                              std::size_t budget = kProfileBudget);

// Pass iff every node of lambda(K) lies within one grid spacing of K's mask
// for its player (worst_ratio = max distance / max spacing). Run K on grids
// covering each player's full strategy box; on K's own bounding box the image
// has nowhere to escape to and the check is vacuous.
Certificate strategic_compactness_check(const GameSpec& game, const JointGridSet& K,
                                        double tol = 1e-9,
                                        std::size_t budget = kProfileBudget);

// One row per step, player, and node: k, player, node, in_mask, then node
// coordinates c0..c{d-1} (players of smaller dimension leave cells empty).
std::string rationalizable_trace_csv(const RationalizabilityTrace& trace);

// ---- equilibria -------------------------------------------------------------

struct NashResult {
    RegularGrid joint_grid;  // product of the per-player grids
    NodeMask mask;           // joint nodes passing every player's test
    Components components;
    std::vector<std::vector<double>> representatives;       // polished, one per component
    std::vector<std::vector<double>> node_representatives;  // best mask node per component
    std::vector<double> residuals;  // own-gradient norm at each polished point
};

// Grid Nash test on the product grid: a joint node passes iff every player's
// utility is within tol * (slice range) of the slice max, the slice being the
// player's own action swept over the player's WHOLE strategy box (sampled at
// the probe grid's spacing, window nodes included) with the other coordinates
// frozen; constant slices pass everywhere. The probe grids only delimit where
// candidates are reported, so a window smaller than the strategy boxes does
// not pick up the truncated game's edge equilibria. Each component's
// representative starts from its least-gap node and is polished off-lattice
// by minimizing the summed squared own-gradient norms over the product of the
// grid boxes.
NashResult find_nash(const GameSpec& game, const std::vector<RegularGrid>& grids, double tol);

// Exactness check for a candidate potential: at every node of grid, for every
// player and every axis the player owns, |dP/da - du_i/da| <= tol.
// worst_ratio = largest discrepancy; tol = 0 demands bit-exact agreement.
Certificate potential_consistency_check(const GameSpec& game, const ScalarField& P,
                                        const RegularGrid& grid, double tol);

}  // namespace invextopo
