#pragma once

// String-method search for mountain-pass stationary points between two
// endpoints, plus the sublevel-separation premise check that justifies the
// pass value exceeding a given level.

#include <optional>
#include <string>

#include "invextopo/optimize.hpp"
#include "invextopo/topology.hpp"

namespace invextopo {

struct PassOptions {
    int m = 33;                      // path nodes including endpoints
    int iters = 5000;                // string iteration budget
    double tol = 1e-6;               // gradient norm target at the pass point
    double step_rel = 1e-2;          // descent step as a fraction of ||x1-x0||
    std::optional<BoxDomain> clamp;  // default: endpoint bounding box inflated by 2||x1-x0||
    int snapshot_every = 250;        // path snapshot cadence for the CSV trace
};

struct PassResult {
    std::vector<double> pass_point;
    double pass_value = 0.0;
    double grad_norm = 0.0;
    bool converged = false;   // stationary pass point found above the endpoints
    bool no_pass = false;     // relaxed path's interior never exceeds the endpoints
    bool inconclusive = false;
    bool boundary_hit = false;  // the clamp box truncated some update
    int string_iters = 0;
    double max_endpoint_value = 0.0;
    std::vector<std::vector<double>> path;  // final string nodes
    std::vector<double> interior_max_trace; // per-iteration max interior value
    std::vector<std::pair<int, std::vector<std::vector<double>>>> snapshots;
};

// String method: linear initialization, per-iteration descent along the
// gradient component orthogonal to the path tangent, then equal-arc-length
// reparameterization; afterwards the maximal node climbs along the tangent
// (and descends orthogonally) and is polished to a stationary point.
PassResult find_mountain_pass(const ScalarField& f, std::span<const double> x0,
                              std::span<const double> x1, const PassOptions& opt = {});

// True iff the nearest sublevel-mask nodes (f <= c, absolute level) of x0 and
// x1 lie in different connected components. Throws std::invalid_argument when
// an endpoint is outside the grid box or above the level.
bool verify_separation(const ScalarField& f, const RegularGrid& grid,
                       std::span<const double> x0, std::span<const double> x1, double c);

// One row per snapshot node: iteration, node index, coordinates, value.
std::string path_trace_csv(const ScalarField& f, const PassResult& r);

}  // namespace invextopo
