#include "invextopo/report.hpp"

namespace invextopo {

namespace {

nlohmann::json point_list(const std::vector<std::vector<double>>& pts) {
    nlohmann::json out = nlohmann::json::array();
    for (const auto& p : pts) out.push_back(p);
    return out;
}

const char* anchor_name(LevelAnchor a) {
    return a == LevelAnchor::AboveMin ? "above_min" : "absolute";
}

const char* modulus_mode_name(ModulusMode m) {
    switch (m) {
        case ModulusMode::Lipschitz: return "lipschitz";
        case ModulusMode::Hoelder: return "hoelder";
        case ModulusMode::ErrorBound: return "error_bound";
    }
    return "?";
}

}  // namespace

nlohmann::json to_json(const Certificate& cert) {
    nlohmann::json params = nlohmann::json::array();
    for (const auto& [name, value] : cert.params) params.push_back({name, value});
    nlohmann::json j{{"condition", cert.condition},
                     {"verdict", std::string(verdict_name(cert.verdict))},
                     {"worst_ratio", cert.worst_ratio},
                     {"witness", cert.witness},
                     {"samples_checked", cert.samples_checked},
                     {"params", std::move(params)}};
    if (!cert.note.empty()) j["note"] = cert.note;
    return j;
}

nlohmann::json to_json(const SublevelReport& report) {
    return {{"c", report.c},
            {"anchor", anchor_name(report.anchor)},
            {"threshold", report.threshold},
            {"grid_min", report.grid_min},
            {"mask_count", report.mask_count},
            {"component_count", report.component_count},
            {"connected", report.connected},
            {"representatives", point_list(report.representatives)}};
}

nlohmann::json to_json(const MinimumEstimate& est) {
    return {{"f_star", est.f_star},
            {"argmin_points", point_list(est.argmin_points)},
            {"boundary_attained", est.boundary_attained},
            {"starts", est.starts}};
}

nlohmann::json to_json(const PassResult& result) {
    return {{"pass_point", result.pass_point},
            {"pass_value", result.pass_value},
            {"grad_norm", result.grad_norm},
            {"converged", result.converged},
            {"no_pass", result.no_pass},
            {"inconclusive", result.inconclusive},
            {"boundary_hit", result.boundary_hit},
            {"string_iters", result.string_iters},
            {"max_endpoint_value", result.max_endpoint_value}};
}

nlohmann::json to_json(const FlowTrace& trace) {
    nlohmann::json j{{"terminal_time", trace.terminal_time},
                     {"terminal_point", trace.terminal_point},
                     {"terminal_value", trace.samples.empty() ? 0.0 : trace.samples.back().value},
                     {"steps", trace.samples.size()},
                     {"converged", trace.converged},
                     {"diverged", trace.diverged},
                     {"bound_satisfied", trace.bound_satisfied}};
    if (trace.time_bound) j["time_bound"] = *trace.time_bound;
    return j;
}

nlohmann::json to_json(const SolutionClassification& cls) {
    nlohmann::json j{{"X_count", cls.X_mask.count()},
                     {"Y_count", cls.Y_mask.count()},
                     {"Mlow_count", cls.Mlow_mask.count()},
                     {"Mup_count", cls.Mup_mask.count()},
                     {"E_count", cls.E_mask.count()},
                     {"E_components", cls.E_components},
                     {"E_bbox_lo", cls.E_bbox_lo},
                     {"E_bbox_hi", cls.E_bbox_hi},
                     {"min_F", cls.min_F},
                     {"max_G", cls.max_G},
                     {"duality_gap", cls.min_F - cls.max_G},
                     {"tol_val", cls.tol_val},
                     {"tol_grad", cls.tol_grad},
                     {"inconclusive", cls.inconclusive}};
    return j;
}

nlohmann::json to_json(const ModulusEstimate& est) {
    return {{"mode", modulus_mode_name(est.mode)},
            {"kappa", est.kappa},
            {"alpha_hat", est.alpha_hat},
            {"deltas", est.deltas},
            {"distances", est.distances},
            {"fit_residual", est.fit_residual}};
}

nlohmann::json to_json(const RationalizabilityTrace& trace) {
    nlohmann::json steps = nlohmann::json::array();
    for (const auto& st : trace.steps)
        steps.push_back({{"k", st.k}, {"sizes", st.sizes}, {"components", st.components}});
    return {{"steps", std::move(steps)},
            {"fixed_point_reached", trace.fixed_point_reached},
            {"budget_exceeded", trace.budget_exceeded}};
}

nlohmann::json to_json(const NashResult& result) {
    nlohmann::json comps = nlohmann::json::array();
    for (int c = 0; c < result.components.count; ++c)
        comps.push_back({{"size", result.components.size[c]},
                         {"node_representative", result.node_representatives[c]},
                         {"representative", result.representatives[c]},
                         {"residual", result.residuals[c]}});
    return {{"mask_count", result.mask.count()},
            {"component_count", result.components.count},
            {"components", std::move(comps)}};
}

std::uint64_t config_hash(const nlohmann::json& config) {
    const std::string text = config.dump();  // nlohmann orders object keys
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char ch : text) {
        h ^= ch;
        h *= 0x100000001b3ULL;
    }
    return h;
}

std::string config_hash_hex(const nlohmann::json& config) {
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx",
                  static_cast<unsigned long long>(config_hash(config)));
    return std::string(buf);
}

}  // namespace invextopo
