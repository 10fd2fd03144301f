#pragma once

#include <cmath>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "network.hpp"

namespace cbrl::nn {

enum class OptimizerKind { SGD, AdamW };

struct AdamWConfig {
    double beta1 = 0.9;
    double beta2 = 0.999;
    double epsilon = 1e-8;
    double weight_decay = 1e-2;

    bool operator==(const AdamWConfig&) const = default;
};

struct OptimizerState {
    OptimizerKind kind = OptimizerKind::AdamW;
    AdamWConfig config;
    std::vector<double> first_moment;
    std::vector<double> second_moment;
    std::uint64_t step = 0;

    static OptimizerState sgd() { return OptimizerState{OptimizerKind::SGD, {}, {}, {}, 0}; }

    static OptimizerState adamw(const Layout& layout, AdamWConfig config = {}) {
        return OptimizerState{OptimizerKind::AdamW, config, std::vector<double>(layout.size(), 0.0),
                              std::vector<double>(layout.size(), 0.0), 0};
    }

    bool operator==(const OptimizerState&) const = default;
};

/// Bias-corrected Adam step with decoupled weight decay. The direction flips
/// only the adaptive term; weight decay always shrinks toward zero.
inline std::pair<NetworkParams, OptimizerState> adamw_step(NetworkParams params, const GradientSet& grads,
                                                           OptimizerState state, double step_size,
                                                           Direction direction) {
    if (state.kind != OptimizerKind::AdamW) throw invalid_parameter("adamw_step called with a non-AdamW state");
    require_congruent(params, grads, "adamw_step");
    if (state.first_moment.size() != params.size() || state.second_moment.size() != params.size()) {
        throw dimension_mismatch("adamw_step: moment buffers do not match the parameters");
    }
    const auto& c = state.config;
    state.step += 1;
    const double t = static_cast<double>(state.step);
    const double correction1 = 1.0 - std::pow(c.beta1, t);
    const double correction2 = 1.0 - std::pow(c.beta2, t);
    const double sign = direction_sign(direction);
    const double decay = 1.0 - step_size * c.weight_decay;

    auto theta = params.values();
    const auto g = grads.values();
    auto& m = state.first_moment;
    auto& v = state.second_moment;
    for (std::size_t k = 0; k < theta.size(); ++k) {
        m[k] = c.beta1 * m[k] + (1.0 - c.beta1) * g[k];
        v[k] = c.beta2 * v[k] + (1.0 - c.beta2) * g[k] * g[k];
        const double m_hat = m[k] / correction1;
        const double v_hat = v[k] / correction2;
        theta[k] = theta[k] * decay + sign * step_size * m_hat / (std::sqrt(v_hat) + c.epsilon);
    }
    return {std::move(params), std::move(state)};
}

/// Dispatches on the state's optimizer kind. SGD leaves the state untouched
/// apart from the step counter.
inline std::pair<NetworkParams, OptimizerState> optimizer_step(NetworkParams params, const GradientSet& grads,
                                                               OptimizerState state, double step_size,
                                                               Direction direction) {
    if (state.kind == OptimizerKind::AdamW) {
        return adamw_step(std::move(params), grads, std::move(state), step_size, direction);
    }
    state.step += 1;
    return {sgd_step(std::move(params), grads, step_size, direction), std::move(state)};
}

inline std::string to_string(OptimizerKind k) { return k == OptimizerKind::SGD ? "sgd" : "adamw"; }

inline OptimizerKind optimizer_from_string(const std::string& s) {
    if (s == "sgd") return OptimizerKind::SGD;
    if (s == "adamw") return OptimizerKind::AdamW;
    throw invalid_parameter("unknown optimizer '" + s + "' (expected sgd|adamw)");
}

}  // namespace cbrl::nn
