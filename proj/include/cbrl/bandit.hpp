#pragma once

// Confirmation model for the stationary N-armed Bernoulli bandit.
//
// The chosen arm learns from positive prediction errors at rate alpha_c and
// from negative ones at rate alpha_d; unchosen arms (full-information
// feedback) use the mirrored mapping. alpha_c > alpha_d is a confirmatory
// learner, alpha_c < alpha_d a disconfirmatory one.

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "errors.hpp"
#include "parallel.hpp"
#include "rng.hpp"

namespace cbrl::bandit {

enum class FeedbackMode { FactualOnly, FullInformation };

struct ArmConfig {
    std::vector<double> reward_probs{0.4, 0.6};

    void validate() const {
        if (reward_probs.size() < 2) throw invalid_parameter("bandit needs at least two arms");
        for (double p : reward_probs) {
            if (!(p >= 0.0 && p <= 1.0)) throw invalid_parameter("arm reward probability outside [0,1]");
        }
    }
    std::size_t arm_count() const { return reward_probs.size(); }
};

struct BanditParams {
    double alpha_c = 0.1;
    double alpha_d = 0.1;
    double temperature = 0.1;
    int trial_length = 200;
    FeedbackMode feedback = FeedbackMode::FullInformation;

    void validate() const {
        if (!(alpha_c > 0.0 && alpha_c <= 1.0)) throw invalid_parameter("alpha_c must lie in (0,1]");
        if (!(alpha_d > 0.0 && alpha_d <= 1.0)) throw invalid_parameter("alpha_d must lie in (0,1]");
        if (!(temperature > 0.0)) throw invalid_parameter("temperature must be positive");
        if (trial_length < 1) throw invalid_parameter("trial_length must be >= 1");
    }
};

struct ValueTable {
    std::vector<double> values;

    static ValueTable zeros(std::size_t arms) { return ValueTable{std::vector<double>(arms, 0.0)}; }
};

struct TrialResult {
    double total_reward = 0.0;
    int steps = 0;
    std::vector<double> per_step_rewards;  // empty unless requested
    ValueTable final_values;

    double mean_step_reward() const { return steps > 0 ? total_reward / steps : 0.0; }
};

inline double prediction_error(double reward, double value) { return reward - value; }

inline double update_chosen(double value, double delta, const BanditParams& params) {
    if (delta > 0.0) return value + params.alpha_c * delta;
    if (delta < 0.0) return value + params.alpha_d * delta;
    return value;
}

// Rate mapping is inverted relative to update_chosen.
inline double update_unchosen(double value, double delta, const BanditParams& params) {
    if (delta > 0.0) return value + params.alpha_d * delta;
    if (delta < 0.0) return value + params.alpha_c * delta;
    return value;
}

/// Boltzmann distribution over the value table. Subtracts max(V/T) before
/// exponentiating so large values cannot overflow.
inline std::vector<double> softmax_policy(std::span<const double> values, double temperature) {
    if (!(temperature > 0.0)) throw invalid_parameter("softmax temperature must be positive");
    if (values.empty()) return {};
    std::vector<double> p(values.size());
    double top = values[0] / temperature;
    for (double v : values) top = std::max(top, v / temperature);
    double sum = 0.0;
    for (std::size_t i = 0; i < values.size(); ++i) {
        p[i] = std::exp(values[i] / temperature - top);
        sum += p[i];
    }
    for (double& x : p) x /= sum;
    return p;
}

inline std::size_t sample_categorical(std::span<const double> probs, Rng& rng) {
    const double u = uniform01(rng);
    double acc = 0.0;
    for (std::size_t i = 0; i < probs.size(); ++i) {
        acc += probs[i];
        if (u < acc) return i;
    }
    return probs.size() - 1;
}

/// One independent trial: values start at zero, each step samples an arm
/// from the softmax policy, draws its Bernoulli reward and updates the chosen
/// arm. In FullInformation mode every unchosen arm also draws a fresh
/// counterfactual reward and is updated with the mirrored rates.
inline TrialResult run_trial(const ArmConfig& arms, const BanditParams& params, Rng& rng,
                             bool keep_per_step = false) {
    arms.validate();
    params.validate();
    const std::size_t n = arms.arm_count();
    TrialResult result;
    result.final_values = ValueTable::zeros(n);
    auto& values = result.final_values.values;
    if (keep_per_step) result.per_step_rewards.reserve(static_cast<std::size_t>(params.trial_length));
    std::vector<double> rewards(n, 0.0);

    for (int t = 0; t < params.trial_length; ++t) {
        const auto probs = softmax_policy(values, params.temperature);
        const std::size_t chosen = sample_categorical(probs, rng);
        rewards[chosen] = bernoulli(rng, arms.reward_probs[chosen]) ? 1.0 : 0.0;
        if (params.feedback == FeedbackMode::FullInformation) {
            for (std::size_t i = 0; i < n; ++i) {
                if (i != chosen) rewards[i] = bernoulli(rng, arms.reward_probs[i]) ? 1.0 : 0.0;
            }
        }

        values[chosen] = update_chosen(values[chosen], prediction_error(rewards[chosen], values[chosen]), params);
        if (params.feedback == FeedbackMode::FullInformation) {
            for (std::size_t i = 0; i < n; ++i) {
                if (i == chosen) continue;
                values[i] = update_unchosen(values[i], prediction_error(rewards[i], values[i]), params);
            }
        }

        result.total_reward += rewards[chosen];
        if (keep_per_step) result.per_step_rewards.push_back(rewards[chosen]);
    }
    result.steps = params.trial_length;
    return result;
}

struct GridCell {
    double alpha_c = 0.0;
    double alpha_d = 0.0;
    double mean_total_reward = 0.0;  // per trial
    double mean_step_reward = 0.0;   // per step, averaged over trials
    int trials = 0;
};

struct GridSearchSettings {
    ArmConfig arms;
    int trials = 256;
    int trial_length = 200;
    double temperature = 0.1;
    FeedbackMode feedback = FeedbackMode::FullInformation;
    std::uint64_t seed = 1;
    std::size_t parallel = 1;
};

/// {0.05, 0.10, ..., 0.95}
inline std::vector<double> default_alpha_axis() {
    std::vector<double> axis;
    for (int k = 1; k <= 19; ++k) axis.push_back(k / 20.0);
    return axis;
}

inline std::vector<std::pair<double, double>> cartesian_grid(std::span<const double> alpha_c_axis,
                                                             std::span<const double> alpha_d_axis) {
    std::vector<std::pair<double, double>> grid;
    grid.reserve(alpha_c_axis.size() * alpha_d_axis.size());
    for (double ac : alpha_c_axis)
        for (double ad : alpha_d_axis) grid.emplace_back(ac, ad);
    return grid;
}

/// The rng stream of a cell is keyed on the bit patterns of its learning
/// rates, so a cell's result does not depend on the rest of the grid or on
/// evaluation order.
inline Rng cell_rng(std::uint64_t seed, double alpha_c, double alpha_d) {
    return make_rng(seed, {stream::kBandit, std::bit_cast<std::uint64_t>(alpha_c),
                           std::bit_cast<std::uint64_t>(alpha_d)});
}

inline GridCell evaluate_cell(const GridSearchSettings& s, double alpha_c, double alpha_d) {
    BanditParams params{alpha_c, alpha_d, s.temperature, s.trial_length, s.feedback};
    Rng rng = cell_rng(s.seed, alpha_c, alpha_d);
    double total = 0.0;
    for (int trial = 0; trial < s.trials; ++trial) total += run_trial(s.arms, params, rng).total_reward;
    GridCell cell;
    cell.alpha_c = alpha_c;
    cell.alpha_d = alpha_d;
    cell.trials = s.trials;
    cell.mean_total_reward = total / s.trials;
    cell.mean_step_reward = cell.mean_total_reward / s.trial_length;
    return cell;
}

inline std::vector<GridCell> grid_search(const GridSearchSettings& settings,
                                         std::span<const std::pair<double, double>> grid) {
    if (grid.empty()) throw invalid_parameter("grid_search needs at least one cell");
    if (settings.trials < 1) throw invalid_parameter("grid_search needs trials >= 1");
    settings.arms.validate();
    std::vector<GridCell> cells(grid.size());
    parallel_for(grid.size(), settings.parallel, [&](std::size_t i) {
        cells[i] = evaluate_cell(settings, grid[i].first, grid[i].second);
    });
    return cells;
}

inline std::string to_string(FeedbackMode m) {
    return m == FeedbackMode::FactualOnly ? "factual" : "full";
}

inline FeedbackMode feedback_from_string(const std::string& s) {
    if (s == "factual") return FeedbackMode::FactualOnly;
    if (s == "full") return FeedbackMode::FullInformation;
    throw invalid_parameter("unknown feedback mode '" + s + "' (expected factual|full)");
}

}  // namespace cbrl::bandit
