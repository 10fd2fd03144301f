#pragma once

// Confirmation-model DQN.
//
// A standard DQN (epsilon-greedy acting, replay memory, target network with
// soft updates) whose parameter update depends on the sign of each sample's
// TD error. For a confirmatory agent, samples with negative TD error get a
// descent step of size alpha_c followed by an ascent step of size
// K * alpha_c; a disconfirmatory agent does the same for positive TD errors.
// By default the pair is realized as one optimizer step on a loss where
// those samples carry weight (1 - K), which is exactly the same update under
// plain gradient steps and keeps a stateful optimizer's moments updated once.
// Hyperparameters::two_phase_updates switches to two literal optimizer calls.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <memory>
#include <span>
#include <string>
#include <tuple>
#include <vector>

#include "envs.hpp"
#include "errors.hpp"
#include "network.hpp"
#include "optimizer.hpp"
#include "replay_buffer.hpp"
#include "rng.hpp"

namespace cbrl::agent {

enum class BiasType { Confirmatory, Disconfirmatory, None };

inline std::string to_string(BiasType b) {
    switch (b) {
        case BiasType::Confirmatory: return "confirmatory";
        case BiasType::Disconfirmatory: return "disconfirmatory";
        case BiasType::None: return "none";
    }
    return "none";
}

inline BiasType bias_from_string(const std::string& s) {
    if (s == "confirmatory") return BiasType::Confirmatory;
    if (s == "disconfirmatory") return BiasType::Disconfirmatory;
    if (s == "none") return BiasType::None;
    throw invalid_parameter("unknown bias type '" + s + "' (expected confirmatory|disconfirmatory|none)");
}

struct Hyperparameters {
    double tau = 5e-2;
    double alpha_c = 3e-4;
    double K = 1e-1;
    double gamma = 0.99;
    std::size_t buffer_capacity = 50000;
    std::size_t batch_size = 32;
    double epsilon_start = 0.99;
    double epsilon_end = 0.01;
    std::size_t episodes = 300;
    std::size_t max_steps = 100;
    std::size_t mlp_width = 128;
    std::size_t hidden_layers = 2;
    nn::OptimizerKind optimizer = nn::OptimizerKind::AdamW;
    nn::AdamWConfig adamw;
    bool two_phase_updates = false;
    std::size_t final_window = 20;

    bool operator==(const Hyperparameters&) const = default;

    /// Episode budgets per environment: lineworld 300 x 100, landerlite 600 x 400.
    static Hyperparameters for_environment(const std::string& env_name) {
        Hyperparameters hp;
        if (env_name == "landerlite") {
            hp.episodes = 600;
            hp.max_steps = 400;
        }
        return hp;
    }

    void validate() const {
        if (!(tau > 0.0 && tau <= 1.0)) throw invalid_parameter("tau must lie in (0,1]");
        if (!(alpha_c > 0.0)) throw invalid_parameter("alpha_c must be positive");
        if (!(K >= 0.0 && K < 1.0)) throw invalid_parameter("K must lie in [0,1)");
        if (!(gamma >= 0.0 && gamma <= 1.0)) throw invalid_parameter("gamma must lie in [0,1]");
        if (buffer_capacity < 1 || batch_size < 1) throw invalid_parameter("buffer and batch sizes must be >= 1");
        if (batch_size > buffer_capacity) throw invalid_parameter("batch_size exceeds buffer_capacity");
        if (!(epsilon_end >= 0.0 && epsilon_start <= 1.0 && epsilon_start >= epsilon_end)) {
            throw invalid_parameter("need 0 <= epsilon_end <= epsilon_start <= 1");
        }
        if (episodes < 1 || max_steps < 1 || mlp_width < 1) {
            throw invalid_parameter("episodes, max_steps and mlp_width must be >= 1");
        }
        if (final_window < 1) throw invalid_parameter("final_window must be >= 1");
    }
};

/// Linear decay from epsilon_start (episode 0) to epsilon_end (episode M-1).
inline double epsilon_at(std::size_t episode, const Hyperparameters& hp) {
    if (hp.episodes <= 1) return hp.epsilon_start;
    const double frac = static_cast<double>(episode) / static_cast<double>(hp.episodes - 1);
    const double eps = hp.epsilon_start * (1.0 - frac) + hp.epsilon_end * frac;
    return std::clamp(eps, hp.epsilon_end, hp.epsilon_start);
}

/// Index of the largest value; ties go to the lowest index.
inline std::size_t argmax(std::span<const double> values) {
    std::size_t best = 0;
    for (std::size_t i = 1; i < values.size(); ++i)
        if (values[i] > values[best]) best = i;
    return best;
}

inline std::size_t select_action(const nn::NetworkParams& q_net, std::span<const double> state, double epsilon,
                                 Rng& rng) {
    const std::size_t actions = q_net.layout().output_dim();
    if (uniform01(rng) < epsilon) return uniform_index(rng, actions);
    return argmax(nn::forward(q_net, state));
}

inline double compute_target(const Transition& t, const nn::NetworkParams& target_net, double gamma) {
    if (t.terminal) return t.reward;
    const auto q_next = nn::forward(target_net, t.next_state);
    return t.reward + gamma * q_next[argmax(q_next)];
}

inline double td_error(const nn::NetworkParams& q_net, const Transition& t, double y) {
    return y - nn::forward(q_net, t.state)[t.action];
}

/// True when the sample falls on the down-weighted side of the bias rule.
inline bool is_biased_sample(BiasType bias, double td) {
    return (bias == BiasType::Confirmatory && td < 0.0) || (bias == BiasType::Disconfirmatory && td > 0.0);
}

inline double bias_weight(BiasType bias, double td, double K) {
    if (!(K >= 0.0 && K < 1.0)) throw invalid_parameter("K must lie in [0,1)");
    return is_biased_sample(bias, td) ? 1.0 - K : 1.0;
}

/// theta_target <- tau * theta + (1 - tau) * theta_target
inline nn::NetworkParams soft_update(nn::NetworkParams target_net, const nn::NetworkParams& q_net, double tau) {
    nn::require_congruent(target_net, q_net, "soft_update");
    auto t = target_net.values();
    const auto q = q_net.values();
    if (tau == 1.0) {
        std::copy(q.begin(), q.end(), t.begin());
        return target_net;
    }
    for (std::size_t k = 0; k < t.size(); ++k) t[k] += tau * (q[k] - t[k]);
    return target_net;
}

struct Agent {
    nn::NetworkParams q;
    nn::NetworkParams target;
    nn::OptimizerState optimizer;
    ReplayBuffer buffer;

    static Agent create(const env::EnvSpec& spec, const Hyperparameters& hp, Rng& init_rng) {
        auto q = nn::init_network(nn::mlp_specs(spec.state_dim, hp.mlp_width, hp.hidden_layers, spec.action_count),
                                  init_rng);
        auto opt = hp.optimizer == nn::OptimizerKind::AdamW ? nn::OptimizerState::adamw(q.layout(), hp.adamw)
                                                            : nn::OptimizerState::sgd();
        nn::NetworkParams target = q;
        return Agent{std::move(q), std::move(target), std::move(opt), ReplayBuffer(hp.buffer_capacity)};
    }
};

struct TrainDiagnostics {
    double loss = 0.0;
    double mean_abs_td = 0.0;
    std::size_t biased_samples = 0;
};

/// Bias-conditioned update on the given transitions (one minibatch).
inline TrainDiagnostics update_on_batch(Agent& agent, std::span<const Transition* const> batch,
                                        const Hyperparameters& hp, BiasType bias) {
    std::vector<nn::TrainingSample> samples;
    samples.reserve(batch.size());
    std::vector<bool> biased(batch.size(), false);
    TrainDiagnostics diag;
    for (std::size_t j = 0; j < batch.size(); ++j) {
        const Transition& t = *batch[j];
        const double y = compute_target(t, agent.target, hp.gamma);
        const double td = td_error(agent.q, t, y);
        biased[j] = is_biased_sample(bias, td);
        diag.biased_samples += biased[j] ? 1 : 0;
        diag.mean_abs_td += std::abs(td);
        const double weight = hp.two_phase_updates ? 1.0 : bias_weight(bias, td, hp.K);
        samples.push_back({t.state, t.action, y, weight});
    }
    diag.mean_abs_td /= static_cast<double>(batch.size());

    auto descent = nn::backward(agent.q, samples);
    diag.loss = descent.loss;
    std::tie(agent.q, agent.optimizer) = nn::optimizer_step(std::move(agent.q), descent.gradient,
                                                            std::move(agent.optimizer), hp.alpha_c,
                                                            nn::Direction::Descent);

    if (hp.two_phase_updates && hp.K > 0.0 && diag.biased_samples > 0) {
        // Ascent on the squared TD error of the biased samples only, evaluated
        // at the post-descent parameters with the same targets.
        for (std::size_t j = 0; j < samples.size(); ++j) samples[j].weight = biased[j] ? 1.0 : 0.0;
        auto ascent = nn::backward(agent.q, samples);
        std::tie(agent.q, agent.optimizer) = nn::optimizer_step(std::move(agent.q), ascent.gradient,
                                                                std::move(agent.optimizer), hp.K * hp.alpha_c,
                                                                nn::Direction::Ascent);
    }
    return diag;
}

inline TrainDiagnostics train_step(Agent& agent, const Hyperparameters& hp, BiasType bias, Rng& rng) {
    if (agent.buffer.size() < hp.batch_size) {
        throw insufficient_buffer("train_step needs " + std::to_string(hp.batch_size) + " transitions, buffer has " +
                                  std::to_string(agent.buffer.size()));
    }
    const auto indices = agent.buffer.sample_indices(hp.batch_size, rng);
    std::vector<const Transition*> batch;
    batch.reserve(indices.size());
    for (auto i : indices) batch.push_back(&agent.buffer[i]);
    return update_on_batch(agent, batch, hp, bias);
}

enum class Mode { Train, Eval };

struct TraceStep {
    Mode mode = Mode::Train;
    std::size_t episode = 0;
    std::size_t t = 0;
    std::vector<double> state;
    std::size_t action = 0;
    double reward = 0.0;
    bool terminal = false;
    bool truncated = false;
};

using TraceSink = std::function<void(const TraceStep&)>;

struct EpisodeResult {
    double episode_return = 0.0;  // undiscounted
    std::size_t steps = 0;
    std::size_t updates = 0;
    double mean_abs_td = 0.0;  // over this episode's updates
};

/// One episode. Train: epsilon-greedy acting, every transition stored, one
/// train_step per environment step once the buffer holds batch_size
/// transitions, one soft target update at the end. Eval: greedy, nothing
/// stored or updated.
inline EpisodeResult run_episode(env::Environment& environment, Agent& agent, const Hyperparameters& hp,
                                 BiasType bias, Rng& env_rng, Rng& agent_rng, Mode mode, double epsilon,
                                 std::size_t episode_index = 0, const TraceSink* trace = nullptr) {
    EpisodeResult result;
    std::vector<double> state = environment.reset(env_rng);
    double td_sum = 0.0;
    for (;;) {
        const std::size_t action =
            mode == Mode::Train ? select_action(agent.q, state, epsilon, agent_rng) : argmax(nn::forward(agent.q, state));
        auto out = environment.step(action);
        result.episode_return += out.reward;
        if (trace && *trace) {
            (*trace)(TraceStep{mode, episode_index, result.steps, state, action, out.reward, out.terminal,
                               out.truncated});
        }
        ++result.steps;
        if (mode == Mode::Train) {
            agent.buffer.push(Transition{state, action, out.reward, out.next_state, out.terminal});
            if (agent.buffer.size() >= hp.batch_size) {
                td_sum += train_step(agent, hp, bias, agent_rng).mean_abs_td;
                ++result.updates;
            }
        }
        if (out.done()) break;
        state = std::move(out.next_state);
    }
    if (mode == Mode::Train) agent.target = soft_update(std::move(agent.target), agent.q, hp.tau);
    result.mean_abs_td = result.updates > 0 ? td_sum / static_cast<double>(result.updates) : 0.0;
    return result;
}

struct EpisodeLog {
    std::size_t episode = 0;
    double train_return = 0.0;
    double test_return = 0.0;
    double epsilon = 0.0;
    double mean_abs_td_error = 0.0;
    std::size_t train_steps = 0;
    double wall_seconds = 0.0;  // excluded from determinism checks
};

struct TrainingRun {
    std::vector<EpisodeLog> episodes;
    Agent agent;

    /// Mean test return over the last `window` episodes.
    double final_window_mean(std::size_t window) const {
        const std::size_t n = std::min(window, episodes.size());
        if (n == 0) return 0.0;
        double sum = 0.0;
        for (std::size_t i = episodes.size() - n; i < episodes.size(); ++i) sum += episodes[i].test_return;
        return sum / static_cast<double>(n);
    }

    double all_episode_mean() const { return final_window_mean(episodes.size()); }
};

struct TrainingOptions {
    TraceSink trace;
    std::function<void(const EpisodeLog&)> on_episode;
};

/// Full training loop: M episodes, each a training episode followed by one
/// greedy evaluation rollout whose return is the episode's test reward.
/// Random streams are derived from `seed` alone, so runs that differ only in
/// bias type or K consume identical random numbers.
inline TrainingRun train(const env::Environment& prototype, const Hyperparameters& hp, BiasType bias,
                         std::uint64_t seed, const TrainingOptions& options = {}) {
    hp.validate();
    Rng init_rng = make_rng(seed, {stream::kInit});
    Rng env_train_rng = make_rng(seed, {stream::kEnvTrain});
    Rng env_eval_rng = make_rng(seed, {stream::kEnvEval});
    Rng agent_rng = make_rng(seed, {stream::kAgent});

    auto train_env = prototype.clone();
    auto eval_env = prototype.clone();
    TrainingRun run{{}, Agent::create(prototype.spec(), hp, init_rng)};
    run.episodes.reserve(hp.episodes);
    const TraceSink* trace = options.trace ? &options.trace : nullptr;

    for (std::size_t ep = 0; ep < hp.episodes; ++ep) {
        const auto started = std::chrono::steady_clock::now();
        const double eps = epsilon_at(ep, hp);
        const auto tr = run_episode(*train_env, run.agent, hp, bias, env_train_rng, agent_rng, Mode::Train, eps, ep,
                                    trace);
        const auto ev = run_episode(*eval_env, run.agent, hp, bias, env_eval_rng, agent_rng, Mode::Eval, 0.0, ep,
                                    trace);
        EpisodeLog log;
        log.episode = ep;
        log.train_return = tr.episode_return;
        log.test_return = ev.episode_return;
        log.epsilon = eps;
        log.mean_abs_td_error = tr.mean_abs_td;
        log.train_steps = tr.steps;
        log.wall_seconds =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
        if (options.on_episode) options.on_episode(log);
        run.episodes.push_back(log);
    }
    return run;
}

}  // namespace cbrl::agent
