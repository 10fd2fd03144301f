#pragma once

// Experiment configuration files.
//
// INI syntax (sections, `key = value`, `;` comments). Every key is typed and
// optional; unknown sections or keys are rejected. Lists are comma separated.
//
//   [experiment]  kind, environment, seeds, output_dir, parallel, trace
//   [bandit]      arms, alpha_c_values, alpha_d_values, temperature,
//                 trial_length, trials, feedback
//   [agent]       tau, alpha_c, K, gamma, buffer_capacity, batch_size,
//                 epsilon_start, epsilon_end, episodes, max_steps, mlp_width,
//                 hidden_layers, optimizer, beta1, beta2, adam_epsilon,
//                 weight_decay, two_phase_updates, final_window
//   [ablation]    k_values
//   [lander]      every LanderConstants field except max_steps
//
// serialize() writes every key in a fixed order; parse(serialize(c)) == c.

#include <charconv>
#include <cstdint>
#include <functional>
#include <sstream>
#include <string>
#include <system_error>
#include <vector>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include "bandit.hpp"
#include "cmdqn.hpp"
#include "envs.hpp"
#include "errors.hpp"
#include "io.hpp"

namespace cbrl::config {

enum class ExperimentKind { BanditGrid, BiasComparison, KAblation };

inline std::string to_string(ExperimentKind k) {
    switch (k) {
        case ExperimentKind::BanditGrid: return "bandit-grid";
        case ExperimentKind::BiasComparison: return "bias-compare";
        case ExperimentKind::KAblation: return "k-ablation";
    }
    return "";
}

inline ExperimentKind kind_from_string(const std::string& s) {
    if (s == "bandit-grid") return ExperimentKind::BanditGrid;
    if (s == "bias-compare") return ExperimentKind::BiasComparison;
    if (s == "k-ablation") return ExperimentKind::KAblation;
    throw config_error("unknown experiment kind '" + s + "'");
}

struct BanditSettings {
    std::vector<double> arms{0.4, 0.6};
    std::vector<double> alpha_c_values = bandit::default_alpha_axis();
    std::vector<double> alpha_d_values = bandit::default_alpha_axis();
    double temperature = 0.1;
    int trial_length = 200;
    int trials = 256;
    bandit::FeedbackMode feedback = bandit::FeedbackMode::FullInformation;

    bool operator==(const BanditSettings&) const = default;
};

struct RunConfig {
    ExperimentKind kind = ExperimentKind::BiasComparison;
    std::string environment = "lineworld";
    std::vector<std::uint64_t> seeds{1, 2, 3, 4, 5};
    std::string output_dir = "results";
    std::size_t parallel = 1;
    bool trace = false;
    agent::Hyperparameters agent = agent::Hyperparameters::for_environment("lineworld");
    BanditSettings bandit;
    std::vector<double> k_values{0.0, 0.05, 0.1, 0.2};
    env::LanderConstants lander;

    bool operator==(const RunConfig&) const = default;

    static RunConfig defaults(ExperimentKind kind, const std::string& environment = "lineworld") {
        RunConfig c;
        c.kind = kind;
        c.environment = environment;
        c.agent = agent::Hyperparameters::for_environment(environment);
        return c;
    }

    void validate() const {
        if (seeds.empty()) throw config_error("at least one seed is required");
        if (parallel < 1) throw config_error("parallel must be >= 1");
        if (environment != "lineworld" && environment != "landerlite") {
            throw config_error("unknown environment '" + environment + "'");
        }
        try {
            agent.validate();
            bandit::ArmConfig{bandit.arms}.validate();
            if (bandit.alpha_c_values.empty() || bandit.alpha_d_values.empty()) {
                throw invalid_parameter("alpha grids must be nonempty");
            }
            for (double ac : bandit.alpha_c_values)
                for (double ad : bandit.alpha_d_values)
                    bandit::BanditParams{ac, ad, bandit.temperature, bandit.trial_length, bandit.feedback}.validate();
            if (bandit.trials < 1) throw invalid_parameter("bandit trials must be >= 1");
            if (kind == ExperimentKind::KAblation && k_values.empty()) throw invalid_parameter("k_values is empty");
            for (double k : k_values)
                if (!(k >= 0.0 && k < 1.0)) throw invalid_parameter("every K must lie in [0,1)");
        } catch (const invalid_parameter& e) {
            throw config_error(e.what());
        }
    }
};

namespace detail {

inline std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t");
    if (b == std::string::npos) return "";
    const auto e = s.find_last_not_of(" \t");
    return s.substr(b, e - b + 1);
}

inline std::vector<std::string> split(const std::string& s) {
    std::vector<std::string> out;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ',')) out.push_back(trim(item));
    if (!s.empty() && s.back() == ',') out.push_back("");
    return out;
}

template <typename T>
T parse_number(const std::string& key, const std::string& text) {
    const std::string t = trim(text);
    T value{};
    const auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), value);
    if (ec != std::errc() || ptr != t.data() + t.size() || t.empty()) {
        throw config_error("'" + key + "': cannot parse '" + text + "' as a number");
    }
    return value;
}

inline bool parse_bool(const std::string& key, const std::string& text) {
    const std::string t = trim(text);
    if (t == "true") return true;
    if (t == "false") return false;
    throw config_error("'" + key + "': expected true or false, got '" + text + "'");
}

template <typename T>
std::vector<T> parse_list(const std::string& key, const std::string& text) {
    std::vector<T> out;
    if (trim(text).empty()) return out;
    for (const auto& item : split(text)) out.push_back(parse_number<T>(key, item));
    return out;
}

template <typename T>
std::string join(const std::vector<T>& xs) {
    std::string out;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        if (i) out += ",";
        if constexpr (std::is_floating_point_v<T>) {
            out += io::format_number(xs[i]);
        } else {
            out += std::to_string(xs[i]);
        }
    }
    return out;
}

struct Field {
    std::string section;
    std::string key;
    std::function<std::string(const RunConfig&)> get;
    std::function<void(RunConfig&, const std::string&)> set;
};

#define CBRL_DOUBLE(sec, name, member)                                                               \
    Field{sec, name, [](const RunConfig& c) { return io::format_number(c.member); },                 \
          [](RunConfig& c, const std::string& v) { c.member = parse_number<double>(name, v); }}
#define CBRL_SIZE(sec, name, member)                                                                 \
    Field{sec, name, [](const RunConfig& c) { return std::to_string(c.member); },                    \
          [](RunConfig& c, const std::string& v) { c.member = parse_number<std::size_t>(name, v); }}
#define CBRL_INT(sec, name, member)                                                                  \
    Field{sec, name, [](const RunConfig& c) { return std::to_string(c.member); },                    \
          [](RunConfig& c, const std::string& v) { c.member = parse_number<int>(name, v); }}
#define CBRL_BOOL(sec, name, member)                                                                 \
    Field{sec, name, [](const RunConfig& c) { return std::string(c.member ? "true" : "false"); },   \
          [](RunConfig& c, const std::string& v) { c.member = parse_bool(name, v); }}
#define CBRL_DLIST(sec, name, member)                                                                \
    Field{sec, name, [](const RunConfig& c) { return join(c.member); },                              \
          [](RunConfig& c, const std::string& v) { c.member = parse_list<double>(name, v); }}

inline const std::vector<Field>& fields() {
    static const std::vector<Field> table = {
        Field{"experiment", "kind", [](const RunConfig& c) { return to_string(c.kind); },
              [](RunConfig& c, const std::string& v) { c.kind = kind_from_string(trim(v)); }},
        Field{"experiment", "environment", [](const RunConfig& c) { return c.environment; },
              [](RunConfig& c, const std::string& v) { c.environment = trim(v); }},
        Field{"experiment", "seeds", [](const RunConfig& c) { return join(c.seeds); },
              [](RunConfig& c, const std::string& v) { c.seeds = parse_list<std::uint64_t>("seeds", v); }},
        Field{"experiment", "output_dir", [](const RunConfig& c) { return c.output_dir; },
              [](RunConfig& c, const std::string& v) { c.output_dir = trim(v); }},
        CBRL_SIZE("experiment", "parallel", parallel),
        CBRL_BOOL("experiment", "trace", trace),

        CBRL_DLIST("bandit", "arms", bandit.arms),
        CBRL_DLIST("bandit", "alpha_c_values", bandit.alpha_c_values),
        CBRL_DLIST("bandit", "alpha_d_values", bandit.alpha_d_values),
        CBRL_DOUBLE("bandit", "temperature", bandit.temperature),
        CBRL_INT("bandit", "trial_length", bandit.trial_length),
        CBRL_INT("bandit", "trials", bandit.trials),
        Field{"bandit", "feedback", [](const RunConfig& c) { return bandit::to_string(c.bandit.feedback); },
              [](RunConfig& c, const std::string& v) {
                  try {
                      c.bandit.feedback = bandit::feedback_from_string(trim(v));
                  } catch (const invalid_parameter& e) {
                      throw config_error(e.what());
                  }
              }},

        CBRL_DOUBLE("agent", "tau", agent.tau),
        CBRL_DOUBLE("agent", "alpha_c", agent.alpha_c),
        CBRL_DOUBLE("agent", "K", agent.K),
        CBRL_DOUBLE("agent", "gamma", agent.gamma),
        CBRL_SIZE("agent", "buffer_capacity", agent.buffer_capacity),
        CBRL_SIZE("agent", "batch_size", agent.batch_size),
        CBRL_DOUBLE("agent", "epsilon_start", agent.epsilon_start),
        CBRL_DOUBLE("agent", "epsilon_end", agent.epsilon_end),
        CBRL_SIZE("agent", "episodes", agent.episodes),
        CBRL_SIZE("agent", "max_steps", agent.max_steps),
        CBRL_SIZE("agent", "mlp_width", agent.mlp_width),
        CBRL_SIZE("agent", "hidden_layers", agent.hidden_layers),
        Field{"agent", "optimizer", [](const RunConfig& c) { return nn::to_string(c.agent.optimizer); },
              [](RunConfig& c, const std::string& v) {
                  try {
                      c.agent.optimizer = nn::optimizer_from_string(trim(v));
                  } catch (const invalid_parameter& e) {
                      throw config_error(e.what());
                  }
              }},
        CBRL_DOUBLE("agent", "beta1", agent.adamw.beta1),
        CBRL_DOUBLE("agent", "beta2", agent.adamw.beta2),
        CBRL_DOUBLE("agent", "adam_epsilon", agent.adamw.epsilon),
        CBRL_DOUBLE("agent", "weight_decay", agent.adamw.weight_decay),
        CBRL_BOOL("agent", "two_phase_updates", agent.two_phase_updates),
        CBRL_SIZE("agent", "final_window", agent.final_window),

        CBRL_DLIST("ablation", "k_values", k_values),

        CBRL_DOUBLE("lander", "gravity", lander.gravity),
        CBRL_DOUBLE("lander", "main_thrust", lander.main_thrust),
        CBRL_DOUBLE("lander", "side_torque", lander.side_torque),
        CBRL_DOUBLE("lander", "side_lateral", lander.side_lateral),
        CBRL_DOUBLE("lander", "pad_half_width", lander.pad_half_width),
        CBRL_DOUBLE("lander", "start_y", lander.start_y),
        CBRL_DOUBLE("lander", "start_x_range", lander.start_x_range),
        CBRL_DOUBLE("lander", "start_velocity_range", lander.start_velocity_range),
        CBRL_DOUBLE("lander", "start_angle_range", lander.start_angle_range),
        CBRL_DOUBLE("lander", "landing_speed", lander.landing_speed),
        CBRL_DOUBLE("lander", "landing_angle", lander.landing_angle),
        CBRL_DOUBLE("lander", "crash_angle", lander.crash_angle),
        CBRL_DOUBLE("lander", "landing_bonus", lander.landing_bonus),
        CBRL_DOUBLE("lander", "crash_penalty", lander.crash_penalty),
        CBRL_DOUBLE("lander", "main_fuel_cost", lander.main_fuel_cost),
        CBRL_DOUBLE("lander", "side_fuel_cost", lander.side_fuel_cost),
        CBRL_DOUBLE("lander", "distance_weight", lander.distance_weight),
        CBRL_DOUBLE("lander", "speed_weight", lander.speed_weight),
        CBRL_DOUBLE("lander", "angle_weight", lander.angle_weight),
        CBRL_DOUBLE("lander", "contact_weight", lander.contact_weight),
    };
    return table;
}

#undef CBRL_DOUBLE
#undef CBRL_SIZE
#undef CBRL_INT
#undef CBRL_BOOL
#undef CBRL_DLIST

}  // namespace detail

inline std::string serialize(const RunConfig& config) {
    std::string out;
    std::string section;
    for (const auto& f : detail::fields()) {
        if (f.section != section) {
            if (!section.empty()) out += "\n";
            section = f.section;
            out += "[" + section + "]\n";
        }
        out += f.key + " = " + f.get(config) + "\n";
    }
    return out;
}

inline RunConfig parse(const std::string& text) {
    namespace pt = boost::property_tree;
    pt::ptree tree;
    std::istringstream in(text);
    try {
        pt::read_ini(in, tree);
    } catch (const pt::ini_parser_error& e) {
        throw config_error(std::string("config syntax error: ") + e.what());
    }

    for (const auto& [section, keys] : tree) {
        if (keys.empty() && !keys.data().empty()) {
            throw config_error("key '" + section + "' must be inside a section");
        }
        for (const auto& [key, value] : keys) {
            bool known = false;
            for (const auto& f : detail::fields()) known = known || (f.section == section && f.key == key);
            if (!known) throw config_error("unknown config key [" + section + "] " + key);
        }
    }

    // Episode budgets default per environment, so resolve it first.
    const std::string environment = detail::trim(tree.get<std::string>("experiment.environment", "lineworld"));
    RunConfig config;
    config.environment = environment;
    config.agent = agent::Hyperparameters::for_environment(environment);
    for (const auto& f : detail::fields()) {
        if (auto v = tree.get_optional<std::string>(pt::ptree::path_type(f.section + "." + f.key, '.'))) {
            f.set(config, *v);
        }
    }
    return config;
}

inline RunConfig load(const std::string& path) {
    return parse(io::read_file(path));
}

}  // namespace cbrl::config
