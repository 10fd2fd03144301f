// cbrl: command-line runner for the confirmation-bias experiments.
//
//   cbrl bandit-grid  [--config F] [--seeds 1,2] [--out DIR] [--parallel N] [--full-scale]
//   cbrl bias-compare [...] [--trace] [--two-phase-updates]
//   cbrl k-ablation   [...] [--trace] [--two-phase-updates]

#include <cstdio>
#include <exception>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>
#include <fmt/format.h>

#include <cbrl/cbrl.hpp>

namespace {

using namespace cbrl;

struct CommonOptions {
    std::string config_path;
    std::string seeds;
    std::string out;
    std::size_t parallel = 0;
    bool trace = false;
    bool two_phase = false;
    bool full_scale = false;
};

void add_common(CLI::App* cmd, CommonOptions& o) {
    cmd->add_option("--config", o.config_path, "Experiment configuration file (INI)")->check(CLI::ExistingFile);
    cmd->add_option("--seeds", o.seeds, "Comma-separated seed list, overrides the config");
    cmd->add_option("--out", o.out, "Output directory, overrides the config");
    cmd->add_option("--parallel", o.parallel, "Maximum concurrent jobs")->check(CLI::PositiveNumber);
    cmd->add_flag("--trace", o.trace, "Dump every environment step as JSON Lines");
    cmd->add_flag("--two-phase-updates", o.two_phase,
                  "Apply biased updates as a descent call followed by a separate ascent call");
    cmd->add_flag("--full-scale", o.full_scale,
                  "1024 bandit trials per cell; CM-DQN runs on landerlite with 600 x 400 budgets");
}

config::RunConfig resolve(config::ExperimentKind kind, const CommonOptions& o) {
    config::RunConfig cfg = o.config_path.empty() ? config::RunConfig::defaults(kind) : config::load(o.config_path);
    cfg.kind = kind;
    if (!o.seeds.empty()) cfg.seeds = config::detail::parse_list<std::uint64_t>("--seeds", o.seeds);
    if (!o.out.empty()) cfg.output_dir = o.out;
    if (o.parallel > 0) cfg.parallel = o.parallel;
    if (o.trace) cfg.trace = true;
    if (o.two_phase) cfg.agent.two_phase_updates = true;
    if (o.full_scale) {
        cfg.bandit.trials = 1024;
        if (kind != config::ExperimentKind::BanditGrid) {
            const auto full = agent::Hyperparameters::for_environment("landerlite");
            cfg.environment = "landerlite";
            cfg.agent.episodes = full.episodes;
            cfg.agent.max_steps = full.max_steps;
        }
    }
    cfg.validate();
    return cfg;
}

void report_manifest(const std::vector<experiments::ManifestEntry>& manifest, const std::string& dir) {
    fmt::print("wrote {} files to {} (see {})\n", manifest.size(), dir, experiments::kManifestName);
}

int bandit_grid(const CommonOptions& o) {
    const auto cfg = resolve(config::ExperimentKind::BanditGrid, o);
    const auto out = experiments::run_bandit_grid(cfg);
    const auto& r = out.result;
    fmt::print("cells: {} ({} x {}), {} trials x {} steps per cell\n", r.cell_count(), r.alpha_c_axis.size(),
               r.alpha_d_axis.size(), r.trials, r.trial_length);
    fmt::print("mean reward per step, alpha_C > alpha_D: {:.6f}\n", r.region_mean(true));
    fmt::print("mean reward per step, alpha_C < alpha_D: {:.6f}\n", r.region_mean(false));
    fmt::print("spearman(alpha_C + alpha_D, reward): {:.4f}\n", r.spearman_rate_sum());
    report_manifest(out.manifest, cfg.output_dir);
    return 0;
}

int bias_compare(const CommonOptions& o) {
    const auto cfg = resolve(config::ExperimentKind::BiasComparison, o);
    const auto out = experiments::run_bias_comparison(cfg);
    fmt::print("{:<16} {:>5} {:>12} {:>10} {:>10} {:>12}\n", "bias", "seeds",
               fmt::format("last{}_mean", cfg.agent.final_window), "min", "max", "all_ep_mean");
    for (const auto& s : out.result.summary) {
        fmt::print("{:<16} {:>5} {:>12.4f} {:>10.4f} {:>10.4f} {:>12.4f}\n", agent::to_string(s.bias), s.seeds,
                   s.final_window_mean, s.final_window_min, s.final_window_max, s.all_episode_mean);
    }
    report_manifest(out.manifest, cfg.output_dir);
    return 0;
}

int k_ablation(const CommonOptions& o) {
    const auto cfg = resolve(config::ExperimentKind::KAblation, o);
    const auto out = experiments::run_k_ablation(cfg);
    fmt::print("{:<16} {:>8} {:>12} {:>12}\n", "bias", "K", "all_ep_mean",
               fmt::format("last{}_mean", cfg.agent.final_window));
    for (const auto& row : out.result.rows) {
        fmt::print("{:<16} {:>8} {:>12.4f} {:>12.4f}\n", agent::to_string(row.bias), io::format_number(row.K),
                   row.all_episode_mean, row.final_window_mean);
    }
    const auto& ref = out.result.reference;
    fmt::print("{:<16} {:>8} {:>12.4f} {:>12.4f}\n", "none", "-", ref.all_episode_mean, ref.final_window_mean);
    report_manifest(out.manifest, cfg.output_dir);
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Confirmation-bias reinforcement learning experiments"};
    app.require_subcommand(1);
    CommonOptions grid_opts, bias_opts, ablation_opts;
    auto* grid = app.add_subcommand("bandit-grid", "Learning-rate grid search on the two-armed bandit");
    auto* bias = app.add_subcommand("bias-compare", "Train CM-DQN with confirmatory, disconfirmatory and no bias");
    auto* ablation = app.add_subcommand("k-ablation", "Sweep the bias constraint K for a confirmatory CM-DQN");
    add_common(grid, grid_opts);
    add_common(bias, bias_opts);
    add_common(ablation, ablation_opts);

    CLI11_PARSE(app, argc, argv);
    try {
        if (*grid) return bandit_grid(grid_opts);
        if (*bias) return bias_compare(bias_opts);
        if (*ablation) return k_ablation(ablation_opts);
    } catch (const std::exception& e) {
        fmt::print(stderr, "error: {}\n", e.what());
        return 1;
    }
    return 0;
}
