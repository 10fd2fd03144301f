#pragma once

// Reproduction pipelines: bandit learning-rate heatmap, CM-DQN bias-type
// comparison, and the K ablation. Each pipeline computes its result in
// memory (independent jobs, each with its own rng streams and its own
// runs/<run_id>/ directory), then emits CSV/SVG/config artifacts and a
// manifest single-threaded.

#include <algorithm>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include <fmt/format.h>
#include <json.hpp>

#include "bandit.hpp"
#include "checkpoint.hpp"
#include "cmdqn.hpp"
#include "config.hpp"
#include "envs.hpp"
#include "io.hpp"
#include "parallel.hpp"
#include "stats.hpp"

namespace cbrl::experiments {

namespace fs = std::filesystem;
using agent::BiasType;
using config::RunConfig;

// ------------------------------------------------------------ artifacts ----

struct ManifestEntry {
    std::string path;  // relative to the output directory
    std::string sha256;
    std::uintmax_t bytes = 0;
};

/// Files to emit: in-memory contents plus files that jobs already wrote.
struct ArtifactSet {
    std::vector<std::pair<std::string, std::string>> contents;
    std::vector<std::string> written;

    bool empty() const { return contents.empty() && written.empty(); }
};

inline constexpr const char* kManifestName = "manifest.json";

/// Writes every in-memory artifact, then manifest.json listing all files
/// (sorted by path) with their SHA-256. An empty set is an error and leaves
/// no manifest behind.
inline std::vector<ManifestEntry> emit_artifacts(const ArtifactSet& artifacts, const fs::path& out_dir) {
    if (artifacts.empty()) throw std::runtime_error("emit_artifacts: no results to write");
    fs::create_directories(out_dir);
    for (const auto& [rel, content] : artifacts.contents) io::write_file(out_dir / rel, content);

    std::vector<std::string> paths;
    for (const auto& [rel, content] : artifacts.contents) paths.push_back(rel);
    paths.insert(paths.end(), artifacts.written.begin(), artifacts.written.end());
    std::sort(paths.begin(), paths.end());
    paths.erase(std::unique(paths.begin(), paths.end()), paths.end());

    std::vector<ManifestEntry> entries;
    nlohmann::json files = nlohmann::json::array();
    for (const auto& rel : paths) {
        const std::string data = io::read_file(out_dir / rel);
        ManifestEntry e{rel, io::sha256_hex(data), data.size()};
        files.push_back({{"path", e.path}, {"sha256", e.sha256}, {"bytes", e.bytes}});
        entries.push_back(std::move(e));
    }
    io::write_file(out_dir / kManifestName, nlohmann::json{{"files", files}}.dump(2) + "\n");
    return entries;
}

// -------------------------------------------------------- bandit heatmap ----

struct HeatmapResult {
    std::vector<double> alpha_c_axis;
    std::vector<double> alpha_d_axis;
    std::vector<std::vector<double>> mean_step_reward;   // [alpha_c index][alpha_d index]
    std::vector<std::vector<double>> mean_total_reward;  // per trial
    int trials = 0;
    int trial_length = 0;

    std::size_t cell_count() const { return alpha_c_axis.size() * alpha_d_axis.size(); }

    /// Mean per-step reward over cells with alpha_c > alpha_d (confirmatory)
    /// or alpha_c < alpha_d (disconfirmatory). NaN when the region is empty.
    double region_mean(bool confirmatory) const {
        double sum = 0.0;
        std::size_t n = 0;
        for (std::size_t i = 0; i < alpha_c_axis.size(); ++i)
            for (std::size_t j = 0; j < alpha_d_axis.size(); ++j) {
                const bool in = confirmatory ? alpha_c_axis[i] > alpha_d_axis[j] : alpha_c_axis[i] < alpha_d_axis[j];
                if (in) sum += mean_step_reward[i][j], ++n;
            }
        return n ? sum / static_cast<double>(n) : std::numeric_limits<double>::quiet_NaN();
    }

    /// Spearman correlation between alpha_c + alpha_d and per-step reward.
    double spearman_rate_sum() const {
        std::vector<double> sums, rewards;
        for (std::size_t i = 0; i < alpha_c_axis.size(); ++i)
            for (std::size_t j = 0; j < alpha_d_axis.size(); ++j) {
                sums.push_back(alpha_c_axis[i] + alpha_d_axis[j]);
                rewards.push_back(mean_step_reward[i][j]);
            }
        return sums.size() < 2 ? 0.0 : stats::spearman(sums, rewards);
    }
};

inline HeatmapResult compute_bandit_grid(const RunConfig& cfg) {
    cfg.validate();
    const auto& b = cfg.bandit;
    bandit::GridSearchSettings settings;
    settings.arms.reward_probs = b.arms;
    settings.trials = b.trials;
    settings.trial_length = b.trial_length;
    settings.temperature = b.temperature;
    settings.feedback = b.feedback;
    settings.seed = cfg.seeds.front();
    settings.parallel = cfg.parallel;

    const auto grid = bandit::cartesian_grid(b.alpha_c_values, b.alpha_d_values);
    const auto cells = bandit::grid_search(settings, grid);

    HeatmapResult r;
    r.alpha_c_axis = b.alpha_c_values;
    r.alpha_d_axis = b.alpha_d_values;
    r.trials = b.trials;
    r.trial_length = b.trial_length;
    const std::size_t cols = b.alpha_d_values.size();
    r.mean_step_reward.assign(b.alpha_c_values.size(), std::vector<double>(cols));
    r.mean_total_reward = r.mean_step_reward;
    for (std::size_t k = 0; k < cells.size(); ++k) {
        r.mean_step_reward[k / cols][k % cols] = cells[k].mean_step_reward;
        r.mean_total_reward[k / cols][k % cols] = cells[k].mean_total_reward;
    }
    return r;
}

inline ArtifactSet bandit_grid_artifacts(const RunConfig& cfg, const HeatmapResult& r) {
    ArtifactSet out;
    if (r.cell_count() == 0) return out;
    out.contents.emplace_back("config.ini", config::serialize(cfg));

    io::CsvWriter cells({"alpha_c", "alpha_d", "mean_step_reward", "mean_total_reward", "trials", "trial_length"});
    for (std::size_t i = 0; i < r.alpha_c_axis.size(); ++i)
        for (std::size_t j = 0; j < r.alpha_d_axis.size(); ++j)
            cells.row({io::format_number(r.alpha_c_axis[i]), io::format_number(r.alpha_d_axis[j]),
                       io::format_number(r.mean_step_reward[i][j]), io::format_number(r.mean_total_reward[i][j]),
                       std::to_string(r.trials), std::to_string(r.trial_length)});
    out.contents.emplace_back("heatmap_cells.csv", cells.str());

    std::vector<std::string> header{"alpha_c/alpha_d"};
    for (double ad : r.alpha_d_axis) header.push_back(io::format_number(ad));
    io::CsvWriter matrix(header);
    for (std::size_t i = 0; i < r.alpha_c_axis.size(); ++i) {
        std::vector<std::string> row{io::format_number(r.alpha_c_axis[i])};
        for (double v : r.mean_step_reward[i]) row.push_back(io::format_number(v));
        matrix.row(row);
    }
    out.contents.emplace_back("heatmap_matrix.csv", matrix.str());

    io::CsvWriter summary({"metric", "value"});
    summary.row({"cells", std::to_string(r.cell_count())});
    summary.row({"trials_per_cell", std::to_string(r.trials)});
    summary.row({"region_mean_alpha_c_gt_alpha_d", io::format_number(r.region_mean(true))});
    summary.row({"region_mean_alpha_c_lt_alpha_d", io::format_number(r.region_mean(false))});
    summary.row({"spearman_rate_sum_vs_reward", io::format_number(r.spearman_rate_sum())});
    out.contents.emplace_back("summary.csv", summary.str());

    out.contents.emplace_back(
        "heatmap.svg", io::heatmap_svg(r.alpha_d_axis, r.alpha_c_axis, r.mean_step_reward,
                                       fmt::format("Mean reward per step ({} trials x {} steps)", r.trials,
                                                   r.trial_length),
                                       "alpha_D", "alpha_C"));
    return out;
}

struct BanditGridOutput {
    HeatmapResult result;
    std::vector<ManifestEntry> manifest;
};

inline BanditGridOutput run_bandit_grid(const RunConfig& cfg) {
    auto result = compute_bandit_grid(cfg);
    auto manifest = emit_artifacts(bandit_grid_artifacts(cfg, result), cfg.output_dir);
    return {std::move(result), std::move(manifest)};
}

// -------------------------------------------------------- CM-DQN runs ----

struct RunRecord {
    std::string run_id;
    BiasType bias = BiasType::None;
    double K = 0.0;
    std::uint64_t seed = 0;
    std::vector<agent::EpisodeLog> episodes;
    double final_window_mean = 0.0;
    double all_episode_mean = 0.0;
    std::vector<std::string> files;  // relative to the output directory
};

struct JobSpec {
    BiasType bias = BiasType::None;
    double K = 0.0;
    std::uint64_t seed = 0;
};

inline std::string run_id(const JobSpec& j) {
    return fmt::format("{}-K{}-s{}", agent::to_string(j.bias), io::format_number(j.K), j.seed);
}

inline nlohmann::json to_json(const agent::EpisodeLog& e) {
    return {{"episode", e.episode},
            {"train_return", e.train_return},
            {"test_return", e.test_return},
            {"epsilon", e.epsilon},
            {"mean_abs_td_error", e.mean_abs_td_error},
            {"train_steps", e.train_steps},
            {"wall_seconds", e.wall_seconds}};
}

/// Trains one agent. Writes runs/<run_id>/episodes.jsonl, checkpoint.json
/// and, with tracing on, trace.jsonl.
inline RunRecord run_job(const RunConfig& cfg, const JobSpec& job) {
    agent::Hyperparameters hp = cfg.agent;
    hp.K = job.K;
    const auto prototype = env::make_environment(cfg.environment, hp.max_steps, cfg.lander);

    RunRecord rec;
    rec.run_id = run_id(job);
    rec.bias = job.bias;
    rec.K = job.K;
    rec.seed = job.seed;
    const fs::path rel_dir = fs::path("runs") / rec.run_id;
    const fs::path dir = fs::path(cfg.output_dir) / rel_dir;
    fs::create_directories(dir);

    std::ofstream trace_out;
    agent::TrainingOptions options;
    if (cfg.trace) {
        trace_out.open(dir / "trace.jsonl");
        if (!trace_out) throw std::runtime_error("cannot write " + (dir / "trace.jsonl").string());
        options.trace = [&trace_out](const agent::TraceStep& s) {
            trace_out << nlohmann::json{{"phase", s.mode == agent::Mode::Train ? "train" : "eval"},
                                        {"episode", s.episode},
                                        {"t", s.t},
                                        {"state", s.state},
                                        {"action", s.action},
                                        {"reward", s.reward},
                                        {"terminal", s.terminal},
                                        {"truncated", s.truncated}}
                             .dump()
                      << '\n';
        };
    }
    std::ofstream log_out(dir / "episodes.jsonl");
    if (!log_out) throw std::runtime_error("cannot write " + (dir / "episodes.jsonl").string());
    options.on_episode = [&log_out](const agent::EpisodeLog& e) { log_out << to_json(e).dump() << '\n'; };

    auto run = agent::train(*prototype, hp, job.bias, job.seed, options);
    log_out.close();
    nn::save_checkpoint(run.agent.q, (dir / "checkpoint.json").string());

    rec.final_window_mean = run.final_window_mean(hp.final_window);
    rec.all_episode_mean = run.all_episode_mean();
    rec.episodes = std::move(run.episodes);
    rec.files = {(rel_dir / "episodes.jsonl").string(), (rel_dir / "checkpoint.json").string()};
    if (cfg.trace) {
        trace_out.close();
        rec.files.push_back((rel_dir / "trace.jsonl").string());
    }
    return rec;
}

inline std::vector<RunRecord> run_jobs(const RunConfig& cfg, const std::vector<JobSpec>& jobs) {
    std::vector<RunRecord> records(jobs.size());
    parallel_for(jobs.size(), cfg.parallel, [&](std::size_t i) { records[i] = run_job(cfg, jobs[i]); });
    return records;
}

inline std::string runs_csv(const std::vector<RunRecord>& runs) {
    io::CsvWriter csv({"run_id", "bias", "K", "seed", "final_window_mean", "all_episode_mean"});
    for (const auto& r : runs) {
        csv.row({r.run_id, agent::to_string(r.bias), io::format_number(r.K), std::to_string(r.seed),
                 io::format_number(r.final_window_mean), io::format_number(r.all_episode_mean)});
    }
    return csv.str();
}

inline std::string episodes_csv(const std::vector<RunRecord>& runs) {
    io::CsvWriter csv({"run_id", "bias", "K", "seed", "episode", "epsilon", "train_return", "test_return",
                       "mean_abs_td_error", "train_steps"});
    for (const auto& r : runs)
        for (const auto& e : r.episodes)
            csv.row({r.run_id, agent::to_string(r.bias), io::format_number(r.K), std::to_string(r.seed),
                     std::to_string(e.episode), io::format_number(e.epsilon), io::format_number(e.train_return),
                     io::format_number(e.test_return), io::format_number(e.mean_abs_td_error),
                     std::to_string(e.train_steps)});
    return csv.str();
}

inline const char* bias_color(BiasType b) {
    switch (b) {
        case BiasType::Confirmatory: return "#1b7837";
        case BiasType::Disconfirmatory: return "#b2182b";
        case BiasType::None: return "#2166ac";
    }
    return "black";
}

// ---------------------------------------------------- bias comparison ----

struct BiasSummary {
    BiasType bias = BiasType::None;
    std::size_t seeds = 0;
    double final_window_mean = 0.0;  // seed mean
    double final_window_min = 0.0;
    double final_window_max = 0.0;
    double all_episode_mean = 0.0;
};

struct CurvePoint {
    double mean = 0.0, min = 0.0, max = 0.0;
};

struct BiasComparisonResult {
    std::vector<RunRecord> runs;
    std::vector<BiasSummary> summary;                      // confirmatory, disconfirmatory, none
    std::map<BiasType, std::vector<CurvePoint>> curves;  // per episode, over seeds

    const BiasSummary& of(BiasType b) const {
        for (const auto& s : summary)
            if (s.bias == b) return s;
        throw std::out_of_range("no summary for bias " + agent::to_string(b));
    }
};

inline constexpr BiasType kAllBiases[] = {BiasType::Confirmatory, BiasType::Disconfirmatory, BiasType::None};

inline BiasSummary summarize(BiasType bias, const std::vector<const RunRecord*>& runs) {
    BiasSummary s;
    s.bias = bias;
    s.seeds = runs.size();
    if (runs.empty()) return s;
    std::vector<double> finals, alls;
    for (const auto* r : runs) finals.push_back(r->final_window_mean), alls.push_back(r->all_episode_mean);
    s.final_window_mean = stats::mean(finals);
    s.final_window_min = *std::min_element(finals.begin(), finals.end());
    s.final_window_max = *std::max_element(finals.begin(), finals.end());
    s.all_episode_mean = stats::mean(alls);
    return s;
}

inline BiasComparisonResult compute_bias_comparison(const RunConfig& cfg) {
    cfg.validate();
    std::vector<JobSpec> jobs;
    for (BiasType b : kAllBiases)
        for (auto seed : cfg.seeds) jobs.push_back({b, cfg.agent.K, seed});

    BiasComparisonResult result;
    result.runs = run_jobs(cfg, jobs);
    for (BiasType b : kAllBiases) {
        std::vector<const RunRecord*> mine;
        for (const auto& r : result.runs)
            if (r.bias == b) mine.push_back(&r);
        result.summary.push_back(summarize(b, mine));
        auto& curve = result.curves[b];
        for (std::size_t ep = 0; ep < cfg.agent.episodes; ++ep) {
            std::vector<double> ys;
            for (const auto* r : mine) ys.push_back(r->episodes[ep].test_return);
            curve.push_back({stats::mean(ys), *std::min_element(ys.begin(), ys.end()),
                             *std::max_element(ys.begin(), ys.end())});
        }
    }
    return result;
}

inline ArtifactSet bias_comparison_artifacts(const RunConfig& cfg, const BiasComparisonResult& r) {
    ArtifactSet out;
    if (r.runs.empty()) return out;
    out.contents.emplace_back("config.ini", config::serialize(cfg));
    out.contents.emplace_back("episodes.csv", episodes_csv(r.runs));
    out.contents.emplace_back("runs.csv", runs_csv(r.runs));

    io::CsvWriter summary({"bias", "seeds", "final_window_mean", "final_window_min", "final_window_max",
                           "all_episode_mean"});
    for (const auto& s : r.summary)
        summary.row({agent::to_string(s.bias), std::to_string(s.seeds), io::format_number(s.final_window_mean),
                     io::format_number(s.final_window_min), io::format_number(s.final_window_max),
                     io::format_number(s.all_episode_mean)});
    out.contents.emplace_back("summary.csv", summary.str());

    io::CsvWriter curves({"bias", "episode", "mean_test_return", "min_test_return", "max_test_return"});
    std::vector<io::Series> series;
    for (BiasType b : kAllBiases) {
        const auto& c = r.curves.at(b);
        io::Series s{agent::to_string(b), bias_color(b), {}, {}, {}, {}, false};
        for (std::size_t ep = 0; ep < c.size(); ++ep) {
            curves.row({agent::to_string(b), std::to_string(ep), io::format_number(c[ep].mean),
                        io::format_number(c[ep].min), io::format_number(c[ep].max)});
            s.x.push_back(static_cast<double>(ep));
            s.y.push_back(c[ep].mean);
            s.band_lo.push_back(c[ep].min);
            s.band_hi.push_back(c[ep].max);
        }
        series.push_back(std::move(s));
    }
    out.contents.emplace_back("curves.csv", curves.str());
    out.contents.emplace_back(
        "curves.svg", io::line_chart_svg(series,
                                         fmt::format("Test return per episode, {} ({} seeds, min/max band)",
                                                     cfg.environment, cfg.seeds.size()),
                                         "episode", "test return"));
    for (const auto& run : r.runs) out.written.insert(out.written.end(), run.files.begin(), run.files.end());
    return out;
}

struct BiasComparisonOutput {
    BiasComparisonResult result;
    std::vector<ManifestEntry> manifest;
};

inline BiasComparisonOutput run_bias_comparison(const RunConfig& cfg) {
    auto result = compute_bias_comparison(cfg);
    auto manifest = emit_artifacts(bias_comparison_artifacts(cfg, result), cfg.output_dir);
    return {std::move(result), std::move(manifest)};
}

// ----------------------------------------------------------- K ablation ----

struct AblationRow {
    BiasType bias = BiasType::Confirmatory;
    double K = 0.0;
    std::size_t seeds = 0;
    double all_episode_mean = 0.0;   // averaged test reward over all episodes
    double final_window_mean = 0.0;
};

struct KAblationResult {
    std::vector<RunRecord> runs;
    std::vector<AblationRow> rows;  // one per K, confirmatory
    AblationRow reference;          // unbiased agent, same seeds
};

/// Confirmatory agents for every K, plus an unbiased reference on the same
/// seeds (K = 0 must reproduce it exactly).
inline KAblationResult compute_k_ablation(const RunConfig& cfg) {
    cfg.validate();
    std::vector<JobSpec> jobs;
    for (double k : cfg.k_values)
        for (auto seed : cfg.seeds) jobs.push_back({BiasType::Confirmatory, k, seed});
    for (auto seed : cfg.seeds) jobs.push_back({BiasType::None, cfg.agent.K, seed});

    KAblationResult result;
    result.runs = run_jobs(cfg, jobs);
    auto row_of = [&](BiasType bias, double k, std::size_t first) {
        AblationRow row{bias, k, cfg.seeds.size(), 0.0, 0.0};
        std::vector<double> alls, finals;
        for (std::size_t s = 0; s < cfg.seeds.size(); ++s) {
            alls.push_back(result.runs[first + s].all_episode_mean);
            finals.push_back(result.runs[first + s].final_window_mean);
        }
        row.all_episode_mean = stats::mean(alls);
        row.final_window_mean = stats::mean(finals);
        return row;
    };
    for (std::size_t i = 0; i < cfg.k_values.size(); ++i) {
        result.rows.push_back(row_of(BiasType::Confirmatory, cfg.k_values[i], i * cfg.seeds.size()));
    }
    result.reference = row_of(BiasType::None, cfg.agent.K, cfg.k_values.size() * cfg.seeds.size());
    return result;
}

inline ArtifactSet k_ablation_artifacts(const RunConfig& cfg, const KAblationResult& r) {
    ArtifactSet out;
    if (r.rows.empty()) return out;
    out.contents.emplace_back("config.ini", config::serialize(cfg));
    out.contents.emplace_back("episodes.csv", episodes_csv(r.runs));
    out.contents.emplace_back("runs.csv", runs_csv(r.runs));

    io::CsvWriter table({"bias", "K", "seeds", "all_episode_mean", "final_window_mean"});
    for (const auto& row : r.rows)
        table.row({agent::to_string(row.bias), io::format_number(row.K), std::to_string(row.seeds),
                   io::format_number(row.all_episode_mean), io::format_number(row.final_window_mean)});
    table.row({"none", "", std::to_string(r.reference.seeds), io::format_number(r.reference.all_episode_mean),
               io::format_number(r.reference.final_window_mean)});
    out.contents.emplace_back("ablation.csv", table.str());

    io::Series all{"mean over all episodes", "#1b7837", {}, {}, {}, {}, true};
    io::Series fin{fmt::format("mean of last {}", cfg.agent.final_window), "#762a83", {}, {}, {}, {}, true};
    io::Series ref{"unbiased (all episodes)", "#2166ac", {}, {}, {}, {}, false};
    std::vector<std::string> ticks;
    for (std::size_t i = 0; i < r.rows.size(); ++i) {
        const double x = static_cast<double>(i);
        all.x.push_back(x), all.y.push_back(r.rows[i].all_episode_mean);
        fin.x.push_back(x), fin.y.push_back(r.rows[i].final_window_mean);
        ref.x.push_back(x), ref.y.push_back(r.reference.all_episode_mean);
        ticks.push_back(io::format_number(r.rows[i].K));
    }
    out.contents.emplace_back(
        "ablation.svg", io::line_chart_svg({all, fin, ref},
                                           fmt::format("Confirmatory CM-DQN test return vs K, {} ({} seeds)",
                                                       cfg.environment, cfg.seeds.size()),
                                           "K", "test return", ticks));
    for (const auto& run : r.runs) out.written.insert(out.written.end(), run.files.begin(), run.files.end());
    return out;
}

struct KAblationOutput {
    KAblationResult result;
    std::vector<ManifestEntry> manifest;
};

inline KAblationOutput run_k_ablation(const RunConfig& cfg) {
    auto result = compute_k_ablation(cfg);
    auto manifest = emit_artifacts(k_ablation_artifacts(cfg, result), cfg.output_dir);
    return {std::move(result), std::move(manifest)};
}

}  // namespace cbrl::experiments
