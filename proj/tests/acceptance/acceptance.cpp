// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit if any
// criterion fails. Heavy runs write their artifacts under --work-dir.

#include <chrono>
#include <cmath>
#include <filesystem>
#include <iostream>
#include <map>

#include <CLI11.hpp>
#include <boost/math/distributions/chi_squared.hpp>
#include <fmt/core.h>

#include <cbrl/cbrl.hpp>

namespace fs = std::filesystem;
using namespace cbrl;
using agent::BiasType;
using config::ExperimentKind;
using config::RunConfig;

namespace {

struct Outcome {
    bool pass = true;
    std::string detail;
};

int failures = 0;

void report(int id, const std::string& name, const Outcome& o) {
    if (!o.pass) ++failures;
    fmt::print("[{}] criterion {}: {} | {}\n", o.pass ? "PASS" : "FAIL", id, name, o.detail);
    std::fflush(stdout);
}

template <typename F>
void run_criterion(int id, const std::string& name, F&& body) {
    const auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
        o = body();
    } catch (const std::exception& e) {
        o = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    o.detail += fmt::format(" [{:.1f}s]", secs);
    report(id, name, o);
}

double seconds_since(std::chrono::steady_clock::time_point t) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t).count();
}

std::map<std::string, std::string> csv_files(const fs::path& dir) {
    std::map<std::string, std::string> out;
    for (const auto& e : fs::directory_iterator(dir))
        if (e.path().extension() == ".csv") out[e.path().filename().string()] = io::read_file(e.path());
    return out;
}

// -- 1 ----------------------------------------------------------------------
Outcome bandit_trend(const fs::path& work) {
    auto cfg = RunConfig::defaults(ExperimentKind::BanditGrid);
    cfg.bandit.arms = {0.4, 0.6};
    cfg.bandit.temperature = 0.1;
    cfg.bandit.trial_length = 200;
    cfg.bandit.trials = 256;
    cfg.parallel = 1;
    cfg.output_dir = (work / "bandit_grid").string();
    const auto t0 = std::chrono::steady_clock::now();
    const auto out = experiments::run_bandit_grid(cfg);
    const double secs = seconds_since(t0);
    const auto& r = out.result;
    const double conf = r.region_mean(true);
    const double disc = r.region_mean(false);
    const double rho = r.spearman_rate_sum();
    const bool ok = r.cell_count() == 361 && conf > disc && rho > 0.0 && secs < 300.0;
    return {ok, fmt::format("cells={} mean(aC>aD)={:.5f} mean(aC<aD)={:.5f} spearman={:.4f} runtime={:.1f}s (<300s)",
                            r.cell_count(), conf, disc, rho, secs)};
}

// -- 2 ----------------------------------------------------------------------
Outcome bias_algebra() {
    Rng rng = make_rng(2026);
    double worst_conf = 0.0, worst_disc = 0.0, worst_component = 0.0;
    int cases = 0;
    for (int i = 0; i < 1000; ++i) {
        agent::Hyperparameters hp;
        hp.optimizer = nn::OptimizerKind::SGD;
        hp.batch_size = 1;
        hp.buffer_capacity = 4;
        hp.mlp_width = 4 + uniform_index(rng, 29);
        hp.hidden_layers = 1 + uniform_index(rng, 2);
        hp.alpha_c = uniform(rng, 1e-4, 1e-1);
        hp.K = uniform(rng, 0.0, 0.99);
        hp.gamma = uniform(rng, 0.0, 1.0);
        const std::size_t dim = 1 + uniform_index(rng, 8);
        const std::size_t actions = 2 + uniform_index(rng, 3);
        Rng init = make_rng(static_cast<std::uint64_t>(i), {stream::kInit});
        const auto base = agent::Agent::create(env::EnvSpec{dim, actions, 10}, hp, init);

        // Alternate cases: negative TD for the confirmatory check, positive for
        // the disconfirmatory one.
        const bool negative = i % 2 == 0;
        agent::Transition t;
        t.state.resize(dim);
        t.next_state.resize(dim);
        for (double& v : t.state) v = uniform(rng, -1.0, 1.0);
        for (double& v : t.next_state) v = uniform(rng, -1.0, 1.0);
        t.action = uniform_index(rng, actions);
        t.terminal = uniform01(rng) < 0.5;
        t.reward = (negative ? -1.0 : 1.0) * uniform(rng, 5.0, 50.0);

        auto step = [&](BiasType bias) {
            agent::Agent a = base;
            a.buffer.push(t);
            Rng r = make_rng(0);
            agent::train_step(a, hp, bias, r);
            return a.q;
        };
        const double td = agent::td_error(base.q, t, agent::compute_target(t, base.target, hp.gamma));
        if ((negative && !(td < 0)) || (!negative && !(td > 0))) return {false, fmt::format("case {} td sign", i)};
        const auto none = step(BiasType::None);
        const auto biased = step(negative ? BiasType::Confirmatory : BiasType::Disconfirmatory);
        const auto other = step(negative ? BiasType::Disconfirmatory : BiasType::Confirmatory);
        if (!(other == none)) return {false, fmt::format("case {}: unbiased branch altered the update", i)};

        // Deltas are vectors: relative error in the L2 norm. Per component the
        // residual may exceed 1e-12 of the delta only by the rounding of the
        // stored parameter.
        double num = 0.0, den = 0.0;
        for (std::size_t k = 0; k < none.size(); ++k) {
            const double expected = (1.0 - hp.K) * (none[k] - base.q[k]);
            const double err = std::abs((biased[k] - base.q[k]) - expected);
            num += err * err;
            den += expected * expected;
            const double mag = std::max({std::abs(base.q[k]), std::abs(none[k]), std::abs(biased[k])});
            const double ulp = std::nextafter(mag, INFINITY) - mag;
            worst_component = std::max(worst_component, err / (2.0 * ulp + 1e-12 * std::abs(expected)));
        }
        const double rel = den > 0.0 ? std::sqrt(num / den) : (num > 0.0 ? INFINITY : 0.0);
        (negative ? worst_conf : worst_disc) = std::max(negative ? worst_conf : worst_disc, rel);
        ++cases;
    }

    // K = 0: identical training across bias types, several seeds.
    bool collapse = true;
    const env::LineWorld world(100);
    agent::Hyperparameters hp;
    hp.K = 0.0;
    hp.episodes = 40;
    hp.mlp_width = 32;
    for (std::uint64_t seed : {1, 2, 3}) {
        const auto none = agent::train(world, hp, BiasType::None, seed);
        for (BiasType b : {BiasType::Confirmatory, BiasType::Disconfirmatory}) {
            const auto other = agent::train(world, hp, b, seed);
            collapse = collapse && other.agent.q == none.agent.q && other.agent.target == none.agent.target &&
                       other.agent.optimizer == none.agent.optimizer;
            for (std::size_t e = 0; e < none.episodes.size(); ++e) {
                collapse = collapse && other.episodes[e].test_return == none.episodes[e].test_return &&
                           other.episodes[e].train_return == none.episodes[e].train_return &&
                           other.episodes[e].mean_abs_td_error == none.episodes[e].mean_abs_td_error;
            }
        }
    }
    const bool ok = cases == 1000 && worst_conf <= 1e-12 && worst_disc <= 1e-12 && worst_component <= 1.0 && collapse;
    return {ok, fmt::format("cases={} max relative error (L2) confirmatory={:.2e} disconfirmatory={:.2e} (<=1e-12); "
                            "max per-parameter residual / (2 ulp + 1e-12 |delta|) = {:.3f} (<=1); K=0 bytewise collapse over 3 seeds: {}",
                            cases, worst_conf, worst_disc, worst_component, collapse ? "yes" : "no")};
}

// -- 3 ----------------------------------------------------------------------
Outcome gradient_check() {
    Rng rng = make_rng(31337);
    double worst = 0.0;
    int pairs = 0;
    for (int trial = 0; trial < 30; ++trial) {
        const std::size_t in = 1 + uniform_index(rng, 8);
        const std::size_t width = 2 + uniform_index(rng, 15);
        const std::size_t hidden = 1 + uniform_index(rng, 3);
        const std::size_t out = 1 + uniform_index(rng, 4);
        auto params = nn::init_network(nn::mlp_specs(in, width, hidden, out), rng);
        for (double& b : params.values())
            if (b == 0.0) b = uniform(rng, -0.1, 0.1);
        const std::size_t n = 1 + uniform_index(rng, 16);
        std::vector<std::vector<double>> inputs(n, std::vector<double>(in));
        std::vector<nn::TrainingSample> batch;
        for (auto& x : inputs) {
            for (double& v : x) v = uniform(rng, -1.0, 1.0);
            batch.push_back({x, uniform_index(rng, out), uniform(rng, -2.0, 2.0), uniform(rng, 0.0, 1.0)});
        }
        const auto exact = nn::backward(params, batch).gradient;
        const auto fd = nn::finite_difference_gradient(params, batch, 1e-6);
        double num = 0.0, exact_norm = 0.0, fd_norm = 0.0;
        for (std::size_t k = 0; k < exact.size(); ++k) {
            num += (exact[k] - fd[k]) * (exact[k] - fd[k]);
            exact_norm += exact[k] * exact[k];
            fd_norm += fd[k] * fd[k];
        }
        const double rel = std::sqrt(num) / std::max({std::sqrt(exact_norm), std::sqrt(fd_norm), 1e-12});
        worst = std::max(worst, rel);
        ++pairs;
    }
    return {pairs >= 20 && worst < 1e-4,
            fmt::format("pairs={} max relative error (L2)={:.3e} (<1e-4)", pairs, worst)};
}

// -- 4 ----------------------------------------------------------------------
Outcome soft_update_check() {
    Rng rng = make_rng(404);
    const auto specs = nn::mlp_specs(8, 64, 2, 4);
    double worst = 0.0;
    int checks = 0;
    std::vector<double> taus{0.0, 5e-2, 1.0};
    for (int i = 0; i < 20; ++i) taus.push_back(uniform01(rng));
    for (double tau : taus) {
        const auto q = nn::init_network(specs, rng);
        const auto target = nn::init_network(specs, rng);
        const auto next = agent::soft_update(target, q, tau);
        for (std::size_t k = 0; k < q.size(); ++k) {
            worst = std::max(worst, std::abs(next[k] - (tau * q[k] + (1.0 - tau) * target[k])));
            ++checks;
        }
        if (tau == 0.0 && !(next == target)) return {false, "tau=0 changed the target"};
        if (tau == 1.0 && !(next == q)) return {false, "tau=1 did not copy the online network"};
    }
    return {worst <= 1e-12, fmt::format("{} parameters over {} tau values incl. 0, 5e-2, 1; max abs err={:.2e} "
                                        "(<=1e-12)",
                                        checks, taus.size(), worst)};
}

// -- 5 ----------------------------------------------------------------------
Outcome replay_check() {
    Rng rng = make_rng(55);
    bool ring_ok = true;
    for (int trial = 0; trial < 200; ++trial) {
        const std::size_t cap = 1 + uniform_index(rng, 64);
        const std::size_t extra = uniform_index(rng, 200);
        agent::ReplayBuffer buf(cap);
        for (std::size_t i = 0; i < cap + extra; ++i)
            buf.push(agent::Transition{{static_cast<double>(i)}, 0, static_cast<double>(i), {0.0}, false});
        ring_ok = ring_ok && buf.size() == cap;
        for (std::size_t i = 0; i < cap; ++i)
            ring_ok = ring_ok && buf.oldest(i).reward == static_cast<double>(extra + i);
    }
    agent::ReplayBuffer buf(100);
    for (int i = 0; i < 100; ++i) buf.push(agent::Transition{{0.0}, 0, 0.0, {0.0}, false});
    std::vector<double> counts(100, 0.0);
    const int draws = 100000;
    for (int i = 0; i < draws; ++i) counts[buf.sample_indices(1, rng)[0]] += 1.0;
    double stat = 0.0;
    for (double c : counts) stat += (c - draws / 100.0) * (c - draws / 100.0) / (draws / 100.0);
    const double p = boost::math::cdf(boost::math::complement(boost::math::chi_squared(99.0), stat));
    return {ring_ok && p > 1e-3, fmt::format("ring overwrite exact over 200 random fills: {}; chi-square={:.1f} "
                                             "df=99 p={:.4f} (>0.001, 1e5 draws)",
                                             ring_ok ? "yes" : "no", stat, p)};
}

// -- 6, 7 -------------------------------------------------------------------
struct BiasRuns {
    experiments::BiasComparisonOutput out;
    std::map<std::uint64_t, double> none_seconds;
};

BiasRuns lineworld_bias_runs(const fs::path& work) {
    auto cfg = RunConfig::defaults(ExperimentKind::BiasComparison, "lineworld");
    cfg.seeds = {1, 2, 3, 4, 5};
    cfg.output_dir = (work / "bias_compare").string();
    BiasRuns r{experiments::run_bias_comparison(cfg), {}};
    for (const auto& run : r.out.result.runs) {
        if (run.bias != BiasType::None) continue;
        double secs = 0.0;
        for (const auto& e : run.episodes) secs += e.wall_seconds;
        r.none_seconds[run.seed] = secs;
    }
    return r;
}

Outcome lineworld_convergence(const BiasRuns& runs) {
    int good = 0;
    double slowest = 0.0;
    std::string per_seed;
    for (const auto& run : runs.out.result.runs) {
        if (run.bias != BiasType::None) continue;
        good += run.final_window_mean >= 0.8;
        slowest = std::max(slowest, runs.none_seconds.at(run.seed));
        per_seed += fmt::format(" s{}={:.3f}", run.seed, run.final_window_mean);
    }
    const double optimum = env::optimal_return(env::LineWorld(100));
    return {good >= 4 && slowest < 180.0,
            fmt::format("final-20 mean eval return per seed:{}; {}/5 >= 0.8 (need 4); optimum {}; slowest seed {:.1f}s "
                        "(<180s)",
                        per_seed, good, optimum, slowest)};
}

Outcome bias_ordering(const BiasRuns& runs) {
    const auto& r = runs.out.result;
    const double conf = r.of(BiasType::Confirmatory).final_window_mean;
    const double none = r.of(BiasType::None).final_window_mean;
    const double disc = r.of(BiasType::Disconfirmatory).final_window_mean;
    const bool table = r.summary.size() == 3;
    return {table && conf >= none - 0.02,
            fmt::format("seed-mean final-window return confirmatory={:.4f} none={:.4f} disconfirmatory={:.4f}; "
                        "need confirmatory >= none - 0.02; LanderLite full-scale run is optional and not executed here",
                        conf, none, disc)};
}

// -- 8 ----------------------------------------------------------------------
Outcome k_ablation(const fs::path& work) {
    auto cfg = RunConfig::defaults(ExperimentKind::KAblation, "lineworld");
    cfg.k_values = {0.0, 0.05, 0.1, 0.2};
    cfg.output_dir = (work / "k_ablation").string();
    const auto out = experiments::run_k_ablation(cfg);
    const auto& rows = out.result.rows;
    const auto& ref = out.result.reference;
    const bool shape = rows.size() == 4;
    const bool zero_matches = shape && rows[0].K == 0.0 && rows[0].all_episode_mean == ref.all_episode_mean &&
                              rows[0].final_window_mean == ref.final_window_mean;
    const bool files = fs::exists(fs::path(cfg.output_dir) / "ablation.csv") &&
                       fs::exists(fs::path(cfg.output_dir) / "ablation.svg");
    std::string table;
    std::size_t best = 0;
    for (std::size_t i = 0; i < rows.size(); ++i) {
        table += fmt::format(" K={}:{:.4f}/{:.4f}", rows[i].K, rows[i].all_episode_mean, rows[i].final_window_mean);
        if (rows[i].all_episode_mean > rows[best].all_episode_mean) best = i;
    }
    return {shape && zero_matches && files,
            fmt::format("rows (all-episode/final-window):{} none:{:.4f}/{:.4f}; K=0 equals unbiased exactly: {}; "
                        "table+svg written: {}; best K by all-episode mean (report only): {}",
                        table, ref.all_episode_mean, ref.final_window_mean, zero_matches ? "yes" : "no",
                        files ? "yes" : "no", shape ? rows[best].K : -1.0)};
}

// -- 9 ----------------------------------------------------------------------
Outcome determinism(const fs::path& work) {
    std::string detail;
    bool ok = true;
    auto compare = [&](const std::string& label, auto run, RunConfig cfg) {
        cfg.output_dir = (work / "determinism" / (label + "_a")).string();
        run(cfg);
        cfg.output_dir = (work / "determinism" / (label + "_b")).string();
        cfg.parallel = 3;
        run(cfg);
        const auto a = csv_files(work / "determinism" / (label + "_a"));
        const auto b = csv_files(work / "determinism" / (label + "_b"));
        const bool same = !a.empty() && a == b;
        ok = ok && same;
        detail += fmt::format(" {}: {} csv files {}", label, a.size(), same ? "identical" : "DIFFER");
    };

    auto grid = RunConfig::defaults(ExperimentKind::BanditGrid);
    compare("bandit-grid", [](const RunConfig& c) { experiments::run_bandit_grid(c); }, grid);

    auto bias = RunConfig::defaults(ExperimentKind::BiasComparison, "lineworld");
    bias.seeds = {7, 8};
    bias.agent.episodes = 60;
    compare("bias-compare", [](const RunConfig& c) { experiments::run_bias_comparison(c); }, bias);

    auto kab = RunConfig::defaults(ExperimentKind::KAblation, "lineworld");
    kab.seeds = {7};
    kab.agent.episodes = 60;
    kab.k_values = {0.0, 0.1};
    compare("k-ablation", [](const RunConfig& c) { experiments::run_k_ablation(c); }, kab);

    auto lander = RunConfig::defaults(ExperimentKind::BiasComparison, "landerlite");
    lander.seeds = {3};
    lander.agent.episodes = 5;
    lander.agent.mlp_width = 32;
    compare("bias-compare-landerlite", [](const RunConfig& c) { experiments::run_bias_comparison(c); }, lander);

    // Rerun the full-budget bias comparison from criterion 7 and compare.
    auto full = RunConfig::defaults(ExperimentKind::BiasComparison, "lineworld");
    full.seeds = {1, 2, 3, 4, 5};
    full.output_dir = (work / "determinism" / "bias-compare-rerun").string();
    experiments::run_bias_comparison(full);
    const bool rerun_same = csv_files(work / "bias_compare") == csv_files(full.output_dir);
    ok = ok && rerun_same;
    detail += fmt::format("; full bias-compare rerun vs criterion 7 output: {}", rerun_same ? "identical" : "DIFFER");
    return {ok, "rerun with same config and seed (second run with 3 workers):" + detail};
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"cbrl acceptance suite"};
    std::string work_dir = (fs::temp_directory_path() / "cbrl_acceptance").string();
    app.add_option("--work-dir", work_dir, "directory for experiment artifacts");
    CLI11_PARSE(app, argc, argv);
    const fs::path work(work_dir);
    fs::remove_all(work);
    fs::create_directories(work);

    run_criterion(1, "bandit heatmap trend", [&] { return bandit_trend(work); });
    run_criterion(2, "bias-update algebra", [] { return bias_algebra(); });
    run_criterion(3, "gradient correctness", [] { return gradient_check(); });
    run_criterion(4, "target soft update", [] { return soft_update_check(); });
    run_criterion(5, "replay buffer", [] { return replay_check(); });

    std::optional<BiasRuns> runs;
    std::string runs_error;
    try {
        runs = lineworld_bias_runs(work);
    } catch (const std::exception& e) {
        runs_error = e.what();
    }
    run_criterion(6, "LineWorld convergence", [&]() -> Outcome {
        if (!runs) return {false, "bias comparison failed: " + runs_error};
        return lineworld_convergence(*runs);
    });
    run_criterion(7, "bias ordering", [&]() -> Outcome {
        if (!runs) return {false, "bias comparison failed: " + runs_error};
        return bias_ordering(*runs);
    });
    run_criterion(8, "K-ablation pipeline", [&] { return k_ablation(work); });
    run_criterion(9, "determinism", [&] { return determinism(work); });

    fmt::print("{} of 9 criteria passed\n", 9 - failures);
    return failures == 0 ? 0 : 1;
}
