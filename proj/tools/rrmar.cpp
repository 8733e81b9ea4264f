// Command-line front end: simulate, fit, select, analyze and replicate-sim
// workflows over long-format CSV panels and JSON model files.

#include <CLI11.hpp>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include "rrmar/analysis.hpp"
#include "rrmar/errors.hpp"
#include "rrmar/estimator.hpp"
#include "rrmar/io.hpp"
#include "rrmar/model.hpp"
#include "rrmar/parallel.hpp"
#include "rrmar/replicate.hpp"
#include "rrmar/selection.hpp"

namespace {

using namespace rrmar;

constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitData = 3;
constexpr int kExitNumerical = 4;

struct CommonOpts {
    std::string config_path;
    std::string out_dir = ".";
    std::int64_t seed = -1;
    int threads = 0;
    bool no_demean = false;
    std::int64_t pivot = -1;
};

void add_common(CLI::App* cmd, CommonOpts& opts, bool needs_config = true) {
    auto* c = cmd->add_option("--config", opts.config_path, "config file (key = value lines)");
    if (needs_config) c->required();
    cmd->add_option("--out", opts.out_dir, "output directory");
    cmd->add_option("--seed", opts.seed, "RNG seed (overrides config)");
    cmd->add_option("--threads", opts.threads, "worker count (default: RRMAR_THREADS or hardware)");
    cmd->add_flag("--no-demean", opts.no_demean, "skip per-series demeaning on ingestion");
    cmd->add_option("--pivot", opts.pivot, "normalization pivot row for analyze (0-based)");
}

void ensure_out_dir(const std::string& dir) {
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec) throw ConfigError("cannot create output directory: " + dir);
}

std::uint64_t require_seed(const Config& cfg, const CommonOpts& opts) {
    if (opts.seed >= 0) return static_cast<std::uint64_t>(opts.seed);
    if (cfg.has("seed")) return static_cast<std::uint64_t>(cfg.get_int("seed"));
    throw ConfigError("a seed is required (--seed or config key 'seed')");
}

std::array<Index, 4> ranks_from(const Config& cfg, const char* key = "ranks") {
    const auto v = cfg.get_ints(key, 4);
    return {static_cast<Index>(v[0]), static_cast<Index>(v[1]), static_cast<Index>(v[2]),
            static_cast<Index>(v[3])};
}

FitConfig fit_config_from(const Config& cfg) {
    FitConfig fc;
    fc.step_size = cfg.get_double("step_size", fc.step_size);
    fc.tolerance = cfg.get_double("tolerance", fc.tolerance);
    fc.max_iterations = static_cast<int>(cfg.get_int("max_iterations", fc.max_iterations));
    if (fc.step_size <= 0 || fc.tolerance <= 0 || fc.max_iterations < 1) {
        throw ConfigError("step_size and tolerance must be positive, max_iterations >= 1");
    }
    return fc;
}

IngestResult load_data(const Config& cfg, const CommonOpts& opts) {
    const std::string path = cfg.get_string("data");
    const bool demean = !opts.no_demean && cfg.get_bool("demean", true);
    return ingest_csv(path, demean);
}

int cmd_simulate(const CommonOpts& opts) {
    const Config cfg = Config::from_file(opts.config_path);
    SimulationSpec spec;
    spec.n1 = static_cast<Index>(cfg.get_int("n1"));
    spec.n2 = static_cast<Index>(cfg.get_int("n2"));
    spec.ranks = ranks_from(cfg);
    spec.p = static_cast<Index>(cfg.get_int("p", 1));
    spec.T = static_cast<Index>(cfg.get_int("T"));
    spec.burn_in = static_cast<Index>(cfg.get_int("burn_in", 50));
    spec.snr_target = cfg.get_double("snr", 0.7);
    spec.noise_scale = cfg.get_double("noise", 1.0);
    spec.seed = require_seed(cfg, opts);
    ensure_out_dir(opts.out_dir);

    const SimulationResult sim = simulate(spec);
    write_series_csv(opts.out_dir + "/series.csv", sim.series);
    write_model_json(opts.out_dir + "/truth_model.json", sim.truth, std::nullopt,
                     sim.series.row_labels(), sim.series.col_labels());
    std::cout << "wrote " << opts.out_dir << "/series.csv (T=" << sim.series.length() << ", "
              << sim.series.n1() << "x" << sim.series.n2() << ") and truth_model.json\n";
    return kExitOk;
}

int cmd_fit(const CommonOpts& opts) {
    const Config cfg = Config::from_file(opts.config_path);
    const IngestResult data = load_data(cfg, opts);
    const auto ranks = ranks_from(cfg);
    const Index p = static_cast<Index>(cfg.get_int("p", 1));
    const FitConfig fc = fit_config_from(cfg);
    ensure_out_dir(opts.out_dir);

    const FitResult fr = fit(data.series, ranks, p, fc);
    FitDiagnostics diag{fr.loss_trace, fr.iterations, fr.converged};
    write_model_json(opts.out_dir + "/model.json", fr.model, diag, data.series.row_labels(),
                     data.series.col_labels());
    std::cout << "fit " << (fr.converged ? "converged" : "stopped") << " after " << fr.iterations
              << " iterations, final loss " << format_double(fr.loss_trace.back()) << '\n'
              << "wrote " << opts.out_dir << "/model.json\n";
    return kExitOk;
}

int cmd_select(const CommonOpts& opts) {
    const Config cfg = Config::from_file(opts.config_path);
    const IngestResult data = load_data(cfg, opts);
    const Index max_lag = static_cast<Index>(cfg.get_int("max_lag", 1));
    const FitConfig fc = fit_config_from(cfg);
    const std::string format = cfg.get_string("format", "csv");
    const int threads = resolve_threads(opts.threads);
    ensure_out_dir(opts.out_dir);

    const SelectionResult sel = select_rank_lag(data.series, max_lag, fc, threads);
    if (format == "json") {
        write_selection_json(opts.out_dir + "/selection_grid.json", sel);
    } else if (format == "csv") {
        write_selection_csv(opts.out_dir + "/selection_grid.csv", sel);
    } else {
        throw ConfigError("format must be csv or json");
    }
    write_selection_best_json(opts.out_dir + "/selection_best.json", sel);

    Index failed = 0;
    for (const auto& e : sel.entries) {
        if (!e.converged && !e.note.empty()) ++failed;
    }
    if (failed > 0) {
        std::ofstream manifest(opts.out_dir + "/selection_failures.csv");
        manifest << "r1,r2,r3,r4,p,note\n";
        for (const auto& e : sel.entries) {
            if (!e.converged && !e.note.empty()) {
                manifest << e.ranks[0] << ',' << e.ranks[1] << ',' << e.ranks[2] << ','
                         << e.ranks[3] << ',' << e.p << ',' << e.note << '\n';
            }
        }
    }
    auto report = [&](const char* name, const SelectionEntry& e) {
        std::cout << name << ": ranks (" << e.ranks[0] << ", " << e.ranks[1] << ", " << e.ranks[2]
                  << ", " << e.ranks[3] << "), p = " << e.p << '\n';
    };
    if (sel.best_aic >= 0) report("AIC", sel.best(Criterion::AIC));
    if (sel.best_bic >= 0) report("BIC", sel.best(Criterion::BIC));
    return kExitOk;
}

int cmd_analyze(const CommonOpts& opts) {
    const Config cfg = Config::from_file(opts.config_path);
    const IngestResult data = load_data(cfg, opts);
    const RRMARModel model = read_model_json(cfg.get_string("model"));
    const Index pivot_row = opts.pivot >= 0 ? static_cast<Index>(opts.pivot)
                                            : static_cast<Index>(cfg.get_int("pivot_row", -1));
    const Index pivot_col = static_cast<Index>(cfg.get_int("pivot_col", -1));
    ensure_out_dir(opts.out_dir);

    const ComovementReport rep = comovement_report(model, data.series, pivot_row, pivot_col);
    write_comovement(opts.out_dir, rep, model, data.series);
    if (rep.delta.cols() == 0) {
        std::cout << "row dimension is full rank (r1 = N1): no row-side co-movement relations\n";
    }
    if (rep.gamma.cols() == 0) {
        std::cout << "column dimension is full rank (r2 = N2): no column-side co-movement relations\n";
    }
    std::cout << "wrote co-movement tables to " << opts.out_dir << '\n';
    return kExitOk;
}

int cmd_replicate(const CommonOpts& opts) {
    const Config cfg = Config::from_file(opts.config_path);
    ScenarioSpec spec;
    spec.n1 = static_cast<Index>(cfg.get_int("n1"));
    spec.n2 = static_cast<Index>(cfg.get_int("n2"));
    spec.true_ranks = ranks_from(cfg);
    spec.p = static_cast<Index>(cfg.get_int("p", 1));
    spec.T = static_cast<Index>(cfg.get_int("T"));
    spec.reps = static_cast<Index>(cfg.get_int("reps"));
    spec.max_lag = static_cast<Index>(cfg.get_int("max_lag", 1));
    spec.snr = cfg.get_double("snr", 0.7);
    spec.noise = cfg.get_double("noise", 1.0);
    spec.burn_in = static_cast<Index>(cfg.get_int("burn_in", 50));
    spec.seed = require_seed(cfg, opts);
    const FitConfig fc = fit_config_from(cfg);
    const std::string format = cfg.get_string("format", "csv");
    const int threads = resolve_threads(opts.threads);
    ensure_out_dir(opts.out_dir);

    const ReplicationResult result = replicate_sim(spec, fc, threads);
    if (format == "json") {
        write_replication_summary_json(opts.out_dir + "/replicate_summary.json", result);
    } else if (format == "csv") {
        write_replication_summary_csv(opts.out_dir + "/replicate_summary.csv", result);
    } else {
        throw ConfigError("format must be csv or json");
    }
    write_replication_detail_csv(opts.out_dir + "/replicate_detail.csv", result);

    auto line = [](const char* name, const CriterionSummary& s) {
        std::cout << name << " freq correct: (" << s.freq_correct[0] << ", " << s.freq_correct[1]
                  << ", " << s.freq_correct[2] << ", " << s.freq_correct[3] << ")\n";
    };
    line("AIC", result.aic);
    line("BIC", result.bic);
    if (result.failures > 0) {
        std::cout << result.failures << " replication(s) failed; see replicate_detail.csv\n";
    }
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Reduced-rank matrix autoregression toolkit"};
    app.require_subcommand(1);

    CommonOpts opts;
    auto* sim = app.add_subcommand("simulate", "generate a seeded series from the model");
    auto* fit_cmd = app.add_subcommand("fit", "estimate a model at fixed ranks and lag order");
    auto* select = app.add_subcommand("select", "joint rank-lag selection by AIC/BIC");
    auto* analyze = app.add_subcommand("analyze", "co-movement report for a fitted model");
    auto* replicate = app.add_subcommand("replicate-sim", "Monte Carlo rank-selection study");
    for (auto* cmd : {sim, fit_cmd, select, analyze, replicate}) add_common(cmd, opts);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? kExitOk : kExitConfig;
    }

    try {
        if (sim->parsed()) return cmd_simulate(opts);
        if (fit_cmd->parsed()) return cmd_fit(opts);
        if (select->parsed()) return cmd_select(opts);
        if (analyze->parsed()) return cmd_analyze(opts);
        if (replicate->parsed()) return cmd_replicate(opts);
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return kExitConfig;
    } catch (const DataError& e) {
        std::cerr << "data error: " << e.what() << '\n';
        return kExitData;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitNumerical;
    }
    return kExitConfig;
}
