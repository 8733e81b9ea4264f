#include "rrmar/replicate.hpp"

#include <cmath>
#include <fstream>
#include <stdexcept>

#include "rrmar/errors.hpp"
#include "rrmar/io.hpp"
#include "rrmar/parallel.hpp"

namespace rrmar {

CriterionSummary summarize(const std::vector<RepOutcome>& reps,
                           const std::array<Index, 4>& true_ranks, Index true_p, Criterion kind) {
    CriterionSummary s;
    Index n = 0;
    for (const RepOutcome& r : reps) {
        if (!r.ok) continue;
        ++n;
        const auto& ranks = kind == Criterion::AIC ? r.aic_ranks : r.bic_ranks;
        const Index p = kind == Criterion::AIC ? r.aic_p : r.bic_p;
        for (int k = 0; k < 4; ++k) {
            s.avg_rank[k] += static_cast<double>(ranks[k]);
            if (ranks[k] == true_ranks[k]) s.freq_correct[k] += 1.0;
        }
        s.avg_p += static_cast<double>(p);
        if (p == true_p) s.freq_p += 1.0;
    }
    if (n == 0) return s;
    const double dn = static_cast<double>(n);
    for (int k = 0; k < 4; ++k) {
        s.avg_rank[k] /= dn;
        s.freq_correct[k] /= dn;
    }
    s.avg_p /= dn;
    s.freq_p /= dn;
    for (const RepOutcome& r : reps) {
        if (!r.ok) continue;
        const auto& ranks = kind == Criterion::AIC ? r.aic_ranks : r.bic_ranks;
        for (int k = 0; k < 4; ++k) {
            const double d = static_cast<double>(ranks[k]) - s.avg_rank[k];
            s.std_rank[k] += d * d;
        }
    }
    for (int k = 0; k < 4; ++k) s.std_rank[k] = std::sqrt(s.std_rank[k] / dn);
    return s;
}

ReplicationResult replicate_sim(const ScenarioSpec& spec, const FitConfig& config, int threads) {
    if (spec.reps < 1) throw std::invalid_argument("replicate_sim: reps must be >= 1");
    if (!model_ranks_feasible(spec.n1, spec.n2, spec.true_ranks)) {
        throw std::invalid_argument("replicate_sim: infeasible true ranks");
    }

    ReplicationResult result;
    result.reps.resize(static_cast<std::size_t>(spec.reps));

    parallel_for(static_cast<std::size_t>(spec.reps), threads, [&](std::size_t r) {
        RepOutcome& out = result.reps[r];
        out.seed = spec.seed + static_cast<std::uint64_t>(r);
        try {
            SimulationSpec sim;
            sim.n1 = spec.n1;
            sim.n2 = spec.n2;
            sim.ranks = spec.true_ranks;
            sim.p = spec.p;
            sim.T = spec.T;
            sim.burn_in = spec.burn_in;
            sim.snr_target = spec.snr;
            sim.noise_scale = spec.noise;
            sim.seed = out.seed;
            const SimulationResult data = simulate(sim);

            const SelectionResult sel = select_rank_lag(data.series, spec.max_lag, config, 1);
            if (sel.best_aic < 0 || sel.best_bic < 0) {
                out.note = "no usable selection entry";
                return;
            }
            const SelectionEntry& a = sel.best(Criterion::AIC);
            const SelectionEntry& b = sel.best(Criterion::BIC);
            out.aic_ranks = a.ranks;
            out.aic_p = a.p;
            out.bic_ranks = b.ranks;
            out.bic_p = b.p;
            out.ok = true;
        } catch (const std::exception& e) {
            out.note = e.what();
        }
    });

    for (const RepOutcome& r : result.reps) {
        if (!r.ok) ++result.failures;
    }
    result.aic = summarize(result.reps, spec.true_ranks, spec.p, Criterion::AIC);
    result.bic = summarize(result.reps, spec.true_ranks, spec.p, Criterion::BIC);
    return result;
}

namespace {

void summary_rows(std::ofstream& out, const char* name, const CriterionSummary& s) {
    auto row = [&](const char* measure, const std::array<double, 4>& v, double pv) {
        out << name << ',' << measure;
        for (double x : v) out << ',' << format_double(x);
        out << ',' << format_double(pv) << '\n';
    };
    row("avg", s.avg_rank, s.avg_p);
    row("std", s.std_rank, 0.0);
    row("freq_correct", s.freq_correct, s.freq_p);
}

}  // namespace

void write_replication_summary_csv(const std::string& path, const ReplicationResult& result) {
    std::ofstream out(path);
    if (!out) throw DataError("cannot write file: " + path);
    out << "criterion,measure,r1,r2,r3,r4,p\n";
    summary_rows(out, "AIC", result.aic);
    summary_rows(out, "BIC", result.bic);
}

void write_replication_summary_json(const std::string& path, const ReplicationResult& result) {
    auto to_json_text = [](const CriterionSummary& s) {
        std::string t = "{\"avg_rank\":[";
        for (int k = 0; k < 4; ++k) t += (k ? "," : "") + format_double(s.avg_rank[k]);
        t += "],\"std_rank\":[";
        for (int k = 0; k < 4; ++k) t += (k ? "," : "") + format_double(s.std_rank[k]);
        t += "],\"freq_correct\":[";
        for (int k = 0; k < 4; ++k) t += (k ? "," : "") + format_double(s.freq_correct[k]);
        t += "],\"avg_p\":" + format_double(s.avg_p) + ",\"freq_p\":" + format_double(s.freq_p) + "}";
        return t;
    };
    std::ofstream out(path);
    if (!out) throw DataError("cannot write file: " + path);
    out << "{\"aic\":" << to_json_text(result.aic) << ",\"bic\":" << to_json_text(result.bic)
        << ",\"failures\":" << result.failures << "}\n";
}

void write_replication_detail_csv(const std::string& path, const ReplicationResult& result) {
    std::ofstream out(path);
    if (!out) throw DataError("cannot write file: " + path);
    out << "rep,seed,ok,aic_r1,aic_r2,aic_r3,aic_r4,aic_p,bic_r1,bic_r2,bic_r3,bic_r4,bic_p,note\n";
    for (std::size_t r = 0; r < result.reps.size(); ++r) {
        const RepOutcome& o = result.reps[r];
        out << r << ',' << o.seed << ',' << (o.ok ? "true" : "false");
        for (Index v : o.aic_ranks) out << ',' << v;
        out << ',' << o.aic_p;
        for (Index v : o.bic_ranks) out << ',' << v;
        out << ',' << o.bic_p << ',' << o.note << '\n';
    }
}

}  // namespace rrmar
