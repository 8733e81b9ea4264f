#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "rrmar/analysis.hpp"
#include "rrmar/estimator.hpp"
#include "rrmar/model.hpp"
#include "rrmar/selection.hpp"
#include "rrmar/series.hpp"

namespace rrmar {

// Flat key-value config document: `key = value` lines, '#' comments.
class Config {
public:
    static Config from_file(const std::string& path);
    static Config from_string(const std::string& text);

    bool has(const std::string& key) const;
    std::string get_string(const std::string& key) const;
    std::string get_string(const std::string& key, const std::string& fallback) const;
    long long get_int(const std::string& key) const;
    long long get_int(const std::string& key, long long fallback) const;
    double get_double(const std::string& key) const;
    double get_double(const std::string& key, double fallback) const;
    bool get_bool(const std::string& key, bool fallback) const;
    // Whitespace-separated integer list of exactly `n` entries.
    std::vector<long long> get_ints(const std::string& key, std::size_t n) const;

private:
    std::map<std::string, std::string> values_;
};

// Long-format CSV ingestion: header `time,row,col,value`; row/col labels map
// to indices by first appearance, times sort ascending (numerically when all
// are integers). Missing cells, duplicates and non-numeric values raise
// DataError with the offending lines.
struct IngestResult {
    MatrixSeries series;
    std::vector<std::string> time_labels;
};
IngestResult ingest_csv(const std::string& path, bool demean = true);

void write_series_csv(const std::string& path, const MatrixSeries& series,
                      const std::vector<std::string>& time_labels = {});

// Model JSON document: shape metadata, factors, per-lag cores, sigma_e and
// optional fit diagnostics.
struct FitDiagnostics {
    std::vector<double> loss_trace;
    Index iterations = 0;
    bool converged = false;
};
void write_model_json(const std::string& path, const RRMARModel& m,
                      const std::optional<FitDiagnostics>& diag = std::nullopt,
                      const std::vector<std::string>& row_labels = {},
                      const std::vector<std::string>& col_labels = {});
RRMARModel read_model_json(const std::string& path);

void write_selection_csv(const std::string& path, const SelectionResult& result);
void write_selection_json(const std::string& path, const SelectionResult& result);
void write_selection_best_json(const std::string& path, const SelectionResult& result);

// ComovementReport as tidy CSV tables under `dir`.
void write_comovement(const std::string& dir, const ComovementReport& rep,
                      const RRMARModel& m, const MatrixSeries& y);

// Deterministic shortest-exact text form of a double ("%.17g").
std::string format_double(double v);

}  // namespace rrmar
