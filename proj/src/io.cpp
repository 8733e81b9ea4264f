#include "rrmar/io.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <json.hpp>
#include <sstream>
#include <unordered_map>

#include "rrmar/errors.hpp"

namespace rrmar {

using nlohmann::json;

std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

namespace {

std::string trim(const std::string& s) {
    std::size_t b = 0, e = s.size();
    while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
    while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
    return s.substr(b, e - b);
}

bool parse_double(const std::string& s, double& out) {
    const std::string t = trim(s);
    if (t.empty()) return false;
    char* end = nullptr;
    out = std::strtod(t.c_str(), &end);
    return end == t.c_str() + t.size();
}

bool parse_int(const std::string& s, long long& out) {
    const std::string t = trim(s);
    if (t.empty()) return false;
    char* end = nullptr;
    out = std::strtoll(t.c_str(), &end, 10);
    return end == t.c_str() + t.size();
}

std::ifstream open_or_throw(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open file: " + path);
    return in;
}

std::ofstream create_or_throw(const std::string& path) {
    std::ofstream out(path);
    if (!out) throw DataError("cannot write file: " + path);
    return out;
}

}  // namespace

Config Config::from_string(const std::string& text) {
    Config cfg;
    std::istringstream in(text);
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const std::size_t hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        const std::string t = trim(line);
        if (t.empty()) continue;
        const std::size_t eq = t.find('=');
        if (eq == std::string::npos) {
            throw ConfigError("config line " + std::to_string(line_no) + ": expected key = value");
        }
        const std::string key = trim(t.substr(0, eq));
        const std::string value = trim(t.substr(eq + 1));
        if (key.empty()) {
            throw ConfigError("config line " + std::to_string(line_no) + ": empty key");
        }
        cfg.values_[key] = value;
    }
    return cfg;
}

Config Config::from_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file: " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return from_string(buf.str());
}

bool Config::has(const std::string& key) const { return values_.count(key) > 0; }

std::string Config::get_string(const std::string& key) const {
    auto it = values_.find(key);
    if (it == values_.end()) throw ConfigError("missing config key: " + key);
    return it->second;
}

std::string Config::get_string(const std::string& key, const std::string& fallback) const {
    auto it = values_.find(key);
    return it == values_.end() ? fallback : it->second;
}

long long Config::get_int(const std::string& key) const {
    long long v = 0;
    if (!parse_int(get_string(key), v)) throw ConfigError("config key is not an integer: " + key);
    return v;
}

long long Config::get_int(const std::string& key, long long fallback) const {
    return has(key) ? get_int(key) : fallback;
}

double Config::get_double(const std::string& key) const {
    double v = 0.0;
    if (!parse_double(get_string(key), v)) throw ConfigError("config key is not a number: " + key);
    return v;
}

double Config::get_double(const std::string& key, double fallback) const {
    return has(key) ? get_double(key) : fallback;
}

bool Config::get_bool(const std::string& key, bool fallback) const {
    if (!has(key)) return fallback;
    std::string v = get_string(key);
    std::transform(v.begin(), v.end(), v.begin(), [](unsigned char c) { return std::tolower(c); });
    if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
    if (v == "false" || v == "0" || v == "no" || v == "off") return false;
    throw ConfigError("config key is not a boolean: " + key);
}

std::vector<long long> Config::get_ints(const std::string& key, std::size_t n) const {
    std::istringstream in(get_string(key));
    std::vector<long long> out;
    std::string token;
    while (in >> token) {
        long long v = 0;
        if (!parse_int(token, v)) throw ConfigError("config key is not an integer list: " + key);
        out.push_back(v);
    }
    if (out.size() != n) {
        throw ConfigError("config key " + key + " must have exactly " + std::to_string(n) +
                          " entries");
    }
    return out;
}

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> fields;
    std::string field;
    std::istringstream in(line);
    while (std::getline(in, field, ',')) fields.push_back(trim(field));
    if (!line.empty() && line.back() == ',') fields.push_back("");
    return fields;
}

}  // namespace

IngestResult ingest_csv(const std::string& path, bool demean) {
    std::ifstream in = open_or_throw(path);
    std::string line;
    int line_no = 0;

    if (!std::getline(in, line)) throw DataError(path + ": empty file");
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    {
        auto header = split_csv_line(line);
        if (header.size() != 4 || header[0] != "time" || header[1] != "row" ||
            header[2] != "col" || header[3] != "value") {
            throw DataError(path + ": expected header 'time,row,col,value'");
        }
    }

    struct Cell {
        std::string time, row, col;
        double value;
    };
    std::vector<Cell> cells;
    std::vector<std::string> times, rows, cols;
    std::unordered_map<std::string, Index> time_ix, row_ix, col_ix;
    bool all_int_times = true;

    auto intern = [](const std::string& label, std::vector<std::string>& labels,
                     std::unordered_map<std::string, Index>& ix) {
        auto it = ix.find(label);
        if (it != ix.end()) return it->second;
        const Index id = static_cast<Index>(labels.size());
        labels.push_back(label);
        ix.emplace(label, id);
        return id;
    };

    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (trim(line).empty()) continue;
        auto fields = split_csv_line(line);
        if (fields.size() != 4) {
            throw DataError(path + " line " + std::to_string(line_no) + ": expected 4 fields");
        }
        double value = 0.0;
        if (!parse_double(fields[3], value)) {
            throw DataError(path + " line " + std::to_string(line_no) + ": non-numeric value '" +
                            fields[3] + "'");
        }
        long long dummy = 0;
        if (!parse_int(fields[0], dummy)) all_int_times = false;
        intern(fields[0], times, time_ix);
        intern(fields[1], rows, row_ix);
        intern(fields[2], cols, col_ix);
        cells.push_back(Cell{fields[0], fields[1], fields[2], value});
    }
    if (cells.empty()) throw DataError(path + ": no data rows");

    // Chronological order: numeric when every stamp is an integer, otherwise
    // lexicographic (ISO dates sort correctly).
    std::sort(times.begin(), times.end(), [&](const std::string& a, const std::string& b) {
        if (all_int_times) {
            long long ia = 0, ib = 0;
            parse_int(a, ia);
            parse_int(b, ib);
            return ia < ib;
        }
        return a < b;
    });
    for (std::size_t i = 0; i < times.size(); ++i) time_ix[times[i]] = static_cast<Index>(i);

    const Index n1 = static_cast<Index>(rows.size());
    const Index n2 = static_cast<Index>(cols.size());
    const Index t_len = static_cast<Index>(times.size());

    DenseTensor values({n1, n2, t_len});
    std::vector<char> seen(static_cast<std::size_t>(n1 * n2 * t_len), 0);
    for (const Cell& c : cells) {
        const Index i = row_ix[c.row], j = col_ix[c.col], t = time_ix[c.time];
        const std::size_t flat = static_cast<std::size_t>(i + n1 * j + n1 * n2 * t);
        if (seen[flat]) {
            throw DataError(path + ": duplicate cell (" + c.time + ", " + c.row + ", " + c.col + ")");
        }
        seen[flat] = 1;
        values({i, j, t}) = c.value;
    }

    std::vector<std::string> gaps;
    for (Index t = 0; t < t_len; ++t) {
        for (Index j = 0; j < n2; ++j) {
            for (Index i = 0; i < n1; ++i) {
                if (!seen[static_cast<std::size_t>(i + n1 * j + n1 * n2 * t)]) {
                    gaps.push_back("(" + times[static_cast<std::size_t>(t)] + ", " +
                                   rows[static_cast<std::size_t>(i)] + ", " +
                                   cols[static_cast<std::size_t>(j)] + ")");
                }
            }
        }
    }
    if (!gaps.empty()) {
        std::string msg = path + ": " + std::to_string(gaps.size()) + " missing cell(s):";
        const std::size_t shown = std::min<std::size_t>(gaps.size(), 50);
        for (std::size_t i = 0; i < shown; ++i) msg += " " + gaps[i];
        if (gaps.size() > shown) msg += " ...";
        throw DataError(msg);
    }

    MatrixSeries series(std::move(values), rows, cols);
    if (demean) series.demean();
    return IngestResult{std::move(series), std::move(times)};
}

void write_series_csv(const std::string& path, const MatrixSeries& series,
                      const std::vector<std::string>& time_labels) {
    std::ofstream out = create_or_throw(path);
    out << "time,row,col,value\n";
    for (Index t = 0; t < series.length(); ++t) {
        const std::string time = time_labels.empty() ? std::to_string(t + 1)
                                                     : time_labels[static_cast<std::size_t>(t)];
        for (Index i = 0; i < series.n1(); ++i) {
            for (Index j = 0; j < series.n2(); ++j) {
                out << time << ',' << series.row_labels()[static_cast<std::size_t>(i)] << ','
                    << series.col_labels()[static_cast<std::size_t>(j)] << ','
                    << format_double(series.at(i, j, t)) << '\n';
            }
        }
    }
}

namespace {

json matrix_to_json(const Matrix& m) {
    json rows = json::array();
    for (Index i = 0; i < m.rows(); ++i) {
        json row = json::array();
        for (Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
        rows.push_back(std::move(row));
    }
    return rows;
}

Matrix matrix_from_json(const json& j) {
    const Index rows = static_cast<Index>(j.size());
    if (rows == 0) return Matrix(0, 0);
    const Index cols = static_cast<Index>(j.at(0).size());
    Matrix m(rows, cols);
    for (Index i = 0; i < rows; ++i) {
        if (static_cast<Index>(j.at(i).size()) != cols) {
            throw DataError("model json: ragged matrix rows");
        }
        for (Index c = 0; c < cols; ++c) m(i, c) = j.at(i).at(c).get<double>();
    }
    return m;
}

json core_to_json(const DenseTensor& core) {
    // Nested [r1][r2][r3][r4] arrays.
    json a1 = json::array();
    for (Index i1 = 0; i1 < core.dim(0); ++i1) {
        json a2 = json::array();
        for (Index i2 = 0; i2 < core.dim(1); ++i2) {
            json a3 = json::array();
            for (Index i3 = 0; i3 < core.dim(2); ++i3) {
                json a4 = json::array();
                for (Index i4 = 0; i4 < core.dim(3); ++i4) {
                    a4.push_back(core({i1, i2, i3, i4}));
                }
                a3.push_back(std::move(a4));
            }
            a2.push_back(std::move(a3));
        }
        a1.push_back(std::move(a2));
    }
    return a1;
}

DenseTensor core_from_json(const json& j, const std::array<Index, 4>& ranks) {
    DenseTensor core({ranks[0], ranks[1], ranks[2], ranks[3]});
    for (Index i1 = 0; i1 < ranks[0]; ++i1) {
        for (Index i2 = 0; i2 < ranks[1]; ++i2) {
            for (Index i3 = 0; i3 < ranks[2]; ++i3) {
                for (Index i4 = 0; i4 < ranks[3]; ++i4) {
                    core({i1, i2, i3, i4}) =
                        j.at(i1).at(i2).at(i3).at(i4).get<double>();
                }
            }
        }
    }
    return core;
}

}  // namespace

void write_model_json(const std::string& path, const RRMARModel& m,
                      const std::optional<FitDiagnostics>& diag,
                      const std::vector<std::string>& row_labels,
                      const std::vector<std::string>& col_labels) {
    json doc;
    doc["n1"] = m.n1();
    doc["n2"] = m.n2();
    doc["ranks"] = {m.ranks[0], m.ranks[1], m.ranks[2], m.ranks[3]};
    doc["p"] = m.p;
    doc["u1"] = matrix_to_json(m.u1);
    doc["u2"] = matrix_to_json(m.u2);
    doc["u3"] = matrix_to_json(m.u3);
    doc["u4"] = matrix_to_json(m.u4);
    json cores = json::array();
    for (const auto& core : m.cores) cores.push_back(core_to_json(core));
    doc["cores"] = std::move(cores);
    doc["sigma_e"] = matrix_to_json(m.sigma_e);
    if (!row_labels.empty()) doc["row_labels"] = row_labels;
    if (!col_labels.empty()) doc["col_labels"] = col_labels;
    if (diag) {
        doc["fit"] = {{"loss_trace", diag->loss_trace},
                      {"iterations", diag->iterations},
                      {"converged", diag->converged}};
    }
    std::ofstream out = create_or_throw(path);
    out << doc.dump(2) << '\n';
}

RRMARModel read_model_json(const std::string& path) {
    std::ifstream in = open_or_throw(path);
    json doc;
    try {
        in >> doc;
    } catch (const json::exception& e) {
        throw DataError(path + ": invalid JSON: " + e.what());
    }
    try {
        RRMARModel m;
        m.ranks = {doc.at("ranks").at(0).get<Index>(), doc.at("ranks").at(1).get<Index>(),
                   doc.at("ranks").at(2).get<Index>(), doc.at("ranks").at(3).get<Index>()};
        m.p = doc.at("p").get<Index>();
        m.u1 = matrix_from_json(doc.at("u1"));
        m.u2 = matrix_from_json(doc.at("u2"));
        m.u3 = matrix_from_json(doc.at("u3"));
        m.u4 = matrix_from_json(doc.at("u4"));
        for (const auto& cj : doc.at("cores")) m.cores.push_back(core_from_json(cj, m.ranks));
        if (static_cast<Index>(m.cores.size()) != m.p) {
            throw DataError(path + ": core count does not match lag order");
        }
        m.sigma_e = matrix_from_json(doc.at("sigma_e"));
        return m;
    } catch (const json::exception& e) {
        throw DataError(path + ": malformed model document: " + e.what());
    }
}

namespace {

void write_selection_row(std::ofstream& out, const SelectionEntry& e) {
    out << e.ranks[0] << ',' << e.ranks[1] << ',' << e.ranks[2] << ',' << e.ranks[3] << ','
        << e.p << ',' << e.params << ',' << format_double(e.aic) << ',' << format_double(e.bic)
        << ',' << format_double(e.loglik_proxy) << ',' << (e.converged ? "true" : "false") << ','
        << e.note << '\n';
}

json entry_to_json(const SelectionEntry& e) {
    return json{{"ranks", {e.ranks[0], e.ranks[1], e.ranks[2], e.ranks[3]}},
                {"p", e.p},
                {"params", e.params},
                {"aic", e.aic},
                {"bic", e.bic},
                {"loglik_proxy", e.loglik_proxy},
                {"converged", e.converged},
                {"note", e.note}};
}

}  // namespace

void write_selection_csv(const std::string& path, const SelectionResult& result) {
    std::ofstream out = create_or_throw(path);
    out << "r1,r2,r3,r4,p,params,aic,bic,loglik_proxy,converged,note\n";
    for (const auto& e : result.entries) write_selection_row(out, e);
}

void write_selection_json(const std::string& path, const SelectionResult& result) {
    json doc;
    json entries = json::array();
    for (const auto& e : result.entries) entries.push_back(entry_to_json(e));
    doc["entries"] = std::move(entries);
    doc["best_aic"] = result.best_aic >= 0 ? entry_to_json(result.best(Criterion::AIC)) : json();
    doc["best_bic"] = result.best_bic >= 0 ? entry_to_json(result.best(Criterion::BIC)) : json();
    std::ofstream out = create_or_throw(path);
    out << doc.dump(2) << '\n';
}

void write_selection_best_json(const std::string& path, const SelectionResult& result) {
    json doc;
    doc["best_aic"] = result.best_aic >= 0 ? entry_to_json(result.best(Criterion::AIC)) : json();
    doc["best_bic"] = result.best_bic >= 0 ? entry_to_json(result.best(Criterion::BIC)) : json();
    std::ofstream out = create_or_throw(path);
    out << doc.dump(2) << '\n';
}

void write_comovement(const std::string& dir, const ComovementReport& rep, const RRMARModel& m,
                      const MatrixSeries& y) {
    const auto& rl = y.row_labels();
    const auto& cl = y.col_labels();

    {
        std::ofstream out = create_or_throw(dir + "/null_rows.csv");
        out << "kind,row,column,value\n";
        for (Index j = 0; j < rep.delta.cols(); ++j) {
            for (Index i = 0; i < rep.delta.rows(); ++i) {
                out << "delta," << rl[static_cast<std::size_t>(i)] << ',' << j + 1 << ','
                    << format_double(rep.delta(i, j)) << '\n';
            }
        }
        for (Index j = 0; j < rep.delta_star.cols(); ++j) {
            for (Index i = 0; i < rep.delta_star.rows(); ++i) {
                out << "delta_star," << rl[static_cast<std::size_t>(i)] << ',' << j + 1 << ','
                    << format_double(rep.delta_star(i, j)) << '\n';
            }
        }
    }
    {
        std::ofstream out = create_or_throw(dir + "/null_cols.csv");
        out << "kind,col,column,value\n";
        for (Index j = 0; j < rep.gamma.cols(); ++j) {
            for (Index i = 0; i < rep.gamma.rows(); ++i) {
                out << "gamma," << cl[static_cast<std::size_t>(i)] << ',' << j + 1 << ','
                    << format_double(rep.gamma(i, j)) << '\n';
            }
        }
        for (Index j = 0; j < rep.gamma_star.cols(); ++j) {
            for (Index i = 0; i < rep.gamma_star.rows(); ++i) {
                out << "gamma_star," << cl[static_cast<std::size_t>(i)] << ',' << j + 1 << ','
                    << format_double(rep.gamma_star(i, j)) << '\n';
            }
        }
    }
    {
        std::ofstream out = create_or_throw(dir + "/response_factors.csv");
        out << "time,factor_row,factor_col,value\n";
        const DenseTensor& f = rep.response_factor_series;
        for (Index t = 0; t < f.dim(2); ++t) {
            for (Index i = 0; i < f.dim(0); ++i) {
                for (Index j = 0; j < f.dim(1); ++j) {
                    out << t + 1 << ',' << i + 1 << ',' << j + 1 << ','
                        << format_double(f({i, j, t})) << '\n';
                }
            }
        }
    }
    {
        std::ofstream out = create_or_throw(dir + "/predictor_factors.csv");
        out << "time,lag,factor_row,factor_col,value\n";
        const DenseTensor& f = rep.predictor_factor_series;
        for (Index s = 0; s < f.dim(3); ++s) {
            for (Index l = 0; l < f.dim(2); ++l) {
                for (Index i = 0; i < f.dim(0); ++i) {
                    for (Index j = 0; j < f.dim(1); ++j) {
                        // Time stamp of the response this slice predicts.
                        out << s + 1 + m.p << ',' << l + 1 << ',' << i + 1 << ',' << j + 1 << ','
                            << format_double(f({i, j, l, s})) << '\n';
                    }
                }
            }
        }
    }
    {
        std::ofstream out = create_or_throw(dir + "/projections.csv");
        out << "factor,row,col,value\n";
        const char* names[4] = {"u1", "u2", "u3", "u4"};
        for (int k = 0; k < 4; ++k) {
            const Matrix& pmat = rep.projections[static_cast<std::size_t>(k)];
            const auto& labels = (k == 0 || k == 2) ? rl : cl;
            for (Index i = 0; i < pmat.rows(); ++i) {
                for (Index j = 0; j < pmat.cols(); ++j) {
                    out << names[k] << ',' << labels[static_cast<std::size_t>(i)] << ','
                        << labels[static_cast<std::size_t>(j)] << ','
                        << format_double(pmat(i, j)) << '\n';
                }
            }
        }
    }
    {
        std::ofstream out = create_or_throw(dir + "/factor_var.csv");
        out << "lag,row,col,value\n";
        for (std::size_t l = 0; l < rep.factor_var_cores.size(); ++l) {
            const Matrix& g = rep.factor_var_cores[l];
            for (Index i = 0; i < g.rows(); ++i) {
                for (Index j = 0; j < g.cols(); ++j) {
                    out << l + 1 << ',' << i + 1 << ',' << j + 1 << ','
                        << format_double(g(i, j)) << '\n';
                }
            }
        }
    }
    {
        // Per-lag autocorrelations of the white-noise combinations with a
        // +/- 2/sqrt(T) band flag.
        std::ofstream out = create_or_throw(dir + "/sccf_whiteness.csv");
        out << "side,series,lag,autocorr,within_band\n";
        const double band = 2.0 / std::sqrt(static_cast<double>(y.length()));
        const Index max_lag = std::min<Index>(10, y.length() - 2);
        auto emit = [&](const DenseTensor& s, const char* side) {
            for (Index j = 0; j < s.dim(1); ++j) {
                for (Index i = 0; i < s.dim(0); ++i) {
                    Vector v(s.dim(2));
                    for (Index t = 0; t < s.dim(2); ++t) v[t] = s({i, j, t});
                    const auto ac = autocorrelations(v, max_lag);
                    for (Index lag = 1; lag <= max_lag; ++lag) {
                        const double a = ac[static_cast<std::size_t>(lag - 1)];
                        out << side << ',' << i + 1 << '_' << j + 1 << ',' << lag << ','
                            << format_double(a) << ',' << (std::abs(a) <= band ? "true" : "false")
                            << '\n';
                    }
                }
            }
        };
        if (rep.delta.cols() > 0) {
            DenseTensor s({rep.delta.cols(), y.n2(), y.length()});
            for (Index t = 0; t < y.length(); ++t) {
                const Matrix v = rep.delta.transpose() * y.observation(t);
                for (Index j = 0; j < v.cols(); ++j)
                    for (Index i = 0; i < v.rows(); ++i) s({i, j, t}) = v(i, j);
            }
            emit(s, "rows");
        }
        if (rep.gamma.cols() > 0) {
            DenseTensor s({y.n1(), rep.gamma.cols(), y.length()});
            for (Index t = 0; t < y.length(); ++t) {
                const Matrix v = y.observation(t) * rep.gamma;
                for (Index j = 0; j < v.cols(); ++j)
                    for (Index i = 0; i < v.rows(); ++i) s({i, j, t}) = v(i, j);
            }
            emit(s, "cols");
        }
    }
}

}  // namespace rrmar
