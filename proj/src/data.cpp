#include "mlrate/data.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>
#include <system_error>

#include "mlrate/errors.hpp"

namespace mlrate {

namespace {

std::vector<std::string> split_line(const std::string& line) {
    std::vector<std::string> out;
    std::string cur;
    for (char ch : line) {
        if (ch == ',') {
            out.push_back(cur);
            cur.clear();
        } else if (ch != '\r') {
            cur.push_back(ch);
        }
    }
    out.push_back(cur);
    return out;
}

double parse_cell(const std::string& token, std::size_t row, const std::string& column) {
    const char* begin = token.data();
    const char* end = begin + token.size();
    double value = 0.0;
    const auto [ptr, ec] = std::from_chars(begin, end, value);
    if (ec != std::errc() || ptr != end || token.empty()) {
        throw ParseError("row " + std::to_string(row) + ", column '" + column +
                         "': cannot parse '" + token + "' as a number");
    }
    return value;
}

std::string format_double(double v) {
    char buf[64];
    const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
    (void)ec;
    return std::string(buf, ptr);
}

std::vector<std::string> read_lines(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw SchemaError("cannot open file: " + path);
    }
    std::vector<std::string> lines;
    std::string line;
    while (std::getline(in, line)) lines.push_back(line);
    while (!lines.empty() && lines.back().empty()) lines.pop_back();
    if (lines.empty()) {
        throw SchemaError("empty file: " + path);
    }
    return lines;
}

std::size_t find_column(const std::vector<std::string>& header, const std::string& name) {
    const auto it = std::find(header.begin(), header.end(), name);
    if (it == header.end()) {
        throw SchemaError("missing column '" + name + "'");
    }
    return static_cast<std::size_t>(it - header.begin());
}

}  // namespace

std::size_t NumericTable::column_index(const std::string& name) const {
    return find_column(column_names, name);
}

std::vector<double> NumericTable::column(const std::string& name) const {
    const std::size_t c = column_index(name);
    std::vector<double> out(values.rows());
    for (std::size_t r = 0; r < values.rows(); ++r) out[r] = values(r, c);
    return out;
}

NumericTable load_table(const std::string& path) {
    const auto lines = read_lines(path);
    NumericTable table;
    table.column_names = split_line(lines[0]);
    const std::size_t d = table.column_names.size();
    const std::size_t n = lines.size() - 1;
    table.values = DenseMatrix(n, d);
    for (std::size_t r = 0; r < n; ++r) {
        const auto cells = split_line(lines[r + 1]);
        if (cells.size() != d) {
            throw ParseError("row " + std::to_string(r + 1) + ": expected " + std::to_string(d) +
                             " cells, found " + std::to_string(cells.size()));
        }
        for (std::size_t c = 0; c < d; ++c) {
            table.values(r, c) = parse_cell(cells[c], r + 1, table.column_names[c]);
        }
    }
    return table;
}

void write_table(const std::string& path, const NumericTable& table) {
    std::ofstream out(path);
    if (!out) {
        throw SchemaError("cannot write file: " + path);
    }
    for (std::size_t c = 0; c < table.column_names.size(); ++c) {
        if (c) out << ',';
        out << table.column_names[c];
    }
    out << '\n';
    for (std::size_t r = 0; r < table.values.rows(); ++r) {
        for (std::size_t c = 0; c < table.values.cols(); ++c) {
            if (c) out << ',';
            out << format_double(table.values(r, c));
        }
        out << '\n';
    }
}

ExperimentDataset load_csv(const std::string& path, const std::string& outcome_col,
                           const std::string& treatment_col,
                           const std::vector<std::string>& feature_cols) {
    const auto lines = read_lines(path);
    const auto header = split_line(lines[0]);
    const std::size_t yc = find_column(header, outcome_col);
    const std::size_t tc = find_column(header, treatment_col);
    std::vector<std::size_t> fcs;
    fcs.reserve(feature_cols.size());
    for (const auto& name : feature_cols) fcs.push_back(find_column(header, name));

    ExperimentDataset ds;
    ds.n = lines.size() - 1;
    ds.outcome.resize(ds.n);
    ds.treatment.resize(ds.n);
    ds.covariates = DenseMatrix(ds.n, fcs.size());
    ds.column_names = feature_cols;

    for (std::size_t r = 0; r < ds.n; ++r) {
        const auto cells = split_line(lines[r + 1]);
        if (cells.size() != header.size()) {
            throw ParseError("row " + std::to_string(r + 1) + ": expected " +
                             std::to_string(header.size()) + " cells, found " +
                             std::to_string(cells.size()));
        }
        const double y = parse_cell(cells[yc], r + 1, outcome_col);
        if (!std::isfinite(y)) {
            throw ValidationError("row " + std::to_string(r + 1) + ", column '" + outcome_col +
                                  "': non-finite value");
        }
        ds.outcome[r] = y;
        const double t = parse_cell(cells[tc], r + 1, treatment_col);
        if (t == 0.0) {
            ds.treatment[r] = 0;
        } else if (t == 1.0) {
            ds.treatment[r] = 1;
        } else {
            throw ValidationError("row " + std::to_string(r + 1) + ", column '" + treatment_col +
                                  "': treatment value must be 0 or 1, found '" + cells[tc] + "'");
        }
        for (std::size_t c = 0; c < fcs.size(); ++c) {
            const double v = parse_cell(cells[fcs[c]], r + 1, feature_cols[c]);
            if (!std::isfinite(v)) {
                throw ValidationError("row " + std::to_string(r + 1) + ", column '" +
                                      feature_cols[c] + "': non-finite value");
            }
            ds.covariates(r, c) = v;
        }
    }

    const auto treated =
        static_cast<std::size_t>(std::count(ds.treatment.begin(), ds.treatment.end(), 1));
    if (ds.n == 0 || treated == 0 || treated == ds.n) {
        throw ValidationError("degenerate-arm: both treatment arms must be non-empty");
    }
    return ds;
}

void write_csv(const std::string& path, const ExperimentDataset& ds,
               const std::string& outcome_col, const std::string& treatment_col) {
    std::ofstream out(path);
    if (!out) {
        throw SchemaError("cannot write file: " + path);
    }
    out << outcome_col << ',' << treatment_col;
    for (const auto& name : ds.column_names) out << ',' << name;
    out << '\n';
    for (std::size_t r = 0; r < ds.n; ++r) {
        out << format_double(ds.outcome[r]) << ',' << ds.treatment[r];
        for (std::size_t c = 0; c < ds.covariates.cols(); ++c) {
            out << ',' << format_double(ds.covariates(r, c));
        }
        out << '\n';
    }
}

std::vector<Violation> validate(const ExperimentDataset& ds) {
    std::vector<Violation> out;
    if (ds.n == 0) {
        out.push_back({"empty", std::nullopt, "", "dataset has no rows"});
        return out;
    }
    if (ds.outcome.size() != ds.n || ds.treatment.size() != ds.n || ds.covariates.rows() != ds.n) {
        out.push_back({"length-mismatch", std::nullopt, "",
                       "outcome/treatment/covariate lengths disagree with n"});
        return out;
    }
    std::size_t treated = 0;
    for (std::size_t r = 0; r < ds.n; ++r) {
        if (ds.treatment[r] != 0 && ds.treatment[r] != 1) {
            out.push_back({"treatment-not-binary", r, "treatment",
                           "treatment value must be 0 or 1 at row " + std::to_string(r)});
        } else {
            treated += static_cast<std::size_t>(ds.treatment[r]);
        }
        if (!std::isfinite(ds.outcome[r])) {
            out.push_back(
                {"non-finite", r, "outcome", "non-finite outcome at row " + std::to_string(r)});
        }
        for (std::size_t c = 0; c < ds.covariates.cols(); ++c) {
            if (!std::isfinite(ds.covariates(r, c))) {
                const std::string name =
                    c < ds.column_names.size() ? ds.column_names[c] : std::to_string(c);
                out.push_back(
                    {"non-finite", r, name, "non-finite covariate at row " + std::to_string(r)});
            }
        }
    }
    if (treated == 0 || treated == ds.n) {
        out.push_back(
            {"degenerate-arm", std::nullopt, "treatment", "both arms must be non-empty"});
    }
    return out;
}

std::vector<std::size_t> split_folds(std::size_t n, std::size_t k, RandomStream& stream) {
    if (k < 2 || k > n) {
        throw std::invalid_argument("split_folds: need 2 <= k <= n");
    }
    const auto perm = stream.permutation(n);
    const std::size_t base = n / k;
    const std::size_t rem = n % k;
    std::vector<std::size_t> assignment(n);
    std::size_t pos = 0;
    for (std::size_t f = 0; f < k; ++f) {
        const std::size_t size = base + (f < rem ? 1 : 0);
        for (std::size_t i = 0; i < size; ++i) assignment[perm[pos++]] = f;
    }
    return assignment;
}

}  // namespace mlrate
