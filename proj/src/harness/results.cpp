#include <algorithm>
#include <charconv>
#include <cstdlib>
#include <ostream>

#include "mfsc/errors.hpp"
#include "mfsc/harness.hpp"

namespace mfsc {

std::string format_number(double x) {
    // Shortest round-trip representation.
    char buf[32];
    const auto res = std::to_chars(buf, buf + sizeof buf, x);
    return std::string(buf, res.ptr);
}

void ResultTable::add_row(std::vector<std::string> row) {
    if (row.size() != columns.size()) throw PreconditionFailed("result row does not match the columns");
    rows.push_back(std::move(row));
}

std::size_t ResultTable::column(const std::string& name) const {
    const auto it = std::find(columns.begin(), columns.end(), name);
    if (it == columns.end()) throw OutOfRange("no column '" + name + "'");
    return static_cast<std::size_t>(it - columns.begin());
}

double ResultTable::number(std::size_t row, const std::string& name) const {
    return std::strtod(rows.at(row).at(column(name)).c_str(), nullptr);
}

void ResultTable::write_csv(std::ostream& out) const {
    auto emit = [&](const std::vector<std::string>& cells) {
        for (std::size_t c = 0; c < cells.size(); ++c) {
            if (c) out << ',';
            const std::string& s = cells[c];
            if (s.find_first_of(",\"\n") != std::string::npos) {
                out << '"';
                for (char ch : s) out << (ch == '"' ? "\"\"" : std::string(1, ch));
                out << '"';
            } else {
                out << s;
            }
        }
        out << '\n';
    };
    emit(columns);
    for (const auto& r : rows) emit(r);
}

namespace {

std::string num(double x) { return format_number(x); }
std::string num(std::size_t x) { return std::to_string(x); }

}  // namespace

ResultTable ConvergenceResult::table() const {
    ResultTable t;
    t.columns = {"N", "seed", "u", "k", "j", "value", "reference", "error"};
    for (const auto& c : cells)
        for (std::size_t u = 0; u < c.nu0.size(); ++u) {
            t.add_row({num(c.n), std::to_string(c.seed), num(u), "0", "1", num(c.nu0[u]), num(reference0[u]),
                       num(std::abs(c.nu0[u] - reference0[u]))});
            if (!c.nu1.empty())
                t.add_row({num(c.n), std::to_string(c.seed), num(u), "1", "1", num(c.nu1[u]), num(reference1[u]),
                           num(std::abs(c.nu1[u] - reference1[u]))});
        }
    for (const auto& c : cells)
        if (!c.nu1.empty())
            t.add_row({num(c.n), std::to_string(c.seed), "max", "1", "2", "", "", num(c.product_residual)});
    return t;
}

ResultTable ConvergenceResult::summary_table() const {
    ResultTable t;
    t.columns = {"N", "k", "mean_max_error", "max_mean_error", "mean_product_residual", "prefactor"};
    for (const auto& s : summary)
        t.add_row({num(s.n), std::to_string(s.k), num(s.mean_max_error), num(s.max_mean_error),
                   num(s.mean_product_residual), num(s.prefactor)});
    return t;
}

ResultTable EstimatesResult::table() const {
    ResultTable t;
    t.columns = {"N", "N_max_first_offdiag", "N_max_second_offdiag", "max_tested_D2"};
    for (const auto& r : rows)
        t.add_row({num(r.n), num(r.first_offdiag), num(r.second_offdiag), num(r.tested_D2)});
    return t;
}

ResultTable RemainderExperiment::table() const {
    ResultTable t;
    t.columns = {"epsilon", "K", "remainder", "mass_drift"};
    for (const auto& r : result.rows)
        for (std::size_t K = 0; K < r.remainder.size(); ++K)
            t.add_row({num(r.epsilon), num(K), num(r.remainder[K]), num(r.mass_drift)});
    return t;
}

ResultTable DobrushinResult::table() const {
    ResultTable t;
    t.columns = {"N", "pair", "t", "W"};
    for (const auto& r : rows)
        for (std::size_t p = 0; p < r.distances.size(); ++p)
            for (std::size_t k = 0; k < times.size(); ++k)
                t.add_row({num(r.n), num(p), num(times[k]), num(r.distances[p][k])});
    return t;
}

double VlasovCheckRow::z_score() const {
    return standard_error > 0.0 ? std::abs(grid - ensemble) / standard_error : 0.0;
}

double VlasovCheckResult::max_z() const {
    double z = 0.0;
    for (const auto& r : rows) z = std::max(z, r.z_score());
    return z;
}

ResultTable VlasovCheckResult::table() const {
    ResultTable t;
    t.columns = {"observable", "grid", "ensemble", "standard_error", "z"};
    for (const auto& r : rows)
        t.add_row({r.observable, num(r.grid), num(r.ensemble), num(r.standard_error), num(r.z_score())});
    return t;
}

}  // namespace mfsc
