#pragma once

#include <istream>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "steinquad/bench/format.hpp"
#include "steinquad/errors.hpp"

namespace steinquad {

// One (method, problem, d, n, seed) run.
struct ExperimentRecord {
    std::string method;
    std::string problem;
    int d = 0;
    long n = 0;
    long seed = 0;
    double estimate = 0.0;
    double reference = 0.0;
    double rel_error = 0.0;
    std::optional<double> posterior_std;
    std::optional<double> gamma;
    double runtime_s = 0.0;
    std::optional<double> final_loss;
    std::string notes;

    bool operator==(const ExperimentRecord&) const = default;
};

inline constexpr const char* kCsvHeader =
    "method,problem,d,n,seed,estimate,reference,rel_error,posterior_std,gamma,runtime_s,"
    "final_loss,notes";

namespace detail {

inline std::string csv_escape(const std::string& s) {
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string out = "\"";
    for (const char ch : s) {
        if (ch == '"') out += "\"\"";
        else out += ch;
    }
    out += "\"";
    return out;
}

inline std::vector<std::string> csv_split(const std::string& line) {
    std::vector<std::string> out;
    std::string field;
    bool quoted = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        const char ch = line[i];
        if (quoted) {
            if (ch == '"') {
                if (i + 1 < line.size() && line[i + 1] == '"') {
                    field += '"';
                    ++i;
                } else {
                    quoted = false;
                }
            } else {
                field += ch;
            }
        } else if (ch == '"') {
            quoted = true;
        } else if (ch == ',') {
            out.push_back(std::move(field));
            field.clear();
        } else {
            field += ch;
        }
    }
    out.push_back(std::move(field));
    return out;
}

inline std::string opt_field(const std::optional<double>& v) {
    return v ? format_double(*v) : std::string();
}

}  // namespace detail

// UTF-8, LF line endings, shortest round-trip decimals; absent optionals
// are empty fields, not zeros.
inline void emit_csv(const std::vector<ExperimentRecord>& records, std::ostream& os) {
    os << kCsvHeader << "\n";
    for (const auto& r : records) {
        os << detail::csv_escape(r.method) << ',' << detail::csv_escape(r.problem) << ',' << r.d
           << ',' << r.n << ',' << r.seed << ',' << format_double(r.estimate) << ','
           << format_double(r.reference) << ',' << format_double(r.rel_error) << ','
           << detail::opt_field(r.posterior_std) << ',' << detail::opt_field(r.gamma) << ','
           << format_double(r.runtime_s) << ',' << detail::opt_field(r.final_loss) << ','
           << detail::csv_escape(r.notes) << "\n";
    }
}

inline std::vector<ExperimentRecord> parse_csv(std::istream& is) {
    std::string line;
    if (!std::getline(is, line)) throw ConfigError("csv: missing header");
    if (line != kCsvHeader) throw ConfigError("csv: unexpected header: " + line);
    std::vector<ExperimentRecord> out;
    while (std::getline(is, line)) {
        if (line.empty()) continue;
        const std::vector<std::string> f = detail::csv_split(line);
        if (f.size() != 13) throw ConfigError("csv: wrong field count in row: " + line);
        ExperimentRecord r;
        r.method = f[0];
        r.problem = f[1];
        r.d = static_cast<int>(std::stol(f[2]));
        r.n = std::stol(f[3]);
        r.seed = std::stol(f[4]);
        r.estimate = parse_double_exact(f[5]);
        r.reference = parse_double_exact(f[6]);
        r.rel_error = parse_double_exact(f[7]);
        if (!f[8].empty()) r.posterior_std = parse_double_exact(f[8]);
        if (!f[9].empty()) r.gamma = parse_double_exact(f[9]);
        r.runtime_s = parse_double_exact(f[10]);
        if (!f[11].empty()) r.final_loss = parse_double_exact(f[11]);
        r.notes = f[12];
        out.push_back(std::move(r));
    }
    return out;
}

}  // namespace steinquad
