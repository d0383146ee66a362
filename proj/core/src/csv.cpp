#include "buyerlearn/harness.hpp"

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

namespace buyerlearn {

namespace {

std::string g17(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

double parse_double(const std::string &s) {
    char *end = nullptr;
    const double v = std::strtod(s.c_str(), &end);
    if (s.empty() || end != s.c_str() + s.size())
        throw Error(ErrorCode::IoFailure, "csv: bad number '" + s + "'");
    return v;
}

std::uint64_t parse_count(const std::string &s) {
    char *end = nullptr;
    const unsigned long long v = std::strtoull(s.c_str(), &end, 10);
    if (s.empty() || end != s.c_str() + s.size())
        throw Error(ErrorCode::IoFailure, "csv: bad integer '" + s + "'");
    return v;
}

} // namespace

CsvRow to_row(const IterationRecord &r) {
    return {r.iter,       r.interactions, r.g_tilde,    r.branch,     r.delta,
            r.alpha,      r.vol_factor,   r.lambda_min, r.lambda_max, r.term_lhs};
}

void write_csv(std::ostream &out, const std::vector<IterationRecord> &records) {
    out << kCsvHeader << '\n';
    for (const auto &rec : records) {
        const CsvRow r = to_row(rec);
        out << r.iter << ',' << r.interactions << ',' << g17(r.g_tilde) << ',' << to_string(r.branch) << ','
            << g17(r.delta) << ',' << g17(r.alpha) << ',' << g17(r.vol_factor) << ',' << g17(r.lambda_min) << ','
            << g17(r.lambda_max) << ',' << g17(r.term_lhs) << '\n';
    }
}

void emit_csv(const std::vector<IterationRecord> &records, const std::filesystem::path &path) {
    std::ofstream out(path, std::ios::binary);
    if (!out)
        throw Error(ErrorCode::IoFailure, "cannot open " + path.string());
    write_csv(out, records);
    if (!out)
        throw Error(ErrorCode::IoFailure, "write failed for " + path.string());
}

void emit_csv(const RunLog &log, const std::filesystem::path &path) { emit_csv(log.iterations, path); }

std::vector<CsvRow> parse_csv(std::istream &in) {
    std::string line;
    if (!std::getline(in, line) || line != kCsvHeader)
        throw Error(ErrorCode::IoFailure, "csv: unexpected header");
    std::vector<CsvRow> rows;
    while (std::getline(in, line)) {
        std::vector<std::string> f;
        std::stringstream ss(line);
        for (std::string cell; std::getline(ss, cell, ',');)
            f.push_back(cell);
        if (f.size() != 10)
            throw Error(ErrorCode::IoFailure, "csv: expected 10 fields, got " + std::to_string(f.size()));
        CsvRow r;
        r.iter = parse_count(f[0]);
        r.interactions = parse_count(f[1]);
        r.g_tilde = parse_double(f[2]);
        if (f[3] == "central")
            r.branch = CutBranch::Central;
        else if (f[3] == "shallow")
            r.branch = CutBranch::Shallow;
        else
            throw Error(ErrorCode::IoFailure, "csv: unknown branch '" + f[3] + "'");
        r.delta = parse_double(f[4]);
        r.alpha = parse_double(f[5]);
        r.vol_factor = parse_double(f[6]);
        r.lambda_min = parse_double(f[7]);
        r.lambda_max = parse_double(f[8]);
        r.term_lhs = parse_double(f[9]);
        rows.push_back(r);
    }
    return rows;
}

std::vector<CsvRow> parse_csv(const std::filesystem::path &path) {
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw Error(ErrorCode::IoFailure, "cannot read " + path.string());
    return parse_csv(in);
}

} // namespace buyerlearn
