#pragma once

#include "transdro/types.hpp"

#include <charconv>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace transdro {

struct CsvError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Shortest round-trip-exact representation (17 significant digits).
inline std::string format_g17(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

namespace detail {

inline std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> out;
    std::string field;
    std::stringstream ss(line);
    while (std::getline(ss, field, ',')) out.push_back(field);
    if (!line.empty() && line.back() == ',') out.emplace_back();
    return out;
}

inline double parse_double(const std::string& s, const std::string& file, std::size_t line_no) {
    const char* b = s.data();
    const char* e = s.data() + s.size();
    while (b < e && (*b == ' ' || *b == '\t')) ++b;
    double v = 0.0;
    auto [ptr, ec] = std::from_chars(b, e, v);
    while (ptr < e && (*ptr == ' ' || *ptr == '\t' || *ptr == '\r')) ++ptr;
    if (ec != std::errc{} || ptr != e || !std::isfinite(v))
        throw CsvError(file + ":" + std::to_string(line_no) + ": bad numeric field '" + s + "'");
    return v;
}

inline std::vector<std::string> expected_header(Eigen::Index p, bool labeled) {
    std::vector<std::string> h;
    if (labeled) h.push_back("y");
    for (Eigen::Index j = 1; j <= p; ++j) h.push_back("x" + std::to_string(j));
    return h;
}

inline Dataset read_csv(const std::string& path, int site_id, bool labeled) {
    std::ifstream in(path);
    if (!in) throw CsvError(path + ": cannot open file");
    std::string line;
    if (!std::getline(in, line)) throw CsvError(path + ": empty file");
    if (!line.empty() && line.back() == '\r') line.pop_back();
    const auto header = split_csv_line(line);
    const std::size_t offset = labeled ? 1 : 0;
    if (header.size() <= offset || (labeled && header[0] != "y"))
        throw CsvError(path + ":1: expected header '" +
                       (labeled ? std::string("y,x1,...") : std::string("x1,...")) + "'");
    const auto p = static_cast<Eigen::Index>(header.size() - offset);
    for (Eigen::Index j = 0; j < p; ++j)
        if (header[offset + static_cast<std::size_t>(j)] != "x" + std::to_string(j + 1))
            throw CsvError(path + ":1: column " + std::to_string(j + offset + 1) +
                           " should be named x" + std::to_string(j + 1));

    std::vector<double> ys;
    std::vector<double> xs;
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        const auto fields = split_csv_line(line);
        if (fields.size() != header.size())
            throw CsvError(path + ":" + std::to_string(line_no) + ": expected " +
                           std::to_string(header.size()) + " fields, found " +
                           std::to_string(fields.size()));
        if (labeled) ys.push_back(parse_double(fields[0], path, line_no));
        for (Eigen::Index j = 0; j < p; ++j)
            xs.push_back(parse_double(fields[offset + static_cast<std::size_t>(j)], path, line_no));
    }
    const auto n = static_cast<Eigen::Index>(labeled ? ys.size() : xs.size() / static_cast<std::size_t>(p));
    if (n == 0) throw CsvError(path + ": no data rows");
    Matrix x(n, p);
    for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index j = 0; j < p; ++j)
            x(i, j) = xs[static_cast<std::size_t>(i) * static_cast<std::size_t>(p) +
                         static_cast<std::size_t>(j)];
    if (!labeled) return Dataset::unlabeled(std::move(x), site_id);
    return Dataset::labeled(std::move(x), Eigen::Map<Vector>(ys.data(), n), site_id);
}

} // namespace detail

inline Dataset read_labeled_csv(const std::string& path, int site_id) {
    return detail::read_csv(path, site_id, true);
}

inline Dataset read_unlabeled_csv(const std::string& path, int site_id = 0) {
    return detail::read_csv(path, site_id, false);
}

/// Header y,x1,...,xp for labeled data, x1,...,xp for covariate pools.
inline void write_dataset_csv(const std::string& path, const Dataset& d) {
    std::ofstream out(path);
    if (!out) throw CsvError(path + ": cannot open file for writing");
    const auto header = detail::expected_header(d.cols(), d.is_labeled());
    for (std::size_t i = 0; i < header.size(); ++i) out << (i ? "," : "") << header[i];
    out << '\n';
    for (Eigen::Index i = 0; i < d.rows(); ++i) {
        if (d.is_labeled()) out << format_g17(d.y[i]) << ',';
        for (Eigen::Index j = 0; j < d.cols(); ++j)
            out << format_g17(d.x(i, j)) << (j + 1 < d.cols() ? "," : "");
        out << '\n';
    }
    if (!out) throw CsvError(path + ": write failed");
}

/// Single-column coefficient file: optional "beta" header, one value per row.
inline Vector read_coefficient_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw CsvError(path + ": cannot open file");
    std::vector<double> vals;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty() || (line_no == 1 && line == "beta")) continue;
        vals.push_back(detail::parse_double(line, path, line_no));
    }
    if (vals.empty()) throw CsvError(path + ": no coefficients");
    return Eigen::Map<Vector>(vals.data(), static_cast<Eigen::Index>(vals.size()));
}

inline void write_coefficient_csv(const std::string& path, const Vector& beta) {
    std::ofstream out(path);
    if (!out) throw CsvError(path + ": cannot open file for writing");
    out << "beta\n";
    for (Eigen::Index i = 0; i < beta.size(); ++i) out << format_g17(beta[i]) << '\n';
}

} // namespace transdro
