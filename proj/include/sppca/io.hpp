#ifndef SPPCA_IO_HPP
#define SPPCA_IO_HPP

#include "sppca/types.hpp"

#include <json.hpp>

#include <charconv>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

namespace sppca {

namespace detail {

inline std::string format_g17(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

inline double parse_cell(const std::string& cell, Eigen::Index row, Eigen::Index col) {
    double v = 0.0;
    const char* begin = cell.data();
    const char* end = begin + cell.size();
    // tolerate surrounding spaces
    while (begin < end && (*begin == ' ' || *begin == '\t')) ++begin;
    while (end > begin && (*(end - 1) == ' ' || *(end - 1) == '\t' || *(end - 1) == '\r')) --end;
    auto [ptr, ec] = std::from_chars(begin, end, v);
    if (ec != std::errc{} || ptr != end)
        throw DataError("CSV: cell at row " + std::to_string(row + 1) + ", column " +
                        std::to_string(col + 1) + " is not numeric: '" + cell + "'");
    if (!std::isfinite(v))
        throw DataError("CSV: non-finite value at row " + std::to_string(row + 1) +
                        ", column " + std::to_string(col + 1));
    return v;
}

inline std::vector<std::string> split_line(const std::string& line) {
    std::vector<std::string> out;
    std::string cur;
    for (char c : line) {
        if (c == ',') {
            out.push_back(cur);
            cur.clear();
        } else {
            cur.push_back(c);
        }
    }
    out.push_back(cur);
    return out;
}

}  // namespace detail

inline DataMatrix load_csv(const std::string& path, bool has_header = false) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open file: " + path);

    std::vector<std::string> column_names;
    std::vector<std::vector<double>> rows;
    std::string line;
    Eigen::Index cols = -1;
    Eigen::Index data_row = 0;
    bool first = true;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty() && in.peek() == EOF) break;  // trailing newline
        auto cells = detail::split_line(line);
        if (first && has_header) {
            column_names = cells;
            cols = static_cast<Eigen::Index>(cells.size());
            first = false;
            continue;
        }
        first = false;
        if (cols < 0) cols = static_cast<Eigen::Index>(cells.size());
        if (static_cast<Eigen::Index>(cells.size()) != cols)
            throw DataError("CSV: ragged row " + std::to_string(data_row + 1 + (has_header ? 1 : 0)) +
                            " has " + std::to_string(cells.size()) + " cells, expected " +
                            std::to_string(cols));
        std::vector<double> parsed(cells.size());
        for (size_t j = 0; j < cells.size(); ++j)
            parsed[j] = detail::parse_cell(cells[j], data_row, static_cast<Eigen::Index>(j));
        rows.push_back(std::move(parsed));
        ++data_row;
    }
    if (rows.empty()) throw DataError("CSV: no rows in " + path);

    Matrix m(static_cast<Eigen::Index>(rows.size()), cols);
    for (Eigen::Index i = 0; i < m.rows(); ++i)
        for (Eigen::Index j = 0; j < cols; ++j) m(i, j) = rows[static_cast<size_t>(i)][static_cast<size_t>(j)];
    DataMatrix out(std::move(m));
    out.column_names = std::move(column_names);
    return out;
}

inline void save_csv(const DataMatrix& data, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw DataError("cannot open file for writing: " + path);
    if (!data.column_names.empty()) {
        for (size_t j = 0; j < data.column_names.size(); ++j) {
            if (j) out << ',';
            out << data.column_names[j];
        }
        out << '\n';
    }
    for (Eigen::Index i = 0; i < data.rows(); ++i) {
        for (Eigen::Index j = 0; j < data.cols(); ++j) {
            if (j) out << ',';
            out << detail::format_g17(data.values(i, j));
        }
        out << '\n';
    }
    if (!out) throw DataError("write failure: " + path);
}

inline constexpr int kModelFormatVersion = 1;

inline void save_model(const ModelParams& params, const std::string& path) {
    params.validate();
    nlohmann::json j;
    j["format_version"] = kModelFormatVersion;
    j["latent_dim"] = params.latent_dim;
    j["sigma2"] = params.sigma2;
    j["mu"] = std::vector<double>(params.mu.data(), params.mu.data() + params.mu.size());
    auto& w = j["w"] = nlohmann::json::array();
    for (Eigen::Index i = 0; i < params.w.rows(); ++i) {
        nlohmann::json row = nlohmann::json::array();
        for (Eigen::Index k = 0; k < params.w.cols(); ++k) row.push_back(params.w(i, k));
        w.push_back(std::move(row));
    }
    std::ofstream out(path);
    if (!out) throw DataError("cannot open file for writing: " + path);
    out << j.dump(2) << '\n';
    if (!out) throw DataError("write failure: " + path);
}

inline ModelParams load_model(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open file: " + path);
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw DataError(std::string("model file is not valid JSON: ") + e.what());
    }
    for (const char* key : {"format_version", "latent_dim", "sigma2", "mu", "w"})
        if (!j.contains(key)) throw DataError(std::string("model file: missing key '") + key + "'");
    if (j["format_version"].get<int>() != kModelFormatVersion)
        throw DataError("model file: unknown format_version " + j["format_version"].dump());

    ModelParams p;
    p.latent_dim = j["latent_dim"].get<Eigen::Index>();
    p.sigma2 = j["sigma2"].get<double>();
    const auto& mu = j["mu"];
    if (!mu.is_array()) throw DataError("model file: 'mu' must be an array");
    p.mu.resize(static_cast<Eigen::Index>(mu.size()));
    for (Eigen::Index i = 0; i < p.mu.size(); ++i) p.mu(i) = mu[static_cast<size_t>(i)].get<double>();

    const auto& w = j["w"];
    if (!w.is_array() || w.size() != static_cast<size_t>(p.mu.size()))
        throw DataError("model file: 'w' must have one row per entry of 'mu'");
    p.w.resize(p.mu.size(), p.latent_dim);
    for (size_t i = 0; i < w.size(); ++i) {
        const auto& row = w[i];
        if (!row.is_array() || row.size() != static_cast<size_t>(p.latent_dim))
            throw DataError("model file: 'w' row " + std::to_string(i + 1) +
                            " length does not match latent_dim");
        for (size_t k = 0; k < row.size(); ++k)
            p.w(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k)) = row[k].get<double>();
    }
    p.validate();
    return p;
}

}  // namespace sppca

#endif
