#pragma once

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <string>

#include <json.hpp>

#include "otrisk/smooth_quantile.hpp"

namespace otrisk {

inline constexpr int fit_archive_format_version = 1;

/**
 * Versioned JSON persistence of a fit. Doubles are stored as C hexadecimal
 * float literals ("%a"), which round-trip bit-exactly, so a reloaded fit
 * reproduces every potential evaluation to the last bit.
 */
struct FitProvenance {
    std::string command_line;
    std::string input_digest;
};

namespace detail {

inline std::string double_to_hex(double value) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%a", value);
    return buf;
}

inline double hex_to_double(const std::string& text) {
    const char* s = text.c_str();
    char* end = nullptr;
    const double value = std::strtod(s, &end);
    if (end != s + text.size())
        throw InvalidData("io", "malformed hexadecimal float '" + text + "' in fit archive");
    return value;
}

inline nlohmann::json matrix_to_json(const MatrixX<double>& m) {
    nlohmann::json rows = nlohmann::json::array();
    for (Index i = 0; i < m.rows(); ++i) {
        nlohmann::json row = nlohmann::json::array();
        for (Index j = 0; j < m.cols(); ++j) row.push_back(double_to_hex(m(i, j)));
        rows.push_back(std::move(row));
    }
    return rows;
}

inline MatrixX<double> matrix_from_json(const nlohmann::json& rows, Index cols_expected = -1) {
    const auto n = static_cast<Index>(rows.size());
    Index d = cols_expected;
    if (d < 0) d = n > 0 ? static_cast<Index>(rows.at(0).size()) : 0;
    MatrixX<double> m(n, d);
    for (Index i = 0; i < n; ++i) {
        const auto& row = rows.at(static_cast<std::size_t>(i));
        if (static_cast<Index>(row.size()) != d)
            throw InvalidData("io", "ragged matrix in fit archive");
        for (Index j = 0; j < d; ++j)
            m(i, j) = hex_to_double(row.at(static_cast<std::size_t>(j)).get<std::string>());
    }
    return m;
}

}  // namespace detail

inline nlohmann::json fit_to_json(const CenterOutwardFit<double>& fit,
                                  const FitProvenance& provenance = {}) {
    nlohmann::json j;
    j["format_version"] = fit_archive_format_version;
    j["kind"] = "center_outward_fit";
    j["n"] = fit.n();
    j["d"] = fit.d();
    j["m"] = fit.m;
    j["xi_log"] = detail::double_to_hex(fit.xi_log);
    j["delta"] = detail::double_to_hex(fit.delta);
    j["delta_opt"] = detail::double_to_hex(fit.delta_opt);
    nlohmann::json lambda = nlohmann::json::array();
    for (Index i = 0; i < fit.n(); ++i) lambda.push_back(detail::double_to_hex(fit.lambda(i)));
    j["lambda"] = std::move(lambda);
    j["grid_points"] = detail::matrix_to_json(fit.grid_points);
    j["observations"] = detail::matrix_to_json(fit.observations);
    j["grid_seeds"] = fit.grid_seeds;
    j["provenance"] = {{"command_line", provenance.command_line},
                       {"input_digest", provenance.input_digest}};
    return j;
}

inline CenterOutwardFit<double> fit_from_json(const nlohmann::json& j) {
    if (!j.contains("format_version") || j.at("format_version").get<int>() != fit_archive_format_version)
        throw InvalidData("io", "unsupported fit archive format version");
    if (j.value("kind", "") != std::string("center_outward_fit"))
        throw InvalidData("io", "not a fit archive");
    CenterOutwardFit<double> fit;
    const auto n = j.at("n").get<Index>();
    const auto d = j.at("d").get<Index>();
    fit.m = j.at("m").get<Index>();
    fit.xi_log = detail::hex_to_double(j.at("xi_log").get<std::string>());
    fit.delta = detail::hex_to_double(j.at("delta").get<std::string>());
    fit.delta_opt = detail::hex_to_double(j.at("delta_opt").get<std::string>());
    fit.lambda.resize(n);
    const auto& lambda = j.at("lambda");
    if (static_cast<Index>(lambda.size()) != n)
        throw InvalidData("io", "lambda length mismatch in fit archive");
    for (Index i = 0; i < n; ++i)
        fit.lambda(i) = detail::hex_to_double(lambda.at(static_cast<std::size_t>(i)).get<std::string>());
    fit.grid_points = detail::matrix_from_json(j.at("grid_points"), d);
    fit.observations = detail::matrix_from_json(j.at("observations"), d);
    if (fit.grid_points.rows() != n || fit.observations.rows() != n)
        throw InvalidData("io", "pair count mismatch in fit archive");
    fit.grid_seeds = j.value("grid_seeds", std::vector<std::uint64_t>{});
    return fit;
}

inline void save_fit(const CenterOutwardFit<double>& fit, const std::string& path,
                     const FitProvenance& provenance = {}) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw InvalidArgument("io", "cannot write '" + path + "'");
    out << fit_to_json(fit, provenance).dump(1) << '\n';
}

inline CenterOutwardFit<double> load_fit(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw InvalidArgument("io", "cannot open '" + path + "'");
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw InvalidData("io", std::string("malformed fit archive: ") + e.what());
    }
    return fit_from_json(j);
}

/// FNV-1a digest of a file's bytes, for provenance records.
inline std::string file_digest(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) return "";
    std::uint64_t hash = 0xcbf29ce484222325ull;
    char chunk[4096];
    while (in.read(chunk, sizeof chunk) || in.gcount() > 0) {
        for (std::streamsize i = 0; i < in.gcount(); ++i) {
            hash ^= static_cast<unsigned char>(chunk[i]);
            hash *= 0x100000001b3ull;
        }
        if (!in) break;
    }
    char buf[24];
    std::snprintf(buf, sizeof buf, "fnv1a:%016llx", static_cast<unsigned long long>(hash));
    return buf;
}

}  // namespace otrisk
