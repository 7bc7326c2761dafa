#pragma once

#include "quasifree/covariance.hpp"
#include "quasifree/numerics.hpp"

#include <json.hpp>

#include <cmath>
#include <fstream>
#include <stdexcept>
#include <string>

namespace quasifree {

/// File-level failure: unreadable path, malformed JSON, wrong shape.
struct io_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

using json = nlohmann::json;
using ordered_json = nlohmann::ordered_json;

/// {"rows": r, "cols": c, "entries": [[re, im], ...]} in row-major order.
inline ordered_json matrix_to_json(const Matrix& m) {
    ordered_json j;
    j["rows"] = m.rows();
    j["cols"] = m.cols();
    ordered_json entries = ordered_json::array();
    for (Index r = 0; r < m.rows(); ++r)
        for (Index c = 0; c < m.cols(); ++c)
            entries.push_back({m(r, c).real(), m(r, c).imag()});
    j["entries"] = std::move(entries);
    return j;
}

inline Matrix matrix_from_json(const json& j) {
    if (!j.is_object() || !j.contains("rows") || !j.contains("cols") || !j.contains("entries"))
        throw io_error("matrix: expected an object with rows, cols, entries");
    if (!j["rows"].is_number_integer() || !j["cols"].is_number_integer())
        throw io_error("matrix: rows and cols must be integers");
    const Index rows = j["rows"].get<Index>();
    const Index cols = j["cols"].get<Index>();
    if (rows < 1 || cols < 1)
        throw io_error("matrix: rows and cols must be at least 1");
    const auto& entries = j["entries"];
    if (!entries.is_array() || static_cast<Index>(entries.size()) != rows * cols)
        throw io_error("matrix: expected " + std::to_string(rows * cols) + " entries, got " +
                       std::to_string(entries.size()));
    Matrix m(rows, cols);
    for (Index i = 0; i < rows * cols; ++i) {
        const auto& e = entries[i];
        if (!e.is_array() || e.size() != 2 || !e[0].is_number() || !e[1].is_number())
            throw io_error("matrix: entry " + std::to_string(i) + " must be a [re, im] pair");
        const double re = e[0].get<double>();
        const double im = e[1].get<double>();
        if (!std::isfinite(re) || !std::isfinite(im))
            throw io_error("matrix: entry " + std::to_string(i) + " is not finite");
        m(i / cols, i % cols) = Complex(re, im);
    }
    return m;
}

/// {"k": dim, "G": matrix}, the unitary part of the involution.
inline ordered_json involution_to_json(const Involution& gamma) {
    ordered_json j;
    j["k"] = gamma.dim();
    j["G"] = matrix_to_json(gamma.matrix());
    return j;
}

inline Involution involution_from_json(const json& j, double tol = 1e-10) {
    if (!j.is_object() || !j.contains("k") || !j.contains("G"))
        throw io_error("involution: expected an object with k and G");
    if (!j["k"].is_number_integer())
        throw io_error("involution: k must be an integer");
    const Matrix g = matrix_from_json(j["G"]);
    if (g.rows() != j["k"].get<Index>() || g.rows() != g.cols())
        throw io_error("involution: G must be square with dimension k");
    return Involution::validated(g, tol);
}

inline json load_json(const std::string& path) {
    std::ifstream in(path);
    if (!in)
        throw io_error("cannot open " + path);
    try {
        return json::parse(in);
    } catch (const json::parse_error& e) {
        throw io_error(path + ": " + e.what());
    }
}

inline void save_json(const std::string& path, const ordered_json& j) {
    std::ofstream out(path);
    if (!out)
        throw io_error("cannot open " + path + " for writing");
    out << j.dump(2) << '\n';
    if (!out)
        throw io_error("write to " + path + " failed");
}

inline Matrix load_matrix(const std::string& path) {
    const json j = load_json(path);
    try {
        return matrix_from_json(j);
    } catch (const io_error& e) {
        throw io_error(path + ": " + e.what());
    }
}

inline void save_matrix(const std::string& path, const Matrix& m) {
    save_json(path, matrix_to_json(m));
}

inline Involution load_involution(const std::string& path, double tol = 1e-10) {
    const json j = load_json(path);
    try {
        return involution_from_json(j, tol);
    } catch (const io_error& e) {
        throw io_error(path + ": " + e.what());
    }
}

inline void save_involution(const std::string& path, const Involution& gamma) {
    save_json(path, involution_to_json(gamma));
}

}  // namespace quasifree
