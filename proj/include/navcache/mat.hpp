// Copyright (C) 2026 navcache authors
// SPDX-License-Identifier: Apache-2.0
//
#pragma once

#include <cmath>
#include <span>
#include <vector>

#include "navcache/errors.hpp"

namespace navcache {

/// Dense row-major matrix of doubles. Used for feature grids [M x D],
/// attention rows, weight matrices and K/V blocks.
struct Matrix {
    int rows = 0;
    int cols = 0;
    std::vector<double> data;

    Matrix() = default;
    Matrix(int r, int c, double fill = 0.0)
        : rows(r), cols(c), data(static_cast<size_t>(r) * static_cast<size_t>(c), fill) {}

    double& at(int r, int c) { return data[static_cast<size_t>(r) * cols + c]; }
    double at(int r, int c) const { return data[static_cast<size_t>(r) * cols + c]; }

    std::span<double> row(int r) { return {data.data() + static_cast<size_t>(r) * cols, static_cast<size_t>(cols)}; }
    std::span<const double> row(int r) const {
        return {data.data() + static_cast<size_t>(r) * cols, static_cast<size_t>(cols)};
    }

    bool same_shape(const Matrix& other) const { return rows == other.rows && cols == other.cols; }

    bool operator==(const Matrix& other) const {
        return rows == other.rows && cols == other.cols && data == other.data;
    }
};

inline double dot(std::span<const double> a, std::span<const double> b) {
    if (a.size() != b.size())
        throw DimensionError("dot: vectors of size " + std::to_string(a.size()) + " and " +
                             std::to_string(b.size()));
    double s = 0.0;
    for (size_t i = 0; i < a.size(); ++i)
        s += a[i] * b[i];
    return s;
}

inline double norm(std::span<const double> a) {
    double s = 0.0;
    for (double v : a)
        s += v * v;
    return std::sqrt(s);
}

/// out = a * b, shapes [m x k] * [k x n].
inline Matrix matmul(const Matrix& a, const Matrix& b) {
    if (a.cols != b.rows)
        throw DimensionError("matmul: " + std::to_string(a.cols) + " != " + std::to_string(b.rows));
    Matrix out(a.rows, b.cols, 0.0);
    for (int i = 0; i < a.rows; ++i) {
        for (int k = 0; k < a.cols; ++k) {
            const double aik = a.at(i, k);
            if (aik == 0.0)
                continue;
            for (int j = 0; j < b.cols; ++j)
                out.at(i, j) += aik * b.at(k, j);
        }
    }
    return out;
}

/// Column-wise mean, e.g. mean pooled feature of a token grid.
inline std::vector<double> column_mean(const Matrix& m) {
    std::vector<double> out(static_cast<size_t>(m.cols), 0.0);
    if (m.rows == 0)
        return out;
    for (int r = 0; r < m.rows; ++r)
        for (int c = 0; c < m.cols; ++c)
            out[static_cast<size_t>(c)] += m.at(r, c);
    for (double& v : out)
        v /= m.rows;
    return out;
}

}  // namespace navcache
