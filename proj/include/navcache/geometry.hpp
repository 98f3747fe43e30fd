// Copyright (C) 2026 navcache authors
// SPDX-License-Identifier: Apache-2.0
//
#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <vector>

#include "navcache/errors.hpp"
#include "navcache/mat.hpp"

namespace navcache {

struct Vec3 {
    double x = 0.0;
    double y = 0.0;
    double z = 0.0;

    Vec3 operator+(const Vec3& o) const { return {x + o.x, y + o.y, z + o.z}; }
    Vec3 operator-(const Vec3& o) const { return {x - o.x, y - o.y, z - o.z}; }
    Vec3 operator*(double s) const { return {x * s, y * s, z * s}; }
};

inline double dot(const Vec3& a, const Vec3& b) { return a.x * b.x + a.y * b.y + a.z * b.z; }
inline Vec3 cross(const Vec3& a, const Vec3& b) {
    return {a.y * b.z - a.z * b.y, a.z * b.x - a.x * b.z, a.x * b.y - a.y * b.x};
}
inline double length(const Vec3& a) { return std::sqrt(dot(a, a)); }

/// Row-major 3x3 matrix.
struct Mat3 {
    std::array<double, 9> m{1, 0, 0, 0, 1, 0, 0, 0, 1};

    static Mat3 identity() { return Mat3{}; }

    double at(int r, int c) const { return m[static_cast<size_t>(r) * 3 + c]; }
    double& at(int r, int c) { return m[static_cast<size_t>(r) * 3 + c]; }

    Vec3 apply(const Vec3& v) const {
        return {m[0] * v.x + m[1] * v.y + m[2] * v.z, m[3] * v.x + m[4] * v.y + m[5] * v.z,
                m[6] * v.x + m[7] * v.y + m[8] * v.z};
    }

    Mat3 transpose() const {
        Mat3 t;
        for (int r = 0; r < 3; ++r)
            for (int c = 0; c < 3; ++c)
                t.at(r, c) = at(c, r);
        return t;
    }

    Mat3 operator*(const Mat3& o) const {
        Mat3 out;
        for (int r = 0; r < 3; ++r)
            for (int c = 0; c < 3; ++c) {
                double s = 0.0;
                for (int k = 0; k < 3; ++k)
                    s += at(r, k) * o.at(k, c);
                out.at(r, c) = s;
            }
        return out;
    }

    double determinant() const {
        return m[0] * (m[4] * m[8] - m[5] * m[7]) - m[1] * (m[3] * m[8] - m[5] * m[6]) +
               m[2] * (m[3] * m[7] - m[4] * m[6]);
    }
};

/// Rigid transform: p' = rotation * p + translation.
struct PoseSE3 {
    Mat3 rotation = Mat3::identity();
    Vec3 translation{};

    static PoseSE3 identity() { return PoseSE3{}; }

    Vec3 apply(const Vec3& p) const { return rotation.apply(p) + translation; }

    PoseSE3 inverse() const {
        PoseSE3 inv;
        inv.rotation = rotation.transpose();
        Vec3 t = inv.rotation.apply(translation);
        inv.translation = {-t.x, -t.y, -t.z};
        return inv;
    }

    /// this after other: apply(p) == this(other(p)).
    PoseSE3 compose(const PoseSE3& other) const {
        PoseSE3 out;
        out.rotation = rotation * other.rotation;
        out.translation = rotation.apply(other.translation) + translation;
        return out;
    }

    /// Orthonormality and det(+1) check, tolerance 1e-9.
    bool is_valid_rotation(double tol = 1e-9) const;
    void validate(double tol = 1e-9) const;
};

struct Pixel {
    double x = 0.0;
    double y = 0.0;
};

struct Intrinsics {
    double fx = 0.0;
    double fy = 0.0;
    double cx = 0.0;
    double cy = 0.0;
    int width = 0;
    int height = 0;
    int patch = 0;

    int grid_cols() const { return width / patch; }
    int grid_rows() const { return height / patch; }
    int token_count() const { return grid_cols() * grid_rows(); }

    /// fx,fy > 0 and image size divisible by the patch side.
    void validate() const;
};

/// Row-major token grid with fixed patch-center pixel coordinates.
struct TokenGrid {
    int rows = 0;
    int cols = 0;
    std::vector<Pixel> centers;

    static TokenGrid from_intrinsics(const Intrinsics& k);

    int token_count() const { return rows * cols; }
    int index(int row, int col) const { return row * cols + col; }
    int row_of(int token) const { return token / cols; }
    int col_of(int token) const { return token % cols; }
};

/// Points with camera-frame z below this are treated as behind the camera.
inline constexpr double kZNear = 1e-4;

/// Pinhole back-projection of a pixel at depth d (camera-frame z).
/// Throws InvalidDepth for non-positive or non-finite d.
Vec3 back_project(const Pixel& u, double depth, const Intrinsics& k);

/// Pinhole projection. Returns nullopt when the point is behind the camera
/// (z <= kZNear); coordinates are continuous, not rounded.
std::optional<Pixel> project(const Vec3& p, const Intrinsics& k);

/// Result of the cross-frame remap for one token: the aligned index in the
/// previous frame's token grid, or out-of-view.
struct RemapResult {
    int index = -1;

    bool in_view() const { return index >= 0; }
    static RemapResult out_of_view() { return RemapResult{-1}; }
    static RemapResult at(int idx) { return RemapResult{idx}; }
};

/// View-aligned remap of one token into the previous frame.
///
/// Back-projects the token center with its depth, applies rel_pose
/// (current-frame camera coordinates -> previous-frame camera coordinates),
/// projects into the previous image, and refines over the patch neighborhood
/// by cosine similarity between the current token feature and the cached
/// previous-frame features. `window` is the neighborhood side length in
/// patches: 3 searches a 3x3 block, 0 or 1 takes the rounded patch directly.
///
/// Out-of-view cases: invalid or non-positive depth, projection behind the
/// camera, or a projected center outside the image bounds.
RemapResult remap_token(int token, const std::vector<double>& depth, const std::vector<uint8_t>& depth_valid,
                        const PoseSE3& rel_pose, const Intrinsics& k, const TokenGrid& grid,
                        const Matrix& current_features, const Matrix& cached_features, int window,
                        double epsilon);

/// remap_token applied to every token of the grid.
std::vector<RemapResult> remap_frame(const std::vector<double>& depth, const std::vector<uint8_t>& depth_valid,
                                     const PoseSE3& rel_pose, const Intrinsics& k, const TokenGrid& grid,
                                     const Matrix& current_features, const Matrix& cached_features, int window,
                                     double epsilon);

/// Yaw rotation about the world up axis (+z), counterclockwise for positive
/// angles when viewed from above.
Mat3 yaw_rotation(double radians);

}  // namespace navcache
