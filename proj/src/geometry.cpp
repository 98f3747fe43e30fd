// Copyright (C) 2026 navcache authors
// SPDX-License-Identifier: Apache-2.0
//
#include "navcache/geometry.hpp"

#include <cmath>
#include <limits>

#include "navcache/gating.hpp"

namespace navcache {

bool PoseSE3::is_valid_rotation(double tol) const {
    const Mat3 rtr = rotation.transpose() * rotation;
    for (int r = 0; r < 3; ++r)
        for (int c = 0; c < 3; ++c) {
            const double want = (r == c) ? 1.0 : 0.0;
            if (std::abs(rtr.at(r, c) - want) > tol)
                return false;
        }
    return std::abs(rotation.determinant() - 1.0) <= tol;
}

void PoseSE3::validate(double tol) const {
    if (!is_valid_rotation(tol))
        throw Error("PoseSE3: rotation is not orthonormal with determinant +1");
}

void Intrinsics::validate() const {
    if (!(fx > 0.0) || !(fy > 0.0))
        throw ConfigError("Intrinsics: focal lengths must be positive");
    if (width <= 0 || height <= 0 || patch <= 0)
        throw ConfigError("Intrinsics: width, height and patch must be positive");
    if (width % patch != 0 || height % patch != 0)
        throw ConfigError("Intrinsics: image size must be divisible by the patch side");
}

TokenGrid TokenGrid::from_intrinsics(const Intrinsics& k) {
    k.validate();
    TokenGrid grid;
    grid.rows = k.grid_rows();
    grid.cols = k.grid_cols();
    grid.centers.reserve(static_cast<size_t>(grid.rows) * grid.cols);
    for (int r = 0; r < grid.rows; ++r)
        for (int c = 0; c < grid.cols; ++c)
            grid.centers.push_back(Pixel{(c + 0.5) * k.patch, (r + 0.5) * k.patch});
    return grid;
}

Vec3 back_project(const Pixel& u, double depth, const Intrinsics& k) {
    if (!(depth > 0.0) || !std::isfinite(depth))
        throw InvalidDepth("back_project: depth must be positive and finite");
    return {(u.x - k.cx) * depth / k.fx, (u.y - k.cy) * depth / k.fy, depth};
}

std::optional<Pixel> project(const Vec3& p, const Intrinsics& k) {
    if (!(p.z > kZNear))
        return std::nullopt;
    return Pixel{k.fx * p.x / p.z + k.cx, k.fy * p.y / p.z + k.cy};
}

Mat3 yaw_rotation(double radians) {
    const double c = std::cos(radians);
    const double s = std::sin(radians);
    Mat3 r;
    r.m = {c, -s, 0, s, c, 0, 0, 0, 1};
    return r;
}

RemapResult remap_token(int token, const std::vector<double>& depth, const std::vector<uint8_t>& depth_valid,
                        const PoseSE3& rel_pose, const Intrinsics& k, const TokenGrid& grid,
                        const Matrix& current_features, const Matrix& cached_features, int window,
                        double epsilon) {
    const double d = depth[static_cast<size_t>(token)];
    if (!depth_valid.empty() && !depth_valid[static_cast<size_t>(token)])
        return RemapResult::out_of_view();
    if (!(d > 0.0) || !std::isfinite(d))
        return RemapResult::out_of_view();

    const Vec3 p_cur = back_project(grid.centers[static_cast<size_t>(token)], d, k);
    const Vec3 p_prev = rel_pose.apply(p_cur);
    const auto px = project(p_prev, k);
    if (!px)
        return RemapResult::out_of_view();
    if (px->x < 0.0 || px->x >= k.width || px->y < 0.0 || px->y >= k.height)
        return RemapResult::out_of_view();

    const int center_col = static_cast<int>(px->x / k.patch);
    const int center_row = static_cast<int>(px->y / k.patch);
    const int radius = window <= 1 ? 0 : (window - 1) / 2;

    const auto query = current_features.row(token);
    int best = -1;
    double best_sim = -std::numeric_limits<double>::infinity();
    double best_dist2 = std::numeric_limits<double>::infinity();
    for (int dr = -radius; dr <= radius; ++dr) {
        for (int dc = -radius; dc <= radius; ++dc) {
            const int r = center_row + dr;
            const int c = center_col + dc;
            if (r < 0 || r >= grid.rows || c < 0 || c >= grid.cols)
                continue;
            const int cand = grid.index(r, c);
            const double sim = cosine(query, cached_features.row(cand), epsilon);
            const Pixel& cc = grid.centers[static_cast<size_t>(cand)];
            const double dx = px->x - cc.x;
            const double dy = px->y - cc.y;
            const double dist2 = dx * dx + dy * dy;
            // Ties within 1e-12 prefer the geometrically closer patch, then
            // the lower index.
            if (sim > best_sim + 1e-12 ||
                (sim > best_sim - 1e-12 && (dist2 < best_dist2 - 1e-12 ||
                                            (dist2 < best_dist2 + 1e-12 && (best < 0 || cand < best))))) {
                best = cand;
                best_sim = sim;
                best_dist2 = dist2;
            }
        }
    }
    return best >= 0 ? RemapResult::at(best) : RemapResult::out_of_view();
}

std::vector<RemapResult> remap_frame(const std::vector<double>& depth, const std::vector<uint8_t>& depth_valid,
                                     const PoseSE3& rel_pose, const Intrinsics& k, const TokenGrid& grid,
                                     const Matrix& current_features, const Matrix& cached_features, int window,
                                     double epsilon) {
    const int m = grid.token_count();
    std::vector<RemapResult> out;
    out.reserve(static_cast<size_t>(m));
    for (int i = 0; i < m; ++i)
        out.push_back(remap_token(i, depth, depth_valid, rel_pose, k, grid, current_features, cached_features,
                                  window, epsilon));
    return out;
}

}  // namespace navcache
