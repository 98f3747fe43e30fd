// Copyright (C) 2026 navcache authors
// SPDX-License-Identifier: Apache-2.0
//
#pragma once

#include <cstdint>
#include <vector>

#include "navcache/geometry.hpp"
#include "navcache/mat.hpp"

namespace navcache {

struct GateConfig {
    double tau_vis = 0.85;
    double tau_abs = 0.70;
    double tau_delta = 0.30;
    double tau_frame = 0.95;
    double epsilon = 1e-6;

    void validate() const;
};

/// Per-token reuse decisions for one step. Invariant: m = m_vis AND NOT m_sem,
/// and every reused token carries a valid aligned index.
struct ReuseMasks {
    std::vector<uint8_t> m_vis;
    std::vector<uint8_t> m_sem;
    std::vector<uint8_t> m;
    std::vector<RemapResult> remap;

    void validate() const;
};

/// Stabilized cosine similarity: dot(a,b) / (|a||b| + epsilon).
/// Returns 0 when either norm is below epsilon.
double cosine(std::span<const double> a, std::span<const double> b, double epsilon);

/// Cosine between each current token feature and the cached feature at its
/// aligned index. Out-of-view tokens get -1 (no counterpart in the cache).
std::vector<double> align_similarities(const Matrix& features, const Matrix& cached_features,
                                       const std::vector<RemapResult>& remaps, double epsilon);

/// m_vis[i] = 1 iff remap[i] is in view and the aligned cosine exceeds tau_vis.
std::vector<uint8_t> visual_gate(const Matrix& features, const Matrix& cached_features,
                                 const std::vector<RemapResult>& remaps, double tau_vis, double epsilon);

/// Refresh veto: m_sem[i] = 1 iff s[i] > tau_abs or |s[i] - s_prev[i]| > tau_delta.
/// Scores must lie in [0, 1].
std::vector<uint8_t> semantic_gate(const std::vector<double>& scores, const std::vector<double>& scores_prev,
                                   double tau_abs, double tau_delta);

/// Multiplicative fusion: m[i] = m_vis[i] * (1 - m_sem[i]).
std::vector<uint8_t> fuse(const std::vector<uint8_t>& m_vis, const std::vector<uint8_t>& m_sem);

/// Frame-level encoder bypass: reuse the whole previous token grid when the
/// pooled features of consecutive frames are nearly identical.
bool frame_gate(std::span<const double> pooled, std::span<const double> pooled_prev, double tau_frame,
                double epsilon);

}  // namespace navcache
