// Copyright (C) 2026 navcache authors
// SPDX-License-Identifier: Apache-2.0
//
#include "navcache/gating.hpp"

#include <cmath>

namespace navcache {

void GateConfig::validate() const {
    for (double t : {tau_vis, tau_abs, tau_delta, tau_frame})
        if (!std::isfinite(t))
            throw ConfigError("GateConfig: thresholds must be finite");
    if (!(epsilon > 0.0))
        throw ConfigError("GateConfig: epsilon must be positive");
}

void ReuseMasks::validate() const {
    const size_t m_count = m.size();
    if (m_vis.size() != m_count || m_sem.size() != m_count || remap.size() != m_count)
        throw DimensionError("ReuseMasks: mask and remap lengths differ");
    for (size_t i = 0; i < m_count; ++i) {
        if (m[i] != static_cast<uint8_t>(m_vis[i] & (1 - m_sem[i])))
            throw MaskRemapInconsistency("ReuseMasks: m != m_vis * (1 - m_sem) at token " + std::to_string(i));
        if (m[i] && !remap[i].in_view())
            throw MaskRemapInconsistency("ReuseMasks: reused token " + std::to_string(i) +
                                         " has no valid aligned index");
    }
}

double cosine(std::span<const double> a, std::span<const double> b, double epsilon) {
    if (a.size() != b.size())
        throw DimensionError("cosine: vectors of size " + std::to_string(a.size()) + " and " +
                             std::to_string(b.size()));
    const double na = norm(a);
    const double nb = norm(b);
    if (na < epsilon || nb < epsilon)
        return 0.0;
    return dot(a, b) / (na * nb + epsilon);
}

std::vector<double> align_similarities(const Matrix& features, const Matrix& cached_features,
                                       const std::vector<RemapResult>& remaps, double epsilon) {
    if (!features.same_shape(cached_features))
        throw DimensionError("align_similarities: feature grids differ in shape");
    if (static_cast<int>(remaps.size()) != features.rows)
        throw DimensionError("align_similarities: remap length != token count");
    std::vector<double> sims(remaps.size(), -1.0);
    for (size_t i = 0; i < remaps.size(); ++i)
        if (remaps[i].in_view())
            sims[i] = cosine(features.row(static_cast<int>(i)), cached_features.row(remaps[i].index), epsilon);
    return sims;
}

std::vector<uint8_t> visual_gate(const Matrix& features, const Matrix& cached_features,
                                 const std::vector<RemapResult>& remaps, double tau_vis, double epsilon) {
    const auto sims = align_similarities(features, cached_features, remaps, epsilon);
    std::vector<uint8_t> mask(sims.size(), 0);
    for (size_t i = 0; i < sims.size(); ++i)
        mask[i] = remaps[i].in_view() && sims[i] > tau_vis ? 1 : 0;
    return mask;
}

std::vector<uint8_t> semantic_gate(const std::vector<double>& scores, const std::vector<double>& scores_prev,
                                   double tau_abs, double tau_delta) {
    if (scores.size() != scores_prev.size())
        throw DimensionError("semantic_gate: score vectors differ in length");
    for (const std::vector<double>* v : {&scores, &scores_prev})
        for (double s : *v)
            if (!(s >= 0.0 && s <= 1.0))
                throw ScoreRangeError("semantic_gate: relevance score outside [0, 1]");
    std::vector<uint8_t> mask(scores.size(), 0);
    for (size_t i = 0; i < scores.size(); ++i)
        mask[i] = (scores[i] > tau_abs || std::abs(scores[i] - scores_prev[i]) > tau_delta) ? 1 : 0;
    return mask;
}

std::vector<uint8_t> fuse(const std::vector<uint8_t>& m_vis, const std::vector<uint8_t>& m_sem) {
    if (m_vis.size() != m_sem.size())
        throw DimensionError("fuse: mask lengths differ");
    std::vector<uint8_t> m(m_vis.size(), 0);
    for (size_t i = 0; i < m.size(); ++i)
        m[i] = static_cast<uint8_t>(m_vis[i] & (1 - m_sem[i]));
    return m;
}

bool frame_gate(std::span<const double> pooled, std::span<const double> pooled_prev, double tau_frame,
                double epsilon) {
    return cosine(pooled, pooled_prev, epsilon) > tau_frame;
}

}  // namespace navcache
