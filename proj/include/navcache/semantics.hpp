// Copyright (C) 2026 navcache authors
// SPDX-License-Identifier: Apache-2.0
//
#pragma once

#include <vector>

#include "navcache/mat.hpp"

namespace navcache {

/// Relevance scores of one step plus the derived top-k focus set.
struct RelevanceFrame {
    std::vector<double> scores;
    int focus_k = 0;
    std::vector<int> focus_set;  // ascending indices

    static RelevanceFrame from_scores(std::vector<double> scores, int focus_k);
};

/// Instruction-conditioned relevance from a language-to-vision attention
/// block [L_q x M]. Each row must be a probability distribution (sum 1
/// within 1e-6). Scores are the per-token mean attention mass, normalized
/// by the maximum (plus epsilon) and clamped to [0, 1].
std::vector<double> relevance_from_attention(const Matrix& attention, double epsilon);

/// Indices of the k largest scores, ties broken by lower index. k > M is
/// clipped to M; the result is sorted ascending.
std::vector<int> top_k_set(const std::vector<double>& scores, int k);

/// Jaccard distance between consecutive focus sets, Eq-style:
/// 1 - |intersection| / |union|; 0 when both sets are empty.
double focus_shift(const std::vector<int>& current, const std::vector<int>& previous);

}  // namespace navcache
