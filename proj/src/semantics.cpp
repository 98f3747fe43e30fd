// Copyright (C) 2026 navcache authors
// SPDX-License-Identifier: Apache-2.0
//
#include "navcache/semantics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>

#include "navcache/errors.hpp"

namespace navcache {

RelevanceFrame RelevanceFrame::from_scores(std::vector<double> scores, int focus_k) {
    RelevanceFrame frame;
    frame.focus_set = top_k_set(scores, focus_k);
    frame.scores = std::move(scores);
    frame.focus_k = focus_k;
    return frame;
}

std::vector<double> relevance_from_attention(const Matrix& attention, double epsilon) {
    if (attention.rows <= 0 || attention.cols <= 0)
        throw DimensionError("relevance_from_attention: empty attention block");
    for (int r = 0; r < attention.rows; ++r) {
        double sum = 0.0;
        for (int c = 0; c < attention.cols; ++c)
            sum += attention.at(r, c);
        if (std::abs(sum - 1.0) > 1e-6)
            throw AttentionNormalizationError("relevance_from_attention: row " + std::to_string(r) +
                                              " sums to " + std::to_string(sum));
    }
    std::vector<double> mean(static_cast<size_t>(attention.cols), 0.0);
    for (int r = 0; r < attention.rows; ++r)
        for (int c = 0; c < attention.cols; ++c)
            mean[static_cast<size_t>(c)] += attention.at(r, c);
    for (double& v : mean)
        v /= attention.rows;
    const double max_mean = *std::max_element(mean.begin(), mean.end());
    std::vector<double> scores(mean.size());
    for (size_t i = 0; i < mean.size(); ++i)
        scores[i] = std::clamp(mean[i] / (max_mean + epsilon), 0.0, 1.0);
    return scores;
}

std::vector<int> top_k_set(const std::vector<double>& scores, int k) {
    if (k < 1)
        throw ConfigError("top_k_set: k must be >= 1");
    const int m = static_cast<int>(scores.size());
    const int take = std::min(k, m);
    std::vector<int> order(scores.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](int a, int b) { return scores[a] > scores[b]; });
    std::vector<int> out(order.begin(), order.begin() + take);
    std::sort(out.begin(), out.end());
    return out;
}

double focus_shift(const std::vector<int>& current, const std::vector<int>& previous) {
    const std::set<int> a(current.begin(), current.end());
    const std::set<int> b(previous.begin(), previous.end());
    if (a.empty() && b.empty())
        return 0.0;
    size_t inter = 0;
    for (int v : a)
        inter += b.count(v);
    const size_t uni = a.size() + b.size() - inter;
    return 1.0 - static_cast<double>(inter) / static_cast<double>(uni);
}

}  // namespace navcache
