// Copyright (C) 2026 navcache authors
// SPDX-License-Identifier: Apache-2.0
//
#pragma once

#include <cstdint>
#include <vector>

#include "navcache/kv_cache.hpp"
#include "navcache/mat.hpp"

namespace navcache {

inline constexpr int kActionCount = 4;  // forward / left / right / stop

struct ModelSpec {
    int layers = 4;
    int feature_dim = 32;
    int kv_dim = 16;
    int lang_queries = 6;
    uint64_t seed = 1234;
    double rope_base = 10000.0;

    void validate() const;
};

/// Deterministic weights generated from the spec seed. Projection entries are
/// scaled by 1/sqrt(D); the language embedding block is O(1) scale so that
/// attention over random weights is informative rather than uniform.
struct WeightSet {
    std::vector<Matrix> w_q;    // per layer, [D x d_kv]
    std::vector<Matrix> w_k;    // per layer, [D x d_kv]
    std::vector<Matrix> w_v;    // per layer, [D x d_kv]
    std::vector<Matrix> w_out;  // per layer, [d_kv x D]
    Matrix lang_embed;          // [L_q x D]
    Matrix readout;             // [D x A]
};

WeightSet init_weights(const ModelSpec& spec);

/// Which cache entries each layer reuses this step.
struct CachePlan {
    std::vector<std::vector<uint8_t>> layer_masks;  // L x M, post-budget
    std::vector<RemapResult> remap;                 // M
};

struct StepOutput {
    std::vector<double> action_scores;     // [A]
    std::vector<Matrix> attention;         // per layer, [L_q x (M + L_q)]
    std::vector<LayerKv> kv;               // per layer, the spliced vision K/V
    std::vector<double> entropy;           // per layer, normalized to [0, 1]
};

/// Standard rotary embedding: coordinate pair 2j rotates by
/// position / rope_base^(2j / d). Requires an even-dimensional vector.
std::vector<double> apply_rope(std::span<const double> vec, int position, double rope_base);

/// One decoder step. Vision tokens sit at positions [0, M); language queries
/// follow at [M, M + L_q). Per layer the vision K/V are computed fresh (keys
/// post-rotary), spliced against the cache when a plan is given, and the
/// language rows attend over [vision || language]. Action scores come from a
/// linear readout of the mean final-layer query state.
///
/// plan == nullptr means full recompute; a plan with all-zero masks follows
/// the identical arithmetic path.
StepOutput forward_step(const ModelSpec& spec, const WeightSet& weights, const Matrix& tokens,
                        const Matrix& lang, const CachePlan* plan, const KvCacheState* cache,
                        double epsilon);

}  // namespace navcache
