// Copyright (C) 2026 navcache authors
// SPDX-License-Identifier: Apache-2.0
//
#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "navcache/geometry.hpp"
#include "navcache/mat.hpp"

namespace navcache {

enum class BudgetMode {
    kPerLayer,  // entropy-modulated budget per decoder layer
    kGlobal,    // uniform cap at rho_max (attention weights not exposed)
};

struct BudgetConfig {
    double rho_min = 0.0;
    double rho_max = 0.90;
    double alpha = 0.5;
    BudgetMode mode = BudgetMode::kPerLayer;

    void validate() const;
};

/// Per-layer cached key/value blocks, both [M x d_kv].
struct LayerKv {
    Matrix k;
    Matrix v;
};

/// Cross-frame cache: per-layer K/V blocks plus the previous step's encoder
/// features. Keys are stored post-rotary so reused entries inherit their
/// rotary phase unchanged.
struct KvCacheState {
    std::vector<LayerKv> layers;
    Matrix feature_cache;  // [M x D]
    int64_t step = -1;

    bool empty() const { return step < 0; }
    int layer_count() const { return static_cast<int>(layers.size()); }

    /// Debug snapshot: little-endian f32 blocks behind a JSON header.
    void save(const std::string& path) const;
    static KvCacheState load(const std::string& path);
};

enum class CacheWritePolicy {
    kWriteAll,            // copy the full spliced blocks
    kWriteRefreshedOnly,  // write only positions the mask refreshed
};

/// clip(rho_max - alpha * H, rho_min, rho_max). Eq.-(7)-style entropy budget.
double layer_budget(double normalized_entropy, const BudgetConfig& cfg);

/// Mean normalized Shannon entropy of attention rows. Each row must sum to 1
/// within 1e-6; the result is -sum p ln(p + epsilon) averaged over rows,
/// divided by ln(row width), clamped to [0, 1].
double attention_entropy(const Matrix& attention_rows, double epsilon);

/// Trims an over-budget mask to the floor(rho * M) tokens with the highest
/// alignment score; ties prefer the lower index. Under-budget masks pass
/// through unchanged.
std::vector<uint8_t> enforce_budget(const std::vector<uint8_t>& mask, const std::vector<double>& align_scores,
                                    double rho);

/// Cross-frame token splice: out[i] = cached[remap[i]] when mask[i] = 1, else
/// fresh[i]. Every output position is written exactly once.
/// Throws MaskRemapInconsistency when a reused token has no valid remap.
LayerKv splice(const std::vector<uint8_t>& mask, const std::vector<RemapResult>& remap, const LayerKv& cached,
               const Matrix& fresh_k, const Matrix& fresh_v);

/// Installs the spliced per-layer blocks and the current features into the
/// cache and advances the step. With kWriteRefreshedOnly, per-layer masks
/// select the positions written (reused positions are left as they are).
/// Throws StaleWriteError when step does not advance.
void update_cache(KvCacheState& cache, const std::vector<LayerKv>& spliced, const Matrix& features,
                  int64_t step, CacheWritePolicy policy = CacheWritePolicy::kWriteAll,
                  const std::vector<std::vector<uint8_t>>* layer_masks = nullptr);

}  // namespace navcache
