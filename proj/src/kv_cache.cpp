// Copyright (C) 2026 navcache authors
// SPDX-License-Identifier: Apache-2.0
//
#include "navcache/kv_cache.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <limits>
#include <numeric>

#include <json.hpp>

namespace navcache {

void BudgetConfig::validate() const {
    if (!(rho_min >= 0.0 && rho_min <= rho_max && rho_max <= 1.0))
        throw ConfigError("BudgetConfig: need 0 <= rho_min <= rho_max <= 1");
    if (!(alpha >= 0.0))
        throw ConfigError("BudgetConfig: alpha must be >= 0");
}

double layer_budget(double normalized_entropy, const BudgetConfig& cfg) {
    if (!std::isfinite(normalized_entropy))
        throw Error("layer_budget: entropy must be finite");
    return std::clamp(cfg.rho_max - cfg.alpha * normalized_entropy, cfg.rho_min, cfg.rho_max);
}

double attention_entropy(const Matrix& attention_rows, double epsilon) {
    if (attention_rows.rows <= 0 || attention_rows.cols <= 1)
        throw DimensionError("attention_entropy: need at least one row over at least two keys");
    double total = 0.0;
    for (int r = 0; r < attention_rows.rows; ++r) {
        double sum = 0.0;
        double h = 0.0;
        for (int c = 0; c < attention_rows.cols; ++c) {
            const double p = attention_rows.at(r, c);
            sum += p;
            h -= p * std::log(p + epsilon);
        }
        if (std::abs(sum - 1.0) > 1e-6)
            throw AttentionNormalizationError("attention_entropy: row " + std::to_string(r) + " sums to " +
                                              std::to_string(sum));
        total += h;
    }
    const double mean = total / attention_rows.rows;
    return std::clamp(mean / std::log(static_cast<double>(attention_rows.cols)), 0.0, 1.0);
}

std::vector<uint8_t> enforce_budget(const std::vector<uint8_t>& mask, const std::vector<double>& align_scores,
                                    double rho) {
    if (align_scores.size() != mask.size())
        throw DimensionError("enforce_budget: score and mask lengths differ");
    const int m = static_cast<int>(mask.size());
    const int budget = static_cast<int>(std::floor(rho * m));
    const int reused = static_cast<int>(std::count(mask.begin(), mask.end(), uint8_t{1}));
    if (reused <= budget)
        return mask;

    std::vector<int> candidates;
    candidates.reserve(static_cast<size_t>(reused));
    for (int i = 0; i < m; ++i)
        if (mask[static_cast<size_t>(i)])
            candidates.push_back(i);
    std::stable_sort(candidates.begin(), candidates.end(),
                     [&](int a, int b) { return align_scores[static_cast<size_t>(a)] > align_scores[static_cast<size_t>(b)]; });

    std::vector<uint8_t> trimmed(mask.size(), 0);
    for (int i = 0; i < budget; ++i)
        trimmed[static_cast<size_t>(candidates[static_cast<size_t>(i)])] = 1;
    return trimmed;
}

LayerKv splice(const std::vector<uint8_t>& mask, const std::vector<RemapResult>& remap, const LayerKv& cached,
               const Matrix& fresh_k, const Matrix& fresh_v) {
    const int m = fresh_k.rows;
    if (static_cast<int>(mask.size()) != m || static_cast<int>(remap.size()) != m)
        throw DimensionError("splice: mask/remap length != token count");
    if (!cached.k.same_shape(fresh_k) || !cached.v.same_shape(fresh_v))
        throw DimensionError("splice: cached and fresh block shapes differ");

    // Start from a poisoned buffer so a skipped position is detectable.
    const double sentinel = std::numeric_limits<double>::quiet_NaN();
    LayerKv out{Matrix(m, fresh_k.cols, sentinel), Matrix(m, fresh_v.cols, sentinel)};
    for (int i = 0; i < m; ++i) {
        if (mask[static_cast<size_t>(i)]) {
            const RemapResult r = remap[static_cast<size_t>(i)];
            if (!r.in_view())
                throw MaskRemapInconsistency("splice: token " + std::to_string(i) +
                                             " is reused but has no valid aligned index");
            std::copy_n(cached.k.row(r.index).data(), fresh_k.cols, out.k.row(i).data());
            std::copy_n(cached.v.row(r.index).data(), fresh_v.cols, out.v.row(i).data());
        } else {
            std::copy_n(fresh_k.row(i).data(), fresh_k.cols, out.k.row(i).data());
            std::copy_n(fresh_v.row(i).data(), fresh_v.cols, out.v.row(i).data());
        }
    }
    return out;
}

void update_cache(KvCacheState& cache, const std::vector<LayerKv>& spliced, const Matrix& features,
                  int64_t step, CacheWritePolicy policy, const std::vector<std::vector<uint8_t>>* layer_masks) {
    if (step <= cache.step)
        throw StaleWriteError("update_cache: step " + std::to_string(step) + " does not advance past " +
                              std::to_string(cache.step));
    if (!cache.layers.empty() && cache.layers.size() != spliced.size())
        throw DimensionError("update_cache: layer count changed");

    if (policy == CacheWritePolicy::kWriteAll || cache.layers.empty()) {
        cache.layers = spliced;
    } else {
        if (layer_masks == nullptr || layer_masks->size() != spliced.size())
            throw DimensionError("update_cache: refreshed-only policy needs per-layer masks");
        for (size_t l = 0; l < spliced.size(); ++l) {
            const auto& mask = (*layer_masks)[l];
            if (static_cast<int>(mask.size()) != spliced[l].k.rows)
                throw DimensionError("update_cache: mask length != token count");
            for (int i = 0; i < spliced[l].k.rows; ++i) {
                if (mask[static_cast<size_t>(i)])
                    continue;
                std::copy_n(spliced[l].k.row(i).data(), spliced[l].k.cols, cache.layers[l].k.row(i).data());
                std::copy_n(spliced[l].v.row(i).data(), spliced[l].v.cols, cache.layers[l].v.row(i).data());
            }
        }
    }
    cache.feature_cache = features;
    cache.step = step;
}

namespace {

void write_f32_block(std::ofstream& out, const Matrix& m) {
    for (double v : m.data) {
        const float f = static_cast<float>(v);
        uint32_t bits;
        std::memcpy(&bits, &f, sizeof(bits));
        const unsigned char bytes[4] = {static_cast<unsigned char>(bits & 0xff),
                                        static_cast<unsigned char>((bits >> 8) & 0xff),
                                        static_cast<unsigned char>((bits >> 16) & 0xff),
                                        static_cast<unsigned char>((bits >> 24) & 0xff)};
        out.write(reinterpret_cast<const char*>(bytes), 4);
    }
}

Matrix read_f32_block(std::ifstream& in, int rows, int cols) {
    Matrix m(rows, cols);
    for (double& v : m.data) {
        unsigned char bytes[4];
        in.read(reinterpret_cast<char*>(bytes), 4);
        if (!in)
            throw Error("cache snapshot: truncated f32 block");
        uint32_t bits = static_cast<uint32_t>(bytes[0]) | (static_cast<uint32_t>(bytes[1]) << 8) |
                        (static_cast<uint32_t>(bytes[2]) << 16) | (static_cast<uint32_t>(bytes[3]) << 24);
        float f;
        std::memcpy(&f, &bits, sizeof(f));
        v = static_cast<double>(f);
    }
    return m;
}

}  // namespace

void KvCacheState::save(const std::string& path) const {
    nlohmann::json header;
    header["layers"] = layers.size();
    header["tokens"] = layers.empty() ? feature_cache.rows : layers.front().k.rows;
    header["kv_dim"] = layers.empty() ? 0 : layers.front().k.cols;
    header["feature_dim"] = feature_cache.cols;
    header["step"] = step;
    header["blocks"] = {"k", "v", "features"};
    const std::string header_str = header.dump();

    std::ofstream out(path, std::ios::binary);
    if (!out)
        throw Error("cache snapshot: cannot open " + path + " for writing");
    const uint32_t len = static_cast<uint32_t>(header_str.size());
    const unsigned char len_bytes[4] = {static_cast<unsigned char>(len & 0xff),
                                        static_cast<unsigned char>((len >> 8) & 0xff),
                                        static_cast<unsigned char>((len >> 16) & 0xff),
                                        static_cast<unsigned char>((len >> 24) & 0xff)};
    out.write(reinterpret_cast<const char*>(len_bytes), 4);
    out.write(header_str.data(), static_cast<std::streamsize>(header_str.size()));
    for (const LayerKv& layer : layers) {
        write_f32_block(out, layer.k);
        write_f32_block(out, layer.v);
    }
    write_f32_block(out, feature_cache);
}

KvCacheState KvCacheState::load(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw Error("cache snapshot: cannot open " + path);
    unsigned char len_bytes[4];
    in.read(reinterpret_cast<char*>(len_bytes), 4);
    if (!in)
        throw Error("cache snapshot: truncated header length");
    const uint32_t len = static_cast<uint32_t>(len_bytes[0]) | (static_cast<uint32_t>(len_bytes[1]) << 8) |
                         (static_cast<uint32_t>(len_bytes[2]) << 16) |
                         (static_cast<uint32_t>(len_bytes[3]) << 24);
    std::string header_str(len, '\0');
    in.read(header_str.data(), static_cast<std::streamsize>(len));
    if (!in)
        throw Error("cache snapshot: truncated header");
    const nlohmann::json header = nlohmann::json::parse(header_str);

    KvCacheState cache;
    const int layer_count = header.at("layers").get<int>();
    const int tokens = header.at("tokens").get<int>();
    const int kv_dim = header.at("kv_dim").get<int>();
    const int feature_dim = header.at("feature_dim").get<int>();
    cache.step = header.at("step").get<int64_t>();
    cache.layers.reserve(static_cast<size_t>(layer_count));
    for (int l = 0; l < layer_count; ++l) {
        LayerKv layer;
        layer.k = read_f32_block(in, tokens, kv_dim);
        layer.v = read_f32_block(in, tokens, kv_dim);
        cache.layers.push_back(std::move(layer));
    }
    cache.feature_cache = read_f32_block(in, tokens, feature_dim);
    return cache;
}

}  // namespace navcache
