// Copyright (C) 2026 navcache authors
// SPDX-License-Identifier: Apache-2.0
//
#include "navcache/toy_model.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "navcache/rng.hpp"

namespace navcache {

namespace {

constexpr uint64_t kMatQ = 0;
constexpr uint64_t kMatK = 1;
constexpr uint64_t kMatV = 2;
constexpr uint64_t kMatOut = 3;
constexpr uint64_t kMatLangEmbed = 4;
constexpr uint64_t kMatReadout = 5;
constexpr uint64_t kNoLayer = 0xffffffffULL;

constexpr double kLangEmbedScale = 2.5;

Matrix generate_matrix(uint64_t seed, uint64_t layer, uint64_t matrix_id, int rows, int cols, double scale) {
    Matrix m(rows, cols);
    const uint64_t key = hash_key({seed, layer, matrix_id});
    for (size_t i = 0; i < m.data.size(); ++i)
        m.data[i] = symmetric_double(hash_combine(key, i)) * scale;
    return m;
}

Matrix rope_rows(Matrix m, int first_position, double rope_base) {
    for (int r = 0; r < m.rows; ++r) {
        const auto rotated = apply_rope(m.row(r), first_position + r, rope_base);
        std::copy(rotated.begin(), rotated.end(), m.row(r).begin());
    }
    return m;
}

}  // namespace

void ModelSpec::validate() const {
    if (layers < 1)
        throw ConfigError("ModelSpec: layers must be >= 1");
    if (feature_dim < kv_dim || kv_dim < 1)
        throw ConfigError("ModelSpec: need feature_dim >= kv_dim >= 1");
    if (kv_dim % 2 != 0)
        throw DimensionError("ModelSpec: kv_dim must be even for rotary embeddings");
    if (lang_queries < 1)
        throw ConfigError("ModelSpec: lang_queries must be >= 1");
    if (!(rope_base > 0.0))
        throw ConfigError("ModelSpec: rope_base must be positive");
}

WeightSet init_weights(const ModelSpec& spec) {
    spec.validate();
    WeightSet w;
    const double proj_scale = 1.0 / std::sqrt(static_cast<double>(spec.feature_dim));
    for (int l = 0; l < spec.layers; ++l) {
        const uint64_t layer = static_cast<uint64_t>(l);
        w.w_q.push_back(generate_matrix(spec.seed, layer, kMatQ, spec.feature_dim, spec.kv_dim, proj_scale));
        w.w_k.push_back(generate_matrix(spec.seed, layer, kMatK, spec.feature_dim, spec.kv_dim, proj_scale));
        w.w_v.push_back(generate_matrix(spec.seed, layer, kMatV, spec.feature_dim, spec.kv_dim, proj_scale));
        w.w_out.push_back(generate_matrix(spec.seed, layer, kMatOut, spec.kv_dim, spec.feature_dim, proj_scale));
    }
    w.lang_embed =
        generate_matrix(spec.seed, kNoLayer, kMatLangEmbed, spec.lang_queries, spec.feature_dim, kLangEmbedScale);
    w.readout = generate_matrix(spec.seed, kNoLayer, kMatReadout, spec.feature_dim, kActionCount, proj_scale);
    return w;
}

std::vector<double> apply_rope(std::span<const double> vec, int position, double rope_base) {
    if (vec.size() % 2 != 0)
        throw DimensionError("apply_rope: vector dimension must be even");
    std::vector<double> out(vec.size());
    const double d = static_cast<double>(vec.size());
    for (size_t j = 0; j * 2 < vec.size(); ++j) {
        const double angle = position / std::pow(rope_base, 2.0 * static_cast<double>(j) / d);
        const double c = std::cos(angle);
        const double s = std::sin(angle);
        const double x0 = vec[2 * j];
        const double x1 = vec[2 * j + 1];
        out[2 * j] = x0 * c - x1 * s;
        out[2 * j + 1] = x0 * s + x1 * c;
    }
    return out;
}

StepOutput forward_step(const ModelSpec& spec, const WeightSet& weights, const Matrix& tokens,
                        const Matrix& lang, const CachePlan* plan, const KvCacheState* cache,
                        double epsilon) {
    spec.validate();
    if (tokens.cols != spec.feature_dim)
        throw DimensionError("forward_step: token feature dimension != model feature_dim");
    if (lang.rows != spec.lang_queries || lang.cols != spec.feature_dim)
        throw DimensionError("forward_step: language block shape mismatch");
    if (plan != nullptr) {
        if (cache == nullptr || cache->empty())
            throw MaskRemapInconsistency("forward_step: cache plan given without a populated cache");
        if (static_cast<int>(plan->layer_masks.size()) != spec.layers)
            throw DimensionError("forward_step: plan has wrong layer count");
    }

    const int m = tokens.rows;
    const int keys = m + spec.lang_queries;
    const double inv_sqrt_dkv = 1.0 / std::sqrt(static_cast<double>(spec.kv_dim));

    StepOutput out;
    out.attention.reserve(static_cast<size_t>(spec.layers));
    out.kv.reserve(static_cast<size_t>(spec.layers));
    out.entropy.reserve(static_cast<size_t>(spec.layers));

    Matrix state = lang;
    for (int l = 0; l < spec.layers; ++l) {
        Matrix fresh_k = rope_rows(matmul(tokens, weights.w_k[static_cast<size_t>(l)]), 0, spec.rope_base);
        Matrix fresh_v = matmul(tokens, weights.w_v[static_cast<size_t>(l)]);

        LayerKv vision;
        if (plan != nullptr)
            vision = splice(plan->layer_masks[static_cast<size_t>(l)], plan->remap,
                            cache->layers[static_cast<size_t>(l)], fresh_k, fresh_v);
        else
            vision = LayerKv{std::move(fresh_k), std::move(fresh_v)};

        const Matrix lang_k = rope_rows(matmul(state, weights.w_k[static_cast<size_t>(l)]), m, spec.rope_base);
        const Matrix lang_v = matmul(state, weights.w_v[static_cast<size_t>(l)]);
        const Matrix q = rope_rows(matmul(state, weights.w_q[static_cast<size_t>(l)]), m, spec.rope_base);

        Matrix attn(spec.lang_queries, keys);
        for (int r = 0; r < spec.lang_queries; ++r) {
            double max_logit = -std::numeric_limits<double>::infinity();
            for (int c = 0; c < keys; ++c) {
                const auto key_row = c < m ? vision.k.row(c) : lang_k.row(c - m);
                const double logit = dot(q.row(r), key_row) * inv_sqrt_dkv;
                attn.at(r, c) = logit;
                max_logit = std::max(max_logit, logit);
            }
            double denom = 0.0;
            for (int c = 0; c < keys; ++c) {
                const double e = std::exp(attn.at(r, c) - max_logit);
                attn.at(r, c) = e;
                denom += e;
            }
            for (int c = 0; c < keys; ++c)
                attn.at(r, c) /= denom;
        }

        Matrix context(spec.lang_queries, spec.kv_dim, 0.0);
        for (int r = 0; r < spec.lang_queries; ++r)
            for (int c = 0; c < keys; ++c) {
                const double a = attn.at(r, c);
                const auto value_row = c < m ? vision.v.row(c) : lang_v.row(c - m);
                for (int j = 0; j < spec.kv_dim; ++j)
                    context.at(r, j) += a * value_row[static_cast<size_t>(j)];
            }

        const Matrix delta = matmul(context, weights.w_out[static_cast<size_t>(l)]);
        for (int r = 0; r < state.rows; ++r)
            for (int c = 0; c < state.cols; ++c)
                state.at(r, c) += delta.at(r, c);

        out.entropy.push_back(attention_entropy(attn, epsilon));
        out.attention.push_back(std::move(attn));
        out.kv.push_back(std::move(vision));
    }

    std::vector<double> pooled = column_mean(state);
    out.action_scores.assign(kActionCount, 0.0);
    for (int a = 0; a < kActionCount; ++a)
        for (int dpos = 0; dpos < spec.feature_dim; ++dpos)
            out.action_scores[static_cast<size_t>(a)] += pooled[static_cast<size_t>(dpos)] * weights.readout.at(dpos, a);
    return out;
}

}  // namespace navcache
