// Copyright (C) 2026 navcache authors
// SPDX-License-Identifier: Apache-2.0
//
#include <doctest.h>

#include <cmath>
#include <random>

#include "navcache/gating.hpp"

using namespace navcache;

namespace {

constexpr double kEps = 1e-6;

Matrix rows_with_cosines(const std::vector<double>& cosines) {
    // Unit rows in a 2D subspace at the requested angle to (1, 0, 0, 0).
    Matrix m(static_cast<int>(cosines.size()), 4);
    for (size_t i = 0; i < cosines.size(); ++i) {
        m.at(static_cast<int>(i), 0) = cosines[i];
        m.at(static_cast<int>(i), 1) = std::sqrt(1.0 - cosines[i] * cosines[i]);
    }
    return m;
}

std::vector<RemapResult> identity_remaps(int tokens) {
    std::vector<RemapResult> out;
    for (int i = 0; i < tokens; ++i)
        out.push_back(RemapResult::at(i));
    return out;
}

}  // namespace

TEST_SUITE("gating") {

TEST_CASE("cosine trivia: self, orthogonal, antipodal") {
    const std::vector<double> e1{1.0, 0.0};
    const std::vector<double> e2{0.0, 1.0};
    const std::vector<double> ne1{-1.0, 0.0};
    CHECK(cosine(e1, e1, kEps) == doctest::Approx(1.0).epsilon(1e-5));
    CHECK(cosine(e1, e2, kEps) == doctest::Approx(0.0));
    CHECK(cosine(e1, ne1, kEps) == doctest::Approx(-1.0).epsilon(1e-5));
    CHECK(cosine(std::vector<double>{0.0, 0.0}, e1, kEps) == 0.0);
    CHECK_THROWS_AS(cosine(e1, std::vector<double>{1.0, 0.0, 0.0}, kEps), DimensionError);
}

TEST_CASE("cosine symmetry and positive scale invariance") {
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> value(-2.0, 2.0), scale(0.1, 50.0);
    for (int trial = 0; trial < 200; ++trial) {
        std::vector<double> a(8), b(8);
        for (size_t i = 0; i < a.size(); ++i) {
            a[i] = value(rng);
            b[i] = value(rng);
        }
        const double c = scale(rng);
        std::vector<double> ca(a);
        for (double& v : ca)
            v *= c;
        CHECK(cosine(a, b, kEps) == doctest::Approx(cosine(b, a, kEps)).epsilon(1e-12));
        CHECK(std::abs(cosine(ca, b, kEps) - cosine(a, b, kEps)) < 1e-6);
    }
}

TEST_CASE("visual gate thresholds similarities per token") {
    const Matrix cached = rows_with_cosines({1.0, 1.0, 1.0});
    const Matrix current = rows_with_cosines({0.9, 0.8, 0.86});
    const auto mask = visual_gate(current, cached, identity_remaps(3), 0.85, kEps);
    CHECK(mask == std::vector<uint8_t>{1, 0, 1});
}

TEST_CASE("visual gate: identical frames all pass, out-of-view all fail") {
    const Matrix features = rows_with_cosines({0.3, 0.5, 0.7, 0.9});
    CHECK(visual_gate(features, features, identity_remaps(4), 0.85, kEps) ==
          std::vector<uint8_t>{1, 1, 1, 1});
    const std::vector<RemapResult> oov(4, RemapResult::out_of_view());
    CHECK(visual_gate(features, features, oov, 0.85, kEps) == std::vector<uint8_t>{0, 0, 0, 0});
}

TEST_CASE("raising tau_vis never enlarges the reusable set") {
    std::mt19937_64 rng(13);
    std::uniform_real_distribution<double> cos_dist(-0.999, 0.999), tau(-1.0, 1.0);
    for (int trial = 0; trial < 100; ++trial) {
        std::vector<double> sims(16);
        for (double& s : sims)
            s = cos_dist(rng);
        const Matrix cached = rows_with_cosines(std::vector<double>(16, 1.0));
        const Matrix current = rows_with_cosines(sims);
        double lo = tau(rng), hi = tau(rng);
        if (lo > hi)
            std::swap(lo, hi);
        const auto loose = visual_gate(current, cached, identity_remaps(16), lo, kEps);
        const auto strict = visual_gate(current, cached, identity_remaps(16), hi, kEps);
        for (size_t i = 0; i < loose.size(); ++i)
            CHECK(strict[i] <= loose[i]);
    }
}

TEST_CASE("semantic gate: absolute and delta conditions") {
    CHECK(semantic_gate({0.9}, {0.9}, 0.70, 0.30) == std::vector<uint8_t>{1});
    CHECK(semantic_gate({0.0, 0.0}, {0.0, 0.0}, 0.70, 0.30) == std::vector<uint8_t>{0, 0});
    CHECK(semantic_gate({0.5}, {0.1}, 0.70, 0.30) == std::vector<uint8_t>{1});
    CHECK(semantic_gate({0.5}, {0.4}, 0.70, 0.30) == std::vector<uint8_t>{0});
    CHECK_THROWS_AS(semantic_gate({1.2}, {0.0}, 0.70, 0.30), ScoreRangeError);
    CHECK_THROWS_AS(semantic_gate({0.5}, {-0.1}, 0.70, 0.30), ScoreRangeError);
    CHECK_THROWS_AS(semantic_gate({0.5, 0.5}, {0.5}, 0.70, 0.30), DimensionError);
}

TEST_CASE("raising tau_abs or tau_delta never enlarges the veto set") {
    std::mt19937_64 rng(17);
    std::uniform_real_distribution<double> score(0.0, 1.0);
    for (int trial = 0; trial < 100; ++trial) {
        std::vector<double> s(24), prev(24);
        for (size_t i = 0; i < s.size(); ++i) {
            s[i] = score(rng);
            prev[i] = score(rng);
        }
        double a1 = score(rng), a2 = score(rng), d1 = score(rng), d2 = score(rng);
        if (a1 > a2)
            std::swap(a1, a2);
        if (d1 > d2)
            std::swap(d1, d2);
        const auto loose = semantic_gate(s, prev, a1, d1);
        const auto strict = semantic_gate(s, prev, a2, d2);
        for (size_t i = 0; i < s.size(); ++i)
            CHECK(strict[i] <= loose[i]);
    }
}

TEST_CASE("fuse truth table") {
    CHECK(fuse({1}, {0}) == std::vector<uint8_t>{1});
    CHECK(fuse({1}, {1}) == std::vector<uint8_t>{0});
    CHECK(fuse({0}, {0}) == std::vector<uint8_t>{0});
    CHECK(fuse({0}, {1}) == std::vector<uint8_t>{0});
    CHECK_THROWS_AS(fuse({1, 0}, {1}), DimensionError);
}

TEST_CASE("fuse equals the elementwise oracle on random masks at M=196") {
    std::mt19937_64 rng(19);
    std::bernoulli_distribution bit(0.5);
    for (int trial = 0; trial < 500; ++trial) {
        std::vector<uint8_t> m_vis(196), m_sem(196);
        for (size_t i = 0; i < 196; ++i) {
            m_vis[i] = bit(rng);
            m_sem[i] = bit(rng);
        }
        const auto m = fuse(m_vis, m_sem);
        for (size_t i = 0; i < 196; ++i) {
            CHECK(m[i] == (m_vis[i] == 1 && m_sem[i] == 0 ? 1 : 0));
            CHECK(m[i] <= m_vis[i]);
            CHECK(m[i] <= 1 - m_sem[i]);
        }
    }
}

TEST_CASE("semantic veto wins regardless of visual similarity") {
    std::mt19937_64 rng(23);
    std::bernoulli_distribution bit(0.5);
    for (int trial = 0; trial < 100; ++trial) {
        std::vector<uint8_t> m_vis(32), m_sem(32);
        for (size_t i = 0; i < 32; ++i) {
            m_vis[i] = bit(rng);
            m_sem[i] = bit(rng);
        }
        const auto m = fuse(m_vis, m_sem);
        for (size_t i = 0; i < 32; ++i)
            if (m_sem[i])
                CHECK(m[i] == 0);
    }
}

TEST_CASE("frame gate bypasses identical frames and rejects orthogonal ones") {
    const std::vector<double> pooled{0.4, 0.2, -0.1, 0.7};
    CHECK(frame_gate(pooled, pooled, 0.95, kEps));
    const std::vector<double> a{1.0, 0.0};
    const std::vector<double> b{0.0, 1.0};
    CHECK_FALSE(frame_gate(a, b, 0.95, kEps));
}

TEST_CASE("ReuseMasks validation catches inconsistent fusion or missing remaps") {
    ReuseMasks good{{1, 0}, {0, 1}, {1, 0}, identity_remaps(2)};
    CHECK_NOTHROW(good.validate());

    ReuseMasks bad_fuse{{1, 0}, {1, 1}, {1, 0}, identity_remaps(2)};
    CHECK_THROWS_AS(bad_fuse.validate(), MaskRemapInconsistency);

    ReuseMasks bad_remap{{1}, {0}, {1}, {RemapResult::out_of_view()}};
    CHECK_THROWS_AS(bad_remap.validate(), MaskRemapInconsistency);
}

TEST_CASE("gate config validation") {
    GateConfig cfg;
    CHECK_NOTHROW(cfg.validate());
    cfg.epsilon = 0.0;
    CHECK_THROWS_AS(cfg.validate(), ConfigError);
    cfg = GateConfig{};
    cfg.tau_vis = std::nan("");
    CHECK_THROWS_AS(cfg.validate(), ConfigError);
}

}  // TEST_SUITE
