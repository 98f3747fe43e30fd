// Copyright (C) 2026 navcache authors
// SPDX-License-Identifier: Apache-2.0
//
#include <doctest.h>

#include <cmath>

#include "navcache/accounting.hpp"
#include "navcache/config.hpp"
#include "navcache/rng.hpp"
#include "navcache/simulator.hpp"

using namespace navcache;

namespace {

constexpr double kEps = 1e-6;
const Intrinsics kCam{64.0, 64.0, 64.0, 64.0, 128, 128, 16};

SceneConfig box_room() {
    SceneConfig cfg;
    cfg.room_size = {20.0, 20.0, 20.0};
    cfg.seed = 3;
    cfg.landmarks = {
        Landmark{{1.0, 1.0, 0.0}, {2.0, 2.0, 1.0}, "crate"},
        Landmark{{17.0, 17.0, 0.0}, {18.5, 18.5, 1.5}, "barrel"},
    };
    return cfg;
}

}  // namespace

TEST_SUITE("simulator") {

TEST_CASE("rendering the same pose twice is bit-identical") {
    const Scene scene = Scene::build(box_room());
    const PoseSE3 pose = make_camera_pose(5.0, 10.0, 10.0, 0.0);
    const Observation a = render(scene, pose, kCam, 16, 0.02);
    const Observation b = render(scene, pose, kCam, 16, 0.02);
    CHECK(a.features == b.features);
    CHECK(a.depth == b.depth);
    CHECK(a.labels == b.labels);
}

TEST_CASE("stepping 10 m back from a frontal wall adds exactly 10 m of depth") {
    const Scene scene = Scene::build(box_room());
    const Observation near = render(scene, make_camera_pose(15.0, 10.0, 10.0, 0.0), kCam, 8, 0.0);
    const Observation far = render(scene, make_camera_pose(5.0, 10.0, 10.0, 0.0), kCam, 8, 0.0);
    int checked = 0;
    for (size_t i = 0; i < near.labels.size(); ++i) {
        if (near.labels[i] != "wall_east" || far.labels[i] != "wall_east")
            continue;
        // z-depth of a frontal plane is constant across the whole image.
        CHECK(near.depth[i] == doctest::Approx(5.0).epsilon(1e-12));
        CHECK(far.depth[i] - near.depth[i] == doctest::Approx(10.0).epsilon(1e-12));
        ++checked;
    }
    CHECK(checked > 0);
}

TEST_CASE("eta=0 and identity motion give position-wise similarity 1") {
    const Scene scene = Scene::build(box_room());
    const PoseSE3 pose = make_camera_pose(5.0, 10.0, 10.0, 0.3);
    const Observation a = render(scene, pose, kCam, 16, 0.0);
    const Observation b = render(scene, pose, kCam, 16, 0.0);
    for (int i = 0; i < a.features.rows; ++i)
        CHECK(cosine(a.features.row(i), b.features.row(i), kEps) > 1.0 - 1e-5);
}

TEST_CASE("eta perturbs features per view but keeps them close") {
    const Scene scene = Scene::build(box_room());
    const Observation clean = render(scene, make_camera_pose(5.0, 10.0, 10.0, 0.0), kCam, 16, 0.0);
    const Observation noisy = render(scene, make_camera_pose(5.0, 10.0, 10.0, 0.0), kCam, 16, 0.02);
    bool any_differs = false;
    for (int i = 0; i < clean.features.rows; ++i) {
        const double sim = cosine(clean.features.row(i), noisy.features.row(i), kEps);
        CHECK(sim > 0.99);
        for (int d = 0; d < clean.features.cols; ++d)
            any_differs |= clean.features.at(i, d) != noisy.features.at(i, d);
    }
    CHECK(any_differs);
}

TEST_CASE("feature field is deterministic per surface and distinct across surfaces") {
    const Scene scene = Scene::build(box_room());
    const auto a = scene.feature_at(0, 0.25, 0.5, 16);
    const auto b = scene.feature_at(0, 0.25, 0.5, 16);
    CHECK(a == b);
    const auto other = scene.feature_at(1, 0.25, 0.5, 16);
    CHECK(cosine(a, other, kEps) < 0.9);
    // Lipschitz-style locality: shrinking the uv step shrinks the change.
    const auto nearby = scene.feature_at(0, 0.2502, 0.5, 16);
    CHECK(cosine(a, nearby, kEps) > 0.99);
    const auto farther = scene.feature_at(0, 0.3, 0.5, 16);
    CHECK(cosine(a, nearby, kEps) > cosine(a, farther, kEps));
}

TEST_CASE("single phase with zero motion renders identical observations") {
    const Scene scene = Scene::build(box_room());
    TrajectorySpec traj;
    traj.start_x = 5.0;
    traj.start_y = 10.0;
    traj.eye_height = 10.0;
    traj.phases = {Phase{PhaseKind::kCruising, 4, 0.0, 0.0, "crate"}};
    const auto episode = run_episode(scene, traj, kCam, 8, 0.0);
    REQUIRE(episode.size() == 4);
    for (size_t t = 1; t < episode.size(); ++t) {
        CHECK(episode[t].features == episode[0].features);
        CHECK(episode[t].depth == episode[0].depth);
    }
}

TEST_CASE("oracle relevance follows the staged schedule with 0.5 decay") {
    SceneConfig cfg;
    cfg.room_size = {8.0, 6.0, 3.0};
    cfg.seed = 21;
    cfg.landmarks = {
        Landmark{{4.0, 0.6, 0.3}, {4.9, 3.0, 2.4}, "lamp"},
        Landmark{{4.0, 3.2, 0.3}, {4.9, 5.6, 2.4}, "rug"},
    };
    const Scene scene = Scene::build(cfg);
    TrajectorySpec traj;
    traj.start_x = 1.0;
    traj.start_y = 3.0;
    traj.phases = {Phase{PhaseKind::kCruising, 3, 0.0, 0.0, "lamp"},
                   Phase{PhaseKind::kGoal, 3, 0.0, 0.0, "rug"}};
    const auto episode = run_episode(scene, traj, kCam, 8, 0.0);
    REQUIRE(episode.size() == 6);

    int lamp_token = -1, rug_token = -1;
    for (size_t i = 0; i < episode[0].labels.size(); ++i) {
        if (episode[0].labels[i] == "lamp")
            lamp_token = static_cast<int>(i);
        if (episode[0].labels[i] == "rug")
            rug_token = static_cast<int>(i);
    }
    REQUIRE(lamp_token >= 0);
    REQUIRE(rug_token >= 0);

    // Phase 1: lamp active, rug not yet activated.
    CHECK(episode[2].oracle_relevance[static_cast<size_t>(lamp_token)] == doctest::Approx(1.0));
    CHECK(episode[2].oracle_relevance[static_cast<size_t>(rug_token)] == doctest::Approx(0.0));
    // Boundary: outgoing label halves, incoming label saturates.
    CHECK(episode[3].oracle_relevance[static_cast<size_t>(lamp_token)] == doctest::Approx(0.5));
    CHECK(episode[3].oracle_relevance[static_cast<size_t>(rug_token)] == doctest::Approx(1.0));
    // Walls were never active.
    for (size_t i = 0; i < episode[3].labels.size(); ++i)
        if (episode[3].labels[i].rfind("wall", 0) == 0)
            CHECK(episode[3].oracle_relevance[i] == doctest::Approx(0.0));
}

TEST_CASE("a trajectory that walks through a wall is rejected") {
    const Scene scene = Scene::build(box_room());
    TrajectorySpec traj;
    traj.start_x = 18.0;
    traj.start_y = 10.0;
    traj.eye_height = 1.5;
    traj.phases = {Phase{PhaseKind::kCruising, 20, 0.0, 1.0, ""}};
    CHECK_THROWS_AS(run_episode(scene, traj, kCam, 8, 0.0), TrajectoryOutOfBounds);

    TrajectorySpec bad_start = traj;
    bad_start.start_x = 25.0;
    CHECK_THROWS_AS(run_episode(scene, bad_start, kCam, 8, 0.0), TrajectoryOutOfBounds);
}

TEST_CASE("an unknown active label is a config error") {
    const Scene scene = Scene::build(box_room());
    TrajectorySpec traj;
    traj.start_x = 5.0;
    traj.start_y = 10.0;
    traj.phases = {Phase{PhaseKind::kCruising, 2, 0.0, 0.0, "unicorn"}};
    CHECK_THROWS_AS(run_episode(scene, traj, kCam, 8, 0.0), ConfigError);
}

TEST_CASE("geometric consistency: stored depth reprojects onto the ray-cast hit") {
    const Scene scene = Scene::build(box_room());
    const PoseSE3 prev_pose = make_camera_pose(12.0, 10.0, 10.0, 0.0);
    const PoseSE3 cur_pose = make_camera_pose(12.2, 10.1, 10.0, 0.08);
    const Observation prev = render(scene, prev_pose, kCam, 8, 0.0);
    const Observation cur = render(scene, cur_pose, kCam, 8, 0.0);
    const TokenGrid grid = TokenGrid::from_intrinsics(kCam);
    const PoseSE3 rel = prev_pose.inverse().compose(cur_pose);

    // Interior tokens sit on a uniform-label 3x3 neighborhood, away from
    // surface boundaries where a half-patch offset can change the label.
    const auto uniform_neighborhood = [&](int token) {
        const int row = grid.row_of(token), col = grid.col_of(token);
        for (int dr = -1; dr <= 1; ++dr)
            for (int dc = -1; dc <= 1; ++dc) {
                const int r = row + dr, c = col + dc;
                if (r < 0 || r >= grid.rows || c < 0 || c >= grid.cols)
                    return false;
                if (cur.labels[static_cast<size_t>(grid.index(r, c))] !=
                    cur.labels[static_cast<size_t>(token)])
                    return false;
            }
        return true;
    };

    int same_surface = 0, interior = 0;
    for (int i = 0; i < grid.token_count(); ++i) {
        // Route 1: the pipeline's remap inputs (center pixel + stored depth).
        const Vec3 p = back_project(grid.centers[static_cast<size_t>(i)], cur.depth[static_cast<size_t>(i)], kCam);
        const auto px = project(rel.apply(p), kCam);
        // Route 2: the ray-cast ground truth hit projected independently.
        const Vec3 world = cur.hit_points[static_cast<size_t>(i)];
        const Vec3 in_prev = prev_pose.inverse().apply(world);
        const auto oracle_px = project(in_prev, kCam);
        REQUIRE(px.has_value() == oracle_px.has_value());
        if (!px)
            continue;
        CHECK(std::abs(px->x - oracle_px->x) < 1e-6);
        CHECK(std::abs(px->y - oracle_px->y) < 1e-6);

        if (px->x < kCam.patch || px->x >= kCam.width - kCam.patch || px->y < kCam.patch ||
            px->y >= kCam.height - kCam.patch)
            continue;
        if (!uniform_neighborhood(i))
            continue;
        ++interior;
        const int patch = grid.index(static_cast<int>(px->y / kCam.patch), static_cast<int>(px->x / kCam.patch));
        if (prev.labels[static_cast<size_t>(patch)] == cur.labels[static_cast<size_t>(i)])
            ++same_surface;
    }
    REQUIRE(interior > 20);
    CHECK(same_surface >= interior * 9 / 10);
}

TEST_CASE("turn-heavy preset: aligned similarity is higher while cruising than while turning") {
    const RunConfig cfg = preset_config("turn-heavy");
    int ordered = 0;
    const int seeds = 5;
    for (uint64_t seed = 1; seed <= seeds; ++seed) {
        const Scene scene = Scene::build(cfg.scene).with_seed(hash_combine(cfg.scene.seed, seed));
        const auto episode = run_episode(scene, cfg.trajectory, cfg.camera, cfg.model.feature_dim, cfg.eta);
        const TokenGrid grid = TokenGrid::from_intrinsics(cfg.camera);
        double explore_sum = 0.0, cruise_sum = 0.0;
        int explore_n = 0, cruise_n = 0;
        for (size_t t = 1; t < episode.size(); ++t) {
            const PoseSE3 rel = episode[t - 1].pose.inverse().compose(episode[t].pose);
            const auto remaps = remap_frame(episode[t].depth, episode[t].depth_valid, rel, cfg.camera, grid,
                                            episode[t].features, episode[t - 1].features, cfg.k_window, kEps);
            const ReuseGap gap = reuse_gap(episode[t], episode[t - 1], remaps, kEps);
            const PhaseKind kind =
                cfg.trajectory.phases[static_cast<size_t>(cfg.trajectory.phase_index_of(static_cast<int>(t)))].kind;
            if (kind == PhaseKind::kExploration) {
                explore_sum += gap.r_align_mean;
                ++explore_n;
            } else if (kind == PhaseKind::kCruising) {
                cruise_sum += gap.r_align_mean;
                ++cruise_n;
            }
        }
        REQUIRE(explore_n > 0);
        REQUIRE(cruise_n > 0);
        if (cruise_sum / cruise_n > explore_sum / explore_n)
            ++ordered;
    }
    CHECK(ordered == seeds);
}

TEST_CASE("scene validation rejects bad rooms and landmarks") {
    SceneConfig cfg = box_room();
    cfg.landmarks.clear();
    CHECK_THROWS_AS(Scene::build(cfg), ConfigError);

    cfg = box_room();
    cfg.landmarks.push_back(Landmark{{5, 5, 0}, {4, 6, 1}, "inverted"});
    CHECK_THROWS_AS(Scene::build(cfg), ConfigError);

    cfg = box_room();
    cfg.landmarks.push_back(Landmark{{19, 19, 0}, {22, 21, 1}, "outside"});
    CHECK_THROWS_AS(Scene::build(cfg), ConfigError);
}

}  // TEST_SUITE
