// Copyright (C) 2026 navcache authors
// SPDX-License-Identifier: Apache-2.0
//
#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "navcache/geometry.hpp"
#include "navcache/mat.hpp"

namespace navcache {

enum class PhaseKind { kExploration, kCruising, kGoal };

std::string phase_kind_name(PhaseKind kind);
PhaseKind phase_kind_from_name(const std::string& name);

struct Phase {
    PhaseKind kind = PhaseKind::kCruising;
    int steps = 1;
    double yaw_deg_per_step = 0.0;
    double translation_m_per_step = 0.0;
    std::string active_label;
};

struct TrajectorySpec {
    double start_x = 1.0;
    double start_y = 1.0;
    double eye_height = 1.5;
    double heading_deg = 0.0;
    std::vector<Phase> phases;

    int total_steps() const;
    int phase_index_of(int step) const;
    void validate() const;
};

/// Finite textured plane: corner + a * edge_u + b * edge_v, (a, b) in [0,1]^2.
struct Surface {
    Vec3 corner;
    Vec3 edge_u;
    Vec3 edge_v;
    std::string label;
};

struct Landmark {
    Vec3 min;
    Vec3 max;
    std::string label;
};

struct SceneConfig {
    Vec3 room_size{24.0, 4.0, 3.0};
    std::vector<Landmark> landmarks;
    uint64_t seed = 7;
    // Procedural feature field: per-surface constant base plus harmonics
    // whose frequencies span [detail_freq_min, detail_freq_max] cycles/meter
    // geometrically. The band covers patch footprints from close-ups to far
    // walls, so pooled patch features decorrelate with offset measured in
    // footprints rather than meters.
    double base_amp = 0.3;
    double detail_amp = 1.5;
    double detail_freq_min = 0.05;
    double detail_freq_max = 3.2;
    int harmonics = 14;

    void validate() const;
};

struct RayHit {
    int surface = -1;
    double depth = 0.0;  // camera-frame z of the hit
    Vec3 point;          // world coordinates
    double u = 0.0;      // barycentric coordinates on the surface
    double v = 0.0;
};

/// Closed rectangular room (4 walls + floor + ceiling) with box landmarks.
/// Immutable once built; the feature field is a pure function of
/// (seed, surface, uv).
class Scene {
  public:
    static Scene build(const SceneConfig& cfg);

    const std::vector<Surface>& surfaces() const { return surfaces_; }
    const SceneConfig& config() const { return cfg_; }
    uint64_t seed() const { return cfg_.seed; }

    /// Scene rebuilt with a different texture seed, same geometry.
    Scene with_seed(uint64_t seed) const;

    /// Nearest surface hit along origin + t * dir; dir need not be unit.
    /// The returned depth is the ray parameter t (camera z when dir is the
    /// camera-frame direction with z = 1).
    std::optional<RayHit> cast_ray(const Vec3& origin, const Vec3& dir) const;

    /// Deterministic smooth feature sample at a surface point.
    std::vector<double> feature_at(int surface, double u, double v, int feature_dim) const;

    /// Mean of the field over the uv box [u0,u1]x[v0,v1], evaluated in
    /// closed form (each harmonic integrates to a sinc-attenuated cosine).
    std::vector<double> feature_box(int surface, double u0, double v0, double u1, double v1,
                                    int feature_dim) const;

    bool inside_room(const Vec3& p, double margin) const;
    bool has_label(const std::string& label) const;

  private:
    SceneConfig cfg_;
    std::vector<Surface> surfaces_;
};

/// Per-step token grid observation.
struct Observation {
    Matrix features;                  // [M x D]
    std::vector<double> depth;        // camera-frame z per token
    std::vector<uint8_t> depth_valid;
    PoseSE3 pose;                     // camera-to-world
    std::vector<int> surface;         // hit surface index per token
    std::vector<std::string> labels;  // hit surface label per token
    std::vector<Vec3> hit_points;     // world-frame hit per token
    std::vector<double> oracle_relevance;
};

/// Camera-to-world pose at planar position (x, y, eye z) with heading psi
/// (radians, 0 = world +x, counterclockwise). Camera convention: +z forward,
/// +x right, +y down.
PoseSE3 make_camera_pose(double x, double y, double z, double heading);

/// Ray-casts one observation. eta adds a seeded view-dependent perturbation
/// of that relative magnitude to every token feature (0 disables it exactly).
Observation render(const Scene& scene, const PoseSE3& pose, const Intrinsics& k, int feature_dim, double eta);

/// Integrates the trajectory and renders every step, filling in the staged
/// oracle relevance: 1 while a label's phase is active, halved for each
/// later phase, 0 before a label first becomes active.
std::vector<Observation> run_episode(const Scene& scene, const TrajectorySpec& traj, const Intrinsics& k,
                                     int feature_dim, double eta);

}  // namespace navcache
