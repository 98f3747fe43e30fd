// Copyright (C) 2026 navcache authors
// SPDX-License-Identifier: Apache-2.0
//
#include "navcache/simulator.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>

#include "navcache/rng.hpp"

namespace navcache {

namespace {

constexpr double kRayEps = 1e-9;
constexpr double kBaryEps = 1e-9;
constexpr double kDegToRad = 3.14159265358979323846 / 180.0;
constexpr double kTwoPi = 2.0 * 3.14159265358979323846;

}  // namespace

std::string phase_kind_name(PhaseKind kind) {
    switch (kind) {
        case PhaseKind::kExploration: return "Exploration";
        case PhaseKind::kCruising: return "Cruising";
        case PhaseKind::kGoal: return "Goal";
    }
    return "Unknown";
}

PhaseKind phase_kind_from_name(const std::string& name) {
    if (name == "Exploration")
        return PhaseKind::kExploration;
    if (name == "Cruising")
        return PhaseKind::kCruising;
    if (name == "Goal")
        return PhaseKind::kGoal;
    throw ConfigError("unknown phase kind '" + name + "'");
}

int TrajectorySpec::total_steps() const {
    int total = 0;
    for (const Phase& p : phases)
        total += p.steps;
    return total;
}

int TrajectorySpec::phase_index_of(int step) const {
    int offset = 0;
    for (size_t i = 0; i < phases.size(); ++i) {
        offset += phases[i].steps;
        if (step < offset)
            return static_cast<int>(i);
    }
    throw Error("phase_index_of: step " + std::to_string(step) + " beyond trajectory");
}

void TrajectorySpec::validate() const {
    if (phases.empty())
        throw ConfigError("trajectory: needs at least one phase");
    for (const Phase& p : phases) {
        if (p.steps < 1)
            throw ConfigError("trajectory: phase step counts must be >= 1");
        if (!std::isfinite(p.yaw_deg_per_step) || !std::isfinite(p.translation_m_per_step))
            throw ConfigError("trajectory: yaw and translation must be finite");
    }
}

void SceneConfig::validate() const {
    if (!(room_size.x > 0 && room_size.y > 0 && room_size.z > 0))
        throw ConfigError("scene: room size must be positive");
    if (landmarks.size() < 2 || landmarks.size() > 6)
        throw ConfigError("scene: expected between 2 and 6 box landmarks");
    for (const Landmark& lm : landmarks) {
        if (!(lm.min.x < lm.max.x && lm.min.y < lm.max.y && lm.min.z < lm.max.z))
            throw ConfigError("scene: landmark '" + lm.label + "' has an empty box");
        if (lm.min.x < 0 || lm.min.y < 0 || lm.min.z < 0 || lm.max.x > room_size.x ||
            lm.max.y > room_size.y || lm.max.z > room_size.z)
            throw ConfigError("scene: landmark '" + lm.label + "' escapes the room");
        if (lm.label.empty())
            throw ConfigError("scene: landmark labels must be non-empty");
    }
    if (harmonics < 1)
        throw ConfigError("scene: harmonics must be >= 1");
    if (!(detail_freq_min > 0 && detail_freq_max >= detail_freq_min))
        throw ConfigError("scene: detail frequency band is empty");
    if (base_amp < 0 || detail_amp < 0)
        throw ConfigError("scene: amplitudes must be non-negative");
}

namespace {

void add_box(std::vector<Surface>& surfaces, const Vec3& lo, const Vec3& hi, const std::string& label) {
    const Vec3 dx{hi.x - lo.x, 0, 0};
    const Vec3 dy{0, hi.y - lo.y, 0};
    const Vec3 dz{0, 0, hi.z - lo.z};
    surfaces.push_back({lo, dx, dy, label});                          // bottom
    surfaces.push_back({{lo.x, lo.y, hi.z}, dx, dy, label});          // top
    surfaces.push_back({lo, dx, dz, label});                          // y = lo.y
    surfaces.push_back({{lo.x, hi.y, lo.z}, dx, dz, label});          // y = hi.y
    surfaces.push_back({lo, dy, dz, label});                          // x = lo.x
    surfaces.push_back({{hi.x, lo.y, lo.z}, dy, dz, label});          // x = hi.x
}

}  // namespace

Scene Scene::build(const SceneConfig& cfg) {
    cfg.validate();
    Scene scene;
    scene.cfg_ = cfg;
    const Vec3& s = cfg.room_size;
    auto& surf = scene.surfaces_;
    surf.push_back({{0, 0, 0}, {s.x, 0, 0}, {0, s.y, 0}, "floor"});
    surf.push_back({{0, 0, s.z}, {s.x, 0, 0}, {0, s.y, 0}, "ceiling"});
    surf.push_back({{0, 0, 0}, {s.x, 0, 0}, {0, 0, s.z}, "wall_south"});
    surf.push_back({{0, s.y, 0}, {s.x, 0, 0}, {0, 0, s.z}, "wall_north"});
    surf.push_back({{0, 0, 0}, {0, s.y, 0}, {0, 0, s.z}, "wall_west"});
    surf.push_back({{s.x, 0, 0}, {0, s.y, 0}, {0, 0, s.z}, "wall_east"});
    for (const Landmark& lm : cfg.landmarks)
        add_box(surf, lm.min, lm.max, lm.label);
    return scene;
}

Scene Scene::with_seed(uint64_t seed) const {
    SceneConfig cfg = cfg_;
    cfg.seed = seed;
    return Scene::build(cfg);
}

bool Scene::inside_room(const Vec3& p, double margin) const {
    const Vec3& s = cfg_.room_size;
    return p.x >= margin && p.x <= s.x - margin && p.y >= margin && p.y <= s.y - margin && p.z >= margin &&
           p.z <= s.z - margin;
}

bool Scene::has_label(const std::string& label) const {
    for (const Surface& s : surfaces_)
        if (s.label == label)
            return true;
    return false;
}

std::optional<RayHit> Scene::cast_ray(const Vec3& origin, const Vec3& dir) const {
    std::optional<RayHit> best;
    for (size_t idx = 0; idx < surfaces_.size(); ++idx) {
        const Surface& s = surfaces_[idx];
        // Solve origin + t*dir = corner + a*edge_u + b*edge_v by Cramer's rule
        // on the 3x3 system [dir, -edge_u, -edge_v] (t, a, b)^T = corner - origin.
        const Vec3 rhs = s.corner - origin;
        const Vec3 col0 = dir;
        const Vec3 col1 = s.edge_u * -1.0;
        const Vec3 col2 = s.edge_v * -1.0;
        const double det = dot(col0, cross(col1, col2));
        if (std::abs(det) < 1e-14)
            continue;
        const double t = dot(rhs, cross(col1, col2)) / det;
        const double a = dot(col0, cross(rhs, col2)) / det;
        const double b = dot(col0, cross(col1, rhs)) / det;
        if (t <= kRayEps)
            continue;
        if (a < -kBaryEps || a > 1.0 + kBaryEps || b < -kBaryEps || b > 1.0 + kBaryEps)
            continue;
        if (!best || t < best->depth) {
            RayHit hit;
            hit.surface = static_cast<int>(idx);
            hit.depth = t;
            hit.point = origin + dir * t;
            hit.u = std::clamp(a, 0.0, 1.0);
            hit.v = std::clamp(b, 0.0, 1.0);
            best = hit;
        }
    }
    return best;
}

namespace {

inline double sinc(double x) {
    if (std::abs(x) < 1e-12)
        return 1.0;
    return std::sin(x) / x;
}

}  // namespace

std::vector<double> Scene::feature_box(int surface, double u0, double v0, double u1, double v1,
                                       int feature_dim) const {
    // The detail field lives in world space (a bank of 3D plane waves), so
    // content is continuous across surface seams; a per-surface base adds a
    // little identity on top. The mean over the footprint parallelogram has
    // a closed form: each wave keeps its center phase attenuated by a sinc
    // per footprint axis.
    const Surface& s = surfaces_[static_cast<size_t>(surface)];
    const Vec3 center = s.corner + s.edge_u * (0.5 * (u0 + u1)) + s.edge_v * (0.5 * (v0 + v1));
    const Vec3 half_u = s.edge_u * (0.5 * std::abs(u1 - u0));
    const Vec3 half_v = s.edge_v * (0.5 * std::abs(v1 - v0));

    const uint64_t field_key = hash_key({cfg_.seed, 0xF1E1Du});
    const uint64_t surf_key = hash_key({cfg_.seed, 0x5u, static_cast<uint64_t>(surface)});

    const int h_count = cfg_.harmonics;
    std::vector<double> args(static_cast<size_t>(h_count));
    std::vector<double> atten(static_cast<size_t>(h_count));
    const double log_step = h_count > 1 ? std::log(cfg_.detail_freq_max / cfg_.detail_freq_min) /
                                              static_cast<double>(h_count - 1)
                                        : 0.0;
    for (int h = 0; h < h_count; ++h) {
        const uint64_t hk = hash_combine(field_key, static_cast<uint64_t>(h));
        const double freq = cfg_.detail_freq_min * std::exp(log_step * h);
        // Uniform direction on the sphere.
        const double z = symmetric_double(hash_combine(hk, 1));
        const double azimuth = kTwoPi * unit_double(hash_combine(hk, 2));
        const double r = std::sqrt(std::max(0.0, 1.0 - z * z));
        const Vec3 wave{freq * r * std::cos(azimuth), freq * r * std::sin(azimuth), freq * z};
        args[static_cast<size_t>(h)] = kTwoPi * dot(wave, center);
        atten[static_cast<size_t>(h)] =
            sinc(kTwoPi * dot(wave, half_u)) * sinc(kTwoPi * dot(wave, half_v));
    }
    const double detail_scale = cfg_.detail_amp / std::sqrt(static_cast<double>(h_count));
    std::vector<double> f(static_cast<size_t>(feature_dim));
    for (int d = 0; d < feature_dim; ++d) {
        const uint64_t dk = hash_combine(field_key, 0xD000 + static_cast<uint64_t>(d));
        double value = cfg_.base_amp * symmetric_double(hash_combine(surf_key, 0xB000 + static_cast<uint64_t>(d)));
        for (int h = 0; h < h_count; ++h) {
            const double phase = kTwoPi * unit_double(hash_combine(dk, static_cast<uint64_t>(h)));
            value += detail_scale * atten[static_cast<size_t>(h)] *
                     std::cos(args[static_cast<size_t>(h)] + phase);
        }
        f[static_cast<size_t>(d)] = value;
    }
    return f;
}

std::vector<double> Scene::feature_at(int surface, double u, double v, int feature_dim) const {
    return feature_box(surface, u, v, u, v, feature_dim);
}

PoseSE3 make_camera_pose(double x, double y, double z, double heading) {
    const double c = std::cos(heading);
    const double s = std::sin(heading);
    PoseSE3 pose;
    // Columns: right (s, -c, 0), down (0, 0, -1), forward (c, s, 0).
    pose.rotation.m = {s, 0, c, -c, 0, s, 0, -1, 0};
    pose.translation = {x, y, z};
    return pose;
}

Observation render(const Scene& scene, const PoseSE3& pose, const Intrinsics& k, int feature_dim, double eta) {
    k.validate();
    if (!scene.inside_room(pose.translation, 0.0))
        throw TrajectoryOutOfBounds("render: camera outside the scene room");
    const TokenGrid grid = TokenGrid::from_intrinsics(k);
    const int m = grid.token_count();

    Observation obs;
    obs.pose = pose;
    obs.features = Matrix(m, feature_dim);
    obs.depth.resize(static_cast<size_t>(m));
    obs.depth_valid.assign(static_cast<size_t>(m), 1);
    obs.surface.resize(static_cast<size_t>(m));
    obs.labels.resize(static_cast<size_t>(m));
    obs.hit_points.resize(static_cast<size_t>(m));
    obs.oracle_relevance.assign(static_cast<size_t>(m), 0.0);

    uint64_t view_key = hash_key({scene.seed(), 0xE7A});
    if (eta > 0.0) {
        for (double rv : pose.rotation.m)
            view_key = hash_combine(view_key, double_bits(rv));
        view_key = hash_combine(view_key, double_bits(pose.translation.x));
        view_key = hash_combine(view_key, double_bits(pose.translation.y));
        view_key = hash_combine(view_key, double_bits(pose.translation.z));
    }

    // Each token feature is the field pooled over the patch footprint, the
    // way a patch encoder summarizes the whole patch. The footprint is the
    // patch projected onto the plane of the center hit (corner rays against
    // that plane), and the pooled value is the closed-form box integral.
    // Depth stays the center-pixel value.
    const double half_patch = k.patch / 2.0;

    for (int i = 0; i < m; ++i) {
        const Pixel& center = grid.centers[static_cast<size_t>(i)];
        const Vec3 dir_cam{(center.x - k.cx) / k.fx, (center.y - k.cy) / k.fy, 1.0};
        const Vec3 dir_world = pose.rotation.apply(dir_cam);
        const auto hit = scene.cast_ray(pose.translation, dir_world);
        if (!hit)
            throw RenderHole("render: ray through token " + std::to_string(i) +
                             " escaped the scene (room must be closed)");
        obs.depth[static_cast<size_t>(i)] = hit->depth;
        obs.surface[static_cast<size_t>(i)] = hit->surface;
        obs.labels[static_cast<size_t>(i)] = scene.surfaces()[static_cast<size_t>(hit->surface)].label;
        obs.hit_points[static_cast<size_t>(i)] = hit->point;

        const Surface& surf = scene.surfaces()[static_cast<size_t>(hit->surface)];
        const Vec3 normal = cross(surf.edge_u, surf.edge_v);
        const double len_u2 = dot(surf.edge_u, surf.edge_u);
        const double len_v2 = dot(surf.edge_v, surf.edge_v);
        double u_min = hit->u, u_max = hit->u, v_min = hit->v, v_max = hit->v;
        for (const Pixel corner : {Pixel{center.x - half_patch, center.y - half_patch},
                                   Pixel{center.x + half_patch, center.y - half_patch},
                                   Pixel{center.x - half_patch, center.y + half_patch},
                                   Pixel{center.x + half_patch, center.y + half_patch}}) {
            const Vec3 corner_dir =
                pose.rotation.apply(Vec3{(corner.x - k.cx) / k.fx, (corner.y - k.cy) / k.fy, 1.0});
            const double denom = dot(corner_dir, normal);
            if (std::abs(denom) < 1e-12)
                continue;
            const double t = dot(surf.corner - pose.translation, normal) / denom;
            if (t <= 0.0)
                continue;
            const Vec3 p = pose.translation + corner_dir * t - surf.corner;
            const double cu = std::clamp(dot(p, surf.edge_u) / len_u2, -0.5, 1.5);
            const double cv = std::clamp(dot(p, surf.edge_v) / len_v2, -0.5, 1.5);
            u_min = std::min(u_min, cu);
            u_max = std::max(u_max, cu);
            v_min = std::min(v_min, cv);
            v_max = std::max(v_max, cv);
        }
        std::vector<double> f =
            scene.feature_box(hit->surface, u_min, v_min, u_max, v_max, feature_dim);
        if (eta > 0.0) {
            const uint64_t tk = hash_combine(view_key, static_cast<uint64_t>(i));
            std::vector<double> g(f.size());
            for (size_t d = 0; d < g.size(); ++d)
                g[d] = symmetric_double(hash_combine(tk, d));
            const double gn = norm(g);
            if (gn > 0.0) {
                const double scale = eta * norm(f) / gn;
                for (size_t d = 0; d < f.size(); ++d)
                    f[d] += scale * g[d];
            }
        }
        std::copy(f.begin(), f.end(), obs.features.row(i).begin());
    }
    return obs;
}

namespace {

/// Relevance of each label at a given phase: 1 while active, halved per later
/// phase, 0 before first activation.
std::map<std::string, double> label_relevance_at_phase(const std::vector<Phase>& phases, int phase_idx) {
    std::map<std::string, double> last_active;  // label -> latest phase index <= phase_idx
    for (int p = 0; p <= phase_idx; ++p) {
        const std::string& label = phases[static_cast<size_t>(p)].active_label;
        if (!label.empty())
            last_active[label] = p;
    }
    std::map<std::string, double> rel;
    for (const auto& [label, active_phase] : last_active)
        rel[label] = std::pow(0.5, static_cast<double>(phase_idx) - active_phase);
    return rel;
}

}  // namespace

std::vector<Observation> run_episode(const Scene& scene, const TrajectorySpec& traj, const Intrinsics& k,
                                     int feature_dim, double eta) {
    traj.validate();
    for (const Phase& p : traj.phases)
        if (!p.active_label.empty() && !scene.has_label(p.active_label))
            throw ConfigError("trajectory: active label '" + p.active_label + "' not present in the scene");

    const double margin = 0.2;
    double heading = traj.heading_deg * kDegToRad;
    Vec3 position{traj.start_x, traj.start_y, traj.eye_height};
    if (!scene.inside_room(position, margin))
        throw TrajectoryOutOfBounds("trajectory: start pose outside the room");

    std::vector<Observation> episode;
    const int total = traj.total_steps();
    episode.reserve(static_cast<size_t>(total));
    for (int t = 0; t < total; ++t) {
        const int phase_idx = traj.phase_index_of(t);
        const Phase& phase = traj.phases[static_cast<size_t>(phase_idx)];
        if (t > 0) {
            heading += phase.yaw_deg_per_step * kDegToRad;
            position = position + Vec3{std::cos(heading), std::sin(heading), 0.0} * phase.translation_m_per_step;
            if (!scene.inside_room(position, margin))
                throw TrajectoryOutOfBounds("trajectory: pose exits the room at step " + std::to_string(t));
        }
        Observation obs = render(scene, make_camera_pose(position.x, position.y, position.z, heading), k,
                                 feature_dim, eta);
        const auto rel = label_relevance_at_phase(traj.phases, phase_idx);
        for (size_t i = 0; i < obs.labels.size(); ++i) {
            const auto it = rel.find(obs.labels[i]);
            obs.oracle_relevance[i] = it == rel.end() ? 0.0 : it->second;
        }
        episode.push_back(std::move(obs));
    }
    return episode;
}

}  // namespace navcache
