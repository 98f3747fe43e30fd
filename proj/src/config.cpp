// Copyright (C) 2026 navcache authors
// SPDX-License-Identifier: Apache-2.0
//
#include "navcache/config.hpp"

#include <cmath>
#include <fstream>
#include <set>

namespace navcache {

using nlohmann::json;

std::string run_mode_name(RunMode mode) {
    switch (mode) {
        case RunMode::kFull: return "full";
        case RunMode::kNoCache: return "no_cache";
        case RunMode::kNoRemap: return "no_remap";
        case RunMode::kNoSemanticGate: return "no_semantic_gate";
        case RunMode::kNoVisualGate: return "no_visual_gate";
    }
    return "full";
}

RunMode run_mode_from_name(const std::string& name) {
    if (name == "full")
        return RunMode::kFull;
    if (name == "no_cache")
        return RunMode::kNoCache;
    if (name == "no_remap")
        return RunMode::kNoRemap;
    if (name == "no_semantic_gate")
        return RunMode::kNoSemanticGate;
    if (name == "no_visual_gate")
        return RunMode::kNoVisualGate;
    throw ConfigError("unknown mode '" + name +
                      "' (expected full, no_cache, no_remap, no_semantic_gate or no_visual_gate)");
}

ModeSwitches switches_for(RunMode mode) {
    ModeSwitches s;
    switch (mode) {
        case RunMode::kFull: break;
        case RunMode::kNoCache: s.caching = false; break;
        case RunMode::kNoRemap: s.remap = false; break;
        case RunMode::kNoSemanticGate: s.semantic_gate = false; break;
        case RunMode::kNoVisualGate: s.visual_gate = false; break;
    }
    return s;
}

int RunConfig::effective_focus_k() const {
    if (focus_k > 0)
        return focus_k;
    return static_cast<int>(std::ceil(0.1 * token_count()));
}

void RunConfig::validate() const {
    camera.validate();
    scene.validate();
    trajectory.validate();
    model.validate();
    gates.validate();
    budget.validate();
    if (focus_k < 0)
        throw ConfigError("focus_k must be >= 0 (0 selects ceil(0.1 * M))");
    if (k_window < 0)
        throw ConfigError("k_window must be >= 0");
    if (eta < 0.0)
        throw ConfigError("eta must be >= 0");
    if (seeds.empty())
        throw ConfigError("seeds must be non-empty");
}

namespace {

Landmark make_landmark(double x0, double y0, double z0, double x1, double y1, double z1,
                       const std::string& label) {
    return Landmark{{x0, y0, z0}, {x1, y1, z1}, label};
}

Phase make_phase(PhaseKind kind, int steps, double yaw, double trans, const std::string& label) {
    return Phase{kind, steps, yaw, trans, label};
}

RunConfig base_config() {
    RunConfig cfg;
    cfg.camera = Intrinsics{64.0, 64.0, 64.0, 64.0, 128, 128, 16};
    cfg.model = ModelSpec{};
    cfg.gates = GateConfig{};
    cfg.budget = BudgetConfig{};
    return cfg;
}

RunConfig corridor_preset() {
    RunConfig cfg = base_config();
    cfg.scene_preset = "corridor";
    cfg.scene.room_size = {24.0, 4.0, 3.0};
    cfg.scene.seed = 7;
    cfg.scene.landmarks = {
        make_landmark(8.0, 3.3, 0.0, 8.6, 3.95, 1.2, "plant"),
        make_landmark(14.0, 0.1, 0.0, 15.0, 0.9, 0.8, "table"),
        make_landmark(19.6, 0.05, 0.0, 20.4, 0.3, 2.2, "door"),
        make_landmark(21.0, 1.4, 0.0, 22.2, 2.6, 0.08, "goal_mat"),
    };
    cfg.trajectory.start_x = 1.5;
    cfg.trajectory.start_y = 2.0;
    cfg.trajectory.eye_height = 1.5;
    cfg.trajectory.heading_deg = 0.0;
    cfg.trajectory.phases = {
        make_phase(PhaseKind::kExploration, 4, 12.0, 0.05, "plant"),
        make_phase(PhaseKind::kExploration, 4, -12.0, 0.05, "plant"),
        make_phase(PhaseKind::kCruising, 12, 0.0, 0.4, "table"),
        make_phase(PhaseKind::kGoal, 6, 6.0, 0.15, "goal_mat"),
    };
    return cfg;
}

RunConfig two_room_preset() {
    RunConfig cfg = base_config();
    cfg.scene_preset = "two-room";
    cfg.scene.room_size = {16.0, 8.0, 3.0};
    cfg.scene.seed = 11;
    cfg.scene.landmarks = {
        make_landmark(5.0, 1.0, 0.0, 5.5, 1.5, 1.8, "lamp"),
        make_landmark(2.0, 6.0, 0.0, 4.0, 7.5, 0.9, "couch"),
        make_landmark(11.0, 3.0, 0.0, 13.0, 5.0, 0.06, "rug"),
        make_landmark(14.6, 6.0, 0.0, 15.6, 7.8, 2.0, "shelf"),
    };
    cfg.trajectory.start_x = 2.0;
    cfg.trajectory.start_y = 2.5;
    cfg.trajectory.eye_height = 1.5;
    cfg.trajectory.heading_deg = 10.0;
    cfg.trajectory.phases = {
        make_phase(PhaseKind::kExploration, 5, 14.0, 0.05, "lamp"),
        make_phase(PhaseKind::kExploration, 5, -16.0, 0.05, "lamp"),
        make_phase(PhaseKind::kCruising, 10, 0.0, 0.45, "rug"),
        make_phase(PhaseKind::kExploration, 4, 12.0, 0.05, "rug"),
        make_phase(PhaseKind::kCruising, 5, 0.0, 0.3, "shelf"),
        make_phase(PhaseKind::kGoal, 4, 8.0, 0.1, "shelf"),
    };
    return cfg;
}

RunConfig turn_heavy_preset() {
    RunConfig cfg = base_config();
    cfg.scene_preset = "turn-heavy";
    cfg.scene.room_size = {10.0, 10.0, 3.0};
    cfg.scene.seed = 13;
    cfg.scene.landmarks = {
        make_landmark(1.6, 1.6, 0.0, 2.6, 2.6, 1.6, "statue"),
        make_landmark(7.2, 7.2, 0.0, 8.0, 8.0, 1.3, "fern"),
        make_landmark(1.8, 7.0, 0.0, 2.8, 8.0, 1.0, "crate"),
        make_landmark(7.0, 1.8, 0.0, 7.7, 2.5, 1.8, "sign"),
    };
    cfg.trajectory.start_x = 5.0;
    cfg.trajectory.start_y = 4.6;
    cfg.trajectory.eye_height = 1.5;
    cfg.trajectory.heading_deg = 20.0;
    cfg.trajectory.phases = {
        make_phase(PhaseKind::kExploration, 8, 25.0, 0.06, "statue"),
        make_phase(PhaseKind::kExploration, 6, -30.0, 0.06, "fern"),
        make_phase(PhaseKind::kCruising, 8, 1.0, 0.25, "fern"),
        make_phase(PhaseKind::kGoal, 6, 15.0, 0.08, "crate"),
    };
    return cfg;
}

}  // namespace

std::vector<std::string> preset_names() { return {"corridor", "two-room", "turn-heavy"}; }

RunConfig preset_config(const std::string& name) {
    if (name == "corridor")
        return corridor_preset();
    if (name == "two-room")
        return two_room_preset();
    if (name == "turn-heavy")
        return turn_heavy_preset();
    throw ConfigError("unknown scene preset '" + name + "' (see the presets subcommand)");
}

RunConfig default_config() { return corridor_preset(); }

namespace {

void ensure_keys(const json& j, const std::set<std::string>& allowed, const std::string& path) {
    if (!j.is_object())
        throw ConfigError("config: " + path + " must be an object");
    for (const auto& [key, _] : j.items())
        if (!allowed.count(key))
            throw ConfigError("config: unknown key '" + path + "." + key + "'");
}

Vec3 vec3_from(const json& j, const std::string& path) {
    if (!j.is_array() || j.size() != 3)
        throw ConfigError("config: " + path + " must be an array of 3 numbers");
    return {j[0].get<double>(), j[1].get<double>(), j[2].get<double>()};
}

json vec3_to(const Vec3& v) { return json::array({v.x, v.y, v.z}); }

void parse_scene(const json& j, RunConfig& cfg) {
    ensure_keys(j, {"preset", "room_size", "landmarks", "seed", "base_amp", "detail_amp", "detail_freq",
                    "harmonics"},
                "scene");
    if (j.contains("preset")) {
        const RunConfig preset = preset_config(j.at("preset").get<std::string>());
        cfg.scene_preset = preset.scene_preset;
        cfg.scene = preset.scene;
        cfg.trajectory = preset.trajectory;
    }
    if (j.contains("room_size"))
        cfg.scene.room_size = vec3_from(j.at("room_size"), "scene.room_size");
    if (j.contains("landmarks")) {
        cfg.scene.landmarks.clear();
        for (const auto& lm : j.at("landmarks")) {
            ensure_keys(lm, {"min", "max", "label"}, "scene.landmarks[]");
            cfg.scene.landmarks.push_back(Landmark{vec3_from(lm.at("min"), "scene.landmarks[].min"),
                                                   vec3_from(lm.at("max"), "scene.landmarks[].max"),
                                                   lm.at("label").get<std::string>()});
        }
    }
    if (j.contains("seed"))
        cfg.scene.seed = j.at("seed").get<uint64_t>();
    if (j.contains("base_amp"))
        cfg.scene.base_amp = j.at("base_amp").get<double>();
    if (j.contains("detail_amp"))
        cfg.scene.detail_amp = j.at("detail_amp").get<double>();
    if (j.contains("detail_freq")) {
        const auto& f = j.at("detail_freq");
        if (!f.is_array() || f.size() != 2)
            throw ConfigError("config: scene.detail_freq must be [min, max]");
        cfg.scene.detail_freq_min = f[0].get<double>();
        cfg.scene.detail_freq_max = f[1].get<double>();
    }
    if (j.contains("harmonics"))
        cfg.scene.harmonics = j.at("harmonics").get<int>();
}

void parse_trajectory(const json& j, TrajectorySpec& traj) {
    ensure_keys(j, {"start", "eye_height", "heading_deg", "phases"}, "trajectory");
    if (j.contains("start")) {
        const auto& s = j.at("start");
        if (!s.is_array() || s.size() != 2)
            throw ConfigError("config: trajectory.start must be [x, y]");
        traj.start_x = s[0].get<double>();
        traj.start_y = s[1].get<double>();
    }
    if (j.contains("eye_height"))
        traj.eye_height = j.at("eye_height").get<double>();
    if (j.contains("heading_deg"))
        traj.heading_deg = j.at("heading_deg").get<double>();
    if (j.contains("phases")) {
        traj.phases.clear();
        for (const auto& p : j.at("phases")) {
            ensure_keys(p, {"kind", "steps", "yaw_deg", "translation_m", "active_label"}, "trajectory.phases[]");
            Phase phase;
            phase.kind = phase_kind_from_name(p.at("kind").get<std::string>());
            phase.steps = p.at("steps").get<int>();
            phase.yaw_deg_per_step = p.value("yaw_deg", 0.0);
            phase.translation_m_per_step = p.value("translation_m", 0.0);
            phase.active_label = p.value("active_label", std::string{});
            traj.phases.push_back(std::move(phase));
        }
    }
}

}  // namespace

RunConfig config_from_json(const json& j) {
    ensure_keys(j,
                {"scene", "trajectory", "camera", "model", "gates", "budget", "focus_k", "relevance_source",
                 "k_window", "eta", "seeds", "mode"},
                "<root>");
    RunConfig cfg = base_config();
    cfg.scene_preset.clear();
    if (j.contains("scene"))
        parse_scene(j.at("scene"), cfg);
    else
        cfg = default_config();

    if (j.contains("trajectory"))
        parse_trajectory(j.at("trajectory"), cfg.trajectory);

    if (j.contains("camera")) {
        const auto& c = j.at("camera");
        ensure_keys(c, {"fx", "fy", "cx", "cy", "width", "height", "patch"}, "camera");
        cfg.camera.fx = c.value("fx", cfg.camera.fx);
        cfg.camera.fy = c.value("fy", cfg.camera.fy);
        cfg.camera.cx = c.value("cx", cfg.camera.cx);
        cfg.camera.cy = c.value("cy", cfg.camera.cy);
        cfg.camera.width = c.value("width", cfg.camera.width);
        cfg.camera.height = c.value("height", cfg.camera.height);
        cfg.camera.patch = c.value("patch", cfg.camera.patch);
    }
    if (j.contains("model")) {
        const auto& m = j.at("model");
        ensure_keys(m, {"layers", "feature_dim", "kv_dim", "lang_queries", "seed", "rope_base"}, "model");
        cfg.model.layers = m.value("layers", cfg.model.layers);
        cfg.model.feature_dim = m.value("feature_dim", cfg.model.feature_dim);
        cfg.model.kv_dim = m.value("kv_dim", cfg.model.kv_dim);
        cfg.model.lang_queries = m.value("lang_queries", cfg.model.lang_queries);
        cfg.model.seed = m.value("seed", cfg.model.seed);
        cfg.model.rope_base = m.value("rope_base", cfg.model.rope_base);
    }
    if (j.contains("gates")) {
        const auto& g = j.at("gates");
        ensure_keys(g, {"tau_vis", "tau_abs", "tau_delta", "tau_frame", "epsilon"}, "gates");
        cfg.gates.tau_vis = g.value("tau_vis", cfg.gates.tau_vis);
        cfg.gates.tau_abs = g.value("tau_abs", cfg.gates.tau_abs);
        cfg.gates.tau_delta = g.value("tau_delta", cfg.gates.tau_delta);
        cfg.gates.tau_frame = g.value("tau_frame", cfg.gates.tau_frame);
        cfg.gates.epsilon = g.value("epsilon", cfg.gates.epsilon);
    }
    if (j.contains("budget")) {
        const auto& b = j.at("budget");
        ensure_keys(b, {"rho_min", "rho_max", "alpha", "mode"}, "budget");
        cfg.budget.rho_min = b.value("rho_min", cfg.budget.rho_min);
        cfg.budget.rho_max = b.value("rho_max", cfg.budget.rho_max);
        cfg.budget.alpha = b.value("alpha", cfg.budget.alpha);
        if (b.contains("mode")) {
            const std::string mode = b.at("mode").get<std::string>();
            if (mode == "per_layer")
                cfg.budget.mode = BudgetMode::kPerLayer;
            else if (mode == "global")
                cfg.budget.mode = BudgetMode::kGlobal;
            else
                throw ConfigError("config: budget.mode must be 'per_layer' or 'global'");
        }
    }
    if (j.contains("focus_k"))
        cfg.focus_k = j.at("focus_k").get<int>();
    if (j.contains("relevance_source")) {
        const std::string src = j.at("relevance_source").get<std::string>();
        if (src == "oracle")
            cfg.relevance_source = RelevanceSource::kOracle;
        else if (src == "attention")
            cfg.relevance_source = RelevanceSource::kAttention;
        else
            throw ConfigError("config: relevance_source must be 'oracle' or 'attention'");
    }
    if (j.contains("k_window"))
        cfg.k_window = j.at("k_window").get<int>();
    if (j.contains("eta"))
        cfg.eta = j.at("eta").get<double>();
    if (j.contains("seeds"))
        cfg.seeds = j.at("seeds").get<std::vector<uint64_t>>();
    if (j.contains("mode"))
        cfg.mode = run_mode_from_name(j.at("mode").get<std::string>());

    cfg.validate();
    return cfg;
}

json config_to_json(const RunConfig& cfg) {
    json scene;
    if (!cfg.scene_preset.empty())
        scene["preset"] = cfg.scene_preset;
    scene["room_size"] = vec3_to(cfg.scene.room_size);
    scene["landmarks"] = json::array();
    for (const Landmark& lm : cfg.scene.landmarks)
        scene["landmarks"].push_back({{"min", vec3_to(lm.min)}, {"max", vec3_to(lm.max)}, {"label", lm.label}});
    scene["seed"] = cfg.scene.seed;
    scene["base_amp"] = cfg.scene.base_amp;
    scene["detail_amp"] = cfg.scene.detail_amp;
    scene["detail_freq"] = json::array({cfg.scene.detail_freq_min, cfg.scene.detail_freq_max});
    scene["harmonics"] = cfg.scene.harmonics;

    json phases = json::array();
    for (const Phase& p : cfg.trajectory.phases)
        phases.push_back({{"kind", phase_kind_name(p.kind)},
                          {"steps", p.steps},
                          {"yaw_deg", p.yaw_deg_per_step},
                          {"translation_m", p.translation_m_per_step},
                          {"active_label", p.active_label}});

    return json{
        {"scene", scene},
        {"trajectory",
         {{"start", json::array({cfg.trajectory.start_x, cfg.trajectory.start_y})},
          {"eye_height", cfg.trajectory.eye_height},
          {"heading_deg", cfg.trajectory.heading_deg},
          {"phases", phases}}},
        {"camera",
         {{"fx", cfg.camera.fx},
          {"fy", cfg.camera.fy},
          {"cx", cfg.camera.cx},
          {"cy", cfg.camera.cy},
          {"width", cfg.camera.width},
          {"height", cfg.camera.height},
          {"patch", cfg.camera.patch}}},
        {"model",
         {{"layers", cfg.model.layers},
          {"feature_dim", cfg.model.feature_dim},
          {"kv_dim", cfg.model.kv_dim},
          {"lang_queries", cfg.model.lang_queries},
          {"seed", cfg.model.seed},
          {"rope_base", cfg.model.rope_base}}},
        {"gates",
         {{"tau_vis", cfg.gates.tau_vis},
          {"tau_abs", cfg.gates.tau_abs},
          {"tau_delta", cfg.gates.tau_delta},
          {"tau_frame", cfg.gates.tau_frame},
          {"epsilon", cfg.gates.epsilon}}},
        {"budget",
         {{"rho_min", cfg.budget.rho_min},
          {"rho_max", cfg.budget.rho_max},
          {"alpha", cfg.budget.alpha},
          {"mode", cfg.budget.mode == BudgetMode::kPerLayer ? "per_layer" : "global"}}},
        {"focus_k", cfg.focus_k},
        {"relevance_source", cfg.relevance_source == RelevanceSource::kOracle ? "oracle" : "attention"},
        {"k_window", cfg.k_window},
        {"eta", cfg.eta},
        {"seeds", cfg.seeds},
        {"mode", run_mode_name(cfg.mode)},
    };
}

RunConfig load_config_file(const std::string& path) {
    std::ifstream in(path);
    if (!in)
        throw ConfigError("cannot open config file '" + path + "'");
    json j;
    try {
        j = json::parse(in);
    } catch (const json::parse_error& e) {
        throw ConfigError(std::string("config parse error: ") + e.what());
    }
    return config_from_json(j);
}

}  // namespace navcache
