#pragma once

#include <json.hpp>

#include <filesystem>
#include <fstream>
#include <optional>
#include <string>
#include <vector>

#include "smo/errors.hpp"
#include "smo/objectives.hpp"
#include "smo/optimizer.hpp"
#include "smo/param_space.hpp"

namespace smo {

using json = nlohmann::json;

/// One optimization run as declared in a config file.
struct RunConfig {
    std::string objective;
    std::uint64_t seed = 0;
    std::string output_dir;
    std::optional<ParamSpace> space;
    std::string dataset_dir;
    int sample_limit = 0;
    SmoConfig smo;
};

namespace cfg {

inline void reject_unknown(const json& obj, std::initializer_list<const char*> allowed,
                           const std::string& where) {
    for (const auto& item : obj.items()) {
        bool known = false;
        for (const char* key : allowed) known = known || item.key() == key;
        if (!known) throw ConfigError("unknown key '" + item.key() + "' in " + where);
    }
}

inline double get_number(const json& obj, const std::string& key, double fallback) {
    if (!obj.contains(key)) return fallback;
    if (!obj.at(key).is_number()) throw ConfigError("field '" + key + "' must be a number");
    return obj.at(key).get<double>();
}

inline long long get_integer(const json& obj, const std::string& key, long long fallback) {
    if (!obj.contains(key)) return fallback;
    if (!obj.at(key).is_number_integer())
        throw ConfigError("field '" + key + "' must be an integer");
    return obj.at(key).get<long long>();
}

inline std::string get_string(const json& obj, const std::string& key,
                              const std::string& fallback) {
    if (!obj.contains(key)) return fallback;
    if (!obj.at(key).is_string()) throw ConfigError("field '" + key + "' must be a string");
    return obj.at(key).get<std::string>();
}

inline bool get_bool(const json& obj, const std::string& key, bool fallback) {
    if (!obj.contains(key)) return fallback;
    if (!obj.at(key).is_boolean()) throw ConfigError("field '" + key + "' must be a boolean");
    return obj.at(key).get<bool>();
}

inline std::string category_to_string(const json& v) {
    if (v.is_string()) return v.get<std::string>();
    if (v.is_number_integer()) return std::to_string(v.get<long long>());
    if (v.is_number()) return format_double(v.get<double>());
    throw ConfigError("categorical choices must be strings or numbers");
}

}  // namespace cfg

/// Parses a parameter-space declaration: an array of records with
/// kind {continuous, discrete, categorical} plus bounds or choices.
inline ParamSpace space_from_json(const json& arr) {
    if (!arr.is_array() || arr.empty())
        throw ConfigError("'space' must be a non-empty array of parameter records");
    std::vector<ParamDesc> params;
    for (const auto& rec : arr) {
        if (!rec.is_object()) throw ConfigError("space entries must be objects");
        const std::string name = cfg::get_string(rec, "name", "");
        if (name.empty()) throw ConfigError("space entry is missing 'name'");
        const std::string kind = cfg::get_string(rec, "kind", "");
        try {
            if (kind == "continuous") {
                cfg::reject_unknown(rec, {"name", "kind", "lo", "hi", "log_scale"},
                                    "parameter '" + name + "'");
                if (!rec.contains("lo") || !rec.contains("hi"))
                    throw ConfigError("continuous parameter '" + name + "' needs lo and hi");
                params.emplace_back(ContinuousParam{name, cfg::get_number(rec, "lo", 0.0),
                                                    cfg::get_number(rec, "hi", 0.0),
                                                    cfg::get_bool(rec, "log_scale", false)});
            } else if (kind == "discrete") {
                cfg::reject_unknown(rec, {"name", "kind", "lo", "hi"},
                                    "parameter '" + name + "'");
                if (!rec.contains("lo") || !rec.contains("hi"))
                    throw ConfigError("discrete parameter '" + name + "' needs lo and hi");
                params.emplace_back(DiscreteParam{name, cfg::get_integer(rec, "lo", 0),
                                                  cfg::get_integer(rec, "hi", 0)});
            } else if (kind == "categorical") {
                cfg::reject_unknown(rec, {"name", "kind", "choices"}, "parameter '" + name + "'");
                if (!rec.contains("choices") || !rec.at("choices").is_array())
                    throw ConfigError("categorical parameter '" + name +
                                      "' needs a 'choices' array");
                std::vector<std::string> choices;
                for (const auto& c : rec.at("choices"))
                    choices.push_back(cfg::category_to_string(c));
                params.emplace_back(CategoricalParam{name, std::move(choices)});
            } else {
                throw ConfigError("parameter '" + name +
                                  "' has unknown kind '" + kind + "'");
            }
        } catch (const InvalidSpace& e) {
            throw ConfigError(e.what());
        }
    }
    try {
        return ParamSpace(std::move(params));
    } catch (const InvalidSpace& e) {
        throw ConfigError(e.what());
    }
}

inline SmoConfig smo_config_from_json(const json& obj) {
    cfg::reject_unknown(obj,
                        {"population_size", "max_groups", "local_leader_limit",
                         "global_leader_limit", "perturbation_rate", "max_iterations",
                         "max_evaluations", "stagnation_epsilon", "stagnation_window",
                         "diversity_epsilon"},
                        "smo");
    SmoConfig smo;
    smo.population_size = std::size_t(cfg::get_integer(obj, "population_size",
                                                       (long long)smo.population_size));
    smo.max_groups = std::size_t(cfg::get_integer(obj, "max_groups", (long long)smo.max_groups));
    smo.local_leader_limit =
        int(cfg::get_integer(obj, "local_leader_limit", smo.local_leader_limit));
    smo.global_leader_limit =
        int(cfg::get_integer(obj, "global_leader_limit", smo.global_leader_limit));
    smo.perturbation_rate = cfg::get_number(obj, "perturbation_rate", smo.perturbation_rate);
    smo.max_iterations = int(cfg::get_integer(obj, "max_iterations", smo.max_iterations));
    smo.max_evaluations =
        std::uint64_t(cfg::get_integer(obj, "max_evaluations", (long long)smo.max_evaluations));
    smo.stagnation_epsilon = cfg::get_number(obj, "stagnation_epsilon", smo.stagnation_epsilon);
    smo.stagnation_window = int(cfg::get_integer(obj, "stagnation_window", smo.stagnation_window));
    smo.diversity_epsilon = cfg::get_number(obj, "diversity_epsilon", smo.diversity_epsilon);
    smo.validate();
    return smo;
}

inline RunConfig parse_run_config(const json& j) {
    if (!j.is_object()) throw ConfigError("run config must be a JSON object");
    cfg::reject_unknown(
        j, {"objective", "seed", "output_dir", "space", "dataset_dir", "sample_limit", "smo"},
        "run config");
    RunConfig cfg;
    cfg.objective = cfg::get_string(j, "objective", "");
    if (cfg.objective.empty()) throw ConfigError("config is missing 'objective'");
    const long long seed = cfg::get_integer(j, "seed", 0);
    if (seed < 0) throw ConfigError("field 'seed' must be non-negative");
    cfg.seed = std::uint64_t(seed);
    cfg.output_dir = cfg::get_string(j, "output_dir", "");
    cfg.dataset_dir = cfg::get_string(j, "dataset_dir", "");
    cfg.sample_limit = int(cfg::get_integer(j, "sample_limit", 0));
    if (j.contains("space")) cfg.space = space_from_json(j.at("space"));
    if (j.contains("smo")) {
        if (!j.at("smo").is_object()) throw ConfigError("'smo' must be an object");
        cfg.smo = smo_config_from_json(j.at("smo"));
    }
    cfg.smo.seed = cfg.seed;
    return cfg;
}

inline RunConfig load_run_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file '" + path + "'");
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        throw ConfigError("config '" + path + "' is not valid JSON: " + e.what());
    }
    return parse_run_config(j);
}

/// Loads the grayscale images an image-backed objective needs: either
/// <dir>/images/*.png or the PNGs directly under <dir>.
inline std::vector<GrayImage> load_objective_images(const std::string& dir, int limit) {
    namespace fs = std::filesystem;
    fs::path root = dir;
    if (fs::exists(root / "images")) root /= "images";
    if (!fs::exists(root)) throw ConfigError("dataset_dir '" + dir + "' does not exist");
    std::vector<fs::path> files;
    for (const auto& entry : fs::directory_iterator(root))
        if (entry.path().extension() == ".png") files.push_back(entry.path());
    std::sort(files.begin(), files.end());
    if (limit > 0 && int(files.size()) > limit) files.resize(limit);
    if (files.empty()) throw ConfigError("dataset_dir '" + dir + "' contains no PNG images");
    std::vector<GrayImage> images;
    images.reserve(files.size());
    for (const auto& f : files) images.push_back(read_png_gray(f.string()));
    return images;
}

/// Checks a user-declared space against the structural pattern an objective
/// expects (kind sequence; categorical arity).
inline void require_space_pattern(const ParamSpace& space,
                                  const std::vector<ParamDesc>& pattern,
                                  const std::string& objective) {
    if (space.dim() != pattern.size())
        throw ConfigError("objective '" + objective + "' needs " +
                          std::to_string(pattern.size()) + " parameters");
    for (std::size_t j = 0; j < pattern.size(); ++j) {
        if (space.param(j).index() != pattern[j].index())
            throw ConfigError("objective '" + objective + "': parameter " + std::to_string(j) +
                              " has the wrong kind");
        if (const auto* cat = std::get_if<CategoricalParam>(&pattern[j]))
            if (std::get<CategoricalParam>(space.param(j)).categories.size() !=
                cat->categories.size())
                throw ConfigError("objective '" + objective + "': parameter " +
                                  std::to_string(j) + " needs " +
                                  std::to_string(cat->categories.size()) + " choices");
    }
}

/// Resolves the objective named in the config, with its search space: the
/// declared one when given (and structurally valid), the objective's default
/// otherwise.
inline Objective build_objective(const RunConfig& cfg) {
    if (cfg.objective == "sphere" || cfg.objective == "rastrigin") {
        const bool is_sphere = cfg.objective == "sphere";
        Objective obj = is_sphere ? make_sphere() : make_rastrigin();
        if (cfg.space) {
            for (std::size_t j = 0; j < cfg.space->dim(); ++j)
                if (cfg.space->is_categorical(j))
                    throw ConfigError("objective '" + cfg.objective +
                                      "' needs a purely numeric space");
            obj.space = *cfg.space;
            obj.known_optimum.reset();
        }
        return obj;
    }
    if (cfg.objective == "mixed_test") {
        Objective obj = make_mixed_test();
        if (cfg.space) {
            require_space_pattern(*cfg.space, paper_preset().params(), cfg.objective);
            obj.space = *cfg.space;
            obj.known_optimum.reset();
        }
        return obj;
    }
    if (cfg.objective == "toy_seg") {
        if (cfg.space) throw ConfigError("objective 'toy_seg' defines its own space");
        if (cfg.dataset_dir.empty())
            throw ConfigError("objective 'toy_seg' needs 'dataset_dir'");
        return make_toy_seg(load_dataset(cfg.dataset_dir, cfg.sample_limit));
    }
    if (cfg.objective == "enhance_score") {
        if (cfg.space) throw ConfigError("objective 'enhance_score' defines its own space");
        if (cfg.dataset_dir.empty())
            throw ConfigError("objective 'enhance_score' needs 'dataset_dir'");
        return make_enhance_objective(
            load_objective_images(cfg.dataset_dir, cfg.sample_limit > 0 ? cfg.sample_limit : 8));
    }
    throw ConfigError("unknown objective '" + cfg.objective + "'");
}

// --- enhancement parameter files ---------------------------------------

struct EnhanceSettings {
    PmdParams pmd;
    ClaheParams clahe;
    EnhanceOrder order = EnhanceOrder::pmd_first;
};

inline EnhanceSettings enhance_settings_from_json(const json& j) {
    if (!j.is_object()) throw ConfigError("enhance params must be a JSON object");
    cfg::reject_unknown(j, {"pmd", "clahe", "order"}, "enhance params");
    EnhanceSettings s;
    if (j.contains("pmd")) {
        const json& p = j.at("pmd");
        cfg::reject_unknown(p, {"kappa", "lambda", "iterations", "edge_fn"}, "pmd");
        s.pmd.kappa = cfg::get_number(p, "kappa", s.pmd.kappa);
        s.pmd.lambda = cfg::get_number(p, "lambda", s.pmd.lambda);
        s.pmd.iterations = int(cfg::get_integer(p, "iterations", s.pmd.iterations));
        s.pmd.edge_fn = edge_function_from_string(
            cfg::get_string(p, "edge_fn", to_string(s.pmd.edge_fn)));
    }
    if (j.contains("clahe")) {
        const json& c = j.at("clahe");
        cfg::reject_unknown(c, {"clip_limit", "tiles_x", "tiles_y", "bins"}, "clahe");
        s.clahe.clip_limit = cfg::get_number(c, "clip_limit", s.clahe.clip_limit);
        s.clahe.tiles_x = int(cfg::get_integer(c, "tiles_x", s.clahe.tiles_x));
        s.clahe.tiles_y = int(cfg::get_integer(c, "tiles_y", s.clahe.tiles_y));
        s.clahe.bins = int(cfg::get_integer(c, "bins", s.clahe.bins));
    }
    const std::string order = cfg::get_string(j, "order", "pmd_first");
    if (order == "pmd_first")
        s.order = EnhanceOrder::pmd_first;
    else if (order == "clahe_first")
        s.order = EnhanceOrder::clahe_first;
    else
        throw ConfigError("'order' must be pmd_first or clahe_first");
    try {
        s.pmd.validate();
        s.clahe.validate();
    } catch (const InvalidParams& e) {
        throw ConfigError(e.what());
    }
    return s;
}

inline EnhanceSettings load_enhance_settings(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open params file '" + path + "'");
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        throw ConfigError("params '" + path + "' is not valid JSON: " + e.what());
    }
    return enhance_settings_from_json(j);
}

inline json enhance_settings_to_json(const EnhanceSettings& s) {
    json j;
    j["pmd"] = {{"kappa", s.pmd.kappa},
                {"lambda", s.pmd.lambda},
                {"iterations", s.pmd.iterations},
                {"edge_fn", to_string(s.pmd.edge_fn)}};
    j["clahe"] = {{"clip_limit", s.clahe.clip_limit},
                  {"tiles_x", s.clahe.tiles_x},
                  {"tiles_y", s.clahe.tiles_y},
                  {"bins", s.clahe.bins}};
    j["order"] = s.order == EnhanceOrder::pmd_first ? "pmd_first" : "clahe_first";
    return j;
}

}  // namespace smo
