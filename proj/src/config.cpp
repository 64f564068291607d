#include "inkscore/config.hpp"

#include <filesystem>
#include <fstream>
#include <sstream>

#include "inkscore/errors.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using nlohmann::ordered_json;

namespace inkscore {

namespace {

[[noreturn]] void bad(const std::string& what) {
    throw ValidationError("config: " + what);
}

std::string want_string(const json& j, const std::string& key) {
    if (!j.at(key).is_string()) bad("'" + key + "' must be a string");
    return j.at(key).get<std::string>();
}

void read_string(const json& j, const char* key, std::string& out) {
    if (j.contains(key)) out = want_string(j, key);
}

void read_number(const json& j, const char* key, double& out) {
    if (!j.contains(key)) return;
    if (!j.at(key).is_number()) bad(std::string("'") + key + "' must be a number");
    out = j.at(key).get<double>();
}

void read_int(const json& j, const char* key, int& out) {
    if (!j.contains(key)) return;
    if (!j.at(key).is_number_integer()) bad(std::string("'") + key + "' must be an integer");
    out = j.at(key).get<int>();
}

void read_bool(const json& j, const char* key, bool& out) {
    if (!j.contains(key)) return;
    if (!j.at(key).is_boolean()) bad(std::string("'") + key + "' must be a boolean");
    out = j.at(key).get<bool>();
}

std::string resolve(const std::string& base_dir, const std::string& path) {
    if (path.empty() || base_dir.empty()) return path;
    fs::path p(path);
    if (p.is_absolute()) return path;
    return (fs::path(base_dir) / p).lexically_normal().string();
}

ProviderConfig read_provider(const json& j, const char* key) {
    ProviderConfig cfg;
    if (!j.contains(key)) return cfg;
    const json& p = j.at(key);
    if (!p.is_object()) bad(std::string("'") + key + "' must be an object");
    read_string(p, "endpoint", cfg.endpoint);
    read_string(p, "model_id", cfg.model_id);
    read_string(p, "api_key_env", cfg.api_key_env);
    if (p.contains("api_key"))
        bad(std::string("'") + key +
            "' must name the key via 'api_key_env'; raw keys are not accepted");
    read_int(p, "batch_size", cfg.batch_size);
    read_int(p, "max_retries", cfg.max_retries);
    read_number(p, "timeout_s", cfg.timeout_s);
    read_int(p, "max_inflight", cfg.max_inflight);
    read_int(p, "backoff_ms", cfg.backoff_ms);
    if (cfg.batch_size < 1) bad(std::string("'") + key + "': batch_size must be >= 1");
    if (cfg.max_inflight < 1) bad(std::string("'") + key + "': max_inflight must be >= 1");
    if (cfg.max_retries < 0) bad(std::string("'") + key + "': max_retries must be >= 0");
    return cfg;
}

ordered_json echo_provider(const ProviderConfig& p) {
    return ordered_json{{"endpoint", p.endpoint},
                        {"model_id", p.model_id},
                        {"api_key_env", p.api_key_env},
                        {"batch_size", p.batch_size},
                        {"max_retries", p.max_retries},
                        {"timeout_s", p.timeout_s},
                        {"max_inflight", p.max_inflight},
                        {"backoff_ms", p.backoff_ms}};
}

} // namespace

RunConfig parse_config(const std::string& json_text, const std::string& base_dir) {
    json j;
    try {
        j = json::parse(json_text);
    } catch (const json::exception& e) {
        bad(std::string("invalid JSON: ") + e.what());
    }
    if (!j.is_object()) bad("top level must be an object");

    RunConfig cfg;
    if (!j.contains("manifest")) bad("'manifest' is required");
    cfg.manifest = resolve(base_dir, want_string(j, "manifest"));
    read_string(j, "out_dir", cfg.out_dir);
    cfg.out_dir = resolve(base_dir, cfg.out_dir);
    read_string(j, "cache_dir", cfg.cache_dir);
    cfg.cache_dir = resolve(base_dir, cfg.cache_dir);
    if (j.contains("seed")) {
        if (!j.at("seed").is_number_integer() || j.at("seed").get<std::int64_t>() < 0)
            bad("'seed' must be a non-negative integer");
        cfg.seed = static_cast<std::uint32_t>(j.at("seed").get<std::uint64_t>());
    }
    read_bool(j, "offline", cfg.offline);

    if (j.contains("stimuli")) {
        const json& s = j.at("stimuli");
        if (!s.is_object()) bad("'stimuli' must map stimulus letters to image paths");
        for (const auto& [letter, path] : s.items()) {
            if (!path.is_string()) bad("stimulus '" + letter + "' path must be a string");
            cfg.stimuli[stimulus_from_string(letter)] = resolve(base_dir, path.get<std::string>());
        }
    }

    if (j.contains("preprocess")) {
        const json& p = j.at("preprocess");
        if (!p.is_object()) bad("'preprocess' must be an object");
        if (p.contains("fixed_threshold")) {
            if (!p.at("fixed_threshold").is_number_integer())
                bad("'fixed_threshold' must be an integer");
            int t = p.at("fixed_threshold").get<int>();
            if (t < 0 || t > 255) bad("'fixed_threshold' must be in [0, 255]");
            cfg.preprocess.fixed_threshold = t;
        }
        read_int(p, "min_speck_area", cfg.preprocess.min_speck_area);
        read_int(p, "out_size", cfg.preprocess.out_size);
        read_bool(p, "match_thickness", cfg.preprocess.match_thickness);
        read_number(p, "thickness_tol", cfg.preprocess.thickness_tol);
        if (cfg.preprocess.out_size < 1) bad("'out_size' must be >= 1");
        if (cfg.preprocess.min_speck_area < 0) bad("'min_speck_area' must be >= 0");
    }

    cfg.hough.seed = cfg.seed;  // line counting follows the run seed by default
    if (j.contains("hough")) {
        const json& h = j.at("hough");
        if (!h.is_object()) bad("'hough' must be an object");
        read_number(h, "rho", cfg.hough.rho);
        read_number(h, "theta_deg", cfg.hough.theta_deg);
        read_int(h, "threshold", cfg.hough.threshold);
        read_number(h, "min_length", cfg.hough.min_length);
        read_number(h, "max_gap", cfg.hough.max_gap);
        read_number(h, "merge_angle_deg", cfg.hough.merge_angle_deg);
        read_number(h, "merge_dist", cfg.hough.merge_dist);
        if (h.contains("seed")) {
            if (!h.at("seed").is_number_integer() || h.at("seed").get<std::int64_t>() < 0)
                bad("'hough.seed' must be a non-negative integer");
            cfg.hough.seed = static_cast<std::uint32_t>(h.at("seed").get<std::uint64_t>());
            cfg.hough_seed_explicit = true;
        }
    }

    if (j.contains("providers")) {
        const json& p = j.at("providers");
        if (!p.is_object()) bad("'providers' must be an object");
        cfg.image_embedding = read_provider(p, "image_embedding");
        cfg.text_embedding = read_provider(p, "text_embedding");
        cfg.caption = read_provider(p, "caption");
    }

    if (j.contains("analysis")) {
        const json& a = j.at("analysis");
        if (!a.is_object()) bad("'analysis' must be an object");
        if (a.contains("analyses")) {
            if (!a.at("analyses").is_array()) bad("'analyses' must be an array of names");
            cfg.analysis.analyses.clear();
            for (const auto& item : a.at("analyses")) {
                if (!item.is_string()) bad("'analyses' entries must be strings");
                cfg.analysis.analyses.push_back(item.get<std::string>());
            }
        }
        read_int(a, "n_folds", cfg.analysis.n_folds);
        if (cfg.analysis.n_folds < 2) bad("'n_folds' must be >= 2");
        read_string(a, "stratify_by", cfg.analysis.stratify_by);
        if (a.contains("models")) {
            if (!a.at("models").is_array()) bad("'models' must be an array of formulas");
            cfg.analysis.models.clear();
            for (const auto& item : a.at("models")) {
                if (!item.is_string()) bad("'models' entries must be formula strings");
                cfg.analysis.models.push_back(item.get<std::string>());
            }
            if (cfg.analysis.models.empty()) bad("'models' must not be empty");
        }
        read_bool(a, "combined_random_intercept", cfg.analysis.combined_random_intercept);
        read_string(a, "combined_random_group", cfg.analysis.combined_random_group);
        read_int(a, "knn_k", cfg.analysis.knn_k);
        if (cfg.analysis.knn_k < 1) bad("'knn_k' must be >= 1");
        read_int(a, "cluster_n_themes", cfg.analysis.cluster_n_themes);
        if (a.contains("cluster_cut_distance")) {
            double d = 0.0;
            read_number(a, "cluster_cut_distance", d);
            cfg.analysis.cluster_cut_distance = d;
            cfg.analysis.cluster_n_themes = 0;  // the explicit threshold wins
        }
        if (cfg.analysis.cluster_n_themes < 0) bad("'cluster_n_themes' must be >= 0");
        if (cfg.analysis.cluster_n_themes == 0 && !cfg.analysis.cluster_cut_distance)
            bad("either 'cluster_n_themes' or 'cluster_cut_distance' must be set");
    }

    return cfg;
}

RunConfig load_config(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ValidationError("config: cannot open '" + path + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_config(buf.str(), fs::path(path).parent_path().string());
}

ordered_json RunConfig::echo() const {
    ordered_json stim = ordered_json::object();
    for (const auto& [s, path] : stimuli) stim[to_string(s)] = path;

    ordered_json pre{{"min_speck_area", preprocess.min_speck_area},
                     {"out_size", preprocess.out_size},
                     {"match_thickness", preprocess.match_thickness},
                     {"thickness_tol", preprocess.thickness_tol}};
    if (preprocess.fixed_threshold) pre["fixed_threshold"] = *preprocess.fixed_threshold;

    ordered_json h{{"rho", hough.rho},
                   {"theta_deg", hough.theta_deg},
                   {"threshold", hough.threshold},
                   {"min_length", hough.min_length},
                   {"max_gap", hough.max_gap},
                   {"merge_angle_deg", hough.merge_angle_deg},
                   {"merge_dist", hough.merge_dist},
                   {"seed", hough.seed}};

    ordered_json ana{{"analyses", analysis.analyses},
                     {"n_folds", analysis.n_folds},
                     {"stratify_by", analysis.stratify_by},
                     {"models", analysis.models},
                     {"combined_random_intercept", analysis.combined_random_intercept},
                     {"combined_random_group", analysis.combined_random_group},
                     {"knn_k", analysis.knn_k},
                     {"cluster_n_themes", analysis.cluster_n_themes}};
    if (analysis.cluster_cut_distance)
        ana["cluster_cut_distance"] = *analysis.cluster_cut_distance;

    return ordered_json{{"manifest", manifest},
                        {"out_dir", out_dir},
                        {"cache_dir", cache_dir},
                        {"seed", seed},
                        {"offline", offline},
                        {"stimuli", stim},
                        {"preprocess", pre},
                        {"hough", h},
                        {"providers",
                         ordered_json{{"image_embedding", echo_provider(image_embedding)},
                                      {"text_embedding", echo_provider(text_embedding)},
                                      {"caption", echo_provider(caption)}}},
                        {"analysis", ana}};
}

} // namespace inkscore
