#include "bgrl/config.hpp"

#include "bgrl/errors.hpp"

#include <charconv>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>

namespace bgrl {

namespace {

std::string trim(const std::string& s) {
    std::size_t a = s.find_first_not_of(" \t");
    if (a == std::string::npos) return "";
    std::size_t b = s.find_last_not_of(" \t");
    return s.substr(a, b - a + 1);
}

[[noreturn]] void fail(const std::string& origin, std::size_t line, const std::string& key,
                       const std::string& why) {
    throw ConfigError(origin + ":" + std::to_string(line) + ": key '" + key + "': " + why);
}

std::size_t parse_size(const std::string& v) {
    std::size_t out{};
    auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
    if (ec != std::errc() || p != v.data() + v.size()) throw std::invalid_argument(v);
    return out;
}

double parse_double(const std::string& v) {
    std::size_t pos = 0;
    double out = std::stod(v, &pos);
    if (pos != v.size()) throw std::invalid_argument(v);
    return out;
}

bool parse_bool(const std::string& v) {
    if (v == "true" || v == "1" || v == "yes") return true;
    if (v == "false" || v == "0" || v == "no") return false;
    throw std::invalid_argument(v);
}

std::vector<std::string> parse_list(const std::string& v) {
    std::vector<std::string> out;
    std::stringstream ss(v);
    std::string item;
    while (std::getline(ss, item, ',')) {
        item = trim(item);
        if (!item.empty()) out.push_back(item);
    }
    return out;
}

} // namespace

RunConfig parse_config_text(const std::string& text, const std::string& origin) {
    RunConfig cfg;

    using Setter = std::function<void(RunConfig&, const std::string&)>;
    static const std::map<std::string, Setter> setters = {
        {"epochs_ae", [](RunConfig& c, const std::string& v) { c.epochs_ae = parse_size(v); }},
        {"lr_ae", [](RunConfig& c, const std::string& v) { c.lr_ae = parse_double(v); }},
        {"ae_channels",
         [](RunConfig& c, const std::string& v) {
             auto parts = parse_list(v);
             if (parts.size() != 3) throw std::invalid_argument(v);
             c.ae_channels1 = parse_size(parts[0]);
             c.ae_channels2 = parse_size(parts[1]);
             c.ae_channels3 = parse_size(parts[2]);
         }},
        {"ae_kernel", [](RunConfig& c, const std::string& v) { c.ae_kernel = parse_size(v); }},
        {"ae_pool", [](RunConfig& c, const std::string& v) { c.ae_pool = parse_size(v); }},
        {"latent_dim", [](RunConfig& c, const std::string& v) { c.latent_dim = parse_size(v); }},
        {"epochs_gnn", [](RunConfig& c, const std::string& v) { c.epochs_gnn = parse_size(v); }},
        {"lr_gnn", [](RunConfig& c, const std::string& v) { c.lr_gnn = parse_double(v); }},
        {"a_dim", [](RunConfig& c, const std::string& v) { c.a_dim = parse_size(v); }},
        {"d_h", [](RunConfig& c, const std::string& v) { c.d_h = parse_size(v); }},
        {"include_self",
         [](RunConfig& c, const std::string& v) { c.include_self = parse_bool(v); }},
        {"train_alpha",
         [](RunConfig& c, const std::string& v) { c.train_alpha = parse_bool(v); }},
        {"slice_k", [](RunConfig& c, const std::string& v) { c.slice_k = parse_size(v); }},
        {"train_fraction",
         [](RunConfig& c, const std::string& v) { c.train_fraction = parse_double(v); }},
        {"task", [](RunConfig& c, const std::string& v) { c.task = v; }},
        {"mode", [](RunConfig& c, const std::string& v) { c.mode = v; }},
        {"genes", [](RunConfig& c, const std::string& v) { c.genes = parse_list(v); }},
        {"seeds",
         [](RunConfig& c, const std::string& v) {
             c.seeds.clear();
             for (const auto& s : parse_list(v)) c.seeds.push_back(parse_size(s));
             if (c.seeds.empty()) throw std::invalid_argument(v);
         }},
        {"jobs", [](RunConfig& c, const std::string& v) { c.jobs = parse_size(v); }},
        {"gene_csv", [](RunConfig& c, const std::string& v) { c.gene_csv = v; }},
        {"features_csv", [](RunConfig& c, const std::string& v) { c.features_csv = v; }},
        {"volumes_dir", [](RunConfig& c, const std::string& v) { c.volumes_dir = v; }},
        {"volumes_out_dir", [](RunConfig& c, const std::string& v) { c.volumes_out_dir = v; }},
        {"ae_checkpoint", [](RunConfig& c, const std::string& v) { c.ae_checkpoint = v; }},
        {"gnn_checkpoint", [](RunConfig& c, const std::string& v) { c.gnn_checkpoint = v; }},
        {"partition_csv", [](RunConfig& c, const std::string& v) { c.partition_csv = v; }},
        {"report_json", [](RunConfig& c, const std::string& v) { c.report_json = v; }},
        {"report_txt", [](RunConfig& c, const std::string& v) { c.report_txt = v; }},
        {"ablation_json", [](RunConfig& c, const std::string& v) { c.ablation_json = v; }},
        {"ablation_txt", [](RunConfig& c, const std::string& v) { c.ablation_txt = v; }},
    };

    std::istringstream in(text);
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        auto hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        line = trim(line);
        if (line.empty()) continue;
        auto eq = line.find('=');
        if (eq == std::string::npos) {
            throw ConfigError(origin + ":" + std::to_string(lineno) +
                              ": expected 'key = value', got '" + line + "'");
        }
        std::string key = trim(line.substr(0, eq));
        std::string value = trim(line.substr(eq + 1));
        auto it = setters.find(key);
        if (it == setters.end()) fail(origin, lineno, key, "unknown key");
        try {
            it->second(cfg, value);
        } catch (const std::exception&) {
            fail(origin, lineno, key, "cannot parse value '" + value + "'");
        }
        // range checks where they can name the line
        if (key == "epochs_ae" && cfg.epochs_ae < 1) fail(origin, lineno, key, "must be >= 1");
        if (key == "epochs_gnn" && cfg.epochs_gnn < 1) fail(origin, lineno, key, "must be >= 1");
        if (key == "lr_ae" && cfg.lr_ae <= 0) fail(origin, lineno, key, "must be > 0");
        if (key == "lr_gnn" && cfg.lr_gnn <= 0) fail(origin, lineno, key, "must be > 0");
        if (key == "train_fraction" && (cfg.train_fraction <= 0 || cfg.train_fraction >= 1))
            fail(origin, lineno, key, "must lie strictly between 0 and 1");
        if (key == "latent_dim" && cfg.latent_dim < 1) fail(origin, lineno, key, "must be >= 1");
        if (key == "a_dim" && cfg.a_dim < 1) fail(origin, lineno, key, "must be >= 1");
        if (key == "d_h" && cfg.d_h < 1) fail(origin, lineno, key, "must be >= 1");
        if (key == "slice_k" && cfg.slice_k < 1) fail(origin, lineno, key, "must be >= 1");
        if (key == "ae_kernel" && cfg.ae_kernel % 2 == 0)
            fail(origin, lineno, key, "must be odd");
        if (key == "ae_pool" && cfg.ae_pool < 1) fail(origin, lineno, key, "must be >= 1");
        if (key == "jobs" && cfg.jobs < 1) fail(origin, lineno, key, "must be >= 1");
        if (key == "ae_channels" &&
            (cfg.ae_channels1 < 1 || cfg.ae_channels2 < 1 || cfg.ae_channels3 < 1))
            fail(origin, lineno, key, "channels must be >= 1");
    }
    return cfg;
}

RunConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open config file: " + path);
    std::stringstream buffer;
    buffer << in.rdbuf();
    return parse_config_text(buffer.str(), path);
}

} // namespace bgrl
