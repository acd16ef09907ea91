#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "annsim/cpd.hpp"
#include "annsim/io.hpp"
#include "annsim/synthgen.hpp"

namespace annsim {

struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Flat `key = value` file with `[section]` headers; `#` starts a comment.
using ConfigSections = std::map<std::string, std::map<std::string, std::string>>;

namespace cfgdetail {

inline std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    const auto e = s.find_last_not_of(" \t\r");
    return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
}

}  // namespace cfgdetail

inline ConfigSections parse_config(std::istream& in) {
    ConfigSections sections;
    std::string line, section;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        line = cfgdetail::trim(line);
        if (line.empty()) continue;
        if (line.front() == '[') {
            if (line.back() != ']')
                throw ConfigError("config line " + std::to_string(lineno) +
                                  ": unterminated section header");
            section = cfgdetail::trim(line.substr(1, line.size() - 2));
            if (section.empty())
                throw ConfigError("config line " + std::to_string(lineno) + ": empty section name");
            sections[section];
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw ConfigError("config line " + std::to_string(lineno) + ": expected key = value");
        const auto key = cfgdetail::trim(line.substr(0, eq));
        if (key.empty())
            throw ConfigError("config line " + std::to_string(lineno) + ": empty key");
        sections[section][key] = cfgdetail::trim(line.substr(eq + 1));
    }
    return sections;
}

inline ConfigSections parse_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file: " + path.string());
    return parse_config(in);
}

namespace cfgdetail {

inline std::vector<std::string> split_list(const std::string& s) {
    std::vector<std::string> out;
    std::string item;
    for (const char c : s) {
        if (c == ',' || c == ' ' || c == '\t') {
            if (!item.empty()) out.push_back(item);
            item.clear();
        } else {
            item += c;
        }
    }
    if (!item.empty()) out.push_back(item);
    return out;
}

inline double to_double(const std::string& s, const std::string& key) {
    try {
        std::size_t used = 0;
        const double v = std::stod(s, &used);
        if (used != s.size()) throw std::invalid_argument(s);
        return v;
    } catch (const std::exception&) {
        throw ConfigError("config key '" + key + "': not a number: " + s);
    }
}

inline std::uint64_t to_u64(const std::string& s, const std::string& key) {
    try {
        // stoull accepts a minus sign and wraps; reject it up front
        if (s.empty() || s[0] == '-') throw std::invalid_argument(s);
        std::size_t used = 0;
        const unsigned long long v = std::stoull(s, &used);
        if (used != s.size()) throw std::invalid_argument(s);
        return v;
    } catch (const std::exception&) {
        throw ConfigError("config key '" + key + "': not a non-negative integer: " + s);
    }
}

inline bool to_bool(const std::string& s, const std::string& key) {
    if (s == "true" || s == "1" || s == "yes" || s == "on") return true;
    if (s == "false" || s == "0" || s == "no" || s == "off") return false;
    throw ConfigError("config key '" + key + "': not a boolean: " + s);
}

}  // namespace cfgdetail

// Typed view over one section; tracks which keys were consumed so unknown
// keys can be rejected (catches typos in sweep configs).
class SectionView {
  public:
    SectionView(const ConfigSections& all, std::string name) : name_(std::move(name)) {
        const auto it = all.find(name_);
        if (it != all.end()) kv_ = &it->second;
    }

    bool has(const std::string& key) const { return kv_ && kv_->count(key); }

    std::string get_string(const std::string& key, const std::string& fallback) {
        const auto* v = fetch(key);
        return v ? *v : fallback;
    }
    double get_double(const std::string& key, double fallback) {
        const auto* v = fetch(key);
        return v ? cfgdetail::to_double(*v, key) : fallback;
    }
    std::uint64_t get_u64(const std::string& key, std::uint64_t fallback) {
        const auto* v = fetch(key);
        return v ? cfgdetail::to_u64(*v, key) : fallback;
    }
    bool get_bool(const std::string& key, bool fallback) {
        const auto* v = fetch(key);
        return v ? cfgdetail::to_bool(*v, key) : fallback;
    }
    std::vector<std::string> get_list(const std::string& key,
                                      const std::vector<std::string>& fallback) {
        const auto* v = fetch(key);
        return v ? cfgdetail::split_list(*v) : fallback;
    }

    void reject_unknown_keys() const {
        if (!kv_) return;
        for (const auto& [k, v] : *kv_)
            if (!seen_.count(k))
                throw ConfigError("config section [" + name_ + "]: unknown key '" + k + "'");
    }

  private:
    const std::string* fetch(const std::string& key) {
        seen_.insert(key);
        if (!kv_) return nullptr;
        const auto it = kv_->find(key);
        return it == kv_->end() ? nullptr : &it->second;
    }

    std::string name_;
    const std::map<std::string, std::string>* kv_ = nullptr;
    mutable std::set<std::string> seen_;
};

struct ExperimentConfig {
    std::vector<std::string> datasets{"classA", "classB", "classC"};  // preset names
    std::vector<Strategy> strategies{Strategy::acpd, Strategy::fcpd, Strategy::fix,
                                     Strategy::orc};
    std::vector<std::size_t> budgets{7};
    std::vector<double> betas{0.0, 0.2};
    double gamma = 0.5;
    std::size_t n_seeds = 10;
    std::uint64_t base_seed = 42;
    std::filesystem::path out = "runs/out";
    std::size_t jobs = 1;
    bool save_annotations = false;
    double relative_offset_collar = 0.0;  // 0 = plain event-F1 collar
    std::size_t snapshot_recording = 0;
    // Overrides applied on top of every preset ([dataset] section).
    std::map<std::string, std::string> dataset_overrides;

    void validate() const {
        if (datasets.empty()) throw ConfigError("experiment: datasets list is empty");
        if (strategies.empty()) throw ConfigError("experiment: strategies list is empty");
        if (budgets.empty()) throw ConfigError("experiment: budgets list is empty");
        if (betas.empty()) throw ConfigError("experiment: betas list is empty");
        if (n_seeds < 1) throw ConfigError("experiment: seeds must be >= 1");
        if (jobs < 1) throw ConfigError("experiment: jobs must be >= 1");
        if (!(gamma > 0.0 && gamma <= 1.0)) throw ConfigError("experiment: gamma must be in (0,1]");
        for (const double b : betas)
            if (!(b >= 0.0 && b <= 1.0)) throw ConfigError("experiment: beta must be in [0,1]");
        for (const std::size_t b : budgets)
            if (b < 1) throw ConfigError("experiment: budgets must be >= 1");
        if (relative_offset_collar < 0.0)
            throw ConfigError("experiment: relative_offset_collar must be >= 0");
    }
};

inline DatasetSpec apply_overrides(DatasetSpec spec,
                                   const std::map<std::string, std::string>& kv) {
    using cfgdetail::to_double;
    using cfgdetail::to_u64;
    for (const auto& [key, value] : kv) {
        if (key == "n_recordings")
            spec.n_recordings = static_cast<std::size_t>(to_u64(value, key));
        else if (key == "duration")
            spec.duration = to_double(value, key);
        else if (key == "events_per_recording")
            spec.events_per_recording = static_cast<std::size_t>(to_u64(value, key));
        else if (key == "event_duration_min")
            spec.event_duration_min = to_double(value, key);
        else if (key == "event_duration_max")
            spec.event_duration_max = to_double(value, key);
        else if (key == "min_event_gap")
            spec.min_event_gap = to_double(value, key);
        else if (key == "embedding_dim")
            spec.embedding_dim = static_cast<std::size_t>(to_u64(value, key));
        else if (key == "window_len")
            spec.window_len = to_double(value, key);
        else if (key == "hop")
            spec.hop = to_double(value, key);
        else if (key == "separation")
            spec.separation = to_double(value, key);
        else if (key == "noise_sigma")
            spec.noise_sigma = to_double(value, key);
        else
            throw ConfigError("config section [dataset]: unknown key '" + key + "'");
    }
    return spec;
}

inline ExperimentConfig experiment_from_sections(const ConfigSections& sections) {
    for (const auto& [name, kv] : sections)
        if (name != "experiment" && name != "dataset")
            throw ConfigError("config: unknown section [" + name + "]");

    ExperimentConfig cfg;
    SectionView exp(sections, "experiment");
    cfg.datasets = exp.get_list("datasets", cfg.datasets);
    const auto strat_names = exp.get_list("strategies", {"acpd", "fcpd", "fix", "orc"});
    cfg.strategies.clear();
    for (const auto& s : strat_names) {
        try {
            cfg.strategies.push_back(strategy_from_string(s));
        } catch (const std::exception&) {
            throw ConfigError("experiment: unknown strategy '" + s + "'");
        }
    }
    cfg.budgets.clear();
    for (const auto& b : exp.get_list("budgets", {"7"}))
        cfg.budgets.push_back(static_cast<std::size_t>(cfgdetail::to_u64(b, "budgets")));
    cfg.betas.clear();
    for (const auto& b : exp.get_list("betas", {"0", "0.2"}))
        cfg.betas.push_back(cfgdetail::to_double(b, "betas"));
    cfg.gamma = exp.get_double("gamma", cfg.gamma);
    cfg.n_seeds = static_cast<std::size_t>(exp.get_u64("seeds", cfg.n_seeds));
    cfg.base_seed = exp.get_u64("base_seed", cfg.base_seed);
    cfg.out = exp.get_string("out", cfg.out.string());
    cfg.jobs = static_cast<std::size_t>(exp.get_u64("jobs", cfg.jobs));
    cfg.save_annotations = exp.get_bool("save_annotations", cfg.save_annotations);
    cfg.relative_offset_collar =
        exp.get_double("relative_offset_collar", cfg.relative_offset_collar);
    cfg.snapshot_recording =
        static_cast<std::size_t>(exp.get_u64("snapshot_recording", cfg.snapshot_recording));
    exp.reject_unknown_keys();

    const auto ds = sections.find("dataset");
    if (ds != sections.end()) cfg.dataset_overrides = ds->second;
    cfg.validate();
    return cfg;
}

inline ExperimentConfig experiment_from_file(const std::filesystem::path& path) {
    return experiment_from_sections(parse_config(path));
}

}  // namespace annsim
