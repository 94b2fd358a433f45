#include <algorithm>
#include <fstream>

#include "salnet/error.hpp"
#include "salnet/pipeline.hpp"

namespace fs = std::filesystem;

namespace salnet {

namespace {

std::string trim(const std::string& s) {
    size_t b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return "";
    size_t e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

struct Ini {
    std::map<std::string, std::map<std::string, std::string>> sections;

    bool has(const std::string& sec, const std::string& key) const {
        auto s = sections.find(sec);
        return s != sections.end() && s->second.count(key);
    }
    std::string str(const std::string& sec, const std::string& key,
                    const std::string& dflt) const {
        if (!has(sec, key)) return dflt;
        return sections.at(sec).at(key);
    }
    double num(const std::string& sec, const std::string& key, double dflt) const {
        if (!has(sec, key)) return dflt;
        const std::string& v = sections.at(sec).at(key);
        try {
            size_t pos;
            double d = std::stod(v, &pos);
            if (pos != v.size()) throw std::invalid_argument(v);
            return d;
        } catch (const std::exception&) {
            throw InputError("config: bad number for [" + sec + "] " + key + " = " + v);
        }
    }
    bool flag(const std::string& sec, const std::string& key, bool dflt) const {
        if (!has(sec, key)) return dflt;
        std::string v = sections.at(sec).at(key);
        std::transform(v.begin(), v.end(), v.begin(),
                       [](unsigned char c) { return std::tolower(c); });
        if (v == "1" || v == "true" || v == "yes" || v == "on") return true;
        if (v == "0" || v == "false" || v == "no" || v == "off") return false;
        throw InputError("config: bad boolean for [" + sec + "] " + key);
    }
};

} // namespace

std::map<std::string, std::map<std::string, std::string>> parse_ini(const fs::path& file) {
    std::ifstream is(file);
    if (!is) throw InputError("cannot open config " + file.string());
    std::map<std::string, std::map<std::string, std::string>> out;
    std::string line, section;
    long row = 0;
    while (std::getline(is, line)) {
        ++row;
        line = trim(line);
        if (line.empty() || line[0] == '#' || line[0] == ';') continue;
        if (line.front() == '[') {
            if (line.back() != ']')
                throw InputError("config: unterminated section at line " + std::to_string(row));
            section = trim(line.substr(1, line.size() - 2));
            out[section]; // materialize even when empty
            continue;
        }
        size_t eq = line.find('=');
        if (eq == std::string::npos)
            throw InputError("config: expected key = value at line " + std::to_string(row));
        out[section][trim(line.substr(0, eq))] = trim(line.substr(eq + 1));
    }
    return out;
}

PipelineConfig load_pipeline_config(const fs::path& file) {
    Ini ini{parse_ini(file)};
    PipelineConfig cfg;

    cfg.channels = ini.str("channels", "name", cfg.channels);

    cfg.sampler.t = static_cast<int>(ini.num("sampler", "t", cfg.sampler.t));
    cfg.sampler.epsilon = ini.num("sampler", "epsilon", cfg.sampler.epsilon);
    cfg.sampler.relax_depth =
        static_cast<int>(ini.num("sampler", "relax_depth", cfg.sampler.relax_depth));
    cfg.sampler.max_salient_per_frame = static_cast<int>(
        ini.num("sampler", "max_salient_per_frame", cfg.sampler.max_salient_per_frame));
    cfg.sampler.nonsalient_per_frame = static_cast<int>(
        ini.num("sampler", "nonsalient_per_frame", cfg.sampler.nonsalient_per_frame));
    cfg.sampler.sigma_px = ini.num("sampler", "sigma_px", cfg.sampler.sigma_px);
    cfg.sampler.balance = ini.flag("sampler", "balance", cfg.sampler.balance);
    cfg.sampler.seed =
        static_cast<uint64_t>(ini.num("sampler", "seed", static_cast<double>(cfg.sampler.seed)));

    cfg.arch = ini.str("arch", "layers", cfg.arch);

    cfg.solver.learning_rate = ini.num("solver", "learning_rate", cfg.solver.learning_rate);
    cfg.solver.momentum = ini.num("solver", "momentum", cfg.solver.momentum);
    cfg.solver.batch_size = static_cast<int>(ini.num("solver", "batch_size", cfg.solver.batch_size));
    cfg.solver.epochs = static_cast<int>(ini.num("solver", "epochs", cfg.solver.epochs));
    cfg.solver.max_iterations =
        static_cast<long>(ini.num("solver", "max_iterations", cfg.solver.max_iterations));
    cfg.solver.validation_interval = static_cast<long>(
        ini.num("solver", "validation_interval", cfg.solver.validation_interval));
    cfg.solver.seed =
        static_cast<uint64_t>(ini.num("solver", "seed", static_cast<double>(cfg.solver.seed)));
    cfg.solver.lr_step_factor = ini.num("solver", "lr_step_factor", cfg.solver.lr_step_factor);
    std::string strategy = ini.str("solver", "strategy", "per_epoch_full_pass");
    if (strategy == "per_epoch_full_pass")
        cfg.solver.strategy = cnn::Strategy::per_epoch_full_pass;
    else if (strategy == "fixed_chunk")
        cfg.solver.strategy = cnn::Strategy::fixed_chunk;
    else
        throw InputError("config: unknown solver strategy '" + strategy + "'");
    cfg.val_fraction = ini.num("solver", "val_fraction", cfg.val_fraction);

    cfg.workers = static_cast<int>(ini.num("run", "workers", cfg.workers));
    cfg.flow.block = static_cast<int>(ini.num("flow", "block", cfg.flow.block));
    cfg.flow.search = static_cast<int>(ini.num("flow", "search", cfg.flow.search));
    cfg.flow.levels = static_cast<int>(ini.num("flow", "levels", cfg.flow.levels));
    return cfg;
}

} // namespace salnet
