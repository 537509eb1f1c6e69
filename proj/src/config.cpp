#include "bbm/config.hpp"

#include <json.hpp>

#include <cmath>
#include <fstream>
#include <sstream>

#include "bbm/io.hpp"

namespace bbm {

using nlohmann::json;

std::string mode_name(Mode mode) {
    switch (mode) {
        case Mode::simulate: return "simulate";
        case Mode::verify_specfun: return "verify-specfun";
        case Mode::verify_many_to_one: return "verify-many-to-one";
        case Mode::martingales: return "martingales";
        case Mode::expansion_thm1: return "expansion-thm1";
        case Mode::expansion_thm2: return "expansion-thm2";
        case Mode::moment_growth: return "moment-growth";
    }
    return "?";
}

Mode parse_mode(const std::string& name) {
    for (Mode m : {Mode::simulate, Mode::verify_specfun, Mode::verify_many_to_one,
                   Mode::martingales, Mode::expansion_thm1, Mode::expansion_thm2,
                   Mode::moment_growth})
        if (mode_name(m) == name) return m;
    throw ConfigError("unknown mode '" + name + "'");
}

namespace {

double number_or_string(const json& v, const char* field) {
    if (v.is_string()) return io::parse_double(v.get<std::string>());
    if (v.is_number()) return v.get<double>();
    throw ConfigError(std::string(field) + ": expected number or decimal string");
}

std::vector<double> double_list(const json& v, const char* field) {
    if (!v.is_array()) throw ConfigError(std::string(field) + ": expected array");
    std::vector<double> out;
    for (const auto& e : v) out.push_back(number_or_string(e, field));
    return out;
}

}  // namespace

ExperimentConfig ExperimentConfig::from_json_text(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ConfigError(std::string("config parse error: ") + e.what());
    }

    ExperimentConfig cfg;
    if (!j.contains("mode")) throw ConfigError("mode: missing");
    cfg.mode = parse_mode(j.at("mode").get<std::string>());

    const int d = j.value("d", 1);
    const double beta = j.contains("beta") ? number_or_string(j["beta"], "beta") : 1.0;

    std::vector<double> probs;
    if (j.contains("offspring")) {
        // list of [k, p_k] pairs
        int max_k = 0;
        for (const auto& pair : j.at("offspring"))
            max_k = std::max(max_k, pair.at(0).get<int>());
        probs.assign(std::size_t(max_k) + 1, 0.0);
        for (const auto& pair : j.at("offspring"))
            probs[std::size_t(pair.at(0).get<int>())] =
                number_or_string(pair.at(1), "offspring");
    } else {
        probs = {0.0, 0.0, 1.0};  // binary branching default
    }

    std::vector<double> theta(std::size_t(d), 0.0);
    if (j.contains("theta")) theta = double_list(j["theta"], "theta");

    try {
        cfg.params = ModelParams(d, beta, OffspringLaw(std::move(probs)),
                                 std::move(theta));
    } catch (const std::invalid_argument& e) {
        throw ConfigError(e.what());
    }

    if (j.contains("schedule")) cfg.schedule = double_list(j["schedule"], "schedule");

    if (j.contains("seeds")) {
        const auto& s = j["seeds"];
        if (s.is_array()) {
            for (const auto& e : s) {
                if (e.is_string())
                    cfg.seeds.push_back(std::stoull(e.get<std::string>()));
                else
                    cfg.seeds.push_back(e.get<std::uint64_t>());
            }
        } else if (s.is_object()) {
            std::uint64_t base;
            if (s.at("base").is_string())
                base = std::stoull(s["base"].get<std::string>());
            else
                base = s.at("base").get<std::uint64_t>();
            const std::uint64_t count = s.at("count").get<std::uint64_t>();
            for (std::uint64_t i = 0; i < count; ++i) cfg.seeds.push_back(base + i);
        } else {
            throw ConfigError("seeds: expected array or {base, count}");
        }
    }

    cfg.cap = j.value("cap", DEFAULT_POPULATION_CAP);
    cfg.workers = j.value("workers", 1);
    if (j.contains("out")) cfg.out_dir = j["out"].get<std::string>();
    if (j.contains("b")) cfg.b = double_list(j["b"], "b");
    if (j.contains("a")) cfg.a = double_list(j["a"], "a");
    cfg.m = j.value("m", 0);
    cfg.lambda = j.contains("lambda") ? number_or_string(j["lambda"], "lambda") : 1.0;
    cfg.k_max = j.value("k_max", 2);
    cfg.num_traj = j.value("num_traj", 100000);
    return cfg;
}

ExperimentConfig ExperimentConfig::load(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config " + path.string());
    std::stringstream buf;
    buf << in.rdbuf();
    return from_json_text(buf.str());
}

std::string ExperimentConfig::to_json_text() const {
    json j;
    j["mode"] = mode_name(mode);
    j["d"] = params.d;
    j["beta"] = io::format_double(params.beta);
    json offspring = json::array();
    for (std::size_t k = 0; k < params.law.probs().size(); ++k)
        if (params.law.probs()[k] > 0.0)
            offspring.push_back({int(k), io::format_double(params.law.probs()[k])});
    j["offspring"] = offspring;
    json theta = json::array();
    for (double t : params.theta) theta.push_back(io::format_double(t));
    j["theta"] = theta;
    json schedule = json::array();
    for (double s : this->schedule) schedule.push_back(io::format_double(s));
    j["schedule"] = schedule;
    json seeds = json::array();
    for (std::uint64_t s : this->seeds) seeds.push_back(std::to_string(s));
    j["seeds"] = seeds;
    j["cap"] = cap;
    j["workers"] = workers;
    j["out"] = out_dir.string();
    if (!b.empty()) {
        json jb = json::array();
        for (double v : b) jb.push_back(io::format_double(v));
        j["b"] = jb;
    }
    if (!a.empty()) {
        json ja = json::array();
        for (double v : a) ja.push_back(io::format_double(v));
        j["a"] = ja;
    }
    j["m"] = m;
    j["lambda"] = io::format_double(lambda);
    j["k_max"] = k_max;
    j["num_traj"] = num_traj;
    return j.dump(2);
}

void ExperimentConfig::validate() const {
    if (workers < 1) throw ConfigError("workers: must be >= 1");
    if (m < 0 || m > 4) throw ConfigError("m: must be in [0, 4]");
    if (lambda < 0.0) throw ConfigError("lambda: must be >= 0");
    if (!params.theta_admissible())
        throw ConfigError("theta: ||theta|| must be < sqrt(2 beta (mu-1))");
    const bool needs_schedule =
        mode != Mode::verify_specfun && mode != Mode::verify_many_to_one;
    if (needs_schedule) {
        if (schedule.empty()) throw ConfigError("schedule: missing or empty");
        for (std::size_t i = 0; i < schedule.size(); ++i) {
            if (schedule[i] <= 0.0 || (i > 0 && schedule[i] <= schedule[i - 1]))
                throw ConfigError("schedule: must be positive and strictly increasing");
        }
        if (estimate_population(params, schedule.back()) > 2.0 * double(cap))
            throw ConfigError("schedule: expected population exceeds the cap");
        if (seeds.empty()) throw ConfigError("seeds: missing or empty");
    }
    if (mode == Mode::verify_many_to_one) {
        if (schedule.size() != 1)
            throw ConfigError("schedule: verify-many-to-one needs exactly one time");
        if (seeds.empty()) throw ConfigError("seeds: missing or empty");
    }
    if (mode == Mode::expansion_thm1 && int(b.size()) != params.d)
        throw ConfigError("b: dimension must match d");
    if (mode == Mode::expansion_thm2) {
        if (int(a.size()) != params.d || int(b.size()) != params.d)
            throw ConfigError("a/b: dimensions must match d");
        for (int j = 0; j < params.d; ++j)
            if (!(a[std::size_t(j)] < b[std::size_t(j)]))
                throw ConfigError("a/b: requires a < b coordinatewise");
    }
}

}  // namespace bbm
