#ifndef BBM_CONFIG_HPP
#define BBM_CONFIG_HPP

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "bbm/simulator.hpp"

namespace bbm {

enum class Mode {
    simulate,
    verify_specfun,
    verify_many_to_one,
    martingales,
    expansion_thm1,
    expansion_thm2,
    moment_growth,
};

std::string mode_name(Mode mode);
Mode parse_mode(const std::string& name);

// Validation failure with the offending field spelled out.
class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct ExperimentConfig {
    Mode mode = Mode::simulate;
    ModelParams params;
    std::vector<double> schedule;
    std::vector<std::uint64_t> seeds;
    std::size_t cap = DEFAULT_POPULATION_CAP;
    int workers = 1;
    std::filesystem::path out_dir = "out";

    // mode-specific
    std::vector<double> b;   // thm1 threshold / many-to-one indicator
    std::vector<double> a;   // thm2 box lower corner
    int m = 0;               // expansion order, <= 4
    double lambda = 1.0;     // moment-growth exponent
    int k_max = 2;           // martingales: max |k|
    int num_traj = 100000;   // many-to-one forward sample size

    // JSON round-trip; seeds and grid times are carried as decimal strings
    // so reserialization is bit-exact.
    static ExperimentConfig from_json_text(const std::string& text);
    static ExperimentConfig load(const std::filesystem::path& path);
    std::string to_json_text() const;

    void validate() const;  // throws ConfigError
};

}  // namespace bbm

#endif
