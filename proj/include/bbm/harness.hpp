#ifndef BBM_HARNESS_HPP
#define BBM_HARNESS_HPP

#include <string>
#include <vector>

#include "bbm/config.hpp"

namespace bbm {

// Exit codes: 0 all checks pass, 1 check failure, 2 config error,
// 3 resource cap.
enum ExitCode {
    EXIT_OK = 0,
    EXIT_CHECK_FAILED = 1,
    EXIT_CONFIG_ERROR = 2,
    EXIT_RESOURCE_CAP = 3,
};

struct SeedStatus {
    std::uint64_t seed;
    std::string status;  // "ok" or an error tag
};

struct RunManifest {
    std::string config_echo;
    std::string version;
    double wall_time_s = 0.0;
    std::vector<SeedStatus> seed_status;
    std::vector<std::pair<std::string, std::string>> output_digests;
    int exit_code = EXIT_OK;
};

// Dispatches on config.mode, fans seeds across workers, writes outputs and
// the manifest (manifest.json in the output directory, written atomically).
RunManifest run(const ExperimentConfig& config);

// Deterministic special-function checks; shared by the verify-specfun mode
// and the acceptance suite.
struct CheckResult {
    std::string name;
    double max_error;
    double tolerance;
    bool pass;
};
std::vector<CheckResult> run_specfun_checks();

// Reference kth derivative of the standard normal CDF by central finite
// differences with Ridders-style step extrapolation.
double cdf_derivative_fd(int k, double b);

}  // namespace bbm

#endif
