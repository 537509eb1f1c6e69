#ifndef BBM_SIMULATOR_HPP
#define BBM_SIMULATOR_HPP

#include <cstdint>
#include <span>
#include <stdexcept>
#include <vector>

#include "bbm/offspring.hpp"

namespace bbm {

struct ModelParams {
    int d = 1;
    double beta = 1.0;
    OffspringLaw law = OffspringLaw::binary();
    std::vector<double> theta;  // size d

    ModelParams() : theta(1, 0.0) {}
    ModelParams(int dim, double rate, OffspringLaw l, std::vector<double> th);

    double mu() const { return law.mean(); }
    double theta_norm2() const;
    // e^{-(beta(mu-1)+||theta||^2/2) t}: the martingale normalization.
    double discount(double t) const;
    // ||theta|| < sqrt(2 beta (mu-1))
    bool theta_admissible() const;
};

// Alive population at one observation time, structure-of-arrays:
// coords is row-major n x d.
struct Snapshot {
    double time = 0.0;
    std::vector<std::uint64_t> ids;
    std::vector<double> coords;

    std::size_t size() const { return ids.size(); }
    std::span<const double> position(std::size_t i, int d) const {
        return {coords.data() + i * std::size_t(d), std::size_t(d)};
    }
};

struct Trajectory {
    std::uint64_t seed = 0;
    std::vector<Snapshot> snapshots;
};

class PopulationCapExceeded : public std::runtime_error {
public:
    PopulationCapExceeded(std::size_t cap, Trajectory partial)
        : std::runtime_error("population cap exceeded"),
          cap_(cap),
          partial_(std::move(partial)) {}
    std::size_t cap() const { return cap_; }
    // Snapshots completed before the cap was hit.
    const Trajectory& partial() const { return partial_; }

private:
    std::size_t cap_;
    Trajectory partial_;
};

inline constexpr std::size_t DEFAULT_POPULATION_CAP = 5'000'000;

// Event-driven simulation: a single root particle at the origin, exponential
// lifetimes of rate beta, Gaussian displacement, offspring from the law.
// Output is bit-identical for any worker count >= 1 (randomness is keyed by
// genealogy id, snapshots are sorted by id).
Trajectory simulate(const ModelParams& params, std::span<const double> schedule,
                    std::uint64_t seed, int workers = 1,
                    std::size_t cap = DEFAULT_POPULATION_CAP);

// Closed-form expected population e^{beta (mu - 1) t}.
double estimate_population(const ModelParams& params, double t);

}  // namespace bbm

#endif
