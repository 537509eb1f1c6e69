#ifndef BBM_OFFSPRING_HPP
#define BBM_OFFSPRING_HPP

#include <cstdint>
#include <vector>

#include "bbm/rng.hpp"

namespace bbm {

struct SizeBiasedLaw {
    std::vector<double> probs;  // q_k = k p_k / mu, q_0 = 0
    std::vector<double> cum;

    int sample(RandomStream& rng) const;
};

// Finite-support offspring law (p_0, ..., p_K). Immutable after construction.
class OffspringLaw {
public:
    // Validates: p_k >= 0, sum = 1 (1e-12), mean > 0.
    explicit OffspringLaw(std::vector<double> probs);

    static OffspringLaw point_mass(int k);       // delta_k
    static OffspringLaw binary() { return point_mass(2); }

    const std::vector<double>& probs() const { return probs_; }
    double mean() const { return mean_; }
    int max_offspring() const { return int(probs_.size()) - 1; }

    int sample(RandomStream& rng) const;

    SizeBiasedLaw size_biased() const;

    // sum_k k (log k)^{1+lambda} p_k
    double llogl_moment(double lambda) const;

private:
    std::vector<double> probs_;
    std::vector<double> cum_;
    double mean_;
};

}  // namespace bbm

#endif
