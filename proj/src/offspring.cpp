#include "bbm/offspring.hpp"

#include <cmath>
#include <stdexcept>

namespace bbm {

namespace {

std::vector<double> cumulative(const std::vector<double>& p) {
    std::vector<double> c(p.size());
    double acc = 0.0;
    for (std::size_t k = 0; k < p.size(); ++k) {
        acc += p[k];
        c[k] = acc;
    }
    if (!c.empty()) c.back() = 1.0;  // guard against rounding at the top
    return c;
}

int sample_inverse_cdf(const std::vector<double>& cum, RandomStream& rng) {
    const double u = rng.uniform();
    // supports are tiny; linear scan beats binary search here
    for (std::size_t k = 0; k < cum.size(); ++k)
        if (u < cum[k]) return int(k);
    return int(cum.size()) - 1;
}

}  // namespace

OffspringLaw::OffspringLaw(std::vector<double> probs) : probs_(std::move(probs)) {
    if (probs_.empty()) throw std::invalid_argument("offspring law: empty support");
    double total = 0.0, mean = 0.0;
    for (std::size_t k = 0; k < probs_.size(); ++k) {
        if (probs_[k] < 0.0)
            throw std::invalid_argument("offspring law: negative probability");
        total += probs_[k];
        mean += double(k) * probs_[k];
    }
    if (std::abs(total - 1.0) > 1e-12)
        throw std::invalid_argument("offspring law: probabilities do not sum to 1");
    mean_ = mean;
    cum_ = cumulative(probs_);
}

OffspringLaw OffspringLaw::point_mass(int k) {
    std::vector<double> p(std::size_t(k) + 1, 0.0);
    p[std::size_t(k)] = 1.0;
    return OffspringLaw(std::move(p));
}

int OffspringLaw::sample(RandomStream& rng) const {
    return sample_inverse_cdf(cum_, rng);
}

SizeBiasedLaw OffspringLaw::size_biased() const {
    if (mean_ <= 0.0)
        throw std::invalid_argument("size_biased: law has zero mean");
    SizeBiasedLaw sb;
    sb.probs.resize(probs_.size());
    for (std::size_t k = 0; k < probs_.size(); ++k)
        sb.probs[k] = double(k) * probs_[k] / mean_;
    sb.cum = cumulative(sb.probs);
    return sb;
}

int SizeBiasedLaw::sample(RandomStream& rng) const {
    return sample_inverse_cdf(cum, rng);
}

double OffspringLaw::llogl_moment(double lambda) const {
    if (lambda < 0.0) throw std::invalid_argument("llogl_moment: lambda < 0");
    double s = 0.0;
    for (std::size_t k = 2; k < probs_.size(); ++k)
        s += double(k) * std::pow(std::log(double(k)), 1.0 + lambda) * probs_[k];
    return s;
}

}  // namespace bbm
