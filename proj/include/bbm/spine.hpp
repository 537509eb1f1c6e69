#ifndef BBM_SPINE_HPP
#define BBM_SPINE_HPP

#include <functional>
#include <span>
#include <string>
#include <vector>

#include "bbm/simulator.hpp"

namespace bbm {

// One realization of the marked line under the size-biased measure:
// Poisson(beta*mu) branch times on [0,t], iid size-biased offspring counts,
// drift -theta motion. The three components are mutually independent.
struct SpinePath {
    std::vector<double> branch_times;    // sorted
    std::vector<int> offspring_counts;   // one per branch time
    std::vector<double> positions;       // (n_branch + 1) x d, rows at branch
                                         // times then at t
    double horizon = 0.0;

    std::span<const double> endpoint(int d) const {
        return {positions.data() + positions.size() - std::size_t(d),
                std::size_t(d)};
    }
};

namespace spine {

SpinePath sample_spine(const ModelParams& params, double t, RandomStream& rng);

// Probabilists' Gauss-Hermite rule: integrates against the standard normal
// density exactly for polynomials of degree < 2n.
struct GaussHermiteRule {
    std::vector<double> nodes;
    std::vector<double> weights;
};
GaussHermiteRule gauss_hermite(int n);

using PositionFunctional = std::function<double(std::span<const double>)>;

// Right side of the many-to-one identity
//   E sum_{u in N(t)} h(X_u(t))
//     = e^{(beta(mu-1)+||theta||^2/2) t} E^{-theta}[e^{theta.X_xi(t)} h(X_xi(t))]
// with X_xi(t) = sqrt(t) Z - theta t, Z standard normal, evaluated by
// tensorized quadrature for d <= 3 and spine Monte Carlo beyond.
// `cuts`, when non-empty, lists one known discontinuity of h per axis (in x
// coordinates); the axis rule then switches to composite Gauss-Legendre
// panels split at the cut so indicators integrate to full accuracy.
double many_to_one_rhs(const ModelParams& params, double t,
                       const PositionFunctional& h, int nodes_per_axis = 64,
                       std::span<const double> cuts = {});

struct ManyToOneRow {
    std::string functional;
    double t;
    double forward_mean;
    double forward_se;
    double quadrature;
    double zscore;
};

// Built-in functional suite {1, 1{x<=b}, x^j j<=4, e^{-theta.x}} checked
// against forward simulation over num_traj independent trajectories.
std::vector<ManyToOneRow> verify_many_to_one(const ModelParams& params, double t,
                                             int num_traj, std::uint64_t base_seed,
                                             std::span<const double> b,
                                             int workers = 1);

}  // namespace spine
}  // namespace bbm

#endif
