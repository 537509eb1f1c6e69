#ifndef BBM_MEASURES_HPP
#define BBM_MEASURES_HPP

#include <span>

#include "bbm/simulator.hpp"
#include "bbm/specfun.hpp"

namespace bbm {

enum class Scaling { scaled, fixed };  // threshold b*sqrt(s) vs b

// Weighted population statistics on a snapshot. All reductions use
// compensated (Kahan) accumulation with a fixed chunk decomposition, so
// results are identical for any thread count. The serial_* twins are the
// reference implementations kept for testing and benchmarking.
namespace measures {

// mu_s^theta((-inf, b_s]) with b_s = b*sqrt(s) (scaled) or b (fixed):
// discount(s) * sum_u e^{-theta.X_u} 1{X_u + theta s <= b_s}.
double additive_cdf(const Snapshot& snap, const ModelParams& params,
                    std::span<const double> b, Scaling scaling);
double serial_additive_cdf(const Snapshot& snap, const ModelParams& params,
                           std::span<const double> b, Scaling scaling);

// mu_s^theta((a, b]) over the half-open box.
double additive_box(const Snapshot& snap, const ModelParams& params,
                    std::span<const double> a, std::span<const double> b);
double serial_additive_box(const Snapshot& snap, const ModelParams& params,
                           std::span<const double> a, std::span<const double> b);

// M_t^{(k,theta)} evaluated through heat polynomials:
// discount(t) * sum_u e^{-theta.X_u} prod_j heat_poly(k_j, X_u_j + theta_j t, t).
double hermite_martingale(const Snapshot& snap, const ModelParams& params,
                          const MultiIndex& k);
double serial_hermite_martingale(const Snapshot& snap, const ModelParams& params,
                                 const MultiIndex& k);

// W_t(theta) = M_t^{(0,theta)}
double additive_martingale(const Snapshot& snap, const ModelParams& params);

}  // namespace measures
}  // namespace bbm

#endif
