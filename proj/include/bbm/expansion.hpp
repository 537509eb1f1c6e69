#ifndef BBM_EXPANSION_HPP
#define BBM_EXPANSION_HPP

#include <map>
#include <span>
#include <vector>

#include "bbm/measures.hpp"
#include "bbm/simulator.hpp"
#include "bbm/specfun.hpp"

namespace bbm {

// Martingale-limit estimates M_inf^{(k,theta)} taken at a finite horizon.
struct LimitEstimates {
    std::map<MultiIndex, double> values;  // every |k| <= m_max
    double horizon = 0.0;

    double at(const MultiIndex& k) const;
};

namespace expansion {

// All k in N^d with |k| = ell, lexicographic order.
std::vector<MultiIndex> multi_indices_of_order(int ell, int d);

// Estimate every M_T^{(k,theta)} with |k| <= m_max from the final snapshot.
LimitEstimates estimate_limits(const Trajectory& traj, const ModelParams& params,
                               int m_max);

// sum_{l=0}^m (-1)^l s^{-l/2} sum_{|k|=l} D^k Phi_d(b)/k! M^{(k)}
double thm1_partial_sum(int m, double s, std::span<const double> b,
                        const LimitEstimates& limits);

// prod_j (b_j^{i_j+1} - a_j^{i_j+1}) / (i_j + 1)
double moment_integral(std::span<const double> a, std::span<const double> b,
                       const MultiIndex& i);

// sum_{l=0}^m s^{-l/2} sum_{j=0}^l (-1)^j sum_{|k|=j} M^{(k)}/k!
//   sum_{|i|=l-j} D^{k+i+1} Phi_d(0)/i! * moment_integral(a, b, i)
double thm2_partial_sum(int m, double s, std::span<const double> a,
                        std::span<const double> b, const LimitEstimates& limits);

enum class Mode { thm1, thm2 };

struct ExpansionReport {
    int m = 0;
    Mode mode = Mode::thm1;
    double horizon = 0.0;
    std::vector<double> grid;                        // snapshot times
    std::vector<double> measured;                    // per time
    std::vector<std::vector<double>> partial_sums;   // [time][ell]
    std::vector<std::vector<double>> residuals;      // [time][ell]
    std::vector<double> slopes;                      // OLS of log|r_l| vs log s
};

// Residuals of the order-l partial sums against the measured additive
// measure on every snapshot of one trajectory; limits estimated at the
// final horizon. For thm1, `a` is ignored and measured = additive_cdf
// (scaled); for thm2, measured = s^{d/2} additive_box(a, b).
ExpansionReport residual_report(const Trajectory& traj, const ModelParams& params,
                                int m, std::span<const double> a,
                                std::span<const double> b, Mode mode);

}  // namespace expansion
}  // namespace bbm

#endif
