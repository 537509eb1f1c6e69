#ifndef BBM_SPECFUN_HPP
#define BBM_SPECFUN_HPP

#include <span>
#include <vector>

namespace bbm {

// Multi-index k = (k_1,...,k_d), |k| = sum, k! = product of factorials.
struct MultiIndex {
    std::vector<int> entries;

    MultiIndex() = default;
    explicit MultiIndex(std::vector<int> e) : entries(std::move(e)) {}
    static MultiIndex zeros(int d) { return MultiIndex(std::vector<int>(d, 0)); }

    int dim() const { return int(entries.size()); }
    int order() const;             // |k|
    double factorial() const;      // k!, log-space beyond exact integer range
    bool operator==(const MultiIndex&) const = default;
    auto operator<=>(const MultiIndex&) const = default;
};

namespace specfun {

double log_factorial(int n);
double factorial(int n);

// Probabilists' Hermite polynomial H_k, three-term recurrence
// H_{k+1}(x) = x H_k(x) - k H_{k-1}(x).
double hermite(int k, double x);

// Heat polynomial: the polynomial-in-(x,t) form of t^{k/2} H_k(x/sqrt(t)),
// sum_j k!(-1)^j / (2^j j! (k-2j)!) x^{k-2j} t^j. Well-defined at t = 0,
// where it equals x^k.
double heat_poly(int k, double x, double t);

double std_normal_pdf(double x);
double std_normal_cdf(double x);

// Phi_d(b) = prod_j Phi(b_j).
double cdf_d(std::span<const double> b);

// d^k/db^k Phi(b) = (-1)^{k-1} H_{k-1}(b) phi(b), k >= 1.
double cdf_derivative(int k, double b);

// D^k Phi_d(b): separable product over coordinates; factor j is Phi(b_j)
// when k_j = 0 and cdf_derivative(k_j, b_j) otherwise.
double cdf_derivative_d(const MultiIndex& k, std::span<const double> b);

struct MehlerResult {
    double value;
    double tail_bound;
};

// Partial sum of Phi((b - rho x)/sqrt(1-rho^2))
//   = Phi(b) - phi(b) sum_{k>=1} rho^k/k! H_{k-1}(b) H_k(x),
// truncated at k = J, with a tail bound from |H_k(x)| <= 2 sqrt(k!) e^{x^2/4}:
// each dropped term is at most phi(b) 4 e^{(b^2+x^2)/4} rho^k / sqrt(k).
MehlerResult mehler_cdf(double rho, double b, double x, int J);

// Partial sum of (1/sqrt(1-rho^2)) phi((b - rho x)/sqrt(1-rho^2))
//   = phi(b) (1 + sum_{k>=1} rho^k/k! H_k(b) H_k(x)).
double mehler_pdf(double rho, double b, double x, int J);

}  // namespace specfun
}  // namespace bbm

#endif
