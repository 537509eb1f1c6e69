#include "bbm/specfun.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>

namespace bbm {

int MultiIndex::order() const {
    int s = 0;
    for (int k : entries) s += k;
    return s;
}

double MultiIndex::factorial() const {
    double f = 1.0;
    for (int k : entries) f *= specfun::factorial(k);
    return f;
}

namespace specfun {

double log_factorial(int n) {
    if (n < 0) throw std::invalid_argument("log_factorial: n < 0");
    return std::lgamma(double(n) + 1.0);
}

double factorial(int n) {
    if (n < 0) throw std::invalid_argument("factorial: n < 0");
    static const double exact[21] = {
        1.,       1.,        2.,         6.,          24.,
        120.,     720.,      5040.,      40320.,      362880.,
        3628800., 39916800., 479001600., 6227020800., 87178291200.,
        1307674368000., 20922789888000., 355687428096000.,
        6402373705728000., 121645100408832000., 2432902008176640000.};
    if (n <= 20) return exact[n];
    return std::exp(log_factorial(n));
}

double hermite(int k, double x) {
    if (k < 0) throw std::invalid_argument("hermite: negative order");
    if (k == 0) return 1.0;
    double hm1 = 1.0;  // H_0
    double h = x;      // H_1
    for (int j = 1; j < k; ++j) {
        const double hp1 = x * h - double(j) * hm1;
        hm1 = h;
        h = hp1;
    }
    return h;
}

double heat_poly(int k, double x, double t) {
    if (k < 0) throw std::invalid_argument("heat_poly: negative order");
    if (t < 0) throw std::invalid_argument("heat_poly: t < 0");
    // term_j = k!(-1)^j / (2^j j! (k-2j)!) x^{k-2j} t^j, built by the ratio
    // term_{j+1}/term_j = -(k-2j)(k-2j-1) t / (2 (j+1) x^2).
    double coeff = 1.0;  // coefficient of x^{k-2j} t^j, j = 0
    double sum = 0.0;
    for (int j = 0; 2 * j <= k; ++j) {
        sum += coeff * std::pow(x, double(k - 2 * j)) * std::pow(t, double(j));
        coeff *= -double(k - 2 * j) * double(k - 2 * j - 1) / (2.0 * double(j + 1));
    }
    return sum;
}

double std_normal_pdf(double x) {
    return std::exp(-0.5 * x * x) / std::sqrt(2.0 * std::numbers::pi);
}

double std_normal_cdf(double x) {
    return 0.5 * std::erfc(-x / std::numbers::sqrt2);
}

double cdf_d(std::span<const double> b) {
    double p = 1.0;
    for (double bj : b) p *= std_normal_cdf(bj);
    return p;
}

double cdf_derivative(int k, double b) {
    if (k < 1) throw std::invalid_argument("cdf_derivative: k < 1");
    const double sign = (k % 2 == 1) ? 1.0 : -1.0;
    return sign * hermite(k - 1, b) * std_normal_pdf(b);
}

double cdf_derivative_d(const MultiIndex& k, std::span<const double> b) {
    if (k.dim() != int(b.size()))
        throw std::invalid_argument("cdf_derivative_d: dimension mismatch");
    double p = 1.0;
    for (int j = 0; j < k.dim(); ++j) {
        const int kj = k.entries[j];
        p *= (kj == 0) ? std_normal_cdf(b[j]) : cdf_derivative(kj, b[j]);
    }
    return p;
}

MehlerResult mehler_cdf(double rho, double b, double x, int J) {
    if (rho < 0.0 || rho >= 1.0)
        throw std::invalid_argument("mehler_cdf: rho outside [0,1)");
    if (J < 0) throw std::invalid_argument("mehler_cdf: J < 0");
    // Work with g_k = H_k / sqrt(k!), which stays bounded by 2 e^{x^2/4}, so
    // the iteration neither overflows (H_k ~ sqrt(k!)) nor underflows
    // (rho^k / k!) at large truncation orders. The k-th term becomes
    // rho^k g_{k-1}(b) g_k(x) / sqrt(k).
    const double phib = std_normal_pdf(b);
    double sum = 0.0;
    double sum_abs = 0.0;
    double rk = 1.0;             // rho^k
    double gb_m1 = 1.0, gb = b;  // g_{k-1}(b), g_k(b)
    double gx_m1 = 1.0, gx = x;  // g_{k-1}(x), g_k(x)
    for (int k = 1; k <= J; ++k) {
        rk *= rho;
        const double term = rk * gb_m1 * gx / std::sqrt(double(k));
        sum += term;
        sum_abs += std::abs(term);
        const double sk = std::sqrt(double(k)), sk1 = std::sqrt(double(k + 1));
        const double gb_p1 = (b * gb - sk * gb_m1) / sk1;
        const double gx_p1 = (x * gx - sk * gx_m1) / sk1;
        gb_m1 = gb; gb = gb_p1;
        gx_m1 = gx; gx = gx_p1;
    }
    // |H_{k-1}(b) H_k(x)| <= 4 sqrt((k-1)! k!) e^{(b^2+x^2)/4}, so the
    // dropped term at order k is at most
    // phi(b) 4 e^{(b^2+x^2)/4} rho^k / sqrt(k); geometric majorant over k > J.
    double tail = 0.0;
    if (rho > 0.0) {
        tail = phib * 4.0 * std::exp((b * b + x * x) / 4.0) *
               std::pow(rho, double(J + 1)) /
               (std::sqrt(double(J + 1)) * (1.0 - rho));
    }
    // accumulation roundoff floor: the truncation bound alone can drop below
    // machine precision while the summed value cannot
    tail += std::numeric_limits<double>::epsilon() *
            (4.0 + 4.0 * phib * sum_abs);
    return {std_normal_cdf(b) - phib * sum, tail};
}

double mehler_pdf(double rho, double b, double x, int J) {
    if (rho < 0.0 || rho >= 1.0)
        throw std::invalid_argument("mehler_pdf: rho outside [0,1)");
    if (J < 0) throw std::invalid_argument("mehler_pdf: J < 0");
    // same normalized iteration as mehler_cdf; the k-th term is
    // rho^k g_k(b) g_k(x)
    double sum = 1.0;
    double rk = 1.0;
    double gb_m1 = 1.0, gb = b;
    double gx_m1 = 1.0, gx = x;
    for (int k = 1; k <= J; ++k) {
        rk *= rho;
        sum += rk * gb * gx;
        const double sk = std::sqrt(double(k)), sk1 = std::sqrt(double(k + 1));
        const double gb_p1 = (b * gb - sk * gb_m1) / sk1;
        const double gx_p1 = (x * gx - sk * gx_m1) / sk1;
        gb_m1 = gb; gb = gb_p1;
        gx_m1 = gx; gx = gx_p1;
    }
    return std_normal_pdf(b) * sum;
}

}  // namespace specfun
}  // namespace bbm
