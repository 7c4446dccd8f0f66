#pragma once

#include <cmath>
#include <functional>
#include <numbers>
#include <string>
#include <vector>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "isl/error.hpp"

namespace isl {

inline double log_cosh(double x) {
    x = std::fabs(x);
    if (x <= 30.0) return std::log(std::cosh(x));
    return x - std::numbers::ln2 + std::log1p(std::exp(-2.0 * x));
}

inline double log_sum_exp(const std::vector<double>& v) {
    double m = -INFINITY;
    for (double x : v) m = std::max(m, x);
    if (!std::isfinite(m)) return m;
    double s = 0;
    for (double x : v) s += std::exp(x - m);
    return m + std::log(s);
}

inline double normal_pdf(double x) { return std::exp(-0.5 * x * x) / std::sqrt(2.0 * std::numbers::pi); }
inline double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::numbers::sqrt2); }

// Binomial coefficient as double; exact while the value fits in 53 bits.
inline double binomial(int n, int k) {
    if (k < 0 || k > n) return 0.0;
    k = std::min(k, n - k);
    double r = 1;
    for (int i = 1; i <= k; ++i) r = r * (n - k + i) / i;
    return std::round(r);
}

inline double log_binomial(int n, int k) {
    return std::lgamma(n + 1.0) - std::lgamma(k + 1.0) - std::lgamma(n - k + 1.0);
}

struct QuadResult {
    double value;
    double error;
};

// Adaptive 61-point Gauss-Kronrod on [a, b]. `abs_tol` bounds the reported
// error estimate; QuadratureFail is thrown when it is not met.
inline QuadResult integrate(const std::function<double(double)>& f, double a, double b, double rel_tol = 1e-13,
                            double abs_tol = 1e-11) {
    double err = 0;
    double v = boost::math::quadrature::gauss_kronrod<double, 61>::integrate(f, a, b, 20, rel_tol, &err);
    if (!std::isfinite(v) || err > std::max(abs_tol, rel_tol * std::fabs(v) * 100))
        throw QuadratureFail("quadrature error estimate " + std::to_string(err) + " above tolerance");
    return {v, err};
}

// Neumaier-compensated sum, used where results must not depend on term count.
class KahanSum {
public:
    void add(double x) {
        double t = sum_ + x;
        if (std::fabs(sum_) >= std::fabs(x))
            c_ += (sum_ - t) + x;
        else
            c_ += (x - t) + sum_;
        sum_ = t;
    }
    double value() const { return sum_ + c_; }

private:
    double sum_ = 0, c_ = 0;
};

}  // namespace isl
