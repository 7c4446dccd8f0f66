#pragma once

#include <cmath>
#include <functional>
#include <numbers>
#include <string>
#include <vector>

#include <boost/math/special_functions/erf.hpp>
#include <boost/multiprecision/cpp_bin_float.hpp>
#include <boost/multiprecision/cpp_int.hpp>

#include "isl/error.hpp"
#include "isl/ising.hpp"
#include "isl/numeric.hpp"

namespace isl {

using BigInt = boost::multiprecision::cpp_int;

namespace detail {

// E_1, E_3, ..., E_{2·order−1} from the boustrophedon (Seidel-Entringer) triangle.
inline std::vector<BigInt> tangent_numbers_unchecked(int order) {
    const int N = 2 * order;
    std::vector<BigInt> prev{1}, zigzag{1};
    for (int n = 1; n < N; ++n) {
        std::vector<BigInt> cur(n + 1);
        cur[0] = 0;
        for (int k = 1; k <= n; ++k) cur[k] = cur[k - 1] + prev[n - k];
        zigzag.push_back(cur[n]);
        prev = std::move(cur);
    }
    std::vector<BigInt> out;
    for (int k = 0; k < order; ++k) out.push_back(zigzag[2 * k + 1]);
    return out;
}

}  // namespace detail

inline std::vector<BigInt> tangent_numbers(int order) {
    require(order >= 0 && order <= 25, "tangent_numbers supports order <= 25");
    return detail::tangent_numbers_unchecked(order);
}

inline BigInt big_binomial(int n, int k) {
    if (k < 0 || k > n) return 0;
    BigInt r = 1;
    for (int i = 1; i <= k; ++i) r = r * (n - k + i) / i;
    return r;
}

// (2m−1)!! with (−1)!! = 1.
inline BigInt odd_double_factorial(int m) {
    BigInt r = 1;
    for (int j = 2 * m - 1; j > 1; j -= 2) r *= j;
    return r;
}

// P_{2m}(s) = Σ_{k=0}^{m} a_k s^{m−k}.
struct MomentPolynomial {
    int m = 0;
    std::vector<BigInt> a;  // a[k] multiplies s^(m−k)

    BigInt eval(std::int64_t s) const {
        BigInt r = 0;
        for (const auto& c : a) r = r * s + c;
        return r;
    }
    // Σ_{k ≤ upto} a_k s^{m−k}; `upto` is clipped to m.
    BigInt partial(std::int64_t s, int upto) const {
        BigInt r = 0, pw = 1;
        for (int k = m; k >= 0; --k) {
            if (k <= upto) r += a[k] * pw;
            pw *= s;
        }
        return r;
    }
};

namespace detail {

// Ascending-power coefficient lists for P_0, P_2, ..., P_{2M}.
inline std::vector<std::vector<BigInt>> moment_tables(int M) {
    auto E = tangent_numbers_unchecked(std::max(M, 1));
    std::vector<std::vector<BigInt>> P(M + 1);
    P[0] = {1};
    for (int m = 1; m <= M; ++m) {
        std::vector<BigInt> cur(m + 1, 0);
        for (int k = 0; k <= m - 1; ++k) {
            BigInt coef = big_binomial(2 * m - 1, 2 * k + 1) * E[k];
            if (k % 2) coef = -coef;
            const auto& sub = P[m - k - 1];
            for (std::size_t p = 0; p < sub.size(); ++p) cur[p + 1] += coef * sub[p];
        }
        P[m] = std::move(cur);
    }
    return P;
}

inline MomentPolynomial to_moment_poly(int m, const std::vector<BigInt>& ascending) {
    MomentPolynomial mp;
    mp.m = m;
    mp.a.assign(m + 1, 0);
    for (int k = 0; k <= m; ++k) mp.a[k] = ascending[m - k];
    return mp;
}

// log of a positive big integer without overflowing double.
inline double big_log(const BigInt& v) {
    const auto bits = static_cast<long>(boost::multiprecision::msb(v));
    const long shift = std::max(0L, bits - 60);
    return std::log(static_cast<double>(BigInt(v >> shift))) + static_cast<double>(shift) * std::numbers::ln2;
}

}  // namespace detail

// Rademacher moment polynomial via the tangent-number recursion.
inline MomentPolynomial moment_poly(int m) {
    require(m >= 0 && m <= 200, "moment_poly supports 0 <= m <= 200");
    auto P = detail::moment_tables(m);
    return detail::to_moment_poly(m, P[m]);
}

inline std::vector<MomentPolynomial> moment_polys(int max_m) {
    auto P = detail::moment_tables(max_m);
    std::vector<MomentPolynomial> out;
    for (int m = 0; m <= max_m; ++m) out.push_back(detail::to_moment_poly(m, P[m]));
    return out;
}

// E(2k − s)^{2m} for k ~ Bin(s, 1/2), from the binomial weights.
inline BigInt moment_bruteforce(int m, int s) {
    require(m >= 0 && s >= 0, "moment_bruteforce needs m, s >= 0");
    BigInt num = 0;
    for (int k = 0; k <= s; ++k) num += big_binomial(s, k) * boost::multiprecision::pow(BigInt(2 * k - s), 2 * m);
    BigInt den = BigInt(1) << s;
    if (num % den != 0) throw DomainError("non-integer Rademacher moment");
    return num / den;
}

// Odd-start partial sum of the recursion, Σ_{k=start}^{m−1} (−1)^k C(2m−1,2k+1) E_{2k+1} s P_{2m−2k−2}(s).
inline BigInt recursion_tail(int m, std::int64_t s, int start) {
    auto E = detail::tangent_numbers_unchecked(std::max(m, 1));
    auto polys = moment_polys(m);
    BigInt r = 0;
    for (int k = start; k <= m - 1; ++k) {
        BigInt term = big_binomial(2 * m - 1, 2 * k + 1) * E[k] * s * polys[m - k - 1].eval(s);
        r += (k % 2) ? BigInt(-term) : term;
    }
    return r;
}

// Σ_{k≤2l+1} a_k s^{m−k} ≤ P_{2m}(s) ≤ Σ_{k≤2l} a_k s^{m−k}: the odd truncation
// is the lower bound and the even truncation the upper bound.
inline bool truncation_bounds_check(int m, int s, int l) {
    require(m >= 0 && l >= 0, "truncation indices must be nonnegative");
    auto P = moment_poly(m);
    BigInt v = P.eval(s);
    return P.partial(s, 2 * l + 1) <= v && v <= P.partial(s, 2 * l);
}

// Same inequality with the orientation exchanged (even truncation below).
inline bool truncation_bounds_check_swapped(int m, int s, int l) {
    auto P = moment_poly(m);
    BigInt v = P.eval(s);
    return P.partial(s, 2 * l) <= v && v <= P.partial(s, 2 * l + 1);
}

struct LeadingCoefficients {
    BigInt a0, a1, a2;
};

inline LeadingCoefficients leading_coefficients(int m) {
    auto P = moment_poly(m);
    auto at = [&](int k) { return k <= m ? P.a[k] : BigInt(0); };
    return {at(0), at(1), at(2)};
}

// Closed forms with the double factorial read as the odd one, (2m−1)!!.
inline BigInt a0_closed(int m) { return odd_double_factorial(m); }
inline BigInt a1_closed(int m) { return -BigInt(m) * (m - 1) * odd_double_factorial(m) / 3; }

// a2 from the coefficient recursion; (2m−4)!! and (2m−6)!! become (2m−5)!! and (2m−7)!!.
inline BigInt a2_recursive(int m) {
    if (m < 3) return 0;
    BigInt prev = a2_recursive(m - 1);
    BigInt t1 = BigInt(2 * m - 1) * prev;
    BigInt t2 = 2 * big_binomial(2 * m - 1, 3) * (m - 2) * (m - 3) * odd_double_factorial(m - 2) / 3;
    BigInt t3 = 16 * big_binomial(2 * m - 1, 5) * odd_double_factorial(m - 3);
    return t1 + t2 + t3;
}

// a2 / ((m−2)(m−1)m(m+1)(2m−1)!!): the smallest admissible C at this m.
inline double a2_ratio(int m) {
    require(m >= 3, "a2 ratio defined for m >= 3");
    BigInt den = BigInt(m - 2) * (m - 1) * m * (m + 1) * odd_double_factorial(m);
    return static_cast<double>(leading_coefficients(m).a2) / static_cast<double>(den);
}

constexpr double kA2Constant = 1.0 / 18.0;

// C(θ,s) = Σ_k C(s,k) exp(θ(2k−s)²) / 2^s.
inline double c_theta_s_binomial(double theta, int s) { return theta == 0 ? 1.0 : std::exp(cw_log_c({s, theta})); }

// C(θ,s) = Σ_{m<terms} θ^m P_{2m}(s) / m!.
inline double c_theta_s(double theta, int s, int terms) {
    require(theta >= 0 && s >= 1 && terms >= 1, "c_theta_s needs theta >= 0, s >= 1, terms >= 1");
    if (s * theta >= 0.5) throw DomainError("series route needs s*theta < 1/2");
    if (theta == 0) return 1.0;
    auto polys = moment_polys(terms - 1);
    KahanSum sum;
    for (int m = 0; m < terms; ++m) {
        sum.add(std::exp(m * std::log(theta) + detail::big_log(polys[m].eval(s)) - std::lgamma(m + 1.0)));
    }
    return sum.value();
}

// Upper bound on C(θ,s) from the three-term truncation of P_{2m}(s); the a2 term
// uses a2 ≤ C(m−2)(m−1)m(m+1)(2m−1)!!, (2m−1)!!/m! ≤ 2^m and
// Σ_{m≥3}(m−2)(m−1)m(m+1)x^{m−3} = 24/(1−x)^5.
inline double c_theta_s_upper_bound(double theta, int s, double C = kA2Constant) {
    const double x = 2 * s * theta;
    if (x >= 1) throw DomainError("bound needs s*theta < 1/2");
    return std::pow(1 - x, -0.5) - s * theta * theta * std::pow(1 - x, -2.5) +
           192 * C * theta * theta * s * theta / std::pow(1 - x, 5);
}

// C·√(n θ² Σ_{i=1}^{5} (sθ)^i / (1 − 2sθ)^{i − 1/2}).
inline double tv_bound_cwn_gaussian(double theta, int s, std::int64_t n, double C = 1.0) {
    if (s * theta >= 0.5) throw DomainError("tv bound needs s*theta < 1/2");
    double sum = 0;
    for (int i = 1; i <= 5; ++i) sum += std::pow(s * theta, i) / std::pow(1 - 2 * s * theta, i - 0.5);
    return C * std::sqrt(static_cast<double>(n) * theta * theta * sum);
}

inline double gaussian_log_density(double y, double var) {
    return -0.5 * y * y / var - 0.5 * std::log(2 * std::numbers::pi * var);
}

// One-sample TV between CWN(s,θ) and N(0, 1/(1−2sθ)).
inline double tv_cwn_gaussian_numeric(double theta, int s) {
    if (s * theta >= 0.5) throw DomainError("needs s*theta < 1/2");
    const CurieWeissParams p{s, theta};
    const double var = 1 / (1 - 2 * s * theta);
    const double L = cwn_window(p) + 12 * std::sqrt(var);
    auto f = [&](double y) { return std::fabs(std::exp(cwn_log_density(p, y)) - std::exp(gaussian_log_density(y, var))); };
    return 0.5 * (integrate(f, -L, 0, 1e-10, 1e-12).value + integrate(f, 0, L, 1e-10, 1e-12).value);
}

// KL(N(0, 1/(1−2sθ)) ‖ CWN(s,θ)).
inline double kl_gaussian_cwn(double theta, int s) {
    if (s * theta >= 0.5) throw DomainError("needs s*theta < 1/2");
    const CurieWeissParams p{s, theta};
    const double var = 1 / (1 - 2 * s * theta);
    const double L = 40 * std::sqrt(var);
    auto f = [&](double y) {
        double lg = gaussian_log_density(y, var);
        return std::exp(lg) * (lg - cwn_log_density(p, y));
    };
    return integrate(f, -L, 0, 1e-10, 1e-13).value + integrate(f, 0, L, 1e-10, 1e-13).value;
}

using Float50 = boost::multiprecision::cpp_bin_float_50;

struct InequalityResult {
    std::string name;
    std::size_t points = 0;
    std::size_t violations = 0;
    double max_violation = 0;  // max of (lhs − rhs) in "lhs ≤ rhs" form; ≤ 0 when it holds
    double argmax = 0;
};

constexpr double kPhiSixthOrderC = 1e-4;

// Scalar inequalities, each rewritten as f(x) ≤ 0 and checked
// in 50-digit arithmetic on x = lo, lo + step, ..., hi.
inline std::vector<InequalityResult> scalar_inequalities_check(double lo, double hi, double step,
                                                               double C = kPhiSixthOrderC) {
    require(step > 0 && lo <= hi, "bad grid");
    require(std::fabs(lo) <= 10 && std::fabs(hi) <= 10, "grid must lie within |x| <= 10");
    using F = Float50;
    using std::log;
    const F pi = boost::math::constants::pi<F>();
    const F ln2 = boost::math::constants::ln_two<F>();
    const F r2pi = sqrt(F(2) / pi);
    const F c3 = (pi - 4) / (3 * sqrt(F(2)) * pow(pi, F(1.5)));
    const F c4 = (pi - 3) / (3 * pi * pi);
    const F c5 = (96 - 40 * pi + 3 * pi * pi) / (60 * sqrt(F(2)) * pow(pi, F(2.5)));
    const F CC = F(C);

    auto log_cosh50 = [](const F& x) { return log(cosh(x)); };
    auto Phi = [](const F& x) { return boost::math::erfc(-x / sqrt(F(2))) / 2; };
    // log g(z) = −log(1 + e^{−2z})
    auto log_g = [](const F& z) { return -log1p(exp(-2 * z)); };

    std::vector<std::pair<std::string, std::function<F(const F&)>>> checks = {
        {"x^2/2 - log cosh x - x^4/12 <= 0", [&](const F& x) { return x * x / 2 - log_cosh50(x) - pow(x, 4) / 12; }},
        {"log cosh x - x^2/2 + x^4/12 - x^6/45 <= 0",
         [&](const F& x) { return log_cosh50(x) - x * x / 2 + pow(x, 4) / 12 - pow(x, 6) / 45; }},
        {"log Phi(x) <= sixth-order upper expansion",
         [&](const F& x) {
             F rhs = -ln2 + r2pi * x - x * x / pi - c3 * pow(x, 3) + c4 * pow(x, 4) + c5 * pow(x, 5) + CC * pow(x, 6);
             return log(Phi(x)) - rhs;
         }},
        {"log(1 - Phi(x)) <= sixth-order upper expansion",
         [&](const F& x) {
             F rhs = -ln2 - r2pi * x - x * x / pi + c3 * pow(x, 3) + c4 * pow(x, 4) - c5 * pow(x, 5) + CC * pow(x, 6);
             return log(Phi(-x)) - rhs;
         }},
        {"log g(sqrt(2/pi) x) >= sixth-order lower expansion",
         [&](const F& x) {
             F rhs = -ln2 + r2pi * x - x * x / pi + pow(x, 4) / (3 * pi * pi) - 8 * pow(x, 6) / (45 * pow(pi, 3));
             return rhs - log_g(r2pi * x);
         }},
        {"log(1 - g(sqrt(2/pi) x)) >= sixth-order lower expansion",
         [&](const F& x) {
             F rhs = -ln2 - r2pi * x - x * x / pi + pow(x, 4) / (3 * pi * pi) - 8 * pow(x, 6) / (45 * pow(pi, 3));
             return rhs - log_g(-r2pi * x);
         }},
        {"(1 - 2 Phi(x)) x^3 <= -sqrt(2/pi) x^4 + x^6/(3 sqrt(2 pi))",
         [&](const F& x) {
             return (1 - 2 * Phi(x)) * pow(x, 3) - (-r2pi * pow(x, 4) + pow(x, 6) / (3 * sqrt(2 * pi)));
         }},
        {"(2 Phi(x) - 1) x^5 <= sqrt(2/pi) x^6",
         [&](const F& x) { return (2 * Phi(x) - 1) * pow(x, 5) - r2pi * pow(x, 6); }},
    };

    // Rounding slack for 50-digit evaluation of expressions that vanish at 0.
    const F slack = F("1e-40");
    const auto count = static_cast<std::int64_t>(std::floor((hi - lo) / step + 1e-9)) + 1;
    const F flo(lo), fstep = F(1) / F(std::llround(1.0 / step));
    const bool exact_step = std::fabs(1.0 / std::llround(1.0 / step) - step) < 1e-15;
    std::vector<InequalityResult> out;
    for (auto& [name, fn] : checks) {
        InequalityResult r;
        r.name = name;
        r.max_violation = -INFINITY;
        for (std::int64_t i = 0; i < count; ++i) {
            F x = exact_step ? flo + F(i) * fstep : F(lo + static_cast<double>(i) * step);
            F v = fn(x);
            ++r.points;
            if (v > slack) ++r.violations;
            double dv = static_cast<double>(v);
            if (dv > r.max_violation) {
                r.max_violation = dv;
                r.argmax = static_cast<double>(x);
            }
        }
        out.push_back(r);
    }
    return out;
}

}  // namespace isl
