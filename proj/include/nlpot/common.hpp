// nlpot/common.hpp
//
// Shared numeric primitives: extended-real conventions, deterministic
// summation, and closed-form constants (n-ball volume, sphere area).
#pragma once

#include <cmath>
#include <cstddef>
#include <limits>
#include <numbers>
#include <stdexcept>
#include <string>
#include <vector>

namespace nlpot {

inline constexpr double kInf = std::numeric_limits<double>::infinity();
inline constexpr double kPi = 3.14159265358979323846;

// Volume of the unit ball in R^n.
inline double unit_ball_volume(int n) {
    return std::pow(std::numbers::pi, 0.5 * n) / std::tgamma(0.5 * n + 1.0);
}

// Surface area of the unit sphere S^{n-1} in R^n.
inline double unit_sphere_area(int n) { return n * unit_ball_volume(n); }

// Deterministic pairwise (tree) reduction over [begin, begin+count).
// The reduction tree depends only on count, never on thread scheduling,
// so repeated runs produce bit-identical sums; rounding error grows as
// O(log N) instead of O(N).
inline double pairwise_sum_range(const double* begin, std::size_t count) {
    if (count == 0) return 0.0;
    if (count <= 8) {
        double s = begin[0];
        for (std::size_t i = 1; i < count; ++i) s += begin[i];
        return s;
    }
    const std::size_t half = count / 2;
    return pairwise_sum_range(begin, half) + pairwise_sum_range(begin + half, count - half);
}

inline double pairwise_sum(const std::vector<double>& v) {
    return pairwise_sum_range(v.data(), v.size());
}

// x^e for nonnegative extended reals. Keeps the IEEE conventions the
// checks rely on: pow(+inf, 0) = 1, pow(+inf, e>0) = +inf,
// pow(+inf, e<0) = 0, pow(0, 0) = 1.
inline double pow_ext(double x, double e) {
    if (x < 0.0) throw std::domain_error("pow_ext: negative base");
    if (e == 1.0) return x;  // guarantee x^1 == x bitwise (identity weights stay exact)
    return std::pow(x, e);
}

// Relative gap |a-b| / max(|a|,|b|), 0 when both vanish or both are +inf.
inline double rel_diff(double a, double b) {
    if (a == b) return 0.0;  // covers +inf == +inf and exact equality
    if (std::isinf(a) || std::isinf(b)) return kInf;
    const double scale = std::max(std::abs(a), std::abs(b));
    if (scale == 0.0) return 0.0;
    return std::abs(a - b) / scale;
}

}  // namespace nlpot
