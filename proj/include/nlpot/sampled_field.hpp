// nlpot/sampled_field.hpp
//
// Function samples on a finite node set plus an optional power-law tail
// model value ~ C (1+|x|)^(-delta) outside the sampled region. Fields
// carry nonnegative extended-real values; +inf marks potential blow-up.
#pragma once

#include <cmath>
#include <optional>
#include <stdexcept>
#include <vector>

#include "nlpot/common.hpp"
#include "nlpot/geometry.hpp"

namespace nlpot {

struct TailModel {
    double C = 0.0;      // amplitude
    double delta = 1.0;  // decay exponent, > 0
};

struct SampledField {
    std::vector<Point> nodes;
    std::vector<double> values;  // >= 0, +inf allowed
    std::optional<TailModel> tail;

    std::size_t size() const { return values.size(); }

    void validate() const {
        if (nodes.size() != values.size())
            throw std::invalid_argument("SampledField: node/value count mismatch");
        for (double v : values)
            if (std::isnan(v) || v < 0.0)
                throw std::invalid_argument("SampledField: values must be nonnegative");
        if (tail && tail->delta <= 0.0)
            throw std::invalid_argument("SampledField: tail decay exponent must be positive");
    }
};

// Least-squares fit of the amplitude C in value ~ C (1+|x|)^(-delta) with
// delta fixed, over (radius, value) samples; zero/nonfinite samples are
// skipped. Returns C = 0 when nothing usable remains.
inline double fit_tail_amplitude(const std::vector<std::pair<double, double>>& samples,
                                 double delta) {
    double acc = 0.0;
    int used = 0;
    for (const auto& [radius, value] : samples) {
        if (!(value > 0.0) || !std::isfinite(value)) continue;
        acc += std::log(value) + delta * std::log1p(radius);
        ++used;
    }
    if (used == 0) return 0.0;
    return std::exp(acc / used);
}

// Least-squares slope of log(value) against log(radius); used by the
// decay-envelope diagnostics. Pairs with nonpositive entries are skipped.
inline std::optional<double> fit_loglog_slope(
    const std::vector<std::pair<double, double>>& samples) {
    double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
    int m = 0;
    for (const auto& [radius, value] : samples) {
        if (!(radius > 0.0) || !(value > 0.0) || !std::isfinite(value)) continue;
        const double lx = std::log(radius);
        const double ly = std::log(value);
        sx += lx;
        sy += ly;
        sxx += lx * lx;
        sxy += lx * ly;
        ++m;
    }
    if (m < 2) return std::nullopt;
    const double denom = m * sxx - sx * sx;
    if (denom == 0.0) return std::nullopt;
    return (m * sxy - sx * sy) / denom;
}

}  // namespace nlpot
