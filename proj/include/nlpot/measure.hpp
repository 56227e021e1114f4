// nlpot/measure.hpp
//
// Nonnegative measures on R^n: an exact atomic model and a piecewise-
// constant cell-density model, with the ball-mass primitive sigma(B(x,r))
// (open-ball convention) that every potential evaluation consumes.
#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <variant>
#include <vector>

#include "nlpot/common.hpp"
#include "nlpot/geometry.hpp"
#include "nlpot/sampled_field.hpp"

namespace nlpot {

struct AtomicMeasure {
    int dim = 0;
    std::vector<Point> locations;
    std::vector<double> masses;  // all > 0

    std::size_t size() const { return masses.size(); }

    void validate() const {
        if (locations.size() != masses.size())
            throw std::invalid_argument("AtomicMeasure: location/mass count mismatch");
        for (const auto& loc : locations) check_dimension(loc, dim, "AtomicMeasure");
        for (double m : masses)
            if (!(m > 0.0) || !std::isfinite(m))
                throw std::invalid_argument("AtomicMeasure: masses must be positive finite");
        for (std::size_t i = 0; i < locations.size(); ++i)
            for (std::size_t j = i + 1; j < locations.size(); ++j)
                if (locations[i] == locations[j])
                    throw std::invalid_argument("AtomicMeasure: locations must be distinct");
    }
};

// Uniform grid of axis-aligned cells with a constant density per cell.
// Cell (i_0,...,i_{n-1}) spans origin + h*[i_k, i_k+1) on axis k; flat
// indices are row-major with the last axis fastest.
struct CellDensityMeasure {
    int dim = 0;
    Point origin;
    double cell_size = 1.0;
    std::vector<int> extents;
    std::vector<double> density;  // >= 0 per cell

    std::size_t cell_count() const {
        std::size_t c = 1;
        for (int e : extents) c *= static_cast<std::size_t>(e);
        return c;
    }

    double cell_volume() const { return std::pow(cell_size, dim); }

    void cell_coords(std::size_t flat, std::vector<int>& out) const {
        out.resize(extents.size());
        for (int a = dim - 1; a >= 0; --a) {
            out[a] = static_cast<int>(flat % extents[a]);
            flat /= extents[a];
        }
    }

    Point cell_center(std::size_t flat) const {
        std::vector<int> idx;
        cell_coords(flat, idx);
        Point c(dim);
        for (int a = 0; a < dim; ++a) c[a] = origin[a] + cell_size * (idx[a] + 0.5);
        return c;
    }

    Box cell_box(std::size_t flat) const {
        std::vector<int> idx;
        cell_coords(flat, idx);
        Box b;
        b.lo.resize(dim);
        b.hi.resize(dim);
        for (int a = 0; a < dim; ++a) {
            b.lo[a] = origin[a] + cell_size * idx[a];
            b.hi[a] = b.lo[a] + cell_size;
        }
        return b;
    }

    Box bounding_box() const {
        Box b;
        b.lo = origin;
        b.hi.resize(dim);
        for (int a = 0; a < dim; ++a) b.hi[a] = origin[a] + cell_size * extents[a];
        return b;
    }

    void validate() const {
        check_dimension(origin, dim, "CellDensityMeasure");
        if (!(cell_size > 0.0)) throw std::invalid_argument("CellDensityMeasure: cell_size <= 0");
        if (static_cast<int>(extents.size()) != dim)
            throw std::invalid_argument("CellDensityMeasure: extents/dim mismatch");
        for (int e : extents)
            if (e <= 0) throw std::invalid_argument("CellDensityMeasure: extents must be positive");
        if (density.size() != cell_count())
            throw std::invalid_argument("CellDensityMeasure: density size mismatch");
        for (double d : density)
            if (std::isnan(d) || d < 0.0 || std::isinf(d))
                throw std::invalid_argument("CellDensityMeasure: density must be finite nonnegative");
    }
};

using Measure = std::variant<AtomicMeasure, CellDensityMeasure>;

inline int dimension(const Measure& mu) {
    return std::visit([](const auto& m) { return m.dim; }, mu);
}

inline double total_mass(const Measure& mu) {
    if (const auto* a = std::get_if<AtomicMeasure>(&mu)) return pairwise_sum(a->masses);
    const auto& c = std::get<CellDensityMeasure>(mu);
    return c.cell_volume() * pairwise_sum(c.density);
}

// Reference points: atom locations for atomic measures, cell centers for
// cell measures. Every sampled field over a measure indexes these points.
inline std::vector<Point> reference_points(const Measure& mu) {
    if (const auto* a = std::get_if<AtomicMeasure>(&mu)) return a->locations;
    const auto& c = std::get<CellDensityMeasure>(mu);
    std::vector<Point> pts;
    pts.reserve(c.cell_count());
    for (std::size_t i = 0; i < c.cell_count(); ++i) pts.push_back(c.cell_center(i));
    return pts;
}

// Bounding box of the support (cells with positive density; atoms).
// Returns a degenerate zero box for the zero measure.
inline Box support_box(const Measure& mu) {
    const int n = dimension(mu);
    Box b;
    b.lo.assign(n, 0.0);
    b.hi.assign(n, 0.0);
    bool seen = false;
    if (const auto* a = std::get_if<AtomicMeasure>(&mu)) {
        for (const auto& loc : a->locations) {
            if (!seen) { b.lo = loc; b.hi = loc; seen = true; continue; }
            for (int k = 0; k < n; ++k) {
                b.lo[k] = std::min(b.lo[k], loc[k]);
                b.hi[k] = std::max(b.hi[k], loc[k]);
            }
        }
        return b;
    }
    const auto& c = std::get<CellDensityMeasure>(mu);
    for (std::size_t i = 0; i < c.cell_count(); ++i) {
        if (!(c.density[i] > 0.0)) continue;
        const Box cb = c.cell_box(i);
        if (!seen) { b = cb; seen = true; continue; }
        for (int k = 0; k < n; ++k) {
            b.lo[k] = std::min(b.lo[k], cb.lo[k]);
            b.hi[k] = std::max(b.hi[k], cb.hi[k]);
        }
    }
    return b;
}

// Smallest geometric feature: min pairwise atom distance, or the cell
// size. Returns 0 when undefined (zero or single-atom measure).
inline double min_feature_scale(const Measure& mu) {
    if (const auto* a = std::get_if<AtomicMeasure>(&mu)) {
        double best = kInf;
        for (std::size_t i = 0; i < a->size(); ++i)
            for (std::size_t j = i + 1; j < a->size(); ++j)
                best = std::min(best, dist(a->locations[i], a->locations[j]));
        return std::isfinite(best) ? best : 0.0;
    }
    return std::get<CellDensityMeasure>(mu).cell_size;
}

struct BallMassResult {
    double value = 0.0;
    double error_bound = 0.0;  // certified bound on |value - sigma(B(x,r))|
};

namespace detail {

// Adaptive subdivision for cell measures: cells crossing the sphere are
// split level by level until the unresolved boundary mass drops below
// tol * estimate (or the depth cap); remaining boundary leaves are
// attributed by center test and their total mass reported as the bound.
inline BallMassResult ball_mass_cells(const CellDensityMeasure& c, const Point& x, double r,
                                      double tol) {
    constexpr int kDepthCap = 12;
    constexpr std::size_t kItemCap = 2'000'000;

    struct Item {
        Box box;
        double mass;
    };
    double lower = 0.0;
    std::vector<Item> boundary;
    const double vol = c.cell_volume();
    for (std::size_t i = 0; i < c.cell_count(); ++i) {
        if (!(c.density[i] > 0.0)) continue;
        const Box b = c.cell_box(i);
        const double dmin = box_min_dist(x, b);
        if (dmin >= r) continue;
        const double dmax = box_max_dist(x, b);
        const double mass = c.density[i] * vol;
        if (dmax < r) lower += mass;
        else boundary.push_back({b, mass});
    }

    auto center_resolved = [&]() {
        double s = 0.0;
        for (const auto& it : boundary)
            if (dist(it.box.center(), x) < r) s += it.mass;
        return s;
    };

    for (int depth = 0; !boundary.empty(); ++depth) {
        double pending = 0.0;
        for (const auto& it : boundary) pending += it.mass;
        const double estimate = lower + center_resolved();
        if (pending <= tol * estimate || depth >= kDepthCap || boundary.size() > kItemCap) {
            return {estimate, pending};
        }
        std::vector<Item> next;
        next.reserve(boundary.size() * 2);
        const double frac = 1.0 / static_cast<double>(1u << c.dim);
        for (const auto& it : boundary) {
            const double child_mass = it.mass * frac;
            split_box(it.box, [&](const Box& child) {
                const double dmin = box_min_dist(x, child);
                if (dmin >= r) return;
                const double dmax = box_max_dist(x, child);
                if (dmax < r) lower += child_mass;
                else next.push_back({child, child_mass});
            });
        }
        boundary.swap(next);
    }
    return {lower, 0.0};
}

}  // namespace detail

// sigma(B(x,r)) with the open-ball convention |y - x| < r. Exact for
// atomic measures; adaptive subdivision with a certified error bound for
// cell measures.
inline BallMassResult ball_mass(const Measure& mu, const Point& x, double r, double tol) {
    if (!(r > 0.0)) throw std::invalid_argument("ball_mass: radius must be positive");
    if (!(tol > 0.0)) throw std::invalid_argument("ball_mass: tol must be positive");
    check_dimension(x, dimension(mu), "ball_mass");
    if (const auto* a = std::get_if<AtomicMeasure>(&mu)) {
        double s = 0.0;
        const double r2 = r * r;
        for (std::size_t i = 0; i < a->size(); ++i)
            if (dist2(a->locations[i], x) < r2) s += a->masses[i];
        return {s, 0.0};
    }
    return detail::ball_mass_cells(std::get<CellDensityMeasure>(mu), x, r, tol);
}

namespace detail {
inline void check_gate_nodes(const SampledField& gate, const std::vector<Point>& refs,
                             const char* who) {
    if (gate.nodes.size() != refs.size() || gate.values.size() != refs.size())
        throw std::invalid_argument(std::string(who) + ": field does not cover reference points");
    for (std::size_t i = 0; i < refs.size(); ++i)
        if (gate.nodes[i] != refs[i])
            throw std::invalid_argument(std::string(who) + ": field nodes differ from reference points");
}
}  // namespace detail

// Truncation sigma_k = restriction to {gate <= k} intersected with the
// open ball B(0,k); gate holds potential values at the reference points.
inline Measure restrict_measure(const Measure& mu, double k, const SampledField& gate) {
    if (!(k > 0.0)) throw std::invalid_argument("restrict_measure: k must be positive");
    const auto refs = reference_points(mu);
    detail::check_gate_nodes(gate, refs, "restrict_measure");
    auto keep = [&](std::size_t i) { return gate.values[i] <= k && norm(refs[i]) < k; };
    if (const auto* a = std::get_if<AtomicMeasure>(&mu)) {
        AtomicMeasure out;
        out.dim = a->dim;
        for (std::size_t i = 0; i < a->size(); ++i) {
            if (!keep(i)) continue;
            out.locations.push_back(a->locations[i]);
            out.masses.push_back(a->masses[i]);
        }
        return out;
    }
    CellDensityMeasure out = std::get<CellDensityMeasure>(mu);
    for (std::size_t i = 0; i < out.density.size(); ++i)
        if (!keep(i)) out.density[i] = 0.0;
    return out;
}

// d(mu_w) = w^q d(mu): multiplies atom masses / cell densities by
// weights(reference point)^q. Weights must be finite and nonnegative.
inline Measure scale_density(const Measure& mu, const SampledField& weights, double q) {
    const auto refs = reference_points(mu);
    detail::check_gate_nodes(weights, refs, "scale_density");
    for (double w : weights.values)
        if (std::isnan(w) || w < 0.0)
            throw std::invalid_argument("scale_density: weights must be nonnegative");
        else if (std::isinf(w))
            throw std::invalid_argument("scale_density: weights must be finite");
    if (const auto* a = std::get_if<AtomicMeasure>(&mu)) {
        AtomicMeasure out;
        out.dim = a->dim;
        for (std::size_t i = 0; i < a->size(); ++i) {
            const double m = a->masses[i] * pow_ext(weights.values[i], q);
            if (m > 0.0) {
                out.locations.push_back(a->locations[i]);
                out.masses.push_back(m);
            }
        }
        return out;
    }
    CellDensityMeasure out = std::get<CellDensityMeasure>(mu);
    for (std::size_t i = 0; i < out.density.size(); ++i)
        out.density[i] = out.density[i] * pow_ext(weights.values[i], q);
    return out;
}

// Splits every cell into 2^n equal children with the parent's density.
// The measure is mathematically unchanged; only the collocation grid
// refines, which is exactly what evaluation-error studies need.
inline CellDensityMeasure refine_cells(const CellDensityMeasure& c) {
    CellDensityMeasure out;
    out.dim = c.dim;
    out.origin = c.origin;
    out.cell_size = 0.5 * c.cell_size;
    out.extents.resize(c.dim);
    for (int a = 0; a < c.dim; ++a) out.extents[a] = 2 * c.extents[a];
    out.density.assign(out.cell_count(), 0.0);
    std::vector<int> idx;
    for (std::size_t i = 0; i < out.cell_count(); ++i) {
        out.cell_coords(i, idx);
        std::size_t parent = 0;
        for (int a = 0; a < c.dim; ++a)
            parent = parent * static_cast<std::size_t>(c.extents[a]) +
                     static_cast<std::size_t>(idx[a] / 2);
        out.density[i] = c.density[parent];
    }
    return out;
}

}  // namespace nlpot
