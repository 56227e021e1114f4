// nlpot/geometry.hpp
//
// Points and axis-aligned boxes in R^n (runtime dimension), plus the
// point/box distance helpers the subdivision routines are built on.
#pragma once

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

namespace nlpot {

using Point = std::vector<double>;

inline double dist2(const Point& a, const Point& b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double d = a[i] - b[i];
        s += d * d;
    }
    return s;
}

inline double dist(const Point& a, const Point& b) { return std::sqrt(dist2(a, b)); }

inline double norm(const Point& a) {
    double s = 0.0;
    for (double c : a) s += c * c;
    return std::sqrt(s);
}

inline void check_dimension(const Point& x, int n, const char* who) {
    if (static_cast<int>(x.size()) != n)
        throw std::invalid_argument(std::string(who) + ": point dimension mismatch");
}

// Axis-aligned box [lo, hi].
struct Box {
    Point lo;
    Point hi;

    int dim() const { return static_cast<int>(lo.size()); }

    Point center() const {
        Point c(lo.size());
        for (std::size_t i = 0; i < lo.size(); ++i) c[i] = 0.5 * (lo[i] + hi[i]);
        return c;
    }

    double diameter() const {
        double s = 0.0;
        for (std::size_t i = 0; i < lo.size(); ++i) {
            const double d = hi[i] - lo[i];
            s += d * d;
        }
        return std::sqrt(s);
    }

    double volume() const {
        double v = 1.0;
        for (std::size_t i = 0; i < lo.size(); ++i) v *= hi[i] - lo[i];
        return v;
    }

    bool contains(const Point& x) const {
        for (std::size_t i = 0; i < lo.size(); ++i)
            if (x[i] < lo[i] || x[i] > hi[i]) return false;
        return true;
    }
};

// Distance from x to the nearest point of the box (0 when x is inside).
inline double box_min_dist(const Point& x, const Box& b) {
    double s = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        double d = 0.0;
        if (x[i] < b.lo[i]) d = b.lo[i] - x[i];
        else if (x[i] > b.hi[i]) d = x[i] - b.hi[i];
        s += d * d;
    }
    return std::sqrt(s);
}

// Distance from x to the farthest point of the box.
inline double box_max_dist(const Point& x, const Box& b) {
    double s = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double d = std::max(std::abs(x[i] - b.lo[i]), std::abs(x[i] - b.hi[i]));
        s += d * d;
    }
    return std::sqrt(s);
}

// Uniform grid of cells covering [origin, origin + cell_size * extents];
// nodes are the cell centers, row-major with the last axis fastest.
struct BoxGrid {
    Point origin;
    double cell_size = 1.0;
    std::vector<int> extents;

    int dim() const { return static_cast<int>(extents.size()); }

    std::size_t cell_count() const {
        std::size_t c = 1;
        for (int e : extents) c *= static_cast<std::size_t>(e);
        return c;
    }

    double cell_volume() const { return std::pow(cell_size, dim()); }

    Point cell_center(std::size_t flat) const {
        const int n = dim();
        Point c(n);
        for (int a = n - 1; a >= 0; --a) {
            c[a] = origin[a] + cell_size * (static_cast<double>(flat % extents[a]) + 0.5);
            flat /= extents[a];
        }
        return c;
    }

    std::vector<Point> centers() const {
        std::vector<Point> pts;
        pts.reserve(cell_count());
        for (std::size_t i = 0; i < cell_count(); ++i) pts.push_back(cell_center(i));
        return pts;
    }

    Box bounds() const {
        Box b;
        b.lo = origin;
        b.hi.resize(dim());
        for (int a = 0; a < dim(); ++a) b.hi[a] = origin[a] + cell_size * extents[a];
        return b;
    }
};

// Splits a box into its 2^n octant children, invoking visit(child).
template <class Visit>
void split_box(const Box& b, Visit&& visit) {
    const int n = b.dim();
    const Point mid = b.center();
    const unsigned children = 1u << n;
    for (unsigned mask = 0; mask < children; ++mask) {
        Box child;
        child.lo.resize(n);
        child.hi.resize(n);
        for (int i = 0; i < n; ++i) {
            if (mask & (1u << i)) {
                child.lo[i] = mid[i];
                child.hi[i] = b.hi[i];
            } else {
                child.lo[i] = b.lo[i];
                child.hi[i] = mid[i];
            }
        }
        visit(child);
    }
}

}  // namespace nlpot
