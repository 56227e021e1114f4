// Test-side closed forms. Nothing here is part of the library: these are
// independent formulas the tests compare against.
#pragma once

#include <cmath>

#include "nlpot/geometry.hpp"

namespace oracles {

// Antiderivative block for the Newtonian potential (kernel 1/|x-y|) of a
// unit-density axis-aligned box in R^3, evaluated corner-wise. Valid off
// the degenerate corner axes (log/arctan arguments nonzero), which is all
// the tests need; pick generic evaluation points.
inline double newton_box_corner_term(double x, double y, double z) {
    const double r = std::sqrt(x * x + y * y + z * z);
    double f = 0.0;
    if (x != 0.0 && y != 0.0) f += x * y * std::log(z + r);
    if (y != 0.0 && z != 0.0) f += y * z * std::log(x + r);
    if (z != 0.0 && x != 0.0) f += z * x * std::log(y + r);
    if (x != 0.0 && r != 0.0) f -= 0.5 * x * x * std::atan(y * z / (x * r));
    if (y != 0.0 && r != 0.0) f -= 0.5 * y * y * std::atan(z * x / (y * r));
    if (z != 0.0 && r != 0.0) f -= 0.5 * z * z * std::atan(x * y / (z * r));
    return f;
}

// Newtonian potential of the box  b  (unit density) at point p:
//   V(p) = int_b |p - y|^{-1} dy,
// as the alternating corner sum of the antiderivative above.
inline double box_newtonian_potential(const nlpot::Box& b, const nlpot::Point& p) {
    double sum = 0.0;
    for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j)
            for (int k = 0; k < 2; ++k) {
                const double x = (i ? b.hi[0] : b.lo[0]) - p[0];
                const double y = (j ? b.hi[1] : b.lo[1]) - p[1];
                const double z = (k ? b.hi[2] : b.lo[2]) - p[2];
                const int sign = ((i + j + k) % 2 == 1) ? 1 : -1;
                sum += sign * newton_box_corner_term(x, y, z);
            }
    return sum;
}

// Half-space Green potential of the box (unit density) via reflection:
// G(x,y) = |x-y|^{-1} - |x-ybar|^{-1} integrates to V(x) - V(xbar).
inline double box_halfspace_green_potential(const nlpot::Box& b, const nlpot::Point& p) {
    nlpot::Point pbar = p;
    pbar[2] = -pbar[2];
    return box_newtonian_potential(b, p) - box_newtonian_potential(b, pbar);
}

}  // namespace oracles
