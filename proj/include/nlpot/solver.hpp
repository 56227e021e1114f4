// nlpot/solver.hpp
//
// Monotone fixed-point construction for the sublinear integral equations
//   u = W_{alpha,p}(u^q dsigma)   and   u = G(u^q dsigma):
// seed u_0 = c_0 * (potential of sigma)^e, iterate u_{j+1} = T(u_j), with
// c_0 halved until u_1 >= u_0 so the sequence increases to the fixed
// point. Also the manufactured-solution generator that produces exact
// (sigma, u*) pairs for oracle testing.
#pragma once

#include <cmath>
#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "nlpot/common.hpp"
#include "nlpot/exponents.hpp"
#include "nlpot/kernels.hpp"
#include "nlpot/measure.hpp"
#include "nlpot/norms.hpp"
#include "nlpot/parallel.hpp"
#include "nlpot/potentials.hpp"
#include "nlpot/sampled_field.hpp"

namespace nlpot {

struct IterationState {
    int j = 0;
    SampledField u;
    double residual = kInf;  // sup-relative change that produced u
    bool monotone_ok = true;
    std::vector<double> norm_history;
};

struct SolveReport {
    bool converged = false;
    int iterations = 0;
    double final_residual = kInf;
    double lgq_sigma_norm = 0.0;       // monitor norm of the final iterate
    std::optional<double> lr_dx_norm;  // filled by callers that hold a grid
    bool divergence_flag = false;
    bool monotone_ok = true;
    double worst_monotone_margin = 0.0;  // most negative relative dip observed
    double c0_used = 1.0;
    double monitor_exponent = 0.0;  // exponent of the dsigma monitor norm
    std::vector<double> norm_history;
};

struct SolveResult {
    SolveReport report;
    SampledField u;
};

namespace detail {

// Shared engine. base is the potential of sigma at the reference points;
// apply_map(values) must return T(u) at the same points for the field u
// given by `values`. Both potentials involved are monotone in their
// input with a fixed evaluation tree, which is what makes the sequence
// provably nondecreasing here up to rounding.
template <class ApplyMap>
SolveResult iterate_monotone(const Measure& sigma, const std::vector<Point>& refs,
                             const std::vector<double>& base, double seed_exponent, double c0,
                             double tol, int max_iter, double monitor_exponent,
                             ApplyMap&& apply_map) {
    if (!(c0 > 0.0)) throw std::invalid_argument("solver: c0 must be positive");
    if (!(tol > 0.0)) throw std::invalid_argument("solver: tol must be positive");
    if (max_iter < 2) throw std::invalid_argument("solver: max_iter must be >= 2");
    for (double b : base) {
        if (std::isinf(b))
            throw std::invalid_argument("solver: potential of sigma is +inf at a node");
        if (!(b > 0.0))
            throw std::invalid_argument("solver: potential of sigma vanishes at a node");
    }

    SolveResult out;
    out.report.monitor_exponent = monitor_exponent;

    const std::size_t m = refs.size();
    auto seed = [&](double c) {
        std::vector<double> u0(m);
        for (std::size_t i = 0; i < m; ++i) u0[i] = c * pow_ext(base[i], seed_exponent);
        return u0;
    };

    // Seed scaling: shrink c0 until one application of the map does not
    // decrease the field anywhere. Smaller seeds only help (the map is
    // order-preserving and the seed scales superlinearly against it).
    std::vector<double> u_prev, u_cur;
    double c = c0;
    bool seeded = false;
    for (int attempt = 0; attempt < 60; ++attempt) {
        u_prev = seed(c);
        u_cur = apply_map(u_prev);
        bool ok = true;
        for (std::size_t i = 0; i < m; ++i)
            if (!(u_cur[i] >= u_prev[i])) {
                ok = false;
                break;
            }
        if (ok) {
            seeded = true;
            break;
        }
        c *= 0.5;
    }
    if (!seeded)
        throw std::runtime_error(
            "solver: could not scale the seed into the monotone regime (60 halvings)");
    out.report.c0_used = c;

    auto sup_rel_change = [&](const std::vector<double>& lo, const std::vector<double>& hi) {
        double worst = 0.0;
        for (std::size_t i = 0; i < m; ++i) {
            if (hi[i] == lo[i]) continue;
            const double denom = std::max(hi[i], std::abs(lo[i]));
            worst = std::max(worst, std::abs(hi[i] - lo[i]) / denom);
        }
        return worst;
    };
    auto monotone_margin = [&](const std::vector<double>& lo, const std::vector<double>& hi) {
        double worst = 0.0;
        for (std::size_t i = 0; i < m; ++i) {
            const double scale = std::max(hi[i], lo[i]);
            if (!(scale > 0.0)) continue;
            worst = std::min(worst, (hi[i] - lo[i]) / scale);
        }
        return worst;
    };
    auto monitor_norm = [&](const std::vector<double>& vals) {
        SampledField f;
        f.nodes = refs;
        f.values = vals;
        return lp_norm_dsigma(f, monitor_exponent, sigma).value;
    };

    double first_norm = 0.0;
    auto record = [&](const std::vector<double>& lo, const std::vector<double>& hi) {
        const double margin = monotone_margin(lo, hi);
        out.report.worst_monotone_margin = std::min(out.report.worst_monotone_margin, margin);
        if (margin < -1e-12) out.report.monotone_ok = false;
        const double nv = monitor_norm(hi);
        out.report.norm_history.push_back(nv);
        if (first_norm == 0.0 && nv > 0.0 && std::isfinite(nv)) first_norm = nv;
        if (first_norm > 0.0 && nv > 1e6 * first_norm) out.report.divergence_flag = true;
    };

    record(u_prev, u_cur);
    double prev_change = sup_rel_change(u_prev, u_cur);
    int iters = 1;
    double change = prev_change;
    while (iters < max_iter && !out.report.divergence_flag) {
        std::vector<double> u_next = apply_map(u_cur);
        ++iters;
        change = sup_rel_change(u_cur, u_next);
        record(u_cur, u_next);
        u_prev = std::move(u_cur);
        u_cur = std::move(u_next);
        // Converged: the latest change is both the increment of the new
        // iterate and the fixed-point residual of the previous one, so
        // requiring two consecutive small changes bounds both.
        if (prev_change < tol && change < tol) {
            out.report.converged = true;
            break;
        }
        prev_change = change;
    }
    out.report.iterations = iters;
    out.report.final_residual = change;
    out.report.lgq_sigma_norm =
        out.report.norm_history.empty() ? 0.0 : out.report.norm_history.back();
    out.u.nodes = refs;
    out.u.values = std::move(u_cur);
    return out;
}

inline SolveResult zero_measure_result(const std::vector<Point>& refs, double monitor_exponent) {
    SolveResult out;
    out.report.converged = true;
    out.report.iterations = 1;
    out.report.final_residual = 0.0;
    out.report.monitor_exponent = monitor_exponent;
    out.report.norm_history = {0.0};
    out.u.nodes = refs;
    out.u.values.assign(refs.size(), 0.0);
    return out;
}

}  // namespace detail

// Solves u = W_{alpha,p}(u^q dsigma) on sigma's cell centers. Atomic
// sigma is rejected: the potential is +inf at every atom, so the measure
// fails the solvability condition and the iteration has no finite fixed
// point there. Trivial-regime parameters throw std::domain_error.
inline SolveResult solve_wolff(const Measure& sigma, const ProblemParams& pp, double c0 = 1.0,
                               double tol = 1e-4, int max_iter = 500,
                               const QuadratureSpec& quad = {}) {
    const Validity v = validate_params(pp);
    if (!v.solvable)
        throw std::domain_error("solve_wolff: parameters outside the solvable regime (" +
                                v.primary + ")");
    if (std::holds_alternative<AtomicMeasure>(sigma))
        throw std::invalid_argument(
            "solve_wolff: atomic sigma rejected (the potential is +inf on every atom, so no "
            "finite solution exists); use a cell density");
    const ExponentSet ex = derive_exponents(pp);
    const double monitor = (ex.gamma + pp.q).to_double();
    const auto refs = reference_points(sigma);
    if (total_mass(sigma) == 0.0) return detail::zero_measure_result(refs, monitor);

    const WolffParams wp{pp.n, pp.alpha_d(), pp.p_d()};
    const double q = pp.q_d();
    std::vector<double> base(refs.size());
    parallel_for(refs.size(),
                 [&](std::size_t i) { base[i] = wolff_potential(sigma, wp, refs[i], quad); });

    auto apply_map = [&](const std::vector<double>& uvals) {
        SampledField f;
        f.nodes = refs;
        f.values = uvals;
        const Measure scaled = scale_density(sigma, f, q);
        std::vector<double> out(refs.size());
        parallel_for(refs.size(),
                     [&](std::size_t i) { out[i] = wolff_potential(scaled, wp, refs[i], quad); });
        return out;
    };
    const double seed_exp = (pp.p_d() - 1.0) / (pp.p_d() - 1.0 - q);
    return detail::iterate_monotone(sigma, refs, base, seed_exp, c0, tol, max_iter, monitor,
                                    apply_map);
}

// Solves u = G(u^q dsigma) for a kernel G with 0 < q < 1. When problem
// parameters are supplied the monitor norm uses their exponent gamma+q;
// otherwise it defaults to 1+q (only the divergence watchdog depends on
// it).
inline SolveResult solve_kernel(const KernelSpec& K, const Measure& sigma, double q,
                                double c0 = 1.0, double tol = 1e-4, int max_iter = 500,
                                double kernel_tol = 1e-3,
                                const std::optional<ProblemParams>& pp = std::nullopt) {
    validate(K);
    if (!(q > 0.0) || !(q < 1.0))
        throw std::domain_error("solve_kernel: q must lie in (0, 1)");
    if (std::holds_alternative<AtomicMeasure>(sigma))
        throw std::invalid_argument(
            "solve_kernel: atomic sigma rejected (the potential is +inf on every atom); use a "
            "cell density");
    if (dimension(sigma) != dimension(K))
        throw std::invalid_argument("solve_kernel: measure/kernel dimension mismatch");
    double monitor = 1.0 + q;
    if (pp) {
        const Validity v = validate_params(*pp);
        if (!v.solvable)
            throw std::domain_error("solve_kernel: parameters outside the solvable regime (" +
                                    v.primary + ")");
        monitor = (derive_exponents(*pp).gamma + pp->q).to_double();
    }
    const auto refs = reference_points(sigma);
    if (total_mass(sigma) == 0.0) return detail::zero_measure_result(refs, monitor);

    // The iteration integrates the same cells against the same centers on
    // every pass; only the density changes. Assembling the cell quadrature
    // once turns each pass into a cheap weighted sum.
    const auto& cells = std::get<CellDensityMeasure>(sigma);
    const CellPotentialOperator op(K, cells, kernel_tol);
    const std::vector<double> base = op.apply(cells.density);

    auto apply_map = [&](const std::vector<double>& uvals) {
        std::vector<double> scaled(cells.density.size());
        for (std::size_t j = 0; j < scaled.size(); ++j)
            scaled[j] = cells.density[j] * pow_ext(uvals[j], q);
        return op.apply(scaled);
    };
    return detail::iterate_monotone(sigma, refs, base, 1.0 / (1.0 - q), c0, tol, max_iter,
                                    monitor, apply_map);
}

// One extra application of the fixed-point map evaluates a converged
// solution anywhere: u(x) ~= W_{alpha,p}(u^q dsigma)(x).
inline double extend_solution(const SampledField& u, const Measure& sigma,
                              const ProblemParams& pp, const Point& x,
                              const QuadratureSpec& quad = {}) {
    if (total_mass(sigma) == 0.0) return 0.0;
    const WolffParams wp{pp.n, pp.alpha_d(), pp.p_d()};
    return wolff_potential(scale_density(sigma, u, pp.q_d()), wp, x, quad);
}

inline double extend_solution(const SampledField& u, const Measure& sigma, const KernelSpec& K,
                              double q, const Point& x, double kernel_tol = 1e-3) {
    if (total_mass(sigma) == 0.0) return 0.0;
    return kernel_potential(K, scale_density(sigma, u, q), x, kernel_tol);
}

// Exact-solution fixture: u* = G rho solves u = G(u^q dsigma) for the
// measure with density rho * (u*)^-q, identically in the continuum and
// to quadrature accuracy at this discretization. The kernel potential is
// evaluated with a tight tolerance so u* serves as an oracle.
struct ManufacturedProblem {
    CellDensityMeasure sigma;
    SampledField u_star;
};

inline ManufacturedProblem manufacture_solution(const KernelSpec& K,
                                                const CellDensityMeasure& rho, double q,
                                                double tol = 1e-6) {
    validate(K);
    rho.validate();
    if (!(q > 0.0) || !(q < 1.0))
        throw std::domain_error("manufacture_solution: q must lie in (0, 1)");
    if (rho.dim != dimension(K))
        throw std::invalid_argument("manufacture_solution: density/kernel dimension mismatch");

    ManufacturedProblem out;
    out.u_star.nodes = reference_points(Measure{rho});
    const CellPotentialOperator op(K, rho, tol);
    out.u_star.values = op.apply(rho.density);

    out.sigma = rho;
    for (std::size_t i = 0; i < rho.cell_count(); ++i) {
        if (!(rho.density[i] > 0.0)) {
            out.sigma.density[i] = 0.0;
            continue;
        }
        const double ustar = out.u_star.values[i];
        if (!(ustar > 0.0) || !std::isfinite(ustar))
            throw std::logic_error(
                "manufacture_solution: potential of rho is not positive-finite on supp(rho)");
        out.sigma.density[i] = rho.density[i] * pow_ext(ustar, -q);
    }
    return out;
}

}  // namespace nlpot
