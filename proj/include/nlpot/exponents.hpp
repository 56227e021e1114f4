// Exact rational arithmetic for the exponent relations that govern the
// nonlinear problem  u = W_{alpha,p}(u^q dsigma):  the scaling exponent
// gamma, the embedding/criticality exponents, and the validity gates for
// the nontrivial parameter regime.
#pragma once

#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "nlpot/rational.hpp"

namespace nlpot {

// Problem parameters. n is the ambient dimension; p > 1 the nonlinearity
// degree of the potential; 0 < q < p-1 the source exponent; alpha the
// smoothness order with 0 < alpha*p < n; r the Lebesgue/Lorentz scale of
// the datum. All but n are exact rationals so identities can be checked
// without rounding.
struct ProblemParams {
    int n = 3;
    Rational p{2};
    Rational q{1, 2};
    Rational alpha{1};
    Rational r{2};

    double p_d() const { return p.to_double(); }
    double q_d() const { return q.to_double(); }
    double alpha_d() const { return alpha.to_double(); }
    double r_d() const { return r.to_double(); }
};

// Outcome of parameter validation. `solvable` means the parameters lie in
// the regime where the fixed-point construction applies; `violations`
// names each failed condition; `primary` is the first violation (used for
// diagnostics and CLI error text).
struct Validity {
    bool solvable = true;
    std::vector<std::string> violations;
    std::string primary;
};

inline Validity validate_params(const ProblemParams& pp) {
    Validity v;
    const Rational one{1};
    const Rational zero{0};
    const Rational n_rat{pp.n};
    auto fail = [&](const std::string& what) {
        v.solvable = false;
        v.violations.push_back(what);
        if (v.primary.empty()) v.primary = what;
    };
    if (pp.n < 1) fail("n < 1");
    if (!(pp.p > one)) fail("p <= 1");
    if (!(pp.q > zero)) fail("q <= 0");
    if (pp.p > one && !(pp.q < pp.p - one)) fail("q >= p - 1");
    if (!(pp.alpha > zero)) fail("alpha <= 0");
    if (pp.n >= 1 && pp.alpha > zero) {
        if (!(pp.alpha * pp.p < n_rat)) {
            // alpha*p >= n makes the Wolff potential identically infinite
            // for every nonzero measure. Name the most common cause.
            if (pp.alpha == one && !(pp.p < n_rat))
                fail("p >= n");
            else
                fail("alpha*p >= n");
        }
    }
    if (v.solvable) {
        const Rational r_crit = n_rat * (pp.p - one) / (n_rat - pp.alpha * pp.p);
        if (!(pp.r > r_crit)) fail("r <= n(p-1)/(n-alpha p)");
    }
    return v;
}

// The derived exponents. All values are exact rationals; the optional
// entries are defined only when their finiteness conditions hold.
struct ExponentSet {
    Rational gamma;                // (r(n-alpha p) - (p-1)n) / n
    Rational s_embed;              // (gamma+q)/q
    Rational r_critical;           // n(p-1)/(n-alpha p)
    Rational sigma_norm_exponent;  // (gamma+q)(p-1)/(p-1-q)
    std::optional<Rational> s1;    // nr / (n(p-1-q) + p r),   needs p < n, r > n(p-1)/(n-p)
    std::optional<Rational> s2;    // nr / (n(1-q) + 2 alpha r), needs 2 alpha < n, q < 1, r > n/(n-2 alpha)
    std::optional<Rational> s3;    // nr / (n(1-q) + 2 r),     needs n >= 3, q < 1, r > n/(n-2)
};

inline ExponentSet derive_exponents(const ProblemParams& pp) {
    const Validity v = validate_params(pp);
    if (!v.solvable)
        throw std::domain_error("derive_exponents: parameters outside the solvable regime (" +
                                v.primary + ")");
    const Rational one{1};
    const Rational two{2};
    const Rational n_rat{pp.n};

    ExponentSet e;
    e.gamma = (pp.r * (n_rat - pp.alpha * pp.p) - (pp.p - one) * n_rat) / n_rat;
    e.s_embed = (e.gamma + pp.q) / pp.q;
    e.r_critical = n_rat * (pp.p - one) / (n_rat - pp.alpha * pp.p);
    e.sigma_norm_exponent = (e.gamma + pp.q) * (pp.p - one) / (pp.p - one - pp.q);

    // s1: first-order (alpha = 1) embedding scale. The formula is stated
    // at alpha = 1; it is gated on p < n and r above the first-order
    // critical value so the denominator stays positive and the exponent
    // exceeds 1.
    if (pp.p < n_rat) {
        const Rational r_crit1 = n_rat * (pp.p - one) / (n_rat - pp.p);
        if (pp.r > r_crit1) e.s1 = n_rat * pp.r / (n_rat * (pp.p - one - pp.q) + pp.p * pp.r);
    }
    // s2: second-order scale at smoothness 2*alpha.
    if (two * pp.alpha < n_rat && pp.q < one) {
        const Rational r_crit2 = n_rat / (n_rat - two * pp.alpha);
        if (pp.r > r_crit2) e.s2 = n_rat * pp.r / (n_rat * (one - pp.q) + two * pp.alpha * pp.r);
    }
    // s3: Laplacian (order-2) scale, dimension n >= 3.
    if (pp.n >= 3 && pp.q < one) {
        const Rational r_crit3 = Rational{pp.n} / Rational{pp.n - 2};
        if (pp.r > r_crit3) e.s3 = n_rat * pp.r / (n_rat * (one - pp.q) + two * pp.r);
    }
    return e;
}

// Exponent produced by the Wolff-potential weighted-norm step at alpha = 1:
// for a weight in L^beta the potential lands in L^{n(beta+p-1)/(n(p-1)+p beta)}.
inline Rational prop_wolff_exponent(const ProblemParams& pp, const Rational& beta) {
    const Rational one{1};
    const Rational n_rat{pp.n};
    return n_rat * (beta + pp.p - one) / (n_rat * (pp.p - one) + pp.p * beta);
}

// Exponent produced by the linear-potential weighted-norm step at order
// 2*alpha: a weight in L^beta maps to L^{n(beta+1)/(n+2 alpha beta)}.
inline Rational prop3_exponent(const ProblemParams& pp, const Rational& beta) {
    const Rational one{1};
    const Rational n_rat{pp.n};
    return n_rat * (beta + one) / (n_rat + Rational{2} * pp.alpha * beta);
}

// Integrability exponents required of u for each membership condition on
// the right-hand side measure u^q dsigma (or u^q dx).
enum class Membership {
    dsigma_wolff,  // u in L^{(gamma+q)(p-1)/(p-1-q)}(dsigma)
    dx_wolff,      // u in L^{r(p-1)/(p-1-q)}(dx)
    dsigma_linear, // u in L^{(gamma+q)/(1-q)}(dsigma), requires q < 1
    dx_linear      // u in L^{r/(1-q)}(dx), requires q < 1
};

inline Rational membership_exponent(const ProblemParams& pp, Membership m) {
    const Rational one{1};
    const ExponentSet e = derive_exponents(pp);
    switch (m) {
        case Membership::dsigma_wolff:
            return e.sigma_norm_exponent;
        case Membership::dx_wolff:
            return pp.r * (pp.p - one) / (pp.p - one - pp.q);
        case Membership::dsigma_linear:
            if (!(pp.q < one))
                throw std::domain_error("membership_exponent: dsigma_linear requires q < 1");
            return (e.gamma + pp.q) / (one - pp.q);
        case Membership::dx_linear:
            if (!(pp.q < one))
                throw std::domain_error("membership_exponent: dx_linear requires q < 1");
            return pp.r / (one - pp.q);
    }
    throw std::logic_error("membership_exponent: unreachable");
}

}  // namespace nlpot
