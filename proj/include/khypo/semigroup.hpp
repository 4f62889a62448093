#pragma once

#include "khypo/coefficients.hpp"
#include "khypo/common.hpp"
#include "khypo/source.hpp"

#include <functional>

namespace khypo {

// ∫_0^h |p + u q|^α du in closed form (Taylor series when the increment is tiny).
double segment_power_integral(double p, double q, double h, double alpha);

// A(s,t,ξ,η) = ∫_s^t ψ_r(Π*_{r,t}ξ + η) dr, exact per coefficient interval.
double accumulated_symbol(const CoefficientPath& path, double s, double t, const Vec& xi, const Vec& eta);
// E exp(i⟨(ξ,η),K_{s,t}⟩) = exp(-A).
double char_function(const CoefficientPath& path, double s, double t, const Vec& xi, const Vec& eta);

using FourierFn = std::function<cplx(const Vec&, const Vec&)>;

// (T_{s,t} f)^(ξ,η) = exp(-A(s,t,ξ,η-Π*ξ)) f^(ξ, η-Π*_{s,t}ξ).
cplx apply_semigroup_hat(const CoefficientPath& path, const FourierFn& fhat, double s, double t, const Vec& xi,
                         const Vec& eta);

// u^(s,ξ,η) = ∫_s^{T_b} e^{λ(s-t)} (T_{s,t} f(t))^(ξ,η) dt by adaptive Gauss–Kronrod.
// Reuse one evaluator for many nodes: it caches a scalar view of the path in d = 1.
class ResolventEvaluator {
public:
    ResolventEvaluator(const CoefficientPath& path, const Source& src, double lambda, double rel_tol = 1e-9,
                       double abs_tol = 0.0);
    cplx operator()(double s, const Vec& xi, const Vec& eta) const;
    double lambda() const { return lambda_; }

private:
    double flow1(double s, double t) const;
    double accum1(double s, double t, double xi, double eta) const;

    const CoefficientPath& path_;
    const Source& src_;
    double lambda_, rel_tol_, abs_tol_;
    double t_a_, t_b_;
    bool scalar_ = false;
    std::vector<double> bp_, u_, c_;
    double alpha_ = 1.0;
};

cplx resolvent_hat(const CoefficientPath& path, const Source& src, double lambda, double s, const Vec& xi,
                   const Vec& eta, double tol = 1e-9);

}  // namespace khypo
