#include "khypo/semigroup.hpp"

#include "khypo/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace khypo {

namespace {

// y|y|^α/(1+α), an antiderivative of |y|^α
inline double power_antideriv(double y, double alpha) {
    return y * std::pow(std::abs(y), alpha) / (1.0 + alpha);
}

// ∫ over a one-sided distance range [d0,d1] from the closest-approach point of
// (m² + q2 y²)^{α/2}, on panels graded geometrically away from the kink scale m/|q|.
double graded_distance_integral(double m, double q2, double d0, double d1, double alpha) {
    const auto& gl = quad::gauss_legendre_cached(16);
    const double ell = m / std::sqrt(q2);
    double total = 0.0, x = d0;
    while (x < d1) {
        const double nxt = std::min(d1, x + std::max(2.0 * ell, 3.0 * x));
        const double c = 0.5 * (x + nxt), h = 0.5 * (nxt - x);
        double s = 0.0;
        for (std::size_t i = 0; i < gl.size(); ++i) {
            const double y = c + h * gl.x[i];
            s += gl.w[i] * std::pow(m * m + q2 * y * y, 0.5 * alpha);
        }
        total += h * s;
        x = nxt;
    }
    return total;
}

// ∫_0^h |P + uQ|^α du for vectors P, Q.
double vector_power_integral(const Vec& P, const Vec& Q, double h, double alpha) {
    const double q2 = Q.squaredNorm();
    if (q2 == 0.0) return h * std::pow(P.norm(), alpha);
    const double ustar = -P.dot(Q) / q2;
    const double m = (P + ustar * Q).norm();
    if (m <= 1e-14 * (P.norm() + h * std::sqrt(q2)))
        return std::pow(q2, 0.5 * alpha) * segment_power_integral(-ustar, 1.0, h, alpha);
    // distances from u* of the interval ends
    const double lo = -ustar, hi = h - ustar;  // y = u - u*
    if (lo >= 0.0) return graded_distance_integral(m, q2, lo, hi, alpha);
    if (hi <= 0.0) return graded_distance_integral(m, q2, -hi, -lo, alpha);
    return graded_distance_integral(m, q2, 0.0, -lo, alpha) + graded_distance_integral(m, q2, 0.0, hi, alpha);
}

double kernel_segment(const SymbolKernel& k, const Vec& p0, const Vec& q, double h) {
    if (p0.size() == 1) return k.scalar_coeff * segment_power_integral(p0(0), -q(0), h, k.alpha);
    double s = 0.0;
    for (const auto& pr : k.pairs)
        s += pr.weight * segment_power_integral(p0.dot(pr.dir), -q.dot(pr.dir), h, k.alpha);
    if (k.iso_coeff > 0.0)
        s += k.iso_coeff * vector_power_integral(Vec(k.sigma_t * p0), Vec(-(k.sigma_t * q)), h, k.alpha);
    return s;
}

}  // namespace

double segment_power_integral(double p, double q, double h, double alpha) {
    if (h <= 0.0) return 0.0;
    const double ap = std::abs(p);
    if (q == 0.0) return h * std::pow(ap, alpha);
    const double x = h * q / p;
    if (ap > 0.0 && std::abs(x) <= 1e-3) {
        // ∫_0^1 (1 + x u)^α du = Σ binom(α,k) x^k / (k+1)
        double term = 1.0, sum = 1.0;
        for (int k = 1; k <= 6; ++k) {
            term *= (alpha - (k - 1)) / k * x;
            sum += term / (k + 1);
        }
        return h * std::pow(ap, alpha) * sum;
    }
    return (power_antideriv(p + h * q, alpha) - power_antideriv(p, alpha)) / q;
}

double accumulated_symbol(const CoefficientPath& path, double s, double t, const Vec& xi, const Vec& eta) {
    if (s > t) fail_invalid("kinetic_semigroup.accumulated_symbol", "requires s <= t");
    require(xi.size() == path.dim() && eta.size() == path.dim(), "kinetic_semigroup.accumulated_symbol",
            "frequency dimension mismatch");
    if (s == t) return 0.0;
    const Mat pst = path.flow(s, t);
    Mat psa = Mat::Zero(path.dim(), path.dim());
    double total = 0.0;
    path.for_each_segment(s, t, [&](double a, double b, std::size_t k) {
        const Vec p0 = (pst - psa).transpose() * xi + eta;
        const Vec q = path.U(k).transpose() * xi;
        total += kernel_segment(path.kernel(k), p0, q, b - a);
        psa += (b - a) * path.U(k);
    });
    return total;
}

double char_function(const CoefficientPath& path, double s, double t, const Vec& xi, const Vec& eta) {
    return std::exp(-accumulated_symbol(path, s, t, xi, eta));
}

cplx apply_semigroup_hat(const CoefficientPath& path, const FourierFn& fhat, double s, double t, const Vec& xi,
                         const Vec& eta) {
    if (s > t) fail_invalid("kinetic_semigroup.apply_semigroup_hat", "requires s <= t");
    const Vec zeta = eta - path.flow(s, t).transpose() * xi;
    return std::exp(-accumulated_symbol(path, s, t, xi, zeta)) * fhat(xi, zeta);
}

// ---- resolvent -------------------------------------------------------------

ResolventEvaluator::ResolventEvaluator(const CoefficientPath& path, const Source& src, double lambda,
                                       double rel_tol, double abs_tol)
    : path_(path), src_(src), lambda_(lambda), rel_tol_(rel_tol), abs_tol_(abs_tol) {
    const char* where = "kinetic_semigroup.resolvent_hat";
    if (!(lambda > 0.0) || !std::isfinite(lambda)) fail_invalid(where, "lambda must be positive");
    require(src.dim() == path.dim(), where, "source and path dimensions differ");
    require(src.time_limited(), where, "source must have a bounded time window");
    require(rel_tol > 0.0, where, "tolerance must be positive");
    std::tie(t_a_, t_b_) = src.window();
    if (path.dim() == 1) {
        scalar_ = true;
        alpha_ = path.alpha();
        for (std::size_t k = 0; k < path.pieces(); ++k) {
            bp_.push_back(path.breakpoints()[k]);
            u_.push_back(path.U(k)(0, 0));
            c_.push_back(path.kernel(k).scalar_coeff);
        }
    }
}

double ResolventEvaluator::flow1(double s, double t) const {
    // s <= t
    std::size_t k = static_cast<std::size_t>(std::upper_bound(bp_.begin(), bp_.end(), s) - bp_.begin());
    k = k == 0 ? 0 : k - 1;
    double a = s, sum = 0.0;
    while (a < t) {
        const double b = (k + 1 < bp_.size()) ? std::min(bp_[k + 1], t) : t;
        sum += (b - a) * u_[k];
        a = b;
        ++k;
    }
    return sum;
}

double ResolventEvaluator::accum1(double s, double t, double xi, double eta) const {
    if (t <= s) return 0.0;
    const double pst = flow1(s, t);
    std::size_t k = static_cast<std::size_t>(std::upper_bound(bp_.begin(), bp_.end(), s) - bp_.begin());
    k = k == 0 ? 0 : k - 1;
    double a = s, psa = 0.0, total = 0.0;
    while (a < t) {
        const double b = (k + 1 < bp_.size()) ? std::min(bp_[k + 1], t) : t;
        const double p0 = (pst - psa) * xi + eta;
        total += c_[k] * segment_power_integral(p0, -u_[k] * xi, b - a, alpha_);
        psa += (b - a) * u_[k];
        a = b;
        ++k;
    }
    return total;
}

cplx ResolventEvaluator::operator()(double s, const Vec& xi, const Vec& eta) const {
    if (s >= t_b_) return {0.0, 0.0};
    const double lo = std::max(s, t_a_);
    if (scalar_) {
        const double x = xi(0), e = eta(0);
        const double p_slo = flow1(s, lo);
        const double a0 = accum1(s, lo, x, e - p_slo * x);
        Vec xv(1), ev(1);
        xv(0) = x;
        auto g = [&](double t) -> cplx {
            const double pst = p_slo + flow1(lo, t);
            const double zeta = e - pst * x;
            const double A = a0 + accum1(lo, t, x, zeta);
            ev(0) = zeta;
            const cplx fh = src_.hat(t, xv, ev);
            if (fh == cplx(0.0, 0.0)) return fh;
            return std::exp(lambda_ * (s - t) - A) * fh;
        };
        auto r = quad::integrate_adaptive<cplx>(g, lo, t_b_, rel_tol_, abs_tol_, 400);
        if (!r.converged) {
            std::ostringstream os;
            os << "kinetic_semigroup.resolvent_hat: time quadrature did not converge at s=" << s;
            throw AccuracyError(os.str());
        }
        return r.value;
    }
    const Mat p_slo = path_.flow(s, lo);
    const double a0 = accumulated_symbol(path_, s, lo, xi, Vec(eta - p_slo.transpose() * xi));
    auto g = [&](double t) -> cplx {
        const Mat pst = p_slo + path_.flow(lo, t);
        const Vec zeta = eta - pst.transpose() * xi;
        const double A = a0 + accumulated_symbol(path_, lo, t, xi, zeta);
        const cplx fh = src_.hat(t, xi, zeta);
        if (fh == cplx(0.0, 0.0)) return fh;
        return std::exp(lambda_ * (s - t) - A) * fh;
    };
    auto r = quad::integrate_adaptive<cplx>(g, lo, t_b_, rel_tol_, abs_tol_, 400);
    if (!r.converged) {
        std::ostringstream os;
        os << "kinetic_semigroup.resolvent_hat: time quadrature did not converge at s=" << s;
        throw AccuracyError(os.str());
    }
    return r.value;
}

cplx resolvent_hat(const CoefficientPath& path, const Source& src, double lambda, double s, const Vec& xi,
                   const Vec& eta, double tol) {
    return ResolventEvaluator(path, src, lambda, tol)(s, xi, eta);
}

}  // namespace khypo
