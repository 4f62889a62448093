#include "khypo/source.hpp"

#include "khypo/quadrature.hpp"

#include <cmath>
#include <limits>

namespace khypo {

bool Source::time_limited() const {
    const auto [a, b] = window();
    return std::isfinite(a) && std::isfinite(b);
}

GaussianPacket::GaussianPacket(SourceSpec spec) : spec_(std::move(spec)) {
    const char* where = "kinetic_semigroup.GaussianPacket";
    d_ = static_cast<int>(spec_.center_xi.size());
    require(d_ >= 1 && d_ <= kMaxDim, where, "center_xi must have 1..3 components");
    require(spec_.center_eta.size() == d_, where, "center_eta dimension mismatch");
    require(spec_.center_xi.allFinite() && spec_.center_eta.allFinite(), where, "centers must be finite");
    require(spec_.bandwidth > 0.0 && std::isfinite(spec_.bandwidth), where, "bandwidth must be positive");
    require(std::isfinite(spec_.amplitude), where, "amplitude must be finite");
    if (spec_.shift_x.size() == 0) spec_.shift_x = Vec::Zero(d_);
    if (spec_.shift_v.size() == 0) spec_.shift_v = Vec::Zero(d_);
    require(spec_.shift_x.size() == d_ && spec_.shift_v.size() == d_, where, "shift dimension mismatch");
    if (spec_.profile != TimeProfile::Constant) {
        require(std::isfinite(spec_.t_a) && std::isfinite(spec_.t_b) && spec_.t_b > spec_.t_a, where,
                "time window must satisfy t_a < t_b");
        require(spec_.profile_exponent > 0.0, where, "profile exponent must be positive");
    }
}

double GaussianPacket::time_profile(double t) const {
    switch (spec_.profile) {
        case TimeProfile::Constant:
            return 1.0;
        case TimeProfile::Box:
            return (t >= spec_.t_a && t <= spec_.t_b) ? 1.0 : 0.0;
        case TimeProfile::Bump: {
            const double tau = (2.0 * t - spec_.t_a - spec_.t_b) / (spec_.t_b - spec_.t_a);
            if (std::abs(tau) >= 1.0) return 0.0;
            const double p = spec_.profile_exponent;
            return std::exp(p - p / (1.0 - tau * tau));
        }
    }
    return 0.0;
}

std::pair<double, double> GaussianPacket::window() const {
    if (spec_.profile == TimeProfile::Constant)
        return {-std::numeric_limits<double>::infinity(), std::numeric_limits<double>::infinity()};
    return {spec_.t_a, spec_.t_b};
}

cplx GaussianPacket::spatial_hat(const Vec& xi, const Vec& eta) const {
    const double s2 = spec_.bandwidth * spec_.bandwidth;
    const double dm = (xi - spec_.center_xi).squaredNorm() + (eta - spec_.center_eta).squaredNorm();
    const double dp = (xi + spec_.center_xi).squaredNorm() + (eta + spec_.center_eta).squaredNorm();
    const double g = spec_.amplitude * (std::exp(-0.5 * dm / s2) + std::exp(-0.5 * dp / s2));
    const double phase = xi.dot(spec_.shift_x) + eta.dot(spec_.shift_v);
    if (phase == 0.0) return {g, 0.0};
    return g * cplx(std::cos(phase), std::sin(phase));
}

cplx GaussianPacket::hat(double t, const Vec& xi, const Vec& eta) const {
    const double w = time_profile(t);
    if (w == 0.0) return {0.0, 0.0};
    return w * spatial_hat(xi, eta);
}

double GaussianPacket::spatial_value(const Vec& x, const Vec& v) const {
    const Vec dx = x - spec_.shift_x, dv = v - spec_.shift_v;
    const double s2 = spec_.bandwidth * spec_.bandwidth;
    const int d = d_;
    const double pref = std::pow(2.0 * kPi, -2.0 * d) * std::pow(2.0 * kPi * s2, d);
    const double env = std::exp(-0.5 * s2 * (dx.squaredNorm() + dv.squaredNorm()));
    return spec_.amplitude * pref * env * 2.0 * std::cos(dx.dot(spec_.center_xi) + dv.dot(spec_.center_eta));
}

double GaussianPacket::value(double t, const Vec& x, const Vec& v) const {
    const double w = time_profile(t);
    if (w == 0.0) return 0.0;
    return w * spatial_value(x, v);
}

double GaussianPacket::spatial_l2_norm() const {
    const double s2 = spec_.bandwidth * spec_.bandwidth;
    const double z2 = spec_.center_xi.squaredNorm() + spec_.center_eta.squaredNorm();
    const double hat_sq = 2.0 * std::pow(kPi * s2, d_) * (1.0 + std::exp(-z2 / s2));
    return std::abs(spec_.amplitude) * std::sqrt(std::pow(2.0 * kPi, -2.0 * d_) * hat_sq);
}

double GaussianPacket::time_profile_norm_p(double p) const {
    switch (spec_.profile) {
        case TimeProfile::Constant:
            return 1.0;
        case TimeProfile::Box:
            return spec_.t_b - spec_.t_a;
        case TimeProfile::Bump: {
            auto f = [&](double t) { return std::pow(time_profile(t), p); };
            return quad::integrate_adaptive<double>(f, spec_.t_a, spec_.t_b, 1e-13, 0.0, 4000).value;
        }
    }
    return 0.0;
}

double GaussianPacket::l2_norm() const {
    return spatial_l2_norm() * std::sqrt(time_profile_norm_p(2.0));
}

std::vector<Lobe> GaussianPacket::lobes() const {
    const Vec w = Vec::Constant(d_, spec_.bandwidth);
    return {Lobe{spec_.center_xi, spec_.center_eta, w, w, std::abs(spec_.amplitude)},
            Lobe{Vec(-spec_.center_xi), Vec(-spec_.center_eta), w, w, std::abs(spec_.amplitude)}};
}

// ---- rescaled source -------------------------------------------------------

RescaledSource::RescaledSource(std::shared_ptr<const Source> base, CoefficientPath path, double r, double t0,
                               Vec x0, Vec v0)
    : base_(std::move(base)), path_(std::move(path)), r_(r), t0_(t0), x0_(std::move(x0)), v0_(std::move(v0)) {
    require(r > 0.0, "kinetic_semigroup.RescaledSource", "r must be positive");
    require(x0_.size() == base_->dim() && v0_.size() == base_->dim(), "kinetic_semigroup.RescaledSource",
            "center dimension mismatch");
    const double a = path_.alpha();
    ra_ = std::pow(r, a);
    r1a_ = std::pow(r, 1.0 + a);
}

cplx RescaledSource::hat(double t, const Vec& xi, const Vec& eta) const {
    const double T = ra_ * t + t0_;
    const Vec cx = x0_ + path_.flow(t0_, T) * v0_;
    const int d = base_->dim();
    const double a = path_.alpha();
    const double jac = std::pow(r_, -(2.0 + a) * d);
    const double phase = -(xi.dot(cx) / r1a_ + eta.dot(v0_) / r_);
    const cplx b = base_->hat(T, Vec(xi / r1a_), Vec(eta / r_));
    return jac * cplx(std::cos(phase), std::sin(phase)) * b;
}

double RescaledSource::value(double t, const Vec& x, const Vec& v) const {
    const double T = ra_ * t + t0_;
    const Vec cx = x0_ + path_.flow(t0_, T) * v0_;
    return base_->value(T, Vec(r1a_ * x + cx), Vec(r_ * v + v0_));
}

std::pair<double, double> RescaledSource::window() const {
    const auto [a, b] = base_->window();
    return {(a - t0_) / ra_, (b - t0_) / ra_};
}

std::vector<Lobe> RescaledSource::lobes() const {
    std::vector<Lobe> out;
    const int d = base_->dim();
    const double jac = std::pow(r_, -(2.0 + path_.alpha()) * d);
    for (const auto& l : base_->lobes())
        out.push_back(Lobe{Vec(l.center_xi * r1a_), Vec(l.center_eta * r_), Vec(l.width_xi * r1a_),
                           Vec(l.width_eta * r_), l.weight * jac});
    return out;
}

double RescaledSource::l2_norm() const {
    const int d = base_->dim();
    return base_->l2_norm() * std::pow(r_, -0.5 * (path_.alpha() + (2.0 + path_.alpha()) * d));
}

double RescaledSource::time_profile(double t) const { return base_->time_profile(ra_ * t + t0_); }

}  // namespace khypo
