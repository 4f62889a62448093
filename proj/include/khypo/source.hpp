#pragma once

#include "khypo/coefficients.hpp"
#include "khypo/common.hpp"

#include <memory>
#include <utility>
#include <vector>

namespace khypo {

enum class TimeProfile { Bump, Box, Constant };

struct SourceSpec {
    Vec center_xi;   // ξ0
    Vec center_eta;  // η0
    double bandwidth = 0.3;
    double t_a = 0.0, t_b = 1.0;
    TimeProfile profile = TimeProfile::Bump;
    double profile_exponent = 1.0;
    double amplitude = 1.0;
    Vec shift_x;  // optional physical translation (empty = 0)
    Vec shift_v;
};

// Gaussian envelope of one spectral lobe, used to place quadrature nodes.
struct Lobe {
    Vec center_xi, center_eta;
    Vec width_xi, width_eta;
    double weight = 1.0;  // rough amplitude for significance tests
};

// A source f(t,x,v) with a closed-form phase-space transform
// f^(t,ξ,η) = ∫ e^{i(ξ·x+η·v)} f dx dv.
class Source {
public:
    virtual ~Source() = default;
    virtual int dim() const = 0;
    virtual cplx hat(double t, const Vec& xi, const Vec& eta) const = 0;
    virtual double value(double t, const Vec& x, const Vec& v) const = 0;
    // time support [t_a, t_b]; infinite for time-independent sources
    virtual std::pair<double, double> window() const = 0;
    virtual std::vector<Lobe> lobes() const = 0;
    // ‖f‖ on R^{1+2d} (time-limited) or on R^{2d} (time-independent)
    virtual double l2_norm() const = 0;
    // ∫|w(t)|^p dt times the spatial factor is source specific; this is the time profile alone
    virtual double time_profile(double t) const = 0;
    bool time_limited() const;
};

class GaussianPacket final : public Source {
public:
    explicit GaussianPacket(SourceSpec spec);
    int dim() const override { return d_; }
    cplx hat(double t, const Vec& xi, const Vec& eta) const override;
    double value(double t, const Vec& x, const Vec& v) const override;
    std::pair<double, double> window() const override;
    std::vector<Lobe> lobes() const override;
    double l2_norm() const override;
    double time_profile(double t) const override;
    const SourceSpec& spec() const { return spec_; }
    // spatial transform at unit time profile
    cplx spatial_hat(const Vec& xi, const Vec& eta) const;
    double spatial_value(const Vec& x, const Vec& v) const;
    double spatial_l2_norm() const;
    // ∫ w(t)^p dt
    double time_profile_norm_p(double p) const;

private:
    SourceSpec spec_;
    int d_ = 1;
};

// f~(t,x,v) = f(r^α t + t0, r^{1+α} x + x0 + Π_{t0, r^α t + t0} v0, r v + v0).
class RescaledSource final : public Source {
public:
    RescaledSource(std::shared_ptr<const Source> base, CoefficientPath path, double r, double t0, Vec x0, Vec v0);
    int dim() const override { return base_->dim(); }
    cplx hat(double t, const Vec& xi, const Vec& eta) const override;
    double value(double t, const Vec& x, const Vec& v) const override;
    std::pair<double, double> window() const override;
    std::vector<Lobe> lobes() const override;
    double l2_norm() const override;
    double time_profile(double t) const override;

private:
    std::shared_ptr<const Source> base_;
    CoefficientPath path_;
    double r_, t0_, ra_, r1a_;
    Vec x0_, v0_;
};

}  // namespace khypo
