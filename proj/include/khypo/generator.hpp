#pragma once

#include "khypo/coefficients.hpp"
#include "khypo/common.hpp"
#include "khypo/field.hpp"
#include "khypo/source.hpp"

#include <cmath>
#include <functional>
#include <limits>
#include <utility>
#include <vector>

namespace khypo {

// Smooth test function with closed-form derivatives.
class TestFunction {
public:
    virtual ~TestFunction() = default;
    virtual int dim() const = 0;
    virtual double value(const Vec& x, const Vec& v) const = 0;
    virtual Vec grad_x(const Vec& x, const Vec& v) const = 0;
    virtual Vec grad_v(const Vec& x, const Vec& v) const = 0;
    virtual Mat hess_v(const Vec& x, const Vec& v) const = 0;
    // φ(x, v + y) is negligible whenever |y| >= tail_radius; +inf if φ does not decay.
    virtual double tail_radius(const Vec& x, const Vec& v) const = 0;
    // Largest oscillation frequency in v; sets the outer panel length.
    virtual double frequency_scale() const { return 1.0; }
    // y ↦ φ(x, v + y e) + φ(x, v - y e)
    virtual std::function<double(double)> even_line(const Vec& x, const Vec& v, const Vec& e) const;
    // ∫_R^∞ [φ(x,v+re) + φ(x,v-re)] r^{-1-α} dr for non-decaying φ (0 otherwise).
    virtual double far_field(const Vec& x, const Vec& v, const Vec& e, double R, double alpha) const;
    // Compact support box; false when φ is not compactly supported.
    virtual bool support(Vec& x_lo, Vec& x_hi, Vec& v_lo, Vec& v_hi) const;
    // Bound on sup|φ|, the reference size for quadrature accuracy checks.
    virtual double magnitude() const = 0;
};

// A exp(-|x-cx|²/(2wx²) - |v-cv|²/(2wv²))
class GaussianTest final : public TestFunction {
public:
    GaussianTest(Vec cx, Vec cv, double wx, double wv, double amplitude = 1.0);
    int dim() const override { return static_cast<int>(cx_.size()); }
    double value(const Vec& x, const Vec& v) const override;
    Vec grad_x(const Vec& x, const Vec& v) const override;
    Vec grad_v(const Vec& x, const Vec& v) const override;
    Mat hess_v(const Vec& x, const Vec& v) const override;
    double tail_radius(const Vec& x, const Vec& v) const override;
    double frequency_scale() const override { return 1.0 / wv_; }
    double magnitude() const override { return std::abs(a_); }

private:
    Vec cx_, cv_;
    double wx_, wv_, a_;
};

// cos(ξ0·x + η0·v + phase)
class PlaneWave final : public TestFunction {
public:
    PlaneWave(Vec xi0, Vec eta0, double phase = 0.0);
    int dim() const override { return static_cast<int>(xi0_.size()); }
    double value(const Vec& x, const Vec& v) const override;
    Vec grad_x(const Vec& x, const Vec& v) const override;
    Vec grad_v(const Vec& x, const Vec& v) const override;
    Mat hess_v(const Vec& x, const Vec& v) const override;
    double tail_radius(const Vec&, const Vec&) const override { return std::numeric_limits<double>::infinity(); }
    double frequency_scale() const override { return eta0_.norm(); }
    std::function<double(double)> even_line(const Vec& x, const Vec& v, const Vec& e) const override;
    double far_field(const Vec& x, const Vec& v, const Vec& e, double R, double alpha) const override;
    double magnitude() const override { return 1.0; }

private:
    Vec xi0_, eta0_;
    double phase_;
};

// Π_i b((x_i - cx_i)/rx) b((v_i - cv_i)/rv) with b(y) = exp(-1/(1-y²)) on |y| < 1.
class BumpTest final : public TestFunction {
public:
    BumpTest(Vec cx, Vec cv, double rx, double rv);
    int dim() const override { return static_cast<int>(cx_.size()); }
    double value(const Vec& x, const Vec& v) const override;
    Vec grad_x(const Vec& x, const Vec& v) const override;
    Vec grad_v(const Vec& x, const Vec& v) const override;
    Mat hess_v(const Vec& x, const Vec& v) const override;
    double tail_radius(const Vec& x, const Vec& v) const override;
    double frequency_scale() const override { return 4.0 / rv_; }
    bool support(Vec& x_lo, Vec& x_hi, Vec& v_lo, Vec& v_hi) const override;
    double magnitude() const override { return std::exp(-2.0 * dim()); }

private:
    Vec cx_, cv_;
    double rx_, rv_;
};

// d = 1 function reconstructed from one field slice: (2π)^{-2} Σ w Re(e^{-i(xξ+vη)} u^).
class WaveSumTest final : public TestFunction {
public:
    WaveSumTest(FieldSlice slice, double center_v, double radius_v);
    int dim() const override { return 1; }
    double value(const Vec& x, const Vec& v) const override;
    Vec grad_x(const Vec& x, const Vec& v) const override;
    Vec grad_v(const Vec& x, const Vec& v) const override;
    Mat hess_v(const Vec& x, const Vec& v) const override;
    double tail_radius(const Vec& x, const Vec& v) const override;
    double frequency_scale() const override { return freq_; }
    std::function<double(double)> even_line(const Vec& x, const Vec& v, const Vec& e) const override;
    double magnitude() const override { return mag_; }

private:
    // Σ w e^{-i(xξ+vη)} u^ (-iξ)^a (-iη)^b, real part
    double moment(double x, double v, int a, int b) const;
    FieldSlice sl_;
    double cv_, rv_, freq_ = 0.0, mag_ = 0.0;
};

struct GeneratorQuad {
    int inner_nodes = 24;      // Gauss–Jacobi nodes on (0,1] with weight r^{1-α}
    int outer_nodes = 8;       // Gauss–Legendre nodes per outer panel
    double outer_panel = 0.5;  // max outer panel length (also capped by the oscillation scale)
    double r_max = 400.0;      // outer cut-off for non-decaying test functions
    int dir_nodes = 48;        // angular nodes for isotropic parts (d >= 2)
    double tol = 1e-6;         // coarse/refined disagreement that triggers an accuracy error
};

// 𝓛^ν_σ φ(x,v) = ∫ [φ(v+σy) + φ(v-σy) - 2φ(v)] ν(dy)
double apply_levy(const StableMeasure& nu, const Mat& sigma, const TestFunction& phi, const Vec& x, const Vec& v,
                  const GeneratorQuad& q = {});
// 𝒦_s φ = 𝓛 φ + (U_s v)·∇_x φ
double apply_generator(const CoefficientPath& path, const TestFunction& phi, double s, const Vec& x, const Vec& v,
                       const GeneratorQuad& q = {});
// 𝒦*_t φ = 𝓛 φ - (U_t v)·∇_x φ
double apply_adjoint_generator(const CoefficientPath& path, const TestFunction& phi, double t, const Vec& x,
                               const Vec& v, const GeneratorQuad& q = {});

struct WeakSpec {
    FieldGridSpec grid;
    GeneratorQuad gen;
    int space_panels = 4;  // per axis over supp φ
    int space_nodes = 8;
    int time_panels = 3;  // per coefficient piece inside [s,T]
    int time_nodes = 8;
    int source_panels = 16;
    double envelope = 7.0;     // v-extent of u in lobe widths (when no resolved box is given)
    double tail_panel = 0.5;   // v panel length outside supp φ
    // region where u is resolved; φ's support must lie inside (empty = unchecked)
    std::vector<double> resolved_box;  // {x0, x1, v0, v1}
};

struct WeakResidual {
    double residual = 0.0;
    double scale = 0.0;       // largest magnitude among the four terms
    double norm_scale = 0.0;  // max_t ‖u(t)‖₂ · ‖φ‖₂
    double lhs = 0.0, rhs = 0.0;
};

// |⟨u(s),φ⟩ - ⟨u(T),φ⟩ - ∫⟨u,(𝒦*-λ)φ⟩ - ∫⟨f,φ⟩| for the resolvent u of src (d = 1).
WeakResidual weak_solution_residual(const CoefficientPath& path, const Source& src, double lambda,
                                    const TestFunction& phi, double s, double T, const WeakSpec& spec = {});

struct KolmogorovSpec {
    FieldGridSpec grid;
    GeneratorQuad gen;
    double envelope = 8.0;  // v-radius of T f in lobe widths
};

// max over probes of |∂_s T_{s,t}f + 𝒦_s T_{s,t}f| with a 4th-order central difference of step h (d = 1).
double kolmogorov_residual(const CoefficientPath& path, const Source& src, double tf, double s, double t,
                           const std::vector<std::pair<double, double>>& probes, double h,
                           const KolmogorovSpec& spec = {});

}  // namespace khypo
