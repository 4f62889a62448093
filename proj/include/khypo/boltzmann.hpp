#pragma once

#include "khypo/common.hpp"

#include <functional>
#include <vector>

namespace khypo {

// B(|u|, ω) = scale · |u|^γ b(|⟨u,ω⟩|/|u|), b(s) = s^{-1-α}.
struct CollisionKernelSpec {
    double gamma = 0.0;
    double alpha = 0.5;
    int dim = 2;
    double scale = 1.0;  // 0 gives the zero kernel
    void validate() const;
};

// amp (1 + quad |v-c|²) exp(-|v-c|²/(2 width²)); width = +inf gives the constant amp.
struct GaussPoly {
    double amp = 1.0;
    Vec center;
    double width = 1.0;
    double quad = 0.0;
    double operator()(const Vec& v) const;
    bool is_constant() const;
    static GaussPoly constant(int dim, double c);
    GaussPoly scaled(double c) const;
};

struct BoltzQuad {
    int radial_panels = 24;  // GL panels on [ρ0, R]
    int radial_nodes = 8;
    int jacobi_nodes = 12;  // singular end [0, ρ0]
    double rho0 = 0.25;     // in units of the narrowest width
    int dir_nodes = 32;     // half-circle trapezoid (d = 2), azimuth (d = 3)
    int polar_nodes = 8;    // d = 3 polar GL nodes
    int inner_nodes = 10;   // GL nodes per hyperplane / grazing panel
    int angle_nodes = 24;   // grazing-angle Gauss–Jacobi nodes (spherical form)
    double tail = 8.0;      // truncation radius in widths
    double truncation = 0.0;  // explicit R_w; 0 = automatic
    double tol = 1e-3;        // coarse/refined relative disagreement that raises an accuracy error
    bool check = true;
    BoltzQuad refined() const;
};

struct CoareaResult {
    double lhs = 0.0, rhs = 0.0, rel_error = 0.0;
};
using PhaseFn = std::function<double(const Vec& x, const Vec& omega)>;
// ∫∫_{S^{d-1}} F(x,ω) dω dx against ∫∫_{h·w=0} F(h±w, w/|w|) |w|^{1-d} dh dw
// (or 2F(h+w, ·) when `symmetric`); F must be negligible for |x| >= box.
CoareaResult coarea_identity_check(const PhaseFn& F, int dim, bool symmetric = false, double box = 6.0,
                                   int level = 1);

double collision_Q_carleman(const GaussPoly& f, const GaussPoly& g, const CollisionKernelSpec& k, const Vec& v,
                            const BoltzQuad& q = {});
double collision_Q_spherical(const GaussPoly& f, const GaussPoly& g, const CollisionKernelSpec& k, const Vec& v,
                             const BoltzQuad& q = {});

struct CollisionSplit {
    double Q1 = 0.0, Q2 = 0.0, Hf = 0.0, Q = 0.0;
    double truncation = 0.0;  // common R_w (Q1 and Q2 diverge separately as R_w grows when γ > -1)
    std::function<double(const Vec& w)> Kf;
};
CollisionSplit collision_split(const GaussPoly& f, const GaussPoly& g, const CollisionKernelSpec& k, const Vec& v,
                               const BoltzQuad& q = {});

// K_f(v,w) = 2 ∫_{h·w=0} f(v-h) |h-w|^{γ+1+α} dh
double kernel_Kf(const GaussPoly& f, const CollisionKernelSpec& k, const Vec& v, const Vec& w,
                 const BoltzQuad& q = {});

// Orthonormal basis of w^⊥ (Gram–Schmidt from e_d, falling back to e_1 near the axis).
std::vector<Vec> orthogonal_frame(const Vec& w);

}  // namespace khypo
