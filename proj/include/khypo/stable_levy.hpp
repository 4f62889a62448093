#pragma once

#include "khypo/common.hpp"

#include <vector>

namespace khypo {

struct Atom {
    Vec dir;  // unit vector
    double weight = 0.0;
};

// Symmetric alpha-stable Lévy measure ν(dy) = r^{-1-α} dr Σ(dθ) with
// Σ = Σ_j w_j δ_{θ_j} + iso_weight · (surface measure on S^{d-1}).
class StableMeasure {
public:
    StableMeasure() = default;
    StableMeasure(double alpha, int dim, std::vector<Atom> atoms, double iso_weight);

    static StableMeasure isotropic(double alpha, int dim, double iso_weight = 1.0);

    double alpha() const { return alpha_; }
    int dim() const { return dim_; }
    const std::vector<Atom>& atoms() const { return atoms_; }
    double iso_weight() const { return iso_; }
    // Σ(S^{d-1})
    double total_mass() const;
    StableMeasure scaled(double c) const;

    // ∫ |⟨θ0,θ⟩|^α Σ(dθ) for a unit vector θ0.
    double projection_moment(const Vec& theta0) const;

    // One representative per ±θ pair with the pair weight 2w.
    std::vector<Atom> paired_atoms() const;

private:
    double alpha_ = 1.0;
    int dim_ = 1;
    std::vector<Atom> atoms_;
    double iso_ = 0.0;
};

// c_α = 2∫_0^∞ (1 - cos s) s^{-1-α} ds (cached, adaptive quadrature).
double stable_constant(double alpha);
// S_{d,α} = ∫_{S^{d-1}} |θ_1|^α dθ (cached).
double sphere_moment(int d, double alpha);
// c_{d,α} with 2∫(1 - cos⟨e_1,x⟩)|x|^{-d-α} dx = c_{d,α}.
double frac_constant(int d, double alpha);

class LevySymbol {
public:
    LevySymbol(StableMeasure m, Mat sigma);

    const StableMeasure& measure() const { return m_; }
    const Mat& sigma() const { return sigma_; }
    double one_d_constant() const { return c_alpha_; }

    // ψ^ν_σ(ξ) = c_α [ iso ∫|⟨σ*ξ,θ⟩|^α dθ + Σ w_j |⟨σ*ξ,θ_j⟩|^α ].
    double operator()(const Vec& xi) const;
    // κ1 with κ1|ξ|^α ≤ ψ(ξ) ≤ κ1^{-1}|ξ|^α.
    double kappa1(int grid_size = 256) const;

private:
    StableMeasure m_;
    Mat sigma_;
    double c_alpha_ = 0.0;
    double iso_coeff_ = 0.0;  // c_α · iso · S_{d,α}
    std::vector<Atom> pairs_;  // σθ_j with weights c_α·2w_j
};

double eval_symbol(const LevySymbol& sym, const Vec& xi);

struct NondegeneracyResult {
    bool is_nondegenerate = false;
    double kappa_low = 0.0;
};
NondegeneracyResult check_nondegenerate(const StableMeasure& m, int grid_size = 256);

bool measure_leq(const StableMeasure& m1, const StableMeasure& m2);

// Quasi-uniform unit directions on S^{d-1} (Fibonacci lattice for d = 3).
std::vector<Vec> sphere_directions(int d, int n);

}  // namespace khypo
