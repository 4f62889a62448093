#pragma once

#include "khypo/common.hpp"
#include "khypo/stable_levy.hpp"

#include <algorithm>
#include <optional>
#include <utility>
#include <vector>

namespace khypo {

// Per-interval data for fast symbol evaluation: ψ(ζ) = iso_coeff·|σ*ζ|^α + Σ w_j |⟨ζ, σθ_j⟩|^α.
struct SymbolKernel {
    double alpha = 1.0;
    double iso_coeff = 0.0;
    double scalar_coeff = 0.0;  // d = 1: ψ(ζ) = scalar_coeff·|ζ|^α
    Mat sigma_t;
    std::vector<Atom> pairs;
    double operator()(const Vec& zeta) const;
};

struct Envelopes {
    StableMeasure nu1;
    StableMeasure nu2;
};

// σ_t, U_t, ν_t constant on [t_k, t_{k+1}); value 0 also covers t < t_0 and value K covers t >= t_K.
class CoefficientPath {
public:
    CoefficientPath() = default;
    CoefficientPath(std::vector<double> breakpoints, std::vector<Mat> sigma, std::vector<Mat> U,
                    std::vector<StableMeasure> nu, std::optional<Envelopes> env = std::nullopt);
    static CoefficientPath constant(const Mat& sigma, const Mat& U, const StableMeasure& nu,
                                    std::optional<Envelopes> env = std::nullopt);

    int dim() const { return d_; }
    double alpha() const { return nu_.front().alpha(); }
    std::size_t pieces() const { return sigma_.size(); }
    const std::vector<double>& breakpoints() const { return bp_; }
    std::size_t piece_at(double t) const;
    const Mat& sigma(std::size_t k) const { return sigma_[k]; }
    const Mat& U(std::size_t k) const { return U_[k]; }
    const StableMeasure& nu(std::size_t k) const { return nu_[k]; }
    const SymbolKernel& kernel(std::size_t k) const { return kernels_[k]; }
    LevySymbol symbol_at(double t) const;
    const std::optional<Envelopes>& envelopes() const { return env_; }

    // Π_{s,t} = ∫_s^t U_r dr (and -Π_{t,s} when s > t).
    Mat flow(double s, double t) const;

    // Calls fn(a, b, k) for the maximal sub-intervals [a,b] of [s,t] on which piece k is active.
    template <class F>
    void for_each_segment(double s, double t, F&& fn) const {
        std::size_t k = piece_at(s);
        double a = s;
        while (a < t) {
            const double b = (k + 1 < pieces()) ? std::min(bp_[k + 1], t) : t;
            fn(a, b, k);
            a = b;
            ++k;
        }
    }

    double sup_sigma_norm() const;
    double sup_sigma_inv_norm() const;
    double sup_U_norm() const;

    // Sandwich ν1 <= ν_k <= ν2 for every piece; false if envelopes are absent.
    bool check_sandwich() const;

private:
    int d_ = 1;
    std::vector<double> bp_;
    std::vector<Mat> sigma_, U_;
    std::vector<StableMeasure> nu_;
    std::vector<SymbolKernel> kernels_;
    std::optional<Envelopes> env_;
};

Mat flow_matrix(const CoefficientPath& path, double s, double t);

using TimeLattice = std::vector<std::pair<double, double>>;
// Log-spaced lengths in [1e-3, 1e3] anchored at and straddling every breakpoint.
TimeLattice default_lattice(const CoefficientPath& path);
double kappa0(const CoefficientPath& path, const TimeLattice& lattice);

CoefficientPath time_rescale(const CoefficientPath& path, double r, double t0);

double op_norm(const Mat& m);

}  // namespace khypo
