#pragma once

#include "khypo/coefficients.hpp"
#include "khypo/config.hpp"
#include "khypo/field.hpp"
#include "khypo/source.hpp"

#include <limits>
#include <vector>

namespace khypo {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

// One (λ, p) instance. Norms are space-time L^p norms; R1 = ‖Δ_x^{α/(2(1+α))}u‖/‖f‖, R2 = ‖Δ_v^{α/2}u‖/‖f‖.
struct RegularityRow {
    double lambda = 0.0, p = 2.0;
    double f_norm = 0.0, ux_norm = 0.0, uv_norm = 0.0;
    double R1 = 0.0, R2 = 0.0;
    double R1_refined = kNaN, R2_refined = kNaN;
    double delta_R1 = kNaN, delta_R2 = kNaN;  // relative change under refinement
    double plancherel = kNaN;                 // p = 2 only: |grid L² − spectral L²| / spectral L²
    double nodes = 0.0;
};

struct SpreadStat {
    double p = 2.0;
    double R1 = 0.0, R2 = 0.0;  // max/min over λ
};

// slack = ‖Δ_v^{α/2}u‖^{1/(1+α)} ‖f_eff‖^{α/(1+α)} / ‖Δ_x^{α/(2(1+α))}u‖ with f_eff^ = f^ − (ψ_s(η) + λ)u^.
struct BouchutRow {
    double lambda = 0.0;
    bool zero_field = false;
    double ux_norm = 0.0, uv_norm = 0.0, feff_norm = 0.0;
    double slack = kNaN, slack_refined = kNaN, delta = kNaN;
    double slack_negative = kNaN;  // LHS order α/2 in x (control, not asserted)
};

struct RegularityReport {
    double alpha = 1.0;
    std::vector<RegularityRow> rows;
    std::vector<SpreadStat> spreads;
    std::vector<BouchutRow> bouchut;  // filled when RegularityOptions::bouchut is set
};

struct RegularityOptions {
    bool refine_check = true;
    double refine_factor = 2.0;
    bool grid_check = false;  // physical-grid norms at p = 2 (Plancherel cross-check)
    double grid_oversample = 1.25;
    double grid_margin = 5.5;
    bool bouchut = false;  // Bouchut slack on the same fields
};

// Throws DegeneracyError when a measure is degenerate or the envelopes fail to sandwich the path.
void check_regularity_preconditions(const CoefficientPath& path);

RegularityReport run_regularity(const CoefficientPath& path, const Source& src, const std::vector<double>& lambdas,
                                const std::vector<double>& p_values, const FieldGridSpec& grid,
                                const RegularityOptions& opt = {});
RegularityReport run_regularity(const ExperimentConfig& cfg, const RegularityOptions& opt = {});

std::vector<BouchutRow> bouchut_check(const CoefficientPath& path, const Source& src,
                                      const std::vector<double>& lambdas, const FieldGridSpec& grid,
                                      bool refine_check = true, double refine_factor = 2.0);
std::vector<BouchutRow> bouchut_check(const ExperimentConfig& cfg, bool refine_check = true);

// Ball averages of |𝒫_i f − a|² over Q_r(t0,x0,v0) for (path, f, λ) and over Q_1(0) for
// (time_rescale(path), f̃, r^α λ); 𝒫_1 = Δ_x^{α/(2(1+α))}u^λ, 𝒫_2 = Δ_v^{α/2}u^λ.
struct ScalingIdentityResult {
    double lhs = 0.0, rhs = 0.0, rel_error = 0.0;
    double a = 0.0;  // offset actually used
};
struct ScalingIdentitySpec {
    double r = 1.0, t0 = 0.0;
    double x0 = 0.0, v0 = 0.0;
    double lambda = 1.0;
    int which = 2;              // 1 or 2
    double a = 0.0;
    bool subtract_mean = false;  // a := mean of 𝒫_i f over Q_r (variance form)
    int nodes = 24;              // Gauss–Legendre nodes per axis (time panels split at breakpoints)
    bool unscaled_lambda = false;  // negative control: rescaled side keeps λ instead of r^α λ
};
ScalingIdentityResult scaling_identity_check(const CoefficientPath& path, const GaussianPacket& src,
                                             const ScalingIdentitySpec& spec, const FieldGridSpec& grid = {});

}  // namespace khypo
