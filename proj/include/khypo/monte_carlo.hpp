#pragma once

#include "khypo/coefficients.hpp"
#include "khypo/common.hpp"

#include <cstdint>
#include <iosfwd>
#include <random>
#include <vector>

namespace khypo {

using Rng = std::mt19937_64;

// Independent stream for path `index` under `seed` (splitmix64 of the pair).
Rng path_stream(std::uint64_t seed, std::uint64_t index);
double uniform_open(Rng& rng);  // (0,1)

// Symmetric α-stable with E e^{iuS} = e^{-|u|^α} (Chambers–Mallows–Stuck).
double sample_symmetric_stable(double alpha, Rng& rng);
// Positive β-stable with E e^{-sA} = e^{-s^β}, 0 < β ≤ 1 (Kanter; β = 1 is the point mass at 1).
double sample_positive_stable(double beta, Rng& rng);

// σ ΔL over a step of length dt, where E e^{iζ·σΔL} = e^{-dt ψ_σ(ζ)} for the given kernel.
Vec sample_kernel_increment(const SymbolKernel& k, int dim, double dt, Rng& rng);
// ΔL itself (σ = I).
Vec sample_stable_increment(const StableMeasure& m, double dt, Rng& rng);

struct SampleEnsemble {
    int dim = 1;
    double s = 0.0, t = 0.0;
    int n_steps = 0;
    std::uint64_t seed = 0;
    std::vector<Vec> X, V;
    std::size_t size() const { return X.size(); }
};

// Samples K_{s,t} = (X_{s,t}, V_{s,t}). Each coefficient segment of [s,t] is split uniformly into its share of
// n_steps cells (at least one).
// Each cell uses two independent half-cell increments placed at the 2-point Gauss nodes, so V is exact in law and
// the law of X is 4th-order accurate in the cell length.
SampleEnsemble sample_K(const CoefficientPath& path, double s, double t, std::size_t n_paths, int n_steps,
                        std::uint64_t seed);

struct CharEstimate {
    double value = 0.0;
    double std_error = 0.0;  // 1/√(2N)
};
// Symmetrized empirical E e^{i(ξ·X + η·V)}.
CharEstimate mc_char(const SampleEnsemble& e, const Vec& xi, const Vec& eta);

struct ScalingFit {
    double exponent = 0.0, intercept = 0.0, std_error = 0.0;
};
enum class Component { V, X };
// Least-squares slope of log E|K|^q against log(t-s), horizons started at s = 0.
ScalingFit moment_scaling_fit(const CoefficientPath& path, double q, const std::vector<double>& horizons,
                              std::size_t n_paths, Component comp = Component::V, int n_steps = 16,
                              std::uint64_t seed = 1);

struct ScalingLawResult {
    double max_discrepancy = 0.0;
    double std_error = 0.0;  // 1/√N
};
// K_{t0,t0+r^α} under `path` against ((r^α)^{1/α+1} X̃, (r^α)^{1/α} Ṽ) with K̃_{0,1} from time_rescale(path, r, t0).
// x_exponent_shift perturbs the X exponent (negative control).
ScalingLawResult scaling_law_check(const CoefficientPath& path, double r, double t0,
                                   const std::vector<std::pair<Vec, Vec>>& probes, std::size_t n_paths,
                                   std::uint64_t seed, int n_steps = 32, double x_exponent_shift = 0.0);

// Binary layout: magic "KHMC", int32 dim, int32 n_steps, uint64 seed, float64 s, t, uint64 count, then per sample X…,V….
void write_ensemble(const SampleEnsemble& e, std::ostream& os);
SampleEnsemble read_ensemble(std::istream& is);

}  // namespace khypo
