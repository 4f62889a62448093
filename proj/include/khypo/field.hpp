#pragma once

#include "khypo/coefficients.hpp"
#include "khypo/common.hpp"
#include "khypo/source.hpp"

#include <functional>
#include <ostream>
#include <vector>

namespace khypo {

// Frequency/time quadrature layout. Widths are in units of the lobe bandwidth.
struct FieldGridSpec {
    double freq_half_width = 5.5;  // lobe half-extent
    double freq_panel_width = 2.0;
    int freq_nodes = 8;  // Gauss–Legendre nodes per panel
    int window_panels = 3;
    int time_nodes = 8;
    double pre_window_first = 0.25;  // first panel below T_a, in window lengths
    double pre_window_max = 64.0;
    double tail_tol = 1e-12;  // stop extending below T_a once a panel adds less than this (relative)
    double resolvent_tol = 1e-9;
    double refine = 1.0;  // divides every panel width
};

// One time slice of a d = 1 field: rows in ξ, each with its own η nodes (CSR layout).
struct FieldSlice {
    double s = 0.0;
    double weight = 1.0;  // time quadrature weight (1 for snapshots)
    std::vector<double> xi, xi_w;
    std::vector<std::size_t> row;  // row k spans [row[k], row[k+1])
    std::vector<double> eta, eta_w;
    std::vector<cplx> val;
    std::size_t rows() const { return xi.size(); }
};

struct SpectralField {
    int dim = 1;
    double lambda = 0.0;
    bool integrated = false;  // slices carry time weights
    double shear_max = 0.0;   // largest |Π| used when placing η nodes
    std::vector<Lobe> lobes;
    std::vector<FieldSlice> slices;
    std::size_t node_count() const;
    bool empty() const { return slices.empty(); }
};

// Node layout for one slice; η rows follow the shear η ≈ η_c + Π ξ with Π in [pmin, pmax].
FieldSlice make_layout(const std::vector<Lobe>& lobes, double pmin, double pmax, const FieldGridSpec& spec);
// Evaluates value(ξ,η) on one half of the nodes and fills the mirror half by conjugation.
void fill_slice(FieldSlice& slice, const std::function<cplx(double, double)>& value);

// Snapshot of f^(t,·,·).
SpectralField source_field(const Source& src, double t, const FieldGridSpec& spec = {});
// f^ on the resolvent time mesh (for ‖f‖ and for f_eff = f - (ψ+λ)u style combinations).
SpectralField source_field_like(const Source& src, const SpectralField& layout);
// u^λ on a time mesh covering the significant part of (-∞, T_b].
SpectralField resolvent_field(const CoefficientPath& path, const Source& src, double lambda,
                              const FieldGridSpec& spec = {});
// u^λ(s) at the given times (snapshots, weight 1).
SpectralField resolvent_snapshots(const CoefficientPath& path, const Source& src, double lambda,
                                  const std::vector<double>& times, const FieldGridSpec& spec = {});
// (T_{s,t} f(tf))^ as a snapshot.
SpectralField semigroup_field(const CoefficientPath& path, const Source& src, double tf, double s, double t,
                              const FieldGridSpec& spec = {});

using Multiplier = std::function<cplx(double s, double xi, double eta, cplx value)>;
SpectralField map_field(const SpectralField& f, const Multiplier& m);
// a·f + b·g on identical layouts
SpectralField combine(const SpectralField& f, double a, const SpectralField& g, double b);

// ((2π)^{-2d} Σ w |ξ|^{4β_x} |η|^{4β_v} |u^|²)^{1/2}
double frac_norm_l2(const SpectralField& f, double beta_x, double beta_v);
// max |u^(s,-ξ,-η) - conj u^(s,ξ,η)| over mirrored nodes
double hermitian_defect(const SpectralField& f);

struct PhysGrid {
    std::vector<double> x, v;  // uniform lattices
    double cell_volume() const;
};
PhysGrid uniform_grid(double x0, double x1, std::size_t nx, double v0, double v1, std::size_t nv);
// Box around the field's envelope (sources centred at the origin) with spacing below π / max frequency.
PhysGrid auto_phys_grid(const SpectralField& f, double margin = 5.5, double oversample = 1.25);

struct PhysField {
    std::size_t nx = 0, nv = 0;
    std::vector<double> slice_weight;
    std::vector<double> values;  // slice-major, then x, then v
    double cell_volume = 0.0;
    double at(std::size_t k, std::size_t i, std::size_t j) const { return values[(k * nx + i) * nv + j]; }
};

// u(s,x,v) = (2π)^{-2d} Σ w e^{-i(xξ+vη)} u^ by direct quadrature.
PhysField inverse_transform_grid(const SpectralField& f, const PhysGrid& grid);
// Same on arbitrary (non-uniform) x and v lists, one slice; returns nx*nv values.
std::vector<double> inverse_transform_points(const FieldSlice& slice, const std::vector<double>& x,
                                             const std::vector<double>& v);
double eval_point(const FieldSlice& slice, double x, double v);

double lp_norm(const std::vector<double>& u, double p, double cell_volume);
double lp_norm(const PhysField& u, double p);

// Columns: s, xi, eta, re, im, weight.
void export_field_csv(const SpectralField& f, std::ostream& os);

}  // namespace khypo
