#pragma once

#include "scg/phase.hpp"
#include "scg/reference.hpp"

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace scg {

// chi~0 on tau - tau_L, chi0 near t = 0, chi_T at the horizon; all plateau profiles.
struct CutoffSpec {
    double tau_width = 0.6;  // chi~0 = 1 on |s| <= tau_width / 2, 0 beyond tau_width
    double t_width = 0.1;    // chi0 = 1 on t <= t_width / 2, 0 beyond t_width
    double horizon = 4.0;    // chi_T = 1 on t <= T / 2, 0 beyond T

    double tilde_chi0(double s) const;
    double chi0(double t) const;
    double chi_T(double t) const;
    void validate() const;
};

// Right-hand side f = int* e^{i phase(x, eta) / h} A(eta) d eta over a momentum-represented source.
struct SourceSpec {
    enum class Normalization {
        star,    // A = amplitude
        fourier  // A = e^{-i pi n / 4} (2 pi h)^{-n/2} amplitude, so f = (2 pi h)^-n int e^{i x eta / h} amplitude
    };

    SourceLagrangian lagrangian = SourceLagrangian::vertical_fiber(Vec::Zero(2));
    std::function<cplx(const Vec&)> amplitude;
    std::function<cplx(const Vec&)> amplitude_h1;  // accepted, unused at leading order
    Vec window_lo, window_hi;                      // box containing supp amplitude
    Normalization normalization = Normalization::star;

    cplx weight(double h) const;  // A = weight(h) * amplitude
    cplx A(const Vec& eta, double h) const { return weight(h) * amplitude(eta); }
};

// Point source at x0 with radial profile g in the Fourier normalization.
SourceSpec radial_point_source(const Vec& x0, const RadialProfile& g);

struct GreenOptions {
    LevelOptions level;
    FlowOutOptions flow;
    ArrivalOptions arrivals;
    double quad_tol = 1e-7;
    double boundary_gap = 1e-8;  // minimum |H0 - E| on supp (1 - chi~0) A
};

class GreenSetup {
public:
    GreenSetup(SourceSpec source, Hamiltonian H, CutoffSpec cut, GreenOptions opt = {});

    const SourceSpec& source() const { return src_; }
    const Hamiltonian& hamiltonian() const { return H_; }
    const CutoffSpec& cutoffs() const { return cut_; }
    const GreenOptions& options() const { return opt_; }
    bool elliptic() const { return !flow_; }
    const LevelIntersection& level() const;
    const FlowOut& flow() const;
    bool degenerate_projection() const { return degenerate_; }

    // tau - tau_L(psi) at a momentum; +-infinity when eta has no chart point.
    double level_offset(const Vec& eta) const;
    // sign data of the source: signature of S'' - d Hpp on the tangent of the level set at eta
    int source_signature(const Vec& eta) const;
    // Root tau_L(psi), empty where L has no point over psi. Memoized per thread for the last psi.
    std::optional<double> level_tau(const Vec& psi) const;
    // max |amplitude| times the window volume: the absolute scale for quadrature tolerances
    double amplitude_mass() const { return mass_; }
    // (s, psi) box of the transient and direct wave integrals, s = tau - tau_L(psi)
    void strip_box(std::array<double, 3>& lo, std::array<double, 3>& hi) const;

private:
    SourceSpec src_;
    Hamiltonian H_;
    CutoffSpec cut_;
    GreenOptions opt_;
    std::optional<LevelIntersection> level_;
    std::optional<FlowOut> flow_;
    bool degenerate_ = false;
    double mass_ = 0;
    std::uint64_t id_ = 0;
};

cplx source_value(const GreenSetup& G, const Vec& x, double h);

cplx boundary_part(const GreenSetup& G, const Vec& x, double h);
cplx transient_part(const GreenSetup& G, const Vec& x, double h);

struct WaveOptions {
    bool apply_maslov = true;
};

// WKB sum over the arrivals; CausticError when a contributing arrival is degenerate.
cplx wave_part(const GreenSetup& G, std::span<const ArrivalDatum> arrivals, const Vec& x, double h,
               const WaveOptions& opt = {});
// (i/h) int (1 - chi0) chi_T int* e^{i Phi / h} chi~0 A by direct quadrature; x-independent symbols only.
cplx wave_direct(const GreenSetup& G, const Vec& x, double h);

struct FieldValue {
    Vec x;
    cplx boundary, transient, wave;
    cplx total;
    int arrivals = 0;
    bool caustic = false;  // wave part from the direct quadrature
};

FieldValue assemble(const GreenSetup& G, const Vec& x, double h);

struct GridSpec {
    Vec lo, hi;
    std::vector<int> counts;  // nodes per axis, >= 1
    std::size_t size() const;
    Vec node(std::size_t flat) const;  // last axis fastest
};

struct FieldGrid {
    GridSpec grid;
    double h = 0;
    std::vector<FieldValue> values;
};

FieldGrid evaluate_field(const GreenSetup& G, const GridSpec& grid, double h);

enum class FieldPart { total, boundary, transient, wave };
cplx part_value(const FieldValue& v, FieldPart part);
std::string_view to_string(FieldPart part);
FieldPart parse_field_part(std::string_view name);

struct WavefrontReport {
    std::vector<double> exponents;  // |u| ~ h^exponent, least-squares over the h values
    std::vector<bool> slow;
    std::vector<bool> on_lagrangian;  // within tol of pi_x(Lambda) or pi_x(Lambda+)
    int slow_nodes = 0;
    int stray_nodes = 0;  // slow but off both projections
    bool consistent() const { return stray_nodes == 0; }
};

// Nodes whose part decays slower than h^slow_exponent are expected on the projections of L and its flow-out.
WavefrontReport wavefront_estimate(std::span<const FieldGrid> fields, const GreenSetup& G, FieldPart part,
                                   double tol, double slow_exponent = 1.0);

}  // namespace scg
