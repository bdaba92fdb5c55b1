#pragma once

#include "scg/types.hpp"

#include <functional>
#include <span>
#include <vector>

namespace scg {

// Radial momentum profile g(r), zero for r >= support.
struct RadialProfile {
    std::function<double(double)> value;
    double support = 0;
    std::vector<double> breakpoints;
};

RadialProfile bump_profile(double a, double b, double c, double d);
RadialProfile gaussian_profile(double width);

// 2-D convolution of g with the radial kernel (2 pi h)^-2 F_h(exp(-|x|^2 / 2 s^2)), rescaled to keep
// the mass int g r dr. Optional preprocessing for helmholtz_u1.
RadialProfile smoothed_profile(const RadialProfile& g, double s, double h);

// f = (2 pi h)^-2 int e^{i x xi / h} g(|xi|) d xi with E = k^2.
struct HelmholtzReference {
    double k = 1.0;
    RadialProfile g;
    double h = 0.1;
};

// Source term f itself.
cplx helmholtz_source(const HelmholtzReference& R, const Vec& x);

// i pi g(k) / (2 pi h)^2 * int_{-pi/2}^{pi/2} exp(i |x| k cos(theta) / h) d theta
cplx helmholtz_u0(const HelmholtzReference& R, const Vec& x, double tol = 1e-10);

// The residue part plus the principal value left over by the contour argument: the true outgoing
// field minus helmholtz_u1.
cplx helmholtz_u0_exact(const HelmholtzReference& R, const Vec& x);

// 2 pi / (2 pi h)^2 * int g(r) / (r + k) J0(|x| r / h) dr
cplx helmholtz_u1(const HelmholtzReference& R, const Vec& x);

// (2 pi h)^-2 int e^{i x xi / h} g(|xi|) / (|xi|^2 - z) d xi by direct polar quadrature.
cplx resolvent_at(const RadialProfile& g, double h, cplx z, const Vec& x);

struct ResolventOptions {
    std::vector<double> ladder;  // decreasing; empty: scaled to the oscillation rate at x
    double max_relative_error = 1e-2;
};

struct ResolventResult {
    cplx value;
    double error = 0;  // |order-2 minus order-1 extrapolant|
    std::vector<double> ladder;
    std::vector<cplx> samples;
};

// Limiting absorption: polynomial extrapolation in eps -> 0 of resolvent_at(k^2 + i eps).
ResolventResult resolvent_direct(const HelmholtzReference& R, const Vec& x, const ResolventOptions& opt = {});

// Neville extrapolation of samples at the given abscissae to 0.
cplx extrapolate_to_zero(std::span<const double> eps, std::span<const cplx> values);

// Amplitude in the normalized momentum integral, supported in [lo, hi].
struct MomentumAmplitude {
    std::function<cplx(const Vec&)> value;
    Vec lo, hi;
};

struct ModelSolution {
    cplx u;
    cplx dxn_u;   // h D_{x_n} u, differentiated under the integral
    cplx source;  // f = int* e^{i x xi / h} A d xi
    double residual() const { return std::abs(dxn_u - source); }
};

// u = (i / h) int_0^inf chi_T(t) int* e^{i (x' xi' + (x_n - t) xi_n) / h} A(xi) d xi dt, n = 1, 2 or 3.
ModelSolution model_dxn_solution(const MomentumAmplitude& A, double T, const Vec& x, double h);

}  // namespace scg
