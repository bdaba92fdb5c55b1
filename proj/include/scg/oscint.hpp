#pragma once

#include "scg/types.hpp"

#include <array>
#include <cstddef>
#include <functional>
#include <span>
#include <vector>

namespace scg {

// exp(i pi n / 4) (2 pi h)^{-n/2}: the prefactor of the normalized momentum integral.
cplx star_prefactor(int n, double h);

// Integrand exp(i phase / h) * amplitude over a box of dimension 1..3.
struct OscIntegrand {
    int dim = 1;
    std::array<double, 3> lo{0, 0, 0};
    std::array<double, 3> hi{1, 1, 1};
    std::function<double(std::span<const double>)> phase;
    std::function<cplx(std::span<const double>)> amplitude;
    double h = 1.0;
};

struct OscOptions {
    double abs_tol = 0.0;              // accept when error <= max(tol |I|, abs_tol)
    std::size_t max_nodes = 60'000'000;
    int min_panels = 2;
    double nodes_per_oscillation = 10.0;
};

struct OscResult {
    cplx value;
    double error = 0;
    std::size_t nodes = 0;
};

class BudgetExceeded : public NumericError {
public:
    BudgetExceeded(const std::string& what, double estimate) : NumericError(what), estimate_(estimate) {}
    double estimate() const { return estimate_; }

private:
    double estimate_;
};

// Tensor Gauss-Kronrod panels sized from the sampled phase gradient, refined until the
// Kronrod/Gauss difference meets the tolerance.
OscResult osc_quad(const OscIntegrand& I, double tol, const OscOptions& opt = {});

struct CriticalPoint {
    double phase = 0;
    Mat hessian;
    cplx amplitude;
};

// Leading boundary term of a one-dimensional integral: side = +1 at the upper end, -1 at the lower.
struct EndpointTerm {
    double phase = 0;
    double slope = 0;
    cplx amplitude;
    int side = 1;
};

// Leading-order sum of (2 pi h)^{d/2} |det phase''|^{-1/2} e^{i pi sgn/4} a e^{i phase/h},
// plus (h/i) a e^{i phase/h} / phase' for each listed endpoint.
cplx stationary_phase(std::span<const CriticalPoint> points, double h, std::span<const EndpointTerm> endpoints = {});

int signature(const Mat& symmetric, double rel_zero = 1e-12);

double bessel_j0(double x);
double bessel_j1(double x);
double bessel_y0(double x);
double bessel_y1(double x);
cplx hankel1_h0(double x);

struct HankelOptions {
    double r_max = 0;                 // required: end of the radial support
    std::vector<double> breakpoints;  // interior points where the profile changes character
    double tol = 1e-12;
};

struct HankelResult {
    double value = 0;
    double error = 0;
};

// int_0^{r_max} f(r) J0(rho r) r dr with panels no longer than a quarter period.
HankelResult hankel0_transform(const std::function<double(double)>& f, double rho, const HankelOptions& opt);

// Composite Gauss-Legendre rule (20 nodes per panel).
struct QuadRule {
    std::vector<double> x, w;
    std::size_t size() const { return x.size(); }
};

// Panels between consecutive cuts, each no longer than max_len.
QuadRule gauss_panels(std::vector<double> cuts, double max_len);

// Same on [lo, hi], with panels shrinking geometrically to width ~delta at the point center.
QuadRule graded_panels(double lo, double hi, double center, double delta, double max_len,
                       std::vector<double> cuts = {});

}  // namespace scg
