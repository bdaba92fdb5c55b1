#include "scg/oscint.hpp"
#include "scg/smooth.hpp"

#include <doctest.h>

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/special_functions/bessel.hpp>

#include <cmath>
#include <numbers>
#include <vector>

using namespace scg;
using std::numbers::pi;

namespace {

// Independent oracle: J0 by its Taylor series in extended precision.
long double j0_oracle(long double x)
{
    long double term = 1, sum = 1;
    const long double q = x * x / 4;
    for (int k = 1; k < 400; ++k) {
        term *= -q / (static_cast<long double>(k) * k);
        sum += term;
    }
    return sum;
}

OscIntegrand circle_integral(double rho, double lo, double hi)
{
    OscIntegrand I;
    I.dim = 1;
    I.lo = {lo, 0, 0};
    I.hi = {hi, 0, 0};
    I.h = 1.0 / rho;
    I.phase = [](std::span<const double> t) { return std::cos(t[0]); };
    I.amplitude = [](std::span<const double>) { return cplx(1.0); };
    return I;
}

double slope(const std::vector<double>& hs, const std::vector<double>& errs)
{
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    const double n = static_cast<double>(hs.size());
    for (std::size_t i = 0; i < hs.size(); ++i) {
        const double x = std::log(hs[i]), y = std::log(errs[i]);
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
    }
    return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

}  // namespace

TEST_CASE("star prefactor")
{
    const cplx c = star_prefactor(2, 0.1);
    CHECK(std::abs(c - cplx(0, 1) / (2 * pi * 0.1)) < 1e-15);
}

TEST_CASE("osc_quad: non-oscillatory bump of unit mass")
{
    // the transition profile is antisymmetric about 1/2, so the window (0, .2, .8, 1) has mass 0.8
    OscIntegrand I;
    I.dim = 1;
    I.lo = {-0.5, 0, 0};
    I.hi = {1.5, 0, 0};
    I.phase = [](std::span<const double>) { return 0.0; };
    I.amplitude = [](std::span<const double> x) { return cplx(smooth_window(x[0], 0, 0.2, 0.8, 1.0) / 0.8); };
    const auto r = osc_quad(I, 1e-12);
    CHECK(std::abs(r.value - 1.0) < 1e-11);
    CHECK(r.error <= 1e-12 * std::abs(r.value) + 1e-14);
}

TEST_CASE("osc_quad: full circle gives 2 pi J0")
{
    const double rho = 10.0;
    const auto r = osc_quad(circle_integral(rho, 0, 2 * pi), 1e-13);
    const double expect = 2 * pi * static_cast<double>(j0_oracle(rho));
    CHECK(std::abs(r.value.real() - expect) < 1e-11);
    CHECK(std::abs(r.value.imag()) < 1e-11);
}

TEST_CASE("osc_quad: Gaussian against the Fresnel closed form")
{
    const double h = 0.05, a = 1.0, b = 1.0;
    SUBCASE("one dimension")
    {
        OscIntegrand I;
        I.dim = 1;
        I.lo = {-8, 0, 0};
        I.hi = {8, 0, 0};
        I.h = h;
        I.phase = [a](std::span<const double> x) { return a * x[0] * x[0]; };
        I.amplitude = [b](std::span<const double> x) { return cplx(std::exp(-b * x[0] * x[0])); };
        const cplx exact = std::sqrt(pi / cplx(b, -a / h));
        const auto r = osc_quad(I, 1e-12);
        CHECK(std::abs(r.value - exact) / std::abs(exact) < 1e-8);
    }
    SUBCASE("three dimensions")
    {
        OscIntegrand I;
        I.dim = 3;
        I.lo = {-6, -6, -6};
        I.hi = {6, 6, 6};
        I.h = 0.2;
        I.phase = [](std::span<const double> x) { return 0.5 * x[0] * x[0] - 0.3 * x[1] * x[1] + 0.1 * x[2] * x[2]; };
        I.amplitude = [](std::span<const double> x) { return cplx(std::exp(-(x[0] * x[0] + x[1] * x[1] + x[2] * x[2]))); };
        const cplx exact = std::sqrt(pi / cplx(1, -0.5 / 0.2)) * std::sqrt(pi / cplx(1, 0.3 / 0.2)) * std::sqrt(pi / cplx(1, -0.1 / 0.2));
        const auto r = osc_quad(I, 1e-11);
        CHECK(std::abs(r.value - exact) / std::abs(exact) < 1e-8);
    }
}

TEST_CASE("osc_quad: zero amplitude and budget exhaustion")
{
    auto I = circle_integral(10, 0, 1);
    I.amplitude = [](std::span<const double>) { return cplx(0.0); };
    CHECK(osc_quad(I, 1e-10).value == cplx(0.0));

    auto J = circle_integral(1e6, 0, 2 * pi);
    J.dim = 3;
    J.hi = {2 * pi, 1, 1};
    OscOptions tight;
    tight.max_nodes = 100'000;
    CHECK_THROWS_AS(osc_quad(J, 1e-10, tight), BudgetExceeded);
}

TEST_CASE("stationary phase on the half circle")
{
    const double rho = 1000.0;
    const auto quad = osc_quad(circle_integral(rho, -pi / 2, pi / 2), 1e-13).value;
    const CriticalPoint cp{1.0, Mat::Constant(1, 1, -1.0), cplx(1.0)};
    const cplx sp = stationary_phase(std::span<const CriticalPoint>(&cp, 1), 1.0 / rho);
    CHECK(std::abs(sp - std::sqrt(2 * pi / rho) * std::polar(1.0, rho - pi / 4)) < 1e-14);

    // The critical point alone misses the endpoint terms (h/i) a e^{i phi/h} / phi' at +-pi/2, which
    // together equal 2i/rho; relative to the critical contribution that is 2/sqrt(2 pi rho).
    const double crit_only = std::abs(sp - quad) / std::abs(quad);
    CHECK(crit_only == doctest::Approx(2.0 / std::sqrt(2 * pi * rho) * std::abs(sp) / std::abs(quad)).epsilon(0.02));

    const EndpointTerm ends[] = {{0.0, -1.0, cplx(1.0), +1}, {0.0, 1.0, cplx(1.0), -1}};
    const cplx full = stationary_phase(std::span<const CriticalPoint>(&cp, 1), 1.0 / rho, ends);
    CHECK(std::abs(full - quad) / std::abs(quad) < 1e-3);
}

TEST_CASE("stationary phase is exact for a quadratic phase with constant amplitude")
{
    // int exp(i(x^2/2 - y^2)/h) over R^2 equals the stationary-phase value exactly
    const double h = 0.3;
    Mat hess(2, 2);
    hess << 1, 0, 0, -2;
    const CriticalPoint cp{0.0, hess, cplx(1.0)};
    const cplx sp = stationary_phase(std::span<const CriticalPoint>(&cp, 1), h);
    const cplx exact = std::sqrt(2 * pi * h) * std::polar(1.0, pi / 4) * std::sqrt(pi * h) * std::polar(1.0, -pi / 4);
    CHECK(std::abs(sp - exact) < 1e-14);

    // with a wide Gaussian damping the quadrature agrees with the Fresnel product
    OscIntegrand I;
    I.dim = 2;
    I.lo = {-14, -14, 0};
    I.hi = {14, 14, 0};
    I.h = h;
    const double eps = 0.1;
    I.phase = [](std::span<const double> x) { return 0.5 * x[0] * x[0] - x[1] * x[1]; };
    I.amplitude = [eps](std::span<const double> x) { return cplx(std::exp(-eps * (x[0] * x[0] + x[1] * x[1]))); };
    const cplx damped = std::sqrt(pi / cplx(eps, -0.5 / h)) * std::sqrt(pi / cplx(eps, 1.0 / h));
    const cplx q = osc_quad(I, 1e-10).value;
    CHECK(std::abs(q - damped) / std::abs(damped) < 1e-8);
    CHECK(std::abs(damped - exact) / std::abs(exact) < 5e-2);
}

TEST_CASE("stationary phase: separated critical points add")
{
    // phase cos(theta) on [-pi/2, 3pi/2] with a window vanishing at both ends: critical points 0 and pi
    const double h = 0.01;
    auto amp = [](double t) { return smooth_window(t, -1.5, -1.0, 4.1, 4.6); };
    OscIntegrand I = circle_integral(1.0 / h, -1.5, 4.6);
    I.amplitude = [amp](std::span<const double> t) { return cplx(amp(t[0])); };
    OscIntegrand left = I, right = I;
    left.hi = {pi / 2, 0, 0};
    right.lo = {pi / 2, 0, 0};
    const cplx whole = osc_quad(I, 1e-12).value;
    const cplx parts = osc_quad(left, 1e-12).value + osc_quad(right, 1e-12).value;
    CHECK(std::abs(whole - parts) < 1e-10);

    const CriticalPoint cps[] = {{1.0, Mat::Constant(1, 1, -1.0), cplx(1.0)}, {-1.0, Mat::Constant(1, 1, 1.0), cplx(1.0)}};
    const cplx sum = stationary_phase(cps, h);
    const cplx split = stationary_phase(std::span<const CriticalPoint>(cps, 1), h) + stationary_phase(std::span<const CriticalPoint>(cps + 1, 1), h);
    CHECK(std::abs(sum - split) < 1e-15);
    CHECK(std::abs(sum - whole) / std::abs(whole) < 0.05);
}

TEST_CASE("stationary phase refuses degenerate hessians")
{
    const CriticalPoint cp{0.0, Mat::Zero(1, 1), cplx(1.0)};
    CHECK_THROWS_AS(stationary_phase(std::span<const CriticalPoint>(&cp, 1), 0.1), CausticError);
}

TEST_CASE("quadrature and stationary phase agree to O(h)")
{
    auto amp = [](double t) { return (1.0 + t + t * t) * smooth_window(t, -2, -1, 1, 2); };
    std::vector<double> hs{0.04, 0.02, 0.01, 0.005}, errs;
    for (double h : hs) {
        OscIntegrand I;
        I.dim = 1;
        I.lo = {-2, 0, 0};
        I.hi = {2, 0, 0};
        I.h = h;
        I.phase = [](std::span<const double> t) { return 0.5 * t[0] * t[0]; };
        I.amplitude = [amp](std::span<const double> t) { return cplx(amp(t[0])); };
        const cplx q = osc_quad(I, 1e-13).value;
        const CriticalPoint cp{0.0, Mat::Constant(1, 1, 1.0), cplx(1.0)};
        const cplx sp = stationary_phase(std::span<const CriticalPoint>(&cp, 1), h);
        errs.push_back(std::abs(q - sp) / std::abs(q));
    }
    CHECK(slope(hs, errs) >= 0.9);
}

TEST_CASE("Bessel functions against independent references")
{
    CHECK(bessel_j0(0.0) == 1.0);
    CHECK(std::abs(bessel_j0(2.404825557695773)) < 1e-10);
    CHECK(std::abs(static_cast<double>(j0_oracle(2.404825557695773L))) < 1e-10);

    double worst = 0;
    for (double x = 0.05; x <= 50.0; x += 0.0731) {
        worst = std::max(worst, std::abs(bessel_j0(x) - boost::math::cyl_bessel_j(0, x)));
        worst = std::max(worst, std::abs(bessel_j1(x) - boost::math::cyl_bessel_j(1, x)));
        worst = std::max(worst, std::abs(bessel_y0(x) - boost::math::cyl_neumann(0, x)));
        worst = std::max(worst, std::abs(bessel_y1(x) - boost::math::cyl_neumann(1, x)));
    }
    CHECK(worst < 1e-10);
    for (double x : {0.5, 3.0, 8.0, 11.9}) CHECK(std::abs(bessel_j0(x) - static_cast<double>(j0_oracle(x))) < 1e-10);

    for (double x : {1e3, 5e4, 1e6}) {
        CHECK(std::abs(bessel_j0(x) - boost::math::cyl_bessel_j(0, x)) < 1e-12);
        CHECK(std::abs(bessel_y0(x) - boost::math::cyl_neumann(0, x)) < 1e-12);
    }
    const cplx h0 = hankel1_h0(7.5);
    CHECK(h0.real() == bessel_j0(7.5));
    CHECK(h0.imag() == bessel_y0(7.5));
    CHECK_THROWS_AS(hankel1_h0(0.0), NumericError);
}

TEST_CASE("Wronskian J1 Y0 - J0 Y1 = 2 / (pi x)")
{
    for (double x : {0.1, 0.7, 2.0, 9.5, 12.0, 12.5, 25.0, 49.0, 400.0}) {
        const double w = bessel_j1(x) * bessel_y0(x) - bessel_j0(x) * bessel_y1(x);
        CHECK(std::abs(w - 2.0 / (pi * x)) < 1e-8 * std::max(1.0, 2.0 / (pi * x)));
    }
}

TEST_CASE("J0 equals the normalized circle integral")
{
    for (double rho : {1.0, 5.0, 20.0}) {
        const cplx q = osc_quad(circle_integral(rho, 0, 2 * pi), 1e-14).value / (2 * pi);
        CHECK(std::abs(q.real() - bessel_j0(rho)) < 1e-8);
        CHECK(std::abs(q.imag()) < 1e-8);
    }
}

TEST_CASE("order-zero Hankel transform")
{
    HankelOptions opt;
    opt.r_max = 40.0;
    for (double rho : {0.0, 0.5, 1.0, 2.0, 3.0}) {
        const auto r = hankel0_transform([](double s) { return std::exp(-0.5 * s * s); }, rho, opt);
        CHECK(std::abs(r.value - std::exp(-0.5 * rho * rho)) < 1e-8);
    }
    auto bump = [](double s) { return smooth_window(s, 0.4, 0.8, 1.2, 1.6); };
    HankelOptions b;
    b.r_max = 1.6;
    b.breakpoints = {0.4, 0.8, 1.2};
    const double mass = boost::math::quadrature::gauss_kronrod<double, 61>::integrate([&](double s) { return bump(s) * s; }, 0.4, 1.6, 15, 1e-14);
    CHECK(std::abs(hankel0_transform(bump, 0.0, b).value - mass) < 1e-12);
}
