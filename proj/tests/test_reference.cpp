#include "scg/oscint.hpp"
#include "scg/reference.hpp"
#include "scg/smooth.hpp"

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <doctest.h>

#include <cmath>
#include <numbers>

using namespace scg;
using namespace std::complex_literals;
using std::numbers::pi;

namespace {

Vec v2(double a, double b)
{
    Vec v(2);
    v << a, b;
    return v;
}

HelmholtzReference standard(double h) { return {1.0, bump_profile(0.4, 0.8, 1.2, 1.6), h}; }

double rel(cplx a, cplx b) { return std::abs(a - b) / std::abs(b); }

template <class F>
double gk(F f, double a, double b)
{
    return boost::math::quadrature::gauss_kronrod<double, 61>::integrate(f, a, b, 3, 1e-13);
}

// int_a^b e^{i x s / h} window(s) ds split into cos and sin parts
cplx window_transform(double a, double b, double c, double d, double x, double h)
{
    double re = 0, im = 0;
    const int pieces = 64;
    for (int i = 0; i < pieces; ++i) {
        const double lo = a + (d - a) * i / pieces, hi = a + (d - a) * (i + 1) / pieces;
        re += gk([&](double s) { return smooth_window(s, a, b, c, d) * std::cos(x * s / h); }, lo, hi);
        im += gk([&](double s) { return smooth_window(s, a, b, c, d) * std::sin(x * s / h); }, lo, hi);
    }
    return {re, im};
}

// centered at xi = (1, 0), where the model symbol is characteristic
MomentumAmplitude separable_window()
{
    MomentumAmplitude A;
    A.value = [](const Vec& xi) {
        return cplx(smooth_window(xi(0), 0.5, 0.9, 1.1, 1.5) * smooth_window(xi(1), -0.5, -0.1, 0.1, 0.5));
    };
    A.lo = v2(0.5, -0.5);
    A.hi = v2(1.5, 0.5);
    return A;
}

}  // namespace

TEST_CASE("u0 at the origin and in the far field")
{
    const auto R = standard(0.1);
    const double gk1 = R.g.value(1.0);
    CHECK(gk1 == 1.0);
    CHECK(rel(helmholtz_u0(R, v2(0, 0)), 1i * pi * pi * gk1 / std::pow(2 * pi * 0.1, 2)) < 1e-12);

    // |x| k / h = 1000
    const auto far = standard(0.001);
    const double dist = 1.0;
    const cplx asym = 1i * pi * gk1 / std::pow(2 * pi * far.h, 2) * std::sqrt(2 * pi * far.h / dist) *
                      std::exp(1i * (dist / far.h - pi / 4));
    // the half-circle ends at cos = 0 contribute 2 / sqrt(2 pi rho) relative to the critical point
    const double u0_err = rel(helmholtz_u0(far, v2(0.6, 0.8)), asym);
    CHECK(u0_err == doctest::Approx(2 / std::sqrt(2 * pi * 1000)).epsilon(0.05));
    const CriticalPoint top{1.0, Mat::Constant(1, 1, -1.0), cplx(1.0)};
    const std::array<EndpointTerm, 2> ends{EndpointTerm{0.0, 1.0, cplx(1.0), -1}, EndpointTerm{0.0, -1.0, cplx(1.0), 1}};
    const cplx corrected = 1i * pi * gk1 / std::pow(2 * pi * far.h, 2) * stationary_phase(std::span(&top, 1), far.h, ends);
    CHECK(rel(helmholtz_u0(far, v2(0.6, 0.8)), corrected) < 1e-3);

    // g vanishes at k
    const HelmholtzReference off{1.0, bump_profile(1.2, 1.4, 1.6, 1.8), 0.1};
    CHECK(helmholtz_u0(off, v2(0.5, 0)) == 0.0);
}

TEST_CASE("u1 normalization and direct quadrature")
{
    const auto R = standard(0.1);
    // x = 0: J0 = 1
    const double mass = gk([&](double r) { return R.g.value(r) / (r + 1.0); }, 0.4, 1.6);
    CHECK(rel(helmholtz_u1(R, v2(0, 0)), 2 * pi * mass / std::pow(2 * pi * 0.1, 2)) < 1e-10);

    // the defining double integral over (theta, r)
    const Vec x = v2(0.3, -0.4);
    OscIntegrand I;
    I.dim = 2;
    I.lo = {0, 0.4, 0};
    I.hi = {2 * pi, 1.6, 0};
    I.phase = [&](std::span<const double> q) { return x.norm() * q[1] * std::cos(q[0]); };
    I.amplitude = [&](std::span<const double> q) { return cplx(R.g.value(q[1]) / (q[1] + 1.0)); };
    I.h = 0.1;
    const cplx direct = osc_quad(I, 1e-9).value / std::pow(2 * pi * 0.1, 2);
    CHECK(rel(helmholtz_u1(R, x), direct) < 1e-4);
}

TEST_CASE("u1 is O(h^inf) away from the origin")
{
    std::vector<double> mags;
    // at |x| = 1 the (2 pi h)^-2 prefactor still dominates over these h; rho = |x| / h from 20 to 80 is past it
    for (double h : {0.1, 0.05, 0.025}) mags.push_back(std::abs(helmholtz_u1(standard(h), v2(2, 0))));
    const double slope = std::log(mags[0] / mags[2]) / std::log(4.0);
    CHECK(slope >= 3.0);
    // u0 keeps the h^-3/2 growth
    std::vector<double> waves;
    for (double h : {0.1, 0.05, 0.025}) waves.push_back(std::abs(helmholtz_u0(standard(h), v2(1, 0))));
    for (int i = 0; i < 2; ++i) {
        const double ratio = waves[static_cast<std::size_t>(i) + 1] / waves[static_cast<std::size_t>(i)];
        CHECK(ratio == doctest::Approx(std::pow(2.0, 1.5)).epsilon(0.2));
    }
}

TEST_CASE("source term")
{
    const auto R = standard(0.1);
    const double direct = gk([&](double r) { return R.g.value(r) * r; }, 0.4, 1.6) / (2 * pi * 0.01);
    CHECK(rel(helmholtz_source(R, v2(0, 0)), direct) < 1e-10);
}

TEST_CASE("resolvent ladder converges to the principal value split")
{
    for (double h : {0.1, 0.05}) {
        const auto R = standard(h);
        for (const Vec& x : {v2(0.6, 0), v2(0.7, 0.7), v2(-1.2, 1.1)}) {
            const ResolventResult r = resolvent_direct(R, x);
            const cplx split = helmholtz_u0_exact(R, x) + helmholtz_u1(R, x);
            CHECK(rel(r.value, split) < 1e-5);
            CHECK(r.error < 1e-3 * std::abs(r.value));
        }
    }
    // the coarse ladder stays within 1e-3
    const auto R = standard(0.1);
    ResolventOptions coarse;
    coarse.ladder = {1e-1, 3e-2, 1e-2};
    const cplx a = resolvent_direct(R, v2(1, 0), coarse).value;
    CHECK(rel(a, resolvent_direct(R, v2(1, 0)).value) < 1e-3);

    ResolventOptions bad;
    bad.ladder = {0.5, 0.1};
    CHECK_THROWS_AS(resolvent_direct(R, v2(1, 0), bad), ConfigError);
    bad.ladder = {1e-1, 9e-2};
    bad.max_relative_error = 1e-12;
    CHECK_THROWS_AS(resolvent_direct(R, v2(1, 0), bad), NumericError);
}

TEST_CASE("elliptic resolvent needs no regularization")
{
    const auto R = standard(0.1);
    const Vec x = v2(0.5, 0.2);
    const double rho = x.norm() / 0.1;
    const double hankel = gk([&](double r) { return R.g.value(r) * r / (r * r + 1.0) * std::cyl_bessel_j(0.0, rho * r); }, 0.4, 1.6);
    CHECK(rel(resolvent_at(R.g, 0.1, cplx(-1.0, 0.0), x), hankel / (2 * pi * 0.01)) < 1e-10);
}

TEST_CASE("extrapolation is exact on polynomials")
{
    const std::vector<double> e{0.4, 0.2, 0.1};
    std::vector<cplx> v;
    for (double s : e) v.push_back(cplx(2.0, -1.0) + 3.0 * s - cplx(0, 5) * s * s);
    CHECK(std::abs(extrapolate_to_zero(e, v) - cplx(2.0, -1.0)) < 1e-13);
}

TEST_CASE("smoothing preserves the profile mass")
{
    const auto g = bump_profile(0.4, 0.8, 1.2, 1.6);
    const auto s = smoothed_profile(g, 2.0, 0.1);
    const double m0 = gk([&](double r) { return g.value(r) * r; }, 0.0, g.support);
    const double m1 = gk([&](double r) { return s.value(r) * r; }, 0.0, s.support);
    CHECK(m1 == doctest::Approx(m0).epsilon(1e-8));
    // kernel width h / s = 0.05 barely touches the plateau center
    CHECK(s.value(1.0) == doctest::Approx(1.0).epsilon(1e-3));
    CHECK(s.value(0.2) < 1e-6);
}

TEST_CASE("model solution matches the time integral of the source")
{
    const auto A = separable_window();
    const double h = 0.1, T = 4.0;
    const Vec x = v2(0.2, 0.7);
    const ModelSolution m = model_dxn_solution(A, T, x, h);

    const cplx pref = star_prefactor(2, h);
    const cplx f = pref * window_transform(0.5, 0.9, 1.1, 1.5, x(0), h) * window_transform(-0.5, -0.1, 0.1, 0.5, x(1), h);
    CHECK(rel(m.source, f) < 1e-9);

    // u = (i/h) int chi_T(t) f(x', x_n - t) dt
    const cplx fx1 = window_transform(0.5, 0.9, 1.1, 1.5, x(0), h);
    double re = 0, im = 0;
    for (int i = 0; i < 200; ++i) {
        const double lo = T * i / 200, hi = T * (i + 1) / 200;
        auto part = [&](double t) { return plateau(t, T / 2, T) * window_transform(-0.5, -0.1, 0.1, 0.5, x(1) - t, h); };
        re += boost::math::quadrature::gauss_kronrod<double, 21>::integrate([&](double t) { return part(t).real(); }, lo, hi, 0);
        im += boost::math::quadrature::gauss_kronrod<double, 21>::integrate([&](double t) { return part(t).imag(); }, lo, hi, 0);
    }
    CHECK(rel(m.u, 1i / h * pref * fx1 * cplx(re, im)) < 1e-8);

    MomentumAmplitude zero = A;
    zero.value = [](const Vec&) { return cplx(0.0); };
    const ModelSolution z = model_dxn_solution(zero, T, x, h);
    CHECK(z.u == 0.0);
    CHECK(z.residual() == 0.0);
}

TEST_CASE("model residual is O(h^inf) below T/4")
{
    const auto A = separable_window();
    const double T = 8.0;
    std::vector<double> worst;
    for (double h : {0.1, 0.05, 0.025}) {
        double w = 0;
        for (double x1 : {-0.4, 0.0, 0.4})
            for (int j = 0; j <= 8; ++j) w = std::max(w, model_dxn_solution(A, T, v2(x1, T / 4 * j / 8), h).residual());
        worst.push_back(w);
    }
    CHECK(std::log(worst[0] / worst[2]) / std::log(4.0) >= 3.0);

    // the field lives on the half-line x' = 0, x_n > 0
    const double h = 0.05;
    const double on = std::abs(model_dxn_solution(A, T, v2(0, 1.5), h).u);
    CHECK(on > 50 * std::abs(model_dxn_solution(A, T, v2(1.0, 1.5), h).u));
    CHECK(on > 50 * std::abs(model_dxn_solution(A, T, v2(0, -1.5), h).u));
}
