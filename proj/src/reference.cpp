#include "scg/reference.hpp"

#include "scg/oscint.hpp"
#include "scg/smooth.hpp"

#include <boost/math/special_functions/bessel.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <string>

namespace scg {

using std::numbers::pi;
using namespace std::complex_literals;

RadialProfile bump_profile(double a, double b, double c, double d)
{
    if (!(0 <= a && a < b && b <= c && c < d)) throw ConfigError("bump profile needs 0 <= a < b <= c < d");
    return {[=](double r) { return smooth_window(r, a, b, c, d); }, d, {a, b, c}};
}

RadialProfile gaussian_profile(double width)
{
    if (!(width > 0)) throw ConfigError("gaussian profile needs a positive width");
    return {[width](double r) { return std::exp(-0.5 * r * r / (width * width)); }, 9.0 * width, {}};
}

namespace {

// e^{-z} I0(z)
double scaled_i0(double z)
{
    if (z < 600) return boost::math::cyl_bessel_i(0, z) * std::exp(-z);
    return (1 + 1 / (8 * z) + 9 / (128 * z * z)) / std::sqrt(2 * pi * z);
}

double profile_mass(const RadialProfile& g)
{
    std::vector<double> cuts = g.breakpoints;
    cuts.push_back(0);
    cuts.push_back(g.support);
    const QuadRule q = gauss_panels(cuts, 0.05);
    double m = 0;
    for (std::size_t i = 0; i < q.size(); ++i) m += q.w[i] * g.value(q.x[i]) * q.x[i];
    return m;
}

void require_profile(const RadialProfile& g)
{
    if (!g.value || !(g.support > 0)) throw ConfigError("radial profile needs a value and a positive support");
    for (int i = 0; i <= 16; ++i) {
        const double v = g.value(g.support * i / 16.0);
        if (!std::isfinite(v)) throw ConfigError("radial profile is not finite on its support");
    }
}

}  // namespace

RadialProfile smoothed_profile(const RadialProfile& g, double s, double h)
{
    require_profile(g);
    if (!(s > 0) || !(h > 0)) throw ConfigError("smoothing needs s > 0 and h > 0");
    const double a = s * s / (h * h);
    const double width = h / s;
    std::vector<double> cuts = g.breakpoints;
    cuts.push_back(0);
    cuts.push_back(g.support);
    const QuadRule q = gauss_panels(cuts, std::min(0.05, 0.5 * width));
    std::vector<double> gw(q.size());
    for (std::size_t i = 0; i < q.size(); ++i) gw[i] = q.w[i] * g.value(q.x[i]) * q.x[i];
    auto conv = [a, q, gw](double r) {
        double v = 0;
        for (std::size_t i = 0; i < q.size(); ++i) {
            const double d = r - q.x[i];
            v += gw[i] * std::exp(-0.5 * a * d * d) * scaled_i0(a * r * q.x[i]);
        }
        return a * v;
    };
    RadialProfile out{conv, g.support + 12 * width, {}};
    const double scale = profile_mass(g) / profile_mass(out);
    out.value = [conv, scale](double r) { return scale * conv(r); };
    return out;
}

cplx helmholtz_source(const HelmholtzReference& R, const Vec& x)
{
    require_profile(R.g);
    const HankelResult t = hankel0_transform(R.g.value, x.norm() / R.h, {R.g.support, R.g.breakpoints, 1e-12});
    return t.value / (2 * pi * R.h * R.h);
}

cplx helmholtz_u0(const HelmholtzReference& R, const Vec& x, double tol)
{
    require_profile(R.g);
    const double scale = x.norm() * R.k;
    OscIntegrand I;
    I.dim = 1;
    I.lo = {-pi / 2, 0, 0};
    I.hi = {pi / 2, 0, 0};
    I.phase = [scale](std::span<const double> th) { return scale * std::cos(th[0]); };
    I.amplitude = [](std::span<const double>) { return cplx(1.0); };
    I.h = R.h;
    const OscResult q = osc_quad(I, tol);
    return 1i * pi * R.g.value(R.k) / std::pow(2 * pi * R.h, 2) * q.value;
}

cplx helmholtz_u0_exact(const HelmholtzReference& R, const Vec& x)
{
    require_profile(R.g);
    const double rho = x.norm() / R.h, k = R.k, M = R.g.support;
    auto f = [&](double r) { return bessel_j0(rho * r) * R.g.value(r) / (r + k); };
    std::vector<double> cuts = R.g.breakpoints;
    cuts.insert(cuts.end(), {0.0, M});
    if (k < M) cuts.push_back(k);
    const QuadRule q = gauss_panels(cuts, std::min(0.05, rho > 0 ? 6 / rho : 0.05));
    double pv = 0;
    if (k < M) {
        const double fk = f(k);
        for (std::size_t i = 0; i < q.size(); ++i) pv += q.w[i] * (f(q.x[i]) - fk) / (q.x[i] - k);
        pv += fk * std::log((M - k) / k);
    } else {
        for (std::size_t i = 0; i < q.size(); ++i) pv += q.w[i] * f(q.x[i]) / (q.x[i] - k);
    }
    const double norm = std::pow(2 * pi * R.h, -2);
    return norm * (1i * pi * pi * R.g.value(k) * bessel_j0(k * rho) + 2 * pi * k * pv);
}

cplx helmholtz_u1(const HelmholtzReference& R, const Vec& x)
{
    require_profile(R.g);
    const double k = R.k;
    auto tilde = [&](double r) { return R.g.value(r) / (r * (r + k)); };
    const HankelResult t = hankel0_transform(tilde, x.norm() / R.h, {R.g.support, R.g.breakpoints, 1e-12});
    return 2 * pi * t.value / std::pow(2 * pi * R.h, 2);
}

cplx resolvent_at(const RadialProfile& g, double h, cplx z, const Vec& x)
{
    require_profile(g);
    const double rho = x.norm() / h;
    const cplx pole = std::sqrt(z);
    const double max_len = std::min(0.05, rho > 0 ? 6 / rho : 0.05);
    const QuadRule q = graded_panels(0, g.support, pole.real(), std::max(std::abs(pole.imag()), 1e-10), max_len,
                                     g.breakpoints);
    // periodic trapezoid in the angle: exact up to exponentially small terms once N exceeds rho r_max
    const int nth = 2 * static_cast<int>(std::ceil((rho * g.support + 40) / 2));
    std::vector<double> cth(static_cast<std::size_t>(nth));
    for (int j = 0; j < nth; ++j) cth[static_cast<std::size_t>(j)] = std::cos(2 * pi * j / nth);
    cplx total = 0;
    for (std::size_t i = 0; i < q.size(); ++i) {
        const double r = q.x[i];
        const double gr = g.value(r);
        if (gr == 0) continue;
        cplx ang = 0;
        for (double c : cth) ang += std::polar(1.0, rho * r * c);
        ang *= 2 * pi / nth;
        total += q.w[i] * r * gr / (r * r - z) * ang;
    }
    return total / std::pow(2 * pi * h, 2);
}

cplx extrapolate_to_zero(std::span<const double> eps, std::span<const cplx> values)
{
    if (eps.size() != values.size() || eps.empty()) throw ConfigError("extrapolation needs matching, nonempty samples");
    std::vector<cplx> p(values.begin(), values.end());
    const std::size_t n = p.size();
    for (std::size_t m = 1; m < n; ++m)
        for (std::size_t i = 0; i + m < n; ++i) p[i] = (eps[i + m] * p[i] - eps[i] * p[i + 1]) / (eps[i + m] - eps[i]);
    return p[0];
}

ResolventResult resolvent_direct(const HelmholtzReference& R, const Vec& x, const ResolventOptions& opt)
{
    ResolventResult res;
    res.ladder = opt.ladder;
    if (res.ladder.empty()) {
        const double rho = x.norm() / R.h;
        const double base = rho > 0 ? std::clamp(0.03 * R.k / rho, 1e-4, 2.5e-2) : 2.5e-2;
        res.ladder = {4 * base, 2 * base, base};
    }
    if (res.ladder.size() < 2) throw ConfigError("the eps ladder needs at least two rungs");
    for (double e : res.ladder)
        if (!(e >= 1e-4 && e <= 1e-1)) throw ConfigError("eps ladder values must lie in [1e-4, 1e-1]");
    const double E = R.k * R.k;
    for (double e : res.ladder) res.samples.push_back(resolvent_at(R.g, R.h, cplx(E, e), x));
    res.value = extrapolate_to_zero(res.ladder, res.samples);
    const std::span<const double> tail_e(res.ladder.data() + 1, res.ladder.size() - 1);
    const std::span<const cplx> tail_v(res.samples.data() + 1, res.samples.size() - 1);
    res.error = std::abs(res.value - extrapolate_to_zero(tail_e, tail_v));
    if (!(res.error <= opt.max_relative_error * std::abs(res.value))) {
        std::string msg = "resolvent extrapolation did not settle:";
        char buf[96];
        for (std::size_t i = 0; i < res.ladder.size(); ++i) {
            std::snprintf(buf, sizeof buf, " eps=%.2e -> (%.6e, %.6e)", res.ladder[i], res.samples[i].real(),
                          res.samples[i].imag());
            msg += buf;
        }
        std::snprintf(buf, sizeof buf, "; estimate %.3e", res.error);
        throw NumericError(msg + buf);
    }
    return res;
}

namespace {

// int_0^T chi_T(t) e^{-i t w} dt with the flat half in closed form
cplx time_window_transform(double w, double T)
{
    const double half = T / 2;
    cplx flat = std::abs(w) * half < 1e-8 ? cplx(half) : (1.0 - std::polar(1.0, -w * half)) / (1i * w);
    const QuadRule q = gauss_panels({half, T}, std::min(half, std::abs(w) > 0 ? 12 / std::abs(w) : half));
    cplx tail = 0;
    for (std::size_t i = 0; i < q.size(); ++i) tail += q.w[i] * plateau(q.x[i], half, T) * std::polar(1.0, -w * q.x[i]);
    return flat + tail;
}

}  // namespace

ModelSolution model_dxn_solution(const MomentumAmplitude& A, double T, const Vec& x, double h)
{
    const long n = x.size();
    if (n < 1 || n > 3 || A.lo.size() != n || A.hi.size() != n) throw ConfigError("model solution: dimension mismatch");
    if (!(T > 0) || !(h > 0)) throw ConfigError("model solution needs T > 0 and h > 0");
    std::vector<QuadRule> axes;
    for (long d = 0; d < n; ++d) {
        const double rate = std::abs(x(d)) + (d == n - 1 ? T : 0.0);
        axes.push_back(gauss_panels({A.lo(d), A.hi(d)}, std::min(0.1, rate > 0 ? 12 * h / rate : 0.1)));
    }
    const QuadRule& last = axes.back();
    std::vector<cplx> K(last.size());
    for (std::size_t i = 0; i < last.size(); ++i) K[i] = time_window_transform(last.x[i] / h, T);

    std::size_t total = 1;
    for (const auto& a : axes) total *= a.size();
    cplx u = 0, du = 0, f = 0;
    Vec xi(n);
    for (std::size_t flat = 0; flat < total; ++flat) {
        std::size_t rem = flat;
        double w = 1;
        std::size_t ilast = 0;
        for (long d = n - 1; d >= 0; --d) {
            const QuadRule& a = axes[static_cast<std::size_t>(d)];
            const std::size_t id = rem % a.size();
            rem /= a.size();
            xi(d) = a.x[id];
            w *= a.w[id];
            if (d == n - 1) ilast = id;
        }
        const cplx amp = A.value(xi);
        if (amp == 0.0) continue;
        const cplx term = w * amp * std::polar(1.0, x.dot(xi) / h);
        f += term;
        u += term * K[ilast];
        du += term * K[ilast] * xi(n - 1);
    }
    const cplx pref = star_prefactor(static_cast<int>(n), h);
    return {pref * (1i / h) * u, pref * (1i / h) * du, pref * f};
}

}  // namespace scg
