#include "scg/oscint.hpp"

#include <boost/math/constants/constants.hpp>
#include <boost/math/quadrature/gauss.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>

namespace scg {

namespace {

constexpr double pi = boost::math::constants::pi<double>();
constexpr double euler_gamma = boost::math::constants::euler<double>();

struct KronrodRule {
    std::array<double, 15> x{};
    std::array<double, 15> wk{};
    std::array<double, 15> wg{};  // zero off the embedded Gauss nodes
};

const KronrodRule& kronrod15()
{
    static const KronrodRule rule = [] {
        using boost::math::quadrature::gauss;
        using boost::math::quadrature::gauss_kronrod;
        const auto ak = gauss_kronrod<double, 15>::abscissa();
        const auto wk = gauss_kronrod<double, 15>::weights();
        const auto wg = gauss<double, 7>::weights();
        KronrodRule r;
        r.x[7] = 0.0;
        r.wk[7] = wk[0];
        r.wg[7] = wg[0];
        for (int i = 1; i < 8; ++i) {
            r.x[7 + i] = ak[i];
            r.x[7 - i] = -ak[i];
            r.wk[7 + i] = r.wk[7 - i] = wk[i];
            const double g = (i % 2 == 0) ? wg[i / 2] : 0.0;
            r.wg[7 + i] = r.wg[7 - i] = g;
        }
        return r;
    }();
    return rule;
}

struct Cell {
    std::array<double, 3> lo{0, 0, 0};
    std::array<double, 3> hi{0, 0, 0};
    cplx kronrod;
    double error = 0;
    double l1 = 0;
    bool done = false;
};

void evaluate_cell(const OscIntegrand& I, Cell& c)
{
    const auto& r = kronrod15();
    const int d = I.dim;
    std::array<double, 3> mid{}, half{};
    for (int k = 0; k < d; ++k) {
        mid[k] = 0.5 * (c.lo[k] + c.hi[k]);
        half[k] = 0.5 * (c.hi[k] - c.lo[k]);
    }
    const int n1 = 15;
    const int n2 = d >= 2 ? 15 : 1;
    const int n3 = d >= 3 ? 15 : 1;
    cplx sk = 0, sg = 0;
    double sa = 0;
    std::array<double, 3> pt{};
    const double inv_h = 1.0 / I.h;
    for (int i = 0; i < n1; ++i) {
        pt[0] = mid[0] + half[0] * r.x[i];
        for (int j = 0; j < n2; ++j) {
            if (d >= 2) pt[1] = mid[1] + half[1] * r.x[j];
            const double wkj = d >= 2 ? r.wk[j] : 1.0, wgj = d >= 2 ? r.wg[j] : 1.0;
            cplx rk = 0, rg = 0;
            double ra = 0;
            for (int k = 0; k < n3; ++k) {
                if (d >= 3) pt[2] = mid[2] + half[2] * r.x[k];
                const std::span<const double> s(pt.data(), static_cast<std::size_t>(d));
                const cplx a = I.amplitude(s);
                if (a == cplx(0.0)) continue;
                const double ph = I.phase(s) * inv_h;
                const cplx v = a * cplx(std::cos(ph), std::sin(ph));
                const double wkk = d >= 3 ? r.wk[k] : 1.0, wgk = d >= 3 ? r.wg[k] : 1.0;
                rk += wkk * v;
                rg += wgk * v;
                ra += wkk * std::abs(a);
            }
            sk += r.wk[i] * wkj * rk;
            sg += r.wg[i] * wgj * rg;
            sa += r.wk[i] * wkj * ra;
        }
    }
    double vol = 1.0;
    for (int k = 0; k < d; ++k) vol *= half[k];
    c.kronrod = vol * sk;
    c.error = std::abs(vol * (sk - sg));
    c.l1 = vol * sa;
    c.done = true;
}

std::array<int, 3> initial_panels(const OscIntegrand& I, const OscOptions& opt)
{
    constexpr int m = 17;
    const int d = I.dim;
    std::array<int, 3> dims{1, 1, 1};
    for (int k = 0; k < d; ++k) dims[k] = m;
    std::vector<double> ph(static_cast<std::size_t>(dims[0] * dims[1] * dims[2]));
    std::array<double, 3> step{}, pt{};
    for (int k = 0; k < d; ++k) step[k] = (I.hi[k] - I.lo[k]) / (m - 1);
    auto idx = [&](int i, int j, int k) { return static_cast<std::size_t>((i * dims[1] + j) * dims[2] + k); };
    for (int i = 0; i < dims[0]; ++i)
        for (int j = 0; j < dims[1]; ++j)
            for (int k = 0; k < dims[2]; ++k) {
                pt = {I.lo[0] + i * step[0], I.lo[1] + j * step[1], I.lo[2] + k * step[2]};
                ph[idx(i, j, k)] = I.phase(std::span<const double>(pt.data(), static_cast<std::size_t>(d)));
            }
    std::array<double, 3> grad{0, 0, 0};
    for (int i = 0; i < dims[0]; ++i)
        for (int j = 0; j < dims[1]; ++j)
            for (int k = 0; k < dims[2]; ++k) {
                if (i + 1 < dims[0]) grad[0] = std::max(grad[0], std::abs(ph[idx(i + 1, j, k)] - ph[idx(i, j, k)]) / step[0]);
                if (j + 1 < dims[1]) grad[1] = std::max(grad[1], std::abs(ph[idx(i, j + 1, k)] - ph[idx(i, j, k)]) / step[1]);
                if (k + 1 < dims[2]) grad[2] = std::max(grad[2], std::abs(ph[idx(i, j, k + 1)] - ph[idx(i, j, k)]) / step[2]);
            }
    std::array<int, 3> panels{1, 1, 1};
    for (int k = 0; k < d; ++k) {
        const double osc = grad[k] * (I.hi[k] - I.lo[k]) / (2 * pi * I.h);
        const double need = std::ceil(osc * opt.nodes_per_oscillation / 15.0);
        panels[k] = std::max(opt.min_panels, static_cast<int>(std::min(need, 1e6)));
    }
    return panels;
}

}  // namespace

cplx star_prefactor(int n, double h)
{
    return std::polar(std::pow(2 * pi * h, -0.5 * n), pi * n / 4.0);
}

OscResult osc_quad(const OscIntegrand& I, double tol, const OscOptions& opt)
{
    if (I.dim < 1 || I.dim > 3) throw NumericError("osc_quad supports dimension 1 to 3");
    if (!(I.h > 0)) throw NumericError("osc_quad needs h > 0");
    const int d = I.dim;
    const std::size_t per_cell = static_cast<std::size_t>(std::pow(15, d));
    const auto panels = initial_panels(I, opt);
    std::size_t ncell = 1;
    for (int k = 0; k < d; ++k) ncell *= static_cast<std::size_t>(panels[k]);
    if (ncell * per_cell > opt.max_nodes)
        throw BudgetExceeded("osc_quad: oscillation count exceeds the node budget", std::numeric_limits<double>::infinity());

    std::vector<Cell> cells;
    cells.reserve(ncell);
    std::array<int, 3> idx{0, 0, 0};
    for (std::size_t c = 0; c < ncell; ++c) {
        std::size_t rem = c;
        for (int k = d - 1; k >= 0; --k) {
            idx[k] = static_cast<int>(rem % static_cast<std::size_t>(panels[k]));
            rem /= static_cast<std::size_t>(panels[k]);
        }
        Cell cell;
        for (int k = 0; k < d; ++k) {
            const double w = (I.hi[k] - I.lo[k]) / panels[k];
            cell.lo[k] = I.lo[k] + idx[k] * w;
            cell.hi[k] = idx[k] + 1 == panels[k] ? I.hi[k] : I.lo[k] + (idx[k] + 1) * w;
        }
        evaluate_cell(I, cell);
        cells.push_back(cell);
    }
    std::size_t nodes = ncell * per_cell;

    for (;;) {
        cplx total = 0;
        double err = 0, l1 = 0;
        for (const auto& c : cells) {
            total += c.kronrod;
            err += c.error;
            l1 += c.l1;
        }
        // rounding floor: nothing below ~1e-14 of the absolute mass is resolvable
        const double target = std::max({tol * std::abs(total), opt.abs_tol, 1e-14 * l1});
        if (err <= target) return {total, err, nodes};
        // split the cells carrying more than their share of the allowed error
        const double share = target / static_cast<double>(cells.size());
        std::vector<Cell> next;
        next.reserve(cells.size() * 2);
        std::size_t added = 0;
        for (const auto& c : cells) {
            if (c.error <= share) {
                next.push_back(c);
                continue;
            }
            const int nchild = 1 << d;
            for (int b = 0; b < nchild; ++b) {
                Cell child;
                for (int k = 0; k < d; ++k) {
                    const double mid = 0.5 * (c.lo[k] + c.hi[k]);
                    const bool upper = (b >> k) & 1;
                    child.lo[k] = upper ? mid : c.lo[k];
                    child.hi[k] = upper ? c.hi[k] : mid;
                }
                next.push_back(child);
                ++added;
            }
        }
        if (nodes + added * per_cell > opt.max_nodes)
        {
            char msg[96];
            std::snprintf(msg, sizeof msg, "osc_quad: node budget exhausted, error estimate %.3e", err);
            throw BudgetExceeded(msg, err);
        }
        for (auto& c : next) {
            if (!c.done) evaluate_cell(I, c);
        }
        nodes += added * per_cell;
        cells = std::move(next);
    }
}

int signature(const Mat& symmetric, double rel_zero)
{
    Eigen::SelfAdjointEigenSolver<Mat> es(symmetric, Eigen::EigenvaluesOnly);
    const Vec ev = es.eigenvalues();
    const double scale = ev.cwiseAbs().maxCoeff();
    int s = 0;
    for (long i = 0; i < ev.size(); ++i) {
        if (ev(i) > rel_zero * scale) ++s;
        else if (ev(i) < -rel_zero * scale) --s;
    }
    return s;
}

cplx stationary_phase(std::span<const CriticalPoint> points, double h, std::span<const EndpointTerm> endpoints)
{
    cplx sum = 0;
    for (const auto& cp : points) {
        const long d = cp.hessian.rows();
        Eigen::JacobiSVD<Mat> svd(cp.hessian);
        const Vec sv = svd.singularValues();
        if (sv.size() > 0 && (sv(sv.size() - 1) == 0.0 || sv(0) / sv(sv.size() - 1) > 1e8))
            throw CausticError("stationary_phase: near-degenerate hessian (caustic)");
        const double det = std::abs(cp.hessian.determinant());
        const int sg = signature(cp.hessian);
        const double mag = std::pow(2 * pi * h, 0.5 * static_cast<double>(d)) / std::sqrt(det);
        sum += mag * std::polar(1.0, pi * sg / 4.0) * cp.amplitude * std::polar(1.0, cp.phase / h);
    }
    for (const auto& e : endpoints) {
        if (e.slope == 0.0) throw CausticError("stationary_phase: endpoint is itself stationary");
        sum += static_cast<double>(e.side) * cplx(0.0, -h) * e.amplitude * std::polar(1.0, e.phase / h) / e.slope;
    }
    return sum;
}

namespace {

// Power series about 0, used for x <= 12.
double j0_series(double x)
{
    const double q = 0.25 * x * x;
    double term = 1.0, sum = 1.0;
    for (int k = 1; k < 200; ++k) {
        term *= -q / (static_cast<double>(k) * k);
        sum += term;
        if (std::abs(term) < 1e-18 * std::max(1.0, std::abs(sum))) break;
    }
    return sum;
}

double j1_series(double x)
{
    const double q = 0.25 * x * x;
    double term = 0.5 * x, sum = term;
    for (int k = 1; k < 200; ++k) {
        term *= -q / (static_cast<double>(k) * (k + 1));
        sum += term;
        if (std::abs(term) < 1e-18 * std::max(1.0, std::abs(sum))) break;
    }
    return sum;
}

double y0_series(double x)
{
    const double q = 0.25 * x * x;
    double term = 1.0, harmonic = 0.0, sum = 0.0;
    for (int k = 1; k < 200; ++k) {
        term *= -q / (static_cast<double>(k) * k);
        harmonic += 1.0 / k;
        const double add = -term * harmonic;
        sum += add;
        if (std::abs(add) < 1e-18 * std::max(1.0, std::abs(sum))) break;
    }
    return (2.0 / pi) * ((std::log(0.5 * x) + euler_gamma) * j0_series(x) + sum);
}

double y1_series(double x)
{
    const double q = 0.25 * x * x;
    // psi(k+1) + psi(k+2) = -2 gamma + H_k + H_{k+1}
    double term = 0.5 * x, hk = 0.0, sum = term * (-2 * euler_gamma + 1.0);
    for (int k = 1; k < 200; ++k) {
        term *= -q / (static_cast<double>(k) * (k + 1));
        hk += 1.0 / k;
        const double add = term * (-2 * euler_gamma + 2 * hk + 1.0 / (k + 1));
        sum += add;
        if (std::abs(add) < 1e-18 * std::max(1.0, std::abs(sum))) break;
    }
    return (2.0 / pi) * j1_series(x) * std::log(0.5 * x) - 2.0 / (pi * x) - sum / pi;
}

// Hankel large-argument expansion, truncated at the smallest term.
void asymptotic(int order, double x, double& j, double& y)
{
    const double mu = 4.0 * order * order;
    double p = 1.0, q = 0.0;
    double a = 1.0, last = std::numeric_limits<double>::infinity();
    for (int k = 1; k < 200; ++k) {
        a *= (mu - (2.0 * k - 1) * (2.0 * k - 1)) / (8.0 * k * x);
        if (std::abs(a) >= last || std::abs(a) < 1e-18) break;
        last = std::abs(a);
        // a_k / x^k alternates between the P and Q series with period 4 in sign
        switch (k % 4) {
        case 1: q += a; break;
        case 2: p -= a; break;
        case 3: q -= a; break;
        default: p += a; break;
        }
    }
    const double chi = x - (0.5 * order + 0.25) * pi;
    const double amp = std::sqrt(2.0 / (pi * x));
    j = amp * (p * std::cos(chi) - q * std::sin(chi));
    y = amp * (p * std::sin(chi) + q * std::cos(chi));
}

constexpr double series_limit = 12.0;

}  // namespace

double bessel_j0(double x)
{
    x = std::abs(x);
    if (x <= series_limit) return j0_series(x);
    double j, y;
    asymptotic(0, x, j, y);
    return j;
}

double bessel_j1(double x)
{
    const double s = x < 0 ? -1.0 : 1.0;
    x = std::abs(x);
    if (x <= series_limit) return s * j1_series(x);
    double j, y;
    asymptotic(1, x, j, y);
    return s * j;
}

double bessel_y0(double x)
{
    if (!(x > 0)) throw NumericError("Y0 is singular at x <= 0");
    if (x <= series_limit) return y0_series(x);
    double j, y;
    asymptotic(0, x, j, y);
    return y;
}

double bessel_y1(double x)
{
    if (!(x > 0)) throw NumericError("Y1 is singular at x <= 0");
    if (x <= series_limit) return y1_series(x);
    double j, y;
    asymptotic(1, x, j, y);
    return y;
}

cplx hankel1_h0(double x)
{
    if (!(x > 0)) throw NumericError("H0(1) has a logarithmic singularity at 0");
    if (x <= series_limit) return {j0_series(x), y0_series(x)};
    double j, y;
    asymptotic(0, x, j, y);
    return {j, y};
}

HankelResult hankel0_transform(const std::function<double(double)>& f, double rho, const HankelOptions& opt)
{
    if (!(opt.r_max > 0)) throw NumericError("hankel0_transform needs a positive r_max");
    std::vector<double> cuts{0.0, opt.r_max};
    for (double b : opt.breakpoints)
        if (b > 0 && b < opt.r_max) cuts.push_back(b);
    std::sort(cuts.begin(), cuts.end());
    const double max_len = rho > 0 ? 0.5 * pi / rho : opt.r_max;
    HankelResult res;
    auto integrand = [&](double r) { return f(r) * bessel_j0(rho * r) * r; };
    for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
        const double a = cuts[i], b = cuts[i + 1];
        if (b <= a) continue;
        const int pieces = std::max(1, static_cast<int>(std::ceil((b - a) / max_len)));
        for (int k = 0; k < pieces; ++k) {
            const double lo = a + (b - a) * k / pieces, hi = k + 1 == pieces ? b : a + (b - a) * (k + 1) / pieces;
            double err = 0;
            res.value += boost::math::quadrature::gauss_kronrod<double, 31>::integrate(integrand, lo, hi, 12, opt.tol, &err);
            res.error += err;
        }
    }
    return res;
}

QuadRule gauss_panels(std::vector<double> cuts, double max_len)
{
    static const auto rule = [] {
        using boost::math::quadrature::gauss;
        const auto a = gauss<double, 20>::abscissa();
        const auto w = gauss<double, 20>::weights();
        std::array<std::pair<double, double>, 20> r{};
        for (std::size_t i = 0; i < 10; ++i) {
            r[9 - i] = {-a[i], w[i]};
            r[10 + i] = {a[i], w[i]};
        }
        return r;
    }();
    std::sort(cuts.begin(), cuts.end());
    cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());
    QuadRule q;
    for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
        const double a = cuts[i], b = cuts[i + 1];
        const int pieces = max_len > 0 ? std::max(1, static_cast<int>(std::ceil((b - a) / max_len))) : 1;
        for (int k = 0; k < pieces; ++k) {
            const double lo = a + (b - a) * k / pieces, hi = k + 1 == pieces ? b : a + (b - a) * (k + 1) / pieces;
            const double mid = 0.5 * (lo + hi), half = 0.5 * (hi - lo);
            for (const auto& [x, w] : rule) {
                q.x.push_back(mid + half * x);
                q.w.push_back(half * w);
            }
        }
    }
    return q;
}

QuadRule graded_panels(double lo, double hi, double center, double delta, double max_len, std::vector<double> cuts)
{
    std::erase_if(cuts, [&](double c) { return c <= lo || c >= hi; });
    cuts.push_back(lo);
    cuts.push_back(hi);
    if (center > lo && center < hi) {
        cuts.push_back(center);
        const double d0 = std::max(delta, 1e-12 * (hi - lo));
        for (double d = d0; center - d > lo; d *= 2) cuts.push_back(center - d);
        for (double d = d0; center + d < hi; d *= 2) cuts.push_back(center + d);
    }
    return gauss_panels(std::move(cuts), max_len);
}

}  // namespace scg
