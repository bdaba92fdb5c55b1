#include "scg/green.hpp"

#include "scg/oscint.hpp"
#include "scg/parallel.hpp"
#include "scg/smooth.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <numbers>

namespace scg {

using std::numbers::pi;
using namespace std::complex_literals;

double CutoffSpec::tilde_chi0(double s) const { return plateau(s, tau_width / 2, tau_width); }
double CutoffSpec::chi0(double t) const { return plateau(t, t_width / 2, t_width); }
double CutoffSpec::chi_T(double t) const { return plateau(t, horizon / 2, horizon); }

void CutoffSpec::validate() const
{
    if (!(tau_width > 0)) throw ConfigError("cutoffs: tau width must be positive");
    if (!(t_width > 0) || !(horizon > 0)) throw ConfigError("cutoffs: t width and horizon must be positive");
    if (!(t_width < horizon / 4)) throw ConfigError("cutoffs: need t width < horizon / 4");
}

cplx SourceSpec::weight(double h) const
{
    if (normalization == Normalization::star) return 1.0;
    const int n = lagrangian.dim();
    return std::polar(std::pow(2 * pi * h, -0.5 * n), -pi * n / 4);
}

SourceSpec radial_point_source(const Vec& x0, const RadialProfile& g)
{
    if (!g.value || !(g.support > 0)) throw ConfigError("point source needs a radial profile with positive support");
    SourceSpec s;
    s.lagrangian = SourceLagrangian::vertical_fiber(x0);
    auto value = g.value;
    const double support = g.support;
    s.amplitude = [value, support](const Vec& eta) {
        const double r = eta.norm();
        return cplx(r < support ? value(r) : 0.0);
    };
    s.window_lo = Vec::Constant(x0.size(), -support);
    s.window_hi = Vec::Constant(x0.size(), support);
    s.normalization = SourceSpec::Normalization::fourier;
    return s;
}

namespace {

std::atomic<std::uint64_t> next_setup_id{1};

// Tensor grid of m nodes per axis over the amplitude window.
template <class F>
void for_window_nodes(const SourceSpec& s, int m, F&& fn)
{
    const long n = s.window_lo.size();
    std::size_t total = 1;
    for (long d = 0; d < n; ++d) total *= static_cast<std::size_t>(m);
    Vec eta(n);
    for (std::size_t flat = 0; flat < total; ++flat) {
        std::size_t rem = flat;
        for (long d = n - 1; d >= 0; --d) {
            const auto i = static_cast<double>(rem % static_cast<std::size_t>(m));
            rem /= static_cast<std::size_t>(m);
            eta(d) = s.window_lo(d) + (s.window_hi(d) - s.window_lo(d)) * i / (m - 1);
        }
        fn(eta);
    }
}

void check_source(const SourceSpec& s, const Hamiltonian& H)
{
    const int n = H.dim();
    if (s.lagrangian.dim() != n) throw ConfigError("source and symbol dimensions differ");
    if (!s.lagrangian.momentum_represented())
        throw ConfigError("green assembly needs a momentum-represented source (vertical fiber or tilted graph)");
    if (!s.amplitude) throw ConfigError("source amplitude is missing");
    if (s.window_lo.size() != n || s.window_hi.size() != n) throw ConfigError("amplitude window has the wrong dimension");
    for (int d = 0; d < n; ++d)
        if (!(s.window_lo(d) < s.window_hi(d))) throw ConfigError("amplitude window is empty");
}

OscOptions scaled_options(const GreenSetup& G, double h, double factor = 1.0)
{
    OscOptions o;
    o.abs_tol = G.options().quad_tol * std::abs(G.source().weight(h)) * G.amplitude_mass() * factor;
    return o;
}

// int over the rule of w(t) e^{-i t (rate / h + theta_rate)}
template <class W>
cplx time_integral(const QuadRule& q, W&& w, double rate, double theta_rate, double h)
{
    cplx acc = 0;
    const double omega = rate / h + theta_rate;
    for (std::size_t i = 0; i < q.size(); ++i) {
        const double wt = w(q.x[i]);
        if (wt != 0) acc += q.w[i] * wt * std::polar(1.0, -omega * q.x[i]);
    }
    return acc;
}

double panel_length(double span, double rate, double h)
{
    const double r = std::abs(rate);
    return r > 0 ? std::min(span, 12 * h / r) : span;
}

struct StripNode {
    bool inside = false;
    double s = 0, tau = 0;
    Vec psi, eta;
};

StripNode strip_node(const GreenSetup& G, std::span<const double> q)
{
    StripNode nd;
    const int k = G.hamiltonian().dim() - 1;
    nd.s = q[0];
    nd.psi.resize(k);
    for (int j = 0; j < k; ++j) nd.psi(j) = q[static_cast<std::size_t>(j) + 1];
    const auto root = G.level_tau(nd.psi);
    if (!root) return nd;
    nd.tau = *root + nd.s;
    const SourceLagrangian& L = G.source().lagrangian;
    if (L.chart() == ChartKind::polar && nd.tau <= 0) return nd;
    nd.eta = L.momentum(nd.tau, nd.psi);
    nd.inside = true;
    return nd;
}

// Shared (s, psi) integral: int chi~0(s) A(eta) D(tau, psi) (i/h) K(x, eta) e^{i phase(x, eta) / h}.
template <class Kernel>
cplx strip_integral(const GreenSetup& G, const Vec& x, double h, Kernel&& kernel, double scale)
{
    if (G.elliptic()) return 0.0;
    const SourceSpec& src = G.source();
    const SourceLagrangian& L = src.lagrangian;
    const int n = G.hamiltonian().dim();
    OscIntegrand I;
    I.dim = n;
    G.strip_box(I.lo, I.hi);
    I.h = h;
    I.amplitude = [&](std::span<const double> q) -> cplx {
        const StripNode nd = strip_node(G, q);
        if (!nd.inside) return 0.0;
        const double cut = G.cutoffs().tilde_chi0(nd.s);
        if (cut == 0) return 0.0;
        const cplx a = src.amplitude(nd.eta);
        if (a == 0.0) return 0.0;
        return cut * a * L.momentum_density(nd.tau, nd.psi) * kernel(x, nd.eta);
    };
    I.phase = [&](std::span<const double> q) {
        const StripNode nd = strip_node(G, q);
        return nd.inside ? L.generating_phase(x, nd.eta) : 0.0;
    };
    const OscResult r = osc_quad(I, G.options().quad_tol, scaled_options(G, h, scale));
    return src.weight(h) * (1i / h) * star_prefactor(n, h) * r.value;
}

}  // namespace

GreenSetup::GreenSetup(SourceSpec source, Hamiltonian H, CutoffSpec cut, GreenOptions opt)
    : src_(std::move(source)), H_(std::move(H)), cut_(cut), opt_(std::move(opt)), id_(next_setup_id++)
{
    cut_.validate();
    check_source(src_, H_);
    if (!H_.x_independent() && cut_.t_width > 0.1)
        throw ConfigError("cutoffs: the transient window of an x-dependent symbol must lie within t <= 0.1");
    if (!(opt_.quad_tol > 0) || !(opt_.boundary_gap > 0)) throw ConfigError("green options: tolerances must be positive");

    const int m = 24;
    double amax = 0, vol = 1;
    for (int d = 0; d < H_.dim(); ++d) vol *= src_.window_hi(d) - src_.window_lo(d);
    for_window_nodes(src_, m, [&](const Vec& eta) { amax = std::max(amax, std::abs(src_.amplitude(eta))); });
    mass_ = amax * vol;

    try {
        level_.emplace(intersect_level(src_.lagrangian, H_, H_.energy(), opt_.level));
    } catch (const HypothesisError&) {
        // No level root over the chart: elliptic only if H0 - E keeps one sign on the support.
        int sign = 0;
        bool mixed = false;
        for_window_nodes(src_, m, [&](const Vec& eta) {
            if (src_.amplitude(eta) == 0.0) return;
            const double gap = H_.h0(src_.lagrangian.base_of(eta), eta) - H_.energy();
            const int sg = gap > opt_.boundary_gap ? 1 : gap < -opt_.boundary_gap ? -1 : 0;
            if (sg == 0 || (sign != 0 && sg != sign)) mixed = true;
            if (sign == 0) sign = sg;
        });
        if (mixed) throw;
        return;
    }
    flow_.emplace(flow_out(*level_, cut_.horizon, opt_.flow));
    degenerate_ = std::any_of(flow_->rays().begin(), flow_->rays().end(),
                              [](const Ray& r) { return r.degenerate_projection(); });
}

const LevelIntersection& GreenSetup::level() const
{
    if (!level_) throw ConfigError("elliptic setup has no level intersection");
    return *level_;
}

const FlowOut& GreenSetup::flow() const
{
    if (!flow_) throw ConfigError("elliptic setup has no flow-out");
    return *flow_;
}

std::optional<double> GreenSetup::level_tau(const Vec& psi) const
{
    if (!level_) return std::nullopt;
    struct Memo {
        std::uint64_t owner = 0;
        Vec psi;
        std::optional<double> tau;
    };
    thread_local Memo memo;
    if (memo.owner == id_ && memo.psi.size() == psi.size() && memo.psi == psi) return memo.tau;
    std::optional<double> tau;
    try {
        tau = level_->tau_at(psi);
    } catch (const HypothesisError&) {
    }
    memo.owner = id_;
    memo.psi = psi;
    memo.tau = tau;
    return tau;
}

double GreenSetup::level_offset(const Vec& eta) const
{
    double tau = 0;
    Vec psi;
    src_.lagrangian.chart_coordinates(eta, tau, psi);
    const auto root = level_tau(psi);
    if (!root) return std::numeric_limits<double>::infinity();
    return tau - *root;
}

int GreenSetup::source_signature(const Vec& eta) const
{
    const int n = H_.dim();
    if (n == 1) return 0;
    const SymbolJet j = H_.jet(src_.lagrangian.base_of(eta), eta);
    const double gn = j.hp.norm();
    if (!(gn > 0)) throw CausticError("source signature: dH0/dp vanishes on the level set");
    // orthonormal basis of the complement of Hp
    const Eigen::HouseholderQR<Mat> qr(j.hp / gn);
    const Mat Q = qr.householderQ();
    const Mat B = Q.rightCols(n - 1);
    const Mat M = B.transpose() * src_.lagrangian.generating_hessian(eta) * B;
    const Mat N = B.transpose() * j.hpp * B;
    const double mn = M.norm(), nn = N.norm();
    if (mn == 0) return signature(-N);
    const double delta = nn > 0 ? 1e-6 * mn / nn : 0.0;
    return signature(M - delta * N);
}

void GreenSetup::strip_box(std::array<double, 3>& lo, std::array<double, 3>& hi) const
{
    const int n = H_.dim();
    lo = {0, 0, 0};
    hi = {0, 0, 0};
    lo[0] = -cut_.tau_width;
    hi[0] = cut_.tau_width;
    const SourceLagrangian& L = src_.lagrangian;
    if (L.chart() == ChartKind::polar) {
        if (n == 2) hi[1] = 2 * pi;
        if (n == 3) {
            hi[1] = pi;
            hi[2] = 2 * pi;
        }
        return;
    }
    const LevelOptions& lo_opt = level().options();
    for (int d = 0; d + 1 < n; ++d) {
        lo[static_cast<std::size_t>(d) + 1] = lo_opt.psi_lo(d);
        hi[static_cast<std::size_t>(d) + 1] = lo_opt.psi_hi(d);
    }
}

cplx source_value(const GreenSetup& G, const Vec& x, double h)
{
    const SourceSpec& src = G.source();
    const int n = G.hamiltonian().dim();
    OscIntegrand I;
    I.dim = n;
    for (int d = 0; d < n; ++d) {
        I.lo[static_cast<std::size_t>(d)] = src.window_lo(d);
        I.hi[static_cast<std::size_t>(d)] = src.window_hi(d);
    }
    I.h = h;
    Vec eta(n);
    I.amplitude = [&](std::span<const double> q) {
        for (int d = 0; d < n; ++d) eta(d) = q[static_cast<std::size_t>(d)];
        return src.amplitude(eta);
    };
    I.phase = [&](std::span<const double> q) {
        for (int d = 0; d < n; ++d) eta(d) = q[static_cast<std::size_t>(d)];
        return src.lagrangian.generating_phase(x, eta);
    };
    const OscResult r = osc_quad(I, G.options().quad_tol, scaled_options(G, h));
    return src.weight(h) * star_prefactor(n, h) * r.value;
}

cplx boundary_part(const GreenSetup& G, const Vec& x, double h)
{
    const SourceSpec& src = G.source();
    const Hamiltonian& H = G.hamiltonian();
    const int n = H.dim();
    OscIntegrand I;
    I.dim = n;
    for (int d = 0; d < n; ++d) {
        I.lo[static_cast<std::size_t>(d)] = src.window_lo(d);
        I.hi[static_cast<std::size_t>(d)] = src.window_hi(d);
    }
    I.h = h;
    I.amplitude = [&](std::span<const double> q) -> cplx {
        Vec eta(n);
        for (int d = 0; d < n; ++d) eta(d) = q[static_cast<std::size_t>(d)];
        const cplx a = src.amplitude(eta);
        if (a == 0.0) return 0.0;
        const double keep = G.elliptic() ? 1.0 : 1.0 - G.cutoffs().tilde_chi0(G.level_offset(eta));
        if (keep == 0) return 0.0;
        const double gap = H.h0(src.lagrangian.base_of(eta), eta) - H.energy();
        if (std::abs(gap) < G.options().boundary_gap)
            throw ConfigError("boundary part: H0 - E vanishes where chi~0 < 1; widen the tau cutoff");
        return keep * a / gap;
    };
    I.phase = [&](std::span<const double> q) {
        Vec eta(n);
        for (int d = 0; d < n; ++d) eta(d) = q[static_cast<std::size_t>(d)];
        return src.lagrangian.generating_phase(x, eta);
    };
    const OscResult r = osc_quad(I, G.options().quad_tol, scaled_options(G, h));
    return src.weight(h) * star_prefactor(n, h) * r.value;
}

cplx transient_part(const GreenSetup& G, const Vec& x, double h)
{
    const Hamiltonian& H = G.hamiltonian();
    const CutoffSpec& cut = G.cutoffs();
    const double eps = cut.t_width;
    auto weight = [&](double t) { return cut.chi0(t) * cut.chi_T(t); };
    if (H.x_independent()) {
        auto kernel = [&](const Vec& y, const Vec& eta) {
            const double rate = H.h0(y, eta) - H.energy();
            const QuadRule q = gauss_panels({0.0, eps / 2, eps}, panel_length(eps / 2, rate, h));
            return time_integral(q, weight, rate, H.h1(y, eta), h);
        };
        return strip_integral(G, x, h, kernel, eps / h);
    }
    // Order-3 Taylor phase, with Theta and J to first order in t.
    GraphPhase flat;
    flat.value = [](const Vec&) { return 0.0; };
    auto kernel = [&](const Vec& y, const Vec& eta) {
        const TaylorSeries ts = taylor_series(H, flat, y, eta);
        const SymbolJet j = H.jet(y, eta);
        const double h1 = H.h1(y, eta);
        const long n = y.size();
        const QuadRule q = gauss_panels({0.0, eps / 2, eps}, panel_length(eps / 2, ts.c1, h));
        cplx acc = 0;
        for (std::size_t i = 0; i < q.size(); ++i) {
            const double t = q.x[i];
            const double w = weight(t);
            if (w == 0) continue;
            const double det = (Mat::Identity(n, n) + t * j.hxp.transpose()).determinant();
            if (std::abs(det) < 1e-12) throw CausticError("transient part: the Jacobian vanishes inside the t window");
            const double dphi = ts.at(t) - ts.c0;
            acc += q.w[i] * w / std::sqrt(std::abs(det)) * std::polar(1.0, dphi / h - t * h1);
        }
        return acc;
    };
    return strip_integral(G, x, h, kernel, eps / h);
}

cplx wave_part(const GreenSetup& G, std::span<const ArrivalDatum> arrivals, const Vec&, double h,
               const WaveOptions& opt)
{
    const CutoffSpec& cut = G.cutoffs();
    const int n = G.hamiltonian().dim();
    const cplx lead = 1i * std::polar(std::sqrt(2 * pi / h), pi * n / 4);
    cplx sum = 0;
    for (const ArrivalDatum& a : arrivals) {
        const double w = cut.chi_T(a.t) * (1 - cut.chi0(a.t));
        if (w == 0) continue;
        const cplx amp = G.source().A(a.eta, h);
        if (amp == 0.0) continue;
        if (!a.nondegenerate) throw CausticError("caustic point; use direct quadrature fallback");
        const int sigma = G.source_signature(a.eta);
        const double transport = std::sqrt(a.density / (std::abs(a.jacobian) * std::abs(a.crossing)));
        cplx term = lead * std::polar(1.0, pi * sigma / 4 + a.action / h - a.theta) * amp * transport * w;
        if (opt.apply_maslov) term = quarter_turns(term, a.maslov);
        sum += term;
    }
    return sum;
}

cplx wave_direct(const GreenSetup& G, const Vec& x, double h)
{
    const Hamiltonian& H = G.hamiltonian();
    if (!H.x_independent()) throw CausticError("direct caustic quadrature needs an x-independent symbol");
    const CutoffSpec& cut = G.cutoffs();
    const double eps = cut.t_width, T = cut.horizon;
    auto weight = [&](double t) { return (1 - cut.chi0(t)) * cut.chi_T(t); };
    auto kernel = [&](const Vec& y, const Vec& eta) {
        const double rate = H.h0(y, eta) - H.energy();
        const QuadRule q = gauss_panels({eps / 2, eps, T / 2, T}, panel_length(T / 2, rate, h));
        return time_integral(q, weight, rate, H.h1(y, eta), h);
    };
    return strip_integral(G, x, h, kernel, T / h);
}

FieldValue assemble(const GreenSetup& G, const Vec& x, double h)
{
    if (x.size() != G.hamiltonian().dim()) throw ConfigError("field point has the wrong dimension");
    if (!(h > 0)) throw ConfigError("h must be positive");
    FieldValue v;
    v.x = x;
    v.boundary = boundary_part(G, x, h);
    if (!G.elliptic()) {
        v.transient = transient_part(G, x, h);
        if (G.degenerate_projection()) {
            v.wave = wave_direct(G, x, h);
            v.caustic = true;
        } else {
            const auto arrivals = find_arrivals(G.flow(), x, G.options().arrivals);
            v.arrivals = static_cast<int>(arrivals.size());
            try {
                v.wave = wave_part(G, arrivals, x, h);
            } catch (const CausticError&) {
                if (!G.hamiltonian().x_independent()) throw;
                v.wave = wave_direct(G, x, h);
                v.caustic = true;
            }
        }
    }
    v.total = v.boundary + v.transient + v.wave;
    return v;
}

std::size_t GridSpec::size() const
{
    if (counts.empty()) return 0;
    std::size_t s = 1;
    for (int c : counts) s *= static_cast<std::size_t>(c);
    return s;
}

Vec GridSpec::node(std::size_t flat) const
{
    const long n = static_cast<long>(counts.size());
    Vec x(n);
    for (long d = n - 1; d >= 0; --d) {
        const auto c = static_cast<std::size_t>(counts[static_cast<std::size_t>(d)]);
        const auto i = static_cast<double>(flat % c);
        flat /= c;
        x(d) = c == 1 ? lo(d) : lo(d) + (hi(d) - lo(d)) * i / static_cast<double>(c - 1);
    }
    return x;
}

FieldGrid evaluate_field(const GreenSetup& G, const GridSpec& grid, double h)
{
    const int n = G.hamiltonian().dim();
    if (static_cast<int>(grid.counts.size()) != n || grid.lo.size() != n || grid.hi.size() != n)
        throw ConfigError("grid dimension does not match the symbol");
    for (int c : grid.counts)
        if (c < 1) throw ConfigError("grid counts must be positive");
    FieldGrid out;
    out.grid = grid;
    out.h = h;
    out.values = parallel_map(grid.size(), [&](std::size_t i) { return assemble(G, grid.node(i), h); });
    return out;
}

cplx part_value(const FieldValue& v, FieldPart part)
{
    switch (part) {
    case FieldPart::total: return v.total;
    case FieldPart::boundary: return v.boundary;
    case FieldPart::transient: return v.transient;
    case FieldPart::wave: return v.wave;
    }
    return v.total;
}

std::string_view to_string(FieldPart part)
{
    switch (part) {
    case FieldPart::total: return "total";
    case FieldPart::boundary: return "boundary";
    case FieldPart::transient: return "transient";
    case FieldPart::wave: return "wave";
    }
    return "total";
}

FieldPart parse_field_part(std::string_view name)
{
    for (FieldPart p : {FieldPart::total, FieldPart::boundary, FieldPart::transient, FieldPart::wave})
        if (name == to_string(p)) return p;
    throw ConfigError("unknown field part '" + std::string(name) + "'");
}

namespace {

std::vector<Vec> projection_cloud(const GreenSetup& G)
{
    std::vector<Vec> cloud;
    const SourceSpec& src = G.source();
    for_window_nodes(src, 24, [&](const Vec& eta) {
        if (src.amplitude(eta) != 0.0) cloud.push_back(src.lagrangian.base_of(eta));
    });
    if (!G.elliptic()) {
        for (const Ray& r : G.flow().rays()) {
            const int m = 400;
            for (int i = 0; i <= m; ++i) cloud.push_back(r.at(r.t_end() * i / m).x);
        }
    }
    return cloud;
}

}  // namespace

WavefrontReport wavefront_estimate(std::span<const FieldGrid> fields, const GreenSetup& G, FieldPart part, double tol,
                                   double slow_exponent)
{
    if (fields.size() < 2) throw ConfigError("wavefront estimate needs fields at two or more values of h");
    const std::size_t nodes = fields[0].values.size();
    for (const FieldGrid& f : fields)
        if (f.values.size() != nodes) throw ConfigError("wavefront estimate: fields are on different grids");
    for (std::size_t i = 0; i < fields.size(); ++i)
        for (std::size_t j = 0; j < i; ++j)
            if (fields[i].h == fields[j].h) throw ConfigError("wavefront estimate: repeated h value");

    const std::vector<Vec> cloud = projection_cloud(G);
    WavefrontReport rep;
    rep.exponents.resize(nodes);
    rep.slow.resize(nodes);
    rep.on_lagrangian.resize(nodes);
    const double m = static_cast<double>(fields.size());
    for (std::size_t k = 0; k < nodes; ++k) {
        double sx = 0, sy = 0, sxx = 0, sxy = 0;
        bool vanished = false;
        for (const FieldGrid& f : fields) {
            const double mag = std::abs(part_value(f.values[k], part));
            if (mag == 0) {
                vanished = true;
                break;
            }
            const double lx = std::log(f.h), ly = std::log(mag);
            sx += lx;
            sy += ly;
            sxx += lx * lx;
            sxy += lx * ly;
        }
        const double e = vanished ? std::numeric_limits<double>::infinity() : (m * sxy - sx * sy) / (m * sxx - sx * sx);
        rep.exponents[k] = e;
        rep.slow[k] = e < slow_exponent;
        const Vec& x = fields[0].values[k].x;
        rep.on_lagrangian[k] =
            std::any_of(cloud.begin(), cloud.end(), [&](const Vec& c) { return (c - x).norm() <= tol; });
        if (rep.slow[k]) {
            ++rep.slow_nodes;
            if (!rep.on_lagrangian[k]) ++rep.stray_nodes;
        }
    }
    return rep;
}

}  // namespace scg
