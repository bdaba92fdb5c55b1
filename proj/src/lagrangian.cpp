#include "scg/lagrangian.hpp"

#include "scg/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace scg {

using std::numbers::pi;

std::string_view to_string(LagrangianKind kind)
{
    switch (kind) {
    case LagrangianKind::vertical_fiber: return "vertical_fiber";
    case LagrangianKind::tilted_graph: return "tilted_graph";
    case LagrangianKind::conormal: return "conormal";
    case LagrangianKind::bessel_cone: return "bessel_cone";
    }
    return "?";
}

LagrangianKind parse_lagrangian_kind(std::string_view name)
{
    for (auto k : {LagrangianKind::vertical_fiber, LagrangianKind::tilted_graph, LagrangianKind::conormal,
                   LagrangianKind::bessel_cone})
        if (to_string(k) == name) return k;
    throw ConfigError("unknown source manifold '" + std::string(name) + "'");
}

Vec direction(const Vec& psi)
{
    if (psi.size() == 1) {
        Vec w(2);
        w << std::cos(psi(0)), std::sin(psi(0));
        return w;
    }
    if (psi.size() == 2) {
        Vec w(3);
        w << std::sin(psi(0)) * std::cos(psi(1)), std::sin(psi(0)) * std::sin(psi(1)), std::cos(psi(0));
        return w;
    }
    throw ConfigError("angle charts are implemented in 2 and 3 dimensions");
}

Mat direction_jacobian(const Vec& psi)
{
    if (psi.size() == 1) {
        Mat d(2, 1);
        d << -std::sin(psi(0)), std::cos(psi(0));
        return d;
    }
    if (psi.size() == 2) {
        const double st = std::sin(psi(0)), ct = std::cos(psi(0)), sp = std::sin(psi(1)), cp = std::cos(psi(1));
        Mat d(3, 2);
        d << ct * cp, -st * sp, ct * sp, st * cp, -st, 0;
        return d;
    }
    throw ConfigError("angle charts are implemented in 2 and 3 dimensions");
}

SourceLagrangian SourceLagrangian::vertical_fiber(Vec x0, ChartKind chart)
{
    SourceLagrangian s;
    s.dim_ = static_cast<int>(x0.size());
    s.kind_ = LagrangianKind::vertical_fiber;
    s.chart_ = chart;
    s.x0_ = std::move(x0);
    if (chart == ChartKind::polar && (s.dim_ < 2 || s.dim_ > 3)) throw ConfigError("polar charts need dimension 2 or 3");
    return s;
}

SourceLagrangian SourceLagrangian::tilted_graph(Vec x0, GraphPhase phase, ChartKind chart)
{
    if (!phase.value || !phase.gradient || !phase.hessian) throw ConfigError("tilted graph needs S, its gradient and Hessian");
    SourceLagrangian s = vertical_fiber(std::move(x0), chart);
    s.kind_ = LagrangianKind::tilted_graph;
    s.graph_ = std::move(phase);
    return s;
}

SourceLagrangian SourceLagrangian::conormal(int dim)
{
    if (dim < 1) throw ConfigError("conormal manifold needs dimension >= 1");
    SourceLagrangian s;
    s.dim_ = dim;
    s.kind_ = LagrangianKind::conormal;
    s.chart_ = ChartKind::cartesian;
    s.x0_ = Vec::Zero(dim);
    return s;
}

SourceLagrangian SourceLagrangian::bessel_cone(int dim)
{
    SourceLagrangian s;
    s.dim_ = dim;
    s.kind_ = LagrangianKind::bessel_cone;
    s.chart_ = ChartKind::polar;
    s.x0_ = Vec::Zero(dim);
    if (dim < 2 || dim > 3) throw ConfigError("the cone manifold is implemented in dimension 2 or 3");
    return s;
}

namespace {

// Momentum and its (tau, psi) derivatives for the momentum-represented kinds.
void momentum_chart(ChartKind chart, int n, double tau, const Vec& psi, Vec& eta, Mat& d_eta)
{
    d_eta.resize(n, n);
    if (chart == ChartKind::polar) {
        const Vec w = direction(psi);
        eta = tau * w;
        d_eta.col(0) = w;
        d_eta.rightCols(n - 1) = tau * direction_jacobian(psi);
    } else {
        eta.resize(n);
        eta.head(n - 1) = psi;
        eta(n - 1) = tau;
        d_eta.setZero();
        d_eta(n - 1, 0) = 1;
        for (int j = 0; j + 1 < n; ++j) d_eta(j, j + 1) = 1;
    }
}

}  // namespace

PhasePoint SourceLagrangian::point(double tau, const Vec& psi) const
{
    if (psi.size() != dim_ - 1) throw ConfigError("source chart: psi has the wrong dimension");
    const int n = dim_;
    switch (kind_) {
    case LagrangianKind::vertical_fiber:
    case LagrangianKind::tilted_graph: {
        Vec eta;
        Mat d;
        momentum_chart(chart_, n, tau, psi, eta, d);
        Vec x = x0_;
        if (kind_ == LagrangianKind::tilted_graph) x -= graph_.gradient(eta);
        return {x, eta};
    }
    case LagrangianKind::conormal: {
        Vec x = Vec::Zero(n), p = Vec::Zero(n);
        x.head(n - 1) = psi;
        p(n - 1) = tau;
        return {x, p};
    }
    case LagrangianKind::bessel_cone: {
        const Vec w = direction(psi);
        return {tau * w, w};
    }
    }
    throw ConfigError("unknown source manifold");
}

Mat SourceLagrangian::tangents(double tau, const Vec& psi) const
{
    const int n = dim_;
    Mat t = Mat::Zero(2 * n, n);
    switch (kind_) {
    case LagrangianKind::vertical_fiber:
    case LagrangianKind::tilted_graph: {
        Vec eta;
        Mat d;
        momentum_chart(chart_, n, tau, psi, eta, d);
        t.bottomRows(n) = d;
        if (kind_ == LagrangianKind::tilted_graph) t.topRows(n) = -graph_.hessian(eta) * d;
        break;
    }
    case LagrangianKind::conormal:
        t(2 * n - 1, 0) = 1;
        for (int j = 0; j + 1 < n; ++j) t(j, j + 1) = 1;
        break;
    case LagrangianKind::bessel_cone: {
        const Vec w = direction(psi);
        const Mat dw = direction_jacobian(psi);
        t.block(0, 0, n, 1) = w;
        t.block(0, 1, n, n - 1) = tau * dw;
        t.block(n, 1, n, n - 1) = dw;
        break;
    }
    }
    return t;
}

double SourceLagrangian::generating_phase(const Vec& x, const Vec& eta) const
{
    if (!momentum_represented()) throw ConfigError("generating phase needs a momentum-represented source");
    double v = (x - x0_).dot(eta);
    if (kind_ == LagrangianKind::tilted_graph) v += graph_.value(eta);
    return v;
}

Vec SourceLagrangian::base_of(const Vec& eta) const
{
    if (!momentum_represented()) throw ConfigError("base_of needs a momentum-represented source");
    if (kind_ == LagrangianKind::tilted_graph) return x0_ - graph_.gradient(eta);
    return x0_;
}

Mat SourceLagrangian::generating_hessian(const Vec& eta) const
{
    if (!momentum_represented()) throw ConfigError("generating phase needs a momentum-represented source");
    if (kind_ == LagrangianKind::tilted_graph) return graph_.hessian(eta);
    return Mat::Zero(dim_, dim_);
}

double SourceLagrangian::eikonal(double tau, const Vec& psi) const
{
    switch (kind_) {
    case LagrangianKind::vertical_fiber:
    case LagrangianKind::conormal: return 0.0;
    case LagrangianKind::tilted_graph: {
        const Vec eta = point(tau, psi).p;
        return graph_.value(eta) - eta.dot(graph_.gradient(eta));
    }
    case LagrangianKind::bessel_cone: return tau;
    }
    return 0.0;
}

void SourceLagrangian::chart_coordinates(const Vec& eta, double& tau, Vec& psi) const
{
    if (!momentum_represented()) throw ConfigError("chart_coordinates: source is not momentum-represented");
    const int n = dim_;
    psi.resize(n - 1);
    if (chart_ == ChartKind::cartesian) {
        tau = eta(n - 1);
        psi = eta.head(n - 1);
        return;
    }
    tau = eta.norm();
    if (n == 2) {
        double a = std::atan2(eta(1), eta(0));
        if (a < 0) a += 2 * pi;
        psi(0) = a;
    } else {
        psi(0) = tau > 0 ? std::acos(std::clamp(eta(2) / tau, -1.0, 1.0)) : 0.0;
        double a = std::atan2(eta(1), eta(0));
        if (a < 0) a += 2 * pi;
        psi(1) = a;
    }
}

double SourceLagrangian::momentum_density(double tau, const Vec& psi) const
{
    if (!momentum_represented()) throw ConfigError("momentum_density: source is not momentum-represented");
    if (chart_ == ChartKind::cartesian) return 1.0;
    if (dim_ == 2) return std::abs(tau);
    return tau * tau * std::abs(std::sin(psi(0)));
}

std::vector<Vec> psi_grid(const SourceLagrangian& source, const LevelOptions& opt)
{
    const int k = source.psi_dim();
    const int m = opt.psi_nodes;
    if (m < 2) throw ConfigError("psi grid needs at least 2 nodes");
    std::vector<Vec> grid;
    if (k == 0) {
        grid.emplace_back(0);
        return grid;
    }
    if (source.periodic_psi()) {
        if (k == 1) {
            for (int i = 0; i < m; ++i) grid.push_back(Vec::Constant(1, 2 * pi * i / m));
        } else {
            const int mt = std::max(1, m / 2);
            for (int i = 0; i < mt; ++i)
                for (int j = 0; j < m; ++j) {
                    Vec v(2);
                    v << pi * (i + 0.5) / mt, 2 * pi * j / m;
                    grid.push_back(v);
                }
        }
        return grid;
    }
    if (opt.psi_lo.size() != k || opt.psi_hi.size() != k) throw ConfigError("cartesian charts need a psi box");
    std::vector<int> idx(static_cast<std::size_t>(k), 0);
    for (;;) {
        Vec v(k);
        for (int d = 0; d < k; ++d) v(d) = opt.psi_lo(d) + (opt.psi_hi(d) - opt.psi_lo(d)) * idx[static_cast<std::size_t>(d)] / (m - 1);
        grid.push_back(v);
        int d = 0;
        while (d < k && ++idx[static_cast<std::size_t>(d)] == m) idx[static_cast<std::size_t>(d++)] = 0;
        if (d == k) break;
    }
    return grid;
}

namespace {

double level_function(const SourceLagrangian& s, const Hamiltonian& H, double E, double tau, const Vec& psi)
{
    const PhasePoint z = s.point(tau, psi);
    return H.h0(z.x, z.p) - E;
}

LevelPoint solve_level(const SourceLagrangian& s, const Hamiltonian& H, double E, const LevelOptions& opt, const Vec& psi)
{
    const int n = s.dim();
    std::vector<std::pair<double, double>> brackets;
    double prev_tau = 0, prev_f = 0;
    bool have_prev = false;
    for (int i = 0; i <= opt.scan; ++i) {
        const double tau = opt.tau_lo + (opt.tau_hi - opt.tau_lo) * i / opt.scan;
        double f;
        try {
            f = level_function(s, H, E, tau, psi);
        } catch (const NumericError&) {
            have_prev = false;
            continue;
        }
        if (f == 0) {
            brackets.emplace_back(tau, tau);
        } else if (have_prev && prev_f != 0 && (f < 0) != (prev_f < 0)) {
            brackets.emplace_back(prev_tau, tau);
        }
        prev_tau = tau;
        prev_f = f;
        have_prev = true;
    }
    std::string where = "psi =";
    for (long j = 0; j < psi.size(); ++j) where += " " + std::to_string(psi(j));
    if (brackets.empty())
        throw HypothesisError("level set not reached inside the tau box at " + where +
                              " (compactness of L or the energy level fails)");
    if (brackets.size() > 1) throw HypothesisError("several level crossings along tau at " + where);

    auto [a, b] = brackets.front();
    double fa = level_function(s, H, E, a, psi);
    double tau = 0.5 * (a + b);
    if (a == b) tau = a;
    for (int it = 0; it < 200 && b - a > 1e-15 * std::max(1.0, std::abs(b)); ++it) {
        const PhasePoint z = s.point(tau, psi);
        const double f = H.h0(z.x, z.p) - E;
        if (f == 0) break;
        const Mat T = s.tangents(tau, psi);
        const double df = H.grad_x(z.x, z.p).dot(T.col(0).head(n)) + H.grad_p(z.x, z.p).dot(T.col(0).tail(n));
        if ((f < 0) == (fa < 0)) {
            a = tau;
            fa = f;
        } else {
            b = tau;
        }
        double next = df != 0 ? tau - f / df : 0.5 * (a + b);
        if (!(next > a && next < b)) next = 0.5 * (a + b);
        if (std::abs(next - tau) < 1e-16 * std::max(1.0, std::abs(tau))) {
            tau = next;
            break;
        }
        tau = next;
    }

    LevelPoint lp;
    lp.psi = psi;
    lp.tau = tau;
    lp.z = s.point(tau, psi);
    const Mat T = s.tangents(tau, psi);
    const Vec gx = H.grad_x(lp.z.x, lp.z.p), gp = H.grad_p(lp.z.x, lp.z.p);
    auto dh = [&](long col) { return gx.dot(T.col(col).head(n)) + gp.dot(T.col(col).tail(n)); };
    lp.crossing = dh(0);
    if (std::abs(lp.crossing) < opt.margin_min)
        throw HypothesisError("transversality fails: dH0/dtau = " + std::to_string(lp.crossing) + " at " + where);
    lp.tangent.resize(2 * n, n - 1);
    for (int j = 0; j + 1 < n; ++j) lp.tangent.col(j) = T.col(j + 1) - (dh(j + 1) / lp.crossing) * T.col(0);
    lp.action = s.eikonal(tau, psi);
    lp.action_grad.resize(n - 1);
    for (int j = 0; j + 1 < n; ++j) lp.action_grad(j) = lp.z.p.dot(lp.tangent.col(j).head(n));
    return lp;
}

}  // namespace

LevelIntersection::LevelIntersection(SourceLagrangian source, Hamiltonian H, double energy, LevelOptions opt)
    : source_(std::move(source)), H_(std::move(H)), energy_(energy), opt_(std::move(opt))
{
    if (source_.dim() != H_.dim()) throw ConfigError("source manifold and symbol dimensions differ");
    if (!(opt_.tau_hi > opt_.tau_lo)) throw ConfigError("tau box is empty");
    if (opt_.scan < 2) throw ConfigError("tau scan needs at least 2 intervals");
    margin_ = std::numeric_limits<double>::infinity();
    for (const Vec& psi : psi_grid(source_, opt_)) {
        LevelPoint lp = solve_level(source_, H_, energy_, opt_, psi);
        margin_ = std::min(margin_, std::abs(lp.crossing));
        residual_ = std::max(residual_, std::abs(H_.h0(lp.z.x, lp.z.p) - energy_));
        samples_.push_back(std::move(lp));
    }
}

LevelPoint LevelIntersection::at(const Vec& psi) const { return solve_level(source_, H_, energy_, opt_, psi); }

double LevelIntersection::tau_at(const Vec& psi) const
{
    const std::size_t m = samples_.size();
    if (psi.size() != 1 || m < 2) return at(psi).tau;
    // samples are uniform in psi: periodic on [0, 2 pi) or spanning the box ends
    double u, guess;
    if (source_.periodic_psi()) {
        u = std::fmod(psi(0), 2 * pi);
        if (u < 0) u += 2 * pi;
        u *= static_cast<double>(m) / (2 * pi);
        const auto i = static_cast<std::size_t>(u) % m;
        const double f = u - std::floor(u);
        guess = (1 - f) * samples_[i].tau + f * samples_[(i + 1) % m].tau;
    } else {
        u = (psi(0) - opt_.psi_lo(0)) / (opt_.psi_hi(0) - opt_.psi_lo(0)) * static_cast<double>(m - 1);
        if (!(u >= 0 && u <= static_cast<double>(m - 1))) return at(psi).tau;
        const auto i = std::min(static_cast<std::size_t>(u), m - 2);
        const double f = u - static_cast<double>(i);
        guess = (1 - f) * samples_[i].tau + f * samples_[i + 1].tau;
    }
    const int n = source_.dim();
    double tau = guess;
    for (int it = 0; it < 30; ++it) {
        const PhasePoint z = source_.point(tau, psi);
        const double f = H_.h0(z.x, z.p) - energy_;
        const Mat T = source_.tangents(tau, psi);
        const double df = H_.grad_x(z.x, z.p).dot(T.col(0).head(n)) + H_.grad_p(z.x, z.p).dot(T.col(0).tail(n));
        if (!(std::abs(df) > 0.5 * margin_)) break;
        const double step = f / df;
        tau -= step;
        if (!(tau > opt_.tau_lo && tau < opt_.tau_hi)) break;
        if (std::abs(step) <= 1e-14 * std::max(1.0, std::abs(tau))) return tau;
    }
    return at(psi).tau;
}

double LevelIntersection::psi_volume() const
{
    const int k = source_.psi_dim();
    if (source_.periodic_psi()) return k == 1 ? 2 * pi : 2 * pi * pi;
    double v = 1;
    for (int d = 0; d < k; ++d) v *= opt_.psi_hi(d) - opt_.psi_lo(d);
    return v;
}

double LevelIntersection::psi_spacing() const
{
    if (source_.periodic_psi()) return 2 * pi / opt_.psi_nodes;
    double s = 0;
    for (int d = 0; d < source_.psi_dim(); ++d) s = std::max(s, (opt_.psi_hi(d) - opt_.psi_lo(d)) / (opt_.psi_nodes - 1));
    return s;
}

LevelIntersection intersect_level(const SourceLagrangian& source, const Hamiltonian& H, double energy,
                                  const LevelOptions& opt)
{
    return LevelIntersection(source, H, energy, opt);
}

FlowOut::FlowOut(const LevelIntersection& level, double horizon, FlowOutOptions opt)
    : level_(std::make_shared<const LevelIntersection>(level)), horizon_(horizon), opt_(std::move(opt))
{
    if (!(horizon > 0)) throw ConfigError("flow-out horizon must be positive");
    const auto& samples = level_->samples();
    rays_ = parallel_map(samples.size(), [&](std::size_t i) { return ray_from(samples[i]); });
}

Ray FlowOut::ray_from(const LevelPoint& lp) const
{
    const int n = level_->source().dim();
    return integrate_ray(level_->hamiltonian(), lp.z.x, lp.z.p, horizon_, lp.tangent.topRows(n), lp.tangent.bottomRows(n),
                         opt_.ray, lp.action, lp.action_grad);
}

Ray FlowOut::ray_at(const Vec& psi) const { return ray_from(level_->at(psi)); }

Mat FlowOut::tangent_space(std::size_t ray, double t) const
{
    const RayState s = rays_.at(ray).at(t);
    const int n = static_cast<int>(s.x.size());
    const auto& H = level_->hamiltonian();
    Mat m(2 * n, n);
    m.col(0).head(n) = H.grad_p(s.x, s.p);
    m.col(0).tail(n) = -H.grad_x(s.x, s.p);
    m.block(0, 1, n, n - 1) = s.dx;
    m.block(n, 1, n, n - 1) = s.dp;
    return m;
}

FlowOut flow_out(const LevelIntersection& level, double horizon, const FlowOutOptions& opt)
{
    return FlowOut(level, horizon, opt);
}

namespace {

int numeric_rank(const Mat& m, double rel_tol, bool& gray)
{
    if (m.cols() == 0) return 0;
    Eigen::JacobiSVD<Mat> svd(m);
    const Vec sv = svd.singularValues();
    if (sv(0) == 0) return 0;
    int r = 0;
    for (long i = 0; i < sv.size(); ++i) {
        if (sv(i) > rel_tol * sv(0)) ++r;
        if (sv(i) > rel_tol * sv(0) && sv(i) < 1e3 * rel_tol * sv(0)) gray = true;
    }
    return r;
}

}  // namespace

int intersection_dimension(const Mat& a, const Mat& b, double rel_tol)
{
    bool gray = false;
    Mat ab(a.rows(), a.cols() + b.cols());
    ab << a, b;
    return numeric_rank(a, rel_tol, gray) + numeric_rank(b, rel_tol, gray) - numeric_rank(ab, rel_tol, gray);
}

CleanReport check_clean_intersection(const SourceLagrangian& lambda0, const FlowOut& lambda1, int samples)
{
    const auto& level = lambda1.level().samples();
    const int n = lambda0.dim();
    CleanReport rep;
    rep.min_dimension = 2 * n;
    const std::size_t count = std::min<std::size_t>(static_cast<std::size_t>(std::max(samples, 1)), level.size());
    for (std::size_t s = 0; s < count; ++s) {
        const std::size_t i = s * level.size() / count;
        const LevelPoint& lp = level[i];
        const PhasePoint z0 = lambda0.point(lp.tau, lp.psi);
        if ((z0.x - lp.z.x).norm() + (z0.p - lp.z.p).norm() > 1e-8 * (1 + lp.z.p.norm()))
            throw ConfigError("check_clean_intersection: the manifolds do not share the sampled boundary point");
        const Mat a = lambda0.tangents(lp.tau, lp.psi);
        const Mat b = lambda1.tangent_space(i, 0.0);
        bool gray = false;
        Mat ab(2 * n, 2 * n);
        ab << a, b;
        const int dim = numeric_rank(a, 1e-8, gray) + numeric_rank(b, 1e-8, gray) - numeric_rank(ab, 1e-8, gray);
        if (gray) ++rep.flagged;
        rep.min_dimension = std::min(rep.min_dimension, dim);
        rep.max_dimension = std::max(rep.max_dimension, dim);
        ++rep.samples;
    }
    rep.pass = rep.samples > 0 && rep.min_dimension == n - 1 && rep.max_dimension == n - 1;
    return rep;
}

double symplectic(const Vec& u, const Vec& v)
{
    const long n = u.size() / 2;
    return u.head(n).dot(v.tail(n)) - u.tail(n).dot(v.head(n));
}

EikonalReport eikonal_chart(const SourceLagrangian& source, std::span<const double> taus, std::span<const Vec> psis)
{
    const int n = source.dim();
    EikonalReport rep;
    rep.min_gradient = std::numeric_limits<double>::infinity();
    for (double tau : taus)
        for (const Vec& psi : psis) {
            const Mat T = source.tangents(tau, psi);
            const PhasePoint z = source.point(tau, psi);
            rep.values.push_back(source.eikonal(tau, psi));
            double grad2 = 0;
            for (int c = 0; c < n; ++c) {
                // fourth-order central difference of S along the chart coordinate c
                auto S = [&](double d) {
                    Vec q = psi;
                    double t = tau;
                    (c == 0 ? t : q(c - 1)) += d;
                    return source.eikonal(t, q);
                };
                const double d = c == 0 ? 1e-3 * std::max(1.0, std::abs(tau)) : 1e-3;
                const double ds = (-S(2 * d) + 8 * S(d) - 8 * S(-d) + S(-2 * d)) / (12 * d);
                const double pdx = z.p.dot(T.col(c).head(n));
                rep.max_residual = std::max(rep.max_residual, std::abs(pdx - ds));
                grad2 += ds * ds;
            }
            rep.min_gradient = std::min(rep.min_gradient, std::sqrt(grad2));
        }
    rep.accepted = rep.min_gradient > 1e-8;
    if (!rep.accepted) rep.reason = "dS vanishes on the chart; use the tau coordinate";
    return rep;
}

EikonalReport eikonal_chart(const FlowOut& flow)
{
    const auto& H = flow.hamiltonian();
    EikonalReport rep;
    rep.min_gradient = std::numeric_limits<double>::infinity();
    for (const Ray& ray : flow.rays())
        for (const RayState& s : ray.nodes()) {
            rep.values.push_back(s.action);
            const double st = s.p.dot(H.grad_p(s.x, s.p));
            const Vec pdx = s.dx.transpose() * s.p;
            rep.max_residual = std::max(rep.max_residual, (pdx - s.action_grad).cwiseAbs().maxCoeff());
            rep.min_gradient = std::min(rep.min_gradient, std::sqrt(st * st + s.action_grad.squaredNorm()));
        }
    rep.accepted = rep.min_gradient > 1e-8;
    if (!rep.accepted) rep.reason = "dS vanishes on the flow-out";
    return rep;
}

}  // namespace scg
