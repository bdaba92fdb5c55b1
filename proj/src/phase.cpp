#include "scg/phase.hpp"

#include "scg/oscint.hpp"
#include "scg/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <optional>

namespace scg {

using std::numbers::pi;

double TaylorSeries::at(double t, int order) const
{
    double v = c0 - c1 * t + 0.5 * c2 * t * t;
    if (order >= 3) v -= c3 * t * t * t / 6.0;
    return v;
}

TaylorSeries taylor_series(const Hamiltonian& H, const GraphPhase& S, const Vec& x, const Vec& eta)
{
    const SymbolJet j = H.jet(x, eta);
    TaylorSeries s;
    s.c0 = x.dot(eta) + S.value(eta);
    s.c1 = j.h0 - H.energy();
    s.c2 = j.hp.dot(j.hx);
    s.c3 = j.hp.dot(j.hxp * j.hx) + j.hp.dot(j.hxx * j.hp) + j.hx.dot(j.hpp * j.hx);
    return s;
}

double taylor_phase(const Hamiltonian& H, const GraphPhase& S, double t, const Vec& x, const Vec& eta, int order,
                    double t_max)
{
    if (order != 2 && order != 3) throw ConfigError("taylor_phase: order must be 2 or 3");
    if (std::abs(t) > t_max) throw ConfigError("taylor_phase: |t| exceeds the expansion window");
    return taylor_series(H, S, x, eta).at(t, order);
}

double characteristic_phase(const Hamiltonian& H, const GraphPhase& S, double t, const Vec& x, const Vec& eta, double tol)
{
    const int n = H.dim();
    RayOptions opt;
    opt.tol = tol;
    opt.track_events = false;
    // the initial momentum of every characteristic is eta; solve for the start point
    Vec y = x - t * H.grad_p(x, eta);
    for (int it = 0; it < 50; ++it) {
        const Ray ray = integrate_ray(H, y, eta, t, Mat::Identity(n, n), Mat::Zero(n, n), opt);
        const RayState& end = ray.nodes().back();
        const Vec miss = end.x - x;
        if (miss.norm() <= 1e-13 * (1 + x.norm())) {
            return y.dot(eta) + S.value(eta) + end.action - t * (H.h0(y, eta) - H.energy());
        }
        y -= end.dx.fullPivLu().solve(miss);
    }
    throw NumericError("characteristic_phase: Newton for the start point did not converge");
}

EikonalValue eikonal_phase_eval(const Ray& ray, double t, const Hamiltonian& H, double r, const Vec& x)
{
    if (t < 0 || t > ray.t_end()) throw NumericError("eikonal_phase_eval: t outside the flow-out");
    const RayState s = ray.at(t);
    const Vec xdot = H.grad_p(s.x, s.p), pdot = -H.grad_x(s.x, s.p);
    const Vec miss = x - s.x;
    EikonalValue v;
    v.phi = s.action + r * s.p.dot(miss);
    v.d_t = s.p.dot(xdot) * (1 - r) + r * pdot.dot(miss);
    v.d_psi = s.action_grad + r * (s.dp.transpose() * miss) - r * (s.dx.transpose() * s.p);
    v.d_r = s.p.dot(miss);
    return v;
}

EikonalValue eikonal_phase_eval(const FlowOut& F, double t, const Vec& psi, double r, const Vec& x)
{
    if (t < 0 || t > F.horizon()) throw NumericError("eikonal_phase_eval: t outside the flow-out");
    return eikonal_phase_eval(F.ray_at(psi), t, F.hamiltonian(), r, x);
}

namespace {

struct GridShape {
    std::vector<long> dims;
    std::vector<bool> periodic;
};

GridShape grid_shape(const LevelIntersection& L)
{
    const auto& src = L.source();
    const int k = src.psi_dim();
    const long m = L.options().psi_nodes;
    if (src.periodic_psi()) {
        if (k == 1) return {{m}, {true}};
        return {{std::max(1L, m / 2), m}, {false, true}};
    }
    return {std::vector<long>(static_cast<std::size_t>(k), m), std::vector<bool>(static_cast<std::size_t>(k), false)};
}

double wrap_angle(double a)
{
    a = std::fmod(a, 2 * pi);
    return a < 0 ? a + 2 * pi : a;
}

Vec normalize_psi(const SourceLagrangian& src, Vec psi)
{
    if (!src.periodic_psi()) return psi;
    if (psi.size() == 1) {
        psi(0) = wrap_angle(psi(0));
    } else {
        // polar angle reflected into [0, pi]
        double th = wrap_angle(psi(0));
        if (th > pi) {
            th = 2 * pi - th;
            psi(1) += pi;
        }
        psi(0) = th;
        psi(1) = wrap_angle(psi(1));
    }
    return psi;
}

double psi_distance(const SourceLagrangian& src, const Vec& a, const Vec& b)
{
    Vec d = a - b;
    if (src.periodic_psi()) {
        const long last = d.size() - 1;
        d(last) = std::remainder(d(last), 2 * pi);
    }
    return d.norm();
}

bool in_window(const SourceLagrangian& src, const Vec& psi, const ArrivalOptions& opt)
{
    if (opt.psi_lo.size() == 0) return true;
    for (long j = 0; j < psi.size(); ++j) {
        double v = psi(j);
        if (src.periodic_psi() && j == psi.size() - 1) {
            // window may straddle 0
            const double lo = opt.psi_lo(j);
            v = lo + wrap_angle(v - lo);
        }
        if (v < opt.psi_lo(j) || v > opt.psi_hi(j)) return false;
    }
    return true;
}

Mat flow_jacobian(const Hamiltonian& H, const RayState& s)
{
    const int n = static_cast<int>(s.x.size());
    Mat a(n, n);
    a.col(0) = H.grad_p(s.x, s.p);
    a.rightCols(n - 1) = s.dx;
    return a;
}

// (t, psi, r) Hessian of the eikonal phase at a critical configuration.
Mat critical_hessian(const Hamiltonian& H, const RayState& s)
{
    const int n = static_cast<int>(s.x.size());
    const int k = n - 1;
    const Vec xdot = H.grad_p(s.x, s.p), pdot = -H.grad_x(s.x, s.p);
    Mat m = Mat::Zero(n + 1, n + 1);
    m(0, 0) = -pdot.dot(xdot);
    m.block(0, 1, 1, k) = -(s.dx.transpose() * pdot).transpose();
    m(0, n) = -s.p.dot(xdot);
    m.block(1, 1, k, k) = -0.5 * (s.dp.transpose() * s.dx + s.dx.transpose() * s.dp);
    m.block(1, n, k, 1) = -(s.dx.transpose() * s.p);
    const Mat full = m.selfadjointView<Eigen::Upper>();
    return full;
}

}  // namespace

std::vector<ArrivalDatum> find_arrivals(const FlowOut& F, const Vec& x, const ArrivalOptions& opt)
{
    const auto& L = F.level();
    const auto& src = L.source();
    const auto& H = F.hamiltonian();
    const int n = H.dim();
    if (x.size() != n) throw ConfigError("find_arrivals: point has the wrong dimension");
    const auto& rays = F.rays();
    const std::size_t nr = rays.size();
    const double T = F.horizon();

    // best time on each grid ray
    std::vector<double> best_t(nr), best_d(nr);
    const int ns = std::max(8, opt.time_samples);
    for (std::size_t i = 0; i < nr; ++i) {
        best_d[i] = std::numeric_limits<double>::infinity();
        for (int j = 1; j <= ns; ++j) {
            const double t = T * j / ns;
            const double d = (rays[i].at(t).x - x).norm();
            if (d < best_d[i]) {
                best_d[i] = d;
                best_t[i] = t;
            }
        }
    }

    const GridShape shape = grid_shape(L);
    const std::size_t k = shape.dims.size();
    auto neighbors = [&](std::size_t flat) {
        std::vector<long> idx(k);
        long rem = static_cast<long>(flat);
        for (std::size_t d = k; d-- > 0;) {
            idx[d] = rem % shape.dims[d];
            rem /= shape.dims[d];
        }
        std::vector<std::size_t> out;
        for (std::size_t d = 0; d < k; ++d)
            for (long step : {-1L, 1L}) {
                auto j = idx;
                j[d] += step;
                if (shape.periodic[d]) j[d] = (j[d] + shape.dims[d]) % shape.dims[d];
                if (j[d] < 0 || j[d] >= shape.dims[d]) continue;
                long f = 0;
                for (std::size_t e = 0; e < k; ++e) f = f * shape.dims[e] + j[e];
                out.push_back(static_cast<std::size_t>(f));
            }
        return out;
    };

    std::vector<std::size_t> seeds;
    for (std::size_t i = 0; i < nr; ++i) {
        if (!in_window(src, L.samples()[i].psi, opt)) continue;
        const auto nb = neighbors(i);
        bool minimum = true;
        double spacing = T / ns * H.grad_p(rays[i].at(best_t[i]).x, rays[i].at(best_t[i]).p).norm();
        const Vec xi = rays[i].at(best_t[i]).x;
        for (std::size_t j : nb) {
            if (best_d[j] < best_d[i]) minimum = false;
            spacing += (rays[j].at(best_t[i]).x - xi).norm();
        }
        if (minimum && best_d[i] <= 2 * spacing + 1e-12) seeds.push_back(i);
    }

    auto solve = [&](std::size_t seed) -> std::optional<ArrivalDatum> {
        double t = best_t[seed];
        Vec psi = L.samples()[seed].psi;
        Ray ray = rays[seed];
        RayState s = ray.at(t);
        double miss = (s.x - x).norm();
        const double goal = opt.tol * (1 + x.norm());
        for (int it = 0; it < opt.max_iterations && miss > goal; ++it) {
            const Mat J = flow_jacobian(H, s);
            const Vec step = J.completeOrthogonalDecomposition().solve(x - s.x);
            bool improved = false;
            for (double lambda = 1.0; lambda > 1e-4; lambda *= 0.5) {
                const double t_new = t + lambda * step(0);
                if (!(t_new > 0) || t_new > T) continue;
                const Vec psi_new = normalize_psi(src, psi + lambda * step.tail(n - 1));
                Ray trial = [&] {
                    try {
                        return F.ray_at(psi_new);
                    } catch (const HypothesisError&) {
                        return Ray{};
                    }
                }();
                if (trial.nodes().empty()) continue;
                const RayState st = trial.at(t_new);
                const double m = (st.x - x).norm();
                if (m < miss) {
                    t = t_new;
                    psi = psi_new;
                    ray = std::move(trial);
                    s = st;
                    miss = m;
                    improved = true;
                    break;
                }
            }
            if (!improved) break;
        }
        if (miss > goal * 100 || !in_window(src, psi, opt)) return std::nullopt;

        ArrivalDatum a;
        a.x = x;
        a.t = t;
        a.psi = psi;
        const LevelPoint lp = L.at(psi);
        a.eta = lp.z.p;
        a.action = s.action;
        a.theta = s.theta;
        const Mat J = flow_jacobian(H, s);
        a.jacobian = J.determinant();
        const Vec pdot = -H.grad_x(s.x, s.p);
        const double speed = std::sqrt(J.col(0).squaredNorm() + pdot.squaredNorm());
        Mat stacked(2 * n, n - 1);
        stacked << s.dx, s.dp;
        const double spread = std::pow(stacked.norm(), n - 1);
        a.nondegenerate = std::abs(a.jacobian) > opt.degeneracy * speed * spread;
        const Mat hess = critical_hessian(H, s);
        a.signature = signature(hess);
        Eigen::JacobiSVD<Mat> svd(hess);
        const Vec sv = svd.singularValues();
        a.hessian_condition = sv(sv.size() - 1) > 0 ? sv(0) / sv(sv.size() - 1) : std::numeric_limits<double>::infinity();
        a.d_tt = hess(0, 0);
        a.maslov = ray.maslov_before(t);
        a.crossing = lp.crossing;
        a.density = src.momentum_represented() ? src.momentum_density(lp.tau, lp.psi) : 0.0;
        a.residual = miss;
        return a;
    };

    const auto solved = parallel_map(seeds.size(), [&](std::size_t i) { return solve(seeds[i]); });
    std::vector<ArrivalDatum> out;
    for (const auto& cand : solved) {
        if (!cand) continue;
        bool dup = false;
        for (const auto& a : out)
            dup = dup || std::hypot(a.t - cand->t, psi_distance(src, a.psi, cand->psi)) < opt.dedupe;
        if (!dup) out.push_back(*cand);
    }
    std::sort(out.begin(), out.end(), [](const auto& l, const auto& r) { return l.t < r.t; });
    return out;
}

double hj_residual(const FlowOut& F, int samples)
{
    const auto& H = F.hamiltonian();
    const double E = F.level().energy();
    const auto& rays = F.rays();
    if (samples < 1 || rays.empty()) return 0.0;
    double worst = 0;
    for (int k = 0; k < samples; ++k) {
        const std::size_t i = static_cast<std::size_t>(k) * rays.size() / static_cast<std::size_t>(samples);
        const double t = F.horizon() * (k % 16 + 1) / 16.0;
        const RayState s = rays[i].at(t);
        const EikonalValue v = eikonal_phase_eval(rays[i], t, H, 1.0, s.x);
        const double r = std::abs(v.d_t) + v.d_psi.cwiseAbs().maxCoeff() + std::abs(H.h0(s.x, s.p) - E);
        worst = std::max(worst, r);
    }
    return worst;
}

CriticalityReport criticality_identities(const FlowOut& F)
{
    const auto& H = F.hamiltonian();
    if (!H.homogeneity()) throw ConfigError("criticality identities need a homogeneous symbol");
    const double rate = *H.homogeneity() * F.level().energy();
    CriticalityReport rep;
    for (const Ray& ray : F.rays())
        for (const RayState& s : ray.nodes()) {
            rep.action_rate = std::max(rep.action_rate, std::abs(s.p.dot(H.grad_p(s.x, s.p)) - rate));
            rep.orthogonality = std::max(rep.orthogonality, (s.dx.transpose() * s.p).cwiseAbs().maxCoeff());
        }
    return rep;
}

}  // namespace scg
