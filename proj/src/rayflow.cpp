#include "scg/rayflow.hpp"

#include "scg/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace scg {

namespace {

// Dormand-Prince 5(4) with Hairer's continuous extension.
constexpr double a21 = 1.0 / 5;
constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561, a54 = -212.0 / 729;
constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247, a64 = 49.0 / 176,
                 a65 = -5103.0 / 18656;
constexpr double a71 = 35.0 / 384, a73 = 500.0 / 1113, a74 = 125.0 / 192, a75 = -2187.0 / 6784, a76 = 11.0 / 84;
constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920, e5 = -17253.0 / 339200,
                 e6 = 22.0 / 525, e7 = -1.0 / 40;
constexpr double d1 = -12715105075.0 / 11282082432, d3 = 87487479700.0 / 32700410799,
                 d4 = -10690763975.0 / 1880347072, d5 = 701980252875.0 / 199316789632,
                 d6 = -1453857185.0 / 822651844, d7 = 69997945.0 / 29380423;

struct Layout {
    int n, k;
    long x() const { return 0; }
    long p() const { return n; }
    long s() const { return 2 * n; }
    long th() const { return 2 * n + 1; }
    long mx() const { return 2 * n + 2; }
    long mp() const { return 2 * n + 2 + n * k; }
    long sg() const { return 2 * n + 2 + 2 * n * k; }
    long size() const { return 2 * n + 2 + 2 * n * k + k; }
};

Vec rhs(const Hamiltonian& H, const Layout& L, const Vec& y)
{
    const int n = L.n, k = L.k;
    const Vec x = y.segment(L.x(), n), p = y.segment(L.p(), n);
    Vec f(L.size());
    if (k == 0) {
        const Vec hp = H.grad_p(x, p);
        f.segment(L.x(), n) = hp;
        f.segment(L.p(), n) = -H.grad_x(x, p);
        f(L.s()) = p.dot(hp);
        f(L.th()) = H.h1(x, p);
        return f;
    }
    const SymbolJet j = H.jet(x, p);
    const Eigen::Map<const Mat> mx(y.data() + L.mx(), n, k), mp(y.data() + L.mp(), n, k);
    const Mat dxdt = j.hxp.transpose() * mx + j.hpp * mp;
    f.segment(L.x(), n) = j.hp;
    f.segment(L.p(), n) = -j.hx;
    f(L.s()) = p.dot(j.hp);
    f(L.th()) = H.h1(x, p);
    Eigen::Map<Mat>(f.data() + L.mx(), n, k) = dxdt;
    Eigen::Map<Mat>(f.data() + L.mp(), n, k) = -(j.hxx * mx + j.hxp * mp);
    f.segment(L.sg(), k) = mp.transpose() * j.hp + dxdt.transpose() * p;
    return f;
}

struct Sample {
    double t = 0;
    double det = 0;
    double ratio = 0;  // smallest over largest singular value
};

}  // namespace

std::string_view to_string(EventKind kind) { return kind == EventKind::turning ? "turning" : "focal"; }

Vec Ray::packed_at(double t) const
{
    if (segments_.empty() || t <= segments_.front().t0) {
        const Layout L{n_, k_};
        const RayState& s = nodes_.front();
        Vec y(L.size());
        y.segment(L.x(), n_) = s.x;
        y.segment(L.p(), n_) = s.p;
        y(L.s()) = s.action;
        y(L.th()) = s.theta;
        Eigen::Map<Mat>(y.data() + L.mx(), n_, k_) = s.dx;
        Eigen::Map<Mat>(y.data() + L.mp(), n_, k_) = s.dp;
        y.segment(L.sg(), k_) = s.action_grad;
        return y;
    }
    auto it = std::upper_bound(segments_.begin(), segments_.end(), t,
                               [](double v, const Segment& s) { return v < s.t0; });
    const Segment& seg = *std::prev(it);
    const double th = std::clamp((t - seg.t0) / seg.step, 0.0, 1.0), th1 = 1.0 - th;
    const auto& r = seg.coef;
    return r[0] + th * (r[1] + th1 * (r[2] + th * (r[3] + th1 * r[4])));
}

RayState Ray::unpack(double t, const Vec& y) const
{
    const Layout L{n_, k_};
    RayState s;
    s.t = t;
    s.x = y.segment(L.x(), n_);
    s.p = y.segment(L.p(), n_);
    s.action = y(L.s());
    s.theta = y(L.th());
    s.dx = Eigen::Map<const Mat>(y.data() + L.mx(), n_, k_);
    s.dp = Eigen::Map<const Mat>(y.data() + L.mp(), n_, k_);
    s.action_grad = y.segment(L.sg(), k_);
    s.maslov = maslov_before(t);
    return s;
}

RayState Ray::at(double t) const
{
    if (t < 0 || t > t_end() * (1 + 1e-14) + 1e-300) throw NumericError("Ray::at: time outside the integrated interval");
    return unpack(t, packed_at(t));
}

int Ray::maslov_before(double t) const
{
    int m = 0;
    for (const auto& e : events_)
        if (e.t < t) m += e.multiplicity;
    return m;
}

double Ray::flow_determinant(double t) const
{
    if (k_ != n_ - 1) throw NumericError("flow_determinant needs n - 1 transverse directions");
    const RayState s = at(t);
    Mat a(n_, n_);
    a.col(0) = symbol_->grad_p(s.x, s.p);
    a.rightCols(k_) = s.dx;
    return a.determinant();
}

namespace {

struct EventProbe {
    const Ray& ray;
    const Hamiltonian& H;

    Sample operator()(double t) const
    {
        const RayState s = ray.at(t);
        const int n = ray.dim();
        Mat a(n, n);
        a.col(0) = H.grad_p(s.x, s.p);
        a.rightCols(n - 1) = s.dx;
        Eigen::JacobiSVD<Mat> svd(a);
        const Vec sv = svd.singularValues();
        return {t, a.determinant(), sv(0) > 0 ? sv(n - 1) / sv(0) : 0.0};
    }

    ConjugateEvent classify(double t, double rank_tol) const
    {
        const RayState s = ray.at(t);
        const int n = ray.dim();
        const Vec xdot = H.grad_p(s.x, s.p), pdot = -H.grad_x(s.x, s.p);
        Mat a(n, n);
        a.col(0) = xdot;
        a.rightCols(n - 1) = s.dx;
        Eigen::JacobiSVD<Mat> svd(a);
        const Vec sv = svd.singularValues();
        int mult = 0;
        for (long i = 0; i < sv.size(); ++i)
            if (sv(i) < rank_tol * sv(0)) ++mult;
        const double speed = std::sqrt(xdot.squaredNorm() + pdot.squaredNorm());
        const EventKind kind = xdot.norm() < 1e-6 * speed ? EventKind::turning : EventKind::focal;
        return {t, std::max(mult, 1), kind};
    }
};

}  // namespace

Ray integrate_ray(const Hamiltonian& H, const Vec& x0, const Vec& p0, double t_max, const Mat& dx0, const Mat& dp0,
                  const RayOptions& opt, double action0, const Vec& action_grad0)
{
    const int n = H.dim();
    if (x0.size() != n || p0.size() != n) throw ConfigError("integrate_ray: initial point has the wrong dimension");
    if (!(opt.tol > 0)) throw ConfigError("integrate_ray: tolerance must be positive");
    if (!(t_max >= 0)) throw ConfigError("integrate_ray: t_max must be nonnegative");
    const int k = static_cast<int>(dx0.cols());
    if (dp0.cols() != k || (k > 0 && (dx0.rows() != n || dp0.rows() != n)))
        throw ConfigError("integrate_ray: tangent blocks must be n x k");
    if (k > 0) {
        Mat stacked(2 * n, k);
        stacked << dx0, dp0;
        Eigen::JacobiSVD<Mat> svd(stacked);
        const Vec sv = svd.singularValues();
        if (sv(k - 1) <= 1e-12 * sv(0)) throw ConfigError("integrate_ray: tangent directions are linearly dependent");
    }
    if (!std::isfinite(H.h0(x0, p0))) throw NumericError("integrate_ray: H0 is not finite at the initial point");

    Ray ray;
    ray.n_ = n;
    ray.k_ = k;
    ray.symbol_ = std::make_shared<const Hamiltonian>(H);
    const Layout L{n, k};

    RayState s0;
    s0.x = x0;
    s0.p = p0;
    s0.action = action0;
    s0.dx = k > 0 ? dx0 : Mat(n, 0);
    s0.dp = k > 0 ? dp0 : Mat(n, 0);
    s0.action_grad = action_grad0.size() == k ? action_grad0 : Vec::Zero(k);
    ray.nodes_.push_back(s0);
    Vec y = ray.packed_at(0.0);

    const double tol = opt.tol;
    double t = 0, step = std::min(opt.initial_step, t_max);
    Vec k1 = rhs(H, L, y);
    std::size_t steps = 0;
    while (t < t_max) {
        if (++steps > opt.max_steps) throw NumericError("integrate_ray: step budget exhausted");
        if (step < 1e-14 * std::max(1.0, std::abs(t)))
            throw NumericError("integrate_ray: step size collapse near t = " + std::to_string(t));
        if (t + step > t_max) step = t_max - t;
        const double hs = step;
        const Vec k2 = rhs(H, L, y + hs * a21 * k1);
        const Vec k3 = rhs(H, L, y + hs * (a31 * k1 + a32 * k2));
        const Vec k4 = rhs(H, L, y + hs * (a41 * k1 + a42 * k2 + a43 * k3));
        const Vec k5 = rhs(H, L, y + hs * (a51 * k1 + a52 * k2 + a53 * k3 + a54 * k4));
        const Vec k6 = rhs(H, L, y + hs * (a61 * k1 + a62 * k2 + a63 * k3 + a64 * k4 + a65 * k5));
        const Vec y1 = y + hs * (a71 * k1 + a73 * k3 + a74 * k4 + a75 * k5 + a76 * k6);
        const Vec k7 = rhs(H, L, y1);
        const Vec err = hs * (e1 * k1 + e3 * k3 + e4 * k4 + e5 * k5 + e6 * k6 + e7 * k7);
        double norm = 0;
        for (long i = 0; i < err.size(); ++i) {
            const double sc = tol + tol * std::max(std::abs(y(i)), std::abs(y1(i)));
            norm += (err(i) / sc) * (err(i) / sc);
        }
        norm = std::sqrt(norm / static_cast<double>(err.size()));
        if (!std::isfinite(norm)) {
            step *= 0.25;
            continue;
        }
        if (norm <= 1.0) {
            Ray::Segment seg;
            seg.t0 = t;
            seg.step = hs;
            const Vec ydiff = y1 - y;
            const Vec bspl = hs * k1 - ydiff;
            seg.coef[0] = y;
            seg.coef[1] = ydiff;
            seg.coef[2] = bspl;
            seg.coef[3] = ydiff - hs * k7 - bspl;
            seg.coef[4] = hs * (d1 * k1 + d3 * k3 + d4 * k4 + d5 * k5 + d6 * k6 + d7 * k7);
            ray.segments_.push_back(std::move(seg));
            t = (t + hs >= t_max) ? t_max : t + hs;
            y = y1;
            k1 = k7;
            ray.nodes_.push_back(ray.unpack(t, y));
        }
        const double fac = norm == 0 ? 10.0 : std::clamp(0.9 * std::pow(norm, -0.2), 0.2, 10.0);
        step = hs * (norm <= 1.0 ? fac : std::min(fac, 1.0));
    }

    if (opt.track_events && k == n - 1 && n >= 2 && !ray.segments_.empty()) {
        const EventProbe probe{ray, H};
        std::vector<Sample> samples;
        samples.push_back(probe(0.0));
        for (const auto& seg : ray.segments_)
            for (int j = 1; j <= 8; ++j) samples.push_back(probe(seg.t0 + seg.step * j / 8.0));

        ray.degenerate_ = std::all_of(samples.begin() + 1, samples.end(),
                                      [&](const Sample& s) { return s.ratio < opt.rank_tol; });
        if (ray.degenerate_) return ray;
        std::vector<ConjugateEvent> events;
        std::vector<bool> near_sign_change(samples.size(), false);
        for (std::size_t i = 1; i < samples.size(); ++i) {
            if (!(samples[i - 1].det * samples[i].det < 0)) continue;
            near_sign_change[i - 1] = near_sign_change[i] = true;
            double a = samples[i - 1].t, b = samples[i].t;
            double fa = samples[i - 1].det;
            while (b - a > 1e-14 * std::max(1.0, std::abs(b))) {
                const double m = 0.5 * (a + b);
                const double fm = probe(m).det;
                if (fm == 0) {
                    a = b = m;
                    break;
                }
                if ((fm < 0) == (fa < 0)) {
                    a = m;
                    fa = fm;
                } else {
                    b = m;
                }
            }
            const ConjugateEvent e = probe.classify(0.5 * (a + b), opt.rank_tol);
            if (e.multiplicity % 2 == 0)
                throw CausticError("degenerate caustic, unsupported: even rank drop with a sign change at t = " +
                                   std::to_string(e.t));
            events.push_back(e);
        }
        // zeros that touch without crossing: the determinant keeps its sign
        for (std::size_t i = 1; i + 1 < samples.size(); ++i) {
            if (near_sign_change[i]) continue;
            if (!(samples[i].ratio <= samples[i - 1].ratio && samples[i].ratio <= samples[i + 1].ratio)) continue;
            constexpr double g = 0.6180339887498949;
            double a = samples[i - 1].t, b = samples[i + 1].t;
            double c = b - g * (b - a), d = a + g * (b - a);
            double fc = probe(c).ratio, fd = probe(d).ratio;
            while (b - a > 1e-13 * std::max(1.0, std::abs(b))) {
                if (fc < fd) {
                    b = d;
                    d = c;
                    fd = fc;
                    c = b - g * (b - a);
                    fc = probe(c).ratio;
                } else {
                    a = c;
                    c = d;
                    fc = fd;
                    d = a + g * (b - a);
                    fd = probe(d).ratio;
                }
            }
            const double tm = 0.5 * (a + b);
            if (probe(tm).ratio >= opt.rank_tol) continue;
            const ConjugateEvent e = probe.classify(tm, opt.rank_tol);
            if (e.multiplicity % 2 == 1)
                throw CausticError("degenerate caustic, unsupported: tangential zero of the flow determinant at t = " +
                                   std::to_string(tm));
            bool duplicate = false;
            for (const auto& prev : events) duplicate = duplicate || std::abs(prev.t - tm) < 1e-9;
            if (!duplicate) events.push_back(e);
        }
        std::sort(events.begin(), events.end(), [](const auto& l, const auto& r) { return l.t < r.t; });
        ray.events_ = std::move(events);
        for (auto& node : ray.nodes_) node.maslov = ray.maslov_before(node.t);
    }
    return ray;
}

ExpMap exp_map(const Hamiltonian& H, const Vec& x0, const Vec& eta, double t, double tol)
{
    if (!(t >= 0)) throw ConfigError("exp_map: t must be nonnegative");
    const int n = H.dim();
    RayOptions opt;
    opt.tol = tol;
    opt.track_events = false;
    const Ray ray = integrate_ray(H, x0, eta, t, Mat::Zero(n, n), Mat::Identity(n, n), opt);
    const RayState& end = ray.nodes().back();
    return {end.x, end.dx};
}

double nontrapping_escape_time(const Hamiltonian& H, std::span<const PhasePoint> level, double radius, double horizon,
                               double tol)
{
    if (level.empty()) throw ConfigError("nontrapping_escape_time: empty level set sample");
    if (!(radius > 0) || !(horizon > 0)) throw ConfigError("nontrapping_escape_time: radius and horizon must be positive");
    const int n = H.dim();
    RayOptions opt;
    opt.tol = tol;
    opt.track_events = false;
    const auto exits = parallel_map(level.size(), [&](std::size_t i) {
        const Ray ray = integrate_ray(H, level[i].x, level[i].p, horizon, Mat(n, 0), Mat(n, 0), opt);
        if (ray.nodes().back().x.norm() <= radius)
            throw HypothesisError("non-trapping violated: a ray from the level set is still within radius " +
                                  std::to_string(radius) + " at the horizon t = " + std::to_string(horizon));
        // last crossing from inside to outside among dense samples, then bisection
        const auto& nodes = ray.nodes();
        double a = -1, b = -1;
        bool was_inside = nodes.front().x.norm() <= radius;
        double prev = 0;
        for (std::size_t s = 0; s + 1 < nodes.size(); ++s) {
            const double t0 = nodes[s].t, t1 = nodes[s + 1].t;
            for (int j = 1; j <= 8; ++j) {
                const double tj = t0 + (t1 - t0) * j / 8.0;
                const bool in = ray.at(tj).x.norm() <= radius;
                if (was_inside && !in) {
                    a = prev;
                    b = tj;
                }
                was_inside = in;
                prev = tj;
            }
        }
        if (a < 0) return 0.0;
        while (b - a > 1e-13 * std::max(1.0, b)) {
            const double m = 0.5 * (a + b);
            (ray.at(m).x.norm() <= radius ? a : b) = m;
        }
        return b;
    });
    return *std::max_element(exits.begin(), exits.end());
}

}  // namespace scg
