#include "scg/hamiltonians.hpp"

#include <cmath>
#include <limits>
#include <random>
#include <utility>

namespace scg {

namespace {

double fd_step(double coord)
{
    return std::cbrt(std::numeric_limits<double>::epsilon()) * std::max(1.0, std::abs(coord));
}

Vec unit_axis(int n, int i)
{
    Vec e = Vec::Zero(n);
    e(i) = 1.0;
    return e;
}

}  // namespace

std::string_view to_string(HamiltonianKind kind)
{
    switch (kind) {
    case HamiltonianKind::free: return "free";
    case HamiltonianKind::helmholtz_index: return "helmholtz_index";
    case HamiltonianKind::schrodinger: return "schrodinger";
    case HamiltonianKind::water_wave: return "water_wave";
    case HamiltonianKind::model_dxn: return "model_dxn";
    case HamiltonianKind::custom: return "custom";
    }
    return "unknown";
}

HamiltonianKind parse_hamiltonian_kind(std::string_view name)
{
    for (auto k : {HamiltonianKind::free, HamiltonianKind::helmholtz_index, HamiltonianKind::schrodinger,
                   HamiltonianKind::water_wave, HamiltonianKind::model_dxn, HamiltonianKind::custom}) {
        if (to_string(k) == name) return k;
    }
    throw ConfigError("unknown hamiltonian kind '" + std::string(name) + "'");
}

IndexProfile constant_index(double n0)
{
    if (!(n0 > 0)) throw ConfigError("index must be positive, got " + std::to_string(n0));
    IndexProfile ip;
    ip.value = [n0](const Vec&) { return n0; };
    ip.gradient = [](const Vec& x) { return Vec(Vec::Zero(x.size())); };
    ip.hessian = [](const Vec& x) { return Mat(Mat::Zero(x.size(), x.size())); };
    ip.radial = true;
    ip.constant = true;
    return ip;
}

IndexProfile fisheye_index(double n0, double a)
{
    if (!(n0 > 0) || !(a > 0)) throw ConfigError("fish-eye profile needs n0 > 0 and a > 0");
    const double a2 = a * a;
    IndexProfile ip;
    ip.value = [=](const Vec& x) { return n0 / (1.0 + x.squaredNorm() / a2); };
    ip.gradient = [=](const Vec& x) {
        const double q = 1.0 + x.squaredNorm() / a2;
        return Vec(-2.0 * n0 / (a2 * q * q) * x);
    };
    ip.hessian = [=](const Vec& x) {
        const double q = 1.0 + x.squaredNorm() / a2;
        const long n = x.size();
        Mat hess = -2.0 * n0 / (a2 * q * q) * Mat::Identity(n, n);
        hess += 8.0 * n0 / (a2 * a2 * q * q * q) * (x * x.transpose());
        return hess;
    };
    ip.radial = true;
    return ip;
}

Potential zero_potential()
{
    Potential v;
    v.value = [](const Vec&) { return 0.0; };
    v.gradient = [](const Vec& x) { return Vec(Vec::Zero(x.size())); };
    v.hessian = [](const Vec& x) { return Mat(Mat::Zero(x.size(), x.size())); };
    return v;
}

Potential harmonic_potential(double omega2)
{
    Potential v;
    v.value = [omega2](const Vec& x) { return omega2 * x.squaredNorm(); };
    v.gradient = [omega2](const Vec& x) { return Vec(2.0 * omega2 * x); };
    v.hessian = [omega2](const Vec& x) { return Mat(2.0 * omega2 * Mat::Identity(x.size(), x.size())); };
    return v;
}

Hamiltonian::Hamiltonian(int dim, HamiltonianKind kind, Parts parts, double energy,
                         std::optional<double> homogeneity, bool conic, bool x_independent)
    : dim_(dim), kind_(kind), parts_(std::move(parts)), energy_(energy), homogeneity_(homogeneity),
      conic_(conic), x_independent_(x_independent)
{
    if (dim_ < 1) throw ConfigError("hamiltonian dimension must be positive");
    if (!parts_.h0 || !parts_.grad_x || !parts_.grad_p) throw ConfigError("hamiltonian needs h0 and both gradients");
    if (!parts_.h1) parts_.h1 = [](const Vec&, const Vec&) { return 0.0; };
}

void Hamiltonian::require_regular(const Vec& p) const
{
    if (conic_ && p.norm() < p_min_) throw NumericError("momentum below p_min on a conic symbol");
}

double Hamiltonian::h0(const Vec& x, const Vec& p) const
{
    require_regular(p);
    return parts_.h0(x, p);
}

double Hamiltonian::h1(const Vec& x, const Vec& p) const { return parts_.h1(x, p); }

Vec Hamiltonian::grad_x(const Vec& x, const Vec& p) const
{
    require_regular(p);
    return parts_.grad_x(x, p);
}

Vec Hamiltonian::grad_p(const Vec& x, const Vec& p) const
{
    require_regular(p);
    return parts_.grad_p(x, p);
}

SymbolJet Hamiltonian::jet(const Vec& x, const Vec& p) const
{
    require_regular(p);
    SymbolJet j;
    j.h0 = parts_.h0(x, p);
    j.hx = parts_.grad_x(x, p);
    j.hp = parts_.grad_p(x, p);
    const int n = dim_;
    if (parts_.hessians) {
        j.hxx.resize(n, n);
        j.hxp.resize(n, n);
        j.hpp.resize(n, n);
        parts_.hessians(x, p, j.hxx, j.hxp, j.hpp);
        return j;
    }
    j.hxx.resize(n, n);
    j.hxp.resize(n, n);
    j.hpp.resize(n, n);
    for (int i = 0; i < n; ++i) {
        const double dx = fd_step(x(i));
        const Vec e = unit_axis(n, i);
        const Vec xp = x + dx * e, xm = x - dx * e;
        j.hxx.col(i) = (parts_.grad_x(xp, p) - parts_.grad_x(xm, p)) / (2 * dx);
        j.hxp.row(i) = ((parts_.grad_p(xp, p) - parts_.grad_p(xm, p)) / (2 * dx)).transpose();
        const double dp = fd_step(p(i));
        j.hpp.col(i) = (parts_.grad_p(x, p + dp * e) - parts_.grad_p(x, p - dp * e)) / (2 * dp);
    }
    j.hxx = 0.5 * (j.hxx + j.hxx.transpose()).eval();
    j.hpp = 0.5 * (j.hpp + j.hpp.transpose()).eval();
    return j;
}

double ParamSet::number(const std::string& key, double fallback) const
{
    auto it = numbers.find(key);
    return it == numbers.end() ? fallback : it->second;
}

std::string ParamSet::word(const std::string& key, const std::string& fallback) const
{
    auto it = words.find(key);
    return it == words.end() ? fallback : it->second;
}

Hamiltonian free_hamiltonian(int dim, double energy)
{
    Hamiltonian::Parts parts;
    parts.h0 = [](const Vec&, const Vec& p) { return p.squaredNorm(); };
    parts.grad_x = [](const Vec& x, const Vec&) { return Vec(Vec::Zero(x.size())); };
    parts.grad_p = [](const Vec&, const Vec& p) { return Vec(2.0 * p); };
    parts.hessians = [](const Vec&, const Vec& p, Mat& hxx, Mat& hxp, Mat& hpp) {
        const long n = p.size();
        hxx.setZero(n, n);
        hxp.setZero(n, n);
        hpp = 2.0 * Mat::Identity(n, n);
    };
    return Hamiltonian(dim, HamiltonianKind::free, std::move(parts), energy, 2.0, false, true);
}

Hamiltonian helmholtz_hamiltonian(int dim, IndexProfile index, double energy)
{
    const bool flat = index.constant;
    Hamiltonian::Parts parts;
    auto n_of = index.value;
    auto dn_of = index.gradient;
    auto d2n_of = index.hessian;
    parts.h0 = [n_of](const Vec& x, const Vec& p) { return p.norm() / n_of(x); };
    parts.grad_x = [n_of, dn_of](const Vec& x, const Vec& p) {
        const double n = n_of(x);
        return Vec(-p.norm() / (n * n) * dn_of(x));
    };
    parts.grad_p = [n_of](const Vec& x, const Vec& p) { return Vec(p / (p.norm() * n_of(x))); };
    parts.hessians = [n_of, dn_of, d2n_of](const Vec& x, const Vec& p, Mat& hxx, Mat& hxp, Mat& hpp) {
        const long dim = p.size();
        const double s = p.norm();
        const Vec u = p / s;
        const double n = n_of(x);
        const Vec dn = dn_of(x);
        hpp = (Mat::Identity(dim, dim) - u * u.transpose()) / (s * n);
        hxp = -(dn * u.transpose()) / (n * n);
        hxx = s * (2.0 * (dn * dn.transpose()) / (n * n * n) - d2n_of(x) / (n * n));
    };
    return Hamiltonian(dim, HamiltonianKind::helmholtz_index, std::move(parts), energy, 1.0, true, flat);
}

Hamiltonian schrodinger_hamiltonian(int dim, Potential v, double particle_energy)
{
    Hamiltonian::Parts parts;
    auto V = v.value;
    auto dV = v.gradient;
    auto d2V = v.hessian;
    parts.h0 = [V, particle_energy](const Vec& x, const Vec& p) { return p.squaredNorm() + V(x) - particle_energy; };
    parts.grad_x = [dV](const Vec& x, const Vec&) { return dV(x); };
    parts.grad_p = [](const Vec&, const Vec& p) { return Vec(2.0 * p); };
    parts.hessians = [d2V](const Vec& x, const Vec& p, Mat& hxx, Mat& hxp, Mat& hpp) {
        const long n = p.size();
        hxx = d2V(x);
        hxp.setZero(n, n);
        hpp = 2.0 * Mat::Identity(n, n);
    };
    return Hamiltonian(dim, HamiltonianKind::schrodinger, std::move(parts), 0.0, std::nullopt, false, false);
}

Hamiltonian water_wave_hamiltonian(int dim, double depth, double frequency)
{
    if (!(depth > 0)) throw ConfigError("water depth must be positive, got " + std::to_string(depth));
    const double D = depth;
    // f(s) = s tanh(sD) is even in s, so H0 is smooth at p = 0; the s -> 0 limits are taken explicitly.
    auto f1_over_s = [D](double s) {
        if (s * D < 1e-4) return 2.0 * D * (1.0 - (2.0 / 3.0) * s * s * D * D);
        const double th = std::tanh(s * D), sech2 = 1.0 - th * th;
        return (th + s * D * sech2) / s;
    };
    auto f2 = [D](double s) {
        const double th = std::tanh(s * D), sech2 = 1.0 - th * th;
        return 2.0 * D * sech2 * (1.0 - s * D * th);
    };
    Hamiltonian::Parts parts;
    parts.h0 = [D, frequency](const Vec&, const Vec& p) {
        const double s = p.norm();
        return s * std::tanh(s * D) - frequency;
    };
    parts.grad_x = [](const Vec& x, const Vec&) { return Vec(Vec::Zero(x.size())); };
    parts.grad_p = [f1_over_s](const Vec&, const Vec& p) { return Vec(f1_over_s(p.norm()) * p); };
    parts.hessians = [f1_over_s, f2](const Vec&, const Vec& p, Mat& hxx, Mat& hxp, Mat& hpp) {
        const long n = p.size();
        const double s = p.norm();
        hxx.setZero(n, n);
        hxp.setZero(n, n);
        const double g = f1_over_s(s);
        if (s == 0.0) {
            hpp = g * Mat::Identity(n, n);
            return;
        }
        const Vec u = p / s;
        hpp = f2(s) * (u * u.transpose()) + g * (Mat::Identity(n, n) - u * u.transpose());
    };
    return Hamiltonian(dim, HamiltonianKind::water_wave, std::move(parts), 0.0, std::nullopt, false, true);
}

Hamiltonian model_dxn_hamiltonian(int dim)
{
    Hamiltonian::Parts parts;
    parts.h0 = [](const Vec&, const Vec& p) { return p(p.size() - 1); };
    parts.grad_x = [](const Vec& x, const Vec&) { return Vec(Vec::Zero(x.size())); };
    parts.grad_p = [](const Vec&, const Vec& p) { return unit_axis(static_cast<int>(p.size()), static_cast<int>(p.size()) - 1); };
    parts.hessians = [](const Vec&, const Vec& p, Mat& hxx, Mat& hxp, Mat& hpp) {
        const long n = p.size();
        hxx.setZero(n, n);
        hxp.setZero(n, n);
        hpp.setZero(n, n);
    };
    return Hamiltonian(dim, HamiltonianKind::model_dxn, std::move(parts), 0.0, 1.0, false, true);
}

Hamiltonian custom_hamiltonian(int dim, Hamiltonian::Parts parts, double energy, std::optional<double> homogeneity)
{
    return Hamiltonian(dim, HamiltonianKind::custom, std::move(parts), energy, homogeneity, false, false);
}

Hamiltonian make_builtin(HamiltonianKind kind, const ParamSet& params)
{
    const int dim = static_cast<int>(params.number("dim", 2));
    if (dim < 1 || dim > 3) throw ConfigError("dim must be 1, 2 or 3");
    auto finish = [&](Hamiltonian H) {
        H.set_p_min(params.number("p_min", 1e-8));
        return H;
    };
    switch (kind) {
    case HamiltonianKind::free:
        return finish(free_hamiltonian(dim, params.number("energy", 1.0)));
    case HamiltonianKind::helmholtz_index: {
        const std::string profile = params.word("index.profile", "constant");
        IndexProfile ip;
        if (profile == "constant") ip = constant_index(params.number("index.n0", 1.0));
        else if (profile == "fisheye") ip = fisheye_index(params.number("index.n0", 2.0), params.number("index.a", 1.0));
        else throw ConfigError("unknown index profile '" + profile + "'");
        return finish(helmholtz_hamiltonian(dim, std::move(ip), params.number("energy", 1.0)));
    }
    case HamiltonianKind::schrodinger: {
        const std::string pot = params.word("potential", "harmonic");
        Potential v;
        if (pot == "harmonic") v = harmonic_potential(params.number("potential.omega2", 1.0));
        else if (pot == "zero") v = zero_potential();
        else throw ConfigError("unknown potential '" + pot + "'");
        return finish(schrodinger_hamiltonian(dim, std::move(v), params.number("energy", 1.0)));
    }
    case HamiltonianKind::water_wave:
        return finish(water_wave_hamiltonian(dim, params.number("depth", 1.0), params.number("energy", 1.0)));
    case HamiltonianKind::model_dxn:
        return finish(model_dxn_hamiltonian(dim));
    case HamiltonianKind::custom:
        throw ConfigError("custom symbols are supplied programmatically, not by name");
    }
    throw ConfigError("unknown hamiltonian kind");
}

Hamiltonian make_builtin(std::string_view kind, const ParamSet& params)
{
    return make_builtin(parse_hamiltonian_kind(kind), params);
}

GradientReport check_gradients(const Hamiltonian& H, std::span<const PhasePoint> samples, double tol)
{
    GradientReport rep;
    const int n = H.dim();
    for (const auto& s : samples) {
        try {
            H.require_regular(s.p);
            const Vec gx = H.grad_x(s.x, s.p), gp = H.grad_p(s.x, s.p);
            const double scale = std::max({gx.lpNorm<Eigen::Infinity>(), gp.lpNorm<Eigen::Infinity>(), 1e-12});
            double dev = 0;
            for (int i = 0; i < n; ++i) {
                const Vec e = unit_axis(n, i);
                const double dx = fd_step(s.x(i)), dp = fd_step(s.p(i));
                const double fx = (H.h0(s.x + dx * e, s.p) - H.h0(s.x - dx * e, s.p)) / (2 * dx);
                const double fp = (H.h0(s.x, s.p + dp * e) - H.h0(s.x, s.p - dp * e)) / (2 * dp);
                dev = std::max({dev, std::abs(fx - gx(i)) / scale, std::abs(fp - gp(i)) / scale});
            }
            rep.max_deviation = std::max(rep.max_deviation, dev);
            ++rep.evaluated;
        } catch (const NumericError&) {
            ++rep.skipped;
        }
    }
    rep.pass = rep.evaluated > 0 && rep.max_deviation <= tol;
    return rep;
}

namespace {

std::vector<PhasePoint> random_points(int n, int count, std::uint64_t seed)
{
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> ux(-1.0, 1.0), up(-2.0, 2.0);
    std::vector<PhasePoint> pts;
    pts.reserve(count);
    for (int k = 0; k < count; ++k) {
        PhasePoint pt{Vec(n), Vec(n)};
        for (int i = 0; i < n; ++i) {
            pt.x(i) = ux(rng);
            pt.p(i) = up(rng);
        }
        pts.push_back(std::move(pt));
    }
    return pts;
}

}  // namespace

GradientReport check_gradients(const Hamiltonian& H, int samples, double tol, std::uint64_t seed)
{
    if (samples < 1) throw ConfigError("gradient check needs at least one sample");
    const auto pts = random_points(H.dim(), samples, seed);
    return check_gradients(H, pts, tol);
}

double euler_identity_deviation(const Hamiltonian& H, int samples, std::uint64_t seed)
{
    if (!H.homogeneity()) throw ConfigError("euler identity needs a homogeneity degree");
    const double m = *H.homogeneity();
    double dev = 0;
    for (const auto& s : random_points(H.dim(), samples, seed)) {
        if (s.p.norm() < 1e-3) continue;
        dev = std::max(dev, std::abs(s.p.dot(H.grad_p(s.x, s.p)) - m * H.h0(s.x, s.p)));
    }
    return dev;
}

}  // namespace scg
