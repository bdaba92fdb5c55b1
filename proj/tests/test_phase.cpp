#include "scg/oscint.hpp"
#include "scg/phase.hpp"

#include <doctest.h>

#include <cmath>
#include <numbers>

using namespace scg;
using std::numbers::pi;

namespace {

Vec v2(double a, double b)
{
    Vec v(2);
    v << a, b;
    return v;
}

Hamiltonian unit_index() { return helmholtz_hamiltonian(2, constant_index(1.0)); }
Hamiltonian fisheye() { return helmholtz_hamiltonian(2, fisheye_index(2.0, 1.0)); }
Hamiltonian harmonic() { return schrodinger_hamiltonian(2, harmonic_potential(1.0), 1.0); }

GraphPhase quadratic_graph(const Mat& B, const Vec& a)
{
    return {[B, a](const Vec& e) { return 0.5 * e.dot(B * e) + a.dot(e); },
            [B, a](const Vec& e) { return Vec(B * e + a); },
            [B](const Vec&) { return B; }};
}

GraphPhase flat_graph() { return quadratic_graph(Mat::Zero(2, 2), v2(0, 0)); }

LevelOptions polar(int nodes)
{
    LevelOptions o;
    o.psi_nodes = nodes;
    return o;
}

LevelOptions box(double lo, double hi, int nodes)
{
    LevelOptions o;
    o.psi_nodes = nodes;
    o.psi_lo = Vec::Constant(1, lo);
    o.psi_hi = Vec::Constant(1, hi);
    return o;
}

FlowOut point_source(const Hamiltonian& H, double E, const Vec& x0, double horizon, int nodes = 64)
{
    return flow_out(intersect_level(SourceLagrangian::vertical_fiber(x0), H, E, polar(nodes)), horizon);
}

// Fish-eye rays leaving (1, 0) up and to the left; they refocus at (-1, 0) at t = pi.
FlowOut fisheye_fan(double horizon)
{
    const auto fiber = SourceLagrangian::vertical_fiber(v2(1, 0), ChartKind::cartesian);
    return flow_out(intersect_level(fiber, fisheye(), 1.0, box(-0.9, -0.5, 41)), horizon);
}

// Hessian of the eikonal phase in (t, psi, r) by central differences of its gradient.
Mat fd_hessian(const FlowOut& F, const ArrivalDatum& a)
{
    const double step = 1e-5;
    auto grad = [&](double t, double psi, double r) {
        const EikonalValue v = eikonal_phase_eval(F, t, Vec::Constant(1, psi), r, a.x);
        Vec g(3);
        g << v.d_t, v.d_psi(0), v.d_r;
        return g;
    };
    Mat m(3, 3);
    const double base[3] = {a.t, a.psi(0), 1.0};
    for (int j = 0; j < 3; ++j) {
        double up[3] = {base[0], base[1], base[2]}, dn[3] = {base[0], base[1], base[2]};
        up[j] += step;
        dn[j] -= step;
        m.col(j) = (grad(up[0], up[1], up[2]) - grad(dn[0], dn[1], dn[2])) / (2 * step);
    }
    return 0.5 * (m + m.transpose());
}

}  // namespace

TEST_CASE("taylor phase at t = 0 is the initial data")
{
    Mat B(2, 2);
    B << 0.3, -0.1, -0.1, 0.2;
    const GraphPhase S = quadratic_graph(B, v2(0.1, -0.4));
    const Vec x = v2(0.7, -0.2), eta = v2(0.9, 0.6);
    for (const auto& H : {fisheye(), harmonic(), unit_index()})
        for (int order : {2, 3}) CHECK(taylor_phase(H, S, 0.0, x, eta, order) == doctest::Approx(x.dot(eta) + S.value(eta)).epsilon(1e-15));
    CHECK_THROWS_AS(taylor_phase(fisheye(), S, 0.2, x, eta), ConfigError);
    CHECK_THROWS_AS(taylor_phase(fisheye(), S, 0.01, x, eta, 4), ConfigError);
}

TEST_CASE("taylor phase of the model symbol terminates")
{
    const Hamiltonian H = model_dxn_hamiltonian(2);
    const GraphPhase S = quadratic_graph(Mat::Identity(2, 2), v2(0, 0));
    const Vec x = v2(0.4, 1.1), eta = v2(-0.3, 0.8);
    for (double t : {0.01, 0.05, 0.1}) {
        const double exact = x.dot(eta) + S.value(eta) - t * eta(1);
        CHECK(std::abs(taylor_phase(H, S, t, x, eta, 3) - exact) < 1e-15);
        CHECK(std::abs(characteristic_phase(H, S, t, x, eta) - exact) < 1e-12);
    }
}

TEST_CASE("free particle phase against the straight-line action")
{
    const Hamiltonian H = free_hamiltonian(2, 1.0);
    const Vec x = v2(0, 0), eta = v2(1, 0);
    const double t = 0.01;
    // on the level set the phase stays x eta + S
    const double taylor = taylor_phase(H, flat_graph(), t, x, eta);
    CHECK(std::abs(taylor) < 1e-5);
    CHECK(std::abs(taylor - characteristic_phase(H, flat_graph(), t, x, eta)) < 1e-5);
    // off the level the phase moves at rate E - |eta|^2
    const Vec fast = v2(1.5, 0);
    CHECK(taylor_phase(H, flat_graph(), t, x, fast) == doctest::Approx(-t * (2.25 - 1.0)).epsilon(1e-14));
}

TEST_CASE("taylor and characteristic phases overlap at fourth order")
{
    Mat B(2, 2);
    B << 0.2, 0.05, 0.05, -0.1;
    const GraphPhase S = quadratic_graph(B, v2(0, 0));
    const Vec x = v2(0.3, 0.2), eta = v2(1.0, 0.5);
    for (const auto& H : {fisheye(), harmonic()}) {
        auto err = [&](double t, int order) {
            return std::abs(taylor_phase(H, S, t, x, eta, order) - characteristic_phase(H, S, t, x, eta, 1e-13));
        };
        const double slope3 = std::log(err(0.05, 3) / err(0.01, 3)) / std::log(5.0);
        const double slope2 = std::log(err(0.05, 2) / err(0.01, 2)) / std::log(5.0);
        CHECK(slope3 >= 3.5);
        CHECK(slope2 >= 2.5);
        CHECK(slope2 < 3.5);
    }
}

TEST_CASE("eikonal phase on the flow-out")
{
    const FlowOut F = point_source(unit_index(), 1.0, v2(0, 0), 3.0, 32);
    const Vec psi = Vec::Constant(1, 0.0);
    const Ray ray = F.ray_at(psi);
    for (double t : {0.5, 1.3, 2.0}) {
        const Vec X = ray.at(t).x;
        const EikonalValue on = eikonal_phase_eval(F, t, psi, 1.0, X);
        CHECK(on.phi == doctest::Approx(t).epsilon(1e-10));
        CHECK(std::abs(on.d_t) < 1e-8);
        CHECK(std::abs(on.d_psi(0)) < 1e-8);
        CHECK(std::abs(on.d_r) < 1e-12);
        CHECK(eikonal_phase_eval(F, t, psi, 0.5, X).d_t == doctest::Approx(0.5).epsilon(1e-8));
    }
    // straight ray through (2, 0)
    const EikonalValue v = eikonal_phase_eval(F, 2.0, psi, 1.0, v2(2, 0));
    CHECK(v.phi == doctest::Approx(2.0).epsilon(1e-9));
    const Vec P = ray.at(2.0).p;
    CHECK((P - v2(1, 0)).norm() < 1e-9);
    CHECK(unit_index().h0(v2(2, 0), P) == doctest::Approx(1.0).epsilon(1e-9));

    // off the ray the r-derivative is the projected miss
    const EikonalValue off = eikonal_phase_eval(F, 2.0, psi, 1.0, v2(2.5, 0.3));
    CHECK(off.d_r == doctest::Approx(0.5).epsilon(1e-9));
    CHECK_THROWS_AS(eikonal_phase_eval(F, 3.5, psi, 1.0, v2(0, 0)), NumericError);
}

TEST_CASE("eikonal time derivative identity off the critical set")
{
    const FlowOut F = point_source(fisheye(), 1.0, v2(0.1, 0.2), 1.5, 16);
    const Vec psi = Vec::Constant(1, 1.1), x = v2(0.4, 0.9);
    const double dt = 1e-5;
    for (double r : {0.0, 0.4, 1.0})
        for (double t : {0.3, 1.0}) {
            const EikonalValue v = eikonal_phase_eval(F, t, psi, r, x);
            const double fd = (eikonal_phase_eval(F, t + dt, psi, r, x).phi - eikonal_phase_eval(F, t - dt, psi, r, x).phi) / (2 * dt);
            CHECK(std::abs(v.d_t - fd) < 1e-7);
            const double dp = 1e-5;
            const double fdpsi = (eikonal_phase_eval(F, t, Vec::Constant(1, 1.1 + dp), r, x).phi -
                                  eikonal_phase_eval(F, t, Vec::Constant(1, 1.1 - dp), r, x).phi) / (2 * dp);
            CHECK(std::abs(v.d_psi(0) - fdpsi) < 1e-7);
            // with x - X = 0 the rate is m (1 - r)
            const Vec X = F.ray_at(psi).at(t).x;
            CHECK(eikonal_phase_eval(F, t, psi, r, X).d_t == doctest::Approx(1.0 - r).epsilon(1e-8));
        }
}

TEST_CASE("single straight-ray arrival")
{
    const FlowOut F = point_source(unit_index(), 1.0, v2(0, 0), 3.0);
    const auto arrivals = find_arrivals(F, v2(1, 1));
    REQUIRE(arrivals.size() == 1);
    const ArrivalDatum& a = arrivals.front();
    CHECK(a.t == doctest::Approx(std::sqrt(2.0)).epsilon(1e-10));
    CHECK(a.psi(0) == doctest::Approx(pi / 4).epsilon(1e-10));
    CHECK(a.jacobian == doctest::Approx(std::sqrt(2.0)).epsilon(1e-9));
    CHECK(a.maslov == 0);
    CHECK(a.nondegenerate);
    CHECK(a.residual <= 1e-9);
    CHECK(a.action == doctest::Approx(std::sqrt(2.0)).epsilon(1e-10));
    CHECK((a.eta - v2(1, 1) / std::sqrt(2.0)).norm() < 1e-9);
    CHECK(a.density == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(a.crossing == doctest::Approx(1.0).epsilon(1e-12));
    // Hessian [[0, 0, -1], [0, -t, 0], [-1, 0, 0]]
    CHECK(a.signature == -1);
    CHECK(a.hessian_condition == doctest::Approx(std::sqrt(2.0)).epsilon(1e-6));
    const Mat fd = fd_hessian(F, a);
    CHECK(signature(fd) == a.signature);

    // beyond the horizon nothing is illuminated
    CHECK(find_arrivals(F, v2(3, 3)).empty());
    CHECK_THROWS_AS(find_arrivals(F, Vec::Zero(3)), ConfigError);
}

TEST_CASE("harmonic focus at the source point is degenerate")
{
    const FlowOut F = point_source(harmonic(), 0.0, v2(0, 0), 2.0, 32);
    const auto arrivals = find_arrivals(F, v2(0, 0));
    REQUIRE_FALSE(arrivals.empty());
    for (const auto& a : arrivals) {
        CHECK(a.t == doctest::Approx(pi / 2).epsilon(1e-8));
        CHECK_FALSE(a.nondegenerate);
        CHECK(std::abs(a.jacobian) < 1e-8);
    }
}

TEST_CASE("fish-eye arrival past the refocus carries one Maslov step")
{
    const FlowOut F = fisheye_fan(4.5);
    const Vec psi = Vec::Constant(1, -0.7);
    const Ray ray = F.ray_at(psi);
    const Vec focus = ray.at(pi).x;
    CHECK((focus - v2(-1, 0)).norm() < 1e-7);

    SUBCASE("before the focus")
    {
        const Vec x = ray.at(2.0).x;
        const auto arrivals = find_arrivals(F, x);
        REQUIRE(arrivals.size() == 1);
        CHECK(arrivals[0].maslov == 0);
        CHECK(arrivals[0].t == doctest::Approx(2.0).epsilon(1e-8));
        // the flow Jacobian changes sign across the fold
        CHECK(arrivals[0].jacobian * find_arrivals(F, ray.at(pi + 0.6).x)[0].jacobian < 0);
    }
    SUBCASE("after the focus")
    {
        const Vec x = ray.at(pi + 0.6).x;
        const auto arrivals = find_arrivals(F, x);
        REQUIRE(arrivals.size() == 1);
        const ArrivalDatum& a = arrivals[0];
        CHECK(a.maslov == 1);
        CHECK(a.maslov == ray.maslov_before(a.t));
        CHECK(a.t == doctest::Approx(pi + 0.6).epsilon(1e-8));
        CHECK(a.psi(0) == doctest::Approx(-0.7).epsilon(1e-8));
        CHECK(a.nondegenerate);
        const Mat fd = fd_hessian(F, a);
        CHECK(signature(fd) == a.signature);
        const Eigen::JacobiSVD<Mat> svd(fd);
        const Vec sv = svd.singularValues();
        CHECK(sv(0) / sv(2) == doctest::Approx(a.hessian_condition).epsilon(1e-3));
    }
}

TEST_CASE("momentum window filters arrivals")
{
    const FlowOut F = point_source(unit_index(), 1.0, v2(0, 0), 3.0);
    ArrivalOptions opt;
    opt.psi_lo = Vec::Constant(1, pi / 2);
    opt.psi_hi = Vec::Constant(1, pi);
    CHECK(find_arrivals(F, v2(1, 1), opt).empty());
    CHECK(find_arrivals(F, v2(-1, 1), opt).size() == 1);
    // a window straddling psi = 0
    opt.psi_lo = Vec::Constant(1, -0.5);
    opt.psi_hi = Vec::Constant(1, 0.5);
    const auto a = find_arrivals(F, v2(1, -0.2), opt);
    REQUIRE(a.size() == 1);
    CHECK(std::remainder(a[0].psi(0) + std::atan(0.2), 2 * pi) == doctest::Approx(0.0).epsilon(1e-9));
}

TEST_CASE("three-dimensional straight-ray arrival")
{
    Vec x0 = Vec::Zero(3), x(3);
    x << 0.3, -0.4, 1.2;
    const auto L = intersect_level(SourceLagrangian::vertical_fiber(x0), helmholtz_hamiltonian(3, constant_index(1.0)), 1.0, polar(24));
    const FlowOut F = flow_out(L, 2.0);
    const auto arrivals = find_arrivals(F, x);
    REQUIRE(arrivals.size() == 1);
    CHECK(arrivals[0].t == doctest::Approx(1.3).epsilon(1e-10));
    // det [w, t dw/dtheta, t dw/dphi] = t^2 sin(theta)
    const double sin_theta = std::hypot(0.3, 0.4) / 1.3;
    CHECK(std::abs(arrivals[0].jacobian) == doctest::Approx(1.69 * sin_theta).epsilon(1e-8));
}

TEST_CASE("Hamilton-Jacobi residual")
{
    CHECK(hj_residual(point_source(unit_index(), 1.0, v2(0, 0), 3.0), 64) < 1e-8);
    CHECK(hj_residual(point_source(fisheye(), 1.0, v2(0.2, -0.1), 2.5), 64) < 1e-6);

    LevelOptions o = box(-1, 1, 17);
    o.tau_lo = -1;
    o.tau_hi = 1;
    const auto fiber = SourceLagrangian::vertical_fiber(v2(0, 0), ChartKind::cartesian);
    const FlowOut model = flow_out(intersect_level(fiber, model_dxn_hamiltonian(2), 0.0, o), 2.0);
    CHECK(hj_residual(model, 64) < 1e-14);
}

TEST_CASE("criticality identities on every flow-out node")
{
    for (const auto& H : {unit_index(), fisheye()}) {
        const auto rep = criticality_identities(point_source(H, 1.0, v2(0.3, 0), 2.0, 24));
        CHECK(rep.action_rate < 1e-8);
        CHECK(rep.orthogonality < 1e-8);
    }
    CHECK_THROWS_AS(criticality_identities(point_source(harmonic(), 0.0, v2(0, 0), 1.0, 8)), ConfigError);
}

TEST_CASE("momentum determinant at the source is the squared index")
{
    for (auto [H, n0] : {std::pair{unit_index(), 1.0}, std::pair{fisheye(), 2.0}}) {
        const FlowOut F = point_source(H, 1.0, v2(0, 0), 0.5, 16);
        for (const Ray& r : F.rays()) {
            const RayState& s = r.nodes().front();
            Mat m(2, 2);
            m << s.p, s.dp.col(0);
            CHECK(m.determinant() == doctest::Approx(n0 * n0).epsilon(1e-8));
        }
    }
}
