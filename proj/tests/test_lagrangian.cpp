#include "scg/lagrangian.hpp"

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

GraphPhase quadratic_graph(const Mat& B, const Vec& a)
{
    return {[B, a](const Vec& e) { return 0.5 * e.dot(B * e) + a.dot(e); },
            [B, a](const Vec& e) { return Vec(B * e + a); },
            [B](const Vec&) { return B; }};
}

LevelOptions coarse(int nodes = 64)
{
    LevelOptions o;
    o.psi_nodes = nodes;
    return o;
}

LevelOptions model_box(int nodes = 17)
{
    LevelOptions o;
    o.tau_lo = -1;
    o.tau_hi = 1;
    o.psi_nodes = nodes;
    o.psi_lo = Vec::Constant(1, -1.0);
    o.psi_hi = Vec::Constant(1, 1.0);
    return o;
}

}  // namespace

TEST_CASE("unit cosphere over the origin")
{
    const auto L = intersect_level(SourceLagrangian::vertical_fiber(v2(0, 0)), unit_index(), 1.0, coarse());
    CHECK(L.samples().size() == 64);
    CHECK(L.margin() == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(L.max_residual() <= 1e-10);
    for (const auto& lp : L.samples()) {
        CHECK(std::abs(lp.tau - 1.0) < 1e-12);
        CHECK(lp.z.x.norm() == 0.0);
        CHECK(std::abs(lp.z.p.norm() - 1.0) < 1e-12);
    }
}

TEST_CASE("quadratic level over a flat graph")
{
    const auto graph = SourceLagrangian::tilted_graph(v2(0, 0), quadratic_graph(Mat::Zero(2, 2), v2(0, 0)));
    const auto L = intersect_level(graph, schrodinger_hamiltonian(2, zero_potential(), 1.0), 0.0, coarse());
    CHECK(L.margin() == doctest::Approx(2.0).epsilon(1e-12));
    for (const auto& lp : L.samples()) {
        CHECK(lp.z.x.norm() == 0.0);
        CHECK(std::abs(lp.z.p.norm() - 1.0) < 1e-12);
    }
}

TEST_CASE("a linear generating function translates the base point")
{
    const auto graph = SourceLagrangian::tilted_graph(v2(0, 0), quadratic_graph(Mat::Zero(2, 2), v2(-0.5, 0.25)));
    const auto L = intersect_level(graph, unit_index(), 1.0, coarse(16));
    for (const auto& lp : L.samples()) {
        CHECK((lp.z.x - v2(0.5, -0.25)).norm() < 1e-14);
        // eikonal S - eta grad S vanishes for linear S
        CHECK(std::abs(lp.action) < 1e-14);
    }
}

TEST_CASE("cone level for the fish-eye index")
{
    const auto cone = SourceLagrangian::bessel_cone(2);
    const auto L = intersect_level(cone, fisheye(), 1.0, coarse(32));
    // |omega| / n(phi omega) = (1 + phi^2) / 2 = 1
    for (const auto& lp : L.samples()) {
        CHECK(std::abs(lp.tau - 1.0) < 1e-12);
        CHECK(std::abs(lp.action - 1.0) < 1e-12);
    }
    CHECK(L.margin() == doctest::Approx(1.0).epsilon(1e-10));
}

TEST_CASE("level failures carry the hypothesis that broke")
{
    const auto fiber = SourceLagrangian::vertical_fiber(v2(0, 0));
    CHECK_THROWS_AS(intersect_level(fiber, unit_index(), 20.0, coarse(8)), HypothesisError);
    // constant symbol on the cone: every tau is a root
    CHECK_THROWS_AS(intersect_level(SourceLagrangian::bessel_cone(2), unit_index(), 1.0, coarse(8)), HypothesisError);

    // (|p| - 1)^3 crosses the level with zero slope
    Hamiltonian::Parts parts;
    parts.h0 = [](const Vec&, const Vec& p) { return std::pow(p.norm() - 1.0, 3); };
    parts.grad_x = [](const Vec& x, const Vec&) { return Vec(Vec::Zero(x.size())); };
    parts.grad_p = [](const Vec&, const Vec& p) { return Vec(3 * std::pow(p.norm() - 1.0, 2) * p / p.norm()); };
    const Hamiltonian cubic = custom_hamiltonian(2, parts, 0.0);
    LevelOptions o = coarse(8);
    o.scan = 63;  // keep tau = 1 off the scan nodes
    CHECK_THROWS_WITH_AS(intersect_level(fiber, cubic, 0.0, o), doctest::Contains("transversality"), HypothesisError);
}

TEST_CASE("flow-out of the unit-index point source is the cone of straight rays")
{
    const auto L = intersect_level(SourceLagrangian::vertical_fiber(v2(0, 0)), unit_index(), 1.0, coarse(32));
    const FlowOut F = flow_out(L, 3.0);
    REQUIRE(F.rays().size() == 32);
    for (std::size_t i = 0; i < F.rays().size(); ++i) {
        const Vec w = direction(L.samples()[i].psi);
        for (double t : {0.5, 1.5, 3.0}) {
            const RayState s = F.rays()[i].at(t);
            CHECK((s.x - t * w).norm() < 1e-9);
            CHECK((s.p - w).norm() < 1e-9);
            CHECK(std::abs(s.action - t) < 1e-9);
            CHECK(std::abs(s.p.dot(s.dx.col(0))) < 1e-8);
        }
        CHECK(F.rays()[i].events().empty());
    }
    const auto rep = eikonal_chart(F);
    CHECK(rep.accepted);
    CHECK(rep.max_residual < 1e-8);
}

TEST_CASE("model flow-out is the half-line x' = 0")
{
    const auto fiber = SourceLagrangian::vertical_fiber(v2(0, 0), ChartKind::cartesian);
    const auto L = intersect_level(fiber, model_dxn_hamiltonian(2), 0.0, model_box());
    const FlowOut F = flow_out(L, 2.0);
    for (std::size_t i = 0; i < F.rays().size(); ++i) {
        const RayState s = F.rays()[i].at(1.25);
        CHECK((s.x - v2(0, 1.25)).norm() < 1e-14);
        CHECK(s.p(1) == 0.0);
        CHECK(s.p(0) == doctest::Approx(L.samples()[i].psi(0)));
    }
}

TEST_CASE("harmonic flow-out before the turning time has no conjugate points")
{
    const auto L = intersect_level(SourceLagrangian::vertical_fiber(v2(0, 0)),
                                   schrodinger_hamiltonian(2, harmonic_potential(1.0), 1.0), 0.0, coarse(16));
    const FlowOut F = flow_out(L, 0.7);
    for (const auto& r : F.rays()) CHECK(r.events().empty());
}

TEST_CASE("clean intersection")
{
    SUBCASE("model pair")
    {
        const auto fiber = SourceLagrangian::vertical_fiber(v2(0, 0), ChartKind::cartesian);
        const FlowOut F = flow_out(intersect_level(fiber, model_dxn_hamiltonian(2), 0.0, model_box()), 1.0);
        const auto rep = check_clean_intersection(fiber, F, 17);
        CHECK(rep.pass);
        CHECK(rep.min_dimension == 1);
        CHECK(rep.flagged == 0);
    }
    SUBCASE("fiber and cone of the unit index")
    {
        const auto fiber = SourceLagrangian::vertical_fiber(v2(0, 0));
        const FlowOut F = flow_out(intersect_level(fiber, unit_index(), 1.0, coarse(16)), 1.0);
        const auto rep = check_clean_intersection(fiber, F, 16);
        CHECK(rep.pass);
        CHECK(rep.max_dimension == 1);
        // an interior slice meets itself in its whole tangent space
        const Mat b = F.tangent_space(3, 0.5);
        CHECK(intersection_dimension(b, b) == 2);
    }
    SUBCASE("explicit spans")
    {
        Mat a(4, 2), b(4, 2);
        a << 0, 0, 0, 0, 1, 0, 0, 1;  // vertical plane
        b << 1, 0, 0, 0, 0, 0, 0, 1;  // flow direction and the fibre tangent
        CHECK(intersection_dimension(a, b) == 1);
    }
}

TEST_CASE("flow-out slices are Lagrangian and match the source measure at L")
{
    for (const auto& H : {fisheye(), free_hamiltonian(2, 1.0), schrodinger_hamiltonian(2, harmonic_potential(1.0), 1.0)}) {
        const double E = H.kind() == HamiltonianKind::schrodinger ? 0.0 : 1.0;
        const auto source = SourceLagrangian::vertical_fiber(v2(0.2, 0.1));
        const auto L = intersect_level(source, H, E, coarse(12));
        const FlowOut F = flow_out(L, 1.0);
        for (std::size_t i = 0; i < F.rays().size(); ++i) {
            for (double t : {0.0, 0.3, 0.9}) {
                const Mat m = F.tangent_space(i, t);
                CHECK(std::abs(symplectic(m.col(0), m.col(1))) < 1e-8);
            }
            // omega(X_H, d/dtau) = dH0(d/dtau): the flow-out and source measures differ by the crossing rate
            const LevelPoint& lp = L.samples()[i];
            const Mat T = source.tangents(lp.tau, lp.psi);
            CHECK(std::abs(symplectic(F.tangent_space(i, 0.0).col(0), T.col(0)) - lp.crossing) < 1e-10);
        }
    }
}

TEST_CASE("eikonal charts")
{
    const std::vector<double> taus{0.5, 1.0, 2.0};
    std::vector<Vec> psis;
    for (int j = 0; j < 8; ++j) psis.push_back(Vec::Constant(1, 0.3 + j * 0.7));

    const auto cone = eikonal_chart(SourceLagrangian::bessel_cone(2), taus, psis);
    CHECK(cone.accepted);
    CHECK(cone.max_residual < 1e-12);
    CHECK(cone.values.front() == 0.5);

    const auto fiber = eikonal_chart(SourceLagrangian::vertical_fiber(v2(0, 0)), taus, psis);
    CHECK_FALSE(fiber.accepted);
    CHECK(fiber.reason.find("tau") != std::string::npos);

    Mat B(2, 2);
    B << 0.4, 0.1, 0.1, -0.3;
    const auto tilted = eikonal_chart(SourceLagrangian::tilted_graph(v2(0, 0), quadratic_graph(B, v2(0.2, 0))), taus, psis);
    CHECK(tilted.accepted);
    CHECK(tilted.max_residual < 1e-10);

    const auto conormal = eikonal_chart(SourceLagrangian::conormal(2), taus, psis);
    CHECK(conormal.max_residual < 1e-14);
    CHECK_FALSE(conormal.accepted);
}

TEST_CASE("momentum chart round trip")
{
    const auto polar = SourceLagrangian::vertical_fiber(v2(0, 0));
    double tau;
    Vec psi;
    polar.chart_coordinates(v2(-0.6, -0.8), tau, psi);
    CHECK(tau == doctest::Approx(1.0));
    CHECK((polar.momentum(tau, psi) - v2(-0.6, -0.8)).norm() < 1e-15);
    CHECK(polar.momentum_density(2.0, psi) == 2.0);

    Vec x0(3);
    x0 << 0, 0, 0;
    const auto sph = SourceLagrangian::vertical_fiber(x0);
    Vec eta(3);
    eta << 0.3, -0.4, 1.2;
    sph.chart_coordinates(eta, tau, psi);
    CHECK((sph.momentum(tau, psi) - eta).norm() < 1e-14);
    const Mat T = sph.tangents(tau, psi);
    CHECK(std::abs(T.bottomRows(3).determinant()) == doctest::Approx(sph.momentum_density(tau, psi)));
    CHECK_THROWS_AS(SourceLagrangian::bessel_cone(2).chart_coordinates(eta, tau, psi), ConfigError);
}
