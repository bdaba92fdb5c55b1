#include "scg/hamiltonians.hpp"

#include <doctest.h>

#include <cmath>

using namespace scg;

namespace {

Vec v2(double a, double b)
{
    Vec v(2);
    v << a, b;
    return v;
}

ParamSet params(std::initializer_list<std::pair<const std::string, double>> nums,
                std::initializer_list<std::pair<const std::string, std::string>> words = {})
{
    ParamSet ps;
    ps.numbers = nums;
    ps.words = words;
    return ps;
}

// Same symbol without the analytic second derivatives, so jet() falls back to differences.
Hamiltonian without_hessians(const Hamiltonian& H)
{
    Hamiltonian::Parts parts;
    parts.h0 = [H](const Vec& x, const Vec& p) { return H.h0(x, p); };
    parts.grad_x = [H](const Vec& x, const Vec& p) { return H.grad_x(x, p); };
    parts.grad_p = [H](const Vec& x, const Vec& p) { return H.grad_p(x, p); };
    return custom_hamiltonian(H.dim(), parts, H.energy(), H.homogeneity());
}

}  // namespace

TEST_CASE("built-in symbols evaluate to their closed forms")
{
    const auto helm = make_builtin("helmholtz_index", params({{"index.n0", 1.0}}, {{"index.profile", "constant"}}));
    CHECK(helm.h0(v2(0, 0), v2(3, 4)) == doctest::Approx(5.0).epsilon(1e-15));
    CHECK(helm.homogeneity().value() == 1.0);

    const auto schr = make_builtin("schrodinger", params({{"potential.omega2", 1.0}, {"energy", 1.0}}, {{"potential", "harmonic"}}));
    CHECK(std::abs(schr.h0(v2(0, 0), v2(1, 0))) < 1e-15);
    CHECK(schr.energy() == 0.0);

    const auto model = make_builtin("model_dxn", params({{"dim", 2}}));
    for (double x : {-1.0, 0.0, 2.5}) CHECK(model.h0(v2(x, -x), v2(0.3, -1.7)) == -1.7);

    const auto fr = make_builtin("free", params({{"energy", 1.0}}));
    CHECK(fr.homogeneity().value() == 2.0);
    CHECK(fr.h0(v2(0.1, 0.2), v2(1, 2)) == doctest::Approx(5.0));

    const auto ww = make_builtin("water_wave", params({{"depth", 2.0}, {"energy", 0.5}}));
    CHECK(ww.h0(v2(0, 0), v2(0.6, 0.8)) == doctest::Approx(std::tanh(2.0) - 0.5));
}

TEST_CASE("invalid parameters are rejected")
{
    CHECK_THROWS_AS(make_builtin("no_such_kind", {}), ConfigError);
    CHECK_THROWS_AS(make_builtin("helmholtz_index", params({{"index.n0", -1.0}})), ConfigError);
    CHECK_THROWS_AS(make_builtin("helmholtz_index", params({{"index.n0", 0.0}})), ConfigError);
    CHECK_THROWS_AS(make_builtin("water_wave", params({{"depth", 0.0}})), ConfigError);
    CHECK_THROWS_AS(make_builtin("custom", {}), ConfigError);
}

TEST_CASE("conic symbols refuse momenta below p_min")
{
    const auto helm = helmholtz_hamiltonian(2, constant_index(1.0));
    CHECK_THROWS_AS(helm.h0(v2(0, 0), v2(0, 0)), NumericError);
    CHECK_THROWS_AS(helm.grad_p(v2(0, 0), v2(1e-9, 0)), NumericError);
    CHECK_NOTHROW(helm.h0(v2(0, 0), v2(2e-8, 0)));
}

TEST_CASE("analytic gradients agree with central differences")
{
    SUBCASE("quadratic symbol")
    {
        const auto rep = check_gradients(free_hamiltonian(2, 1.0), 100, 1e-8);
        CHECK(rep.pass);
        CHECK(rep.max_deviation < 1e-8);
        CHECK(rep.skipped == 0);
    }
    SUBCASE("fish-eye index")
    {
        const auto rep = check_gradients(helmholtz_hamiltonian(2, fisheye_index(2.0, 1.0)), 100, 1e-6);
        CHECK(rep.pass);
        CHECK(rep.evaluated == 100);
    }
    SUBCASE("every built-in")
    {
        for (const auto& H : {free_hamiltonian(3, 1.0), helmholtz_hamiltonian(3, fisheye_index(2.0, 1.5)),
                              schrodinger_hamiltonian(2, harmonic_potential(0.7), 1.0),
                              water_wave_hamiltonian(2, 1.3, 1.0), model_dxn_hamiltonian(3)}) {
            CHECK(check_gradients(H, 100, 1e-6, 7).pass);
        }
    }
    SUBCASE("sample at the conic point is skipped")
    {
        const std::vector<PhasePoint> pts{{v2(0, 0), v2(0, 0)}, {v2(0.1, 0), v2(1, 1)}};
        const auto rep = check_gradients(helmholtz_hamiltonian(2, constant_index(1.0)), pts, 1e-6);
        CHECK(rep.skipped == 1);
        CHECK(rep.evaluated == 1);
        CHECK(rep.pass);
    }
}

TEST_CASE("Euler identity holds for homogeneous symbols")
{
    CHECK(euler_identity_deviation(helmholtz_hamiltonian(2, fisheye_index(2.0, 1.0)), 200) < 1e-10);
    CHECK(euler_identity_deviation(helmholtz_hamiltonian(3, constant_index(1.3)), 200) < 1e-10);
    CHECK(euler_identity_deviation(free_hamiltonian(2, 1.0), 200) < 1e-10);
    CHECK(euler_identity_deviation(model_dxn_hamiltonian(2), 200) < 1e-10);
    CHECK_THROWS_AS(euler_identity_deviation(schrodinger_hamiltonian(2, zero_potential(), 1.0), 10), ConfigError);
}

TEST_CASE("analytic second derivatives agree with differenced gradients")
{
    const Vec x = v2(0.3, -0.4), p = v2(0.9, 1.1);
    for (const auto& H : {helmholtz_hamiltonian(2, fisheye_index(2.0, 1.0)), schrodinger_hamiltonian(2, harmonic_potential(1.0), 1.0),
                          water_wave_hamiltonian(2, 0.8, 1.0), free_hamiltonian(2, 1.0)}) {
        const auto a = H.jet(x, p);
        const auto f = without_hessians(H).jet(x, p);
        CHECK((a.hxx - f.hxx).norm() < 1e-7);
        CHECK((a.hxp - f.hxp).norm() < 1e-7);
        CHECK((a.hpp - f.hpp).norm() < 1e-7);
    }
}

TEST_CASE("water-wave symbol is smooth through p = 0")
{
    const auto H = water_wave_hamiltonian(2, 1.5, 0.0);
    const auto j = H.jet(v2(0, 0), v2(0, 0));
    CHECK(j.hp.norm() == 0.0);
    CHECK((j.hpp - 3.0 * Mat::Identity(2, 2)).norm() < 1e-12);
}
