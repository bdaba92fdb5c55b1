#pragma once

#include "scg/types.hpp"

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>

namespace scg {

enum class HamiltonianKind { free, helmholtz_index, schrodinger, water_wave, model_dxn, custom };

std::string_view to_string(HamiltonianKind kind);
HamiltonianKind parse_hamiltonian_kind(std::string_view name);

struct IndexProfile {
    std::function<double(const Vec&)> value;
    std::function<Vec(const Vec&)> gradient;
    std::function<Mat(const Vec&)> hessian;
    bool radial = false;
    bool constant = false;
};

IndexProfile constant_index(double n0);
// n(x) = n0 / (1 + |x|^2 / a^2); n0 = 2, a = 1 is the Maxwell fish-eye.
IndexProfile fisheye_index(double n0, double a);

struct Potential {
    std::function<double(const Vec&)> value;
    std::function<Vec(const Vec&)> gradient;
    std::function<Mat(const Vec&)> hessian;
};

Potential zero_potential();
Potential harmonic_potential(double omega2);

struct SymbolJet {
    double h0 = 0;
    Vec hx, hp;
    Mat hxx, hxp, hpp;  // hxp(i, j) = d^2 H / dx_i dp_j
};

// H(x, p; h) = H0(x, p) + h H1(x, p) with level E of the principal part.
class Hamiltonian {
public:
    struct Parts {
        std::function<double(const Vec&, const Vec&)> h0;
        std::function<double(const Vec&, const Vec&)> h1;
        std::function<Vec(const Vec&, const Vec&)> grad_x;
        std::function<Vec(const Vec&, const Vec&)> grad_p;
        // optional; finite differences of the gradients otherwise
        std::function<void(const Vec&, const Vec&, Mat&, Mat&, Mat&)> hessians;
    };

    Hamiltonian(int dim, HamiltonianKind kind, Parts parts, double energy,
                std::optional<double> homogeneity, bool conic, bool x_independent);

    int dim() const { return dim_; }
    HamiltonianKind kind() const { return kind_; }
    double energy() const { return energy_; }
    std::optional<double> homogeneity() const { return homogeneity_; }
    bool conic() const { return conic_; }
    bool x_independent() const { return x_independent_; }
    double p_min() const { return p_min_; }
    void set_p_min(double v) { p_min_ = v; }

    double h0(const Vec& x, const Vec& p) const;
    double h1(const Vec& x, const Vec& p) const;
    Vec grad_x(const Vec& x, const Vec& p) const;
    Vec grad_p(const Vec& x, const Vec& p) const;
    SymbolJet jet(const Vec& x, const Vec& p) const;

    // Throws NumericError when a conic symbol is evaluated at |p| < p_min.
    void require_regular(const Vec& p) const;

private:
    int dim_;
    HamiltonianKind kind_;
    Parts parts_;
    double energy_;
    std::optional<double> homogeneity_;
    bool conic_;
    bool x_independent_;
    double p_min_ = 1e-8;
};

// Flat key/value parameters, as produced by the config reader.
struct ParamSet {
    std::map<std::string, double> numbers;
    std::map<std::string, std::string> words;

    double number(const std::string& key, double fallback) const;
    std::string word(const std::string& key, const std::string& fallback) const;
};

Hamiltonian free_hamiltonian(int dim, double energy);
Hamiltonian helmholtz_hamiltonian(int dim, IndexProfile index, double energy = 1.0);
Hamiltonian schrodinger_hamiltonian(int dim, Potential v, double particle_energy);
Hamiltonian water_wave_hamiltonian(int dim, double depth, double frequency);
Hamiltonian model_dxn_hamiltonian(int dim);
Hamiltonian custom_hamiltonian(int dim, Hamiltonian::Parts parts, double energy,
                               std::optional<double> homogeneity = std::nullopt);

// Keys: dim, energy, p_min; index.profile (constant|fisheye), index.n0, index.a;
// potential (zero|harmonic), potential.omega2; depth.
Hamiltonian make_builtin(HamiltonianKind kind, const ParamSet& params);
Hamiltonian make_builtin(std::string_view kind, const ParamSet& params);

struct GradientReport {
    double max_deviation = 0;
    int evaluated = 0;
    int skipped = 0;
    bool pass = false;
};

GradientReport check_gradients(const Hamiltonian& H, std::span<const PhasePoint> samples, double tol);
GradientReport check_gradients(const Hamiltonian& H, int samples, double tol, std::uint64_t seed = 1);

// Max |<p, dH0/dp> - m H0| over random samples; requires a homogeneity degree.
double euler_identity_deviation(const Hamiltonian& H, int samples, std::uint64_t seed = 1);

}  // namespace scg
