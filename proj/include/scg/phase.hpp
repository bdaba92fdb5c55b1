#pragma once

#include "scg/lagrangian.hpp"

#include <vector>

namespace scg {

// Coefficients of the small-time expansion Phi = c0 - c1 t + c2 t^2 / 2 - c3 t^3 / 6.
struct TaylorSeries {
    double c0 = 0, c1 = 0, c2 = 0, c3 = 0;
    double at(double t, int order = 3) const;
};

TaylorSeries taylor_series(const Hamiltonian& H, const GraphPhase& S, const Vec& x, const Vec& eta);

// Small-time expansion of the Hamilton-Jacobi solution with initial data x eta + S(eta), order 2 or 3.
double taylor_phase(const Hamiltonian& H, const GraphPhase& S, double t, const Vec& x, const Vec& eta, int order = 3,
                    double t_max = 0.1);

// The same solution from characteristics: the ray from (y, eta) that reaches x at time t.
double characteristic_phase(const Hamiltonian& H, const GraphPhase& S, double t, const Vec& x, const Vec& eta,
                            double tol = 1e-12);

// Phi(x; t, psi, r) = S(t, psi) + r <P, x - X> with its parameter derivatives.
struct EikonalValue {
    double phi = 0;
    double d_t = 0;
    Vec d_psi;
    double d_r = 0;
};

EikonalValue eikonal_phase_eval(const FlowOut& F, double t, const Vec& psi, double r, const Vec& x);
EikonalValue eikonal_phase_eval(const Ray& ray, double t, const Hamiltonian& H, double r, const Vec& x);

struct ArrivalDatum {
    Vec x;
    double t = 0;
    Vec psi;
    Vec eta;               // initial momentum on L
    double action = 0;     // phase value at the critical point
    double theta = 0;
    double jacobian = 0;   // det [dX/dt, dX/dpsi]
    int signature = 0;     // of the (t, psi, r) Hessian
    double hessian_condition = 0;
    double d_tt = 0;       // second t-derivative of the phase
    int maslov = 0;
    bool nondegenerate = false;
    double crossing = 0;   // dH0/dtau on L
    double density = 0;    // |det d eta / d(tau, psi)| on L (momentum-represented sources)
    double residual = 0;   // |X(t, psi) - x|
};

struct ArrivalOptions {
    double tol = 1e-11;       // on |X - x| relative to 1 + |x|
    int max_iterations = 60;
    double dedupe = 1e-6;
    int time_samples = 256;   // seeding resolution along each grid ray
    Vec psi_lo, psi_hi;       // optional momentum window in psi
    double degeneracy = 1e-8;
};

std::vector<ArrivalDatum> find_arrivals(const FlowOut& F, const Vec& x, const ArrivalOptions& opt = {});

// Max over sampled critical configurations of |d_t Phi| + |d_psi Phi| + |H0(X, P) - E|.
double hj_residual(const FlowOut& F, int samples);

struct CriticalityReport {
    double action_rate = 0;   // max |<P, dX/dt> - m E|
    double orthogonality = 0; // max |<P, dX/dpsi>|
};

CriticalityReport criticality_identities(const FlowOut& F);

}  // namespace scg
