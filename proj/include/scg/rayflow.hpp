#pragma once

#include "scg/hamiltonians.hpp"

#include <array>
#include <memory>
#include <span>
#include <string>
#include <vector>

namespace scg {

struct RayOptions {
    double tol = 1e-10;
    double initial_step = 1e-3;
    std::size_t max_steps = 2'000'000;
    bool track_events = true;  // conjugate events need k = n - 1 transverse directions
    double rank_tol = 1e-8;    // singular values below rank_tol * largest count as lost rank
};

struct RayState {
    double t = 0;
    Vec x, p;
    double action = 0;
    double theta = 0;
    Mat dx, dp;        // n x k derivatives of (x, p) with respect to the initial parameters
    Vec action_grad;   // k derivatives of the action
    int maslov = 0;
};

enum class EventKind { focal, turning };

struct ConjugateEvent {
    double t = 0;
    int multiplicity = 0;
    EventKind kind = EventKind::focal;
};

class Ray {
public:
    int dim() const { return n_; }
    int params() const { return k_; }
    double t_end() const { return nodes_.back().t; }
    const std::vector<RayState>& nodes() const { return nodes_; }
    const std::vector<ConjugateEvent>& events() const { return events_; }
    // The projection to x drops rank along the whole ray (e.g. the model flow-out); no events are reported.
    bool degenerate_projection() const { return degenerate_; }

    // Dense-output state at t in [0, t_end]; maslov counts events strictly before t.
    RayState at(double t) const;
    int maslov_before(double t) const;

    // det [dX/dt, dX/dpsi] at t (k = n - 1 only).
    double flow_determinant(double t) const;

private:
    friend Ray integrate_ray(const Hamiltonian&, const Vec&, const Vec&, double, const Mat&, const Mat&,
                             const RayOptions&, double, const Vec&);

    struct Segment {
        double t0 = 0, step = 0;
        std::array<Vec, 5> coef;
    };

    Vec packed_at(double t) const;
    RayState unpack(double t, const Vec& y) const;

    int n_ = 0, k_ = 0;
    std::shared_ptr<const Hamiltonian> symbol_;
    std::vector<RayState> nodes_;
    std::vector<Segment> segments_;
    std::vector<ConjugateEvent> events_;
    bool degenerate_ = false;
};

// Hamilton's equations with the variational system for the k columns of (dx0, dp0),
// the action S' = <p, dH/dp> and the subprincipal phase Theta' = H1.
Ray integrate_ray(const Hamiltonian& H, const Vec& x0, const Vec& p0, double t_max, const Mat& dx0, const Mat& dp0,
                  const RayOptions& opt = {}, double action0 = 0, const Vec& action_grad0 = {});

// Spatial projection of the flow from (x0, eta) and its derivative in eta.
struct ExpMap {
    Vec x;
    Mat d_eta;
};
ExpMap exp_map(const Hamiltonian& H, const Vec& x0, const Vec& eta, double t, double tol = 1e-10);

// Largest time at which some ray from the samples is still inside the ball of the given radius.
// Throws HypothesisError when a ray is inside the ball at the horizon.
double nontrapping_escape_time(const Hamiltonian& H, std::span<const PhasePoint> level, double radius,
                               double horizon, double tol = 1e-9);

std::string_view to_string(EventKind kind);

}  // namespace scg
