#pragma once

#include "scg/hamiltonians.hpp"
#include "scg/rayflow.hpp"

#include <functional>
#include <string>
#include <vector>

namespace scg {

enum class LagrangianKind { vertical_fiber, tilted_graph, conormal, bessel_cone };
// polar: the radial coordinate is tau and psi are angles; cartesian: tau is the last coordinate.
enum class ChartKind { polar, cartesian };

std::string_view to_string(LagrangianKind kind);
LagrangianKind parse_lagrangian_kind(std::string_view name);

// Generating function S(eta) of the tilted graph {x = x0 - grad S(eta), p = eta}.
struct GraphPhase {
    std::function<double(const Vec&)> value;
    std::function<Vec(const Vec&)> gradient;
    std::function<Mat(const Vec&)> hessian;
};

// Parametrized source manifold: (tau, psi) -> (x, p), with eikonal S and dmu = |dtau ^ dpsi|.
class SourceLagrangian {
public:
    static SourceLagrangian vertical_fiber(Vec x0, ChartKind chart = ChartKind::polar);
    static SourceLagrangian tilted_graph(Vec x0, GraphPhase phase, ChartKind chart = ChartKind::polar);
    // {x_n = 0, p' = 0}: tau = p_n, psi = x'
    static SourceLagrangian conormal(int dim);
    // {x = phi omega(psi), p = omega(psi)}: tau = phi
    static SourceLagrangian bessel_cone(int dim);

    int dim() const { return dim_; }
    int psi_dim() const { return dim_ - 1; }
    LagrangianKind kind() const { return kind_; }
    ChartKind chart() const { return chart_; }
    const Vec& base_point() const { return x0_; }
    bool periodic_psi() const { return chart_ == ChartKind::polar; }
    // Sources written as momentum integrals: p is the chart variable.
    bool momentum_represented() const { return kind_ == LagrangianKind::vertical_fiber || kind_ == LagrangianKind::tilted_graph; }

    PhasePoint point(double tau, const Vec& psi) const;
    // 2n x n: column 0 is d/dtau, then d/dpsi_j; rows are (x, p).
    Mat tangents(double tau, const Vec& psi) const;
    double eikonal(double tau, const Vec& psi) const;

    // Momentum chart (momentum-represented kinds only).
    Vec momentum(double tau, const Vec& psi) const { return point(tau, psi).p; }
    void chart_coordinates(const Vec& eta, double& tau, Vec& psi) const;
    double momentum_density(double tau, const Vec& psi) const;  // |det d eta / d(tau, psi)|
    // Generating phase (x - x0) eta + S(eta) of a momentum-represented source, and its eta-Hessian.
    double generating_phase(const Vec& x, const Vec& eta) const;
    Mat generating_hessian(const Vec& eta) const;
    Vec base_of(const Vec& eta) const;  // x0 - grad S(eta): the point of the source over eta

private:
    int dim_ = 2;
    LagrangianKind kind_ = LagrangianKind::vertical_fiber;
    ChartKind chart_ = ChartKind::polar;
    Vec x0_;
    GraphPhase graph_;
};

// Unit vector field on the angle chart and its psi-derivatives (n x (n - 1)).
Vec direction(const Vec& psi);
Mat direction_jacobian(const Vec& psi);

struct LevelPoint {
    Vec psi;
    double tau = 0;
    PhasePoint z;
    double crossing = 0;  // dH0/dtau at the root
    Mat tangent;          // 2n x (n - 1) derivative of z along L
    double action = 0;
    Vec action_grad;
};

struct LevelOptions {
    double tau_lo = 1e-3;
    double tau_hi = 10.0;
    int psi_nodes = 512;          // per psi dimension
    Vec psi_lo, psi_hi;           // cartesian charts: the psi box (required)
    double margin_min = 1e-6;
    int scan = 64;
};

// L = Sigma_E intersected with the source manifold, one root tau(psi) per psi.
class LevelIntersection {
public:
    LevelIntersection(SourceLagrangian source, Hamiltonian H, double energy, LevelOptions opt);

    const SourceLagrangian& source() const { return source_; }
    const Hamiltonian& hamiltonian() const { return H_; }
    double energy() const { return energy_; }
    const LevelOptions& options() const { return opt_; }
    const std::vector<LevelPoint>& samples() const { return samples_; }
    double margin() const { return margin_; }
    double max_residual() const { return residual_; }

    // Root at an arbitrary psi; throws HypothesisError when none exists in the tau box.
    LevelPoint at(const Vec& psi) const;
    // tau of the root only: Newton from the interpolated samples, the full scan when that fails.
    double tau_at(const Vec& psi) const;
    double psi_volume() const;  // measure of the psi domain
    double psi_spacing() const;

private:
    SourceLagrangian source_;
    Hamiltonian H_;
    double energy_;
    LevelOptions opt_;
    std::vector<LevelPoint> samples_;
    double margin_ = 0;
    double residual_ = 0;
};

LevelIntersection intersect_level(const SourceLagrangian& source, const Hamiltonian& H, double energy,
                                  const LevelOptions& opt = {});

// psi grid used for samples: uniform on the angle torus/sphere, or the cartesian box including its ends.
std::vector<Vec> psi_grid(const SourceLagrangian& source, const LevelOptions& opt);

struct FlowOutOptions {
    RayOptions ray;
};

class FlowOut {
public:
    FlowOut(const LevelIntersection& level, double horizon, FlowOutOptions opt);

    const LevelIntersection& level() const { return *level_; }
    const Hamiltonian& hamiltonian() const { return level_->hamiltonian(); }
    double horizon() const { return horizon_; }
    const std::vector<Ray>& rays() const { return rays_; }
    const FlowOutOptions& options() const { return opt_; }

    // Fresh ray from L at psi, integrated to the horizon.
    Ray ray_at(const Vec& psi) const;
    Ray ray_from(const LevelPoint& lp) const;

    // 2n x n tangent space of the flow-out at node (ray i, time t): flow direction then d/dpsi.
    Mat tangent_space(std::size_t ray, double t) const;

private:
    std::shared_ptr<const LevelIntersection> level_;
    double horizon_;
    FlowOutOptions opt_;
    std::vector<Ray> rays_;
};

FlowOut flow_out(const LevelIntersection& level, double horizon, const FlowOutOptions& opt = {});

// dim(span A intersected with span B) from singular values, relative tolerance rel_tol.
int intersection_dimension(const Mat& a, const Mat& b, double rel_tol = 1e-8);

struct CleanReport {
    bool pass = false;
    int samples = 0;
    int flagged = 0;  // ill-conditioned rank decisions
    int min_dimension = 0;
    int max_dimension = 0;
};

CleanReport check_clean_intersection(const SourceLagrangian& lambda0, const FlowOut& lambda1, int samples = 32);

struct EikonalReport {
    bool accepted = false;
    std::string reason;
    double max_residual = 0;      // |p dx - dS| over the sampled tangents
    double min_gradient = 0;      // smallest |dS| over the samples
    std::vector<double> values;   // S at the sampled nodes
};

// Eikonal check on a source chart over a (tau, psi) sample set, or on the flow-out nodes.
EikonalReport eikonal_chart(const SourceLagrangian& source, std::span<const double> taus, std::span<const Vec> psis);
EikonalReport eikonal_chart(const FlowOut& flow);

// Symplectic form on (x, p) tangent vectors.
double symplectic(const Vec& u, const Vec& v);

}  // namespace scg
