#ifndef REEBLAB_FLOWS_HPP
#define REEBLAB_FLOWS_HPP

#include <vector>

#include "reeblab/handle.hpp"

namespace reeblab {

struct FlowResult {
    SplitPoint endpoint;
    double elapsed = 0.0;       // parameter time of the rescaled flow
    double action = 0.0;        // integral of alpha along the path, paper units
};

// Closed-form solution of the rescaled Reeb system x1' = y1, y1' = 2 x1,
// x2' = eps^{2s} y2, y2' = 2 eps^{2s} x2.
SplitPoint reeb_flow_handle(const HandleParams& params, const SplitPoint& point, double t);

// Liouville flow x -> x e^{2t}, y -> y e^{-t}.
SplitPoint liouville_flow(const SplitPoint& point, double t);

// integral_0^tau alpha(flow') dt in rescaled units (= alpha-time / eps^{2p});
// closed form from the block solutions.
double flow_action_rescaled(const HandleParams& params, const SplitPoint& point, double tau);

// Liouville time T > 0 with liouville_flow(point, T) on V_{+eps}; point on
// V_{-eps} inside the annulus band A_{-eps}.  Solved in u = e^{2T} - 1.
double flow_time_T(const HandleParams& params, const SplitPoint& point);
// Same without the band precondition (used for degenerate-boundary tests).
double flow_time_T_unchecked(const HandleParams& params, const SplitPoint& point);

// Exit time through N_{+eps}(eps^{s+1}): sup{ t >= 0 : y-norm stays inside }.
// Returns 0 when the entry criterion x1 y1 + eps^{4s} x2.y2 >= 0.
double exit_time_tau(const HandleParams& params, const SplitPoint& entry, double t_max = 100.0);

// Inward/outward criterion at a sphere point; negative means inward.
double entry_criterion(const HandleParams& params, const SplitPoint& point);

// --- product-sphere charts -------------------------------------------------
// States on the junction sphere dN_{+eps}(eps^{s+1}) = S_x(R1) x S_y(sigma)
// are addressed by gnomonic charts: q for the y-direction at the south/north
// pole, p for the x-direction on the x1 > 0 hemisphere.  Charts are
// scale-free ratios, the well-conditioned coordinates for everything near
// the handle.
struct SphereChart {
    Eigen::VectorXd q;
    Eigen::VectorXd p;
};

SplitPoint sphere_state(const HandleParams& params, const SphereChart& c, bool south);
SphereChart charts_of_state(const HandleParams& params, const SplitPoint& point, bool south);

struct OutOfChart : ContractViolation {
    explicit OutOfChart(const std::string& what) : ContractViolation(what) {}
};

// One junction crossing bookkeeping entry: the half-passage deviation
// relative to the matched pre-surgery stub, rescaled units (multiply by
// eps^{2p} for paper units).
double half_passage_deviation(const HandleParams& params, const SplitPoint& sphere_state);

struct PassageResult {
    SphereChart exit;
    SplitPoint exit_point;
    double tau = 0.0;                  // rescaled flow time
    double action_paper = 0.0;         // integral of alpha, paper units
    double deviation_rescaled = 0.0;   // sum of half-passage deviations
};

// Full handle passage south entry -> north exit, the Liouville-conjugated
// flow through the handle (the Liouville legs carry zero action and are
// absorbed into the ambient model).
PassageResult through_handle_map(const HandleParams& params, const Eigen::VectorXd& q_entry,
                                 const Eigen::VectorXd& p_entry);

// Inverse of through_handle_map (backwards Reeb flow), north exit charts ->
// south entry charts.
PassageResult through_handle_map_backward(const HandleParams& params,
                                          const Eigen::VectorXd& q_exit,
                                          const Eigen::VectorXd& p_exit);

// Launch from the co-core sphere Gamma = V_{+eps} cap {y=0}: flow from the
// point with x-chart g up to the north exit sphere.
PassageResult launch_from_gamma(const HandleParams& params, const Eigen::VectorXd& g_chart);

struct LandingResult {
    Eigen::VectorXd residual;          // would-be q-chart at the Gamma crossing
    Eigen::VectorXd gamma_chart;       // x-chart of the crossing point
    double action_paper = 0.0;
    double deviation_rescaled = 0.0;
};

// Land from a south entry state onto Gamma (crossing of y1 = 0); the
// residual vanishes exactly on chords of Gamma.
LandingResult land_on_gamma(const HandleParams& params, const Eigen::VectorXd& q_entry,
                            const Eigen::VectorXd& p_entry);

// Trapezoid quadrature of alpha along a sampled path with one Richardson
// refinement; samples rescaled, result paper units.
double action_along_path(const HandleParams& params, const std::vector<SplitPoint>& samples);

// Antiderivative of (6x^2 - k)/sqrt(2x^2 - k): the action of a fast-plane
// flow arc on the level 2x^2 - y^2 = k, parametrized by x.  Shared with the
// strip energy accounting.
double fast_block_antiderivative(double x, double k);

}  // namespace reeblab

#endif
