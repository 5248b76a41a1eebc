#ifndef REEBLAB_HANDLE_HPP
#define REEBLAB_HANDLE_HPP

#include <optional>

#include "reeblab/geometry.hpp"

namespace reeblab {

// Exponent tuple for the model handle.  All point coordinates passed to this
// module are in rescaled units x~ = eps^{-p} x, y~ = eps^{-p} y, so the
// defining equation reads 2x1^2 - y1^2 + eps^{2s}(2x2^2 - y2^2) = +-1.
// Conversion to paper units happens only at reporting boundaries.
struct HandleParams {
    double epsilon = 0.5;
    double p = 22.0;
    double s = 3.0;
    double l = 21.0;
    double q = 20.0;
    int n = 3;

    void validate() const;

    double eps_pow(double k) const;   // epsilon^k
    double eps2s() const { return eps_pow(2.0 * s); }
    double eps4s() const { return eps_pow(4.0 * s); }
    // rescaled radius of the entry/exit sphere S_y(eps^{s+1}): eps^{s+1-p}
    double sigma() const { return eps_pow(s + 1.0 - p); }
    // paper-unit factor for actions/areas computed in rescaled units
    double paper_scale() const { return eps_pow(2.0 * p); }
    // rescaled radius of the flattening window eps^{q-p}
    double window() const { return eps_pow(q - p); }
};

HandleParams default_params();

enum class Sign { Plus, Minus };

struct SurfaceId {
    Sign sign = Sign::Plus;
    bool flattened = false;
};

// Defining function of V_{+-eps} (or flattened hat-V), rescaled units.
// Evaluated with error-free transforms; the fast-plane terms reach
// eps^{2s+2-2p} in magnitude and cancel down to order one.
double defining_value(const HandleParams& params, SurfaceId surface, const SplitPoint& point);
DD defining_value_dd(const HandleParams& params, SurfaceId surface, const SplitPoint& point);

// Magnitude of the terms entering the cancellation; membership tests are
// relative to max(1, this).
double defining_scale(const HandleParams& params, const SplitPoint& point);

bool on_surface(const HandleParams& params, SurfaceId surface, const SplitPoint& point,
                double tol = 1e-9);

// Cut off function beta_eps: 0 below eps^q, 1 above 2 eps^q, C^2 smoothstep
// between.  r in paper units.
double cutoff_beta(const HandleParams& params, double r);
double cutoff_beta_deriv(const HandleParams& params, double r, int order);

// Reeb field of alpha = 2x.dy + y.dx on the given surface at a surface point
// (rescaled units in and out).  Off-surface points are rejected with the
// residual in the message.
TangentVec reeb_field(const HandleParams& params, SurfaceId surface, const SplitPoint& point);

// Gradient of the defining function (rescaled), for tangency tests.
TangentVec defining_gradient(const HandleParams& params, SurfaceId surface, const SplitPoint& point);

struct OffSurface : ContractViolation {
    double residual;
    OffSurface(const std::string& what, double res) : ContractViolation(what), residual(res) {}
};

// Front chart psi: W_{-eps} = {x.y = 0} in V_{-eps} -> T*S^{n-1} inside
// J^1(S^{n-1}), psi(x,y) = (y/|y|, -|y| x, 0).  Input rescaled, output q
// unit, p and z in paper units.
JetPoint chart_psi(const HandleParams& params, const SplitPoint& point);

// Psi((x,y),t) = (psi(x,y), t): base point on W_{-eps}, t the alpha-time of
// the Reeb flow, |t| < 1.  Errors if the flow leaves N_{-eps} before time t.
JetPoint embed_Psi(const HandleParams& params, const SplitPoint& base, double t);

// Reeb flow by alpha-time (unit speed), used by embed_Psi and tests.
SplitPoint reeb_flow_alpha_time(const HandleParams& params, const SplitPoint& point, double t);

// alpha-time at which the flow from `point` exits N_{-eps}((1/sqrt2)eps^{s+1});
// measures the z-extent of the Psi image.
double alpha_time_to_exit_Nminus(const HandleParams& params, const SplitPoint& point);

// Newton projection onto the surface along the Liouville direction.
SplitPoint project_to_surface(const HandleParams& params, SurfaceId surface,
                              const SplitPoint& point, double capture_radius = 0.5,
                              double tol = 1e-12);

}  // namespace reeblab

#endif
