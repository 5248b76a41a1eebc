#include "reeblab/handle.hpp"

#include <cmath>
#include <sstream>

#include "reeblab/flows.hpp"

namespace reeblab {

void HandleParams::validate() const {
    std::ostringstream bad;
    if (!(epsilon > 0.0 && epsilon < 1.0)) bad << "epsilon must lie in (0,1); ";
    if (!(p > 0.0 && s > 0.0 && l > 0.0 && q > 0.0)) bad << "p,s,l,q must be positive; ";
    if (!(p / 10.0 < s && s < p / 5.0)) bad << "need p/10 < s < p/5; ";
    if (!(5.0 * s + 5.0 < l && l < p)) bad << "need 5s+5 < l < p; ";
    if (!(p - s < q && q < p)) bad << "need p-s < q < p; ";
    if (n < 2) bad << "need n >= 2; ";
    std::string msg = bad.str();
    if (!msg.empty()) throw ContractViolation("HandleParams: " + msg);
}

double HandleParams::eps_pow(double k) const { return std::pow(epsilon, k); }

HandleParams default_params() {
    HandleParams hp;
    hp.validate();
    return hp;
}

double cutoff_beta(const HandleParams& params, double r) {
    if (r < 0.0) throw ContractViolation("cutoff_beta: r must be nonnegative");
    double a = params.eps_pow(params.q);
    double u = (r - a) / a;
    if (u <= 0.0) return 0.0;
    if (u >= 1.0) return 1.0;
    return u * u * u * (10.0 + u * (-15.0 + 6.0 * u));
}

double cutoff_beta_deriv(const HandleParams& params, double r, int order) {
    if (order == 0) return cutoff_beta(params, r);
    double a = params.eps_pow(params.q);
    double u = (r - a) / a;
    if (u <= 0.0 || u >= 1.0) return 0.0;
    double v;
    switch (order) {
        case 1: v = 30.0 * u * u * (1.0 - u) * (1.0 - u); break;
        case 2: v = 60.0 * u * (1.0 - u) * (1.0 - 2.0 * u); break;
        case 3: v = 60.0 * (1.0 - 6.0 * u + 6.0 * u * u); break;
        default: throw ContractViolation("cutoff_beta_deriv: order must be 0..3");
    }
    return v / std::pow(a, order);
}

// weight w(r2~) applied to the transverse block; r2~ rescaled
static double flat_weight(const HandleParams& params, bool flattened, double r2_rescaled) {
    if (!flattened) return 1.0;
    return cutoff_beta(params, params.eps_pow(params.p) * r2_rescaled);
}

DD defining_value_dd(const HandleParams& params, SurfaceId surface, const SplitPoint& point) {
    if (point.dim() != params.n)
        throw ContractViolation("defining_value: point dimension mismatch");
    double e2s = params.eps2s();
    double r2 = std::sqrt(point.x2.squaredNorm() + point.y2.squaredNorm());
    double w = flat_weight(params, surface.flattened, r2);
    DD acc = dd_sq(point.x1) * 2.0;
    acc -= dd_sq(point.y1);
    DD tr(0.0);
    for (Eigen::Index j = 0; j < point.x2.size(); ++j) {
        tr += dd_sq(point.x2[j]) * 2.0;
        tr -= dd_sq(point.y2[j]);
    }
    acc += tr * (w * e2s);
    acc -= DD(surface.sign == Sign::Plus ? 1.0 : -1.0);
    return acc;
}

double defining_value(const HandleParams& params, SurfaceId surface, const SplitPoint& point) {
    return defining_value_dd(params, surface, point).value();
}

double defining_scale(const HandleParams& params, const SplitPoint& point) {
    double e2s = params.eps2s();
    double m = 2.0 * point.x1 * point.x1 + point.y1 * point.y1 +
               e2s * (2.0 * point.x2.squaredNorm() + point.y2.squaredNorm());
    return std::max(1.0, m);
}

bool on_surface(const HandleParams& params, SurfaceId surface, const SplitPoint& point, double tol) {
    double h = defining_value(params, surface, point);
    return std::abs(h) <= tol * defining_scale(params, point);
}

TangentVec defining_gradient(const HandleParams& params, SurfaceId surface, const SplitPoint& point) {
    double e2s = params.eps2s();
    double r2sq = point.x2.squaredNorm() + point.y2.squaredNorm();
    double r2 = std::sqrt(r2sq);
    double w = flat_weight(params, surface.flattened, r2);
    TangentVec g(4.0 * point.x1, -2.0 * point.y1, (4.0 * w * e2s) * point.x2,
                 (-2.0 * w * e2s) * point.y2);
    if (surface.flattened && r2 > 0.0) {
        // radial term from the cutoff, chain rule in rescaled units
        double ep = params.eps_pow(params.p);
        double wp = cutoff_beta_deriv(params, ep * r2, 1) * ep;
        double quad = 2.0 * point.x2.squaredNorm() - point.y2.squaredNorm();
        double c = e2s * quad * wp / r2;
        g.x2 += c * point.x2;
        g.y2 += c * point.y2;
    }
    return g;
}

TangentVec reeb_field(const HandleParams& params, SurfaceId surface, const SplitPoint& point) {
    double h = defining_value(params, surface, point);
    double scale = defining_scale(params, point);
    if (std::abs(h) > 1e-9 * scale)
        throw OffSurface("reeb_field: point off surface, residual " + std::to_string(h), h);
    // unnormalized direction X with i_X omega = -dh/2; for the quadric this is
    // the field 2x1 d_y1 + y1 d_x1 + eps^{2s}(2x2 d_y2 + y2 d_x2).
    TangentVec g = defining_gradient(params, surface, point);
    TangentVec X(-0.5 * g.y1, 0.5 * g.x1, -0.5 * g.y2, 0.5 * g.x2);
    double ninv = eval_alpha(point, X);
    if (!(ninv > 0.0))
        throw ContractViolation("reeb_field: degenerate normalization, alpha(X) <= 0");
    return X * (1.0 / ninv);
}

JetPoint chart_psi(const HandleParams& params, const SplitPoint& point) {
    SurfaceId vminus{Sign::Minus, false};
    double h = defining_value(params, vminus, point);
    if (std::abs(h) > 1e-9 * defining_scale(params, point))
        throw OffSurface("chart_psi: point not on V_{-eps}, residual " + std::to_string(h), h);
    double xy = point.x1 * point.y1 + point.x2.dot(point.y2);
    double xynorm = point.norm();
    if (std::abs(xy) > 1e-9 * std::max(1.0, xynorm * xynorm))
        throw ContractViolation("chart_psi: x.y != 0, point not on W_{-eps}");
    int d = params.n;
    Eigen::VectorXd y(d), x(d);
    y[0] = point.y1;
    x[0] = point.x1;
    for (int j = 1; j < d; ++j) {
        y[j] = point.y2[j - 1];
        x[j] = point.x2[j - 1];
    }
    double ynorm = y.norm();
    if (ynorm == 0.0) throw ContractViolation("chart_psi: |y| = 0");
    JetPoint out;
    out.q = y / ynorm;
    // p in paper units: -|y|x with both factors carrying eps^p
    double ps = params.paper_scale();
    out.p = (-ynorm * ps) * x;
    out.z = 0.0;
    return out;
}

SplitPoint reeb_flow_alpha_time(const HandleParams& params, const SplitPoint& point, double t) {
    // alpha-time along the rescaled flow: dt_alpha = eps^{2p} (1/N~) dtau.
    // Invert tau -> t by bisection+Newton on the closed-form block integrals.
    double target = t / params.paper_scale();
    if (target == 0.0) return point;
    auto elapsed = [&](double tau) {
        return flow_action_rescaled(params, point, tau);
    };
    double lo = 0.0, hi = (target > 0.0) ? 1e-3 : -1e-3;
    int guard = 0;
    while ((target > 0.0 ? elapsed(hi) < target : elapsed(hi) > target)) {
        hi *= 2.0;
        if (++guard > 200) throw NoConvergence("reeb_flow_alpha_time: bracketing failed", 0.0);
    }
    if (target < 0.0) std::swap(lo, hi);
    for (int it = 0; it < 200; ++it) {
        double mid = 0.5 * (lo + hi);
        if (elapsed(mid) < target)
            lo = mid;
        else
            hi = mid;
    }
    double tau = 0.5 * (lo + hi);
    return reeb_flow_handle(params, point, tau);
}

double alpha_time_to_exit_Nminus(const HandleParams& params, const SplitPoint& point) {
    // N_{-eps}((1/sqrt2)eps^{s+1}) = { x-norm^2 <= sigma^2/2 } on V_{-eps}
    double e2s = params.eps2s();
    double cap = 0.5 * params.sigma() * params.sigma();
    auto xnorm2 = [&](double tau) {
        SplitPoint z = reeb_flow_handle(params, point, tau);
        return z.x1 * z.x1 + e2s * z.x2.squaredNorm();
    };
    if (xnorm2(0.0) > cap)
        throw ContractViolation("alpha_time_to_exit_Nminus: point outside N_{-eps}");
    double hi = 1e-3;
    int guard = 0;
    while (xnorm2(hi) <= cap) {
        hi *= 2.0;
        if (++guard > 100) throw NoConvergence("alpha_time_to_exit_Nminus: no exit", 0.0);
    }
    double lo = hi * 0.5 < 0.0 ? 0.0 : hi * 0.5;
    lo = 0.0;
    for (int it = 0; it < 200; ++it) {
        double mid = 0.5 * (lo + hi);
        if (xnorm2(mid) <= cap)
            lo = mid;
        else
            hi = mid;
    }
    double tau_exit = 0.5 * (lo + hi);
    return params.paper_scale() * flow_action_rescaled(params, point, tau_exit);
}

JetPoint embed_Psi(const HandleParams& params, const SplitPoint& base, double t) {
    if (!(std::abs(t) < 1.0)) throw ContractViolation("embed_Psi: |t| < 1 required");
    if (t != 0.0) {
        double exit = alpha_time_to_exit_Nminus(params, base);
        if (std::abs(t) >= exit)
            throw ContractViolation("embed_Psi: flow leaves N_{-eps} before time t");
    }
    JetPoint out = chart_psi(params, base);
    out.z = t;
    return out;
}

SplitPoint project_to_surface(const HandleParams& params, SurfaceId surface,
                              const SplitPoint& point, double capture_radius, double tol) {
    double h0 = defining_value(params, surface, point);
    double scale = defining_scale(params, point);
    if (std::abs(h0) > capture_radius * scale)
        throw ContractViolation("project_to_surface: point outside capture radius");
    // Newton in the Liouville flow time; dh/dsigma = dh(v) > 0 off the core.
    double sg = 0.0;
    SplitPoint cur = point;
    for (int it = 0; it < 50; ++it) {
        DD h = defining_value_dd(params, surface, cur);
        if (std::abs(h.value()) <= tol * defining_scale(params, cur)) return cur;
        TangentVec g = defining_gradient(params, surface, cur);
        TangentVec v = liouville_field(cur);
        double dh = g.x1 * v.x1 + g.y1 * v.y1 + g.x2.dot(v.x2) + g.y2.dot(v.y2);
        if (dh == 0.0)
            throw NoConvergence("project_to_surface: Liouville direction degenerate", h.value());
        double step = -h.value() / dh;
        sg += step;
        cur = liouville_flow(point, sg);
    }
    throw NoConvergence("project_to_surface: Newton failed in 50 iterations",
                        defining_value(params, surface, cur));
}

}  // namespace reeblab
