#include "reeblab/flows.hpp"

#include <cmath>

namespace reeblab {

namespace {
constexpr double kSqrt2 = 1.4142135623730950488;

struct BlockFlow {
    double c, s;  // cosh, sinh of sqrt(2) m t
    void apply(double& x, double& y) const {
        double nx = c * x + s * y / kSqrt2;
        double ny = kSqrt2 * s * x + c * y;
        x = nx;
        y = ny;
    }
};

BlockFlow block_flow(double m, double t) {
    double a = kSqrt2 * m * t;
    return {std::cosh(a), std::sinh(a)};
}

// integral_0^tau (4|x|^2 + |y|^2) dt for one block with rate factor m
double block_action(double m, double tau, double x2norm, double xy, double y2norm) {
    double w = kSqrt2 * m;
    double a = w * tau;
    double c = std::cosh(a), s = std::sinh(a);
    double i_cc = 0.5 * tau + s * c / (2.0 * w);
    double i_ss = -0.5 * tau + s * c / (2.0 * w);
    double i_cs = s * s / (2.0 * w);
    return (4.0 * i_cc + 2.0 * i_ss) * x2norm + 6.0 * kSqrt2 * i_cs * xy +
           (i_cc + 2.0 * i_ss) * y2norm;
}
}  // namespace

SplitPoint reeb_flow_handle(const HandleParams& params, const SplitPoint& point, double t) {
    if (point.dim() != params.n)
        throw ContractViolation("reeb_flow_handle: dimension mismatch");
    SplitPoint out = point;
    BlockFlow f1 = block_flow(1.0, t);
    f1.apply(out.x1, out.y1);
    BlockFlow f2 = block_flow(params.eps2s(), t);
    for (Eigen::Index j = 0; j < out.x2.size(); ++j) f2.apply(out.x2[j], out.y2[j]);
    return out;
}

SplitPoint liouville_flow(const SplitPoint& point, double t) {
    double ex = std::exp(2.0 * t), ey = std::exp(-t);
    return SplitPoint(point.x1 * ex, point.y1 * ey, point.x2 * ex, point.y2 * ey);
}

double flow_action_rescaled(const HandleParams& params, const SplitPoint& point, double tau) {
    double e2s = params.eps2s();
    double fast = block_action(1.0, tau, point.x1 * point.x1, point.x1 * point.y1,
                               point.y1 * point.y1);
    double slow = block_action(e2s, tau, point.x2.squaredNorm(), point.x2.dot(point.y2),
                               point.y2.squaredNorm());
    return fast + e2s * slow;
}

// cubic (6a-1)u + 6a u^2 + 2a u^3 = c0 in u = e^{2T} - 1
static double solve_shifted_cubic(double a, double c0) {
    double lin = 6.0 * a - 1.0;
    if (lin <= 0.0) throw ContractViolation("flow_time_T: degenerate cubic");
    double u = c0 / lin;
    for (int it = 0; it < 60; ++it) {
        double g = ((2.0 * a * u + 6.0 * a) * u + lin) * u - c0;
        double gp = (6.0 * a * u + 12.0 * a) * u + lin;
        double step = g / gp;
        u -= step;
        if (std::abs(step) <= 1e-17 * std::abs(u) + 1e-300) break;
    }
    double g = ((2.0 * a * u + 6.0 * a) * u + lin) * u - c0;
    double scale = std::abs(lin * u) + std::abs(c0) + 1e-300;
    if (std::abs(g) > 1e-10 * scale)
        throw NoConvergence("flow_time_T: cubic residual too large", g);
    return 0.5 * std::log1p(u);
}

double flow_time_T_unchecked(const HandleParams& params, const SplitPoint& point) {
    double e2s = params.eps2s();
    double a = point.x1 * point.x1 + e2s * point.x2.squaredNorm();
    if (!(a > 0.0)) throw ContractViolation("flow_time_T: x-norm must be positive");
    // c0 = b + 1 - 2a = -h_plus(point), in double-double to survive the
    // cancellation at sphere magnitudes
    double c0 = -defining_value(params, SurfaceId{Sign::Plus, false}, point);
    if (c0 < 0.0) throw ContractViolation("flow_time_T: point already above V_{+eps}");
    return solve_shifted_cubic(a, c0);
}

double flow_time_T(const HandleParams& params, const SplitPoint& point) {
    double h = defining_value(params, SurfaceId{Sign::Minus, false}, point);
    if (std::abs(h) > 1e-9 * defining_scale(params, point))
        throw OffSurface("flow_time_T: point not on V_{-eps}", h);
    double e2s = params.eps2s();
    double a = point.x1 * point.x1 + e2s * point.x2.squaredNorm();
    double s2 = params.sigma() * params.sigma();
    if (!(a >= s2 / 8.0 * (1.0 - 1e-9) && a <= s2 / 2.0 * (1.0 + 1e-9)))
        throw ContractViolation("flow_time_T: point outside the annulus band A_{-eps}");
    // the point is on V_{-eps}: b = 2a + eps^{2p} exactly, so c0 = 2 and T is
    // a function of a alone (full relative accuracy, no cancellation)
    return solve_shifted_cubic(a, 2.0);
}

double entry_criterion(const HandleParams& params, const SplitPoint& point) {
    return point.x1 * point.y1 + params.eps4s() * point.x2.dot(point.y2);
}

double exit_time_tau(const HandleParams& params, const SplitPoint& entry, double t_max) {
    double e2s = params.eps2s();
    double s2 = params.sigma() * params.sigma();
    double b0 = entry.y1 * entry.y1 + e2s * entry.y2.squaredNorm();
    if (std::abs(b0 - s2) > 1e-6 * s2)
        throw ContractViolation("exit_time_tau: entry not on the y-sphere S_y(eps^{s+1})");
    if (entry_criterion(params, entry) >= 0.0) return 0.0;

    auto f = [&](double t) {
        SplitPoint z = reeb_flow_handle(params, entry, t);
        return z.y1 * z.y1 + e2s * z.y2.squaredNorm() - s2;
    };
    double step = 0.25, lo = 0.0, hi = step;
    while (f(hi) <= 0.0) {
        lo = hi;
        hi += step;
        step *= 1.5;
        if (hi > t_max)
            throw NoConvergence("exit_time_tau: no exit before t_max (unbounded flow)", f(lo));
    }
    for (int it = 0; it < 120; ++it) {
        double mid = 0.5 * (lo + hi);
        if (f(mid) <= 0.0)
            lo = mid;
        else
            hi = mid;
    }
    double t = 0.5 * (lo + hi);
    for (int it = 0; it < 3; ++it) {  // Newton polish, f' = 4*criterion(flow(t))
        SplitPoint z = reeb_flow_handle(params, entry, t);
        double fp = 4.0 * entry_criterion(params, z);
        if (fp <= 0.0) break;
        t -= f(t) / fp;
    }
    return t;
}

// --- mode form of the passage --------------------------------------------------
// The fast plane is carried in the expanding/contracting modes
//   a = (sqrt2 x1 + y1)/2,   b = (sqrt2 x1 - y1)/2,
// so x1 = (a+b)/sqrt2, y1 = a-b, and the flow is diagonal: a e^{sqrt2 t},
// b e^{-sqrt2 t}.  Raw coordinates cancel eleven orders of magnitude across a
// passage at the default exponents; the modes do not.

namespace {

struct ModeState {
    double a = 0.0, b = 0.0;
    Eigen::VectorXd x2, y2;
};

double R1_of(const HandleParams& params) {
    double s2 = params.sigma() * params.sigma();
    return std::sqrt(0.5 * (1.0 + s2));
}

// chart angles normalized so the unit ball is the flattening window
double window_angle_y(const HandleParams& params) {
    return params.eps_pow(params.s) * params.window() / params.sigma();
}
double window_angle_x(const HandleParams& params) {
    return params.eps_pow(params.s) * params.window() / R1_of(params);
}
double window_angle_gamma(const HandleParams& params) {
    return params.eps_pow(params.s) * params.window() * kSqrt2;
}

ModeState modes_from_charts(const HandleParams& params, const Eigen::VectorXd& q,
                            const Eigen::VectorXd& p, bool south) {
    if (q.size() != params.n - 1 || p.size() != params.n - 1)
        throw ContractViolation("sphere charts: dimension mismatch");
    if (q.norm() >= 1.0 || p.norm() >= 1.0)
        throw OutOfChart("sphere charts: value outside the unit ball");
    double sg = params.sigma();
    double es = params.eps_pow(params.s);
    double R1 = R1_of(params);
    Eigen::VectorXd uy = window_angle_y(params) * q;
    Eigen::VectorXd ux = window_angle_x(params) * p;
    double uy2 = uy.squaredNorm(), ux2 = ux.squaredNorm();
    double fq = 1.0 / std::sqrt(1.0 + uy2);
    double fp = 1.0 / std::sqrt(1.0 + ux2);
    // fp - fq stably
    double fpq = (uy2 - ux2) /
                 (std::sqrt(1.0 + ux2) * std::sqrt(1.0 + uy2) *
                  (std::sqrt(1.0 + uy2) + std::sqrt(1.0 + ux2)));
    ModeState st;
    double big = 0.5 * (std::sqrt(1.0 + sg * sg) * fp + sg * fq);
    double small =
        0.5 * sg * (fp * ((1.0 / (sg * sg)) / (std::sqrt(1.0 + 1.0 / (sg * sg)) + 1.0)) + fpq);
    if (south) {
        st.a = small;  // y1 = a - b = -sigma fq
        st.b = big;
    } else {
        st.a = big;    // y1 = +sigma fq
        st.b = small;
    }
    st.x2 = (R1 / es) * fp * ux;
    st.y2 = (sg / es) * fq * uy;
    return st;
}

SplitPoint modes_to_point(const HandleParams& params, const ModeState& st) {
    SplitPoint p = SplitPoint::zero(params.n);
    p.x1 = (st.a + st.b) / kSqrt2;
    p.y1 = st.a - st.b;
    p.x2 = st.x2;
    p.y2 = st.y2;
    return p;
}

ModeState flow_modes(const HandleParams& params, const ModeState& st, double t) {
    ModeState out = st;
    double E = std::exp(kSqrt2 * t);
    out.a = st.a * E;
    out.b = st.b / E;
    BlockFlow f2 = block_flow(params.eps2s(), t);
    for (Eigen::Index j = 0; j < out.x2.size(); ++j) f2.apply(out.x2[j], out.y2[j]);
    return out;
}

double ynorm2_modes(const HandleParams& params, const ModeState& st) {
    double y1 = st.a - st.b;
    return y1 * y1 + params.eps2s() * st.y2.squaredNorm();
}

double criterion_modes(const HandleParams& params, const ModeState& st) {
    return (st.a - st.b) * (st.a + st.b) / kSqrt2 + params.eps4s() * st.x2.dot(st.y2);
}

SphereChart charts_from_modes(const HandleParams& params, const ModeState& st, bool south) {
    double y1 = st.a - st.b;
    double x1 = (st.a + st.b) / kSqrt2;
    if (south ? (y1 >= 0.0) : (y1 <= 0.0))
        throw OutOfChart("charts_from_modes: state on the wrong y-hemisphere");
    if (x1 <= 0.0) throw OutOfChart("charts_from_modes: state on the wrong x-hemisphere");
    double es = params.eps_pow(params.s);
    SphereChart c;
    c.q = (es / (std::abs(y1) * window_angle_y(params))) * st.y2;
    c.p = (es / (x1 * window_angle_x(params))) * st.x2;
    return c;
}

// forward exit time onto the y-sphere, past the dip
double mode_exit_time(const HandleParams& params, const ModeState& st) {
    if (!(st.a > 0.0))
        throw OutOfChart("mode_exit_time: entry not in the through-passage cone (a <= 0)");
    double s2 = params.sigma() * params.sigma();
    auto g = [&](double t) { return ynorm2_modes(params, flow_modes(params, st, t)) - s2; };
    double lo = 0.0, step = 0.25, hi = step;
    int guard = 0;
    while (g(hi) <= 0.0) {
        lo = hi;
        hi += step;
        step *= 1.5;
        if (++guard > 120) throw NoConvergence("mode_exit_time: bracketing failed", g(lo));
    }
    for (int it = 0; it < 100; ++it) {
        double mid = 0.5 * (lo + hi);
        (g(mid) <= 0.0 ? lo : hi) = mid;
    }
    double t = 0.5 * (lo + hi);
    for (int it = 0; it < 4; ++it) {  // Newton polish at full relative accuracy
        ModeState z = flow_modes(params, st, t);
        double gp = 4.0 * criterion_modes(params, z);
        if (gp <= 0.0) break;
        t -= g(t) / gp;
    }
    return t;
}

double passage_action_rescaled(const HandleParams& params, const ModeState& st, double tau) {
    // fast part: 4x1^2 + y1^2 = 3a^2 + 3b^2 + 2ab
    double E = std::exp(kSqrt2 * tau);
    double ia = (E * E - 1.0) / (2.0 * kSqrt2);        // int e^{2 sqrt2 t}
    double ib = (1.0 - 1.0 / (E * E)) / (2.0 * kSqrt2);
    double fast = 3.0 * st.a * st.a * ia + 3.0 * st.b * st.b * ib + 2.0 * st.a * st.b * tau;
    double e2s = params.eps2s();
    double slow = block_action(e2s, tau, st.x2.squaredNorm(), st.x2.dot(st.y2),
                               st.y2.squaredNorm());
    return fast + e2s * slow;
}

}  // namespace

SplitPoint sphere_state(const HandleParams& params, const SphereChart& c, bool south) {
    return modes_to_point(params, modes_from_charts(params, c.q, c.p, south));
}

SphereChart charts_of_state(const HandleParams& params, const SplitPoint& point, bool south) {
    ModeState st;
    st.a = 0.5 * (kSqrt2 * point.x1 + point.y1);
    st.b = 0.5 * (kSqrt2 * point.x1 - point.y1);
    st.x2 = point.x2;
    st.y2 = point.y2;
    return charts_from_modes(params, st, south);
}

double fast_block_antiderivative(double x, double k) {
    double root = std::sqrt(std::max(0.0, 2.0 * x * x - k));
    return 1.5 * x * root + (k / (2.0 * kSqrt2)) * std::log(kSqrt2 * x + root);
}

// --- half-passage deviation ---------------------------------------------------
// Antiderivative of (6x^2-k)/sqrt(2x^2-k): F(x;k) = (3x/2) sqrt(2x^2-k)
//                                               + (k/(2 sqrt 2)) ln(sqrt2 x + sqrt(2x^2-k)).
// The deviation pairs the V_{+eps} half-passage against the matched V_{-eps}
// stub (same transverse block data over the same half-interval; the
// slow-block integrals then cancel identically and only the fast plane
// remains).
double half_passage_deviation(const HandleParams& params, const SplitPoint& w) {
    double e2s = params.eps2s();
    double sg = params.sigma();
    double s2 = sg * sg;
    double ex = e2s * w.x2.squaredNorm();
    double ey = e2s * w.y2.squaredNorm();
    double k2 = 2.0 * ex - ey;
    double kp = 1.0 - k2;   // fast level on V_{+eps}
    double km = -1.0 - k2;  // fast level of the matched V_{-eps} stub
    if (!(kp > 0.0))
        throw OutOfChart("half_passage_deviation: state outside the model window (k+ <= 0)");
    double A = s2 - ey;        // = 2 X1^2 - kp
    double B = s2 + 1.0 - ey;  // = 2 xs^2 - km
    if (!(A > 0.0) || !(s2 / 2.0 - ex > 0.0))
        throw OutOfChart("half_passage_deviation: transverse data exceeds the sphere scale");
    double X1 = std::sqrt(0.5 * (1.0 + s2) - ex);
    double xs = std::sqrt(0.5 * s2 - ex);
    // (3/2)(X1 sqrt A - xs sqrt B) without cancellation:
    double T1 = 1.5 * (ex - 0.5 * ey) / (X1 * std::sqrt(A) + xs * std::sqrt(B));
    auto G = [](double x, double k) { return std::log(kSqrt2 * x + std::sqrt(2.0 * x * x - k)); };
    auto Gv = [](double k) { return 0.5 * std::log(std::abs(k)); };
    double Lp = (kp / (2.0 * kSqrt2)) * (G(X1, kp) - Gv(kp));
    double Lm = (km / (2.0 * kSqrt2)) * (G(xs, km) - Gv(km));
    return T1 + Lp - Lm;
}

PassageResult through_handle_map(const HandleParams& params, const Eigen::VectorXd& q_entry,
                                 const Eigen::VectorXd& p_entry) {
    ModeState w = modes_from_charts(params, q_entry, p_entry, /*south=*/true);
    if (criterion_modes(params, w) >= 0.0)
        throw OutOfChart("through_handle_map: entry state is not inward");
    double tau = mode_exit_time(params, w);
    ModeState z = flow_modes(params, w, tau);
    PassageResult res;
    res.exit = charts_from_modes(params, z, /*south=*/false);
    res.exit_point = modes_to_point(params, z);
    res.tau = tau;
    res.deviation_rescaled = half_passage_deviation(params, modes_to_point(params, w)) +
                             half_passage_deviation(params, res.exit_point);
    res.action_paper = params.paper_scale() * passage_action_rescaled(params, w, tau);
    return res;
}

PassageResult through_handle_map_backward(const HandleParams& params,
                                          const Eigen::VectorXd& q_exit,
                                          const Eigen::VectorXd& p_exit) {
    ModeState w = modes_from_charts(params, q_exit, p_exit, /*south=*/false);
    if (criterion_modes(params, w) <= 0.0)
        throw OutOfChart("through_handle_map_backward: exit state is not outward");
    // time reversal (x, y, t) -> (x, -y, -t) swaps the modes
    ModeState refl{w.b, w.a, w.x2, -w.y2};
    double tau = mode_exit_time(params, refl);
    ModeState zr = flow_modes(params, refl, tau);
    ModeState z{zr.b, zr.a, zr.x2, -zr.y2};
    PassageResult res;
    res.exit = charts_from_modes(params, z, /*south=*/true);
    res.exit_point = modes_to_point(params, z);
    res.tau = tau;
    res.deviation_rescaled = half_passage_deviation(params, modes_to_point(params, w)) +
                             half_passage_deviation(params, res.exit_point);
    res.action_paper = params.paper_scale() * passage_action_rescaled(params, z, tau);
    return res;
}

PassageResult launch_from_gamma(const HandleParams& params, const Eigen::VectorXd& g_chart) {
    if (g_chart.size() != params.n - 1)
        throw ContractViolation("launch_from_gamma: chart dimension mismatch");
    if (g_chart.norm() >= 1.0) throw OutOfChart("launch_from_gamma: chart outside unit ball");
    double es = params.eps_pow(params.s);
    Eigen::VectorXd ug = window_angle_gamma(params) * g_chart;
    double fg = 1.0 / std::sqrt(1.0 + ug.squaredNorm());
    double Rg = 1.0 / kSqrt2;  // rescaled co-core sphere radius
    ModeState g;
    double x1 = Rg * fg;
    g.a = x1 / kSqrt2;  // y = 0 on Gamma: both modes equal
    g.b = x1 / kSqrt2;
    g.x2 = (Rg / es) * fg * ug;
    g.y2 = Eigen::VectorXd::Zero(params.n - 1);
    double tau = mode_exit_time(params, g);
    ModeState z = flow_modes(params, g, tau);
    PassageResult res;
    res.exit = charts_from_modes(params, z, /*south=*/false);
    res.exit_point = modes_to_point(params, z);
    res.tau = tau;
    res.deviation_rescaled = half_passage_deviation(params, res.exit_point);
    res.action_paper = params.paper_scale() * passage_action_rescaled(params, g, tau);
    return res;
}

LandingResult land_on_gamma(const HandleParams& params, const Eigen::VectorXd& q_entry,
                            const Eigen::VectorXd& p_entry) {
    ModeState w = modes_from_charts(params, q_entry, p_entry, /*south=*/true);
    if (!(w.a > 0.0))
        throw OutOfChart("land_on_gamma: trajectory does not cross y1 = 0 forward");
    // y1(t) = a E - b/E = 0 at E = sqrt(b/a), in closed form
    double t = std::log(w.b / w.a) / (2.0 * kSqrt2);
    ModeState z = flow_modes(params, w, t);
    double x1 = (z.a + z.b) / kSqrt2;
    double es = params.eps_pow(params.s);
    double wg = window_angle_gamma(params);
    LandingResult res;
    res.residual = (es / (x1 * wg)) * z.y2;  // would-be chart offset at the crossing
    res.gamma_chart = (es / (x1 * wg)) * z.x2;
    res.deviation_rescaled = half_passage_deviation(params, modes_to_point(params, w));
    res.action_paper = params.paper_scale() * passage_action_rescaled(params, w, t);
    return res;
}

double action_along_path(const HandleParams& params, const std::vector<SplitPoint>& samples) {
    if (samples.size() < 2) throw ContractViolation("action_along_path: need >= 2 samples");
    auto trapz = [&](std::size_t stride) {
        KahanSum acc;
        std::size_t last = 0;
        for (std::size_t i = stride; i < samples.size(); i += stride) {
            TangentVec d = samples[i] - samples[last];
            acc.add(0.5 * (eval_alpha(samples[last], d) + eval_alpha(samples[i], d)));
            last = i;
        }
        if (last != samples.size() - 1) {
            TangentVec d = samples.back() - samples[last];
            acc.add(0.5 * (eval_alpha(samples[last], d) + eval_alpha(samples.back(), d)));
        }
        return acc.value();
    };
    double fine = trapz(1);
    double out = fine;
    if (samples.size() >= 5) {
        double coarse = trapz(2);
        out = fine + (fine - coarse) / 3.0;  // Richardson for the trapezoid rule
    }
    return params.paper_scale() * out;
}

}  // namespace reeblab
