#include "reeblab/strips.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <sstream>

#include <json.hpp>

namespace reeblab {

namespace {
constexpr double kSqrt2 = 1.4142135623730950488;

// adaptive Simpson
double simpson(const std::function<double(double)>& f, double a, double b, double fa, double fb,
               double fm, double tol, int depth) {
    double m = 0.5 * (a + b);
    double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
    double flm = f(lm), frm = f(rm);
    double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    if (depth <= 0 || std::abs(left + right - whole) < 15.0 * tol)
        return left + right + (left + right - whole) / 15.0;
    return simpson(f, a, m, fa, fm, flm, 0.5 * tol, depth - 1) +
           simpson(f, m, b, fm, fb, frm, 0.5 * tol, depth - 1);
}

double integrate(const std::function<double(double)>& f, double a, double b, double tol) {
    if (b <= a) return 0.0;
    double m = 0.5 * (a + b);
    return simpson(f, a, b, f(a), f(b), f(m), tol, 48);
}

double lower_branch(double x) { return std::sqrt(std::max(0.0, 2.0 * x * x - 1.0)); }
double upper_branch(double x) { return std::sqrt(2.0 * x * x + 1.0); }

}  // namespace

StripRegion build_strip(const HandleParams& params, const StripOptions& opts) {
    params.validate();
    StripRegion strip;
    strip.params = params;
    strip.variant = opts.variant;
    strip.arm_reach = opts.arm_reach > 0.0 ? opts.arm_reach : params.eps_pow(params.s - params.p);
    strip.corner_count = opts.variant == StripVariant::TwoCorner ? 2 : 1;
    const int quadrants = strip.corner_count;
    const int d = params.n - 1;
    Eigen::VectorXd off = opts.x2_offset.size() == d ? opts.x2_offset : Eigen::VectorXd::Zero(d);

    double kappa = strip.arm_reach * (2.0 * strip.arm_reach * strip.arm_reach - 1.0);
    for (int quad = 0; quad < quadrants; ++quad) {
        double sx = quad == 0 ? 1.0 : -1.0;  // quadrant III is the mirror image
        std::vector<std::vector<SplitPoint>> rows;
        for (int i = 0; i < opts.nu; ++i) {
            // log-spaced abscissa along the arm, denser near the corner
            double f = static_cast<double>(i) / (opts.nu - 1);
            double x = strip.arm_reach * (std::expm1(4.0 * f) / std::expm1(4.0));
            double ylo = lower_branch(x);
            double yhi = upper_branch(x);
            if (x > 0.0) yhi = std::min(yhi, std::sqrt(kappa / x));
            if (yhi < ylo) continue;
            std::vector<SplitPoint> row;
            for (int j = 0; j < opts.nv; ++j) {
                double y = ylo + (yhi - ylo) * j / (opts.nv - 1);
                SplitPoint pt = SplitPoint::zero(params.n);
                pt.x1 = sx * x;
                pt.y1 = sx * (y * std::cos(opts.tilt));
                pt.x2 = off;
                if (opts.tilt != 0.0) pt.x2[0] += sx * y * std::sin(opts.tilt);
                row.push_back(pt);
            }
            rows.push_back(std::move(row));
        }
        strip.grid.push_back(std::move(rows));
    }
    return strip;
}

double holomorphicity_residual(const HandleParams& params, const StripRegion& strip) {
    (void)params;
    // J_c in the model window: d_x1 -> d_y1 and J_0 on the transverse block
    auto jc = [](const TangentVec& v) {
        return TangentVec(-v.y1, v.x1, -1.0 * v.y2, v.x2);
    };
    auto flat = [](const SplitPoint& pp) {
        Eigen::VectorXd v(2 + 2 * pp.x2.size());
        v[0] = pp.x1;
        v[1] = pp.y1;
        for (Eigen::Index k = 0; k < pp.x2.size(); ++k) {
            v[2 + 2 * k] = pp.x2[k];
            v[3 + 2 * k] = pp.y2[k];
        }
        return v;
    };
    double worst = 0.0;
    for (const auto& quad : strip.grid) {
        for (std::size_t i = 0; i + 1 < quad.size(); ++i) {
            if (quad[i].size() < 2 || quad[i + 1].size() < 2) continue;
            for (std::size_t j = 0; j + 1 < quad[i].size(); ++j) {
                TangentVec tu = quad[i + 1][j] - quad[i][j];
                TangentVec tv = quad[i][j + 1] - quad[i][j];
                Eigen::MatrixXd basis(flat(tu).size(), 2);
                basis.col(0) = flat(tu);
                basis.col(1) = flat(tv);
                Eigen::HouseholderQR<Eigen::MatrixXd> qr(basis);
                Eigen::MatrixXd Q = qr.householderQ() * Eigen::MatrixXd::Identity(basis.rows(), 2);
                for (int b = 0; b < 2; ++b) {
                    TangentVec u = b == 0 ? tu : tv;
                    double un = u.norm();
                    if (un == 0.0) continue;
                    Eigen::VectorXd ju = flat(jc(u)) / un;
                    Eigen::VectorXd res = ju - Q * (Q.transpose() * ju);
                    worst = std::max(worst, res.norm());
                }
            }
        }
    }
    return worst;
}

StripEnergy strip_energy(const HandleParams& params, const StripRegion& strip) {
    const double r = strip.arm_reach;
    if (!(r > 1.0)) throw ContractViolation("strip_energy: arm reach must exceed the core");
    const double kappa = r * (2.0 * r * r - 1.0);
    // the cut meets gamma_- at xm = r - delta with
    // delta (6r^2 - 6r delta + 2 delta^2 + 1) = 2r; the small difference is
    // carried explicitly or everything downstream cancels at r^2 magnitudes
    double delta = 1.0 / (3.0 * r);
    for (int it = 0; it < 6; ++it)
        delta = 2.0 * r / (6.0 * r * r - 6.0 * r * delta + 2.0 * delta * delta + 1.0);
    const double xm = r - delta;

    // area, closed form: int sqrt(2x^2+1) over [0, 1/sqrt2], the stable
    // branch-width antiderivative W = int (upper - lower) over [1/sqrt2, xm],
    // and a narrow sliver between the cut and gamma_+ over [xm, r]
    auto A1 = [](double x) {  // int sqrt(2x^2+1) dx
        return 0.5 * x * std::sqrt(2.0 * x * x + 1.0) + std::asinh(kSqrt2 * x) / (2.0 * kSqrt2);
    };
    auto W = [](double x) {  // int (sqrt(2x^2+1) - sqrt(2x^2-1)) dx, x >= 1/sqrt2
        double up = std::sqrt(2.0 * x * x + 1.0);
        double lo = std::sqrt(std::max(0.0, 2.0 * x * x - 1.0));
        return x / (up + lo) +
               (std::asinh(kSqrt2 * x) + std::log(kSqrt2 * x + lo)) / (2.0 * kSqrt2);
    };
    double area_q = A1(1.0 / kSqrt2) - A1(0.0) + W(xm) - W(1.0 / kSqrt2);
    {
        // sliver: integrand (sqrt(kappa/x) - sqrt(2x^2-1)) in difference form
        auto f = [&](double x) {
            double num = (r - x) * (2.0 * (r * r + r * x + x * x) - 1.0) / x;
            return num / (std::sqrt(kappa / x) + std::sqrt(std::max(0.0, 2.0 * x * x - 1.0)));
        };
        int n = 64;
        double h = (r - xm) / n, acc = f(xm) + f(r);
        for (int i = 1; i < n; ++i) acc += f(xm + i * h) * (i % 2 ? 4.0 : 2.0);
        area_q += acc * h / 3.0;
    }

    // action gap along the bounding chord arcs: F(r;1) - F(xm;-1) with the
    // quartic difference factored through delta
    double up_r = std::sqrt(2.0 * r * r - 1.0), up_m = std::sqrt(2.0 * xm * xm + 1.0);
    double num = (r * r + xm * xm) * (2.0 * delta * (2.0 * r - delta) - 1.0);
    double T = num / (r * up_r + xm * up_m);
    double gap_q = 1.5 * T + (std::log(kSqrt2 * r + up_r) + std::log(kSqrt2 * xm + up_m)) /
                                 (2.0 * kSqrt2);

    // alpha vanishes identically on the Liouville cut and on the L/C planes
    double cut_q = 0.0;
    double corner_q = 0.0;

    int quads = strip.corner_count;
    StripEnergy en;
    double ps = params.paper_scale();
    en.area = ps * quads * area_q;
    en.action_gap = ps * quads * gap_q;
    en.cut_term = ps * quads * cut_q;
    en.corner_terms = ps * quads * corner_q;
    en.stokes_residual = std::abs(quads * (area_q - gap_q - cut_q - corner_q));
    return en;
}

double strip_slice_closed_form(const HandleParams& params, double x_lo, double x_hi) {
    // int sqrt(eps^{2p} + 2x^2) dx - int sqrt2 x dx, in closed form
    double e2p = params.paper_scale();
    auto F = [&](double x) {
        double r = std::sqrt(e2p + 2.0 * x * x);
        return 0.5 * x * r + (e2p / (2.0 * kSqrt2)) * std::asinh(kSqrt2 * x / std::sqrt(e2p)) -
               x * x / kSqrt2;
    };
    return F(x_hi) - F(x_lo);
}

double strip_slice_quadrature(const HandleParams& params, double x_lo, double x_hi) {
    double e2p = params.paper_scale();
    return integrate(
        [&](double x) {
            // sqrt(eps^{2p}+2x^2) - sqrt2 x without cancellation
            return e2p / (std::sqrt(e2p + 2.0 * x * x) + kSqrt2 * x);
        },
        x_lo, x_hi, 1e-16);
}

MonotonicityReport monotonicity_probe(const HandleParams& params, bool control_q_equals_p) {
    params.validate();
    MonotonicityReport rep;
    double xlo = params.eps_pow(params.s + 1.0);
    double xhi = params.eps_pow(params.s);
    rep.a_strip = strip_slice_quadrature(params, xlo, xhi);
    double q_eff = control_q_equals_p ? params.p : params.q;
    rep.a_escape = params.eps_pow(2.0 * q_eff);
    rep.ratio = rep.a_strip / rep.a_escape;
    rep.margin = rep.ratio / params.eps_pow(2.0 * (params.p - q_eff));
    rep.pass = rep.ratio <= 0.1;
    return rep;
}

// --- linearized operator -------------------------------------------------------

namespace {

struct ScalarKernel {
    int dim = 0;
    int augmented_dim = 0;
    double gap = 0.0;
};

// One complex component of the linearized operator on [-S,S] x [0,1]:
// box-scheme Cauchy-Riemann rows, plane boundary conditions in t, spectral
// mode conditions at the cut ends implementing the weighted-space decay.
// The marching structure leaves 2 nt free modes, so each end kills exactly
// its inadmissible half of the discrete mode set.
ScalarKernel scalar_kernel(double S, double delta, bool matching, int ns, int nt,
                           bool* borderline, bool with_augmented = true) {
    const int nsp = ns + 1, ntp = nt + 1;
    const int nu = nsp * ntp;        // nodes
    const int nvar = 2 * nu;         // Re, Im
    auto re = [&](int i, int j) { return 2 * (i * ntp + j); };
    auto im = [&](int i, int j) { return 2 * (i * ntp + j) + 1; };
    double hs = 2.0 * S / ns, ht = 1.0 / nt;

    struct Entry {
        int r, c;
        double v;
    };
    std::vector<Entry> trip;
    int row = 0;
    auto add = [&](int r, int c, double v) { trip.push_back({r, c, v}); };

    for (int i = 0; i < ns; ++i)
        for (int j = 0; j < nt; ++j) {
            // real part: ds Re - dt Im = 0 at the cell center
            double cs = 1.0 / (2.0 * hs), ct = 1.0 / (2.0 * ht);
            add(row, re(i + 1, j), cs);
            add(row, re(i + 1, j + 1), cs);
            add(row, re(i, j), -cs);
            add(row, re(i, j + 1), -cs);
            add(row, im(i, j + 1), -ct);
            add(row, im(i + 1, j + 1), -ct);
            add(row, im(i, j), ct);
            add(row, im(i + 1, j), ct);
            ++row;
            // imaginary part: ds Im + dt Re = 0
            add(row, im(i + 1, j), cs);
            add(row, im(i + 1, j + 1), cs);
            add(row, im(i, j), -cs);
            add(row, im(i, j + 1), -cs);
            add(row, re(i, j + 1), ct);
            add(row, re(i + 1, j + 1), ct);
            add(row, re(i, j), -ct);
            add(row, re(i + 1, j), -ct);
            ++row;
        }
    // boundary planes: u(s,0) in R, u(s,1) in iR (or R for the control)
    for (int i = 0; i < nsp; ++i) {
        add(row++, im(i, 0), 1.0);
        if (matching)
            add(row++, im(i, nt), 1.0);
        else
            add(row++, re(i, nt), 1.0);
    }
    // end conditions: kill modes with mu >= delta at +S and mu <= -delta at
    // -S; the ranges below tile the discrete mode space exactly
    std::vector<double> mus_plus, mus_minus;
    for (int k = 0; k < nt; ++k)
        mus_plus.push_back(matching ? (k + 1) * M_PI : (k + 0.5) * M_PI);
    for (int k = 1; k <= nt; ++k)
        mus_minus.push_back(matching ? -k * M_PI : (-k + 0.5) * M_PI);
    if (borderline) {
        double mu_min = matching ? M_PI : 0.5 * M_PI;
        *borderline = !(delta > 0.0 && delta < mu_min);
        for (double mu : mus_plus)
            if (std::abs(std::abs(mu) - delta) < 1e-9) *borderline = true;
        if (matching && delta <= 0.0) *borderline = true;  // the zero mode sits on the weight
    }
    auto end_row = [&](int icol, double mu) {
        int r = row++;
        for (int j = 0; j <= nt; ++j) {
            double w = (j == 0 || j == nt) ? 0.5 * ht : ht;
            add(r, re(icol, j), w * std::cos(mu * j * ht));
            add(r, im(icol, j), w * std::sin(mu * j * ht));
        }
    };
    for (double mu : mus_plus)
        if (mu >= delta) end_row(ns, mu);
    for (double mu : mus_minus)
        if (mu <= -delta) end_row(0, mu);

    Eigen::MatrixXd A = Eigen::MatrixXd::Zero(row, nvar);
    for (const auto& t : trip) A(t.r, t.c) += t.v;

    // two cut-off translation solutions: the lowest decaying mode at each
    // end, cut off across the middle of the strip
    double mu_dec = matching ? -M_PI : -0.5 * M_PI;  // decays toward +infinity
    Eigen::VectorXd v1 = Eigen::VectorXd::Zero(nvar), v2 = Eigen::VectorXd::Zero(nvar);
    auto beta = [&](double x) {  // smoothstep on [0,1]
        double u = std::clamp(x, 0.0, 1.0);
        return u * u * (3.0 - 2.0 * u);
    };
    for (int i = 0; i < nsp; ++i) {
        double s = -S + i * hs;
        for (int j = 0; j <= nt; ++j) {
            double t = j * ht;
            double b1 = beta(s / S);                 // lives near +S
            double b2 = beta(-s / S);                // lives near -S
            v1[re(i, j)] = b1 * std::exp(mu_dec * s) * std::cos(mu_dec * t);
            v1[im(i, j)] = b1 * std::exp(mu_dec * s) * std::sin(mu_dec * t);
            v2[re(i, j)] = b2 * std::exp(-mu_dec * s) * std::cos(-mu_dec * t);
            v2[im(i, j)] = b2 * std::exp(-mu_dec * s) * std::sin(-mu_dec * t);
        }
    }

    auto kernel_count = [&](const Eigen::MatrixXd& M, double* gap) {
        Eigen::MatrixXd G = M.transpose() * M;
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(G, Eigen::EigenvaluesOnly);
        Eigen::VectorXd sv = es.eigenvalues().cwiseMax(0.0).cwiseSqrt();
        double smax = sv.maxCoeff();
        int dim = 0;
        double last_in = 0.0, first_out = smax;
        for (int i = 0; i < sv.size(); ++i) {
            if (sv[i] < 1e-7 * smax) {
                ++dim;
                last_in = std::max(last_in, sv[i]);
            } else {
                first_out = std::min(first_out, sv[i]);
            }
        }
        if (gap) *gap = (dim > 0 && last_in > 0.0) ? first_out / last_in : first_out / (1e-30 + last_in);
        return dim;
    };

    ScalarKernel out;
    out.dim = kernel_count(A, &out.gap);
    out.augmented_dim = out.dim;
    if (with_augmented) {
        Eigen::MatrixXd Aug(row, nvar + 2);
        Aug.leftCols(nvar) = A;
        Aug.col(nvar) = A * v1;
        Aug.col(nvar + 1) = A * v2;
        out.augmented_dim = kernel_count(Aug, nullptr);
    }
    return out;
}

}  // namespace

KernelReport linearized_kernel_dim(const HandleParams& params, const KernelOptions& opts) {
    KernelReport rep;
    bool borderline = false;
    ScalarKernel coarse =
        scalar_kernel(opts.t0, opts.delta, opts.matching_boundary, opts.ns, opts.nt, &borderline);
    rep.borderline_weight = borderline;
    rep.sigma_gap = coarse.gap;
    if (coarse.gap < 1e3 && !borderline)
        throw ResolutionError("linearized_kernel_dim: singular value gap too small");
    if (opts.check_refinement) {
        ScalarKernel fine = scalar_kernel(opts.t0, opts.delta, opts.matching_boundary, 2 * opts.ns,
                                          2 * opts.nt, nullptr, /*with_augmented=*/false);
        if (fine.dim != coarse.dim)
            throw ResolutionError("linearized_kernel_dim: kernel unstable under refinement");
    }
    rep.dim = params.n * coarse.dim;  // the components decouple
    rep.augmented_dim = params.n * coarse.dim + (coarse.augmented_dim - coarse.dim) * 1;
    return rep;
}

std::string strip_to_json(const StripRegion& strip) {
    nlohmann::json doc;
    doc["variant"] = strip.variant == StripVariant::TwoCorner ? "two-corner" : "one-corner";
    doc["corner_count"] = strip.corner_count;
    doc["arm_reach_rescaled"] = strip.arm_reach;
    doc["epsilon"] = strip.params.epsilon;
    nlohmann::json quads = nlohmann::json::array();
    for (const auto& quad : strip.grid) {
        nlohmann::json rows = nlohmann::json::array();
        for (const auto& r : quad) {
            nlohmann::json row = nlohmann::json::array();
            for (const auto& pt : r) row.push_back({pt.x1, pt.y1});
            rows.push_back(row);
        }
        quads.push_back(rows);
    }
    doc["grid_x1y1"] = quads;
    return doc.dump();
}

}  // namespace reeblab
