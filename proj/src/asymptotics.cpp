#include "reeblab/asymptotics.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>

#include <json.hpp>

namespace reeblab {

using nlohmann::json;

namespace {
constexpr double kTwoPi = 6.2831853071795864769252867665590;

// Spectral differentiation matrix for period-1 loops on M uniform points;
// antisymmetric for both parities.
Eigen::MatrixXd fourier_diff_matrix(int M) {
    Eigen::MatrixXd D = Eigen::MatrixXd::Zero(M, M);
    for (int i = 0; i < M; ++i)
        for (int j = 0; j < M; ++j) {
            if (i == j) continue;
            double h = kTwoPi * (i - j) / M;  // angle difference
            double v;
            if (M % 2 == 1)
                v = 0.5 / std::sin(0.5 * h);
            else
                v = 0.5 / std::tan(0.5 * h);
            if ((i - j) % 2 != 0) v = -v;
            D(i, j) = kTwoPi * v;  // d/dt with period 1
        }
    return D;
}

// Dirichlet-kernel trigonometric interpolation of a periodic sample set.
double trig_interp_weight(int M, double x) {  // x = t*M - j, in grid units
    double sx = std::sin(M_PI * x);
    if (std::abs(sx) < 1e-14) return (std::abs(std::remainder(x, M)) < 0.5) ? 1.0 : 0.0;
    if (M % 2 == 1) return sx / (M * std::sin(M_PI * x / M));
    return sx / (M * std::tan(M_PI * x / M));
}
}  // namespace

void AsymptoticOperatorSpec::validate() const {
    if (d < 1) throw ContractViolation("AsymptoticOperatorSpec: d >= 1 required");
    if (samples.size() < 9) throw ContractViolation("AsymptoticOperatorSpec: too few samples");
    for (const auto& m : samples) {
        if (m.rows() != 2 * d || m.cols() != 2 * d)
            throw ContractViolation("AsymptoticOperatorSpec: sample size mismatch");
        if ((m - m.transpose()).cwiseAbs().maxCoeff() > 1e-12)
            throw ContractViolation("AsymptoticOperatorSpec: sample not symmetric");
    }
    if ((samples.front() - samples.back()).cwiseAbs().maxCoeff() > 1e-12)
        throw ContractViolation("AsymptoticOperatorSpec: loop does not close");
}

AsymptoticOperatorSpec AsymptoticOperatorSpec::constant(int d, const Eigen::MatrixXd& s0, int grid) {
    AsymptoticOperatorSpec spec;
    spec.d = d;
    spec.samples.assign(grid + 1, s0);
    return spec;
}

namespace {

// S0 resampled on a finer grid by trigonometric interpolation
AsymptoticOperatorSpec resample(const AsymptoticOperatorSpec& spec, int grid) {
    int M = spec.grid_size();
    AsymptoticOperatorSpec out;
    out.d = spec.d;
    out.samples.resize(grid + 1);
    for (int i = 0; i <= grid; ++i) {
        double t = static_cast<double>(i) / grid;
        Eigen::MatrixXd acc = Eigen::MatrixXd::Zero(2 * spec.d, 2 * spec.d);
        for (int j = 0; j < M; ++j) acc += trig_interp_weight(M, t * M - j) * spec.samples[j];
        out.samples[i] = 0.5 * (acc + acc.transpose());
    }
    out.samples[grid] = out.samples[0];
    return out;
}

std::vector<double> negative_levels(const AsymptoticOperatorSpec& spec, int count,
                                    std::vector<std::vector<Eigen::MatrixXd>>* bases,
                                    std::vector<std::vector<double>>* raw_groups) {
    const int M = spec.grid_size();
    const int d2 = 2 * spec.d;
    Eigen::MatrixXd D = fourier_diff_matrix(M);
    Eigen::MatrixXd J0 = Eigen::MatrixXd::Zero(d2, d2);
    for (int k = 0; k < spec.d; ++k) {
        J0(k, spec.d + k) = -1.0;  // J0 (x,y) = (-y, x)
        J0(spec.d + k, k) = 1.0;
    }
    Eigen::MatrixXd A = Eigen::MatrixXd::Zero(M * d2, M * d2);
    for (int i = 0; i < M; ++i)
        for (int j = 0; j < M; ++j)
            if (D(i, j) != 0.0) A.block(i * d2, j * d2, d2, d2) = -D(i, j) * J0;
    for (int i = 0; i < M; ++i) A.block(i * d2, i * d2, d2, d2) -= spec.samples[i];
    A = 0.5 * (A + A.transpose()).eval();
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(A);
    const auto& ev = es.eigenvalues();

    // negative eigenvalues, descending from zero, clustered into levels
    std::vector<int> idx;
    for (int i = 0; i < ev.size(); ++i)
        if (ev[i] < -1e-9) idx.push_back(i);
    std::sort(idx.begin(), idx.end(), [&](int a, int b) { return ev[a] > ev[b]; });

    std::vector<double> levels;
    double scale = std::max(1.0, std::abs(ev[idx.empty() ? 0 : idx.front()]));
    std::size_t i = 0;
    while (i < idx.size() && static_cast<int>(levels.size()) < count) {
        double lam = ev[idx[i]];
        std::vector<int> group{idx[i]};
        std::size_t j = i + 1;
        while (j < idx.size() && std::abs(ev[idx[j]] - lam) < 1e-6 * std::max(scale, std::abs(lam))) {
            group.push_back(idx[j]);
            ++j;
        }
        double mean = 0.0;
        for (int g : group) mean += ev[g];
        mean /= group.size();
        levels.push_back(mean);
        if (bases) {
            std::vector<Eigen::MatrixXd> basis;
            for (int g : group) {
                Eigen::VectorXd v = es.eigenvectors().col(g);
                Eigen::MatrixXd loop(M, d2);
                for (int r = 0; r < M; ++r) loop.row(r) = v.segment(r * d2, d2).transpose();
                loop *= std::sqrt(static_cast<double>(M));  // unit L2 norm on the circle
                basis.push_back(loop);
            }
            bases->push_back(std::move(basis));
        }
        if (raw_groups) {
            std::vector<double> g;
            for (int gg : group) g.push_back(ev[gg]);
            raw_groups->push_back(g);
        }
        i = j;
    }
    return levels;
}

}  // namespace

SpectrumResult spectrum(const AsymptoticOperatorSpec& spec, int count) {
    spec.validate();
    if (count < 1) throw ContractViolation("spectrum: count >= 1 required");
    const int M = spec.grid_size();
    if (M < 8 * count) throw ContractViolation("spectrum: need M >= 8 K samples");

    std::vector<std::vector<Eigen::MatrixXd>> bases;
    std::vector<double> levels = negative_levels(spec, count, &bases, nullptr);
    if (static_cast<int>(levels.size()) < count)
        throw NoConvergence("spectrum: fewer negative levels than requested", 0.0);
    std::vector<double> fine = negative_levels(resample(spec, 2 * M), count, nullptr, nullptr);

    SpectrumResult out;
    out.d = spec.d;
    out.grid_size = M;
    for (int i = 0; i < M; ++i) out.t_grid.push_back(static_cast<double>(i) / M);
    for (int k = 0; k < count; ++k) {
        SpectralLevel lvl;
        lvl.lambda = levels[k];
        lvl.refine_error =
            (k < static_cast<int>(fine.size())) ? std::abs(levels[k] - fine[k]) : 0.0;
        lvl.basis = std::move(bases[k]);
        out.levels.push_back(std::move(lvl));
    }
    return out;
}

// --- Conley-Zehnder ------------------------------------------------------------

namespace {

double det_phi_minus_id(const Eigen::MatrixXd& phi) {
    return (phi - Eigen::MatrixXd::Identity(phi.rows(), phi.cols())).determinant();
}

// omega(u, v) = <J0 u, v> with J0 (x,y) = (-y, x), coordinates (x..., y...)
Eigen::MatrixXd omega_matrix(int d2) {
    int d = d2 / 2;
    Eigen::MatrixXd J0 = Eigen::MatrixXd::Zero(d2, d2);
    for (int k = 0; k < d; ++k) {
        J0(k, d + k) = -1.0;
        J0(d + k, k) = 1.0;
    }
    return J0.transpose();
}

// signature of the crossing form on the numerical kernel of Phi(t)-I
int crossing_signature(const Eigen::MatrixXd& phi, const Eigen::MatrixXd& phidot,
                       double kernel_tol = 1e-6) {
    const int d2 = static_cast<int>(phi.rows());
    Eigen::MatrixXd m = phi - Eigen::MatrixXd::Identity(d2, d2);
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(m, Eigen::ComputeFullV);
    double smax = svd.singularValues().maxCoeff();
    std::vector<int> kerns;
    for (int i = 0; i < d2; ++i)
        if (svd.singularValues()[i] < kernel_tol * std::max(1.0, smax)) kerns.push_back(i);
    if (kerns.empty()) return 0;
    Eigen::MatrixXd K(d2, kerns.size());
    for (std::size_t i = 0; i < kerns.size(); ++i) K.col(i) = svd.matrixV().col(kerns[i]);
    Eigen::MatrixXd W = omega_matrix(d2);
    Eigen::MatrixXd Q = K.transpose() * W * phidot * K;
    Q = 0.5 * (Q + Q.transpose()).eval();
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(Q);
    int sig = 0;
    double qmax = es.eigenvalues().cwiseAbs().maxCoeff();
    for (int i = 0; i < es.eigenvalues().size(); ++i) {
        if (es.eigenvalues()[i] > 1e-8 * std::max(1.0, qmax)) ++sig;
        if (es.eigenvalues()[i] < -1e-8 * std::max(1.0, qmax)) --sig;
    }
    return sig;
}

}  // namespace

int cz_index(const std::vector<Eigen::MatrixXd>& path) {
    if (path.size() < 3) throw ContractViolation("cz_index: need at least 3 samples");
    const int d2 = static_cast<int>(path.front().rows());
    if (d2 % 2 != 0 || path.front().cols() != d2)
        throw ContractViolation("cz_index: matrices must be even-dimensional and square");
    if ((path.front() - Eigen::MatrixXd::Identity(d2, d2)).cwiseAbs().maxCoeff() > 1e-10)
        throw ContractViolation("cz_index: path must start at the identity");
    const int N = static_cast<int>(path.size()) - 1;
    double dt = 1.0 / N;
    if (std::abs(det_phi_minus_id(path.back())) < 1e-10)
        throw DegenerateEndpoint("cz_index: Phi(1) has eigenvalue 1 (degenerate endpoint)");

    auto phidot = [&](int i) {
        if (i == 0) return (path[1] - path[0]) * (1.0 / dt);
        if (i == N) return (path[N] - path[N - 1]) * (1.0 / dt);
        return (path[i + 1] - path[i - 1]) * (0.5 / dt);
    };

    // endpoint term: the kernel at t=0 is everything
    double total = 0.5 * crossing_signature(path[0], phidot(0));

    // Interior crossings: det(Phi - I) can vanish to even order (no sign
    // change), so candidates come from the three-point parabola minimum
    // around each local minimum of |g|.
    std::vector<double> g(N + 1);
    for (int i = 0; i <= N; ++i) g[i] = det_phi_minus_id(path[i]);
    double gscale = 0.0;
    for (double v : g) gscale = std::max(gscale, std::abs(v));
    double tol = 1e-5 * std::max(1.0, gscale);
    for (int i = 1; i < N; ++i) {
        bool local_min = std::abs(g[i]) <= std::abs(g[i - 1]) && std::abs(g[i]) <= std::abs(g[i + 1]);
        bool sign_change = g[i - 1] * g[i] < 0.0 || g[i] * g[i + 1] < 0.0;
        if (!local_min && !sign_change) continue;
        double curv = g[i + 1] - 2.0 * g[i] + g[i - 1];
        double par_min = g[i];
        double frac = 0.0;  // vertex offset in grid units, clamped to [-1,1]
        if (curv != 0.0) {
            frac = -(g[i + 1] - g[i - 1]) / (2.0 * curv);
            frac = std::max(-1.0, std::min(1.0, frac));
            par_min = g[i] - (g[i + 1] - g[i - 1]) * (g[i + 1] - g[i - 1]) / (8.0 * curv);
        }
        if (!(std::abs(par_min) < tol || sign_change)) continue;
        // interpolate the path to the refined crossing time
        int j0 = frac < 0.0 ? i - 1 : i;
        double w = frac < 0.0 ? 1.0 + frac : frac;
        Eigen::MatrixXd phi_star = (1.0 - w) * path[j0] + w * path[j0 + 1];
        // kernel tolerance matched to the interpolation error
        double ktol = std::max(1e-6, 32.0 * dt);
        total += crossing_signature(phi_star, phidot(i), ktol);
        while (i + 1 < N && std::abs(g[i + 1]) < tol) ++i;  // same crossing's plateau
    }
    double rounded = std::round(total);
    if (std::abs(total - rounded) > 1e-6)
        throw NoConvergence("cz_index: crossing sum is not an integer", total - rounded);
    return static_cast<int>(rounded);
}

int cz_grading(const std::vector<Eigen::MatrixXd>& path, int n) {
    return cz_index(path) + (n - 3);
}

// --- tails ---------------------------------------------------------------------

void TailSample::validate() const {
    if (s_grid.size() < 4) throw ContractViolation("TailSample: need >= 4 s samples");
    if (s_grid.back() <= s_grid.front()) throw ContractViolation("TailSample: s1 > s0 required");
    if (values.size() != s_grid.size()) throw ContractViolation("TailSample: values/s_grid mismatch");
    for (const auto& v : values)
        if (v.rows() != static_cast<Eigen::Index>(t_grid.size()))
            throw ContractViolation("TailSample: values/t_grid mismatch");
    // decaying sup norm: the last decile must sit below the first
    auto sup = [&](std::size_t i) { return values[i].cwiseAbs().maxCoeff(); };
    std::size_t k = std::max<std::size_t>(1, s_grid.size() / 10);
    double head = 0.0, tail = 0.0;
    for (std::size_t i = 0; i < k; ++i) head = std::max(head, sup(i));
    for (std::size_t i = s_grid.size() - k; i < s_grid.size(); ++i) tail = std::max(tail, sup(i));
    if (!(tail < head))
        throw ContractViolation("TailSample: sup norm does not decay along s");
}

std::string tail_to_json(const TailSample& tail) {
    json doc;
    doc["s_grid"] = tail.s_grid;
    doc["t_grid"] = tail.t_grid;
    json vals = json::array();
    for (const auto& m : tail.values) {
        json rows = json::array();
        for (Eigen::Index r = 0; r < m.rows(); ++r) {
            json row = json::array();
            for (Eigen::Index c = 0; c < m.cols(); ++c) {
                row.push_back(m(r, c).real());
                row.push_back(m(r, c).imag());
            }
            rows.push_back(row);
        }
        vals.push_back(rows);
    }
    doc["values"] = vals;
    return doc.dump();
}

TailSample tail_from_json(const std::string& text) {
    json doc = json::parse(text);
    TailSample tail;
    for (const auto& v : doc.at("s_grid")) tail.s_grid.push_back(v.get<double>());
    for (const auto& v : doc.at("t_grid")) tail.t_grid.push_back(v.get<double>());
    for (const auto& rows : doc.at("values")) {
        if (rows.empty()) throw ContractViolation("tail_from_json: empty value row");
        Eigen::Index nt = rows.size(), d = rows[0].size() / 2;
        Eigen::MatrixXcd m(nt, d);
        for (Eigen::Index r = 0; r < nt; ++r)
            for (Eigen::Index c = 0; c < d; ++c)
                m(r, c) = std::complex<double>(rows[r][2 * c].get<double>(),
                                               rows[r][2 * c + 1].get<double>());
        tail.values.push_back(std::move(m));
    }
    tail.validate();
    return tail;
}

TailSample load_tail(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ContractViolation("load_tail: cannot open '" + path + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return tail_from_json(ss.str());
}

namespace {

// basis loop evaluated at arbitrary t by trigonometric interpolation,
// returned as a complex d-vector (pairs (x,y) -> x + iy)
Eigen::VectorXcd eval_loop(const Eigen::MatrixXd& loop, double t) {
    const int M = static_cast<int>(loop.rows());
    const int d = static_cast<int>(loop.cols()) / 2;
    Eigen::VectorXd acc = Eigen::VectorXd::Zero(2 * d);
    for (int j = 0; j < M; ++j) acc += trig_interp_weight(M, t * M - j) * loop.row(j).transpose();
    Eigen::VectorXcd z(d);
    for (int k = 0; k < d; ++k) z[k] = std::complex<double>(acc[k], acc[d + k]);
    return z;
}

}  // namespace

TailFit fit_tail(const TailSample& tail, const SpectrumResult& spec, double noise_floor,
                 double residual_threshold) {
    tail.validate();
    const int ns = static_cast<int>(tail.s_grid.size());
    const int nt = static_cast<int>(tail.t_grid.size());
    const int d = spec.d;
    if (tail.values.front().cols() != d)
        throw ContractViolation("fit_tail: tail dimension does not match the spectrum");

    int ncols = 0;
    for (const auto& lvl : spec.levels) ncols += static_cast<int>(lvl.basis.size());
    const int rows = ns * nt * 2 * d;
    Eigen::MatrixXd A(rows, ncols);
    Eigen::VectorXd b(rows);
    // normalize e^{lambda s} against the first sample to keep columns O(1)
    double s0 = tail.s_grid.front();
    int col = 0;
    std::vector<std::pair<int, int>> col_level;  // level, basis index
    for (std::size_t L = 0; L < spec.levels.size(); ++L) {
        for (std::size_t bidx = 0; bidx < spec.levels[L].basis.size(); ++bidx) {
            for (int is = 0; is < ns; ++is) {
                double decay = std::exp(spec.levels[L].lambda * (tail.s_grid[is] - s0));
                for (int it = 0; it < nt; ++it) {
                    Eigen::VectorXcd phi = eval_loop(spec.levels[L].basis[bidx], tail.t_grid[it]);
                    for (int k = 0; k < d; ++k) {
                        int base = ((is * nt) + it) * 2 * d + 2 * k;
                        A(base, col) = decay * phi[k].real();
                        A(base + 1, col) = decay * phi[k].imag();
                    }
                }
            }
            col_level.emplace_back(static_cast<int>(L), static_cast<int>(bidx));
            ++col;
        }
    }
    for (int is = 0; is < ns; ++is)
        for (int it = 0; it < nt; ++it)
            for (int k = 0; k < d; ++k) {
                int base = ((is * nt) + it) * 2 * d + 2 * k;
                b(base) = tail.values[is](it, k).real();
                b(base + 1) = tail.values[is](it, k).imag();
            }

    Eigen::VectorXd c = A.colPivHouseholderQr().solve(b);
    double res = (A * c - b).norm() / std::max(1e-300, b.norm());

    TailFit fit;
    fit.level_coeff.assign(spec.levels.size(), 0.0);
    fit.coeffs.resize(spec.levels.size());
    for (std::size_t L = 0; L < spec.levels.size(); ++L)
        fit.coeffs[L] = Eigen::VectorXd::Zero(spec.levels[L].basis.size());
    for (int j = 0; j < ncols; ++j) {
        auto [L, bidx] = col_level[j];
        fit.coeffs[L][bidx] = c[j];
        fit.level_coeff[L] = std::hypot(fit.level_coeff[L], c[j]);
    }
    double cmax = *std::max_element(fit.level_coeff.begin(), fit.level_coeff.end());
    if (!(cmax > 0.0) || res > residual_threshold)
        throw UnclassifiableTail("fit_tail: residual " + std::to_string(res) +
                                 " above threshold (branched-cover alternative)");
    fit.residual = res;
    fit.leading = 0;
    for (std::size_t L = 0; L < fit.level_coeff.size(); ++L)
        if (fit.level_coeff[L] > noise_floor * cmax) {
            fit.leading = static_cast<int>(L) + 1;
            break;
        }
    if (fit.leading == 0)
        throw UnclassifiableTail("fit_tail: no coefficient above the noise floor");

    // remainder rate from the residual decay; falls back to the spectral gap
    double delta = 0.0;
    if (res > 1e-12) {
        int half = ns / 2;
        auto rnorm = [&](int lo, int hi) {
            double acc = 0.0;
            for (int is = lo; is < hi; ++is)
                for (int it = 0; it < nt; ++it)
                    for (int k = 0; k < d; ++k) {
                        int base = ((is * nt) + it) * 2 * d + 2 * k;
                        double rr = (A.row(base) * c - b.row(base))(0);
                        double ri = (A.row(base + 1) * c - b.row(base + 1))(0);
                        acc += rr * rr + ri * ri;
                    }
            return std::sqrt(acc);
        };
        double r1 = rnorm(0, half), r2 = rnorm(half, ns);
        if (r1 > 0.0 && r2 > 0.0 && r2 < r1) {
            double ds = tail.s_grid[half] - tail.s_grid[0];
            delta = std::log(r1 / r2) / std::max(1e-12, ds);
        }
    }
    if (delta <= 0.0) {
        if (spec.levels.size() > static_cast<std::size_t>(fit.leading))
            delta = spec.levels[fit.leading - 1].lambda - spec.levels[fit.leading].lambda;
        else
            delta = std::abs(spec.levels[fit.leading - 1].lambda);
    }
    fit.delta = delta;
    return fit;
}

TailSample synth_tail(const SpectrumResult& spec, const std::vector<Eigen::VectorXd>& coeffs,
                      double s0, double s1, int ns, double noise, std::uint64_t noise_seed) {
    if (coeffs.size() != spec.levels.size())
        throw ContractViolation("synth_tail: one coefficient vector per level required");
    TailSample tail;
    const int nt = spec.grid_size;
    tail.t_grid = spec.t_grid;
    Rng rng(noise_seed);
    for (int is = 0; is < ns; ++is) {
        double s = s0 + (s1 - s0) * is / (ns - 1);
        tail.s_grid.push_back(s);
        Eigen::MatrixXcd m = Eigen::MatrixXcd::Zero(nt, spec.d);
        for (std::size_t L = 0; L < spec.levels.size(); ++L) {
            double decay = std::exp(spec.levels[L].lambda * (s - s0));
            for (std::size_t bidx = 0; bidx < spec.levels[L].basis.size(); ++bidx) {
                if (coeffs[L].size() <= static_cast<Eigen::Index>(bidx) || coeffs[L][bidx] == 0.0)
                    continue;
                const Eigen::MatrixXd& loop = spec.levels[L].basis[bidx];
                for (int it = 0; it < nt; ++it)
                    for (int k = 0; k < spec.d; ++k)
                        m(it, k) += coeffs[L][bidx] * decay *
                                    std::complex<double>(loop(it, k), loop(it, spec.d + k));
            }
        }
        if (noise > 0.0)
            for (int it = 0; it < nt; ++it)
                for (int k = 0; k < spec.d; ++k)
                    m(it, k) += noise * std::complex<double>(rng.gaussian(), rng.gaussian());
        tail.values.push_back(std::move(m));
    }
    return tail;
}

int count_arcs(const TailSample& tail, double r) {
    if (!(r > 0.0)) throw ContractViolation("count_arcs: r > 0 required");
    const int ns = static_cast<int>(tail.s_grid.size());
    const int nt = static_cast<int>(tail.t_grid.size());
    std::vector<int> counts(ns, -1);  // -1 unresolved/full, else arc count
    for (int is = 0; is < ns; ++is) {
        std::vector<bool> in(nt);
        int inside = 0;
        for (int it = 0; it < nt; ++it) {
            double dist = (tail.values[is].row(it) - tail.values[is].row(0)).norm();
            in[it] = dist < r;
            inside += in[it];
        }
        // the marker sample is always inside; a lone marker point is not an
        // arc, and the saturated circle carries no information either
        if (inside <= 1 || inside == nt) {
            counts[is] = -1;
            continue;
        }
        int comps = 0;
        for (int it = 0; it < nt; ++it) {
            bool prev = in[(it + nt - 1) % nt];
            if (in[it] && !prev) ++comps;
        }
        counts[is] = comps;
    }
    // stabilized count: the longest late run of a constant positive count
    int best = 0, best_len = 0;
    int run_val = 0, run_len = 0;
    for (int is = 0; is < ns; ++is) {
        int v = counts[is];
        if (v > 0 && v == run_val)
            ++run_len;
        else if (v > 0) {
            run_val = v;
            run_len = 1;
        } else {
            run_val = 0;
            run_len = 0;
        }
        if (run_len >= best_len) {  // >= so later runs win
            best_len = run_len;
            best = run_val;
        }
    }
    int min_run = std::max(3, ns / 40);
    if (best == 0 || best_len < min_run)
        throw InconclusiveArcs("count_arcs: no stabilized arc count at this radius");
    return best;
}

std::vector<double> select_radii(const SpectrumResult& spec, const std::vector<TailFit>& fits,
                                 double coeff_floor) {
    if (!(coeff_floor > 0.0))
        throw ContractViolation("select_radii: coefficient floor must be positive");
    const int m = static_cast<int>(fits.size());
    if (m < 1) throw ContractViolation("select_radii: empty family");
    for (int j = 0; j < m; ++j) {
        if (fits[j].leading != j + 1)
            throw ContractViolation("select_radii: fit " + std::to_string(j) +
                                    " does not lead at level " + std::to_string(j + 1));
        if (fits[j].level_coeff[j] < coeff_floor)
            throw NoValidRadii("select_radii: leading coefficient below the floor");
    }

    // probe tails synthesized from the fits over a standard window
    double s0 = 0.0, s1 = 6.0 / std::abs(spec.levels.front().lambda);
    int ns = 160;
    std::vector<TailSample> probes;
    for (const auto& f : fits) probes.push_back(synth_tail(spec, f.coeffs, s0, s1, ns));

    auto amp = [&](const TailSample& t, double frac) {
        int is = static_cast<int>(frac * (t.s_grid.size() - 1));
        double a = 0.0;
        for (Eigen::Index it = 0; it < t.values[is].rows(); ++it)
            a = std::max(a, (t.values[is].row(it) - t.values[is].row(0)).norm());
        return a;
    };

    // dominance: radius below which the stratum's own mode out-weighs deeper
    // ones, from the fitted coefficients (inductive construction)
    std::vector<double> radii(m);
    for (int j = m - 1; j >= 0; --j) {
        double sstar = s0;
        for (std::size_t k = j + 1; k < fits[j].level_coeff.size(); ++k) {
            double ck = fits[j].level_coeff[k];
            if (ck <= 0.0) continue;
            double num = std::log(3.0 * ck / fits[j].level_coeff[j]);
            double den = spec.levels[j].lambda - spec.levels[k].lambda;  // > 0
            sstar = std::max(sstar, s0 + num / den);
        }
        int is = 0;
        while (is + 1 < static_cast<int>(probes[j].s_grid.size()) && probes[j].s_grid[is] < sstar)
            ++is;
        double a = 0.0;
        for (Eigen::Index it = 0; it < probes[j].values[is].rows(); ++it)
            a = std::max(a, (probes[j].values[is].row(it) - probes[j].values[is].row(0)).norm());
        radii[j] = 0.5 * a;
        if (j + 1 < m) radii[j] = std::min(radii[j], 0.8 * radii[j + 1]);
        if (m == 1) radii[j] = std::sqrt(amp(probes[0], 0.1) * amp(probes[0], 0.9));
    }

    // verify: every stratum i >= j must show its own index at r_j
    for (int j = 0; j < m; ++j) {
        for (int attempt = 0;; ++attempt) {
            bool ok = true;
            for (int i = j; i < m && ok; ++i) {
                try {
                    ok = count_arcs(probes[i], radii[j]) == i + 1;
                } catch (const InconclusiveArcs&) {
                    ok = false;
                }
            }
            if (ok) break;
            if (attempt >= 6) throw NoValidRadii("select_radii: verification failed");
            radii[j] *= 0.5;
        }
        if (j > 0 && radii[j] <= radii[j - 1])
            throw NoValidRadii("select_radii: radii not strictly decreasing");
    }
    return radii;
}

}  // namespace reeblab
