#ifndef REEBLAB_ASYMPTOTICS_HPP
#define REEBLAB_ASYMPTOTICS_HPP

#include <vector>

#include <Eigen/Dense>

#include "reeblab/numerics.hpp"

namespace reeblab {

// Loop of symmetric matrices S0(t) on a uniform period-1 grid; samples
// include the duplicated endpoint (first = last).  The asymptotic operator
// is A = -J0 d/dt - S0(t) acting on loops in R^{2d}, d = n-1.
struct AsymptoticOperatorSpec {
    int d = 1;
    std::vector<Eigen::MatrixXd> samples;

    int grid_size() const { return static_cast<int>(samples.size()) - 1; }
    void validate() const;

    static AsymptoticOperatorSpec constant(int d, const Eigen::MatrixXd& s0, int grid);
    static AsymptoticOperatorSpec zero(int d, int grid) {
        return constant(d, Eigen::MatrixXd::Zero(2 * d, 2 * d), grid);
    }
};

// One negative eigenvalue level with its eigenspace sampled on the grid.
struct SpectralLevel {
    double lambda = 0.0;
    double refine_error = 0.0;                 // |lambda_M - lambda_2M|
    std::vector<Eigen::MatrixXd> basis;        // each M x 2d, rows = grid samples
};

struct SpectrumResult {
    int d = 1;
    int grid_size = 0;
    std::vector<SpectralLevel> levels;         // 0 > lambda_1 > lambda_2 > ...
    std::vector<double> t_grid;                // without the duplicate endpoint
};

// K most negative-side levels counted downward from zero (lambda_1 closest
// to zero), by Fourier spectral collocation; requires M >= 8K.
SpectrumResult spectrum(const AsymptoticOperatorSpec& spec, int count);

// Conley-Zehnder index of a sampled nondegenerate symplectic path with
// Phi(0) = I, by crossing signatures; grading adds n-3.
int cz_index(const std::vector<Eigen::MatrixXd>& path);
int cz_grading(const std::vector<Eigen::MatrixXd>& path, int n);

struct DegenerateEndpoint : ContractViolation {
    using ContractViolation::ContractViolation;
};

// Curve tail z(s,t) in C^d on [s0,s1] x S^1; t grid excludes the duplicate
// endpoint.  values[i] is the (nt x d) complex matrix at s_grid[i].
struct TailSample {
    std::vector<double> s_grid;
    std::vector<double> t_grid;
    std::vector<Eigen::MatrixXcd> values;

    void validate() const;  // includes the decaying sup-norm check
};

std::string tail_to_json(const TailSample& tail);
TailSample tail_from_json(const std::string& text);
TailSample load_tail(const std::string& path);

struct TailFit {
    int leading = 0;                       // 1-based level index
    std::vector<double> level_coeff;       // l2 coefficient mass per level
    std::vector<Eigen::VectorXd> coeffs;   // raw coefficients per level basis
    double delta = 0.0;                    // remainder rate
    double residual = 0.0;                 // relative fit residual
};

struct UnclassifiableTail : std::runtime_error {
    using std::runtime_error::runtime_error;
};

TailFit fit_tail(const TailSample& tail, const SpectrumResult& spec,
                 double noise_floor = 1e-8, double residual_threshold = 1e-3);

// Synthesize a tail from spectral data and per-level coefficient vectors;
// the oracle for fit_tail and the probe generator for radii selection.
TailSample synth_tail(const SpectrumResult& spec, const std::vector<Eigen::VectorXd>& coeffs,
                      double s0, double s1, int ns, double noise = 0.0,
                      std::uint64_t noise_seed = 1);

struct InconclusiveArcs : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Number of arcs of {|z(s,t) - z(s, t_marker)| < r} per constant-s circle,
// stabilized over the tail end.
int count_arcs(const TailSample& tail, double r);

struct NoValidRadii : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Decreasing radii r_m > ... > r_1 such that every stratum fit with leading
// index >= j shows its own index at radius r_j.
std::vector<double> select_radii(const SpectrumResult& spec, const std::vector<TailFit>& fits,
                                 double coeff_floor);

}  // namespace reeblab

#endif
