#ifndef REEBLAB_STRIPS_HPP
#define REEBLAB_STRIPS_HPP

#include "reeblab/flows.hpp"

namespace reeblab {

enum class StripVariant { TwoCorner, OneCorner };

// Sampled model strip: the region between the hyperbola branches
// 2x1^2 - y1^2 = +-eps^{2p} in the (x1,y1)-plane, one quadrant per corner
// plus the mirror quadrant for the two-corner variant.  Rescaled units; the
// arm is truncated along a Liouville level (alpha vanishes on the cut).
struct StripRegion {
    HandleParams params;
    StripVariant variant = StripVariant::TwoCorner;
    double arm_reach = 0.0;  // abscissa on the gamma_+ branch where the cut passes
    int corner_count = 2;
    // grid[k](i,j) indexes quadrant k, arm position i, cross position j
    std::vector<std::vector<std::vector<SplitPoint>>> grid;
};

struct StripOptions {
    StripVariant variant = StripVariant::TwoCorner;
    int nu = 96;              // samples along the arm (log spaced)
    int nv = 9;               // samples across the strip
    double arm_reach = 0.0;   // 0: default eps^{s-p}
    Eigen::VectorXd x2_offset;  // rescaled transverse translation (tests)
    double tilt = 0.0;          // tilt of the y1 axis into x2_1 (tests)
};

StripRegion build_strip(const HandleParams& params, const StripOptions& opts = {});

// Maximal deviation of the sampled tangent planes from J_c-invariance.
double holomorphicity_residual(const HandleParams& params, const StripRegion& strip);

struct StripEnergy {
    double area = 0.0;            // paper units
    double action_gap = 0.0;      // paper units
    double corner_terms = 0.0;    // paper units (limits along the L/C planes)
    double cut_term = 0.0;        // alpha along the Liouville truncation
    double stokes_residual = 0.0; // rescaled units
};

StripEnergy strip_energy(const HandleParams& params, const StripRegion& strip);

// Closed-form slice integral int (sqrt(eps^{2p}+2x^2) - sqrt2 x) dx between
// paper-unit bounds; and the same slice measured from the region by
// quadrature.  Both in paper units.
double strip_slice_closed_form(const HandleParams& params, double x_lo, double x_hi);
double strip_slice_quadrature(const HandleParams& params, double x_lo, double x_hi);

struct MonotonicityReport {
    double a_strip = 0.0;    // measured strip scale, paper units
    double a_escape = 0.0;   // eps^{2q}
    double ratio = 0.0;
    double margin = 0.0;     // ratio / eps^{2(p-q)}
    bool pass = false;
};

// Compares the strip energy scale against the monotonicity lower bound for
// curves escaping the model window.  The control flag evaluates the escape
// scale with q = p.
MonotonicityReport monotonicity_probe(const HandleParams& params, bool control_q_equals_p = false);

struct KernelOptions {
    double t0 = 6.0;       // strip truncation
    double delta = 0.5;    // exponential weight
    bool matching_boundary = false;  // negative control: R^n / R^n
    int ns = 48;
    int nt = 10;
    bool check_refinement = true;
};

struct KernelReport {
    int dim = 0;            // kernel dimension of the weighted problem
    int augmented_dim = 0;  // with the two cut-off translation solutions
    bool borderline_weight = false;
    double sigma_gap = 0.0;  // separation between kernel and non-kernel singular values
};

struct ResolutionError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Numerical kernel dimension of the linearized Cauchy-Riemann operator on
// the truncated strip with boundary conditions along R^n and iR^n and
// exponential weight delta at both ends.
KernelReport linearized_kernel_dim(const HandleParams& params, const KernelOptions& opts = {});

std::string strip_to_json(const StripRegion& strip);

}  // namespace reeblab

#endif
