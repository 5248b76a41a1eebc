#ifndef REEBLAB_SURGERY_HPP
#define REEBLAB_SURGERY_HPP

#include <optional>

#include "reeblab/flows.hpp"
#include "reeblab/words.hpp"

namespace reeblab {

// Boundary classes of post-surgery chords, by the components the word
// connects.
enum class ChordClass { GammaGamma, Lambda0Gamma, GammaLambda0, Lambda0Lambda0 };

ChordClass classify_word(const ChordAtlas& atlas, const Word& word);
std::string class_name(ChordClass c);

struct FoundChord {
    Word word;
    ChordClass cls = ChordClass::GammaGamma;
    Eigen::VectorXd launch;   // chart on Gamma, or Lambda0 departure offset
    double residual = 0.0;
    double action = 0.0;      // paper units: word action plus deviation
    double deviation = 0.0;   // paper units
    int iterations = 0;
    bool trivial_persisting = false;  // pure Lambda0 chords survive unchanged
};

struct FoundOrbit {
    CyclicWord word;
    Eigen::VectorXd q0, p0;   // fixed point charts at the junction before chord 1
    double forward_residual = 0.0;
    double backward_residual = 0.0;
    double action = 0.0;
    double deviation = 0.0;
    double contraction_factor = 0.0;
    int iterations = 0;
};

struct SolverOptions {
    double tol = 1e-9;
    int fixed_point_cap = 10000;
    int newton_cap = 80;
    double fd_step = 1e-7;
};

// One composite step: ambient transition for the chord, then the exact
// handle passage.  Action and half-passage deviations accumulate.
struct CompositeStep {
    TransverseState state;     // south entry charts after the transition
    SphereChart exit;          // north exit charts after the passage
    double action = 0.0;       // paper units
    double deviation = 0.0;    // rescaled units
};
CompositeStep composite_step(const HandleParams& params, const ChordAtlas& atlas, int chord,
                             const TransverseState& exit_state);

struct NotFound : std::runtime_error {
    double best_residual;
    NotFound(const std::string& what, double res) : std::runtime_error(what), best_residual(res) {}
};
struct Divergence : std::runtime_error {
    std::vector<Eigen::VectorXd> trace;
    Divergence(const std::string& what, std::vector<Eigen::VectorXd> tr)
        : std::runtime_error(what), trace(std::move(tr)) {}
};

FoundChord find_chord_for_word(const HandleParams& params, const ChordAtlas& atlas,
                               const Word& word, const SolverOptions& opts = {},
                               const Eigen::VectorXd* initial_guess = nullptr);

FoundOrbit find_orbit_for_cyclic_word(const HandleParams& params, const ChordAtlas& atlas,
                                      const CyclicWord& word, const SolverOptions& opts = {});

struct WordOutcome {
    Word word;
    ChordClass cls;
    bool found = false;
    bool unique = true;
    double residual = 0.0;
    double spread = 0.0;       // multistart pairwise spread
    double action = 0.0;
    double deviation = 0.0;
    std::string failure;
};

struct OrbitOutcome {
    CyclicWord word;
    bool found = false;
    double residual = 0.0;
    double action = 0.0;
    double deviation = 0.0;
    double contraction = 0.0;
    std::string failure;
};

struct VerifyOptions {
    SolverOptions solver;
    int multistart = 10;
    double multistart_radius = 1e-3;
    double spread_tol = 1e-6;
    int jobs = 0;  // 0: library default
};

struct VerifyReport {
    bool pass = false;
    int words_total = 0, chords_found = 0, misses = 0, multiplicities = 0;
    int cyclic_total = 0, orbits_found = 0, orbit_misses = 0;
    double max_residual = 0.0;
    double max_spread = 0.0;
    double max_action_deviation = 0.0;
    double epsilon = 0.0;
    std::vector<WordOutcome> words;
    std::vector<OrbitOutcome> orbits;
};

VerifyReport verify_bijection(const HandleParams& params, const ChordAtlas& atlas,
                              const VerifyOptions& opts = {});
// Serial reference implementation, kept for testing the parallel path.
VerifyReport verify_bijection_serial(const HandleParams& params, const ChordAtlas& atlas,
                                     const VerifyOptions& opts = {});

std::string report_to_json(const ChordAtlas& atlas, const VerifyReport& report, bool meta);
std::string report_to_text(const ChordAtlas& atlas, const VerifyReport& report);

struct ThresholdOptions {
    double eps_lo = 0.30;
    double eps_hi = 0.90;
    double grid_step = 0.10;
    double bracket_width = 0.05;
    VerifyOptions verify;
};

struct ThresholdResult {
    double eps_pass = 0.0;   // largest tested epsilon that passes
    double eps_fail = 0.0;   // smallest tested failure above it
    std::vector<std::pair<double, bool>> scan;
    bool monotone = true;    // every scanned epsilon below eps_pass also passed
};

struct ThresholdNotFound : std::runtime_error {
    using std::runtime_error::runtime_error;
};

ThresholdResult epsilon_threshold(const HandleParams& params_template, const ChordAtlas& atlas,
                                  const ThresholdOptions& opts = {});

}  // namespace reeblab

#endif
