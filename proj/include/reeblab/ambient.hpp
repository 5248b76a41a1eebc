#ifndef REEBLAB_AMBIENT_HPP
#define REEBLAB_AMBIENT_HPP

#include <string>
#include <vector>

#include <Eigen/Dense>

#include "reeblab/numerics.hpp"

namespace reeblab {

// Component label reserved for a Legendrian that is present but not surgered.
inline const std::string kLambda0 = "Lambda0";

// Finite model of the ambient Reeb dynamics near the link: per chord an
// action and an affine transition between the transverse contact-plane
// charts at its two endpoints.  The linear part acts q -> p (the
// transversality shear of the linearized return); the symplectically dual
// block -A^{-T} acts p -> q.  Frames default to the identity; the ambient
// manifold is never represented globally.
struct AmbientChord {
    std::string id;
    std::string start;
    std::string end;
    double action = 0.0;
    Eigen::MatrixXd linear;   // (n-1) x (n-1)
    Eigen::VectorXd offset;   // n-1
    Eigen::MatrixXd entry_frame;
    Eigen::MatrixXd exit_frame;
};

struct ChordAtlas {
    std::vector<std::string> components;  // Lambda components, optionally Lambda0
    std::vector<AmbientChord> chords;
    double action_cap = 0.0;
    int dimension = 3;  // ambient n

    int chord_index(const std::string& id) const;      // -1 if absent
    bool has_component(const std::string& name) const;
    bool touches_lambda0(const AmbientChord& c) const {
        return c.start == kLambda0 || c.end == kLambda0;
    }
    double min_chord_action() const;
};

struct AtlasError : std::runtime_error {
    enum class Kind { Schema, Components, ActionGap, Transversality };
    Kind kind;
    AtlasError(Kind k, const std::string& what) : std::runtime_error(what), kind(k) {}
};

// Transverse state crossing the ambient: fiber offset p and Legendrian
// offset q in window-normalized hemisphere charts.
struct TransverseState {
    Eigen::VectorXd p;
    Eigen::VectorXd q;
};

// Affine chord transition, exit hemisphere charts at the start point to
// entry hemisphere charts at the end point:
//   p_in = A q_out + b,   q_in = -A^{-T} p_out.
TransverseState transition_map(const AmbientChord& chord, const TransverseState& exit_state,
                               double chart_bound = 1.0);
TransverseState transition_map_inverse(const AmbientChord& chord, const TransverseState& entry_state,
                                       double chart_bound = 1.0);

// Smallest principal angle between the image of the Legendrian tangent
// frame under the transition linear block and the Legendrian frame at the
// entry side.
double min_principal_angle(const AmbientChord& chord);

// Strict-schema JSON (unknown keys rejected) per the atlas file format.
ChordAtlas parse_atlas_json(const std::string& text);
ChordAtlas load_atlas(const std::string& path);
std::string atlas_to_json(const ChordAtlas& atlas);

void validate_atlas(const ChordAtlas& atlas, double gap_floor = 1e-6, double angle_floor = 0.1);

// Deterministic pseudo-random atlas; all transitions satisfy the
// transversality floor, action set has gap >= 1e-3.
ChordAtlas synth_atlas(std::uint64_t seed, int k_components, int n_chords, int dimension,
                       bool include_lambda0);

// Copy with all offsets zeroed: the chord-adapted identification in which
// every junction is centered.  Used by the action-scaling runs.
ChordAtlas with_zero_offsets(ChordAtlas atlas);

}  // namespace reeblab

#endif
