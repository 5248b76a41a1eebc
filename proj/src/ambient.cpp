#include "reeblab/ambient.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "reeblab/words.hpp"

namespace reeblab {

using nlohmann::json;

int ChordAtlas::chord_index(const std::string& id) const {
    for (std::size_t i = 0; i < chords.size(); ++i)
        if (chords[i].id == id) return static_cast<int>(i);
    return -1;
}

bool ChordAtlas::has_component(const std::string& name) const {
    return std::find(components.begin(), components.end(), name) != components.end();
}

double ChordAtlas::min_chord_action() const {
    double m = std::numeric_limits<double>::infinity();
    for (const auto& c : chords) m = std::min(m, c.action);
    return m;
}

TransverseState transition_map(const AmbientChord& chord, const TransverseState& exit_state,
                               double chart_bound) {
    if (exit_state.p.norm() >= chart_bound || exit_state.q.norm() >= chart_bound)
        throw ContractViolation("transition_map: state outside the modeled neighborhood");
    TransverseState in;
    in.p = chord.linear * exit_state.q + chord.offset;
    in.q = -chord.linear.transpose().fullPivLu().solve(exit_state.p);
    return in;
}

TransverseState transition_map_inverse(const AmbientChord& chord, const TransverseState& entry_state,
                                       double chart_bound) {
    if (entry_state.p.norm() >= chart_bound || entry_state.q.norm() >= chart_bound)
        throw ContractViolation("transition_map_inverse: state outside the modeled neighborhood");
    TransverseState out;
    out.q = chord.linear.fullPivLu().solve(entry_state.p - chord.offset);
    out.p = -chord.linear.transpose() * entry_state.q;
    return out;
}

double min_principal_angle(const AmbientChord& chord) {
    // Image of the Legendrian frame {(0, v)} under M = [[0,A],[-A^-T,0]]
    // against the entry frame {(0, w)}; angles from the SVD of Qu^T Qv.
    const Eigen::Index d = chord.linear.rows();
    Eigen::JacobiSVD<Eigen::MatrixXd> asvd(chord.linear, Eigen::ComputeThinU);
    if (asvd.singularValues().minCoeff() <= 1e-12)
        return 0.0;  // degenerate linear part: no transversality
    Eigen::MatrixXd qu = Eigen::MatrixXd::Zero(2 * d, d);
    qu.topRows(d) = asvd.matrixU();  // orthonormal basis of A * R^d in the p-block
    Eigen::MatrixXd qv = Eigen::MatrixXd::Zero(2 * d, d);
    qv.bottomRows(d) = Eigen::MatrixXd::Identity(d, d);
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(qu.transpose() * qv);
    double cmax = svd.singularValues().size() ? svd.singularValues().maxCoeff() : 0.0;
    cmax = std::min(1.0, std::max(-1.0, cmax));
    return std::acos(cmax);
}

static Eigen::MatrixXd parse_linear(const json& j, int d, const std::string& where) {
    if (!j.is_array() || static_cast<int>(j.size()) != d * d)
        throw AtlasError(AtlasError::Kind::Schema,
                         where + ": 'linear' must be a row-major array of length (n-1)^2");
    Eigen::MatrixXd m(d, d);
    for (int r = 0; r < d; ++r)
        for (int c = 0; c < d; ++c) {
            const json& v = j[r * d + c];
            if (!v.is_number())
                throw AtlasError(AtlasError::Kind::Schema, where + ": 'linear' entries must be numbers");
            m(r, c) = v.get<double>();
        }
    return m;
}

ChordAtlas parse_atlas_json(const std::string& text) {
    json doc;
    try {
        doc = json::parse(text);
    } catch (const std::exception& e) {
        throw AtlasError(AtlasError::Kind::Schema, std::string("atlas: invalid JSON: ") + e.what());
    }
    if (!doc.is_object()) throw AtlasError(AtlasError::Kind::Schema, "atlas: top level must be an object");
    static const std::set<std::string> top_keys = {"components", "chords", "action_cap", "dimension"};
    for (auto it = doc.begin(); it != doc.end(); ++it)
        if (!top_keys.count(it.key()))
            throw AtlasError(AtlasError::Kind::Schema, "atlas: unknown key '" + it.key() + "'");
    for (const auto& k : top_keys)
        if (!doc.contains(k))
            throw AtlasError(AtlasError::Kind::Schema, "atlas: missing key '" + k + "'");

    ChordAtlas atlas;
    if (!doc["dimension"].is_number_integer())
        throw AtlasError(AtlasError::Kind::Schema, "atlas: 'dimension' must be an integer");
    atlas.dimension = doc["dimension"].get<int>();
    if (atlas.dimension < 2)
        throw AtlasError(AtlasError::Kind::Schema, "atlas: dimension must be >= 2");
    if (!doc["action_cap"].is_number())
        throw AtlasError(AtlasError::Kind::Schema, "atlas: 'action_cap' must be a number");
    atlas.action_cap = doc["action_cap"].get<double>();
    if (!doc["components"].is_array())
        throw AtlasError(AtlasError::Kind::Schema, "atlas: 'components' must be an array");
    for (const auto& c : doc["components"]) {
        if (!c.is_string())
            throw AtlasError(AtlasError::Kind::Schema, "atlas: component labels must be strings");
        atlas.components.push_back(c.get<std::string>());
    }
    if (!doc["chords"].is_array())
        throw AtlasError(AtlasError::Kind::Schema, "atlas: 'chords' must be an array");
    const int d = atlas.dimension - 1;
    static const std::set<std::string> chord_keys = {"id", "start", "end", "action", "linear", "offset"};
    for (const auto& cj : doc["chords"]) {
        if (!cj.is_object()) throw AtlasError(AtlasError::Kind::Schema, "atlas: chord must be an object");
        for (auto it = cj.begin(); it != cj.end(); ++it)
            if (!chord_keys.count(it.key()))
                throw AtlasError(AtlasError::Kind::Schema,
                                 "atlas: unknown chord key '" + it.key() + "'");
        for (const auto& k : chord_keys)
            if (!cj.contains(k))
                throw AtlasError(AtlasError::Kind::Schema, "atlas: chord missing key '" + k + "'");
        AmbientChord c;
        if (!cj["id"].is_string() || !cj["start"].is_string() || !cj["end"].is_string())
            throw AtlasError(AtlasError::Kind::Schema, "atlas: chord id/start/end must be strings");
        c.id = cj["id"].get<std::string>();
        c.start = cj["start"].get<std::string>();
        c.end = cj["end"].get<std::string>();
        if (!cj["action"].is_number())
            throw AtlasError(AtlasError::Kind::Schema, "atlas: chord 'action' must be a number");
        c.action = cj["action"].get<double>();
        c.linear = parse_linear(cj["linear"], d, "chord " + c.id);
        if (!cj["offset"].is_array() || static_cast<int>(cj["offset"].size()) != d)
            throw AtlasError(AtlasError::Kind::Schema,
                             "chord " + c.id + ": 'offset' must have length n-1");
        c.offset.resize(d);
        for (int i = 0; i < d; ++i) {
            if (!cj["offset"][i].is_number())
                throw AtlasError(AtlasError::Kind::Schema,
                                 "chord " + c.id + ": offset entries must be numbers");
            c.offset[i] = cj["offset"][i].get<double>();
        }
        c.entry_frame = Eigen::MatrixXd::Identity(d, d);
        c.exit_frame = Eigen::MatrixXd::Identity(d, d);
        atlas.chords.push_back(std::move(c));
    }
    validate_atlas(atlas);
    return atlas;
}

ChordAtlas load_atlas(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw AtlasError(AtlasError::Kind::Schema, "atlas: cannot open '" + path + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_atlas_json(ss.str());
}

std::string atlas_to_json(const ChordAtlas& atlas) {
    json doc;
    doc["dimension"] = atlas.dimension;
    doc["action_cap"] = atlas.action_cap;
    doc["components"] = atlas.components;
    doc["chords"] = json::array();
    const int d = atlas.dimension - 1;
    for (const auto& c : atlas.chords) {
        json cj;
        cj["id"] = c.id;
        cj["start"] = c.start;
        cj["end"] = c.end;
        cj["action"] = c.action;
        json lin = json::array();
        for (int r = 0; r < d; ++r)
            for (int col = 0; col < d; ++col) lin.push_back(c.linear(r, col));
        cj["linear"] = lin;
        json off = json::array();
        for (int i = 0; i < d; ++i) off.push_back(c.offset[i]);
        cj["offset"] = off;
        doc["chords"].push_back(cj);
    }
    return doc.dump(2);
}

void validate_atlas(const ChordAtlas& atlas, double gap_floor, double angle_floor) {
    std::set<std::string> comps(atlas.components.begin(), atlas.components.end());
    if (comps.size() != atlas.components.size())
        throw AtlasError(AtlasError::Kind::Components, "atlas: duplicate component labels");
    bool has_lambda = false;
    for (const auto& c : atlas.components)
        if (c != kLambda0) has_lambda = true;
    if (!atlas.components.empty() && !has_lambda)
        throw AtlasError(AtlasError::Kind::Components, "atlas: no surgered component present");
    std::set<std::string> ids;
    for (const auto& c : atlas.chords) {
        if (!ids.insert(c.id).second)
            throw AtlasError(AtlasError::Kind::Schema, "atlas: duplicate chord id '" + c.id + "'");
        if (!comps.count(c.start) || !comps.count(c.end))
            throw AtlasError(AtlasError::Kind::Components,
                             "chord " + c.id + ": endpoint component not in the atlas "
                             "(composability impossible)");
        if (!(c.action > 0.0))
            throw AtlasError(AtlasError::Kind::Schema, "chord " + c.id + ": action must be positive");
        double ang = min_principal_angle(c);
        if (ang < angle_floor)
            throw AtlasError(AtlasError::Kind::Transversality,
                             "chord " + c.id + ": transition fails the transversality floor");
    }
    if (!(atlas.action_cap > 0.0))
        throw AtlasError(AtlasError::Kind::Schema, "atlas: action_cap must be positive");

    std::vector<double> actions = action_set(atlas);
    for (double a : actions)
        if (std::abs(a - atlas.action_cap) < gap_floor)
            throw AtlasError(AtlasError::Kind::ActionGap,
                             "atlas: action_cap lies in the action set");
    GapResult gap = min_action_gap(atlas);
    if (!gap.empty && gap.gap < gap_floor)
        throw AtlasError(AtlasError::Kind::ActionGap,
                         "atlas: action set gap " + std::to_string(gap.gap) +
                             " below floor " + std::to_string(gap_floor));
}

static Eigen::MatrixXd random_rotation(Rng& rng, int d) {
    if (d == 1) {
        Eigen::MatrixXd m(1, 1);
        m(0, 0) = 1.0;
        return m;
    }
    Eigen::MatrixXd g(d, d);
    for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j) g(i, j) = rng.gaussian();
    Eigen::HouseholderQR<Eigen::MatrixXd> qr(g);
    Eigen::MatrixXd q = qr.householderQ();
    Eigen::MatrixXd r = qr.matrixQR().triangularView<Eigen::Upper>();
    for (int i = 0; i < d; ++i)
        if (r(i, i) < 0.0) q.col(i) *= -1.0;
    if (q.determinant() < 0.0) q.col(0) *= -1.0;
    return q;
}

ChordAtlas synth_atlas(std::uint64_t seed, int k_components, int n_chords, int dimension,
                       bool include_lambda0) {
    if (n_chords < 1) throw ContractViolation("synth_atlas: n_chords >= 1 required");
    if (k_components < 1) throw ContractViolation("synth_atlas: k_components >= 1 required");
    if (dimension < 2) throw ContractViolation("synth_atlas: dimension >= 2 required");
    Rng rng(seed * 0x9e3779b97f4a7c15ULL + 0x51ab5e920ULL);
    const int d = dimension - 1;

    for (int attempt = 0; attempt < 400; ++attempt) {
        ChordAtlas atlas;
        atlas.dimension = dimension;
        for (int i = 0; i < k_components; ++i) atlas.components.push_back("L" + std::to_string(i + 1));
        if (include_lambda0) atlas.components.push_back(kLambda0);
        auto lam = [&](int i) { return atlas.components[i % k_components]; };
        for (int i = 0; i < n_chords; ++i) {
            AmbientChord c;
            c.id = "c" + std::to_string(i + 1);
            c.start = lam(rng.uniform_int(0, k_components - 1));
            c.end = lam(rng.uniform_int(0, k_components - 1));
            if (include_lambda0) {
                if (i == 0) c.start = kLambda0;
                if (i == 1 && n_chords > 1) c.end = kLambda0;
            }
            c.action = rng.uniform(0.9, 2.2);
            double scale = rng.uniform(0.78, 0.92);
            c.linear = scale * random_rotation(rng, d);
            c.offset.resize(d);
            double rad = rng.uniform(0.0, 0.05);
            Eigen::VectorXd dir(d);
            for (int j = 0; j < d; ++j) dir[j] = rng.gaussian();
            double nn = dir.norm();
            c.offset = (nn > 0.0) ? Eigen::VectorXd(rad * dir / nn) : Eigen::VectorXd::Zero(d);
            c.entry_frame = Eigen::MatrixXd::Identity(d, d);
            c.exit_frame = Eigen::MatrixXd::Identity(d, d);
            atlas.chords.push_back(std::move(c));
        }
        atlas.action_cap = 3.7 * atlas.min_chord_action();
        // nudge the cap off the action set
        for (int k = 0; k < 64; ++k) {
            bool hit = false;
            for (double a : action_set(atlas))
                if (std::abs(a - atlas.action_cap) < 2e-3) hit = true;
            if (!hit) break;
            atlas.action_cap -= 3.1e-3;
        }
        try {
            validate_atlas(atlas, 1e-3, 0.1);
            return atlas;
        } catch (const AtlasError&) {
            continue;  // resample
        }
    }
    throw NoConvergence("synth_atlas: could not satisfy constraints in 400 attempts", 0.0);
}

ChordAtlas with_zero_offsets(ChordAtlas atlas) {
    for (auto& c : atlas.chords) c.offset.setZero();
    return atlas;
}

}  // namespace reeblab
