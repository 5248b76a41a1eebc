#include <doctest.h>

#include "reeblab/words.hpp"

using namespace reeblab;

namespace {
std::string single_chord_json(double action, double cap) {
    return R"({"dimension": 3, "action_cap": )" + std::to_string(cap) +
           R"(, "components": ["L1"], "chords": [
      {"id": "c", "start": "L1", "end": "L1", "action": )" +
           std::to_string(action) + R"(, "linear": [0.8, 0.0, 0.0, 0.8], "offset": [0.01, 0.0]}
    ]})";
}
}  // namespace

TEST_CASE("single self-chord atlas loads and validates") {
    ChordAtlas atlas = parse_atlas_json(single_chord_json(1.0, 3.45));
    CHECK(atlas.chords.size() == 1);
    CHECK(atlas.components.size() == 1);
    CHECK(atlas.chords[0].action == doctest::Approx(1.0));
}

TEST_CASE("schema violations are distinct diagnostics") {
    // duplicate chord id
    std::string dup = R"({"dimension": 3, "action_cap": 3.45, "components": ["L1"], "chords": [
      {"id": "c", "start": "L1", "end": "L1", "action": 1.0, "linear": [0.8,0,0,0.8], "offset": [0,0]},
      {"id": "c", "start": "L1", "end": "L1", "action": 1.2, "linear": [0.8,0,0,0.8], "offset": [0,0]}
    ]})";
    CHECK_THROWS_WITH_AS(parse_atlas_json(dup), doctest::Contains("duplicate chord id"), AtlasError);

    // unknown top-level key
    std::string unk = R"({"dimension": 3, "action_cap": 3.45, "components": ["L1"], "chords": [],
                          "extra": 1})";
    try {
        parse_atlas_json(unk);
        FAIL("unknown key accepted");
    } catch (const AtlasError& e) {
        CHECK(e.kind == AtlasError::Kind::Schema);
    }

    // endpoint on a missing component
    std::string badcomp = R"({"dimension": 3, "action_cap": 3.45, "components": ["L1"], "chords": [
      {"id": "c", "start": "L1", "end": "L9", "action": 1.0, "linear": [0.8,0,0,0.8], "offset": [0,0]}
    ]})";
    try {
        parse_atlas_json(badcomp);
        FAIL("missing component accepted");
    } catch (const AtlasError& e) {
        CHECK(e.kind == AtlasError::Kind::Components);
    }
}

TEST_CASE("action-gap failure at the default floor") {
    // two chords with actions 1.0 and 1.0 + 1e-15 collapse the gap
    std::string close = R"({"dimension": 3, "action_cap": 2.5, "components": ["L1"], "chords": [
      {"id": "a", "start": "L1", "end": "L1", "action": 1.0, "linear": [0.8,0,0,0.8], "offset": [0,0]},
      {"id": "b", "start": "L1", "end": "L1", "action": 1.000000000000001, "linear": [0.8,0,0,0.8], "offset": [0,0]}
    ]})";
    try {
        parse_atlas_json(close);
        FAIL("degenerate action set accepted");
    } catch (const AtlasError& e) {
        CHECK(e.kind == AtlasError::Kind::ActionGap);
    }
}

TEST_CASE("transversality floor rejects a singular linear part") {
    std::string sing = R"({"dimension": 3, "action_cap": 3.45, "components": ["L1"], "chords": [
      {"id": "c", "start": "L1", "end": "L1", "action": 1.0, "linear": [0.8, 0, 0.8, 0], "offset": [0,0]}
    ]})";
    try {
        parse_atlas_json(sing);
        FAIL("singular transition accepted");
    } catch (const AtlasError& e) {
        CHECK(e.kind == AtlasError::Kind::Transversality);
    }
}

TEST_CASE("transition map is affine with the chord offset at zero") {
    ChordAtlas atlas = parse_atlas_json(single_chord_json(1.0, 3.45));
    const AmbientChord& c = atlas.chords[0];
    TransverseState zero{Eigen::Vector2d::Zero(), Eigen::Vector2d::Zero()};
    TransverseState img = transition_map(c, zero);
    CHECK((img.p - c.offset).norm() == 0.0);
    CHECK(img.q.norm() == 0.0);

    Rng rng(4);
    for (int k = 0; k < 50; ++k) {
        TransverseState a{Eigen::Vector2d(rng.uniform(-0.2, 0.2), rng.uniform(-0.2, 0.2)),
                          Eigen::Vector2d(rng.uniform(-0.2, 0.2), rng.uniform(-0.2, 0.2))};
        TransverseState b{Eigen::Vector2d(rng.uniform(-0.2, 0.2), rng.uniform(-0.2, 0.2)),
                          Eigen::Vector2d(rng.uniform(-0.2, 0.2), rng.uniform(-0.2, 0.2))};
        TransverseState ab{a.p + b.p, a.q + b.q};
        // affine identity f(a+b) - f(a) - f(b) + f(0) = 0
        TransverseState fab = transition_map(c, ab), fa = transition_map(c, a),
                        fb = transition_map(c, b);
        CHECK((fab.p - fa.p - fb.p + img.p).norm() <= 1e-14);
        CHECK((fab.q - fa.q - fb.q + img.q).norm() <= 1e-14);
        // inverse round trip
        TransverseState back = transition_map_inverse(c, fa);
        CHECK((back.p - a.p).norm() <= 1e-13);
        CHECK((back.q - a.q).norm() <= 1e-13);
    }

    TransverseState far{Eigen::Vector2d(1.5, 0.0), Eigen::Vector2d::Zero()};
    CHECK_THROWS_AS(transition_map(c, far), ContractViolation);
}

TEST_CASE("synthesized atlases: determinism, validity, angle floor") {
    ChordAtlas one = synth_atlas(1, 1, 1, 3, false);
    CHECK(one.chords.size() == 1);
    CHECK(one.chords[0].start == one.chords[0].end);

    ChordAtlas a = synth_atlas(42, 2, 3, 3, false);
    ChordAtlas b = synth_atlas(42, 2, 3, 3, false);
    CHECK(atlas_to_json(a) == atlas_to_json(b));

    for (std::uint64_t seed = 1; seed <= 100; ++seed) {
        ChordAtlas at = synth_atlas(seed, 1 + seed % 2, 1 + seed % 3, 3, seed % 4 == 0);
        CHECK_NOTHROW(validate_atlas(at));
        for (const auto& c : at.chords) CHECK(min_principal_angle(c) >= 0.1);
    }
}

TEST_CASE("atlas JSON round trip") {
    ChordAtlas a = synth_atlas(9, 2, 3, 3, true);
    ChordAtlas b = parse_atlas_json(atlas_to_json(a));
    CHECK(atlas_to_json(a) == atlas_to_json(b));
}
