#include <doctest.h>

#include <algorithm>
#include <set>

#include "reeblab/words.hpp"

using namespace reeblab;

namespace {

ChordAtlas tiny_atlas(const std::vector<std::tuple<std::string, std::string, std::string, double>>& chords,
                      double cap, std::vector<std::string> comps = {"L1"}) {
    ChordAtlas atlas;
    atlas.dimension = 3;
    atlas.action_cap = cap;
    atlas.components = std::move(comps);
    for (const auto& [id, from, to, act] : chords) {
        AmbientChord c;
        c.id = id;
        c.start = from;
        c.end = to;
        c.action = act;
        c.linear = 0.8 * Eigen::Matrix2d::Identity();
        c.offset = Eigen::Vector2d::Zero();
        c.entry_frame = c.exit_frame = Eigen::Matrix2d::Identity();
        atlas.chords.push_back(c);
    }
    return atlas;
}

// independent brute-force enumeration by an explicit odometer over chord
// sequences up to the sharp length bound
std::set<std::vector<int>> brute_force_words(const ChordAtlas& atlas, const std::string& from,
                                             const std::string& to) {
    std::set<std::vector<int>> out;
    double min_act = atlas.min_chord_action();
    int maxlen = static_cast<int>(std::ceil(atlas.action_cap / min_act));
    int m = static_cast<int>(atlas.chords.size());
    for (int len = 1; len <= maxlen; ++len) {
        std::vector<int> idx(len, 0);
        for (;;) {
            double act = 0.0;
            for (int i : idx) act += atlas.chords[i].action;
            bool ok = act < atlas.action_cap && atlas.chords[idx.front()].start == from &&
                      atlas.chords[idx.back()].end == to;
            for (int i = 0; ok && i + 1 < len; ++i) {
                const auto& a = atlas.chords[idx[i]];
                const auto& b = atlas.chords[idx[i + 1]];
                if (a.end != b.start || a.end == kLambda0) ok = false;
            }
            if (ok) out.insert(idx);
            int pos = len - 1;
            while (pos >= 0 && ++idx[pos] == m) idx[pos--] = 0;
            if (pos < 0) break;
        }
    }
    return out;
}

std::set<std::vector<int>> brute_force_cyclic(const ChordAtlas& atlas) {
    std::set<std::vector<int>> out;
    double min_act = atlas.min_chord_action();
    int maxlen = static_cast<int>(std::ceil(atlas.action_cap / min_act));
    int m = static_cast<int>(atlas.chords.size());
    for (int len = 1; len <= maxlen; ++len) {
        std::vector<int> idx(len, 0);
        for (;;) {
            double act = 0.0;
            for (int i : idx) act += atlas.chords[i].action;
            bool ok = act < atlas.action_cap;
            for (int i = 0; ok && i < len; ++i) {
                const auto& a = atlas.chords[idx[i]];
                const auto& b = atlas.chords[idx[(i + 1) % len]];
                if (a.end != b.start || a.end == kLambda0 || atlas.touches_lambda0(a)) ok = false;
            }
            if (ok) out.insert(canonical_rotation(atlas, idx));
            int pos = len - 1;
            while (pos >= 0 && ++idx[pos] == m) idx[pos--] = 0;
            if (pos < 0) break;
        }
    }
    return out;
}

}  // namespace

TEST_CASE("single self-chord words: c, cc, ccc") {
    ChordAtlas atlas = tiny_atlas({{"c", "L1", "L1", 1.0}}, 3.5);
    auto words = enumerate_words(atlas, "L1", "L1");
    REQUIRE(words.size() == 3);
    CHECK(words[0].chords == std::vector<int>{0});
    CHECK(words[1].chords == std::vector<int>{0, 0});
    CHECK(words[2].chords == std::vector<int>{0, 0, 0});
    CHECK(words[2].action == doctest::Approx(3.0));

    auto cyc = enumerate_cyclic(atlas);
    CHECK(cyc.size() == 3);
}

TEST_CASE("two components: ab and abab") {
    ChordAtlas atlas = tiny_atlas({{"a", "L1", "L2", 1.0}, {"b", "L2", "L1", 1.1}}, 3.0,
                                  {"L1", "L2"});
    auto words = enumerate_words(atlas, "L1", "L1");
    REQUIRE(words.size() == 1);  // ab (2.1); abab = 4.2 > cap
    CHECK(words[0].chords == std::vector<int>{0, 1});

    ChordAtlas wide = tiny_atlas({{"a", "L1", "L2", 1.0}, {"b", "L2", "L1", 1.1}}, 4.5,
                                 {"L1", "L2"});
    auto words2 = enumerate_words(wide, "L1", "L1");
    REQUIRE(words2.size() == 2);
    CHECK(words2[1].chords == std::vector<int>{0, 1, 0, 1});

    // (a) alone is not cyclically composable; only (ab)-type classes are
    auto cyc = enumerate_cyclic(atlas);
    REQUIRE(cyc.size() == 1);
    CHECK(cyc[0].chords.size() == 2);
}

TEST_CASE("two self-chords below cap 2.5: six words, five necklaces") {
    ChordAtlas atlas = tiny_atlas({{"a", "L1", "L1", 1.0}, {"b", "L1", "L1", 1.2}}, 2.5);
    auto words = enumerate_words(atlas, "L1", "L1");
    CHECK(words.size() == 6);  // a, b, aa, ab, ba, bb
    auto cyc = enumerate_cyclic(atlas);
    CHECK(cyc.size() == 5);  // (a), (b), (aa), (ab), (bb): ab ~ ba
}

TEST_CASE("min action gap examples") {
    ChordAtlas one = tiny_atlas({{"c", "L1", "L1", 1.0}}, 3.5);
    GapResult g1 = min_action_gap(one);
    CHECK(!g1.empty);
    CHECK(g1.gap == doctest::Approx(1.0));

    ChordAtlas two = tiny_atlas({{"a", "L1", "L1", 1.0}, {"b", "L1", "L1", 1.2}}, 2.5);
    GapResult g2 = min_action_gap(two);
    CHECK(g2.gap == doctest::Approx(0.2));

    ChordAtlas empty = tiny_atlas({{"c", "L1", "L1", 5.0}}, 2.0);
    GapResult g3 = min_action_gap(empty);
    CHECK(g3.empty);
    CHECK(std::isinf(g3.gap));
}

TEST_CASE("canonicalization is rotation invariant on random cyclic words") {
    ChordAtlas atlas = tiny_atlas({{"a", "L1", "L1", 1.0},
                                   {"b", "L1", "L1", 1.2},
                                   {"c", "L1", "L1", 1.4},
                                   {"d", "L1", "L1", 1.7}},
                                  40.0);
    Rng rng(6);
    for (int k = 0; k < 10000; ++k) {
        int len = rng.uniform_int(1, 9);
        std::vector<int> w(len);
        for (int& x : w) x = rng.uniform_int(0, 3);
        std::vector<int> canon = canonical_rotation(atlas, w);
        int r = rng.uniform_int(0, len - 1);
        std::vector<int> rot = w;
        std::rotate(rot.begin(), rot.begin() + r, rot.end());
        CHECK(canonical_rotation(atlas, rot) == canon);
    }
}

TEST_CASE("enumeration equals brute force on random small atlases") {
    Rng rng(77);
    for (int trial = 0; trial < 50; ++trial) {
        int ncomp = rng.uniform_int(1, 2);
        int nchords = rng.uniform_int(1, 4);
        bool lam0 = rng.uniform() < 0.3;
        std::vector<std::string> comps;
        for (int i = 0; i < ncomp; ++i) comps.push_back("L" + std::to_string(i + 1));
        if (lam0) comps.push_back(kLambda0);
        std::vector<std::tuple<std::string, std::string, std::string, double>> chords;
        double minact = 10.0;
        for (int i = 0; i < nchords; ++i) {
            std::string from = comps[rng.uniform_int(0, static_cast<int>(comps.size()) - 1)];
            std::string to = comps[rng.uniform_int(0, static_cast<int>(comps.size()) - 1)];
            double act = rng.uniform(0.8, 2.0);
            minact = std::min(minact, act);
            chords.emplace_back("c" + std::to_string(i), from, to, act);
        }
        double cap = rng.uniform(1.0, 5.0) * minact;
        ChordAtlas atlas = tiny_atlas(chords, cap, comps);

        for (const auto& from : comps)
            for (const auto& to : comps) {
                auto fast = enumerate_words(atlas, from, to);
                std::set<std::vector<int>> fast_set;
                for (const auto& w : fast) fast_set.insert(w.chords);
                CHECK(fast_set == brute_force_words(atlas, from, to));
                CHECK(fast.size() == fast_set.size());  // no duplicates
                // sorted by action then lexicographically
                for (std::size_t i = 0; i + 1 < fast.size(); ++i)
                    CHECK(fast[i].action <= fast[i + 1].action + 1e-12);
            }
        auto cyc = enumerate_cyclic(atlas);
        std::set<std::vector<int>> cyc_set;
        for (const auto& w : cyc) cyc_set.insert(w.chords);
        CHECK(cyc_set == brute_force_cyclic(atlas));
    }
}

TEST_CASE("raising the cap never removes a word") {
    ChordAtlas lo = tiny_atlas({{"a", "L1", "L1", 1.0}, {"b", "L1", "L1", 1.3}}, 2.6);
    ChordAtlas hi = lo;
    hi.action_cap = 3.9;
    auto wl = enumerate_words(lo, "L1", "L1");
    auto wh = enumerate_words(hi, "L1", "L1");
    std::set<std::vector<int>> hi_set;
    for (const auto& w : wh) hi_set.insert(w.chords);
    for (const auto& w : wl) CHECK(hi_set.count(w.chords) == 1);
}

TEST_CASE("json and text emission") {
    ChordAtlas atlas = tiny_atlas({{"a", "L1", "L1", 1.0}, {"b", "L1", "L1", 1.2}}, 2.5);
    auto words = enumerate_words(atlas, "L1", "L1");
    std::string js = words_to_json(atlas, words);
    CHECK(js.find("\"chords\"") != std::string::npos);
    std::string txt = words_to_text(atlas, words);
    CHECK(txt.find("a b") != std::string::npos);
}
