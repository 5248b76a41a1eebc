#include "reeblab/words.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <iomanip>
#include <set>
#include <sstream>

#include <json.hpp>

namespace reeblab {

using nlohmann::json;

// order-independent action sum: identical chord multisets give bit-identical
// values, so the action "set" has exact duplicates rather than ulp-level fuzz
static double canonical_action(const ChordAtlas& atlas, const std::vector<int>& chords) {
    std::vector<double> acts;
    acts.reserve(chords.size());
    for (int c : chords) acts.push_back(atlas.chords[c].action);
    std::sort(acts.begin(), acts.end());
    double s = 0.0;
    for (double a : acts) s += a;
    return s;
}

bool composable(const ChordAtlas& atlas, const std::vector<int>& chords) {
    if (chords.empty()) return false;
    for (std::size_t j = 0; j + 1 < chords.size(); ++j) {
        const auto& a = atlas.chords[chords[j]];
        const auto& b = atlas.chords[chords[j + 1]];
        if (a.end != b.start) return false;
        if (a.end == kLambda0) return false;  // junctions happen at the handle only
    }
    return true;
}

bool cyclically_composable(const ChordAtlas& atlas, const std::vector<int>& chords) {
    if (chords.empty()) return false;
    if (!composable(atlas, chords)) return false;
    const auto& last = atlas.chords[chords.back()];
    const auto& first = atlas.chords[chords.front()];
    if (last.end != first.start || last.end == kLambda0) return false;
    return true;
}

static bool word_less(const ChordAtlas& atlas, const Word& a, const Word& b) {
    if (a.action != b.action) return a.action < b.action;
    auto ids = [&](const Word& w) {
        std::vector<std::string> v;
        for (int c : w.chords) v.push_back(atlas.chords[c].id);
        return v;
    };
    return ids(a) < ids(b);
}

std::vector<Word> enumerate_words(const ChordAtlas& atlas, const std::string& from_component,
                                  const std::string& to_component) {
    if (!atlas.has_component(from_component) || !atlas.has_component(to_component))
        throw ContractViolation("enumerate_words: unknown component");
    std::vector<Word> out;
    std::vector<int> stack;
    // depth-first over composable continuations; actions are positive so the
    // cap bounds the length sharply
    std::function<void(const std::string&, double)> dfs = [&](const std::string& at, double act) {
        for (std::size_t i = 0; i < atlas.chords.size(); ++i) {
            const auto& c = atlas.chords[i];
            if (c.start != at) continue;
            double next = act + c.action;
            if (!(next < atlas.action_cap)) continue;
            stack.push_back(static_cast<int>(i));
            if (c.end == to_component) out.push_back(Word{stack, canonical_action(atlas, stack)});
            // continue only through surgered junctions
            if (c.end != kLambda0) dfs(c.end, next);
            stack.pop_back();
        }
    };
    dfs(from_component, 0.0);
    std::sort(out.begin(), out.end(),
              [&](const Word& a, const Word& b) { return word_less(atlas, a, b); });
    return out;
}

std::vector<int> canonical_rotation(const ChordAtlas& atlas, const std::vector<int>& chords) {
    auto id_seq = [&](const std::vector<int>& v) {
        std::vector<std::string> s;
        for (int c : v) s.push_back(atlas.chords[c].id);
        return s;
    };
    std::vector<int> best = chords;
    std::vector<std::string> best_ids = id_seq(chords);
    std::vector<int> rot = chords;
    for (std::size_t r = 1; r < chords.size(); ++r) {
        std::rotate(rot.begin(), rot.begin() + 1, rot.end());
        std::vector<std::string> ids = id_seq(rot);
        if (ids < best_ids) {
            best_ids = ids;
            best = rot;
        }
    }
    return best;
}

std::vector<CyclicWord> enumerate_cyclic(const ChordAtlas& atlas) {
    std::set<std::vector<int>> seen;
    std::vector<CyclicWord> out;
    std::vector<int> stack;
    std::function<void(int, const std::string&, double)> dfs = [&](int first, const std::string& at,
                                                                   double act) {
        for (std::size_t i = 0; i < atlas.chords.size(); ++i) {
            const auto& c = atlas.chords[i];
            if (c.start != at) continue;
            if (atlas.touches_lambda0(c)) continue;  // orbits never meet Lambda0
            double next = act + c.action;
            if (!(next < atlas.action_cap)) continue;
            stack.push_back(static_cast<int>(i));
            if (c.end == atlas.chords[first].start) {
                std::vector<int> canon = canonical_rotation(atlas, stack);
                if (seen.insert(canon).second)
                    out.push_back(CyclicWord{canon, canonical_action(atlas, stack)});
            }
            dfs(first, c.end, next);
            stack.pop_back();
        }
    };
    for (std::size_t i = 0; i < atlas.chords.size(); ++i) {
        const auto& c = atlas.chords[i];
        if (atlas.touches_lambda0(c)) continue;
        if (!(c.action < atlas.action_cap)) continue;
        stack.push_back(static_cast<int>(i));
        if (c.end == c.start) {
            std::vector<int> canon = canonical_rotation(atlas, stack);
            if (seen.insert(canon).second) out.push_back(CyclicWord{canon, c.action});
        }
        dfs(static_cast<int>(i), c.end, c.action);
        stack.pop_back();
    }
    std::sort(out.begin(), out.end(), [&](const CyclicWord& a, const CyclicWord& b) {
        if (a.action != b.action) return a.action < b.action;
        std::vector<std::string> ia, ib;
        for (int c : a.chords) ia.push_back(atlas.chords[c].id);
        for (int c : b.chords) ib.push_back(atlas.chords[c].id);
        return ia < ib;
    });
    return out;
}

std::vector<double> action_set(const ChordAtlas& atlas) {
    std::vector<double> acts;
    for (const auto& from : atlas.components)
        for (const auto& to : atlas.components)
            for (const auto& w : enumerate_words(atlas, from, to)) acts.push_back(w.action);
    for (const auto& w : enumerate_cyclic(atlas)) acts.push_back(w.action);
    std::sort(acts.begin(), acts.end());
    return acts;
}

GapResult min_action_gap(const ChordAtlas& atlas) {
    std::vector<double> acts = action_set(atlas);
    if (acts.empty()) return GapResult{std::numeric_limits<double>::infinity(), true};
    GapResult res;
    res.empty = false;
    res.gap = std::numeric_limits<double>::infinity();
    acts.erase(std::unique(acts.begin(), acts.end()), acts.end());
    for (std::size_t i = 0; i + 1 < acts.size(); ++i) {
        double d = acts[i + 1] - acts[i];
        if (d > 0.0 && d < res.gap) res.gap = d;
    }
    return res;
}

static json word_entry(const ChordAtlas& atlas, const std::vector<int>& chords, double action) {
    json ids = json::array();
    for (int c : chords) ids.push_back(atlas.chords[c].id);
    json e;
    e["chords"] = ids;
    e["action"] = action;
    return e;
}

std::string words_to_json(const ChordAtlas& atlas, const std::vector<Word>& words) {
    json arr = json::array();
    for (const auto& w : words) arr.push_back(word_entry(atlas, w.chords, w.action));
    return arr.dump(2);
}

std::string cyclic_to_json(const ChordAtlas& atlas, const std::vector<CyclicWord>& words) {
    json arr = json::array();
    for (const auto& w : words) arr.push_back(word_entry(atlas, w.chords, w.action));
    return arr.dump(2);
}

static std::string table(const ChordAtlas& atlas, const std::vector<std::vector<int>>& seqs,
                         const std::vector<double>& actions) {
    std::ostringstream os;
    os << std::left << std::setw(28) << "word" << std::right << std::setw(16) << "action" << "\n";
    for (std::size_t i = 0; i < seqs.size(); ++i) {
        std::string w;
        for (std::size_t j = 0; j < seqs[i].size(); ++j) {
            if (j) w += " ";
            w += atlas.chords[seqs[i][j]].id;
        }
        os << std::left << std::setw(28) << w << std::right << std::setw(16) << std::fixed
           << std::setprecision(9) << actions[i] << "\n";
    }
    return os.str();
}

std::string words_to_text(const ChordAtlas& atlas, const std::vector<Word>& words) {
    std::vector<std::vector<int>> seqs;
    std::vector<double> acts;
    for (const auto& w : words) {
        seqs.push_back(w.chords);
        acts.push_back(w.action);
    }
    return table(atlas, seqs, acts);
}

std::string cyclic_to_text(const ChordAtlas& atlas, const std::vector<CyclicWord>& words) {
    std::vector<std::vector<int>> seqs;
    std::vector<double> acts;
    for (const auto& w : words) {
        seqs.push_back(w.chords);
        acts.push_back(w.action);
    }
    return table(atlas, seqs, acts);
}

}  // namespace reeblab
