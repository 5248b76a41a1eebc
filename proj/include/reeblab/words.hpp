#ifndef REEBLAB_WORDS_HPP
#define REEBLAB_WORDS_HPP

#include "reeblab/ambient.hpp"

namespace reeblab {

// Composable word of atlas chords (indices into atlas.chords).
struct Word {
    std::vector<int> chords;
    double action = 0.0;
};

// Composable cyclic word, stored in its canonical rotation.
struct CyclicWord {
    std::vector<int> chords;
    double action = 0.0;
};

// Interior junctions must sit on surgered components; Lambda0 may only
// appear at the extremes of an open word.
bool composable(const ChordAtlas& atlas, const std::vector<int>& chords);
bool cyclically_composable(const ChordAtlas& atlas, const std::vector<int>& chords);

// All composable words from one component to another with action strictly
// below the cap, sorted by action then lexicographically by id sequence.
std::vector<Word> enumerate_words(const ChordAtlas& atlas, const std::string& from_component,
                                  const std::string& to_component);

// One canonical representative per rotation class, action below cap.
std::vector<CyclicWord> enumerate_cyclic(const ChordAtlas& atlas);

// Lexicographically least rotation by chord id sequence.
std::vector<int> canonical_rotation(const ChordAtlas& atlas, const std::vector<int>& chords);

struct GapResult {
    double gap = std::numeric_limits<double>::infinity();
    bool empty = false;  // no actions below the cap
};

// Minimal positive difference between distinct word/cyclic-word actions
// below the cap.
GapResult min_action_gap(const ChordAtlas& atlas);

// All word actions below the cap (open words over all admissible component
// pairs plus cyclic words); used by gap scans and cap validation.
std::vector<double> action_set(const ChordAtlas& atlas);

std::string words_to_json(const ChordAtlas& atlas, const std::vector<Word>& words);
std::string words_to_text(const ChordAtlas& atlas, const std::vector<Word>& words);
std::string cyclic_to_json(const ChordAtlas& atlas, const std::vector<CyclicWord>& words);
std::string cyclic_to_text(const ChordAtlas& atlas, const std::vector<CyclicWord>& words);

}  // namespace reeblab

#endif
