// Benchmark: batch chord/orbit solving, OpenMP parallel map against the
// serial reference.  Usage: reeblab-bench [chords] [components] [repeats]

#include <chrono>
#include <cstdlib>
#include <iostream>

#include "reeblab/parallel.hpp"
#include "reeblab/surgery.hpp"

using namespace reeblab;

int main(int argc, char** argv) {
    int n_chords = argc > 1 ? std::atoi(argv[1]) : 3;
    int n_comps = argc > 2 ? std::atoi(argv[2]) : 2;
    int repeats = argc > 3 ? std::atoi(argv[3]) : 3;

    HandleParams hp = default_params();
    ChordAtlas atlas = synth_atlas(7, n_comps, n_chords, hp.n, false);
    VerifyOptions opts;
    opts.multistart = 10;

    std::size_t work = 0;
    for (const auto& f : atlas.components)
        for (const auto& t : atlas.components) work += enumerate_words(atlas, f, t).size();
    std::cout << "atlas: " << n_chords << " chords, " << n_comps << " components, " << work
              << " words, " << enumerate_cyclic(atlas).size() << " cyclic words\n";

    auto time_one = [&](bool parallel) {
        auto t0 = std::chrono::steady_clock::now();
        VerifyReport rep;
        for (int r = 0; r < repeats; ++r)
            rep = parallel ? verify_bijection(hp, atlas, opts)
                           : verify_bijection_serial(hp, atlas, opts);
        auto t1 = std::chrono::steady_clock::now();
        double ms = std::chrono::duration<double, std::milli>(t1 - t0).count() / repeats;
        std::cout << (parallel ? "parallel" : "serial  ") << "  " << ms << " ms/run  (pass="
                  << rep.pass << ")\n";
        return ms;
    };

    double serial_ms = time_one(false);
    double par_ms = time_one(true);
    std::cout << "threads " << hardware_jobs() << "  speedup x" << serial_ms / par_ms << "\n";

    // the two paths must agree bit for bit
    VerifyReport a = verify_bijection_serial(hp, atlas, opts);
    VerifyReport b = verify_bijection(hp, atlas, opts);
    bool same = report_to_json(atlas, a, false) == report_to_json(atlas, b, false);
    std::cout << "serial/parallel reports identical: " << (same ? "yes" : "NO") << "\n";
    return same ? 0 : 1;
}
