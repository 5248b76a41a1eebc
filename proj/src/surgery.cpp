#include "reeblab/surgery.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <sstream>

#include <json.hpp>

#include "reeblab/parallel.hpp"

namespace reeblab {

using nlohmann::json;

ChordClass classify_word(const ChordAtlas& atlas, const Word& word) {
    if (word.chords.empty()) throw ContractViolation("classify_word: empty word");
    const auto& first = atlas.chords[word.chords.front()];
    const auto& last = atlas.chords[word.chords.back()];
    bool from0 = first.start == kLambda0;
    bool to0 = last.end == kLambda0;
    if (from0 && to0) return ChordClass::Lambda0Lambda0;
    if (from0) return ChordClass::Lambda0Gamma;
    if (to0) return ChordClass::GammaLambda0;
    return ChordClass::GammaGamma;
}

std::string class_name(ChordClass c) {
    switch (c) {
        case ChordClass::GammaGamma: return "Gamma->Gamma";
        case ChordClass::Lambda0Gamma: return "Lambda0->Gamma";
        case ChordClass::GammaLambda0: return "Gamma->Lambda0";
        case ChordClass::Lambda0Lambda0: return "Lambda0->Lambda0";
    }
    return "?";
}

CompositeStep composite_step(const HandleParams& params, const ChordAtlas& atlas, int chord,
                             const TransverseState& exit_state) {
    if (chord < 0 || chord >= static_cast<int>(atlas.chords.size()))
        throw ContractViolation("composite_step: chord index out of range");
    CompositeStep out;
    out.state = transition_map(atlas.chords[chord], exit_state);
    PassageResult pr = through_handle_map(params, out.state.q, out.state.p);
    out.exit = pr.exit;
    out.action = atlas.chords[chord].action + pr.action_paper;
    out.deviation = pr.deviation_rescaled;
    return out;
}

namespace {

struct TrajectoryEval {
    Eigen::VectorXd residual;
    double action = 0.0;      // paper units including deviations
    double deviation = 0.0;   // paper units
    Eigen::VectorXd landing;  // chart of the landing point (Gamma classes)
};

// Evaluate the full word trajectory for a launch parameter.  The launch is
// the Gamma chart for Gamma-start classes, or the Lambda0 departure offset
// (a Legendrian position; the fiber offset vanishes on departure).
TrajectoryEval eval_word_trajectory(const HandleParams& params, const ChordAtlas& atlas,
                                    const Word& word, ChordClass cls,
                                    const Eigen::VectorXd& launch) {
    const int m = static_cast<int>(word.chords.size());
    const double ps = params.paper_scale();
    double action_words = 0.0;
    KahanSum dev;  // rescaled deviation accumulates over sphere crossings

    TransverseState state;  // exit-side charts entering the next transition
    if (cls == ChordClass::GammaGamma || cls == ChordClass::GammaLambda0) {
        PassageResult pr = launch_from_gamma(params, launch);
        dev.add(pr.deviation_rescaled);
        state.p = pr.exit.p;
        state.q = pr.exit.q;
    } else {
        state.p = Eigen::VectorXd::Zero(params.n - 1);
        state.q = launch;
    }

    TrajectoryEval out;
    for (int k = 0; k < m; ++k) {
        const AmbientChord& c = atlas.chords[word.chords[k]];
        action_words += c.action;
        TransverseState in = transition_map(c, state);
        bool last = (k == m - 1);
        if (!last) {
            PassageResult pr = through_handle_map(params, in.q, in.p);
            dev.add(pr.deviation_rescaled);
            state.p = pr.exit.p;
            state.q = pr.exit.q;
        } else if (cls == ChordClass::GammaGamma || cls == ChordClass::Lambda0Gamma) {
            LandingResult lr = land_on_gamma(params, in.q, in.p);
            dev.add(lr.deviation_rescaled);
            out.residual = lr.residual;
            out.landing = lr.gamma_chart;
        } else {
            // landing on Lambda0: the arriving fiber offset must vanish
            out.residual = in.p;
            out.landing = in.q;
        }
    }
    out.deviation = ps * dev.value();
    out.action = action_words + out.deviation;
    return out;
}

// Damped Newton with finite-difference Jacobian on a chart-valued residual.
struct NewtonResult {
    Eigen::VectorXd x;
    double residual;
    int iterations;
};

NewtonResult newton_solve(const std::function<Eigen::VectorXd(const Eigen::VectorXd&)>& f,
                          Eigen::VectorXd x0, const SolverOptions& opts) {
    Eigen::VectorXd x = x0;
    Eigen::VectorXd r = f(x);
    double rn = r.norm();
    int it = 0;
    for (; it < opts.newton_cap && rn > opts.tol; ++it) {
        const int d = static_cast<int>(x.size());
        Eigen::MatrixXd J(r.size(), d);
        for (int j = 0; j < d; ++j) {
            Eigen::VectorXd xp = x, xm = x;
            xp[j] += opts.fd_step;
            xm[j] -= opts.fd_step;
            Eigen::VectorXd rp, rm;
            try {
                rp = f(xp);
                rm = f(xm);
                J.col(j) = (rp - rm) / (2.0 * opts.fd_step);
            } catch (const std::exception&) {
                rp = f(x);  // fall back to one-sided differences at the boundary
                try {
                    Eigen::VectorXd r1 = f(xp);
                    J.col(j) = (r1 - rp) / opts.fd_step;
                } catch (const std::exception&) {
                    Eigen::VectorXd r1 = f(xm);
                    J.col(j) = (rp - r1) / opts.fd_step;
                }
            }
        }
        Eigen::VectorXd step = J.fullPivLu().solve(-r);
        // line search with halving; reject infeasible chart states
        double lam = 1.0;
        bool accepted = false;
        for (int ls = 0; ls < 30; ++ls) {
            Eigen::VectorXd xn = x + lam * step;
            try {
                Eigen::VectorXd rn2 = f(xn);
                if (rn2.norm() < rn || lam < 1e-8) {
                    x = xn;
                    r = rn2;
                    rn = rn2.norm();
                    accepted = true;
                    break;
                }
            } catch (const std::exception&) {
                // shrink into the feasible region
            }
            lam *= 0.5;
        }
        if (!accepted) break;
    }
    return NewtonResult{x, rn, it};
}

}  // namespace

FoundChord find_chord_for_word(const HandleParams& params, const ChordAtlas& atlas,
                               const Word& word, const SolverOptions& opts,
                               const Eigen::VectorXd* initial_guess) {
    if (!composable(atlas, word.chords))
        throw ContractViolation("find_chord_for_word: word is not composable");
    if (!(word.action < atlas.action_cap))
        throw ContractViolation("find_chord_for_word: word action exceeds the cap");
    ChordClass cls = classify_word(atlas, word);
    const int d = params.n - 1;

    FoundChord out;
    out.word = word;
    out.cls = cls;

    // A single pure-Lambda0 chord never meets the handle; it persists as is.
    if (cls == ChordClass::Lambda0Lambda0 && word.chords.size() == 1) {
        out.trivial_persisting = true;
        out.launch = Eigen::VectorXd::Zero(d);
        out.residual = 0.0;
        out.action = word.action;
        out.deviation = 0.0;
        return out;
    }

    auto f = [&](const Eigen::VectorXd& g) {
        return eval_word_trajectory(params, atlas, word, cls, g).residual;
    };
    Eigen::VectorXd g0 = initial_guess ? *initial_guess : Eigen::VectorXd::Zero(d);
    NewtonResult nr = newton_solve(f, g0, opts);
    if (nr.residual > opts.tol)
        throw NotFound("find_chord_for_word: shooting residual " + std::to_string(nr.residual) +
                           " above tolerance",
                       nr.residual);
    TrajectoryEval ev = eval_word_trajectory(params, atlas, word, cls, nr.x);
    out.launch = nr.x;
    out.residual = nr.residual;
    out.action = ev.action;
    out.deviation = ev.deviation;
    out.iterations = nr.iterations;
    return out;
}

namespace {

struct OrbitMapEval {
    Eigen::VectorXd q, p;
    double action = 0.0;
    double deviation = 0.0;  // paper units
};

// Once-around map F at the junction entry preceding the first chord.
OrbitMapEval orbit_forward_map(const HandleParams& params, const ChordAtlas& atlas,
                               const CyclicWord& word, const Eigen::VectorXd& q,
                               const Eigen::VectorXd& p) {
    const double ps = params.paper_scale();
    KahanSum dev;
    double act = 0.0;
    Eigen::VectorXd cq = q, cp = p;
    for (int k = 0; k < static_cast<int>(word.chords.size()); ++k) {
        PassageResult pr = through_handle_map(params, cq, cp);
        dev.add(pr.deviation_rescaled);
        const AmbientChord& c = atlas.chords[word.chords[k]];
        act += c.action;
        TransverseState in = transition_map(c, TransverseState{pr.exit.p, pr.exit.q});
        cq = in.q;
        cp = in.p;
    }
    OrbitMapEval out;
    out.q = cq;
    out.p = cp;
    out.deviation = ps * dev.value();
    out.action = act + out.deviation;
    return out;
}

// Backward once-around map G = F^{-1}.
OrbitMapEval orbit_backward_map(const HandleParams& params, const ChordAtlas& atlas,
                                const CyclicWord& word, const Eigen::VectorXd& q,
                                const Eigen::VectorXd& p) {
    const double ps = params.paper_scale();
    KahanSum dev;
    double act = 0.0;
    Eigen::VectorXd cq = q, cp = p;
    for (int k = static_cast<int>(word.chords.size()) - 1; k >= 0; --k) {
        const AmbientChord& c = atlas.chords[word.chords[k]];
        act += c.action;
        TransverseState ex = transition_map_inverse(c, TransverseState{cp, cq});
        PassageResult pr = through_handle_map_backward(params, ex.q, ex.p);
        dev.add(pr.deviation_rescaled);
        cq = pr.exit.q;
        cp = pr.exit.p;
    }
    OrbitMapEval out;
    out.q = cq;
    out.p = cp;
    out.deviation = ps * dev.value();
    out.action = act + out.deviation;
    return out;
}

}  // namespace

FoundOrbit find_orbit_for_cyclic_word(const HandleParams& params, const ChordAtlas& atlas,
                                      const CyclicWord& word, const SolverOptions& opts) {
    if (!cyclically_composable(atlas, word.chords))
        throw ContractViolation("find_orbit_for_cyclic_word: word is not cyclically composable");
    if (!(word.action < atlas.action_cap))
        throw ContractViolation("find_orbit_for_cyclic_word: word action exceeds the cap");
    const int d = params.n - 1;
    std::vector<Eigen::VectorXd> trace;

    // Phase A: iterate F from the fiber-center seed, fiber coordinate only.
    Eigen::VectorXd q = Eigen::VectorXd::Zero(d), p = Eigen::VectorXd::Zero(d);
    int used = 0;
    double pstep = 1.0;
    for (; used < opts.fixed_point_cap && pstep > 0.1 * opts.tol; ++used) {
        OrbitMapEval ev;
        try {
            ev = orbit_forward_map(params, atlas, word, q, p);
        } catch (const std::exception&) {
            break;
        }
        pstep = (ev.p - p).norm();
        p = ev.p;  // fiber iteration: the wandering q is re-centered each round
        trace.push_back(p);
        if (trace.size() > 64) trace.erase(trace.begin());
    }
    Eigen::VectorXd p_star = p;

    // Phase B: backwards map for the Legendrian coordinate.
    q.setZero();
    Eigen::VectorXd qb = Eigen::VectorXd::Zero(d);
    double qstep = 1.0;
    for (int it = 0; it < opts.fixed_point_cap && qstep > 0.1 * opts.tol; ++it, ++used) {
        OrbitMapEval ev;
        try {
            ev = orbit_backward_map(params, atlas, word, qb, p_star);
        } catch (const std::exception&) {
            break;
        }
        qstep = (ev.q - qb).norm();
        qb = ev.q;
        trace.push_back(qb);
        if (trace.size() > 64) trace.erase(trace.begin());
    }

    // Phase C: Newton polish on F(w) = w from the combined seed.
    Eigen::VectorXd w0(2 * d);
    w0 << qb, p_star;
    auto f = [&](const Eigen::VectorXd& w) {
        OrbitMapEval ev = orbit_forward_map(params, atlas, word, w.head(d), w.tail(d));
        Eigen::VectorXd r(2 * d);
        r << ev.q - w.head(d), ev.p - w.tail(d);
        return r;
    };
    NewtonResult nr = newton_solve(f, w0, opts);
    used += nr.iterations;
    if (nr.residual > opts.tol)
        throw Divergence("find_orbit_for_cyclic_word: no convergence, residual " +
                             std::to_string(nr.residual),
                         trace);

    FoundOrbit out;
    out.word = word;
    out.q0 = nr.x.head(d);
    out.p0 = nr.x.tail(d);
    out.forward_residual = nr.residual;
    OrbitMapEval fwd = orbit_forward_map(params, atlas, word, out.q0, out.p0);
    out.action = fwd.action;
    out.deviation = fwd.deviation;
    OrbitMapEval bwd = orbit_backward_map(params, atlas, word, out.q0, out.p0);
    Eigen::VectorXd br(2 * d);
    br << bwd.q - out.q0, bwd.p - out.p0;
    out.backward_residual = br.norm();
    out.iterations = used;

    // two-point Lipschitz probe along the fiber through the fixed point
    double delta = 1e-5;
    Eigen::VectorXd pp = out.p0;
    pp[0] += delta;
    OrbitMapEval ev2 = orbit_forward_map(params, atlas, word, out.q0, pp);
    out.contraction_factor = (ev2.p - fwd.p).norm() / delta;
    return out;
}

// --- verification ------------------------------------------------------------

static WordOutcome solve_word(const HandleParams& params, const ChordAtlas& atlas,
                              const Word& word, const VerifyOptions& opts) {
    WordOutcome wo;
    wo.word = word;
    wo.cls = classify_word(atlas, word);
    const int d = params.n - 1;
    try {
        FoundChord fc = find_chord_for_word(params, atlas, word, opts.solver);
        wo.found = true;
        wo.residual = fc.residual;
        wo.action = fc.action;
        wo.deviation = fc.deviation;
        if (!fc.trivial_persisting && opts.multistart > 1) {
            // deterministic per-word seed for the multistart perturbations
            std::uint64_t h = 0x9e3779b97f4a7c15ULL;
            for (int c : word.chords) h = h * 1099511628211ULL + static_cast<std::uint64_t>(c + 7);
            Rng rng(h);
            double spread = 0.0;
            for (int ms = 1; ms < opts.multistart; ++ms) {
                Eigen::VectorXd g0(d);
                for (int j = 0; j < d; ++j) g0[j] = rng.uniform(-1.0, 1.0);
                g0 = fc.launch + opts.multistart_radius * g0;
                try {
                    FoundChord alt = find_chord_for_word(params, atlas, word, opts.solver, &g0);
                    spread = std::max(spread, (alt.launch - fc.launch).norm());
                } catch (const std::exception&) {
                    // a failed restart is not a multiplicity
                }
            }
            wo.spread = spread;
            if (spread > opts.spread_tol) wo.unique = false;
        }
    } catch (const std::exception& e) {
        wo.found = false;
        wo.failure = e.what();
    }
    return wo;
}

static OrbitOutcome solve_orbit(const HandleParams& params, const ChordAtlas& atlas,
                                const CyclicWord& word, const VerifyOptions& opts) {
    OrbitOutcome oo;
    oo.word = word;
    try {
        FoundOrbit fo = find_orbit_for_cyclic_word(params, atlas, word, opts.solver);
        oo.found = true;
        oo.residual = fo.forward_residual;
        oo.action = fo.action;
        oo.deviation = fo.deviation;
        oo.contraction = fo.contraction_factor;
    } catch (const std::exception& e) {
        oo.found = false;
        oo.failure = e.what();
    }
    return oo;
}

static VerifyReport verify_impl(const HandleParams& params, const ChordAtlas& atlas,
                                const VerifyOptions& opts, bool parallel) {
    params.validate();
    VerifyReport rep;
    rep.epsilon = params.epsilon;

    std::vector<Word> words;
    for (const auto& from : atlas.components)
        for (const auto& to : atlas.components)
            for (auto& w : enumerate_words(atlas, from, to)) words.push_back(std::move(w));
    std::vector<CyclicWord> cyc = enumerate_cyclic(atlas);

    rep.words.resize(words.size());
    rep.orbits.resize(cyc.size());
    parallel_for(words.size(), opts.jobs, parallel, [&](std::size_t i) {
        rep.words[i] = solve_word(params, atlas, words[i], opts);
    });
    parallel_for(cyc.size(), opts.jobs, parallel, [&](std::size_t i) {
        rep.orbits[i] = solve_orbit(params, atlas, cyc[i], opts);
    });

    rep.words_total = static_cast<int>(words.size());
    rep.cyclic_total = static_cast<int>(cyc.size());
    for (const auto& wo : rep.words) {
        if (wo.found) {
            ++rep.chords_found;
            rep.max_residual = std::max(rep.max_residual, wo.residual);
            rep.max_spread = std::max(rep.max_spread, wo.spread);
            rep.max_action_deviation = std::max(rep.max_action_deviation, std::abs(wo.deviation));
            if (!wo.unique) ++rep.multiplicities;
        } else {
            ++rep.misses;
        }
    }
    for (const auto& oo : rep.orbits) {
        if (oo.found) {
            ++rep.orbits_found;
            rep.max_residual = std::max(rep.max_residual, oo.residual);
            rep.max_action_deviation = std::max(rep.max_action_deviation, std::abs(oo.deviation));
        } else {
            ++rep.orbit_misses;
        }
    }
    rep.pass = rep.misses == 0 && rep.orbit_misses == 0 && rep.multiplicities == 0;
    return rep;
}

VerifyReport verify_bijection(const HandleParams& params, const ChordAtlas& atlas,
                              const VerifyOptions& opts) {
    return verify_impl(params, atlas, opts, true);
}

VerifyReport verify_bijection_serial(const HandleParams& params, const ChordAtlas& atlas,
                                     const VerifyOptions& opts) {
    return verify_impl(params, atlas, opts, false);
}

static json word_ids(const ChordAtlas& atlas, const std::vector<int>& chords) {
    json ids = json::array();
    for (int c : chords) ids.push_back(atlas.chords[c].id);
    return ids;
}

std::string report_to_json(const ChordAtlas& atlas, const VerifyReport& rep, bool meta) {
    json doc;
    doc["pass"] = rep.pass;
    doc["epsilon"] = rep.epsilon;
    doc["words_total"] = rep.words_total;
    doc["chords_found"] = rep.chords_found;
    doc["misses"] = rep.misses;
    doc["multiplicities"] = rep.multiplicities;
    doc["cyclic_total"] = rep.cyclic_total;
    doc["orbits_found"] = rep.orbits_found;
    doc["orbit_misses"] = rep.orbit_misses;
    doc["max_residual"] = rep.max_residual;
    doc["max_multistart_spread"] = rep.max_spread;
    doc["max_action_deviation"] = rep.max_action_deviation;
    doc["words"] = json::array();
    for (const auto& wo : rep.words) {
        json e;
        e["chords"] = word_ids(atlas, wo.word.chords);
        e["class"] = class_name(wo.cls);
        e["found"] = wo.found;
        e["unique"] = wo.unique;
        e["residual"] = wo.residual;
        e["spread"] = wo.spread;
        e["word_action"] = wo.word.action;
        e["chord_action"] = wo.action;
        e["action_deviation"] = wo.deviation;
        if (!wo.found) e["failure"] = wo.failure;
        doc["words"].push_back(e);
    }
    doc["orbits"] = json::array();
    for (const auto& oo : rep.orbits) {
        json e;
        e["chords"] = word_ids(atlas, oo.word.chords);
        e["found"] = oo.found;
        e["residual"] = oo.residual;
        e["word_action"] = oo.word.action;
        e["orbit_action"] = oo.action;
        e["action_deviation"] = oo.deviation;
        e["contraction_factor"] = oo.contraction;
        if (!oo.found) e["failure"] = oo.failure;
        doc["orbits"].push_back(e);
    }
    if (meta) doc["generator"] = "reeblab verify";
    return doc.dump(2);
}

std::string report_to_text(const ChordAtlas& atlas, const VerifyReport& rep) {
    std::ostringstream os;
    os << (rep.pass ? "PASS" : "FAIL") << "  epsilon=" << rep.epsilon << "\n";
    os << "words: " << rep.chords_found << "/" << rep.words_total << " found, " << rep.misses
       << " misses, " << rep.multiplicities << " multiplicities\n";
    os << "orbits: " << rep.orbits_found << "/" << rep.cyclic_total << " found, "
       << rep.orbit_misses << " misses\n";
    os << "max residual " << std::scientific << std::setprecision(3) << rep.max_residual
       << ", max spread " << rep.max_spread << ", max action deviation "
       << rep.max_action_deviation << "\n";
    os << std::left << std::setw(26) << "word" << std::setw(20) << "class" << std::setw(8)
       << "found" << std::right << std::setw(13) << "residual" << std::setw(15) << "deviation"
       << "\n";
    for (const auto& wo : rep.words) {
        std::string w;
        for (std::size_t j = 0; j < wo.word.chords.size(); ++j) {
            if (j) w += " ";
            w += atlas.chords[wo.word.chords[j]].id;
        }
        os << std::left << std::setw(26) << w << std::setw(20) << class_name(wo.cls)
           << std::setw(8) << (wo.found ? "yes" : "NO") << std::right << std::scientific
           << std::setw(13) << std::setprecision(2) << wo.residual << std::setw(15)
           << wo.deviation << "\n";
    }
    for (const auto& oo : rep.orbits) {
        std::string w = "(";
        for (std::size_t j = 0; j < oo.word.chords.size(); ++j) {
            if (j) w += " ";
            w += atlas.chords[oo.word.chords[j]].id;
        }
        w += ")";
        os << std::left << std::setw(26) << w << std::setw(20) << "orbit" << std::setw(8)
           << (oo.found ? "yes" : "NO") << std::right << std::scientific << std::setw(13)
           << std::setprecision(2) << oo.residual << std::setw(15) << oo.deviation << "\n";
    }
    return os.str();
}

ThresholdResult epsilon_threshold(const HandleParams& params_template, const ChordAtlas& atlas,
                                  const ThresholdOptions& opts) {
    ThresholdResult res;
    auto passes = [&](double eps) {
        HandleParams hp = params_template;
        hp.epsilon = eps;
        try {
            return verify_bijection(hp, atlas, opts.verify).pass;
        } catch (const std::exception&) {
            return false;
        }
    };
    for (double eps = opts.eps_lo; eps <= opts.eps_hi + 1e-12; eps += opts.grid_step)
        res.scan.emplace_back(eps, passes(eps));
    double lo = -1.0, hi = -1.0;
    for (std::size_t i = 0; i < res.scan.size(); ++i)
        if (res.scan[i].second) lo = res.scan[i].first;
    if (lo < 0.0) throw ThresholdNotFound("epsilon_threshold: no passing epsilon in the scan range");
    for (auto& [eps, ok] : res.scan)
        if (eps > lo && !ok && hi < 0.0) hi = eps;
    for (auto& [eps, ok] : res.scan)
        if (eps < lo && !ok) res.monotone = false;
    if (hi < 0.0) {
        res.eps_pass = lo;
        res.eps_fail = opts.eps_hi;  // nothing failed above: report the scan edge
        return res;
    }
    while (hi - lo > opts.bracket_width) {
        double mid = 0.5 * (lo + hi);
        if (passes(mid))
            lo = mid;
        else
            hi = mid;
        res.scan.emplace_back(mid, lo == mid);
    }
    res.eps_pass = lo;
    res.eps_fail = hi;
    return res;
}

}  // namespace reeblab
