// Command line front end: experiment orchestration and machine/human
// readable result emission.  Exit codes: 0 success/PASS, 2 verification
// FAIL, 1 usage or runtime error.

#include <fstream>
#include <iostream>
#include <optional>

#include <CLI11.hpp>
#include <json.hpp>

#include "reeblab/asymptotics.hpp"
#include "reeblab/parallel.hpp"
#include "reeblab/strips.hpp"
#include "reeblab/surgery.hpp"

using namespace reeblab;
using nlohmann::json;

namespace {

struct CommonOpts {
    double epsilon = 0.5, p = 22, s = 3, l = 21, q = 20;
    int n = 3;
    std::string atlas_path;
    std::string config_path;
    std::string out_path;
    bool no_meta = false;
    int jobs = 0;
    // synthesis
    bool use_synth = false;
    std::uint64_t seed = 0;
    bool seed_given = false;
    int synth_components = 1;
    int synth_chords = 2;
    bool synth_lambda0 = false;
};

void add_params(CLI::App* cmd, CommonOpts& o) {
    cmd->add_option("--epsilon", o.epsilon, "handle width epsilon");
    cmd->add_option("--p", o.p, "exponent p");
    cmd->add_option("--s", o.s, "exponent s");
    cmd->add_option("--l", o.l, "exponent l");
    cmd->add_option("--q", o.q, "exponent q");
    cmd->add_option("--n", o.n, "ambient complex dimension n");
    cmd->add_option("--config", o.config_path, "JSON config file (flags take precedence)");
    cmd->add_option("--out", o.out_path, "write the JSON report to this path");
    cmd->add_flag("--no-meta", o.no_meta, "omit metadata from emitted JSON");
    cmd->add_option("--jobs", o.jobs, "worker threads (0: all)");
}

void add_atlas(CLI::App* cmd, CommonOpts& o) {
    cmd->add_option("--atlas", o.atlas_path, "atlas JSON file");
    cmd->add_flag("--synth", o.use_synth, "synthesize the atlas instead of loading one");
    auto* seed = cmd->add_option("--seed", o.seed, "synthesis seed (required with --synth)");
    seed->each([&o](const std::string&) { o.seed_given = true; });
    cmd->add_option("--synth-components", o.synth_components, "number of link components");
    cmd->add_option("--synth-chords", o.synth_chords, "number of chords");
    cmd->add_flag("--synth-lambda0", o.synth_lambda0, "include a non-surgered Legendrian");
}

// config file: same keys as the long flags, flags win
void apply_config(CLI::App* cmd, CommonOpts& o) {
    if (o.config_path.empty()) return;
    std::ifstream in(o.config_path);
    if (!in) throw std::runtime_error("cannot open config '" + o.config_path + "'");
    json cfg = json::parse(in);
    auto given = [&](const std::string& flag) {
        auto* opt = cmd->get_option_no_throw(flag);
        return opt != nullptr && opt->count() > 0;
    };
    auto num = [&](const std::string& key, double& slot) {
        if (cfg.contains(key) && !given("--" + key)) slot = cfg[key].get<double>();
    };
    num("epsilon", o.epsilon);
    num("p", o.p);
    num("s", o.s);
    num("l", o.l);
    num("q", o.q);
    if (cfg.contains("n") && !given("--n")) o.n = cfg["n"].get<int>();
    if (cfg.contains("atlas") && !given("--atlas")) o.atlas_path = cfg["atlas"].get<std::string>();
    if (cfg.contains("jobs") && !given("--jobs")) o.jobs = cfg["jobs"].get<int>();
    if (cfg.contains("seed") && !given("--seed")) {
        o.seed = cfg["seed"].get<std::uint64_t>();
        o.seed_given = true;
    }
}

HandleParams make_params(const CommonOpts& o) {
    HandleParams hp;
    hp.epsilon = o.epsilon;
    hp.p = o.p;
    hp.s = o.s;
    hp.l = o.l;
    hp.q = o.q;
    hp.n = o.n;
    hp.validate();
    return hp;
}

ChordAtlas make_atlas(const CommonOpts& o) {
    if (o.use_synth) {
        if (!o.seed_given)
            throw std::runtime_error("--seed is required with --synth (reproducibility)");
        return synth_atlas(o.seed, o.synth_components, o.synth_chords, o.n, o.synth_lambda0);
    }
    if (o.atlas_path.empty()) throw std::runtime_error("an atlas is required (--atlas or --synth)");
    return load_atlas(o.atlas_path);
}

void emit(const CommonOpts& o, const std::string& json_text) {
    if (o.out_path.empty()) return;
    std::ofstream out(o.out_path);
    if (!out) throw std::runtime_error("cannot write '" + o.out_path + "'");
    out << json_text << "\n";
}

AsymptoticOperatorSpec make_operator_spec(int d, int grid, double s0_const,
                                          const std::string& s0_file) {
    if (!s0_file.empty()) {
        std::ifstream in(s0_file);
        if (!in) throw std::runtime_error("cannot open '" + s0_file + "'");
        json doc = json::parse(in);
        AsymptoticOperatorSpec spec;
        spec.d = d;
        for (const auto& mj : doc.at("samples")) {
            Eigen::MatrixXd m(2 * d, 2 * d);
            for (int r = 0; r < 2 * d; ++r)
                for (int c = 0; c < 2 * d; ++c) m(r, c) = mj[r * 2 * d + c].get<double>();
            spec.samples.push_back(m);
        }
        spec.validate();
        return spec;
    }
    return AsymptoticOperatorSpec::constant(
        d, s0_const * Eigen::MatrixXd::Identity(2 * d, 2 * d), grid);
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"reeblab: Reeb dynamics on model Weinstein handles"};
    app.require_subcommand(1);

    CommonOpts o;

    auto* c_enum = app.add_subcommand("enumerate", "composable words below the action cap");
    std::string from_comp, to_comp;
    bool cyclic = false;
    add_params(c_enum, o);
    add_atlas(c_enum, o);
    c_enum->add_option("--from", from_comp, "start component (default: all)");
    c_enum->add_option("--to", to_comp, "end component (default: all)");
    c_enum->add_flag("--cyclic", cyclic, "enumerate cyclic words instead");

    auto* c_chords = app.add_subcommand("find-chords", "co-core chords for every word");
    add_params(c_chords, o);
    add_atlas(c_chords, o);
    auto* c_orbits = app.add_subcommand("find-orbits", "orbits for every cyclic word");
    add_params(c_orbits, o);
    add_atlas(c_orbits, o);

    auto* c_verify = app.add_subcommand("verify", "verify the word/chord and orbit bijection");
    add_params(c_verify, o);
    add_atlas(c_verify, o);
    int multistart = 10;
    c_verify->add_option("--multistart", multistart, "launches per word");

    auto* c_thresh = app.add_subcommand("threshold", "largest passing epsilon, by bisection");
    add_params(c_thresh, o);
    add_atlas(c_thresh, o);
    double eps_lo = 0.30, eps_hi = 0.90;
    c_thresh->add_option("--eps-lo", eps_lo, "scan lower bound");
    c_thresh->add_option("--eps-hi", eps_hi, "scan upper bound");

    auto* c_spec = app.add_subcommand("spectrum", "asymptotic operator eigenvalues");
    add_params(c_spec, o);
    int sp_d = 1, sp_grid = 64, sp_count = 3;
    double s0_const = 0.0;
    std::string s0_file;
    c_spec->add_option("--dim", sp_d, "transverse complex dimension d = n-1");
    c_spec->add_option("--grid", sp_grid, "collocation grid size M");
    c_spec->add_option("--count", sp_count, "number of negative levels K");
    c_spec->add_option("--s0-const", s0_const, "S0 = const * Id");
    c_spec->add_option("--s0-file", s0_file, "S0 loop samples (JSON)");

    auto* c_fit = app.add_subcommand("fit-tail", "classify a curve tail in the eigenbasis");
    add_params(c_fit, o);
    std::string tail_path;
    c_fit->add_option("--tail", tail_path, "tail sample JSON")->required();
    c_fit->add_option("--dim", sp_d, "transverse complex dimension");
    c_fit->add_option("--grid", sp_grid, "collocation grid size");
    c_fit->add_option("--count", sp_count, "levels to fit against");
    c_fit->add_option("--s0-const", s0_const, "S0 = const * Id");
    c_fit->add_option("--s0-file", s0_file, "S0 loop samples (JSON)");

    auto* c_strip = app.add_subcommand("strip", "basic model strip and its energy ledger");
    add_params(c_strip, o);
    std::string variant = "two-corner";
    c_strip->add_option("--variant", variant, "two-corner | one-corner");

    auto* c_probe = app.add_subcommand("probe", "monotonicity / action-gap probe");
    add_params(c_probe, o);
    bool control = false;
    c_probe->add_flag("--control-qp", control, "negative control with q = p");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int rc = app.exit(e);      // prints usage / help text
        return rc == 0 ? 0 : 1;    // usage errors exit 1
    }

    try {
        CLI::App* active = app.get_subcommands().front();
        apply_config(active, o);

        if (c_enum->parsed()) {
            ChordAtlas atlas = make_atlas(o);
            json doc;
            if (cyclic) {
                auto words = enumerate_cyclic(atlas);
                std::cout << cyclic_to_text(atlas, words);
                doc = json::parse(cyclic_to_json(atlas, words));
            } else {
                std::vector<Word> all;
                for (const auto& f : atlas.components)
                    for (const auto& t : atlas.components) {
                        if (!from_comp.empty() && f != from_comp) continue;
                        if (!to_comp.empty() && t != to_comp) continue;
                        for (auto& w : enumerate_words(atlas, f, t)) all.push_back(std::move(w));
                    }
                std::cout << words_to_text(atlas, all);
                doc = json::parse(words_to_json(atlas, all));
            }
            emit(o, doc.dump(2));
            return 0;
        }

        if (c_chords->parsed() || c_orbits->parsed() || c_verify->parsed()) {
            HandleParams hp = make_params(o);
            ChordAtlas atlas = make_atlas(o);
            VerifyOptions vo;
            vo.jobs = o.jobs;
            vo.multistart = c_verify->parsed() ? multistart : 1;
            VerifyReport rep = verify_bijection(hp, atlas, vo);
            if (c_chords->parsed()) rep.orbits.clear();
            if (c_orbits->parsed()) rep.words.clear();
            std::cout << report_to_text(atlas, rep);
            emit(o, report_to_json(atlas, rep, !o.no_meta));
            if (c_verify->parsed()) return rep.pass ? 0 : 2;
            return (rep.misses == 0 && rep.orbit_misses == 0) ? 0 : 2;
        }

        if (c_thresh->parsed()) {
            HandleParams hp = make_params(o);
            ChordAtlas atlas = make_atlas(o);
            ThresholdOptions topt;
            topt.eps_lo = eps_lo;
            topt.eps_hi = eps_hi;
            topt.verify.jobs = o.jobs;
            ThresholdResult res = epsilon_threshold(hp, atlas, topt);
            json doc;
            doc["eps_pass"] = res.eps_pass;
            doc["eps_fail"] = res.eps_fail;
            doc["monotone_scan"] = res.monotone;
            doc["scan"] = json::array();
            for (auto& [eps, ok] : res.scan) doc["scan"].push_back({{"epsilon", eps}, {"pass", ok}});
            std::cout << "threshold bracket: pass at " << res.eps_pass << ", fail at "
                      << res.eps_fail << (res.monotone ? "" : "  (non-monotone scan)") << "\n";
            emit(o, doc.dump(2));
            return 0;
        }

        if (c_spec->parsed()) {
            auto spec = make_operator_spec(sp_d, sp_grid, s0_const, s0_file);
            SpectrumResult sr = spectrum(spec, sp_count);
            json doc;
            doc["levels"] = json::array();
            std::cout << "negative levels (descending from zero):\n";
            for (std::size_t i = 0; i < sr.levels.size(); ++i) {
                std::cout << "  lambda_" << (i + 1) << " = " << sr.levels[i].lambda
                          << "   (refinement error " << sr.levels[i].refine_error
                          << ", multiplicity " << sr.levels[i].basis.size() << ")\n";
                doc["levels"].push_back({{"lambda", sr.levels[i].lambda},
                                         {"refine_error", sr.levels[i].refine_error},
                                         {"multiplicity", sr.levels[i].basis.size()}});
            }
            emit(o, doc.dump(2));
            return 0;
        }

        if (c_fit->parsed()) {
            TailSample tail = load_tail(tail_path);
            auto spec = make_operator_spec(sp_d, sp_grid, s0_const, s0_file);
            SpectrumResult sr = spectrum(spec, sp_count);
            TailFit fit = fit_tail(tail, sr);
            json doc;
            doc["leading_index"] = fit.leading;
            doc["level_coefficients"] = fit.level_coeff;
            doc["delta"] = fit.delta;
            doc["residual"] = fit.residual;
            std::cout << "leading index " << fit.leading << ", residual " << fit.residual
                      << ", delta " << fit.delta << "\n";
            emit(o, doc.dump(2));
            return 0;
        }

        if (c_strip->parsed()) {
            HandleParams hp = make_params(o);
            StripOptions so;
            if (variant == "two-corner")
                so.variant = StripVariant::TwoCorner;
            else if (variant == "one-corner")
                so.variant = StripVariant::OneCorner;
            else
                throw std::runtime_error("unknown strip variant '" + variant + "'");
            StripRegion strip = build_strip(hp, so);
            StripEnergy en = strip_energy(hp, strip);
            double hol = holomorphicity_residual(hp, strip);
            json doc = json::parse(strip_to_json(strip));
            doc["area"] = en.area;
            doc["action_gap"] = en.action_gap;
            doc["stokes_residual"] = en.stokes_residual;
            doc["holomorphicity_residual"] = hol;
            std::cout << "corners " << strip.corner_count << "  area " << en.area
                      << "  action gap " << en.action_gap << "  stokes residual "
                      << en.stokes_residual << "  holomorphicity residual " << hol << "\n";
            emit(o, doc.dump());
            return 0;
        }

        if (c_probe->parsed()) {
            HandleParams hp = make_params(o);
            MonotonicityReport rep = monotonicity_probe(hp, control);
            json doc;
            doc["a_strip"] = rep.a_strip;
            doc["a_escape"] = rep.a_escape;
            doc["ratio"] = rep.ratio;
            doc["margin"] = rep.margin;
            doc["pass"] = rep.pass;
            std::cout << (rep.pass ? "PASS" : "FAIL") << "  A_strip " << rep.a_strip
                      << "  A_escape " << rep.a_escape << "  ratio " << rep.ratio << "\n";
            emit(o, doc.dump(2));
            return rep.pass ? 0 : 2;
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    std::cerr << "error: no subcommand\n";
    return 1;
}
