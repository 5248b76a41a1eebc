#include <doctest.h>

#include <cmath>

#include "reeblab/asymptotics.hpp"

using namespace reeblab;

namespace {
constexpr double kTwoPi = 6.2831853071795864769;

std::vector<Eigen::MatrixXd> rotation_path(double theta, int samples) {
    std::vector<Eigen::MatrixXd> path;
    for (int i = 0; i <= samples; ++i) {
        double t = theta * i / samples;
        Eigen::Matrix2d m;
        m << std::cos(t), -std::sin(t), std::sin(t), std::cos(t);
        path.push_back(m);
    }
    return path;
}
}  // namespace

TEST_CASE("flat spectrum: eigenvalues 2 pi k with double multiplicity") {
    auto spec = AsymptoticOperatorSpec::zero(1, 64);
    SpectrumResult sr = spectrum(spec, 3);
    REQUIRE(sr.levels.size() == 3);
    for (int k = 0; k < 3; ++k) {
        CHECK(std::abs(sr.levels[k].lambda + kTwoPi * (k + 1)) <= 1e-8);
        CHECK(sr.levels[k].basis.size() == 2);
        CHECK(sr.levels[k].refine_error <= 1e-10);
    }
    // spectral symmetry: for S0 = 0 the +2pi partner of -2pi is present.
    // Shifting by 7 drags it below zero where the API can see it.
    auto spec_shift = AsymptoticOperatorSpec::constant(1, 7.0 * Eigen::Matrix2d::Identity(), 64);
    SpectrumResult mirrored = spectrum(spec_shift, 3);
    CHECK(std::abs(mirrored.levels[0].lambda - (kTwoPi - 7.0)) <= 1e-8);
    CHECK(std::abs(mirrored.levels[1].lambda - (0.0 - 7.0)) <= 1e-8);
    CHECK(std::abs(mirrored.levels[2].lambda - (-kTwoPi - 7.0)) <= 1e-8);
}

TEST_CASE("constant S0 shifts the spectrum exactly") {
    double a = 0.37;
    auto flat = AsymptoticOperatorSpec::zero(1, 48);
    auto shifted = AsymptoticOperatorSpec::constant(1, a * Eigen::Matrix2d::Identity(), 48);
    SpectrumResult s0 = spectrum(flat, 2);
    // the shift drags the zero level to -a, so the old levels sit one slot
    // deeper in the negative list
    SpectrumResult s1 = spectrum(shifted, 3);
    CHECK(std::abs(s1.levels[0].lambda + a) <= 1e-10);
    for (int k = 0; k < 2; ++k)
        CHECK(std::abs(s1.levels[k + 1].lambda - (s0.levels[k].lambda - a)) <= 1e-10);
}

TEST_CASE("doubling the grid moves lambda_1 by less than 1e-10 for smooth S0") {
    // smooth loop S0(t) = a(t) Id with a trigonometric polynomial a
    int M = 48;
    AsymptoticOperatorSpec spec;
    spec.d = 1;
    for (int i = 0; i <= M; ++i) {
        double t = static_cast<double>(i) / M;
        double a = 0.3 + 0.2 * std::cos(kTwoPi * t) + 0.05 * std::sin(2.0 * kTwoPi * t);
        spec.samples.push_back(a * Eigen::Matrix2d::Identity());
    }
    spec.samples[M] = spec.samples[0];
    SpectrumResult sr = spectrum(spec, 1);
    CHECK(sr.levels[0].refine_error <= 1e-10);
}

TEST_CASE("spectrum preconditions") {
    auto spec = AsymptoticOperatorSpec::zero(1, 16);
    CHECK_THROWS_AS(spectrum(spec, 3), ContractViolation);  // M < 8K
    AsymptoticOperatorSpec bad = AsymptoticOperatorSpec::zero(1, 32);
    bad.samples[3](0, 1) += 1e-6;  // not symmetric
    CHECK_THROWS_AS(spectrum(bad, 2), ContractViolation);
}

TEST_CASE("Conley-Zehnder index of rotation paths") {
    for (double theta : {0.5, 2.0, 5.0}) {
        CHECK(cz_index(rotation_path(theta, 400)) == 1);
        CHECK(cz_index(rotation_path(-theta, 400)) == -1);  // reversal negates
    }
    // adding a full turn increments by 2
    CHECK(cz_index(rotation_path(0.5 + kTwoPi, 1200)) == 3);
    CHECK(cz_index(rotation_path(0.5 + 2.0 * kTwoPi, 2400)) == 5);

    // grading adds n - 3
    CHECK(cz_grading(rotation_path(1.0, 400), 3) == 1);
    CHECK(cz_grading(rotation_path(1.0, 400), 5) == 3);

    // degenerate endpoint rejected
    CHECK_THROWS_AS(cz_index(rotation_path(kTwoPi, 1200)), DegenerateEndpoint);

    // block sums add: R(theta) + R(-phi) in Sp(4)
    std::vector<Eigen::MatrixXd> path4;
    int N = 600;
    for (int i = 0; i <= N; ++i) {
        double t = static_cast<double>(i) / N;
        Eigen::Matrix4d m = Eigen::Matrix4d::Identity();
        double a = 1.3 * t, b = -0.7 * t;
        // coordinates ordered (x1, x2, y1, y2): J0 (x,y) = (-y, x)
        m(0, 0) = std::cos(a);
        m(0, 2) = -std::sin(a);
        m(2, 0) = std::sin(a);
        m(2, 2) = std::cos(a);
        m(1, 1) = std::cos(b);
        m(1, 3) = -std::sin(b);
        m(3, 1) = std::sin(b);
        m(3, 3) = std::cos(b);
        path4.push_back(m);
    }
    CHECK(cz_index(path4) == 0);  // 1 + (-1)
}

TEST_CASE("tail fit recovers planted coefficients and leading index") {
    auto spec = AsymptoticOperatorSpec::zero(1, 48);
    SpectrumResult sr = spectrum(spec, 3);

    auto plant = [&](double c1, double c2, double noise, std::uint64_t seed) {
        std::vector<Eigen::VectorXd> coeffs(3);
        coeffs[0] = Eigen::Vector2d(c1, 0.0);
        coeffs[1] = Eigen::Vector2d(c2, 0.0);
        coeffs[2] = Eigen::Vector2d::Zero();
        return synth_tail(sr, coeffs, 0.0, 0.8, 40, noise, seed);
    };

    TailSample t1 = plant(1.0, 0.3, 0.0, 1);
    TailFit f1 = fit_tail(t1, sr);
    CHECK(f1.leading == 1);
    CHECK(std::abs(f1.coeffs[0][0] - 1.0) <= 1e-6);
    CHECK(std::abs(f1.coeffs[1][0] - 0.3) <= 1e-6);
    CHECK(f1.delta > 0.0);

    TailSample t2 = plant(0.0, 1.0, 0.0, 2);
    TailFit f2 = fit_tail(t2, sr);
    CHECK(f2.leading == 2);

    // pure noise cannot be classified
    TailSample tn = plant(0.0, 0.0, 1e-3, 3);
    // give it a decaying envelope so the sample validates, then corrupt
    TailSample base = plant(1.0, 0.0, 0.0, 4);
    Rng rng(9);
    for (auto& m : base.values)
        for (Eigen::Index r = 0; r < m.rows(); ++r)
            for (Eigen::Index c = 0; c < m.cols(); ++c)
                m(r, c) += 0.15 * std::complex<double>(rng.gaussian(), rng.gaussian()) *
                           std::exp(-2.0);
    CHECK_THROWS_AS(fit_tail(base, sr), UnclassifiableTail);
    (void)tn;
}

TEST_CASE("fit-then-synthesize round trip") {
    auto spec = AsymptoticOperatorSpec::zero(1, 48);
    SpectrumResult sr = spectrum(spec, 3);
    std::vector<Eigen::VectorXd> coeffs(3);
    coeffs[0] = Eigen::Vector2d(0.9, -0.2);
    coeffs[1] = Eigen::Vector2d(0.0, 0.25);
    coeffs[2] = Eigen::Vector2d(0.05, 0.0);
    TailSample tail = synth_tail(sr, coeffs, 0.0, 0.7, 36);
    TailFit fit = fit_tail(tail, sr);
    TailSample re = synth_tail(sr, fit.coeffs, 0.0, 0.7, 36);
    // compare on the last quarter of the s range
    for (std::size_t is = 27; is < tail.values.size(); ++is) {
        double scale = tail.values[is].cwiseAbs().maxCoeff();
        CHECK((re.values[is] - tail.values[is]).cwiseAbs().maxCoeff() <= 1e-6 * scale);
    }
}

TEST_CASE("arc counting on planted tails") {
    auto spec = AsymptoticOperatorSpec::zero(1, 64);
    SpectrumResult sr = spectrum(spec, 3);

    auto plant_level = [&](int level) {
        std::vector<Eigen::VectorXd> coeffs(3, Eigen::VectorXd::Zero(2));
        coeffs[level - 1] = Eigen::Vector2d(1.0, 0.0);
        return synth_tail(sr, coeffs, 0.0, 0.5, 120);
    };

    TailSample t1 = plant_level(1);
    CHECK(count_arcs(t1, 0.3) == 1);
    TailSample t2 = plant_level(2);
    CHECK(count_arcs(t2, 0.3) == 2);
    TailSample t3 = plant_level(3);
    CHECK(count_arcs(t3, 0.3) == 3);

    // a mixed tail led by level 1 shows one arc at radii below the crossover
    std::vector<Eigen::VectorXd> mixed(3, Eigen::VectorXd::Zero(2));
    mixed[0] = Eigen::Vector2d(0.4, 0.0);
    mixed[1] = Eigen::Vector2d(1.0, 0.0);
    TailSample tm = synth_tail(sr, mixed, 0.0, 1.2, 300);
    CHECK(count_arcs(tm, 1e-3) == 1);

    // r beyond the tail diameter is inconclusive
    CHECK_THROWS_AS(count_arcs(t1, 50.0), InconclusiveArcs);
}

TEST_CASE("radii selection induces good position for every stratum") {
    auto spec = AsymptoticOperatorSpec::zero(1, 64);
    SpectrumResult sr = spectrum(spec, 3);

    auto make_fit = [&](int lead) {
        std::vector<Eigen::VectorXd> coeffs(3, Eigen::VectorXd::Zero(2));
        coeffs[lead - 1] = Eigen::Vector2d(0.8, 0.0);
        if (lead < 3) coeffs[lead] = Eigen::Vector2d(0.3, 0.1);
        TailSample tail = synth_tail(sr, coeffs, 0.0, 0.9, 80);
        return fit_tail(tail, sr);
    };

    std::vector<TailFit> fits{make_fit(1), make_fit(2), make_fit(3)};
    std::vector<double> radii = select_radii(sr, fits, 0.5);
    REQUIRE(radii.size() == 3);
    CHECK(radii[0] < radii[1]);
    CHECK(radii[1] < radii[2]);
    for (int j = 0; j < 3; ++j)
        for (int i = j; i < 3; ++i) {
            std::vector<Eigen::VectorXd> coeffs = fits[i].coeffs;
            TailSample tail = synth_tail(sr, coeffs, 0.0, 6.0 / kTwoPi, 160);
            CHECK(count_arcs(tail, radii[j]) == i + 1);
        }

    // single stratum: a midpoint radius works
    std::vector<TailFit> one{make_fit(1)};
    std::vector<double> r1 = select_radii(sr, one, 0.5);
    CHECK(r1.size() == 1);
    CHECK(r1[0] > 0.0);

    // zero floors are rejected
    CHECK_THROWS_AS(select_radii(sr, fits, 0.0), ContractViolation);
}

TEST_CASE("100 random planted families classify at 100 percent") {
    auto spec = AsymptoticOperatorSpec::zero(1, 48);
    SpectrumResult sr = spectrum(spec, 3);
    Rng rng(404);
    for (int trial = 0; trial < 100; ++trial) {
        int lead = rng.uniform_int(1, 3);
        std::vector<Eigen::VectorXd> coeffs(3, Eigen::VectorXd::Zero(2));
        for (int L = lead - 1; L < 3; ++L) {
            if (L == lead - 1)
                coeffs[L] = Eigen::Vector2d(rng.uniform(0.5, 1.5), rng.uniform(-0.5, 0.5));
            else
                coeffs[L] = Eigen::Vector2d(rng.uniform(-0.4, 0.4), rng.uniform(-0.4, 0.4));
        }
        TailSample tail = synth_tail(sr, coeffs, 0.0, 0.8, 40, 1e-8, 1000 + trial);
        TailFit fit = fit_tail(tail, sr);
        CHECK(fit.leading == lead);
    }
}

TEST_CASE("tail JSON round trip") {
    auto spec = AsymptoticOperatorSpec::zero(1, 32);
    SpectrumResult sr = spectrum(spec, 2);
    std::vector<Eigen::VectorXd> coeffs(2);
    coeffs[0] = Eigen::Vector2d(1.0, 0.0);
    coeffs[1] = Eigen::Vector2d(0.2, 0.1);
    TailSample tail = synth_tail(sr, coeffs, 0.0, 0.6, 20);
    TailSample back = tail_from_json(tail_to_json(tail));
    CHECK(back.s_grid.size() == tail.s_grid.size());
    double diff = 0.0;
    for (std::size_t i = 0; i < tail.values.size(); ++i)
        diff = std::max(diff, (back.values[i] - tail.values[i]).cwiseAbs().maxCoeff());
    CHECK(diff == 0.0);
}
