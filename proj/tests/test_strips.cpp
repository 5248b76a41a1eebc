#include <algorithm>
#include <doctest.h>

#include <cmath>

#include "reeblab/strips.hpp"

using namespace reeblab;

TEST_CASE("strip regions: corners, variants, region membership") {
    HandleParams hp = default_params();
    StripRegion sc = build_strip(hp);
    CHECK(sc.corner_count == 2);
    CHECK(sc.grid.size() == 2);

    StripOptions so;
    so.variant = StripVariant::OneCorner;
    StripRegion sa = build_strip(hp, so);
    CHECK(sa.corner_count == 1);
    CHECK(sa.grid.size() == 1);

    for (const auto& quad : sc.grid)
        for (const auto& row : quad)
            for (const auto& pt : row) {
                double h = 2.0 * pt.x1 * pt.x1 - pt.y1 * pt.y1;
                // coordinate granularity on the far arm limits the residual
                // to the local quadratic scale
                double tol = 1e-12 * std::max(1.0, 2.0 * pt.x1 * pt.x1 + pt.y1 * pt.y1);
                CHECK(h <= 1.0 + tol);   // between the branches (rescaled)
                CHECK(h >= -1.0 - tol);
                CHECK(pt.x2.norm() == 0.0);
                CHECK(pt.y2.norm() == 0.0);
                CHECK(pt.x1 * pt.y1 >= -1e-15);  // quadrants I and III
            }
}

TEST_CASE("holomorphicity residual: flat, translated, tilted") {
    HandleParams hp = default_params();
    StripRegion flat = build_strip(hp);
    CHECK(holomorphicity_residual(hp, flat) <= 1e-10);

    // translated in x2 by half the window: J_c is split there, still flat
    StripOptions so;
    so.x2_offset = Eigen::Vector2d(0.5 * hp.window(), 0.0);
    StripRegion moved = build_strip(hp, so);
    CHECK(holomorphicity_residual(hp, moved) <= 1e-10);

    // tilted into the x2 direction: residual ~ sin(angle)
    StripOptions st;
    st.tilt = 0.1;
    StripRegion tilted = build_strip(hp, st);
    double res = holomorphicity_residual(hp, tilted);
    CHECK(res == doctest::Approx(std::sin(0.1)).epsilon(0.05));
    CHECK(res > 1e-3);
}

TEST_CASE("strip energy: Stokes ledger closes") {
    HandleParams hp = default_params();
    StripRegion strip = build_strip(hp);
    StripEnergy en = strip_energy(hp, strip);
    CHECK(en.area > 0.0);
    CHECK(en.action_gap > 0.0);
    CHECK(en.stokes_residual <= 1e-8);
    CHECK(std::abs(en.cut_term) <= 1e-10 * en.area);
    CHECK(std::abs(en.corner_terms) == 0.0);
    // the gap measures act(c') - act(c) of the bounding chord arcs: positive
    // and of the same order as the area
    CHECK(en.action_gap == doctest::Approx(en.area).epsilon(1e-6));

    // one-corner variant carries half the ledger
    StripOptions so;
    so.variant = StripVariant::OneCorner;
    StripEnergy half = strip_energy(hp, build_strip(hp, so));
    CHECK(half.area == doctest::Approx(0.5 * en.area).epsilon(1e-12));
}

TEST_CASE("closed-form slice integral matches quadrature") {
    HandleParams hp = default_params();
    double xlo = hp.eps_pow(hp.s + 1.0), xhi = hp.eps_pow(hp.s);
    double quad = strip_slice_quadrature(hp, xlo, xhi);
    double closed = strip_slice_closed_form(hp, xlo, xhi);
    CHECK(quad == doctest::Approx(closed).epsilon(1e-6));
    CHECK(quad > 0.0);
}

TEST_CASE("area scaling slope is 2p within 5 percent") {
    HandleParams hp = default_params();
    std::vector<double> le, la;
    for (double eps : {0.35, 0.45, 0.55}) {
        HandleParams h2 = hp;
        h2.epsilon = eps;
        StripEnergy en = strip_energy(h2, build_strip(h2));
        le.push_back(std::log(eps));
        la.push_back(std::log(en.area));
    }
    double mx = 0, my = 0;
    for (std::size_t i = 0; i < le.size(); ++i) {
        mx += le[i];
        my += la[i];
    }
    mx /= le.size();
    my /= la.size();
    double num = 0, den = 0;
    for (std::size_t i = 0; i < le.size(); ++i) {
        num += (le[i] - mx) * (la[i] - my);
        den += (le[i] - mx) * (le[i] - mx);
    }
    double slope = num / den;
    CHECK(std::abs(slope - 2.0 * hp.p) <= 0.05 * 2.0 * hp.p);
    MESSAGE("strip area slope ", slope, " target ", 2.0 * hp.p);
}

TEST_CASE("monotonicity probe: pass at defaults, fail at the q=p control") {
    HandleParams hp = default_params();
    MonotonicityReport ok = monotonicity_probe(hp);
    CHECK(ok.pass);
    CHECK(ok.ratio < 0.1);
    CHECK(ok.a_escape == doctest::Approx(hp.eps_pow(2.0 * hp.q)));

    MonotonicityReport bad = monotonicity_probe(hp, /*control_q_equals_p=*/true);
    CHECK(!bad.pass);
    CHECK(bad.ratio > 0.1);

    double prev = 1e300;
    for (double eps : {0.55, 0.45, 0.35}) {
        HandleParams h2 = hp;
        h2.epsilon = eps;
        MonotonicityReport rep = monotonicity_probe(h2);
        CHECK(rep.ratio < prev);
        prev = rep.ratio;
    }
}

TEST_CASE("linearized operator: trivial kernel, controls, refinement stability") {
    HandleParams hp = default_params();
    KernelReport rep = linearized_kernel_dim(hp);
    CHECK(rep.dim == 0);
    CHECK(!rep.borderline_weight);
    CHECK(rep.augmented_dim == 2);

    KernelOptions matching;
    matching.matching_boundary = true;
    KernelReport ctrl = linearized_kernel_dim(hp, matching);
    CHECK(ctrl.dim >= 1);  // constants solve the matching-plane problem

    KernelOptions borderline;
    borderline.delta = 0.0;
    KernelReport b = linearized_kernel_dim(hp, borderline);
    CHECK(b.borderline_weight);
}

TEST_CASE("strip JSON export") {
    HandleParams hp = default_params();
    StripRegion strip = build_strip(hp);
    std::string js = strip_to_json(strip);
    CHECK(js.find("two-corner") != std::string::npos);
    CHECK(js.find("grid_x1y1") != std::string::npos);
}
