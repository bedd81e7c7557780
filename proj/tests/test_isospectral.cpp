#include <cmath>
#include <random>

#include "doctest.h"
#include "fixtures.hpp"
#include "gmpflow/flow.hpp"
#include "gmpflow/isospectral.hpp"

using namespace gmpflow;
using namespace gmpflow::iso;

namespace {

const Vec kC0{0.0};

fg::GapSet three_bands() { return {-2.0, 2.1, {{-1.2, -0.5}, {0.7, 1.3}}}; }

}  // namespace

TEST_CASE("is_residual examples") {
    const Vec r = is_residual(fx::periodic_block(), kC0, fx::two_band_delta());
    REQUIRE(r.size() == 3);
    for (double x : r) CHECK(std::abs(x) < 1e-13);
    const Vec off = is_residual(GmpBlock{{1.0, 0.5}, {2.0, 0.0}}, kC0, fx::two_band_delta());
    CHECK(off[1] == doctest::Approx(4.0));
    for (double t : {0.5, 2.0, 3.0}) {
        fg::DeltaData d = fx::two_band_delta();
        d.poles[0].lambda *= t;
        const Vec rt = is_residual(fx::periodic_block(), kC0, d);
        CHECK(rt[2] == doctest::Approx(4.0 - 4.0 * t));
    }
    CHECK(trace_mismatch(fx::periodic_block(), kC0, fx::two_band_delta(), trace_samples(fx::two_band_delta(), 20)) < 1e-9);
    CHECK(trace_mismatch(GmpBlock{{1.0, 0.5}, {2.0, 0.0}}, kC0, fx::two_band_delta(), trace_samples(fx::two_band_delta(), 20)) > 1.0);
}

TEST_CASE("residual_jacobian matches finite differences") {
    std::mt19937_64 rng(3);
    const fg::DeltaData d = fg::delta_from_gaps(three_bands());
    const Vec C = d.cs();
    for (int t = 0; t < 30; ++t) {
        GmpBlock b{Vec(3), Vec(3)};
        for (int m = 0; m < 3; ++m) {
            b.p[m] = fx::uniform(rng, -1, 1);
            b.q[m] = fx::uniform(rng, -1, 1);
        }
        b.p[2] = fx::uniform(rng, 0.3, 1.0);
        const Matrix j = residual_jacobian(b, C, d);
        const double h = 1e-6;
        for (int c = 0; c < 6; ++c) {
            GmpBlock up = b, dn = b;
            (c % 2 ? up.q : up.p)[c / 2] += h;
            (c % 2 ? dn.q : dn.p)[c / 2] -= h;
            const Vec ru = is_residual(up, C, d), rd = is_residual(dn, C, d);
            for (int r = 0; r < 4; ++r) CHECK(j(r, c) == doctest::Approx((ru[r] - rd[r]) / (2 * h)).epsilon(1e-5).scale(1.0));
        }
    }
}

TEST_CASE("solve_is_point on E*") {
    const IsPoint pt = solve_is_point(fx::two_band_delta(), kC0, GmpBlock{{1.3, 0.5}, {0.1, 0.0}});
    CHECK(pt.residual_max <= 1e-10);
    CHECK(pt.blk.p[1] == 0.5);
    const double p0 = pt.blk.p[0], q0 = pt.blk.q[0];
    CHECK(2 * p0 * p0 + q0 * q0 / 2 + 2 * p0 * p0 * q0 * q0 == doctest::Approx(4.0).epsilon(1e-10));
    CHECK(pt.blk.q[1] == doctest::Approx(-2.0 * p0 * q0).epsilon(1e-10));
    const IsPoint fixed = solve_is_point(fx::two_band_delta(), kC0, fx::periodic_block());
    CHECK(fixed.iterations == 0);
    CHECK(gmp::block_distance(fixed.blk, fx::periodic_block()) == 0.0);
    const IsPoint neg = solve_is_point(fx::two_band_delta(), kC0, GmpBlock{{-1.3, 0.5}, {-0.1, 0.0}});
    CHECK(gmp::block_distance_mod_sign(neg.blk, pt.blk) < 1e-10);
    CHECK(neg.blk.p[0] == doctest::Approx(-p0));
    CHECK(trace_mismatch(pt.blk, kC0, pt.d, trace_samples(pt.d, 20)) < 1e-9);
    CHECK(gmp::alternative_qg(pt.blk, kC0) == doctest::Approx(pt.blk.q[1] + pt.d.c0).epsilon(1e-10).scale(1.0));
}

TEST_CASE("solve_is_point on a three-band set") {
    const fg::DeltaData d = fg::delta_from_gaps(three_bands());
    const Vec C = d.cs();
    std::mt19937_64 rng(5);
    int hits = 0;
    for (int t = 0; t < 20; ++t) {
        GmpBlock seed{Vec(3), Vec(3)};
        for (int m = 0; m < 2; ++m) {
            seed.p[m] = fx::uniform(rng, -1.5, 1.5);
            seed.q[m] = fx::uniform(rng, -1.5, 1.5);
        }
        seed.p[2] = 1.0;
        seed.q[2] = 0.0;
        IsPoint pt;
        try {
            pt = solve_is_point(d, C, seed);
        } catch (const NumericalError&) {
            continue;
        }
        ++hits;
        CHECK(pt.residual_max <= 1e-10);
        CHECK(pt.blk.p[2] == 1.0 / d.lambda0);
        CHECK(trace_mismatch(pt.blk, C, d, trace_samples(d, 20)) < 1e-9);
        CHECK(gmp::alternative_qg(pt.blk, C) == doctest::Approx(pt.blk.q[2] + d.c0).epsilon(1e-10).scale(1.0));
        // the torus is invariant under the flow
        const gmp::GmpWindow w = gmp::periodic_window(pt.blk, C, -1, 2);
        for (const GmpBlock& b : flow::jacobi_flow_step(w).blocks) CHECK(residual_norm(is_residual(b, C, d)) < 1e-9);
        const gmp::GmpWindow o = flow::omega_closed_form(w);
        for (const GmpBlock& b : o.blocks) CHECK(residual_norm(is_residual(b, o.C, d)) < 1e-9);
    }
    CHECK(hits >= 10);
}

TEST_CASE("alternative q_g off the surface") {
    const GmpBlock b{{0.3, 0.7}, {1.1, -0.4}};
    double own_c0 = -(b.p[0] * b.q[0] + b.p[1] * b.q[1]) / b.p[1];
    CHECK(gmp::alternative_qg(b, kC0) == doctest::Approx(b.q[1] + own_c0).epsilon(1e-10));
}

TEST_CASE("magic_check") {
    const IsPoint p1{fx::periodic_block(), kC0, fx::two_band_delta(), {0, 0, 0}, 0.0, 0};
    const MagicReport r = magic_check(p1, 40, 10);
    CHECK(r.deviation < 1e-8);
    CHECK(r.rows_checked == 40);
    double bad = 0.0;
    try {
        bad = magic_check(GmpBlock{{1.0, 0.5}, {2.0, 0.0}}, kC0, fx::two_band_delta(), 40, 10).deviation;
    } catch (const NumericalError&) {
        bad = HUGE_VAL;
    }
    CHECK(bad > 0.1);
    CHECK_THROWS_AS(magic_check(p1, 20, 10), ValidationError);
    const fg::DeltaData d = fg::delta_from_gaps(three_bands());
    const IsPoint pt = solve_is_point(d, d.cs(), GmpBlock{{0.6, -0.4, 1.0}, {0.2, 0.3, 0.0}});
    CHECK(magic_check(pt, 40, 12).deviation < 1e-8);
}

TEST_CASE("is_jacobian") {
    const IsJacobian j = is_jacobian(fx::periodic_block(), kC0, fx::two_band_delta());
    CHECK(j.t(0, 0) == doctest::Approx(4.0 * std::sqrt(2.0)));
    CHECK(std::abs(j.t(0, 1)) < 1e-14);
    CHECK(j.fd_gap < 1e-5);
    CHECK(j.sigma_min == doctest::Approx(4.0 * std::sqrt(2.0)));
    // along the E* torus: the flow orbit and solved points
    for (double p0 : {0.2, 0.6, 1.0, 1.3}) {
        const IsPoint pt = solve_is_point(fx::two_band_delta(), kC0, GmpBlock{{p0, 0.5}, {0.7, 0.0}});
        const IsJacobian jj = is_jacobian(pt.blk, kC0, pt.d);
        CHECK(jj.fd_gap < 1e-5);
        CHECK(jj.sigma_min > 0.5);
    }
}

TEST_CASE("is_distance") {
    const DistanceResult z = is_distance(fx::periodic_block(), kC0, fx::two_band_delta());
    CHECK(z.distance < 1e-12);
    for (double eps : {1e-3, 1e-4}) {
        GmpBlock b = fx::periodic_block();
        b.p[0] += eps;
        const DistanceResult r = is_distance(b, kC0, fx::two_band_delta());
        CHECK(r.distance / eps == doctest::Approx(1.0).epsilon(10 * eps));
        CHECK(r.nearest.residual_max < 1e-10);
        GmpBlock m = b;
        m.p[0] = -m.p[0];
        const DistanceResult rm = is_distance(m, kC0, fx::two_band_delta());
        CHECK(rm.distance == doctest::Approx(r.distance).epsilon(1e-8));
        CHECK(rm.nearest.blk.p[0] == doctest::Approx(-r.nearest.blk.p[0]));
    }
    GmpBlock big{{1.0, 0.6}, {0.5, -0.3}};
    const DistanceResult rb = is_distance(big, kC0, fx::two_band_delta());
    CHECK(rb.distance > 0.0);
    CHECK(rb.nearest.residual_max < 1e-10);
}
