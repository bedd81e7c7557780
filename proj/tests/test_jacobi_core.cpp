#include <cmath>
#include <random>

#include "doctest.h"
#include "fixtures.hpp"
#include "gmpflow/jacobi_core.hpp"

using namespace gmpflow;
using namespace gmpflow::jac;

namespace {

JacobiWindow random_window(std::mt19937_64& rng, int n_min, int n_max) {
    JacobiWindow j;
    j.n_min = n_min;
    for (int n = n_min; n <= n_max; ++n) {
        j.a.push_back(fx::uniform(rng, 0.5, 1.5));
        j.b.push_back(fx::uniform(rng, -1.0, 1.0));
    }
    return j;
}

}  // namespace

TEST_CASE("spectral_measure_plus") {
    JacobiWindow one{0, {1.0}, {0.7}};
    const DiscreteMeasure m1 = spectral_measure_plus(one);
    REQUIRE(m1.points.size() == 1);
    CHECK(m1.points[0] == doctest::Approx(0.7));
    CHECK(m1.weights[0] == doctest::Approx(1.0));
    const DiscreteMeasure mf = spectral_measure_plus(free_window(0, 199));
    double s = 0.0;
    for (std::size_t i = 0; i < mf.points.size(); ++i) {
        CHECK(std::abs(mf.points[i]) < 2.0);
        s += mf.weights[i];
    }
    CHECK(s == doctest::Approx(1.0).epsilon(1e-13));
    std::mt19937_64 rng(3);
    const JacobiWindow r = random_window(rng, 0, 30);
    const DiscreteMeasure mr = spectral_measure_plus(r);
    CHECK_NOTHROW(mr.validate());
    double m1st = 0.0;
    for (std::size_t i = 0; i < mr.points.size(); ++i) m1st += mr.weights[i] * mr.points[i];
    CHECK(m1st == doctest::Approx(r.b[0]).epsilon(1e-12));
    for (double z : {-3.5, 0.123, 2.9}) {
        try {
            CHECK(std::abs(measure_resolvent(mr, z) - resolvent_r(r, z)) < 1e-10 * std::max(1.0, std::abs(resolvent_r(r, z))));
        } catch (const NumericalError&) {
        }
    }
}

TEST_CASE("resolvent_r examples") {
    CHECK(resolvent_r(free_window(0, 1999), 3.0) == doctest::Approx((-3.0 + std::sqrt(5.0)) / 2).epsilon(1e-12));
    CHECK(resolvent_r(JacobiWindow{0, {1.0}, {0.0}}, 2.0) == doctest::Approx(-0.5));
    CHECK_THROWS_AS(resolvent_r(JacobiWindow{0, {1.0}, {0.0}}, 0.0), NumericalError);
    std::mt19937_64 rng(4);
    for (int t = 0; t < 50; ++t) {
        const JacobiWindow j = random_window(rng, 0, 20);
        const std::complex<double> z(fx::uniform(rng, -3, 3), fx::uniform(rng, 0.01, 2));
        CHECK(resolvent_r(j, z).imag() > 0.0);
        CHECK(resolvent_r(j, std::conj(z)).imag() < 0.0);
        const double x = 3.5 + t * 0.01;
        CHECK(std::abs(resolvent_r(j, std::complex<double>(x, 0.0)).real() - resolvent_r(j, x)) < 1e-12);
    }
}

TEST_CASE("lanczos_from_measure") {
    const JacobiWindow j = lanczos_from_measure({{-1.0, 1.0}, {0.5, 0.5}}, 1);
    CHECK(j.a[1] == doctest::Approx(1.0));
    CHECK(std::abs(j.b[0]) < 1e-15);
    CHECK(std::abs(j.b[1]) < 1e-15);
    const JacobiWindow f = lanczos_from_measure(spectral_measure_plus(free_window(0, 99)), 30);
    for (int i = 0; i <= 30; ++i) {
        CHECK(std::abs(f.b[i]) < 1e-8);
        if (i > 0) CHECK(std::abs(f.a[i] - 1.0) < 1e-8);
    }
    const JacobiWindow z = lanczos_from_measure({{0.0}, {1.0}}, 0);
    CHECK(z.size() == 1);
    CHECK(z.b[0] == 0.0);
    CHECK_THROWS_AS(lanczos_from_measure({{0.0}, {1.0}}, 1), ValidationError);
    // moments up to order 2 depth + 1
    std::mt19937_64 rng(9);
    const JacobiWindow r = random_window(rng, 0, 25);
    const DiscreteMeasure m = spectral_measure_plus(r);
    const int depth = 8;
    const JacobiWindow back = lanczos_from_measure(m, depth);
    const DiscreteMeasure mb = spectral_measure_plus(back);
    for (int k = 0; k <= 2 * depth + 1; ++k) {
        double u = 0.0, v = 0.0;
        for (std::size_t i = 0; i < m.points.size(); ++i) u += m.weights[i] * std::pow(m.points[i], k);
        for (std::size_t i = 0; i < mb.points.size(); ++i) v += mb.weights[i] * std::pow(mb.points[i], k);
        CHECK(std::abs(u - v) < 1e-9 * std::max(1.0, std::abs(u)));
    }
    for (int i = 0; i <= depth; ++i) {
        CHECK(back.b[i] == doctest::Approx(r.b[i]).epsilon(1e-9));
        if (i > 0) CHECK(back.a[i] == doctest::Approx(r.a[i]).epsilon(1e-9));
    }
}

TEST_CASE("kappa: trivial and free examples") {
    // J_+ = [[0,1],[1,0]] has r_+(0) = 0
    JacobiWindow j{-3, {1.0, 0.8, 1.2, 0.6, 1.0}, {0.4, -0.3, 0.9, 0.0, 0.0}};
    CHECK(std::abs(r_plus(j, 0.0)) < 1e-15);
    const KappaVector k = kappa(j, 0.0);
    CHECK(std::abs(k.phi) < 1e-15);
    Vec e(j.size(), 0.0);
    e[j.local(0)] = 1.0;
    Matrix m = dense(j);
    const Vec x = nk::solve(m, e);
    CHECK(nk::max_abs_diff(x, k.vec) < 1e-14);
    const JacobiWindow f = free_window(-60, 60);
    CHECK(phi_of_c(f, 3.0) == doctest::Approx(std::atan(-0.381966011250105)).epsilon(1e-10));
    CHECK(phi_of_c(f, 3.0) == doctest::Approx(-0.364864).epsilon(1e-5));
    const KappaVector kf = kappa(f, 3.0);
    CHECK(kf.boundary < 1e-9);
    CHECK(std::abs(kf.norm2 - phi_prime_fd(f, 3.0)) < 1e-6);
    const PhiBounds bd = phi_prime_bounds(f, 3.0);
    CHECK(bd.lower <= kf.norm2);
    CHECK(kf.norm2 <= bd.upper);
    CHECK_THROWS_AS(kappa(JacobiWindow{-1, {1.0, 1.0}, {0.0, 0.0}}, 1.0), NumericalError);
}

TEST_CASE("kappa: the pole case and the minus side") {
    // J_+ = [0] has r_+ = -1/c, pole at c = 0 while J itself is regular there
    JacobiWindow j{-2, {1.0, 0.9, 0.7}, {0.5, 0.3, 0.0}};
    const KappaVector k = kappa(j, 0.0);
    CHECK(k.phi == doctest::Approx(3.14159265358979323846 / 2));
    for (double v : {k.vec[0], k.vec[1]}) CHECK(std::abs(v) < 1e-15);  // supported on n >= 0
    CHECK(std::abs(k.norm2 - phi_prime_fd(j, 0.0, 1e-5)) < 1e-6);
    const KappaVector km = kappa_minus(j, 0.0);
    CHECK(std::tan(km.phi) == doctest::Approx(r_minus(j, 0.0)).epsilon(1e-12));
    CHECK(std::abs(km.vec[j.local(0)]) < 1e-14);  // supported on n <= -1
}

TEST_CASE("kappa: norm identity and bounds on random windows") {
    std::mt19937_64 rng(11);
    int done = 0;
    for (int t = 0; t < 60; ++t) {
        const JacobiWindow j = random_window(rng, -15, 14);
        const double c = fx::uniform(rng, -4.0, 4.0);
        if (near_spectrum(j, c, 1e-2)) continue;
        const KappaVector k = kappa(j, c);
        CHECK(std::abs(k.norm2 - phi_prime_fd(j, c)) < 1e-6 * std::max(1.0, k.norm2));
        CHECK(std::tan(k.phi) == doctest::Approx(r_plus(j, c)).epsilon(1e-9));
        const PhiBounds b = phi_prime_bounds(j, c);
        CHECK(b.lower <= k.norm2 * (1 + 1e-12));
        CHECK(k.norm2 <= b.upper * (1 + 1e-12));
        ++done;
    }
    CHECK(done > 20);
}

TEST_CASE("kappa_pairing") {
    const JacobiWindow f = free_window(-40, 40);
    const PairingResult z = kappa_pairing(f, f, 3.0);
    CHECK(z.lhs == 0.0);
    CHECK(std::abs(z.rhs) < 1e-15);
    JacobiWindow g = f;
    g.b[g.local(2)] += 0.1;
    const PairingResult p = kappa_pairing(f, g, 3.0);
    CHECK(std::abs(p.lhs - p.rhs) < 1e-8);
    CHECK(std::abs(p.rhs) > 1e-6);
    const PairingResult q = kappa_pairing(g, f, 3.0);
    CHECK(q.lhs == doctest::Approx(-p.lhs));
    CHECK(q.rhs == doctest::Approx(-p.rhs));
    std::mt19937_64 rng(12);
    for (int t = 0; t < 50; ++t) {
        const JacobiWindow a = random_window(rng, -10, 12);
        JacobiWindow b = a;
        for (int i = 0; i < b.size(); ++i) {
            b.a[i] += fx::uniform(rng, -0.1, 0.1);
            b.b[i] += fx::uniform(rng, -0.1, 0.1);
        }
        const double c = fx::uniform(rng, -4.0, 4.0);
        if (near_spectrum(a, c, 1e-2) || near_spectrum(b, c, 1e-2)) continue;
        const PairingResult r = kappa_pairing(a, b, c);
        CHECK(std::abs(r.lhs - r.rhs) < 1e-8);
    }
}

TEST_CASE("two_by_two_resolvent") {
    const TwoByTwo f = two_by_two_resolvent(free_window(-400, 399), 3.0);
    CHECK(f.r.m22 == doctest::Approx(-1.0 / std::sqrt(5.0)).epsilon(1e-12));
    CHECK(f.r.m11 == doctest::Approx(f.r.m22).epsilon(1e-12));
    CHECK(f.r.m12 == doctest::Approx(f.r.m21).epsilon(1e-12));
    CHECK(f.residual_00 < 1e-8);
    CHECK(f.residual_m1 < 1e-8);
    std::mt19937_64 rng(13);
    for (int t = 0; t < 50; ++t) {
        const JacobiWindow j = random_window(rng, -12, 11);
        const TwoByTwo r = two_by_two_resolvent(j, norm_bound(j) + 1.0);
        CHECK(r.residual_00 < 1e-8);
        CHECK(r.residual_m1 < 1e-8);
    }
}

TEST_CASE("extension_predicate") {
    CHECK(extension_predicate(ExtKind::Pole, ExtKind::Regular));
    CHECK(extension_predicate(ExtKind::Regular, ExtKind::Zero));
    CHECK_FALSE(extension_predicate(ExtKind::Pole, ExtKind::Pole));
    CHECK(extension_predicate(ExtKind::Zero, ExtKind::Regular));
    CHECK_FALSE(extension_predicate(ExtKind::Regular, ExtKind::Regular));
    CHECK_FALSE(extension_predicate(ExtKind::Zero, ExtKind::Zero));
    CHECK(classify(0.0) == ExtKind::Zero);
    CHECK(classify(1e13) == ExtKind::Pole);
    CHECK(classify(HUGE_VAL) == ExtKind::Pole);
    CHECK(classify(-0.4) == ExtKind::Regular);
}

TEST_CASE("dist_eta") {
    CHECK(dist_eta(Vec{1, 2, 3}, Vec{1, 2, 3}, 0.5) == 0.0);
    CHECK(dist_eta(Vec{1, 0, 0}, Vec{0, 0, 0}, 0.5) == doctest::Approx(1.0));
    Vec d(400);
    for (int n = 0; n < 400; ++n) d[n] = std::pow(0.7, n);
    CHECK(dist_eta(d, Vec(400, 0.0), 0.7) == doctest::Approx(1.0 / std::sqrt(1 - std::pow(0.7, 4))));
    CHECK_THROWS_AS(dist_eta(Vec{1}, Vec{1}, 1.0), ValidationError);
    const JacobiWindow f = free_window(0, 50);
    JacobiWindow g = f;
    g.a[3] += 0.5;
    CHECK(dist_eta(f, g, 0.5) == doctest::Approx(0.5 * std::pow(0.5, 3)));
    JacobiWindow per{0, {}, {}};
    for (int n = 0; n < 60; ++n) {
        per.a.push_back(n % 2 ? 1.5 : 0.5);
        per.b.push_back(0.0);
    }
    JacobiWindow ref = restrict_window(per, 1, 40);
    ref.n_min = 0;
    CHECK(shifted_dist(per, ref, 1, 0.5) < 1e-15);
    CHECK(shifted_dist(per, ref, 2, 0.5) > 0.5);
}
