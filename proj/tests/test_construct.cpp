#include <algorithm>
#include <cmath>
#include <tuple>
#include <random>

#include "doctest.h"
#include "fixtures.hpp"
#include "gmpflow/construct.hpp"
#include "gmpflow/flow.hpp"
#include "gmpflow/isospectral.hpp"

using namespace gmpflow;
using namespace gmpflow::construct;

namespace {

DiscreteMeasure four_points() { return {{-2.0, -1.5, 1.5, 2.0}, {0.25, 0.25, 0.25, 0.25}}; }

DiscreteMeasure random_measure(std::mt19937_64& rng, int n, const Vec& C, double spread) {
    DiscreteMeasure m;
    double total = 0.0;
    while (static_cast<int>(m.points.size()) < n) {
        const double x = fx::uniform(rng, -spread, spread);
        bool ok = true;
        for (double c : C) ok = ok && std::abs(x - c) > 0.05;
        if (!ok) continue;
        m.points.push_back(x);
        m.weights.push_back(fx::uniform(rng, 0.1, 1.0));
        total += m.weights.back();
    }
    for (double& w : m.weights) w /= total;
    std::vector<std::pair<double, double>> pw;
    for (std::size_t i = 0; i < m.points.size(); ++i) pw.emplace_back(m.points[i], m.weights[i]);
    std::sort(pw.begin(), pw.end());
    for (std::size_t i = 0; i < pw.size(); ++i) std::tie(m.points[i], m.weights[i]) = pw[i];
    return m;
}

JacobiWindow period2(int n_min, int n_max) {
    JacobiWindow j;
    j.n_min = n_min;
    for (int n = n_min; n <= n_max; ++n) {
        j.a.push_back(n % 2 == 0 ? 1.5 : 0.5);
        j.b.push_back(0.0);
    }
    return j;
}

GmpWindow perturbed_periodic(std::mt19937_64& rng, int j_min, int j_max, double eps) {
    GmpWindow w = fx::periodic_base_window(j_min, j_max);
    for (auto& b : w.blocks)
        for (int m = 0; m < 2; ++m) {
            b.p[m] += fx::uniform(rng, -eps, eps);
            b.q[m] += fx::uniform(rng, -eps, eps);
        }
    return w;
}

}  // namespace

TEST_CASE("gram_D") {
    const Matrix d = gram_D(four_points(), {0.0});
    CHECK(std::abs(d(0, 0) - 1.0) < 1e-15);
    CHECK(std::abs(d(0, 1)) < 1e-15);
    CHECK(std::abs(d(1, 1) - 25.0 / 72.0) < 1e-15);
    std::mt19937_64 rng(2);
    const Vec C{-0.7, 0.4};
    const DiscreteMeasure m = random_measure(rng, 12, C, 2.0);
    const Matrix d2 = gram_D(m, C);
    // entries against r_-(z) = int dm/(x - z): first row is -r_-, the rest divided differences
    CHECK(std::abs(d2(0, 1) + jac::measure_resolvent(m, C[1])) < 1e-12);
    const double dd = (jac::measure_resolvent(m, C[0]) - jac::measure_resolvent(m, C[1])) / (C[0] - C[1]);
    CHECK(std::abs(d2(1, 2) - dd) < 1e-12 * std::max(1.0, std::abs(dd)));
    for (int t = 0; t < 100; ++t) {
        const DiscreteMeasure mt = random_measure(rng, 5 + t % 7, C, 3.0);
        CHECK_NOTHROW(factor_L(gram_D(mt, C)));
    }
    CHECK_THROWS_AS(gram_D(four_points(), {1.5}), ValidationError);
}

TEST_CASE("factor_L") {
    const Matrix l = factor_L(gram_D(four_points(), {0.0}));
    CHECK(std::abs(l(0, 0) - 1.0) < 1e-14);
    CHECK(std::abs(l(0, 1)) < 1e-14);
    CHECK(std::abs(l(1, 0)) == 0.0);
    CHECK(l(1, 1) == doctest::Approx(std::sqrt(72.0 / 25.0)).epsilon(1e-14));
    CHECK(nk::max_abs(factor_L(Matrix::identity(3)) - Matrix::identity(3)) < 1e-15);
    std::mt19937_64 rng(4);
    for (int t = 0; t < 50; ++t) {
        const int n = 1 + t % 5;
        Matrix b(n, n);
        for (int i = 0; i < n; ++i)
            for (int k = 0; k < n; ++k) b(i, k) = fx::uniform(rng, -1, 1);
        Matrix d = b * b.transpose();
        for (int i = 0; i < n; ++i) d(i, i) += 0.1;
        const Matrix lt = factor_L(d);
        CHECK(nk::max_abs(lt.transpose() * d * lt - Matrix::identity(n)) < 1e-10);
        for (int i = 0; i < n; ++i) {
            CHECK(lt(i, i) > 0.0);
            for (int k = 0; k < i; ++k) CHECK(lt(i, k) == 0.0);
        }
    }
    CHECK_THROWS_AS(factor_L(Matrix::diag({1.0, -1.0})), NumericalError);
}

TEST_CASE("tau_basis on the four-point measure") {
    const RationalBasis rb = tau_basis(four_points(), fx::two_band_delta(), {0.0}, 2);
    REQUIRE(rb.size() == 4);
    CHECK(orthonormality_residual(rb) < 1e-12);
    for (int i = 0; i < 4; ++i) {
        CHECK(std::abs(rb.values(i, 0) - 1.0) < 1e-14);
        CHECK(std::abs(rb.values(i, 1) - 1.697056274847714 / (-rb.points[i])) < 1e-12);
    }
    for (double l : rb.lead) CHECK(l > 0.0);
    CHECK_THROWS_AS(tau_basis(four_points(), fx::two_band_delta(), {0.0}, 3), ValidationError);
    CHECK_THROWS_AS(tau_basis(four_points(), fx::two_band_delta(), {0.5}, 2), ValidationError);
}

TEST_CASE("multiplication matrix of the four-point measure") {
    const DiscreteMeasure m = four_points();
    const RationalBasis rb = tau_basis(m, fx::two_band_delta(), {0.0}, 2);
    const OneSidedReport rep = check_one_sided(rb, m, fx::two_band_delta());
    CHECK(rep.pattern_leak < 1e-10);
    CHECK(rep.symmetry < 1e-14);
    CHECK(rep.class_residual < 1e-10);
    CHECK(rep.c_hat_deviation < 1e-12);
    CHECK(rep.p_formula_deviation < 1e-12);
}

TEST_CASE("multiplication matrix on a larger two-gap measure") {
    const fg::DeltaData d = fg::delta_from_gaps({-2.0, 2.1, {{-1.2, -0.5}, {0.7, 1.3}}});
    const Vec C = d.cs();
    std::mt19937_64 rng(6);
    const DiscreteMeasure m = random_measure(rng, 40, C, 2.2);
    for (const Vec& ord : {C, Vec{C[1], C[0]}}) {
        const RationalBasis rb = tau_basis(m, d, ord, 5);
        CHECK(orthonormality_residual(rb) < 1e-10);
        const OneSidedReport rep = check_one_sided(rb, m, d);
        CHECK(rep.pattern_leak < 1e-9);
        CHECK(rep.class_residual < 1e-9);
        CHECK(rep.c_hat_deviation < 1e-10);
        CHECK(rep.p_formula_deviation < 1e-10);
    }
}

TEST_CASE("jacobi_to_gmp of the period-2 matrix is the periodic point") {
    const GmpFromJacobi r = jacobi_to_gmp(period2(-40, 40), fx::two_band_delta(), {0.0});
    CHECK(r.orth_residual < 1e-12);
    CHECK(r.class_residual < 1e-8);
    for (int b = r.window.j_min; b <= r.window.j_max(); ++b)
        CHECK(gmp::block_distance_mod_sign(r.window.at(b), fx::periodic_block()) < 1e-8);
    CHECK_THROWS_AS(jacobi_to_gmp(period2(-10, 10), fx::two_band_delta(), {0.0}), ValidationError);
    CHECK_THROWS_AS(jacobi_to_gmp(period2(-40, 40), fx::two_band_delta(), {1.0}), ValidationError);
}

TEST_CASE("gmp_to_jacobi_measure") {
    const JacobiWindow j = gmp_to_jacobi_measure(fx::periodic_base_window(-12, 12));
    CHECK(j.a_at(0) == nk::norm2(fx::periodic_block().p));
    for (int n = j.n_min + 1; n <= j.n_max(); ++n) {
        CHECK(std::abs(j.a_at(n) - (n % 2 == 0 ? 1.5 : 0.5)) < 1e-10);
        CHECK(std::abs(j.b_at(n)) < 1e-10);
    }
    std::mt19937_64 rng(8);
    double worst = 0.0;
    for (int t = 0; t < 20; ++t) {
        const GmpWindow w = perturbed_periodic(rng, -10, 30, 0.1);
        const JacobiWindow jm = gmp_to_jacobi_measure(w);
        CHECK(jm.a_at(0) == nk::norm2(w.at(0).p));
        const JacobiWindow jf = flow::extract_jacobi(flow::flow_run(w, 14, {}));
        for (int n = 0; n < 10; ++n) {
            worst = std::max(worst, std::abs(jm.a_at(n) - jf.a_at(n)));
            worst = std::max(worst, std::abs(jm.b_at(n) - jf.b_at(n)));
        }
    }
    CHECK(worst < 1e-6);
}

TEST_CASE("roundtrip through both directions") {
    std::mt19937_64 rng(10);
    const GmpWindow w = perturbed_periodic(rng, -45, 45, 0.1);
    const JacobiWindow j = gmp_to_jacobi_measure(w);
    const GmpFromJacobi r = jacobi_to_gmp(j, fx::two_band_delta(), {0.0});
    double worst = 0.0;
    for (int b = -4; b <= 4; ++b) worst = std::max(worst, gmp::block_distance_mod_sign(r.window.at(b), w.at(b)));
    CHECK(worst < 1e-7);
    const JacobiWindow back = gmp_to_jacobi_measure(r.window);
    double wj = 0.0;
    for (int n = -2; n <= 2; ++n) {
        wj = std::max(wj, std::abs(back.a_at(n) - j.a_at(n)));
        wj = std::max(wj, std::abs(back.b_at(n) - j.b_at(n)));
    }
    CHECK(wj < 1e-6);
}

TEST_CASE("roundtrip with two gaps") {
    const fg::DeltaData d = fg::delta_from_gaps({-2.0, 2.1, {{-1.2, -0.5}, {0.7, 1.3}}});
    const iso::IsPoint pt = iso::solve_is_point(d, d.cs(), {{0.6, 0.4, 1.0 / d.lambda0}, {0.1, -0.2, 0.0}});
    std::mt19937_64 rng(12);
    // the poles sit close to the band edges, so decay is slow and the window is wide
    GmpWindow w = gmp::periodic_window(pt.blk, pt.C, -120, 120);
    for (auto& b : w.blocks)
        for (int m = 0; m < 2; ++m) b.q[m] += fx::uniform(rng, -0.05, 0.05);
    const JacobiWindow j = gmp_to_jacobi_measure(w);
    const GmpFromJacobi r = jacobi_to_gmp(j, d, pt.C);
    CHECK(r.class_residual < 1e-8);
    double worst = 0.0;
    for (int b = -3; b <= 3; ++b) worst = std::max(worst, gmp::block_distance_mod_sign(r.window.at(b), w.at(b)));
    CHECK(worst < 1e-7);
    // the reversed ordering gives a different matrix with the same Jacobi image
    const GmpFromJacobi rr = jacobi_to_gmp(j, d, {pt.C[1], pt.C[0]});
    CHECK(rr.class_residual < 1e-8);
    const JacobiWindow back = gmp_to_jacobi_measure(rr.window);
    double wj = 0.0;
    for (int n = -3; n <= 3; ++n) wj = std::max({wj, std::abs(back.a_at(n) - j.a_at(n)), std::abs(back.b_at(n) - j.b_at(n))});
    CHECK(wj < 1e-6);
}
