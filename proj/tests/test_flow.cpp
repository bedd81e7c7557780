#include <cmath>
#include <random>

#include "doctest.h"
#include "fixtures.hpp"
#include "gmpflow/flow.hpp"

using namespace gmpflow;
using namespace gmpflow::flow;

namespace {

GmpWindow random_window(std::mt19937_64& rng, int g, int j_min, int j_max) {
    GmpWindow w;
    w.g = g;
    double x = fx::uniform(rng, -2.5, -1.5);
    for (int k = 0; k < g; ++k) {
        w.C.push_back(x);
        x += fx::uniform(rng, 0.5, 1.2);
    }
    w.j_min = j_min;
    for (int j = j_min; j <= j_max; ++j) {
        GmpBlock b{Vec(g + 1), Vec(g + 1)};
        for (int m = 0; m <= g; ++m) {
            b.p[m] = fx::uniform(rng, -1.0, 1.0);
            b.q[m] = fx::uniform(rng, -1.0, 1.0);
        }
        b.p[g] = fx::uniform(rng, 0.3, 1.2);
        w.blocks.push_back(b);
    }
    return w;
}

// small perturbation of the periodic point keeps the window valid
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

TEST_CASE("rotation_o") {
    CHECK(max_abs_diff(rotation_o(0.0), Matrix2{0, 1, 1, 0}) < 1e-16);
    CHECK(max_abs_diff(rotation_o(M_PI / 2), Matrix2{1, 0, 0, -1}) < 1e-15);
    std::mt19937_64 rng(1);
    for (int t = 0; t < 100; ++t) {
        const Matrix2 o = rotation_o(fx::uniform(rng, -4, 4));
        CHECK(max_abs_diff(o * o, Matrix2::identity()) < 1e-15);
        CHECK(o.det() == doctest::Approx(-1.0));
        CHECK(o.m12 == o.m21);
    }
}

TEST_CASE("u_block") {
    const Matrix e = u_block({0.0, 0.0, 1.0});
    for (int k = 1; k <= 2; ++k)
        for (int i = 0; i <= 2; ++i) CHECK(e(i, k) == (i == k - 1 ? 1.0 : 0.0));
    CHECK(e(2, 0) == 1.0);
    const Matrix s = u_block({0.0, 0.5});
    CHECK(s(0, 0) == 0.0);
    CHECK(s(0, 1) == doctest::Approx(1.0));
    CHECK(s(1, 0) == doctest::Approx(1.0));
    CHECK(s(1, 1) == 0.0);
    const Matrix u = u_block({std::sqrt(2.0), 0.5});
    CHECK(u(0, 0) == doctest::Approx(0.942809).epsilon(1e-6));
    CHECK(u(1, 0) == doctest::Approx(1.0 / 3));
    CHECK(u(0, 1) == doctest::Approx(1.0 / 3));
    CHECK(u(1, 1) == doctest::Approx(-0.942809).epsilon(1e-6));
    CHECK_THROWS_AS(u_block({1.0, 0.0}), NumericalError);
    std::mt19937_64 rng(2);
    for (int t = 0; t < 200; ++t) {
        const int g = 1 + t % 5;
        Vec p(g + 1);
        for (double& x : p) x = fx::uniform(rng, -1, 1);
        p[g] = fx::uniform(rng, 0.01, 1);
        const Matrix m = u_block(p);
        CHECK(max_abs(m.transpose() * m - Matrix::identity(g + 1)) < 1e-12);
        CHECK(nk::max_abs_diff(m.col(0), nk::scaled(p, 1.0 / nk::norm2(p))) < 1e-15);
    }
}

TEST_CASE("omega on the periodic point") {
    const GmpWindow w = fx::periodic_base_window(-3, 3);
    const double phi = omega_angle(w.at(0));
    CHECK(std::sin(phi) == doctest::Approx(2 * std::sqrt(2.0) / 3));
    CHECK(std::cos(phi) == doctest::Approx(1.0 / 3));
    const GmpWindow o = omega_step(w);
    CHECK(o.C == w.C);
    CHECK(o.j_min == -2);
    CHECK(o.j_max() == 3);
    CHECK(omega_identity_residual(w) < 1e-12);
    CHECK(gmp::validate_gmp(o).valid);
}

TEST_CASE("omega closed forms match conjugation") {
    std::mt19937_64 rng(3);
    for (int t = 0; t < 40; ++t) {
        const int g = 1 + t % 4;
        const GmpWindow w = random_window(rng, g, -3, 3);
        const GmpWindow d = omega_step(w);
        const GmpWindow c = omega_closed_form(w);
        REQUIRE(d.C == c.C);
        CHECK(c.C.front() == w.C.back());
        for (int j = d.j_min; j <= d.j_max(); ++j) {
            CHECK(gmp::block_distance(d.at(j), c.at(j)) < 1e-10);
            CHECK(c.at(j).p[g] > 0.0);
        }
        const double res = gmp::class_a_residual(gmp::assemble_dense(c), g, c.C, 0);
        CHECK(res < 1e-12);
    }
}

TEST_CASE("flow step on the periodic point: period-2 orbit") {
    const GmpWindow w = fx::periodic_base_window(-4, 4);
    const GmpWindow a1 = jacobi_flow_step(w);
    CHECK(a1.j_min == -4);
    CHECK(a1.j_max() == 3);
    for (const GmpBlock& b : a1.blocks) {
        CHECK(std::abs(b.p[0]) < 1e-15);
        CHECK(b.p[1] == doctest::Approx(0.5));
        CHECK(b.q[0] == doctest::Approx(-2 * std::sqrt(2.0)));
        CHECK(std::abs(b.q[1]) < 1e-15);
        CHECK(gmp::lambda_k(b, w.C, 1) == doctest::Approx(4.0).epsilon(1e-10));
    }
    const GmpWindow a2 = jacobi_flow_step(a1);
    for (const GmpBlock& b : a2.blocks) {
        CHECK(gmp::block_distance_mod_sign(b, fx::periodic_block()) < 1e-12);
        CHECK(b.p[0] == doctest::Approx(-std::sqrt(2.0)));
    }
    CHECK(flow_identity_residual(w) < 1e-12);
}

TEST_CASE("flow closed forms match conjugation on random windows") {
    std::mt19937_64 rng(4);
    for (int t = 0; t < 40; ++t) {
        const int g = 1 + t % 4;
        const GmpWindow w = random_window(rng, g, -3, 3);
        CHECK(flow_identity_residual(w) < 1e-9);
        const GmpWindow s = jacobi_flow_step(w);
        for (const GmpBlock& b : s.blocks) CHECK(b.p[g] > 0.0);
    }
}

TEST_CASE("flow preserves Lambda# structure and spectrum") {
    std::mt19937_64 rng(5);
    const GmpWindow w = perturbed_periodic(rng, -6, 6, 0.05);
    REQUIRE(gmp::validate_gmp(w).valid);
    const GmpWindow s = jacobi_flow_step(w);
    CHECK(gmp::validate_gmp(s).valid);
    // the step stays in the class, so the resolvent column keeps its three-block support
    const GmpWindow mid = gmp::restrict_window(s, -3, 3);
    const gmp::ResolventColumn rc = gmp::resolvent_column(mid, 1);
    CHECK(rc.support_residual < 1e-10);
}

TEST_CASE("ods_step") {
    const GmpWindow w = fx::periodic_base_window(-2, 2);
    const OdsResult r = ods_step(w.at(0), w.C, ods_input(w.at(1), w.C));
    CHECK(std::abs(r.b_out) < 1e-15);
    CHECK(gmp::block_distance(r.state, GmpBlock{{0.0, 0.5}, {-2 * std::sqrt(2.0), 0.0}}) < 1e-14);
    const GmpBlock zq{{0.3, 0.4, 0.8}, {0.0, 0.0, 0.0}};
    CHECK(std::abs(ods_step(zq, {0.0, 0.0}, {1.0, 0.0}).b_out) < 1e-15);
    std::mt19937_64 rng(6);
    for (int t = 0; t < 100; ++t) {
        const int g = 1 + t % 4;
        const GmpWindow rw = random_window(rng, g, 0, 1);
        const OdsResult o = ods_step(rw.at(0), rw.C, ods_input(rw.at(1), rw.C));
        const GmpWindow st = jacobi_flow_step(rw);
        CHECK(gmp::block_distance(o.state, st.at(0)) < 1e-12);
    }
}

TEST_CASE("flow_run on the periodic point and the extracted Jacobi matrix") {
    const GmpWindow w = fx::periodic_base_window(-2, 12);
    const FlowTrajectory t = flow_run(w, 10);
    REQUIRE(t.states.size() == 11);
    for (std::size_t n = 0; n < t.states.size(); ++n) {
        const GmpBlock& ref = n % 2 == 0 ? fx::periodic_block() : GmpBlock{{0.0, 0.5}, {-2 * std::sqrt(2.0), 0.0}};
        for (const GmpBlock& b : t.states[n].blocks) CHECK(gmp::block_distance_mod_sign(b, ref) < 1e-10);
        CHECK(t.diag[n].lambda[0] == doctest::Approx(4.0).epsilon(1e-10));
        CHECK(t.diag[n].valid);
    }
    const jac::JacobiWindow j = extract_jacobi(t);
    REQUIRE(j.size() == 10);
    for (int n = 0; n < 10; ++n) {
        CHECK(j.a[n] == doctest::Approx(n % 2 == 0 ? 1.5 : 0.5));
        CHECK(std::abs(j.b[n]) < 1e-12);
        CHECK(t.b_ods[n] == doctest::Approx(t.b_out[n]));
    }
    CHECK_THROWS_AS(flow_run(w, 12), ValidationError);
}

TEST_CASE("flow_run on perturbed the periodic point") {
    std::mt19937_64 rng(7);
    GmpWindow w = fx::periodic_base_window(-2, 14);
    w.at(0).p[0] += 0.01;
    const FlowTrajectory t = flow_run(w, 10);
    for (const StepDiagnostics& d : t.diag) {
        CHECK(std::isfinite(d.lambda[0]));
        CHECK(std::isfinite(d.validity_min));
    }
    for (std::size_t n = 0; n < t.b_out.size(); ++n) CHECK(t.b_ods[n] == doctest::Approx(t.b_out[n]).epsilon(1e-12));
}

TEST_CASE("diagram: extracted coefficients equal Lanczos coefficients of A_+") {
    std::mt19937_64 rng(8);
    for (int g = 1; g <= 3; ++g) {
        GmpWindow w = random_window(rng, g, -2, 24);
        const FlowTrajectory t = flow_run(w, 12, {1, false, 1e-8});
        const jac::JacobiWindow j = extract_jacobi(t);
        // A_+ = blocks 0..j_max; start vector p_0 / |p_0| in block 0
        const GmpWindow plus = gmp::restrict_window(w, 0, w.j_max());
        const Matrix ap = gmp::assemble_dense(plus);
        const nk::SymEigen es = nk::sym_eigen(ap);
        const Vec start = nk::scaled(w.at(0).p, 1.0 / w.at(0).norm_p());
        jac::DiscreteMeasure m;
        for (std::size_t i = 0; i < es.values.size(); ++i) {
            double c = 0.0;
            for (int k = 0; k <= g; ++k) c += es.vectors(k, i) * start[k];
            m.points.push_back(es.values[i]);
            m.weights.push_back(c * c);
        }
        double s = 0.0;
        for (double x : m.weights) s += x;
        for (double& x : m.weights) x /= s;
        const jac::JacobiWindow l = jac::lanczos_from_measure(m, 8);
        for (int n = 0; n <= 8; ++n) {
            CHECK(l.b[n] == doctest::Approx(j.b[n]).epsilon(1e-6));
            if (n > 0) CHECK(l.a[n] == doctest::Approx(j.a[n]).epsilon(1e-6));
        }
    }
}

TEST_CASE("commutation of O with the flow") {
    std::mt19937_64 rng(9);
    for (int g = 1; g <= 4; ++g) {
        const GmpWindow w = random_window(rng, g, -3, 10);
        CHECK(omega_commutation_residual(w, 5) < 1e-9);
    }
    const GmpWindow p = fx::periodic_base_window(-2, 8);
    CHECK(omega_commutation_residual(p, 4) < 1e-12);
}
