#include <cmath>
#include <cstring>
#include <string>

#include "doctest.h"
#include "gmpflow.h"

namespace {

const char* kGapset = R"({"b0": -2.0, "a0": 2.0, "gaps": [[-1.0, 1.0]]})";
const char* kP1 = R"({"g": 1, "C": [0.0], "j_min": 0, "blocks": [{"p": [1.4142135623730951, 0.5], "q": [0.0, 0.0]}]})";

std::string take(char* s) {
    std::string r = s;
    gmpf_string_free(s);
    return r;
}

std::string period2_json(int lo, int hi) {
    std::string a, b;
    for (int n = lo; n <= hi; ++n) {
        a += std::string(n == lo ? "" : ",") + (n % 2 == 0 ? "1.5" : "0.5");
        b += std::string(n == lo ? "" : ",") + "0";
    }
    return "{\"n_min\": " + std::to_string(lo) + ", \"a\": [" + a + "], \"b\": [" + b + "]}";
}

}  // namespace

TEST_CASE("options defaults and version") {
    gmpf_options o;
    gmpf_options_default(&o);
    CHECK(o.steps == 10);
    CHECK(o.width == 30);
    CHECK(o.margin == 8);
    CHECK(o.order == nullptr);
    CHECK(std::strlen(gmpf_version()) > 0);
}

TEST_CASE("delta from a gap set") {
    gmpf_delta* d = nullptr;
    REQUIRE(gmpf_delta_from_gapset(kGapset, &d) == GMPF_OK);
    int g = 0;
    CHECK(gmpf_delta_genus(d, &g) == GMPF_OK);
    CHECK(g == 1);
    double v = 0.0;
    CHECK(gmpf_delta_eval(d, 1.0, &v) == GMPF_OK);
    CHECK(v == doctest::Approx(-2.0));
    CHECK(gmpf_delta_eval(d, 0.0, &v) == GMPF_ERR_NUMERICAL);
    char* s = nullptr;
    REQUIRE(gmpf_delta_to_json(d, &s) == GMPF_OK);
    gmpf_delta* back = nullptr;
    CHECK(gmpf_delta_parse(take(s).c_str(), &back) == GMPF_OK);
    CHECK(gmpf_delta_summary(back, &s) == GMPF_OK);
    CHECK(take(s).find("\"hull\"") != std::string::npos);
    gmpf_delta_free(back);
    gmpf_delta_free(d);
}

TEST_CASE("errors carry codes and messages") {
    gmpf_delta* d = nullptr;
    CHECK(gmpf_delta_from_gapset("{\"b0\": -2,\n \"a0\": }", &d) == GMPF_ERR_VALIDATION);
    CHECK(std::string(gmpf_last_error()).find("gapset:2:") == 0);
    CHECK(gmpf_delta_from_gapset(R"({"b0": -2, "a0": 2})", &d) == GMPF_ERR_VALIDATION);
    CHECK(std::string(gmpf_last_error()).find("gaps") != std::string::npos);
    CHECK(gmpf_delta_from_gapset(R"({"b0": -2, "a0": 2, "gaps": [[-1, 0], [-0.5, 1]]})", &d) == GMPF_ERR_VALIDATION);
    CHECK(std::string(gmpf_last_error()).find("overlap") != std::string::npos);
    CHECK(gmpf_delta_from_gapset(nullptr, &d) == GMPF_ERR_VALIDATION);
    CHECK(d == nullptr);
    gmpf_window* w = nullptr;
    CHECK(gmpf_window_parse(R"({"g": 1, "C": [0], "j_min": 0, "blocks": [{"p": [1, 0], "q": [0, 0]}]})", 5, &w) ==
          GMPF_ERR_VALIDATION);
    gmpf_delta_free(nullptr);
    gmpf_window_free(nullptr);
    gmpf_jacobi_free(nullptr);
}

TEST_CASE("flow CSV of the periodic point") {
    gmpf_window* w = nullptr;
    REQUIRE(gmpf_window_parse(kP1, 20, &w) == GMPF_OK);
    int g = 0, lo = 0, hi = 0, valid = 0;
    CHECK(gmpf_window_range(w, &g, &lo, &hi) == GMPF_OK);
    CHECK(lo == -20);
    CHECK(hi == 20);
    CHECK(gmpf_window_validate(w, &valid, nullptr) == GMPF_OK);
    CHECK(valid == 1);
    gmpf_options o;
    gmpf_options_default(&o);
    o.steps = 4;
    char* csv = nullptr;
    REQUIRE(gmpf_flow_csv(w, &o, &csv) == GMPF_OK);
    const std::string s = take(csv);
    CHECK(s.rfind("# command=flow seed=", 0) == 0);
    CHECK(s.find("n,a,b,b_ods,Lambda_1,validity_min,valid,dist_eta\n") != std::string::npos);
    CHECK(s.find("\n1,0.5,") != std::string::npos);
    o.eta = 1.5;
    CHECK(gmpf_flow_csv(w, &o, &csv) == GMPF_ERR_VALIDATION);
    gmpf_window_free(w);
}

TEST_CASE("ks CSV has finite functional values") {
    gmpf_window* w = nullptr;
    gmpf_delta* d = nullptr;
    REQUIRE(gmpf_window_parse(kP1, 30, &w) == GMPF_OK);
    REQUIRE(gmpf_delta_from_gapset(kGapset, &d) == GMPF_OK);
    gmpf_options o;
    gmpf_options_default(&o);
    o.steps = 3;
    char* csv = nullptr;
    REQUIRE(gmpf_ks_csv(w, d, &o, &csv) == GMPF_OK);
    const std::string s = take(csv);
    CHECK(s.find("nan") == std::string::npos);
    CHECK(s.find("# diverging=0") != std::string::npos);
    gmpf_window_free(w);
    gmpf_delta_free(d);
}

TEST_CASE("iso_solve, jacobi_to_gmp and gmp_to_jacobi") {
    gmpf_delta* d = nullptr;
    REQUIRE(gmpf_delta_from_gapset(kGapset, &d) == GMPF_OK);
    char* pt = nullptr;
    REQUIRE(gmpf_iso_solve(d, R"({"p": [1.3, 0.5], "q": [0.1, 0.0]})", nullptr, &pt) == GMPF_OK);
    const std::string point = take(pt);
    CHECK(point.find("\"residual_max\"") != std::string::npos);
    gmpf_window* w = nullptr;
    REQUIRE(gmpf_window_parse(point.c_str(), 25, &w) == GMPF_OK);
    gmpf_jacobi* j = nullptr;
    REQUIRE(gmpf_gmp_to_jacobi(w, &j) == GMPF_OK);
    double a = 0.0, b = 0.0;
    CHECK(gmpf_jacobi_coeff(j, 0, &a, &b) == GMPF_OK);
    CHECK(a > 0.0);
    CHECK(gmpf_jacobi_coeff(j, 10000, &a, &b) == GMPF_ERR_VALIDATION);
    gmpf_jacobi_free(j);
    gmpf_window_free(w);

    gmpf_jacobi* p2 = nullptr;
    REQUIRE(gmpf_jacobi_parse(period2_json(-41, 40).c_str(), &p2) == GMPF_OK);
    gmpf_options o;
    gmpf_options_default(&o);
    o.blocks = 4;
    gmpf_window* back = nullptr;
    REQUIRE(gmpf_jacobi_to_gmp(p2, d, &o, &back) == GMPF_OK);
    int lo = 0, hi = 0;
    CHECK(gmpf_window_range(back, nullptr, &lo, &hi) == GMPF_OK);
    CHECK(lo == -3);
    CHECK(hi == 3);
    const int bad_order[] = {2};
    o.order = bad_order;
    o.order_len = 1;
    gmpf_window* none = nullptr;
    CHECK(gmpf_jacobi_to_gmp(p2, d, &o, &none) == GMPF_ERR_VALIDATION);
    gmpf_window_free(back);
    gmpf_jacobi_free(p2);
    gmpf_delta_free(d);
}

TEST_CASE("selftest reports every criterion and catches the rotation fault") {
    struct Seen {
        int count = 0;
        int failed_ids = 0;
    } seen;
    const auto cb = [](const gmpf_criterion* c, void* user) {
        auto* s = static_cast<Seen*>(user);
        ++s->count;
        if (!c->pass) s->failed_ids |= 1 << c->id;
    };
    int failures = -1;
    REQUIRE(gmpf_selftest(cb, &seen, GMPF_SELFTEST_NO_BUDGET, 20240607, &failures) == GMPF_OK);
    CHECK(seen.count == 11);
    CHECK(failures == 0);
    seen = Seen{};
    REQUIRE(gmpf_selftest(cb, &seen, GMPF_SELFTEST_INJECT_ROTATION_FAULT | GMPF_SELFTEST_NO_BUDGET, 20240607, &failures) ==
            GMPF_OK);
    CHECK(failures >= 1);
    CHECK((seen.failed_ids & (1 << 5)) != 0);
}
