#define GMPFLOW_BUILDING 1
#include "gmpflow.h"

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <sstream>
#include <string>

#include "gmpflow/acceptance.hpp"
#include "gmpflow/construct.hpp"
#include "gmpflow/finite_gap.hpp"
#include "gmpflow/flow.hpp"
#include "gmpflow/io.hpp"
#include "gmpflow/isospectral.hpp"
#include "gmpflow/ks.hpp"
#include "json.hpp"

using namespace gmpflow;

struct gmpf_delta {
    fg::DeltaData d;
};
struct gmpf_window {
    gmp::GmpWindow w;
};
struct gmpf_jacobi {
    jac::JacobiWindow j;
};

namespace {

thread_local std::string g_last_error;

// Runs f, mapping exceptions to status codes and recording the message.
template <class F>
gmpf_status guarded(F&& f) {
    try {
        f();
        g_last_error.clear();
        return GMPF_OK;
    } catch (const ValidationError& e) {
        g_last_error = e.what();
        return GMPF_ERR_VALIDATION;
    } catch (const NumericalError& e) {
        g_last_error = e.what();
        return GMPF_ERR_NUMERICAL;
    } catch (const std::exception& e) {
        g_last_error = std::string("internal error: ") + e.what();
        return GMPF_ERR_INTERNAL;
    } catch (...) {
        g_last_error = "internal error: unknown exception";
        return GMPF_ERR_INTERNAL;
    }
}

void need(const void* p, const char* what) {
    if (p == nullptr) throw ValidationError(std::string("null argument: ") + what);
}

char* dup(const std::string& s) {
    char* r = static_cast<char*>(std::malloc(s.size() + 1));
    if (r == nullptr) throw std::bad_alloc();
    std::memcpy(r, s.c_str(), s.size() + 1);
    return r;
}

gmpf_options resolve(const gmpf_options* opt) {
    gmpf_options o;
    gmpf_options_default(&o);
    if (opt != nullptr) o = *opt;
    if (o.steps < 1) throw ValidationError("options: steps must be positive");
    if (o.width < 1) throw ValidationError("options: width must be positive");
    if (o.margin < 2) throw ValidationError("options: margin must be at least 2");
    if (o.blocks < 2) throw ValidationError("options: blocks must be at least 2");
    if (!(o.eta > 0.0 && o.eta < 1.0)) throw ValidationError("options: eta must lie in (0,1)");
    if (!(o.tol > 0.0)) throw ValidationError("options: tol must be positive");
    return o;
}

nk::Vec ordering(const fg::DeltaData& d, const gmpf_options& o) {
    if (o.order == nullptr || o.order_len == 0) return d.cs();
    return fg::apply_ordering(d, std::vector<int>(o.order, o.order + o.order_len));
}

std::string num(double x) { return std::isfinite(x) ? io::format_double(x) : std::string("nan"); }

std::string header(const char* command, const gmpf_options& o) {
    std::ostringstream s;
    s << "# command=" << command << " seed=" << o.seed << " steps=" << o.steps << " width=" << o.width
      << " margin=" << o.margin << " eta=" << num(o.eta) << " version=" << gmpf_version() << "\n";
    return s.str();
}

}  // namespace

extern "C" {

void gmpf_options_default(gmpf_options* opt) {
    if (opt == nullptr) return;
    opt->steps = 10;
    opt->width = 30;
    opt->margin = 8;
    opt->blocks = 6;
    opt->eta = 0.5;
    opt->tol = 1e-10;
    opt->seed = 20240607;
    opt->order = nullptr;
    opt->order_len = 0;
}

const char* gmpf_version(void) { return "1.0.0"; }

const char* gmpf_last_error(void) { return g_last_error.c_str(); }

void gmpf_string_free(char* s) { std::free(s); }

gmpf_status gmpf_delta_from_gapset(const char* json, gmpf_delta** out) {
    return guarded([&] {
        need(json, "json");
        need(out, "out");
        *out = new gmpf_delta{fg::delta_from_gaps(io::gapset_from_json(json))};
    });
}

gmpf_status gmpf_delta_parse(const char* json, gmpf_delta** out) {
    return guarded([&] {
        need(json, "json");
        need(out, "out");
        *out = new gmpf_delta{io::delta_from_json(json)};
    });
}

gmpf_status gmpf_delta_to_json(const gmpf_delta* d, char** out) {
    return guarded([&] {
        need(d, "delta");
        need(out, "out");
        *out = dup(io::to_json(d->d));
    });
}

gmpf_status gmpf_delta_genus(const gmpf_delta* d, int* g) {
    return guarded([&] {
        need(d, "delta");
        need(g, "g");
        *g = d->d.g();
    });
}

gmpf_status gmpf_delta_eval(const gmpf_delta* d, double z, double* value) {
    return guarded([&] {
        need(d, "delta");
        need(value, "value");
        *value = fg::eval_delta(d->d, z);
    });
}

gmpf_status gmpf_delta_summary(const gmpf_delta* d, char** out) {
    return guarded([&] {
        need(d, "delta");
        need(out, "out");
        const auto hull = fg::delta_hull(d->d);
        nlohmann::ordered_json j;
        j["delta"] = nlohmann::ordered_json::parse(io::to_json(d->d));
        j["g"] = d->d.g();
        j["poles"] = d->d.cs();
        j["hull"] = {hull.first, hull.second};
        j["preimages_minus2"] = fg::delta_inverse_points(d->d, -2.0);
        j["preimages_plus2"] = fg::delta_inverse_points(d->d, 2.0);
        *out = dup(j.dump(2));
    });
}

void gmpf_delta_free(gmpf_delta* d) { delete d; }

gmpf_status gmpf_window_parse(const char* json, int width, gmpf_window** out) {
    return guarded([&] {
        need(json, "json");
        need(out, "out");
        *out = new gmpf_window{io::window_or_point_from_json(json, width)};
    });
}

gmpf_status gmpf_window_to_json(const gmpf_window* w, char** out) {
    return guarded([&] {
        need(w, "window");
        need(out, "out");
        *out = dup(io::to_json(w->w));
    });
}

gmpf_status gmpf_window_range(const gmpf_window* w, int* g, int* j_min, int* j_max) {
    return guarded([&] {
        need(w, "window");
        if (g) *g = w->w.g;
        if (j_min) *j_min = w->w.j_min;
        if (j_max) *j_max = w->w.j_max();
    });
}

gmpf_status gmpf_window_validate(const gmpf_window* w, int* valid, char** message) {
    return guarded([&] {
        need(w, "window");
        need(valid, "valid");
        const gmp::ValidityReport r = gmp::validate_gmp(w->w);
        *valid = r.valid ? 1 : 0;
        if (message) *message = dup(r.message);
    });
}

void gmpf_window_free(gmpf_window* w) { delete w; }

gmpf_status gmpf_jacobi_parse(const char* json, gmpf_jacobi** out) {
    return guarded([&] {
        need(json, "json");
        need(out, "out");
        *out = new gmpf_jacobi{io::jacobi_from_json(json)};
    });
}

gmpf_status gmpf_jacobi_to_json(const gmpf_jacobi* j, char** out) {
    return guarded([&] {
        need(j, "jacobi");
        need(out, "out");
        *out = dup(io::to_json(j->j));
    });
}

gmpf_status gmpf_jacobi_coeff(const gmpf_jacobi* j, int n, double* a, double* b) {
    return guarded([&] {
        need(j, "jacobi");
        if (!j->j.has(n)) throw ValidationError("jacobi: index " + std::to_string(n) + " outside the window");
        if (a) *a = j->j.a_at(n);
        if (b) *b = j->j.b_at(n);
    });
}

void gmpf_jacobi_free(gmpf_jacobi* j) { delete j; }

gmpf_status gmpf_flow_csv(const gmpf_window* w, const gmpf_options* opt, char** csv) {
    return guarded([&] {
        need(w, "window");
        need(csv, "csv");
        const gmpf_options o = resolve(opt);
        const flow::FlowTrajectory t = flow::flow_run(w->w, o.steps);
        const jac::JacobiWindow jf = flow::extract_jacobi(t);
        const int g = w->w.g;
        std::string s = header("flow", o) + "n,a,b,b_ods";
        for (int k = 1; k <= g; ++k) s += ",Lambda_" + std::to_string(k);
        s += ",validity_min,valid,dist_eta\n";
        for (int n = 0; n < static_cast<int>(t.a_out.size()); ++n) {
            const auto at = [](const nk::Vec& v, int i) { return i < static_cast<int>(v.size()) ? v[i] : NAN; };
            s += std::to_string(n) + "," + num(t.a_out[n]) + "," + num(at(t.b_out, n)) + "," + num(at(t.b_ods, n));
            for (int k = 0; k < g; ++k) s += "," + num(t.diag.at(n).lambda.at(k));
            const double dist = n < jf.size() ? jac::shifted_dist(jf, jf, n, o.eta) : NAN;
            s += "," + num(t.diag[n].validity_min) + "," + (t.diag[n].valid ? "1" : "0") + "," + num(dist) + "\n";
        }
        *csv = dup(s);
    });
}

gmpf_status gmpf_ks_csv(const gmpf_window* w, const gmpf_delta* d, const gmpf_options* opt, char** csv) {
    return guarded([&] {
        need(w, "window");
        need(d, "delta");
        need(csv, "csv");
        const gmpf_options o = resolve(opt);
        const flow::FlowTrajectory t = flow::flow_run(w->w, o.steps);
        const ks::KsDiagnostics diag = ks::ks_diagnostics(t, d->d);
        std::string s = header("ks", o) + "n,h0,H_0_3,deltaJ_H,identity_residual";
        for (const ks::Sequence& q : diag.seq) s += "," + q.name + "," + q.name + "_sumsq";
        s += "\n";
        // the functional needs trusted blocks around 0..3 and one more flow step
        const auto safe = [](auto&& f) {
            try {
                return f();
            } catch (const Error&) {
                return static_cast<double>(NAN);
            }
        };
        for (int n = 0; n < static_cast<int>(t.states.size()); ++n) {
            const gmp::GmpWindow& st = t.states[n];
            const double h0 = safe([&] { return ks::h_at(ks::delta_of_gmp(st, d->d, o.margin), 0); });
            const double h4 = safe([&] { return ks::H_plus_partial(ks::delta_of_gmp(st, d->d, o.margin), 0, 3); });
            const double dj = safe([&] { return ks::delta_J_H(st, d->d, o.margin); });
            const double id = safe([&] { return ks::flow_functional_identity(st, d->d, 4, o.margin).residual; });
            s += std::to_string(n) + "," + num(h0) + "," + num(h4) + "," + num(dj) + "," + num(id);
            for (const ks::Sequence& q : diag.seq) s += "," + num(q.values.at(n)) + "," + num(q.partial.at(n));
            s += "\n";
        }
        s += std::string("# diverging=") + (diag.any_diverging ? "1" : "0") + "\n";
        *csv = dup(s);
    });
}

gmpf_status gmpf_iso_solve(const gmpf_delta* d, const char* seed_block_json, const gmpf_options* opt, char** point_json) {
    return guarded([&] {
        need(d, "delta");
        need(seed_block_json, "seed_block_json");
        need(point_json, "point_json");
        const gmpf_options o = resolve(opt);
        const gmp::GmpBlock seed = io::block_from_json(seed_block_json, "seed");
        if (seed.g() != d->d.g()) throw ValidationError("seed: block genus differs from Delta");
        iso::SolveOptions so;
        so.tol = o.tol;
        const iso::IsPoint pt = iso::solve_is_point(d->d, ordering(d->d, o), seed, so);
        *point_json = dup(io::to_json(pt));
    });
}

gmpf_status gmpf_jacobi_to_gmp(const gmpf_jacobi* j, const gmpf_delta* d, const gmpf_options* opt, gmpf_window** out) {
    return guarded([&] {
        need(j, "jacobi");
        need(d, "delta");
        need(out, "out");
        const gmpf_options o = resolve(opt);
        construct::JacobiToGmpOptions co;
        co.blocks = o.blocks;
        const construct::GmpFromJacobi r = construct::jacobi_to_gmp(j->j, d->d, ordering(d->d, o), co);
        *out = new gmpf_window{r.window};
    });
}

gmpf_status gmpf_gmp_to_jacobi(const gmpf_window* w, gmpf_jacobi** out) {
    return guarded([&] {
        need(w, "window");
        need(out, "out");
        *out = new gmpf_jacobi{construct::gmp_to_jacobi_measure(w->w)};
    });
}

gmpf_status gmpf_selftest(gmpf_criterion_cb cb, void* user, unsigned flags, uint64_t seed, int* failures) {
    return guarded([&] {
        acceptance::Options o;
        o.seed = seed;
        o.inject_rotation_fault = (flags & GMPF_SELFTEST_INJECT_ROTATION_FAULT) != 0;
        o.enforce_budget = (flags & GMPF_SELFTEST_NO_BUDGET) == 0;
        int failed = 0;
        acceptance::run_all(o, [&](const acceptance::Criterion& c) {
            if (!c.pass) ++failed;
            if (cb == nullptr) return;
            const std::string line = acceptance::format_line(c);
            const gmpf_criterion gc{c.id, c.name.c_str(), c.pass ? 1 : 0, c.value, c.tolerance, c.seconds, c.budget,
                                    c.detail.c_str(), line.c_str()};
            cb(&gc, user);
        });
        if (failures) *failures = failed;
    });
}

}  // extern "C"
