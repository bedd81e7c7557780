#include "gmpflow/flow.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <string>

namespace gmpflow::flow {

namespace {

Vec rotate_ordering(const Vec& C) {
    Vec r{C.back()};
    r.insert(r.end(), C.begin(), C.end() - 1);
    return r;
}

double max_block_diff(const GmpWindow& a, const GmpWindow& b, bool mod_sign) {
    const int lo = std::max(a.j_min, b.j_min), hi = std::min(a.j_max(), b.j_max());
    if (lo > hi) throw ValidationError("no common blocks to compare");
    double r = 0.0;
    for (int j = lo; j <= hi; ++j)
        r = std::max(r, mod_sign ? gmp::block_distance_mod_sign(a.at(j), b.at(j)) : gmp::block_distance(a.at(j), b.at(j)));
    return r;
}

}  // namespace

namespace {
std::atomic<bool> g_rotation_fault{false};
}  // namespace

namespace testing {
void set_rotation_fault(bool on) { g_rotation_fault = on; }
bool rotation_fault() { return g_rotation_fault; }
}  // namespace testing

Matrix2 rotation_o(double phi) {
    const double s = std::sin(phi), c = std::cos(phi);
    return {s, c, c, g_rotation_fault ? s : -s};
}

Matrix u_block(const Vec& p) {
    const int g = static_cast<int>(p.size()) - 1;
    Vec tail(g + 2, 0.0);  // tail[k] = |d_k p|
    for (int k = g; k >= 0; --k) tail[k] = std::hypot(tail[k + 1], p[k]);
    for (int k = 0; k <= g; ++k)
        if (!(tail[k] > 0.0)) throw NumericalError("u_block: vanishing tail norm at k=" + std::to_string(k));
    Matrix u(g + 1, g + 1);
    for (int i = 0; i <= g; ++i) u(i, 0) = p[i] / tail[0];
    for (int k = 1; k <= g; ++k) {
        const double s = 1.0 / (tail[k - 1] * tail[k]);
        u(k - 1, k) = tail[k] * tail[k] * s;
        for (int i = k; i <= g; ++i) u(i, k) = -p[k - 1] * p[i] * s;
    }
    return u;
}

double omega_angle(const GmpBlock& blk) {
    const int g = blk.g();
    const double x = blk.p[g - 1], y = blk.p[g];
    if (x == 0.0 && y == 0.0) throw NumericalError("omega: rotation angle undefined, (p_{g-1}, p_g) = 0");
    return std::atan2(x, y);  // sin = p_{g-1}/rho, cos = p_g/rho
}

GmpWindow omega_step(const GmpWindow& w) {
    w.validate();
    if (w.size() < 2) throw ValidationError("omega_step: window needs at least 2 blocks");
    const int s = w.g + 1, n = w.dim();
    Matrix o = Matrix::identity(n);
    for (int j = w.j_min; j <= w.j_max(); ++j) {
        const Matrix2 r = rotation_o(omega_angle(w.at(j)));
        const int i = (j - w.j_min) * s + w.g - 1;
        o(i, i) = r.m11;
        o(i, i + 1) = r.m12;
        o(i + 1, i) = r.m21;
        o(i + 1, i + 1) = r.m22;
    }
    const Matrix x = o.transpose() * gmp::assemble_dense(w) * o;
    // new scalar index = old + 1; one leading pad row puts row 0 on a block boundary
    Matrix y(n + 1, n + 1);
    for (int i = 0; i < n; ++i)
        for (int k = 0; k < n; ++k) y(i + 1, k + 1) = x(i, k);
    return gmp::extract_window(y, w.g, rotate_ordering(w.C), w.j_min, w.j_min + 1, w.j_max());
}

GmpWindow omega_closed_form(const GmpWindow& w) {
    w.validate();
    if (w.size() < 2) throw ValidationError("omega_closed_form: window needs at least 2 blocks");
    const int g = w.g;
    GmpWindow r;
    r.g = g;
    r.C = rotate_ordering(w.C);
    r.j_min = w.j_min + 1;
    const auto tail_pair = [&](const GmpBlock& b) {
        return Matrix2{b.q[g - 1] * b.p[g - 1] + w.C[g - 1], b.q[g - 1] * b.p[g], b.q[g - 1] * b.p[g], b.q[g] * b.p[g]};
    };
    for (int j = w.j_min + 1; j <= w.j_max(); ++j) {
        const GmpBlock& prev = w.at(j - 1);
        const GmpBlock& cur = w.at(j);
        const double fp = omega_angle(prev), fc = omega_angle(cur);
        const Matrix2 op = rotation_o(fp), oc = rotation_o(fc);
        const Matrix2 mp = op.transpose() * tail_pair(prev) * op;
        const Matrix2 mc = oc.transpose() * tail_pair(cur) * oc;
        const double rho = std::hypot(cur.p[g - 1], cur.p[g]);
        GmpBlock b{Vec(g + 1), Vec(g + 1)};
        b.p[0] = mp.m12;
        for (int m = 1; m <= g - 1; ++m) b.p[m] = cur.p[m - 1] * std::cos(fp);
        b.p[g] = rho * std::cos(fp);
        b.q[0] = -std::sin(fp) * rho / b.p[g];
        for (int m = 1; m <= g - 1; ++m) b.q[m] = cur.q[m - 1] * rho / b.p[g];
        b.q[g] = mc.m11 / b.p[g];
        r.blocks.push_back(b);
    }
    return r;
}

GmpWindow jacobi_flow_step(const GmpWindow& w) {
    w.validate();
    if (w.size() < 2) throw ValidationError("jacobi_flow_step: window needs at least 2 blocks");
    const int g = w.g;
    GmpWindow r;
    r.g = g;
    r.C = w.C;
    r.j_min = w.j_min;
    for (int j = w.j_min; j < w.j_max(); ++j) {
        const GmpBlock& cur = w.at(j);
        const GmpBlock& next = w.at(j + 1);
        const double np = cur.norm_p(), nn = next.norm_p();
        GmpBlock b{Vec(g + 1), Vec(g + 1)};
        for (int k = 0; k < g; ++k) b.q[k] = -np * cur.p[k] / (cur.tail_norm(k) * cur.tail_norm(k + 1));
        const Matrix u = u_block(cur.p);
        const Vec v = u.transpose() * (gmp::build_block_B(cur, w.C) * nk::scaled(cur.p, 1.0 / np));
        for (int k = 0; k < g; ++k) b.p[k] = v[k + 1];
        b.p[g] = nn * cur.p[g] / np;
        const Vec bn = gmp::build_block_B(next, w.C) * next.p;
        b.q[g] = np / (cur.p[g] * nn) * nk::dot(bn, next.p) / (nn * nn);
        r.blocks.push_back(b);
    }
    return r;
}

GmpWindow jacobi_flow_dense(const GmpWindow& w) {
    w.validate();
    if (w.size() < 3) throw ValidationError("jacobi_flow_dense: window needs at least 3 blocks");
    const int s = w.g + 1, n = w.dim();
    Matrix u(n, n);
    for (int j = w.j_min; j <= w.j_max(); ++j) {
        const Matrix ub = u_block(w.at(j).p);
        const int o = (j - w.j_min) * s;
        for (int i = 0; i < s; ++i)
            for (int k = 0; k < s; ++k) u(o + i, o + k) = ub(i, k);
    }
    const Matrix x = u.transpose() * gmp::assemble_dense(w) * u;
    // new scalar index = old - 1; dropping the first row puts row 0 on a block boundary
    const Matrix y = x.block(1, 1, n - 1, n - 1);
    return gmp::extract_window(y, w.g, w.C, w.j_min, w.j_min + 1, w.j_max() - 1);
}

OdsInput ods_input(const GmpBlock& next, const Vec& C) {
    const double nn = next.norm_p();
    const Vec bn = gmp::build_block_B(next, C) * next.p;
    return {nn, nk::dot(bn, next.p) / (nn * nn)};
}

OdsResult ods_step(const GmpBlock& state, const Vec& C, const OdsInput& in) {
    state.validate();
    const int g = state.g(), s = g + 1;
    Matrix m(s + 1, s + 1);
    const Matrix b = gmp::build_block_B(state, C);
    for (int i = 0; i < s; ++i)
        for (int k = 0; k < s; ++k) m(i, k) = b(i, k);
    m(g, s) = m(s, g) = in.a_in;
    m(s, s) = in.b_in;
    Matrix t = Matrix::identity(s + 1);
    const Matrix u = u_block(state.p);
    for (int i = 0; i < s; ++i)
        for (int k = 0; k < s; ++k) t(i, k) = u(i, k);
    const Matrix x = t.transpose() * m * t;
    OdsResult r;
    r.b_out = x(0, 0);
    r.state = GmpBlock{Vec(s), Vec(s)};
    for (int k = 0; k < s; ++k) r.state.p[k] = x(k + 1, 0);
    for (int k = 0; k < s; ++k) r.state.q[k] = x(g + 1, k + 1) / r.state.p[g];
    return r;
}

int required_top(int n_steps, int margin) { return n_steps + std::max(margin, 0); }

FlowTrajectory flow_run(const GmpWindow& w, int n_steps, const FlowOptions& opt) {
    w.validate();
    if (n_steps < 0) throw ValidationError("flow_run: negative step count");
    if (w.j_min > -1) throw ValidationError("flow_run: window must contain block -1");
    if (w.j_max() < required_top(n_steps, opt.margin))
        throw ValidationError("flow_run: window too narrow, need blocks up to " +
                              std::to_string(required_top(n_steps, opt.margin)) + " for " + std::to_string(n_steps) +
                              " steps");
    FlowTrajectory t;
    t.states.push_back(w);
    for (int n = 0;; ++n) {
        const GmpWindow& cur = t.states.back();
        StepDiagnostics d;
        for (int k = 1; k <= w.g; ++k) d.lambda.push_back(gmp::lambda_k(cur.at(0), cur.C, k));
        const gmp::ValidityReport v = gmp::validate_gmp(cur, opt.floor);
        d.validity_min = *std::min_element(v.min_per_k.begin(), v.min_per_k.end());
        d.valid = v.valid;
        t.diag.push_back(d);
        t.a_out.push_back(cur.at(0).norm_p());
        if (!v.valid && t.first_invalid < 0) {
            t.first_invalid = n;
            if (opt.strict) throw NumericalError("flow_run: validity lost at step " + std::to_string(n) + ": " + v.message);
        }
        if (n == n_steps) break;
        t.b_ods.push_back(ods_step(cur.at(0), cur.C, ods_input(cur.at(1), cur.C)).b_out);
        GmpWindow next = jacobi_flow_step(cur);
        const GmpBlock& bm = next.at(-1);
        t.b_out.push_back(bm.q[w.g] * bm.p[w.g]);
        t.states.push_back(std::move(next));
    }
    return t;
}

jac::JacobiWindow extract_jacobi(const FlowTrajectory& t) {
    jac::JacobiWindow j;
    j.n_min = 0;
    j.b = t.b_out;
    j.a.assign(t.a_out.begin(), t.a_out.begin() + static_cast<std::ptrdiff_t>(t.b_out.size()));
    return j;
}

double flow_identity_residual(const GmpWindow& w) {
    return max_block_diff(jacobi_flow_step(w), jacobi_flow_dense(w), false);
}

double omega_identity_residual(const GmpWindow& w) { return max_block_diff(omega_step(w), omega_closed_form(w), false); }

double omega_commutation_residual(const GmpWindow& w, int n_steps) {
    GmpWindow a = w, b = omega_closed_form(w);
    for (int n = 0; n < n_steps; ++n) {
        a = jacobi_flow_step(a);
        b = jacobi_flow_step(b);
    }
    return max_block_diff(omega_closed_form(a), b, true);
}

}  // namespace gmpflow::flow
