#include "gmpflow/ks.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace gmpflow::ks {

namespace {

Matrix sub_block(const DeltaBlocks& db, int bj_row, int bj_col) {
    const int s = db.g + 1;
    Matrix m(s, s);
    for (int a = 0; a < s; ++a)
        for (int b = 0; b < s; ++b) m(a, b) = db.at(bj_row * s + a, bj_col * s + b);
    return m;
}

void require_trusted(const DeltaBlocks& db, int lo, int hi, const char* what) {
    for (int j = lo; j <= hi; ++j)
        if (!db.trusted(j))
            throw ValidationError(std::string(what) + ": block " + std::to_string(j) + " outside the trusted range [" +
                                  std::to_string(db.trusted_lo) + ", " + std::to_string(db.trusted_hi) + "]");
}

double log_det_lower(const Matrix& v) {
    double s = 0.0;
    for (std::size_t i = 0; i < v.rows(); ++i) {
        if (!(v(i, i) > 0.0)) throw NumericalError("h_term: nonpositive determinant");
        s += std::log(v(i, i));
    }
    return s;
}

}  // namespace

double DeltaBlocks::at(int r, int c) const {
    const int i = r - first_scalar, k = c - first_scalar;
    if (i < 0 || k < 0 || i >= static_cast<int>(delta.rows()) || k >= static_cast<int>(delta.cols()))
        throw ValidationError("DeltaBlocks: scalar index outside the evaluated range");
    return sign[i] * delta(i, k) * sign[k];
}

Matrix DeltaBlocks::v(int j) const {
    require_trusted(*this, j - 1, j, "DeltaBlocks::v");
    return sub_block(*this, j - 1, j);
}

Matrix DeltaBlocks::w(int j) const {
    require_trusted(*this, j, j, "DeltaBlocks::w");
    return sub_block(*this, j, j);
}

double DeltaBlocks::col_norm2(int n) const {
    const int s = g + 1;
    const int j = n >= 0 ? n / s : -((-n - 1) / s) - 1;
    require_trusted(*this, j - 1, j + 1, "DeltaBlocks::col_norm2");
    double t = 0.0;
    for (int r = n - s; r <= n + s; ++r) {
        const double x = at(r, n);
        t += x * x;
    }
    return t;
}

namespace {
constexpr double kEdgeStateBound = 1e8;
}  // namespace

DeltaBlocks delta_of_gmp(const GmpWindow& w, const DeltaData& d, int margin) {
    w.validate();
    if (d.g() != w.g) throw ValidationError("delta_of_gmp: Delta and window disagree on g");
    if (margin < 2) throw ValidationError("delta_of_gmp: margin must be at least 2");
    if (w.size() < 2 * margin + 1) throw ValidationError("delta_of_gmp: window too small for the margin");
    const int g = w.g, s = g + 1;
    DeltaBlocks db;
    db.g = g;
    db.j_min = w.j_min;
    db.j_max = w.j_max();
    db.trusted_lo = w.j_min + margin;
    db.trusted_hi = w.j_max() - margin;
    db.first_scalar = w.j_min * s + g;
    const int n = w.dim() - s;
    const Matrix full = gmp::assemble_dense(w).block(g, g, n, n);
    // A truncation can carry an edge state at some c_k. It then shows up as a singular or very
    // large inverse; shortening the truncation by a few scalars at the ends moves it away.
    const auto attempt = [&](int lo, int hi, Matrix& out) {
        const int m = n - lo - hi;
        const Matrix a = full.block(lo, lo, m, m);
        Matrix delta = a * d.lambda0;
        for (int i = 0; i < m; ++i) delta(i, i) += d.c0;
        for (int k = 0; k < g; ++k) {
            Matrix ck = a * -1.0;
            for (int i = 0; i < m; ++i) ck(i, i) += w.C[k];
            Matrix inv;
            try {
                inv = nk::inverse(ck);
            } catch (const nk::SingularMatrixError&) {
                return false;
            }
            if (!(nk::max_abs(inv) < kEdgeStateBound)) return false;
            delta += inv * fg::residue_at(d, w.C[k]);
        }
        out = Matrix(n, n);
        for (int r = 0; r < m; ++r)
            for (int c = 0; c < m; ++c) out(lo + r, lo + c) = delta(r, c);
        return true;
    };
    Matrix delta;
    bool ok = false;
    for (int drop = 0; drop <= 2 * g && !ok; ++drop)
        for (int lo = 0; lo <= std::min(drop, g) && !ok; ++lo)
            if (drop - lo <= g) ok = attempt(lo, drop - lo, delta);
    if (!ok) throw NumericalError("delta_of_gmp: c - A is singular on every truncation of the window");
    db.delta = delta;
    db.sign.assign(n, 1.0);
    // positive diagonals of v_j, recursively from the bottom of the trusted range
    for (int j = db.trusted_lo; j <= db.trusted_hi; ++j)
        for (int a2 = 0; a2 < s; ++a2) {
            const int r = (j - 1) * s + a2 - db.first_scalar, c = j * s + a2 - db.first_scalar;
            if (r < 0) continue;
            const double x = db.sign[r] * delta(r, c);
            db.sign[c] = x < 0.0 ? -1.0 : 1.0;
        }
    for (int j = db.trusted_lo; j <= db.trusted_hi; ++j)
        for (int a2 = 0; a2 < s; ++a2) {
            const int r = j * s + a2 - db.first_scalar;
            for (int c = 0; c < n; ++c)
                if (std::abs(r - c) > s) db.band_leak = std::max(db.band_leak, std::abs(delta(r, c)));
        }
    return db;
}

double h_term(const Matrix& v0, const Matrix& w0, const Matrix& v1) {
    const int s = static_cast<int>(v0.rows());
    double tr = 0.0;
    for (int i = 0; i < s; ++i)
        for (int k = 0; k < s; ++k) tr += v0(i, k) * v0(i, k) + w0(i, k) * w0(i, k) + v1(i, k) * v1(i, k);
    return 0.5 * tr - s - log_det_lower(v0) - log_det_lower(v1);
}

double h_at(const DeltaBlocks& db, int j) { return h_term(db.v(j), db.w(j), db.v(j + 1)); }

double H_plus_partial(const DeltaBlocks& db, int j0, int j1) {
    double s = 0.0;
    for (int j = j0; j <= j1; ++j) s += h_at(db, j);
    return s;
}

double d_term(const DeltaBlocks& db, int m) {
    const int g = db.g;
    const double a = db.v(m - 1)(g, g), b = db.v(m)(g, g);
    if (!(a > 0.0) || !(b > 0.0)) throw NumericalError("d_term: vanishing v diagonal");
    return 0.5 * db.col_norm2(m * (g + 1) - 1) - 1.0 - std::log(a * b);
}

double delta_J_H(const GmpWindow& w, const DeltaData& d, int margin) {
    return d_term(delta_of_gmp(flow::jacobi_flow_step(w), d, margin), 0);
}

FlowIdentityReport flow_functional_identity(const GmpWindow& w, const DeltaData& d, int n_blocks, int margin) {
    FlowIdentityReport r;
    r.n_blocks = n_blocks;
    const DeltaBlocks da = delta_of_gmp(w, d, margin);
    const DeltaBlocks dj = delta_of_gmp(flow::jacobi_flow_step(w), d, margin);
    r.H_A = H_plus_partial(da, 0, n_blocks - 1);
    r.H_JA = H_plus_partial(dj, 0, n_blocks - 1);
    r.d0 = d_term(dj, 0);
    r.dN = d_term(dj, n_blocks);
    r.residual = std::abs(r.H_A - (r.H_JA + r.d0 - r.dN));
    return r;
}

int telescoping_required_top(int n, int margin) { return n + margin + 2; }

TelescopingReport telescoping_check(const GmpWindow& w, const DeltaData& d, int n, int margin) {
    if (w.j_max() < telescoping_required_top(n, margin) || w.j_min > -2 - margin)
        throw ValidationError("telescoping_check: window too narrow; need blocks " + std::to_string(-2 - margin) +
                              ".." + std::to_string(telescoping_required_top(n, margin)));
    TelescopingReport r;
    r.n = n;
    GmpWindow a = w, a1 = gmp::block_shift(w);
    const int g = w.g;
    double sum_a = 0.0, sum_a1 = 0.0;
    const DeltaBlocks d0 = delta_of_gmp(a, d, margin);
    r.h0.push_back(h_at(d0, 0));
    double log_lhs = 0.0, log_rhs = 0.0;
    for (int i = 0; i <= g; ++i) log_lhs += std::log(d0.v(0)(i, i));
    for (int m = 1; m <= n; ++m) {
        a = flow::jacobi_flow_step(a);
        a1 = flow::jacobi_flow_step(a1);
        const DeltaBlocks da = delta_of_gmp(a, d, margin);
        const DeltaBlocks da1 = delta_of_gmp(a1, d, margin);
        sum_a += d_term(da, 0);
        sum_a1 += d_term(da1, 0);
        r.tilde_H_A.push_back(sum_a);
        r.tilde_H_A1.push_back(sum_a1);
        r.h0.push_back(h_at(da, 0));
        log_lhs += std::log(da.v(0)(g, g));
        log_rhs += std::log(da.v(-1)(g, g));
        if (m == n)
            for (int i = 0; i <= g; ++i) log_rhs += std::log(da.v(0)(i, i));
    }
    if (n == 0)
        for (int i = 0; i <= g; ++i) log_rhs += std::log(d0.v(0)(i, i));
    r.lhs = sum_a + r.h0.back();
    r.rhs = r.h0.front() + sum_a1;
    r.residual = std::abs(r.lhs - r.rhs);
    r.det_lhs = std::exp(log_lhs);
    r.det_rhs = std::exp(log_rhs);
    r.det_residual = std::abs(std::expm1(log_lhs - log_rhs));
    return r;
}

bool diverging_trend(const Vec& partial) {
    const int n = static_cast<int>(partial.size());
    if (n < 4) return false;
    const int h = n / 2;
    const double inc1 = (partial[h - 1] - partial[0]) / std::max(1, h - 1);
    const double inc2 = (partial[n - 1] - partial[h - 1]) / (n - h);
    return inc2 > 1e-10 && inc2 >= 0.5 * inc1;
}

KsDiagnostics ks_diagnostics(const flow::FlowTrajectory& t, const DeltaData& d) {
    KsDiagnostics r;
    if (t.states.empty()) return r;
    const int g = t.states.front().g;
    const auto add = [&](const std::string& name) {
        r.seq.push_back({name, {}, {}, false});
        return r.seq.size() - 1;
    };
    std::vector<std::size_t> id;
    for (int side : {1, -1})
        for (int j = 0; j < g; ++j) {
            const std::string sd = side > 0 ? "+1" : "-1";
            id.push_back(add("dp[" + sd + "][" + std::to_string(j) + "]"));
            id.push_back(add("dq[" + sd + "][" + std::to_string(j) + "]"));
        }
    const std::size_t i_pg = add("pg_norm"), i_pq = add("pq_trace");
    std::vector<std::size_t> i_lam;
    for (int k = 1; k <= g; ++k) i_lam.push_back(add("lambda_" + std::to_string(k)));
    for (const GmpWindow& st : t.states) {
        const gmp::GmpBlock b0 = gmp::canonical_sign(st.at(0));
        std::size_t c = 0;
        for (int side : {1, -1}) {
            const gmp::GmpBlock bs = gmp::canonical_sign(st.at(side));
            for (int j = 0; j < g; ++j) {
                r.seq[id[c++]].values.push_back(bs.p[j] - b0.p[j]);
                r.seq[id[c++]].values.push_back(bs.q[j] - b0.q[j]);
            }
        }
        const gmp::GmpBlock& raw = st.at(0);
        r.seq[i_pg].values.push_back(d.lambda0 * raw.p[g] - 1.0);
        r.seq[i_pq].values.push_back(d.lambda0 * nk::dot(raw.p, raw.q) + d.c0);
        for (int k = 1; k <= g; ++k)
            r.seq[i_lam[k - 1]].values.push_back(gmp::lambda_k(raw, st.C, k) - fg::residue_at(d, st.C[k - 1]));
    }
    for (Sequence& s : r.seq) {
        double acc = 0.0;
        for (double x : s.values) {
            acc += x * x;
            s.partial.push_back(acc);
        }
        s.diverging = diverging_trend(s.partial);
        r.any_diverging = r.any_diverging || s.diverging;
    }
    return r;
}

DensityReport density_identity(const Vec& c, const Vec& lam, double y) {
    const int g = static_cast<int>(c.size());
    if (g == 0 || static_cast<int>(lam.size()) != g) throw ValidationError("density_identity: c and lam must match");
    for (int k = 0; k < g; ++k) {
        if (!(lam[k] > 0.0)) throw ValidationError("density_identity: residues must be positive");
        if (k > 0 && !(c[k] > c[k - 1])) throw ValidationError("density_identity: poles must increase");
    }
    if (y == 0.0) throw ValidationError("density_identity: y = 0 has a preimage at infinity");
    const auto delta = [&](double x) {
        double s = 0.0;
        for (int k = 0; k < g; ++k) s += lam[k] / (c[k] - x);
        return s;
    };
    const auto dprime = [&](double x) {
        double s = 0.0;
        for (int k = 0; k < g; ++k) s += lam[k] / ((c[k] - x) * (c[k] - x));
        return s;
    };
    DensityReport r;
    const auto f = [&](double x) { return delta(x) - y; };
    const double span = (c.back() - c.front()) + 1.0;
    double lam_sum = 0.0;
    for (double l : lam) lam_sum += l;
    const double far = span + 2.0 * lam_sum / std::abs(y) + std::abs(c.front()) + std::abs(c.back());
    // one preimage per interval between consecutive poles, plus one outer interval
    for (int k = 0; k <= g; ++k) {
        if (y > 0.0 && k == g) continue;
        if (y < 0.0 && k == 0) continue;
        const double lo0 = k == 0 ? c.front() - far : c[k - 1];
        const double hi0 = k == g ? c.back() + far : c[k];
        double lo = lo0, hi = hi0;
        if (k > 0) {
            double step = 0.5 * (hi0 - lo0);
            for (int i = 0; i < 200 && f(lo0 + step) >= 0; ++i) step *= 0.5;
            lo = lo0 + step;
        }
        if (k < g) {
            double step = 0.5 * (hi0 - lo0);
            for (int i = 0; i < 200 && f(hi0 - step) <= 0; ++i) step *= 0.5;
            hi = hi0 - step;
        }
        try {
            r.x.push_back(nk::bisect_root(f, lo, hi));
        } catch (const nk::NoSignChangeError&) {
            throw NumericalError("density_identity: preimage bracket failure");
        }
    }
    if (static_cast<int>(r.x.size()) != g) throw NumericalError("density_identity: preimages are not simple");
    Matrix wm(g, g);
    for (int i = 0; i < g; ++i)
        for (int j = 0; j < g; ++j) wm(i, j) = 1.0 / (c[j] - r.x[i]);
    r.det_w = nk::determinant(wm);
    double num = 1.0, den = 1.0, sq = 1.0;
    for (int k = 0; k < g; ++k)
        for (int j = k + 1; j < g; ++j) {
            num *= (r.x[k] - r.x[j]) * (c[k] - c[j]);
            sq *= (r.x[k] - r.x[j]) * (r.x[k] - r.x[j]) * (c[k] - c[j]) * (c[k] - c[j]);
        }
    for (int j = 0; j < g; ++j)
        for (int k = 0; k < g; ++k) den *= (c[j] - r.x[k]);
    const double sgn = ((g * (g - 1) / 2) % 2) ? -1.0 : 1.0;
    r.det_w_cauchy = sgn * num / den;
    r.prod_dprime = 1.0;
    double lam_prod = 1.0;
    for (int k = 0; k < g; ++k) {
        r.prod_dprime *= dprime(r.x[k]);
        lam_prod *= lam[k];
    }
    r.prod_dprime_formula = sq / (den * den) * lam_prod;
    r.rel_err_det = std::abs(r.det_w - r.det_w_cauchy) / std::max(std::abs(r.det_w_cauchy), 1e-300);
    r.rel_err_prod = std::abs(r.prod_dprime - r.prod_dprime_formula) / std::max(std::abs(r.prod_dprime_formula), 1e-300);
    return r;
}

}  // namespace gmpflow::ks
