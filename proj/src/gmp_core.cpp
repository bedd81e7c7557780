#include "gmpflow/gmp_core.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace gmpflow::gmp {

namespace {

Matrix2 outer_j(double p1, double q1, double p2, double q2) {
    // (p1,q1)^T (p2,q2) j
    return {p1 * q2, -p1 * p2, q1 * q2, -q1 * p2};
}

}  // namespace

double GmpBlock::tail_norm(int k) const {
    double s = 0.0;
    for (int m = k; m <= g(); ++m) s += p[m] * p[m];
    return std::sqrt(s);
}

void GmpBlock::validate() const {
    if (p.empty() || p.size() != q.size()) throw ValidationError("GmpBlock: p and q must have equal length g+1");
    for (std::size_t i = 0; i < p.size(); ++i)
        if (!std::isfinite(p[i]) || !std::isfinite(q[i])) throw ValidationError("GmpBlock: non-finite entry");
    if (!(p.back() > 0.0)) throw ValidationError("GmpBlock: p_g must be positive");
}

const GmpBlock& GmpWindow::at(int j) const {
    if (!has(j)) throw ValidationError("GmpWindow: block " + std::to_string(j) + " outside window");
    return blocks[j - j_min];
}

GmpBlock& GmpWindow::at(int j) {
    if (!has(j)) throw ValidationError("GmpWindow: block " + std::to_string(j) + " outside window");
    return blocks[j - j_min];
}

void GmpWindow::validate() const {
    if (g < 1) throw ValidationError("GmpWindow: g must be at least 1");
    if (static_cast<int>(C.size()) != g) throw ValidationError("GmpWindow: C must list g poles");
    for (int i = 0; i < g; ++i)
        for (int k = i + 1; k < g; ++k)
            if (C[i] == C[k]) throw ValidationError("GmpWindow: repeated pole in C");
    if (blocks.empty()) throw ValidationError("GmpWindow: no blocks");
    for (std::size_t i = 0; i < blocks.size(); ++i) {
        if (blocks[i].g() != g)
            throw ValidationError("GmpWindow: block " + std::to_string(j_min + static_cast<int>(i)) +
                                  " has wrong length");
        try {
            blocks[i].validate();
        } catch (const ValidationError& e) {
            throw ValidationError(std::string(e.what()) + " in block " +
                                  std::to_string(j_min + static_cast<int>(i)));
        }
    }
}

GmpWindow periodic_window(const GmpBlock& blk, const Vec& C, int j_min, int j_max) {
    GmpWindow w;
    w.g = blk.g();
    w.C = C;
    w.j_min = j_min;
    w.blocks.assign(j_max - j_min + 1, blk);
    return w;
}

GmpWindow block_shift(const GmpWindow& w) {
    GmpWindow r = w;
    r.j_min = w.j_min - 1;
    return r;
}

GmpWindow restrict_window(const GmpWindow& w, int lo, int hi) {
    if (lo < w.j_min || hi > w.j_max() || lo > hi) throw ValidationError("restrict_window: range outside window");
    GmpWindow r;
    r.g = w.g;
    r.C = w.C;
    r.j_min = lo;
    r.blocks.assign(w.blocks.begin() + (lo - w.j_min), w.blocks.begin() + (hi - w.j_min + 1));
    return r;
}

GmpBlock canonical_sign(const GmpBlock& blk) {
    GmpBlock r = blk;
    for (int m = 0; m < blk.g(); ++m) {
        const bool flip = std::abs(r.p[m]) > 1e-9 ? r.p[m] < 0 : r.q[m] < 0;
        if (flip) {
            r.p[m] = -r.p[m];
            r.q[m] = -r.q[m];
        }
    }
    return r;
}

double block_distance(const GmpBlock& a, const GmpBlock& b) {
    return std::max(nk::max_abs_diff(a.p, b.p), nk::max_abs_diff(a.q, b.q));
}

double block_distance_mod_sign(const GmpBlock& a, const GmpBlock& b) {
    return block_distance(canonical_sign(a), canonical_sign(b));
}

Matrix build_block_B(const GmpBlock& blk, const Vec& C) {
    const int g = blk.g();
    Matrix b(g + 1, g + 1);
    for (int m = 0; m <= g; ++m)
        for (int n = 0; n <= g; ++n) b(m, n) = m < n ? blk.q[m] * blk.p[n] : blk.p[m] * blk.q[n];
    for (int m = 0; m < g; ++m) b(m, m) += C[m];
    return b;
}

Matrix assemble_dense(const GmpWindow& w) {
    const int s = w.g + 1;
    Matrix a(w.dim(), w.dim());
    for (int j = w.j_min; j <= w.j_max(); ++j) {
        const int o = (j - w.j_min) * s;
        const GmpBlock& blk = w.at(j);
        const Matrix b = build_block_B(blk, w.C);
        for (int m = 0; m < s; ++m)
            for (int n = 0; n < s; ++n) a(o + m, o + n) = b(m, n);
        if (j > w.j_min) {
            const int r = o - 1;
            for (int m = 0; m < s; ++m) a(r, o + m) = a(o + m, r) = blk.p[m];
        }
    }
    return a;
}

GmpWindow extract_window(const Matrix& m, int g, const Vec& C, int base_block, int lo, int hi) {
    const int s = g + 1;
    if (lo <= base_block || (hi - base_block + 1) * s > static_cast<int>(m.rows()))
        throw ValidationError("extract_window: block range outside matrix");
    GmpWindow w;
    w.g = g;
    w.C = C;
    w.j_min = lo;
    for (int j = lo; j <= hi; ++j) {
        const int o = (j - base_block) * s;
        GmpBlock blk{Vec(s), Vec(s)};
        for (int k = 0; k < s; ++k) blk.p[k] = m(o - 1, o + k);
        for (int k = 0; k < s; ++k) blk.q[k] = m(o + g, o + k) / blk.p[g];
        w.blocks.push_back(blk);
    }
    return w;
}

double class_a_residual(const Matrix& m, int g, const Vec& C, int base_block) {
    const int s = g + 1;
    const int nb = static_cast<int>(m.rows()) / s;
    if (nb < 2) return 0.0;
    const GmpWindow w = extract_window(m, g, C, base_block, base_block + 1, base_block + nb - 1);
    Matrix e(m.rows(), m.cols());
    for (int i = 0; i < s; ++i)
        for (int k = 0; k < s; ++k) e(i, k) = m(i, k);
    const Matrix tail = assemble_dense(w);
    for (std::size_t i = 0; i < tail.rows(); ++i)
        for (std::size_t k = 0; k < tail.cols(); ++k) e(i + s, k + s) = tail(i, k);
    const GmpBlock& first = w.blocks.front();
    for (int k = 0; k < s; ++k) e(s - 1, s + k) = e(s + k, s - 1) = first.p[k];
    double r = 0.0;
    for (std::size_t i = 0; i < m.rows(); ++i)
        for (std::size_t k = 0; k < m.cols(); ++k) r = std::max(r, std::abs(m(i, k) - e(i, k)));
    return r;
}

Matrix2 j_matrix() { return {0, -1, 1, 0}; }

Matrix2 bp_factor(double z, double c, double p, double q) {
    if (z == c) throw NumericalError("bp_factor: z equals the pole");
    const double t = 1.0 / (c - z);
    const Matrix2 n = outer_j(p, q, p, q);
    return Matrix2::identity() - t * n;
}

Matrix2 bp_factor_inf(double z, double p, double q) {
    if (p == 0.0) throw NumericalError("bp_factor_inf: p = 0");
    return {0.0, -p, 1.0 / p, (z - p * q) / p};
}

Matrix2 transfer_matrix(const GmpBlock& blk, const Vec& C, double z) {
    const int g = blk.g();
    Matrix2 a = Matrix2::identity();
    for (int m = 0; m < g; ++m) a = a * bp_factor(z, C[m], blk.p[m], blk.q[m]);
    return a * bp_factor_inf(z, blk.p[g], blk.q[g]);
}

Matrix upper_chain_m0(const GmpBlock& blk, const Vec& C) {
    Matrix m = build_block_B(blk, C);
    for (int i = 0; i <= blk.g(); ++i)
        for (int k = 0; k <= blk.g(); ++k) m(i, k) -= blk.p[i] * blk.q[k];
    return m;
}

Matrix2 transfer_via_resolvent(const GmpBlock& blk, const Vec& C, double z) {
    const int g = blk.g();
    Matrix b = build_block_B(blk, C);
    for (int i = 0; i <= g; ++i) b(i, i) -= z;
    const nk::Lu lu(b);
    Vec dg(g + 1, 0.0);
    dg[g] = 1.0;
    const Vec xp = lu.solve(blk.p);
    const Vec xd = lu.solve(dg);
    const double r00 = nk::dot(xp, blk.p);
    const double r0g = xp[g];
    const double rgg = xd[g];
    if (r0g == 0.0) throw NumericalError("transfer_via_resolvent: R_0g vanishes");
    const double s = 1.0 / r0g;
    return {s * (r00 * rgg - r0g * r0g), -s * r00, s * rgg, -s};
}

double lambda_sharp(const GmpBlock& next, const GmpBlock& cur, const Vec& C, int k) {
    const int g = cur.g();
    if (k < 1 || k > g) throw ValidationError("lambda_sharp: k out of range");
    const double ck = C[k - 1];
    Matrix2 m = Matrix2::identity();
    for (int j = 0; j <= k - 2; ++j) m = m * bp_factor(ck, C[j], next.p[j], next.q[j]);
    m = m * outer_j(next.p[k - 1], next.q[k - 1], cur.p[k - 1], cur.q[k - 1]);
    for (int j = k; j <= g - 1; ++j) m = m * bp_factor(ck, C[j], cur.p[j], cur.q[j]);
    m = m * bp_factor_inf(ck, cur.p[g], cur.q[g]);
    return -m.trace();
}

double lambda_k(const GmpBlock& blk, const Vec& C, int k) { return lambda_sharp(blk, blk, C, k); }

double alternative_qg(const GmpBlock& blk, const Vec& C) {
    const int g = blk.g();
    const Matrix2 tail{0.0, 0.0, 0.0, 1.0 / blk.p[g]};
    double s = 0.0;
    for (int k = 1; k <= g; ++k) {
        const double ck = C[k - 1];
        Matrix2 m = Matrix2::identity();
        for (int j = 0; j <= k - 2; ++j) m = m * bp_factor(ck, C[j], blk.p[j], blk.q[j]);
        m = m * outer_j(blk.p[k - 1], blk.q[k - 1], blk.p[k - 1], blk.q[k - 1]);
        for (int j = k; j <= g - 1; ++j) m = m * bp_factor(ck, C[j], blk.p[j], blk.q[j]);
        s += (m * tail).trace();
    }
    return s;
}

ValidityReport validate_gmp(const GmpWindow& w, double floor) {
    ValidityReport r;
    r.min_per_k.assign(w.g, std::numeric_limits<double>::infinity());
    if (w.size() < 2) {
        r.insufficient = true;
        r.message = "insufficient window";
        return r;
    }
    double worst = std::numeric_limits<double>::infinity();
    for (int j = w.j_min; j < w.j_max(); ++j)
        for (int k = 1; k <= w.g; ++k) {
            const double v = lambda_sharp(w.at(j + 1), w.at(j), w.C, k);
            r.min_per_k[k - 1] = std::min(r.min_per_k[k - 1], v);
            if (!(v >= worst)) {
                worst = v;
                r.worst_k = k;
                r.worst_j = j;
            }
        }
    r.valid = worst > floor;
    if (!r.valid)
        r.message = "Lambda# at j=" + std::to_string(r.worst_j) + ", k=" + std::to_string(r.worst_k) +
                    " is below the validity floor";
    return r;
}

ResolventColumn resolvent_column(const GmpWindow& w, int k) {
    const int g = w.g, s = g + 1;
    if (k < 1 || k > g) throw ValidationError("resolvent_column: k out of range");
    if (!w.has(-2) || !w.has(2)) throw ValidationError("resolvent_column: window must contain blocks -2..2");
    ResolventColumn rc;
    rc.k = k;
    rc.lambda_sharp_m1 = lambda_sharp(w.at(0), w.at(-1), w.C, k);
    rc.lambda_sharp_0 = lambda_sharp(w.at(1), w.at(0), w.C, k);
    if (rc.lambda_sharp_m1 == 0.0 || rc.lambda_sharp_0 == 0.0)
        throw NumericalError("resolvent_column: Lambda# vanishes");

    // Support: slots k-1..g of block -1, all of block 0, slots 0..k-1 of block 1.
    // Least squares over the rows of blocks -2..2; the residual measures the support claim.
    const GmpWindow loc = restrict_window(w, -2, 2);
    Matrix m = assemble_dense(loc) * -1.0;
    const double ck = w.C[k - 1];
    for (std::size_t i = 0; i < m.rows(); ++i) m(i, i) += ck;
    std::vector<int> support;  // scalar indices
    for (int n = -s + k - 1; n <= s + k - 1; ++n) support.push_back(n);
    const int ns = static_cast<int>(support.size());
    const int nr = static_cast<int>(m.rows());
    const auto col = [&](int n) { return n + 2 * s; };
    Matrix a(nr, ns);
    for (int r = 0; r < nr; ++r)
        for (int c = 0; c < ns; ++c) a(r, c) = m(r, col(support[c]));
    Vec rhs(nr, 0.0);
    rhs[col(k - 1)] = 1.0;
    const Matrix at = a.transpose();
    const Vec f = nk::solve(at * a, at * rhs);
    for (int n = -s; n < 2 * s; ++n) rc.entries[n] = 0.0;
    for (int c = 0; c < ns; ++c) rc.entries[support[c]] = f[c];
    const Vec res = a * f;
    for (int r = 0; r < nr; ++r) rc.support_residual = std::max(rc.support_residual, std::abs(res[r] - rhs[r]));

    const GmpBlock& bm = w.at(-1);
    const GmpBlock& b1 = w.at(1);
    const auto idx = [&](int blk, int n) { return blk * s + n; };
    const Matrix2 jm = j_matrix();
    rc.closed_form[idx(-1, k - 1)] = 1.0 / rc.lambda_sharp_m1;
    rc.closed_form[idx(1, k - 1)] = 1.0 / rc.lambda_sharp_0;
    for (int n = 0; n <= k - 2; ++n) rc.closed_form[idx(-1, n)] = 0.0;
    for (int n = k; n <= g; ++n) rc.closed_form[idx(1, n)] = 0.0;
    for (int l = k; l <= g - 1; ++l) {
        Matrix2 prod = jm;
        for (int j = k; j <= l - 1; ++j) prod = prod * bp_factor(ck, w.C[j], bm.p[j], bm.q[j]);
        const double u0 = bm.p[k - 1], u1 = bm.q[k - 1];
        const double v0 = bm.p[l], v1 = bm.q[l];
        const double val = u0 * (prod.m11 * v0 + prod.m12 * v1) + u1 * (prod.m21 * v0 + prod.m22 * v1);
        rc.closed_form[idx(-1, l)] = val / ((ck - w.C[l]) * rc.lambda_sharp_m1);
    }
    for (int mm = 0; mm <= k - 2; ++mm) {
        Matrix2 prod = jm;
        for (int j = mm + 1; j <= k - 2; ++j) prod = prod * bp_factor(ck, w.C[j], b1.p[j], b1.q[j]);
        const double u0 = b1.p[mm], u1 = b1.q[mm];
        const double v0 = b1.p[k - 1], v1 = b1.q[k - 1];
        const double val = u0 * (prod.m11 * v0 + prod.m12 * v1) + u1 * (prod.m21 * v0 + prod.m22 * v1);
        rc.closed_form[idx(1, mm)] = val / ((ck - w.C[mm]) * rc.lambda_sharp_0);
    }
    return rc;
}

}  // namespace gmpflow::gmp
