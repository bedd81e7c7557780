#include "gmpflow/isospectral.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace gmpflow::iso {

namespace {

using nk::Matrix2;

Matrix2 n_of(double p, double q) { return {p * q, -p * p, q * q, -q * p}; }
Matrix2 dn_dp(double p, double q) { return {q, -2 * p, 0, -q}; }
Matrix2 dn_dq(double p, double q) { return {p, 0, 2 * q, -p}; }

// Factors of Lambda_k = -tr(prod) and their partial derivatives in (p_j, q_j).
struct Factor {
    Matrix2 m, dp, dq;
};

std::vector<Factor> lambda_factors(const GmpBlock& b, const Vec& C, int k) {
    const int g = b.g(), kk = k - 1;
    const double ck = C[kk];
    std::vector<Factor> f;
    for (int j = 0; j < g; ++j) {
        const double p = b.p[j], q = b.q[j];
        if (j == kk) {
            f.push_back({n_of(p, q), dn_dp(p, q), dn_dq(p, q)});
        } else {
            const double t = 1.0 / (C[j] - ck);
            f.push_back({Matrix2::identity() - t * n_of(p, q), -t * dn_dp(p, q), -t * dn_dq(p, q)});
        }
    }
    const double p = b.p[g], q = b.q[g];
    f.push_back({gmp::bp_factor_inf(ck, p, q), Matrix2{0, -1, -1 / (p * p), -ck / (p * p)}, Matrix2{0, 0, 0, -1}});
    return f;
}

GmpBlock from_coords(const Vec& x) {
    const int s = static_cast<int>(x.size()) / 2;
    GmpBlock b{Vec(s), Vec(s)};
    for (int j = 0; j < s; ++j) {
        b.p[j] = x[2 * j];
        b.q[j] = x[2 * j + 1];
    }
    return b;
}

Vec to_coords(const GmpBlock& b) {
    Vec x;
    for (int j = 0; j <= b.g(); ++j) {
        x.push_back(b.p[j]);
        x.push_back(b.q[j]);
    }
    return x;
}

// minimum-norm solution of J x = r
Vec min_norm_solve(const Matrix& j, const Vec& r) {
    const Matrix jt = j.transpose();
    return jt * nk::solve(j * jt, r);
}

void check_context(const GmpBlock& blk, const Vec& C, const DeltaData& d) {
    blk.validate();
    if (static_cast<int>(C.size()) != blk.g() || d.g() != blk.g())
        throw ValidationError("isospectral: block, ordering and Delta disagree on g");
}

}  // namespace

Vec is_residual(const GmpBlock& blk, const Vec& C, const DeltaData& d) {
    check_context(blk, C, d);
    const int g = blk.g();
    Vec r;
    r.push_back(d.lambda0 * blk.p[g] - 1.0);
    double s = 0.0;
    for (int j = 0; j <= g; ++j) s += blk.p[j] * blk.q[j];
    r.push_back(d.lambda0 * s + d.c0);
    for (int k = 1; k <= g; ++k) r.push_back(gmp::lambda_k(blk, C, k) - fg::residue_at(d, C[k - 1]));
    return r;
}

double residual_norm(const Vec& r) {
    double m = 0.0;
    for (double x : r) m = std::max(m, std::abs(x));
    return m;
}

double trace_mismatch(const GmpBlock& blk, const Vec& C, const DeltaData& d, const Vec& z) {
    double m = 0.0;
    for (double x : z) m = std::max(m, std::abs(gmp::transfer_matrix(blk, C, x).trace() - fg::eval_delta(d, x)));
    return m;
}

Vec trace_samples(const DeltaData& d, int n) {
    const auto [lo, hi] = fg::delta_hull(d);
    const double w = hi - lo;
    Vec z;
    for (int i = 0; i < 4 * n && static_cast<int>(z.size()) < n; ++i) {
        const double x = lo - 0.5 * w + 2.0 * w * (i + 0.5) / (4 * n) + 0.013 * w;
        bool ok = true;
        for (const auto& p : d.poles) ok &= std::abs(x - p.c) > 1e-2 * w;
        if (ok && i % 4 == 0) z.push_back(x);
    }
    for (int i = 0; static_cast<int>(z.size()) < n; ++i) z.push_back(hi + 1.0 + 0.7 * i);
    return z;
}

Matrix residual_jacobian(const GmpBlock& blk, const Vec& C, const DeltaData& d) {
    check_context(blk, C, d);
    const int g = blk.g(), nc = 2 * (g + 1);
    Matrix jm(g + 2, nc);
    jm(0, 2 * g) = d.lambda0;
    for (int j = 0; j <= g; ++j) {
        jm(1, 2 * j) = d.lambda0 * blk.q[j];
        jm(1, 2 * j + 1) = d.lambda0 * blk.p[j];
    }
    for (int k = 1; k <= g; ++k) {
        const std::vector<Factor> f = lambda_factors(blk, C, k);
        const int nf = static_cast<int>(f.size());
        std::vector<Matrix2> pre(nf + 1), suf(nf + 1);
        pre[0] = Matrix2::identity();
        for (int i = 0; i < nf; ++i) pre[i + 1] = pre[i] * f[i].m;
        suf[nf] = Matrix2::identity();
        for (int i = nf - 1; i >= 0; --i) suf[i] = f[i].m * suf[i + 1];
        for (int i = 0; i < nf; ++i) {
            jm(1 + k, 2 * i) = -(pre[i] * f[i].dp * suf[i + 1]).trace();
            jm(1 + k, 2 * i + 1) = -(pre[i] * f[i].dq * suf[i + 1]).trace();
        }
    }
    return jm;
}

IsPoint solve_is_point(const DeltaData& d, const Vec& C, const GmpBlock& seed, const SolveOptions& opt) {
    check_context(seed, C, d);
    const int g = seed.g();
    GmpBlock cur = seed;
    cur.p[g] = 1.0 / d.lambda0;
    // free coordinates: all but p_g (column 2g)
    const auto free_cols = [&](const Matrix& full) {
        Matrix m(g + 1, 2 * g + 1);
        for (int r = 0; r < g + 1; ++r)
            for (int c = 0, k = 0; c < 2 * g + 2; ++c)
                if (c != 2 * g) m(r, k++) = full(r + 1, c);
        return m;
    };
    const auto eqs = [&](const GmpBlock& b) {
        const Vec r = is_residual(b, C, d);
        return Vec(r.begin() + 1, r.end());
    };
    Vec r = eqs(cur);
    IsPoint pt;
    int it = 0;
    for (; it < opt.max_iter && residual_norm(r) > opt.tol; ++it) {
        const Vec step = min_norm_solve(free_cols(residual_jacobian(cur, C, d)), r);
        double alpha = 1.0;
        bool accepted = false;
        for (int h = 0; h < 30; ++h, alpha *= 0.5) {
            GmpBlock trial = cur;
            for (int c = 0, k = 0; c < 2 * g + 2; ++c) {
                if (c == 2 * g) continue;
                double& v = c % 2 == 0 ? trial.p[c / 2] : trial.q[c / 2];
                v -= alpha * step[k++];
            }
            const Vec rt = eqs(trial);
            if (nk::norm2(rt) < nk::norm2(r) || residual_norm(rt) <= opt.tol) {
                cur = trial;
                r = rt;
                accepted = true;
                break;
            }
        }
        if (!accepted) break;
    }
    if (!(residual_norm(r) <= opt.tol))
        throw NumericalError("solve_is_point: no convergence after " + std::to_string(it) +
                             " iterations, residual " + std::to_string(residual_norm(r)));
    pt.blk = cur;
    pt.C = C;
    pt.d = d;
    pt.residual = is_residual(cur, C, d);
    pt.residual_max = residual_norm(pt.residual);
    pt.iterations = it;
    return pt;
}

IsJacobian is_jacobian(const GmpBlock& blk, const Vec& C, const DeltaData& d, double h) {
    check_context(blk, C, d);
    const int g = blk.g();
    const Matrix full = residual_jacobian(blk, C, d);
    IsJacobian r;
    r.t = Matrix(g, 2 * g);
    r.t_fd = Matrix(g, 2 * g);
    for (int k = 0; k < g; ++k)
        for (int c = 0; c < 2 * g; ++c) r.t(k, c) = full(k + 2, c);
    for (int c = 0; c < 2 * g; ++c) {
        GmpBlock up = blk, dn = blk;
        double& vu = c % 2 == 0 ? up.p[c / 2] : up.q[c / 2];
        double& vd = c % 2 == 0 ? dn.p[c / 2] : dn.q[c / 2];
        vu += h;
        vd -= h;
        for (int k = 1; k <= g; ++k)
            r.t_fd(k - 1, c) = (gmp::lambda_k(up, C, k) - gmp::lambda_k(dn, C, k)) / (2 * h);
    }
    for (int k = 0; k < g; ++k)
        for (int c = 0; c < 2 * g; ++c)
            r.fd_gap = std::max(r.fd_gap, std::abs(r.t(k, c) - r.t_fd(k, c)) / std::max(1.0, std::abs(r.t(k, c))));
    const nk::SymEigen es = nk::sym_eigen(r.t * r.t.transpose());
    r.sigma_min = std::sqrt(std::max(0.0, es.values.front()));
    return r;
}

MagicReport magic_check(const GmpBlock& blk, const Vec& C, const DeltaData& d, int window_blocks, int margin) {
    check_context(blk, C, d);
    if (window_blocks < 2 * margin + 10) throw ValidationError("magic_check: window must hold 2*margin + 10 blocks");
    const int g = blk.g(), s = g + 1;
    const int j_min = -window_blocks / 2;
    const gmp::GmpWindow w = gmp::periodic_window(blk, C, j_min, j_min + window_blocks - 1);
    // scalar range shifted down by one: from the last slot of block j_min-1 to slot g-1 of the
    // top block, which avoids the uncoupled edge slots of the plain block truncation
    const Matrix full = gmp::assemble_dense(gmp::periodic_window(blk, C, j_min - 1, j_min + window_blocks - 1));
    const int n = w.dim();
    const Matrix a = full.block(g, g, n, n);
    Matrix delta = a * d.lambda0;
    for (int i = 0; i < n; ++i) delta(i, i) += d.c0;
    for (int k = 0; k < g; ++k) {
        Matrix m = a * -1.0;
        for (int i = 0; i < n; ++i) m(i, i) += C[k];
        Matrix inv;
        try {
            inv = nk::inverse(m);
        } catch (const nk::SingularMatrixError&) {
            throw NumericalError("magic_check: c_" + std::to_string(k + 1) + " - A is singular");
        }
        delta += inv * fg::residue_at(d, C[k]);
    }
    MagicReport r;
    r.blocks = window_blocks;
    r.margin = margin;
    for (int i = margin * s; i < n - margin * s; ++i) {
        ++r.rows_checked;
        for (int c = 0; c < n; ++c) {
            const double expect = (std::abs(i - c) == s) ? 1.0 : 0.0;
            r.deviation = std::max(r.deviation, std::abs(delta(i, c) - expect));
        }
    }
    return r;
}

MagicReport magic_check(const IsPoint& pt, int window_blocks, int margin) {
    return magic_check(pt.blk, pt.C, pt.d, window_blocks, margin);
}

DistanceResult is_distance(const GmpBlock& blk, const Vec& C, const DeltaData& d, const SolveOptions& opt) {
    check_context(blk, C, d);
    const Vec x0 = to_coords(blk);
    Vec x = x0;
    DistanceResult res;
    Vec f = is_residual(blk, C, d);
    int it = 0;
    for (; it < opt.max_iter; ++it) {
        const GmpBlock cb = from_coords(x);
        const Matrix jm = residual_jacobian(cb, C, d);
        // linearized constraint at x, then the point of it nearest to x0
        Vec rhs = f;
        const Vec jd = jm * nk::axpy(-1.0, x, x0);
        for (std::size_t i = 0; i < rhs.size(); ++i) rhs[i] += jd[i];
        const Vec y = nk::axpy(-1.0, min_norm_solve(jm, rhs), x0);
        Vec xn = y;
        Vec fn;
        double alpha = 1.0;
        for (int h = 0; h < 30; ++h, alpha *= 0.5) {
            xn = nk::axpy(alpha, nk::axpy(-1.0, x, y), x);
            const GmpBlock tb = from_coords(xn);
            if (!(tb.p.back() > 0.0)) continue;
            fn = is_residual(tb, C, d);
            if (residual_norm(fn) < std::max(residual_norm(f), opt.tol) * 1.5 || h == 29) break;
        }
        const double move = nk::max_abs_diff(xn, x);
        x = xn;
        f = fn;
        if (residual_norm(f) <= opt.tol && move <= 1e-13 * std::max(1.0, nk::norm2(x))) break;
    }
    if (!(residual_norm(f) <= opt.tol))
        throw NumericalError("is_distance: projection did not converge, residual " + std::to_string(residual_norm(f)));
    res.iterations = it;
    res.distance = nk::norm2(nk::axpy(-1.0, x0, x));
    res.nearest.blk = from_coords(x);
    res.nearest.C = C;
    res.nearest.d = d;
    res.nearest.residual = f;
    res.nearest.residual_max = residual_norm(f);
    res.nearest.iterations = it;
    return res;
}

}  // namespace gmpflow::iso
