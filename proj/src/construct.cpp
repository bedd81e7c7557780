#include "gmpflow/construct.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace gmpflow::construct {

namespace {

// Drops roundoff weights, merges repeated eigenvalues and renormalizes.
DiscreteMeasure tidy_measure(const DiscreteMeasure& raw) {
    std::vector<std::pair<double, double>> pw;
    for (std::size_t i = 0; i < raw.points.size(); ++i)
        if (raw.weights[i] > 1e-24) pw.emplace_back(raw.points[i], raw.weights[i]);
    std::sort(pw.begin(), pw.end());
    double scale = 1.0, total = 0.0;
    for (const auto& [x, w] : pw) scale = std::max(scale, std::abs(x)), total += w;
    DiscreteMeasure m;
    for (const auto& [x, w] : pw) {
        if (!m.points.empty() && x - m.points.back() <= 1e-13 * scale) {
            m.weights.back() += w / total;
            continue;
        }
        m.points.push_back(x);
        m.weights.push_back(w / total);
    }
    return m;
}

void check_poles_off_support(const DiscreteMeasure& m, const Vec& C) {
    double scale = 1.0;
    for (double x : m.points) scale = std::max(scale, std::abs(x));
    for (double c : C)
        for (double x : m.points)
            if (std::abs(x - c) <= 1e-12 * scale)
                throw ValidationError("pole " + std::to_string(c) + " lies on the support of the measure");
}

// f_0 = 1, f_k = 1/(c_{g-k+1} - x)
double first_system(const Vec& C, int k, double x) {
    if (k == 0) return 1.0;
    return 1.0 / (C[C.size() - k] - x);
}

void check_ordering(const DeltaData& d, const Vec& C) {
    if (static_cast<int>(C.size()) != d.g()) throw ValidationError("ordering and Delta disagree on g");
    for (double c : C) (void)fg::residue_at(d, c);
    for (std::size_t i = 0; i < C.size(); ++i)
        for (std::size_t k = 0; k < i; ++k)
            if (C[i] == C[k]) throw ValidationError("ordering repeats a pole");
}

// Two-pass Gram-Schmidt of v against an orthonormal list; returns the residual norm and
// leaves the normalized vector in v.
double orthonormalize(Vec& v, const std::vector<Vec>& basis) {
    const double n0 = nk::norm2(v);
    for (int pass = 0; pass < 2; ++pass)
        for (const Vec& u : basis) v = nk::axpy(-nk::dot(v, u), u, v);
    const double r = nk::norm2(v);
    if (r > 0.0)
        for (double& x : v) x /= r;
    return n0 > 0.0 ? r / n0 : 0.0;
}

}  // namespace

Matrix gram_D(const DiscreteMeasure& m, const Vec& C) {
    m.validate();
    check_poles_off_support(m, C);
    const int s = static_cast<int>(C.size()) + 1;
    Matrix d(s, s);
    for (std::size_t i = 0; i < m.points.size(); ++i) {
        Vec f(s);
        for (int k = 0; k < s; ++k) f[k] = first_system(C, k, m.points[i]);
        for (int a = 0; a < s; ++a)
            for (int b = 0; b < s; ++b) d(a, b) += m.weights[i] * f[a] * f[b];
    }
    return d;
}

Matrix factor_L(const Matrix& D) {
    // D = G G^T with G lower, so L = G^{-T}
    const Matrix g = nk::lower_cholesky_like(D);
    return nk::upper_triangular_inverse(g.transpose());
}

RationalBasis tau_basis(const DiscreteMeasure& m, const DeltaData& d, const Vec& C, int depth) {
    m.validate();
    check_ordering(d, C);
    check_poles_off_support(m, C);
    const int g = static_cast<int>(C.size()), s = g + 1;
    const int np = static_cast<int>(m.points.size());
    if (depth < 1) throw ValidationError("tau_basis: depth must be positive");
    if (depth * s > np)
        throw ValidationError("tau_basis: " + std::to_string(depth * s) + " functions need at least that many support points, got " +
                              std::to_string(np));
    RationalBasis rb;
    rb.g = g;
    rb.depth = depth;
    rb.C = C;
    rb.points = m.points;
    rb.weights = m.weights;
    rb.D = gram_D(m, C);
    rb.L = factor_L(rb.D);
    const int n = depth * s;
    std::vector<Vec> basis;   // weighted values sqrt(w) tau
    Vec delta(np), sw(np);
    for (int i = 0; i < np; ++i) {
        delta[i] = fg::eval_delta(d, m.points[i]);
        sw[i] = std::sqrt(m.weights[i]);
    }
    for (int idx = 0; idx < n; ++idx) {
        const int blk = idx / s, k = idx % s;
        Vec v(np);
        double lead_prev = 1.0;
        if (blk == 0) {
            for (int i = 0; i < np; ++i) v[i] = sw[i] * first_system(C, k, m.points[i]);
        } else {
            const Vec& prev = basis[idx - s];
            for (int i = 0; i < np; ++i) v[i] = delta[i] * prev[i];
            lead_prev = rb.lead[idx - s];
        }
        const double nv = nk::norm2(v);
        const double ratio = orthonormalize(v, basis);
        if (!(ratio > 1e-10))
            throw NumericalError("tau_basis: rank exhaustion at function " + std::to_string(idx) + "; the measure is too small");
        rb.lead.push_back(lead_prev / (ratio * nv));
        basis.push_back(v);
    }
    rb.values = Matrix(np, n);
    for (int i = 0; i < np; ++i)
        for (int k = 0; k < n; ++k) rb.values(i, k) = basis[k][i] / sw[i];
    return rb;
}

double orthonormality_residual(const RationalBasis& rb) {
    const int n = rb.size();
    double r = 0.0;
    for (int a = 0; a < n; ++a)
        for (int b = 0; b < n; ++b) {
            double t = 0.0;
            for (std::size_t i = 0; i < rb.points.size(); ++i) t += rb.weights[i] * rb.values(i, a) * rb.values(i, b);
            r = std::max(r, std::abs(t - (a == b ? 1.0 : 0.0)));
        }
    return r;
}

namespace {

Matrix multiplication_one_sided_order(const RationalBasis& rb, const DiscreteMeasure& m) {
    const int n = rb.size();
    if (m.points.size() != rb.points.size()) throw ValidationError("multiplication_matrix: measure does not match the basis");
    Matrix a(n, n);
    for (int j = 0; j < n; ++j)
        for (int k = 0; k <= j; ++k) {
            double t = 0.0;
            for (std::size_t i = 0; i < m.points.size(); ++i)
                t += m.weights[i] * m.points[i] * rb.values(i, j) * rb.values(i, k);
            a(j, k) = a(k, j) = t;
        }
    return a;
}

}  // namespace

Matrix multiplication_matrix(const RationalBasis& rb, const DiscreteMeasure& m) {
    const Matrix a = multiplication_one_sided_order(rb, m);
    const int n = rb.size();
    Matrix r(n, n);
    for (int j = 0; j < n; ++j)
        for (int k = 0; k < n; ++k) r(n - 1 - j, n - 1 - k) = a(j, k);
    return r;
}

double gmp_pattern_leak(const Matrix& a, int g) {
    const int s = g + 1;
    double leak = 0.0;
    for (int r = 0; r < static_cast<int>(a.rows()); ++r)
        for (int c = 0; c < static_cast<int>(a.cols()); ++c) {
            const int br = r / s, bc = c / s;
            bool allowed = br == bc;
            if (bc == br + 1) allowed = r % s == g;
            if (br == bc + 1) allowed = c % s == g;
            if (!allowed) leak = std::max(leak, std::abs(a(r, c)));
        }
    return leak;
}

OneSidedReport check_one_sided(const RationalBasis& rb, const DiscreteMeasure& m, const DeltaData& d) {
    OneSidedReport rep;
    rep.a = multiplication_matrix(rb, m);
    const int g = rb.g, s = g + 1;
    rep.pattern_leak = gmp_pattern_leak(rep.a, g);
    rep.symmetry = nk::asymmetry(rep.a);
    if (rb.depth >= 2) rep.class_residual = gmp::class_a_residual(rep.a, g, rb.C, -rb.depth);
    const Matrix app = multiplication_one_sided_order(rb, m);
    Vec mv(s, 0.0);
    for (int k = 0; k < s; ++k)
        for (std::size_t i = 0; i < m.points.size(); ++i) mv[k] += m.weights[i] * m.points[i] * rb.values(i, k);
    // lower triangle of B_{-1} is m l^T plus diag(0, c_g, ..., c_1)
    for (int i = 0; i < s; ++i)
        for (int k = 0; k <= i; ++k) {
            const double c_hat = (i == k && k > 0) ? rb.C[g - k] : 0.0;
            rep.c_hat_deviation = std::max(rep.c_hat_deviation, std::abs(app(i, k) - mv[i] * rb.L(0, k) - c_hat));
        }
    if (rb.depth >= 2)
        for (int k = 0; k < s; ++k) {
            const double p = rb.L(0, k) / (d.lambda0 * rb.L(0, 0) * rb.lead[s]);
            rep.p_formula_deviation = std::max(rep.p_formula_deviation, std::abs(app(s, k) - p));
        }
    return rep;
}

GmpFromJacobi jacobi_to_gmp(const JacobiWindow& jin, const DeltaData& d, const Vec& C, const JacobiToGmpOptions& opt) {
    jin.validate();
    check_ordering(d, C);
    const int g = static_cast<int>(C.size()), s = g + 1, K = opt.blocks;
    if (K < 2) throw ValidationError("jacobi_to_gmp: need at least 2 blocks per side");
    const int reach = K * s + 2 * s;
    if (jin.n_min > -reach || jin.n_max() < reach)
        throw ValidationError("jacobi_to_gmp: Jacobi window must cover " + std::to_string(-reach) + ".." + std::to_string(reach));
    const auto hull = fg::delta_hull(d);
    const double diam = hull.second - hull.first;
    // Truncation can leave an edge state next to a pole; trimming a few sites at the ends moves it away.
    JacobiWindow j = jin;
    double best = -1.0;
    for (int lo = 0; lo <= 2 * s; ++lo)
        for (int hi = 0; hi <= 2 * s; ++hi) {
            if (jin.n_min + lo > -reach || jin.n_max() - hi < reach) continue;
            const JacobiWindow t = jac::restrict_window(jin, jin.n_min + lo, jin.n_max() - hi);
            double dist = std::numeric_limits<double>::infinity();
            for (double c : C) dist = std::min(dist, jac::spectral_distance(t, c));
            if (dist > best + 1e-12 * diam) {
                best = dist;
                j = t;
            }
        }
    if (!(best > opt.margin_rel * diam))
        throw ValidationError("jacobi_to_gmp: a pole is within " + std::to_string(best) + " of the spectrum of the window");
    const int N = j.size();
    const Matrix jm = jac::dense(j);
    std::vector<nk::Lu> lus;
    Vec lam;
    for (const auto& p : d.poles) {
        Matrix m = jm * -1.0;
        for (int i = 0; i < N; ++i) m(i, i) += p.c;
        lus.emplace_back(m);
        lam.push_back(p.lambda);
    }
    const auto apply_delta = [&](const Vec& v) {
        Vec out = nk::axpy(d.c0, v, nk::scaled(jm * v, d.lambda0));
        for (std::size_t k = 0; k < lus.size(); ++k) out = nk::axpy(lam[k], lus[k].solve(v), out);
        return out;
    };
    GmpFromJacobi res;
    const int M = 2 * K * s, base = -K * s;
    std::vector<Vec> cols(M), built;
    const auto add = [&](int scalar, Vec v) {
        const double ratio = orthonormalize(v, built);
        res.min_gs_ratio = std::min(res.min_gs_ratio, ratio);
        if (!(ratio > opt.dependence_tol))
            throw NumericalError("jacobi_to_gmp: flag vector for scalar " + std::to_string(scalar) + " is linearly dependent");
        built.push_back(v);
        cols[scalar - base] = v;
    };
    const auto unit = [&](int n) {
        Vec e(N, 0.0);
        e[j.local(n)] = 1.0;
        return e;
    };
    // block 0: kappa_{c_1}, ..., kappa_{c_g}, e_0; block -1: e_{-1}, kappa^-_{c_g}, ..., kappa^-_{c_1} downwards
    for (int k = 0; k < g; ++k) add(k, jac::kappa(j, C[k], 1e-12).vec);
    add(g, unit(0));
    add(-1, unit(-1));
    for (int k = g - 1; k >= 0; --k) add(-s + k, jac::kappa_minus(j, C[k], 1e-12).vec);
    for (int b = 1; b < K; ++b)
        for (int k = 0; k < s; ++k) add(b * s + k, apply_delta(cols[(b - 1) * s + k - base]));
    for (int b = -2; b >= -K; --b)
        for (int k = g; k >= 0; --k) add(b * s + k, apply_delta(cols[(b + 1) * s + k - base]));
    Matrix F(N, M);
    for (int c = 0; c < M; ++c) {
        F.set_col(c, cols[c]);
        res.edge_weight = std::max({res.edge_weight, std::abs(cols[c].front()), std::abs(cols[c].back())});
    }
    const Matrix ft = F.transpose();
    const Matrix gram = ft * F;
    for (int a = 0; a < M; ++a)
        for (int b = 0; b < M; ++b) res.orth_residual = std::max(res.orth_residual, std::abs(gram(a, b) - (a == b ? 1.0 : 0.0)));
    Matrix a = ft * (jm * F);
    // p_g > 0 in every block, by flipping the last basis vector of the block
    for (int b = -K + 1; b < K; ++b) {
        const int o = (b + K) * s;
        if (a(o - 1, o + g) < 0.0) {
            ++res.sign_flips;
            for (int i = 0; i < M; ++i) {
                a(o + g, i) = -a(o + g, i);
                a(i, o + g) = -a(i, o + g);
            }
        }
    }
    // then p_m > 0 for m < g (q_m when p_m vanishes), by flipping slot m; slot g rows stay fixed
    for (int b = -K + 1; b < K; ++b) {
        const int o = (b + K) * s;
        for (int m = 0; m < g; ++m) {
            const double p = a(o - 1, o + m);
            const double q = a(o + m, o + g) / a(o - 1, o + g);
            if (std::abs(p) > 1e-9 ? p > 0.0 : q >= 0.0) continue;
            ++res.sign_flips;
            for (int i = 0; i < M; ++i) {
                a(o + m, i) = -a(o + m, i);
                a(i, o + m) = -a(i, o + m);
            }
        }
    }
    res.a = a;
    res.window = gmp::extract_window(a, g, C, -K, -K + 1, K - 1);
    res.class_residual = gmp::class_a_residual(a.block(s, s, M - s, M - s), g, C, -K + 1);
    return res;
}

JacobiWindow gmp_to_jacobi_measure(const GmpWindow& w) {
    w.validate();
    if (w.j_min > -2 || w.j_max() < 2) throw ValidationError("gmp_to_jacobi_measure: window must cover blocks -2..2");
    const int dp = w.j_max() - 1, dm = -2 - w.j_min;
    const Matrix a = gmp::assemble_dense(w);
    const int i0 = w.dense_index(0), im = w.dense_index(-1), n = w.dim();
    const int np = n - i0, nm = i0;
    // plus half, started from P_+ A e_{-1} / |p_0|
    Vec u(np);
    for (int i = 0; i < np; ++i) u[i] = a(i0 + i, im);
    const double a0 = nk::norm2(u);
    if (!(a0 > 0.0)) throw NumericalError("gmp_to_jacobi_measure: p_0 vanishes");
    const nk::SymEigen ep = nk::sym_eigen(a.block(i0, i0, np, np));
    DiscreteMeasure mp;
    for (int k = 0; k < np; ++k) {
        double t = 0.0;
        for (int i = 0; i < np; ++i) t += ep.vectors(i, k) * u[i];
        mp.points.push_back(ep.values[k]);
        mp.weights.push_back(t * t / (a0 * a0));
    }
    mp = tidy_measure(mp);
    const nk::SymEigen em = nk::sym_eigen(a.block(0, 0, nm, nm));
    DiscreteMeasure mm;
    for (int k = 0; k < nm; ++k) {
        mm.points.push_back(em.values[k]);
        mm.weights.push_back(em.vectors(nm - 1, k) * em.vectors(nm - 1, k));
    }
    mm = tidy_measure(mm);
    const JacobiWindow jp = jac::lanczos_from_measure(mp, dp, a0);
    const JacobiWindow jmn = jac::lanczos_from_measure(mm, dm + 1);
    JacobiWindow out;
    out.n_min = -1 - dm;
    for (int nn = out.n_min; nn <= -1; ++nn) {
        out.a.push_back(jmn.a[-nn]);
        out.b.push_back(jmn.b[-1 - nn]);
    }
    for (int nn = 0; nn <= dp; ++nn) {
        out.a.push_back(jp.a[nn]);
        out.b.push_back(jp.b[nn]);
    }
    return out;
}

}  // namespace gmpflow::construct
