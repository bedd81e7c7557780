#include "gmpflow/jacobi_core.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace gmpflow::jac {

namespace {

constexpr double kPi = 3.14159265358979323846;

// angle of the line through (x, y), in (-pi/2, pi/2]
double line_angle(double y, double x) {
    if (x == 0.0) return y == 0.0 ? 0.0 : kPi / 2;
    double t = std::atan(y / x);
    return t <= -kPi / 2 ? t + kPi : t;
}

double wrap_half_pi(double d) {
    while (d > kPi / 2) d -= kPi;
    while (d <= -kPi / 2) d += kPi;
    return d;
}

Vec shifted_solve(const JacobiWindow& j, double c, const Vec& rhs) {
    Matrix m = dense(j);
    for (int i = 0; i < j.size(); ++i) m(i, i) -= c;
    return nk::Lu(m).solve(rhs);
}

Vec unit(const JacobiWindow& j, int n) {
    Vec e(j.size(), 0.0);
    e[j.local(n)] = 1.0;
    return e;
}

}  // namespace

double JacobiWindow::a_at(int n) const {
    if (!has(n)) throw ValidationError("JacobiWindow: index " + std::to_string(n) + " outside window");
    return a[local(n)];
}

double JacobiWindow::b_at(int n) const {
    if (!has(n)) throw ValidationError("JacobiWindow: index " + std::to_string(n) + " outside window");
    return b[local(n)];
}

void JacobiWindow::validate() const {
    if (b.empty()) throw ValidationError("JacobiWindow: empty");
    if (a.size() != b.size()) throw ValidationError("JacobiWindow: a and b must have equal length");
    for (int i = 0; i < size(); ++i) {
        if (!std::isfinite(a[i]) || !std::isfinite(b[i])) throw ValidationError("JacobiWindow: non-finite entry");
        if (!(a[i] > 0.0))
            throw ValidationError("JacobiWindow: a(" + std::to_string(n_min + i) + ") must be positive");
    }
}

void DiscreteMeasure::validate() const {
    if (points.empty() || points.size() != weights.size()) throw ValidationError("DiscreteMeasure: malformed");
    double s = 0.0;
    for (std::size_t i = 0; i < points.size(); ++i) {
        if (!(weights[i] > 0.0)) throw ValidationError("DiscreteMeasure: weights must be positive");
        if (i > 0 && !(points[i] > points[i - 1]))
            throw ValidationError("DiscreteMeasure: points must be strictly increasing");
        s += weights[i];
    }
    if (std::abs(s - 1.0) > 1e-12) throw ValidationError("DiscreteMeasure: weights must sum to 1");
}

JacobiWindow free_window(int n_min, int n_max) {
    JacobiWindow j;
    j.n_min = n_min;
    j.a.assign(n_max - n_min + 1, 1.0);
    j.b.assign(n_max - n_min + 1, 0.0);
    return j;
}

JacobiWindow restrict_window(const JacobiWindow& j, int lo, int hi) {
    if (lo < j.n_min || hi > j.n_max() || lo > hi) throw ValidationError("restrict_window: range outside window");
    JacobiWindow r;
    r.n_min = lo;
    r.a.assign(j.a.begin() + j.local(lo), j.a.begin() + j.local(hi) + 1);
    r.b.assign(j.b.begin() + j.local(lo), j.b.begin() + j.local(hi) + 1);
    return r;
}

JacobiWindow plus_part(const JacobiWindow& j) {
    if (!j.has(0)) throw ValidationError("plus_part: window does not contain index 0");
    return restrict_window(j, 0, j.n_max());
}

JacobiWindow minus_part(const JacobiWindow& j) {
    if (!j.has(-1)) throw ValidationError("minus_part: window does not contain index -1");
    return restrict_window(j, j.n_min, -1);
}

Matrix dense(const JacobiWindow& j) {
    const int n = j.size();
    Matrix m(n, n);
    for (int i = 0; i < n; ++i) {
        m(i, i) = j.b[i];
        if (i + 1 < n) m(i, i + 1) = m(i + 1, i) = j.a[i + 1];
    }
    return m;
}

double norm_bound(const JacobiWindow& j) {
    double r = 0.0;
    for (int i = 0; i < j.size(); ++i) {
        double s = std::abs(j.b[i]);
        if (i > 0) s += std::abs(j.a[i]);
        if (i + 1 < j.size()) s += std::abs(j.a[i + 1]);
        r = std::max(r, s);
    }
    return r;
}

int count_below(const JacobiWindow& j, double x) {
    int cnt = 0;
    double d = 1.0;
    const double tiny = std::numeric_limits<double>::min() * 1e10;
    for (int i = 0; i < j.size(); ++i) {
        d = (j.b[i] - x) - (i > 0 ? j.a[i] * j.a[i] / d : 0.0);
        if (d == 0.0) d = -tiny;
        if (d < 0.0) ++cnt;
    }
    return cnt;
}

bool near_spectrum(const JacobiWindow& j, double c, double tol) {
    return count_below(j, c + tol) - count_below(j, c - tol) > 0;
}

double spectral_distance(const JacobiWindow& j, double c) {
    double hi = norm_bound(j) + std::abs(c) + 1.0;
    double lo = 0.0;
    for (int it = 0; it < 200 && hi - lo > 1e-15 * std::max(1.0, hi); ++it) {
        const double mid = 0.5 * (lo + hi);
        if (near_spectrum(j, c, mid))
            hi = mid;
        else
            lo = mid;
    }
    return 0.5 * (lo + hi);
}

int decay_margin(double dist, double norm) {
    if (!(dist > 0.0) || !(norm > 0.0)) throw ValidationError("decay_margin: needs positive distance and norm");
    return static_cast<int>(std::ceil(30.0 / std::log1p(dist / norm)));
}

DiscreteMeasure spectral_measure(const JacobiWindow& j, int n) {
    j.validate();
    const nk::SymEigen es = nk::sym_eigen(dense(j));
    const int li = j.local(n);
    DiscreteMeasure m;
    double s = 0.0;
    for (int i = 0; i < j.size(); ++i) {
        const double v = es.vectors(li, i);
        m.points.push_back(es.values[i]);
        m.weights.push_back(v * v);
        s += v * v;
    }
    for (double& w : m.weights) w /= s;
    return m;
}

DiscreteMeasure spectral_measure_plus(const JacobiWindow& j) { return spectral_measure(j, j.n_min); }

double measure_resolvent(const DiscreteMeasure& m, double z) {
    double s = 0.0;
    for (std::size_t i = 0; i < m.points.size(); ++i) {
        if (m.points[i] == z) throw NumericalError("measure_resolvent: z is a mass point");
        s += m.weights[i] / (m.points[i] - z);
    }
    return s;
}

double resolvent_r(const JacobiWindow& j, double z, int n) {
    try {
        return shifted_solve(j, z, unit(j, n))[j.local(n)];
    } catch (const nk::SingularMatrixError&) {
        throw NumericalError("resolvent_r: z is an eigenvalue of the window");
    }
}

double resolvent_r(const JacobiWindow& j, double z) { return resolvent_r(j, z, j.n_min); }

std::complex<double> resolvent_r(const JacobiWindow& j, std::complex<double> z) {
    // continued fraction from the far end
    std::complex<double> r = 0.0;
    for (int i = j.size() - 1; i >= 0; --i) {
        const double a2 = i + 1 < j.size() ? j.a[i + 1] * j.a[i + 1] : 0.0;
        const std::complex<double> d = j.b[i] - z - a2 * r;
        if (d == 0.0) throw NumericalError("resolvent_r: z is an eigenvalue of the window");
        r = 1.0 / d;
    }
    return r;
}

double r_plus(const JacobiWindow& j, double z) { return resolvent_r(plus_part(j), z, 0); }
double r_minus(const JacobiWindow& j, double z) { return resolvent_r(minus_part(j), z, -1); }

JacobiWindow lanczos_from_measure(const DiscreteMeasure& m, int depth, double a0) {
    m.validate();
    const int np = static_cast<int>(m.points.size());
    if (depth < 0 || depth >= np) throw ValidationError("lanczos_from_measure: measure support too small");
    std::vector<Vec> qs;
    Vec q(np);
    for (int i = 0; i < np; ++i) q[i] = std::sqrt(m.weights[i]);
    const double nq = nk::norm2(q);
    for (double& x : q) x /= nq;
    JacobiWindow j;
    j.n_min = 0;
    j.a.push_back(a0);
    for (int k = 0; k <= depth; ++k) {
        qs.push_back(q);
        Vec v(np);
        for (int i = 0; i < np; ++i) v[i] = m.points[i] * q[i];
        const double bk = nk::dot(v, q);
        j.b.push_back(bk);
        if (k == depth) break;
        for (int pass = 0; pass < 2; ++pass)
            for (const Vec& u : qs) v = nk::axpy(-nk::dot(v, u), u, v);
        const double ak = nk::norm2(v);
        if (!(ak > 1e-14)) throw NumericalError("lanczos_from_measure: breakdown, measure support too small");
        j.a.push_back(ak);
        q = nk::scaled(v, 1.0 / ak);
    }
    return j;
}

double phi_of_c(const JacobiWindow& j, double c) {
    if (!j.has(-1) || !j.has(0)) throw ValidationError("phi_of_c: window must contain indices -1 and 0");
    Vec x;
    try {
        x = shifted_solve(j, c, unit(j, -1));
    } catch (const nk::SingularMatrixError&) {
        throw NumericalError("phi_of_c: c is an eigenvalue of the window");
    }
    // r_+(c) = -R_{0,-1} / (a(0) R_{-1,-1})
    return line_angle(-x[j.local(0)], j.a_at(0) * x[j.local(-1)]);
}

namespace {

double psi_of_c(const JacobiWindow& j, double c) {
    Vec x;
    try {
        x = shifted_solve(j, c, unit(j, 0));
    } catch (const nk::SingularMatrixError&) {
        throw NumericalError("kappa_minus: c is an eigenvalue of the window");
    }
    return line_angle(-x[j.local(-1)], j.a_at(0) * x[j.local(0)]);
}

KappaVector kappa_impl(const JacobiWindow& j, double c, double tol, bool plus) {
    j.validate();
    if (!j.has(-1) || !j.has(0)) throw ValidationError("kappa: window must contain indices -1 and 0");
    if (near_spectrum(j, c, tol)) throw NumericalError("kappa: c too close to the spectrum");
    KappaVector k;
    k.c = c;
    k.n_min = j.n_min;
    k.phi = plus ? phi_of_c(j, c) : psi_of_c(j, c);
    const double a0 = j.a_at(0);
    Vec rhs(j.size(), 0.0);
    rhs[j.local(plus ? -1 : 0)] = a0 * std::sin(k.phi);
    rhs[j.local(plus ? 0 : -1)] = std::cos(k.phi);
    k.vec = shifted_solve(j, c, rhs);
    k.norm2 = nk::dot(k.vec, k.vec);
    k.boundary = std::max(std::abs(k.vec.front()), std::abs(k.vec.back()));
    return k;
}

}  // namespace

KappaVector kappa(const JacobiWindow& j, double c, double tol) { return kappa_impl(j, c, tol, true); }
KappaVector kappa_minus(const JacobiWindow& j, double c, double tol) { return kappa_impl(j, c, tol, false); }

double phi_prime_fd(const JacobiWindow& j, double c, double h) {
    if (h <= 0.0) h = 1e-5 * std::max(1.0, norm_bound(j));
    const auto central = [&](double s) { return wrap_half_pi(phi_of_c(j, c + s) - phi_of_c(j, c - s)) / (2.0 * s); };
    // one Richardson step removes the h^2 term
    return (4.0 * central(0.5 * h) - central(h)) / 3.0;
}

PhiBounds phi_prime_bounds(const JacobiWindow& j, double c) {
    const double a2 = j.a_at(0) * j.a_at(0);
    const double nj = nk::norm_inf(dense(j));
    const double d = spectral_distance(j, c);
    return {std::min(a2, 1.0) / ((std::abs(c) + nj) * (std::abs(c) + nj)), std::max(a2, 1.0) / (d * d)};
}

PairingResult kappa_pairing(const JacobiWindow& j, const JacobiWindow& j0, double c) {
    if (j.n_min != j0.n_min || j.size() != j0.size()) throw ValidationError("kappa_pairing: windows not aligned");
    const KappaVector k = kappa(j, c);
    const KappaVector k0 = kappa(j0, c);
    const Matrix diff = dense(j) - dense(j0);
    PairingResult r;
    r.lhs = nk::dot(diff * k.vec, k0.vec);
    r.rhs = std::sin(k0.phi - k.phi);
    return r;
}

TwoByTwo two_by_two_resolvent(const JacobiWindow& j, double z) {
    j.validate();
    if (!j.has(-1) || !j.has(0)) throw ValidationError("two_by_two_resolvent: window must contain -1 and 0");
    Vec xm, x0;
    try {
        xm = shifted_solve(j, z, unit(j, -1));
        x0 = shifted_solve(j, z, unit(j, 0));
    } catch (const nk::SingularMatrixError&) {
        throw NumericalError("two_by_two_resolvent: z is an eigenvalue of the window");
    }
    TwoByTwo t;
    const int im = j.local(-1), i0 = j.local(0);
    t.r = {xm[im], x0[im], xm[i0], x0[i0]};
    t.r_plus = r_plus(j, z);
    t.r_minus = r_minus(j, z);
    const double a2 = j.a_at(0) * j.a_at(0);
    const double lhs0 = -1.0 / t.r.m22, rhs0 = -1.0 / t.r_plus + a2 * t.r_minus;
    const double lhs1 = -1.0 / t.r.m11, rhs1 = -1.0 / t.r_minus + a2 * t.r_plus;
    t.residual_00 = std::abs(lhs0 - rhs0) / std::max(1.0, std::abs(lhs0));
    t.residual_m1 = std::abs(lhs1 - rhs1) / std::max(1.0, std::abs(lhs1));
    return t;
}

ExtKind classify(double value, double zero_tol, double pole_tol) {
    if (!std::isfinite(value) || std::abs(value) >= pole_tol) return ExtKind::Pole;
    if (std::abs(value) <= zero_tol) return ExtKind::Zero;
    return ExtKind::Regular;
}

bool extension_predicate(ExtKind rp, ExtKind rm) {
    if (rp == ExtKind::Zero || rp == ExtKind::Pole) return rm == ExtKind::Regular;
    return rm == ExtKind::Zero;
}

double dist_eta(const Vec& b, const Vec& bt, double eta) {
    if (!(eta > 0.0 && eta < 1.0)) throw ValidationError("dist_eta: eta must lie in (0,1)");
    const std::size_t n = std::min(b.size(), bt.size());
    double s = 0.0, w = 1.0;
    for (std::size_t i = 0; i < n; ++i, w *= eta * eta) s += (b[i] - bt[i]) * (b[i] - bt[i]) * w;
    return std::sqrt(s);
}

double dist_eta(const JacobiWindow& j, const JacobiWindow& jt, double eta) {
    if (!(eta > 0.0 && eta < 1.0)) throw ValidationError("dist_eta: eta must lie in (0,1)");
    if (j.n_min != jt.n_min) throw ValidationError("dist_eta: windows not aligned");
    const int n = std::min(j.size(), jt.size());
    double s = 0.0;
    for (int i = 0; i < n; ++i) {
        const double w = std::pow(eta, 2.0 * std::abs(j.n_min + i));
        s += (j.b[i] - jt.b[i]) * (j.b[i] - jt.b[i]) * w;
        if (i > 0) s += (j.a[i] - jt.a[i]) * (j.a[i] - jt.a[i]) * w;
    }
    return std::sqrt(s);
}

double shifted_dist(const JacobiWindow& j, const JacobiWindow& ref, int s, double eta) {
    if (s < 0 || s >= j.size()) throw ValidationError("shifted_dist: shift outside window");
    JacobiWindow sh = restrict_window(j, j.n_min + s, j.n_max());
    sh.n_min = ref.n_min;
    return dist_eta(sh, ref, eta);
}

}  // namespace gmpflow::jac
