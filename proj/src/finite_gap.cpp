#include "gmpflow/finite_gap.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace gmpflow::fg {

Vec GapSet::a_points() const {
    Vec a{a0};
    for (const auto& gp : gaps) a.push_back(gp.first);
    return a;
}

Vec GapSet::b_points() const {
    Vec b{b0};
    for (const auto& gp : gaps) b.push_back(gp.second);
    return b;
}

void GapSet::validate() const {
    if (!std::isfinite(a0) || !std::isfinite(b0)) throw ValidationError("GapSet: non-finite endpoint");
    double prev = b0;
    for (std::size_t j = 0; j < gaps.size(); ++j) {
        const auto [a, b] = gaps[j];
        if (!std::isfinite(a) || !std::isfinite(b)) throw ValidationError("GapSet: non-finite gap endpoint");
        if (!(a > prev)) {
            if (j == 0)
                throw ValidationError("GapSet: gap 1 (" + std::to_string(a) + ", " + std::to_string(b) +
                                      ") does not start inside (b0, a0)");
            throw ValidationError("GapSet: gaps " + std::to_string(j) + " and " + std::to_string(j + 1) + " overlap: (" +
                                  std::to_string(gaps[j - 1].first) + ", " + std::to_string(gaps[j - 1].second) + ") and (" +
                                  std::to_string(a) + ", " + std::to_string(b) + ")");
        }
        if (!(b > a)) throw ValidationError("GapSet: gap " + std::to_string(j + 1) + " is empty or reversed");
        prev = b;
    }
    if (!(a0 > prev)) throw ValidationError("GapSet: last gap reaches past a0");
}

Vec DeltaData::cs() const {
    Vec c;
    for (const auto& p : poles) c.push_back(p.c);
    return c;
}

void DeltaData::validate() const {
    if (!(lambda0 > 0.0)) throw ValidationError("DeltaData: lambda0 must be positive");
    for (std::size_t k = 0; k < poles.size(); ++k) {
        if (!(poles[k].lambda > 0.0)) throw ValidationError("DeltaData: lambda_" + std::to_string(k + 1) + " <= 0");
        if (k > 0 && !(poles[k].c > poles[k - 1].c)) throw ValidationError("DeltaData: poles not increasing");
    }
}

Vec apply_ordering(const DeltaData& d, const std::vector<int>& perm) {
    const int g = d.g();
    if (static_cast<int>(perm.size()) != g) throw ValidationError("ordering: wrong length");
    std::vector<bool> seen(g, false);
    Vec c;
    for (int k : perm) {
        if (k < 1 || k > g || seen[k - 1]) throw ValidationError("ordering: not a permutation of 1..g");
        seen[k - 1] = true;
        c.push_back(d.poles[k - 1].c);
    }
    return c;
}

double residue_at(const DeltaData& d, double c) {
    for (const auto& p : d.poles)
        if (std::abs(p.c - c) <= 1e-12 * std::max(1.0, std::abs(c))) return p.lambda;
    throw ValidationError("ordering entry is not a pole of Delta");
}

double poly_a(const GapSet& e, double z) {
    double p = 1.0;
    for (double a : e.a_points()) p *= (z - a);
    return p;
}

double poly_b(const GapSet& e, double z) {
    double p = 1.0;
    for (double b : e.b_points()) p *= (z - b);
    return p;
}

double delta_poly_ratio(const GapSet& e, double z) {
    const double pa = poly_a(e, z), pb = poly_b(e, z);
    return 2.0 * (pa + pb) / (pb - pa);
}

namespace {

// derivative of prod (z - r_j)
double poly_prime(const Vec& roots, double z) {
    double s = 0.0;
    for (std::size_t i = 0; i < roots.size(); ++i) {
        double t = 1.0;
        for (std::size_t j = 0; j < roots.size(); ++j)
            if (j != i) t *= (z - roots[j]);
        s += t;
    }
    return s;
}

}  // namespace

Vec gap_zeros(const GapSet& e) {
    e.validate();
    Vec c;
    const auto f = [&](double z) { return poly_b(e, z) - poly_a(e, z); };
    for (std::size_t k = 0; k < e.gaps.size(); ++k) {
        const auto [a, b] = e.gaps[k];
        try {
            c.push_back(nk::bisect_root(f, a, b));
        } catch (const nk::NoSignChangeError&) {
            throw ValidationError("GapSet: gap " + std::to_string(k + 1) + " is degenerate (no sign change)");
        }
    }
    return c;
}

DeltaData delta_from_gaps(const GapSet& e) {
    const Vec c = gap_zeros(e);
    const Vec ap = e.a_points(), bp = e.b_points();
    double sa = 0.0, sb = 0.0;
    for (double x : ap) sa += x;
    for (double x : bp) sb += x;
    DeltaData d;
    d.lambda0 = 4.0 / (sa - sb);
    for (double ck : c) {
        const double num = poly_a(e, ck) + poly_b(e, ck);
        const double den = poly_prime(bp, ck) - poly_prime(ap, ck);
        d.poles.push_back({ck, -2.0 * num / den});
    }
    const double zbig = e.a0 + 10.0 * e.diam();
    double rest = delta_poly_ratio(e, zbig) - d.lambda0 * zbig;
    for (const auto& p : d.poles) rest -= p.lambda / (p.c - zbig);
    d.c0 = rest;
    d.validate();
    return d;
}

double eval_delta(const DeltaData& d, double z) {
    double s = d.lambda0 * z + d.c0;
    for (const auto& p : d.poles) {
        if (z == p.c) throw NumericalError("Delta evaluated at a pole");
        s += p.lambda / (p.c - z);
    }
    return s;
}

std::complex<double> eval_delta(const DeltaData& d, std::complex<double> z) {
    std::complex<double> s = d.lambda0 * z + d.c0;
    for (const auto& p : d.poles) {
        if (z == std::complex<double>(p.c, 0.0)) throw NumericalError("Delta evaluated at a pole");
        s += p.lambda / (p.c - z);
    }
    return s;
}

double eval_delta_prime(const DeltaData& d, double z) {
    double s = d.lambda0;
    for (const auto& p : d.poles) s += p.lambda / ((p.c - z) * (p.c - z));
    return s;
}

Vec delta_inverse_points(const DeltaData& d, double y) {
    if (!(y >= -2.0 && y <= 2.0)) throw ValidationError("delta_inverse_points: y outside [-2,2]");
    const Vec c = d.cs();
    const auto f = [&](double x) { return eval_delta(d, x) - y; };
    double scale = std::abs(d.c0) / d.lambda0 + 4.0 / d.lambda0 + 1.0;
    for (double ck : c) scale = std::max(scale, std::abs(ck) + 1.0);
    Vec out;
    for (std::size_t k = 0; k <= c.size(); ++k) {
        auto lower = [&](double start, double step) {
            double x = start + step;
            for (int i = 0; i < 200 && f(x) >= 0; ++i) step *= 0.5, x = start + step;
            return x;
        };
        auto upper = [&](double start, double step) {
            double x = start - step;
            for (int i = 0; i < 200 && f(x) <= 0; ++i) step *= 0.5, x = start - step;
            return x;
        };
        double lo, hi;
        if (k == 0) {
            lo = -scale;
            for (int i = 0; i < 200 && f(lo) >= 0; ++i) lo *= 2.0;
        } else {
            lo = lower(c[k - 1], 0.5 * ((k < c.size() ? c[k] : c[k - 1] + 1.0) - c[k - 1]));
        }
        if (k == c.size()) {
            hi = scale;
            for (int i = 0; i < 200 && f(hi) <= 0; ++i) hi = std::abs(hi) * 2.0 + 1.0;
        } else {
            hi = upper(c[k], 0.5 * (c[k] - (k > 0 ? c[k - 1] : c[k] - 1.0)));
        }
        try {
            out.push_back(nk::bisect_root(f, lo, hi));
        } catch (const nk::NoSignChangeError&) {
            throw NumericalError("delta_inverse_points: bracket failure in band " + std::to_string(k));
        }
    }
    return out;
}

std::pair<double, double> delta_hull(const DeltaData& d) {
    const Vec lo = delta_inverse_points(d, -2.0);
    const Vec hi = delta_inverse_points(d, 2.0);
    return {lo.front(), hi.back()};
}

double eval_psi(const GapSet& e, double x) {
    const double pa = poly_a(e, x), pb = poly_b(e, x);
    if (pb == 0.0 || !(pa / pb > 0.0)) throw ValidationError("eval_psi: point lies on E");
    const double r = std::sqrt(pa / pb);
    return (1.0 - r) / (1.0 + r);
}

}  // namespace gmpflow::fg
