#pragma once

#include <complex>
#include <vector>

#include "gmpflow/numkit.hpp"

namespace gmpflow::jac {

using nk::Matrix;
using nk::Matrix2;
using nk::Vec;

// Scalar indices n_min..n_min+N-1. a[i] = a(n_min+i) couples n_min+i-1 and n_min+i,
// so a[0] is the coupling out of the window (kept, but not part of the matrix).
struct JacobiWindow {
    int n_min = 0;
    Vec a;
    Vec b;

    int size() const noexcept { return static_cast<int>(b.size()); }
    int n_max() const noexcept { return n_min + size() - 1; }
    bool has(int n) const noexcept { return n >= n_min && n <= n_max(); }
    double a_at(int n) const;
    double b_at(int n) const;
    int local(int n) const noexcept { return n - n_min; }
    void validate() const;
};

struct DiscreteMeasure {
    Vec points;
    Vec weights;

    void validate() const;
};

JacobiWindow free_window(int n_min, int n_max);
// Coefficients on indices lo..hi (a(lo) included).
JacobiWindow restrict_window(const JacobiWindow& j, int lo, int hi);
// Part with n >= 0 (n_min = 0) and part with n <= -1.
JacobiWindow plus_part(const JacobiWindow& j);
JacobiWindow minus_part(const JacobiWindow& j);

Matrix dense(const JacobiWindow& j);
double norm_bound(const JacobiWindow& j);  // max row sum of |J|
// Number of eigenvalues below x (Sturm sequence).
int count_below(const JacobiWindow& j, double x);
bool near_spectrum(const JacobiWindow& j, double c, double tol);
double spectral_distance(const JacobiWindow& j, double c);
// Padding that makes boundary effects at the centre negligible.
int decay_margin(double dist, double norm);

// Spectral measure of the first (plus) or last (minus) basis vector.
DiscreteMeasure spectral_measure(const JacobiWindow& j, int n);
DiscreteMeasure spectral_measure_plus(const JacobiWindow& j);
double measure_resolvent(const DiscreteMeasure& m, double z);

// <(J - z)^{-1} e_n, e_n>; n defaults to the first index of the window.
double resolvent_r(const JacobiWindow& j, double z);
double resolvent_r(const JacobiWindow& j, double z, int n);
std::complex<double> resolvent_r(const JacobiWindow& j, std::complex<double> z);
// r_+ uses indices >= 0 at e_0, r_- uses indices <= -1 at e_{-1}.
double r_plus(const JacobiWindow& j, double z);
double r_minus(const JacobiWindow& j, double z);

// Recurrence coefficients b(0..depth), a(1..depth); a(0) is set to a0.
JacobiWindow lanczos_from_measure(const DiscreteMeasure& m, int depth, double a0 = 1.0);

struct KappaVector {
    double c = 0.0;
    double phi = 0.0;        // (-pi/2, pi/2]
    int n_min = 0;           // coordinates follow the window
    Vec vec;
    double norm2 = 0.0;      // ||kappa||^2
    double boundary = 0.0;   // max |kappa| at the two window ends
};

// angle with tan(phi) = r_+(c), computed from the two-sided resolvent
double phi_of_c(const JacobiWindow& j, double c);
KappaVector kappa(const JacobiWindow& j, double c, double tol = 1e-6);
// The same on the left half: tan(psi) = r_-(c), vector (J - c)^{-1}(e_0 a(0) sin psi + e_{-1} cos psi).
KappaVector kappa_minus(const JacobiWindow& j, double c, double tol = 1e-6);
double phi_prime_fd(const JacobiWindow& j, double c, double h = 0.0);

struct PhiBounds {
    double lower = 0.0;
    double upper = 0.0;
};
PhiBounds phi_prime_bounds(const JacobiWindow& j, double c);

struct PairingResult {
    double lhs = 0.0;  // <(J - J0) kappa, kappa0>
    double rhs = 0.0;  // sin(phi0 - phi)
};
PairingResult kappa_pairing(const JacobiWindow& j, const JacobiWindow& j0, double c);

struct TwoByTwo {
    Matrix2 r;               // [[R_{-1,-1}, R_{-1,0}], [R_{0,-1}, R_{00}]]
    double r_plus = 0.0;
    double r_minus = 0.0;
    double residual_00 = 0.0;    // -1/R00 against -1/r_+ + a(0)^2 r_-
    double residual_m1 = 0.0;    // -1/R_{-1,-1} against -1/r_- + a(0)^2 r_+
};
TwoByTwo two_by_two_resolvent(const JacobiWindow& j, double z);

enum class ExtKind { Zero, Regular, Pole };
ExtKind classify(double value, double zero_tol = 1e-12, double pole_tol = 1e12);
bool extension_predicate(ExtKind r_plus_at_c, ExtKind r_minus_at_c);

double dist_eta(const Vec& b, const Vec& bt, double eta);
// Jacobi windows aligned at the same n_min; weight eta^{2|n|}.
double dist_eta(const JacobiWindow& j, const JacobiWindow& jt, double eta);
// dist of the window shifted by s sites (first s dropped) against a reference.
double shifted_dist(const JacobiWindow& j, const JacobiWindow& ref, int s, double eta);

}  // namespace gmpflow::jac
