#pragma once

#include <vector>

#include "gmpflow/finite_gap.hpp"
#include "gmpflow/gmp_core.hpp"
#include "gmpflow/jacobi_core.hpp"

namespace gmpflow::construct {

using fg::DeltaData;
using gmp::GmpWindow;
using jac::DiscreteMeasure;
using jac::JacobiWindow;
using nk::Matrix;
using nk::Vec;

// Gram matrix of {1, 1/(c_g - x), ..., 1/(c_1 - x)} in L^2(m).
Matrix gram_D(const DiscreteMeasure& m, const Vec& C);
// Upper triangular L with positive diagonal and L^T D L = I.
Matrix factor_L(const Matrix& D);

// Orthonormal rational functions in one-sided order: index i stands for tau_{-i-1}.
// Function m(g+1)+k is Delta^m times the k-th function of the first system,
// orthogonalized against all earlier ones with a positive leading coefficient.
struct RationalBasis {
    int g = 1;
    int depth = 0;          // number of blocks
    Vec C;                  // ordering c_1..c_g
    Vec points;
    Vec weights;
    Matrix values;          // values(i, n) = tau_n(points[i])
    Vec lead;               // coefficient of Delta^m f_k in tau_{m(g+1)+k}, positive
    Matrix L;               // first block of coef, from factor_L(D)
    Matrix D;
    int size() const noexcept { return depth * (g + 1); }
};

RationalBasis tau_basis(const DiscreteMeasure& m, const DeltaData& d, const Vec& C, int depth);
// max |<tau_j, tau_k> - delta_jk|
double orthonormality_residual(const RationalBasis& rb);

// Entries int x tau_j tau_k dm in two-sided order: row 0 is scalar -depth(g+1), the last row is -1.
Matrix multiplication_matrix(const RationalBasis& rb, const DiscreteMeasure& m);

// Largest entry outside the GMP zero pattern of a matrix whose row 0 starts a block.
double gmp_pattern_leak(const Matrix& a, int g);

struct OneSidedReport {
    Matrix a;                     // multiplication_matrix
    double pattern_leak = 0.0;
    double class_residual = 0.0;  // against the class-A pattern rebuilt from its own blocks
    double c_hat_deviation = 0.0; // lower part of B_{-1} against m l^T + C_hat
    double p_formula_deviation = 0.0;
    double symmetry = 0.0;
};
OneSidedReport check_one_sided(const RationalBasis& rb, const DiscreteMeasure& m, const DeltaData& d);

struct JacobiToGmpOptions {
    int blocks = 6;               // output blocks -blocks+1 .. blocks-1
    double margin_rel = 1e-3;     // required dist(c_k, spectrum) relative to the spectral hull
    double dependence_tol = 1e-10;
};

struct GmpFromJacobi {
    GmpWindow window;
    Matrix a;                     // F^T J F on blocks -blocks .. blocks-1
    double class_residual = 0.0;  // on the interior blocks
    double orth_residual = 0.0;   // max |F^T F - I|
    double min_gs_ratio = 1.0;    // smallest residual ratio seen in Gram-Schmidt
    double edge_weight = 0.0;     // largest basis entry at the window ends
    int sign_flips = 0;
};
GmpFromJacobi jacobi_to_gmp(const JacobiWindow& j, const DeltaData& d, const Vec& C, const JacobiToGmpOptions& opt = {});

// Two-sided Jacobi window on -1-Dm .. Dp from the spectral measures of the two halves;
// Dp = j_max - 1, Dm = -2 - j_min.
JacobiWindow gmp_to_jacobi_measure(const GmpWindow& w);

}  // namespace gmpflow::construct
