#pragma once

#include <string>
#include <vector>

#include "gmpflow/finite_gap.hpp"
#include "gmpflow/flow.hpp"
#include "gmpflow/gmp_core.hpp"

namespace gmpflow::ks {

using fg::DeltaData;
using gmp::GmpWindow;
using nk::Matrix;
using nk::Vec;

// Delta(A) on a finite window, evaluated by dense inverses. Rows and columns cover scalar
// indices j_min(g+1)+g .. j_max(g+1)+g-1; blocks at least `margin` away from both ends are trusted.
// v_j is the block (j-1, j), w_j the block (j, j); v blocks are sign-normalized to a positive diagonal.
struct DeltaBlocks {
    int g = 1;
    int j_min = 0, j_max = 0;   // window
    int trusted_lo = 0, trusted_hi = 0;
    int first_scalar = 0;
    Matrix delta;
    Vec sign;                   // diagonal sign conjugation applied, per scalar index
    double band_leak = 0.0;     // largest entry outside the 2g+3 diagonals on trusted rows

    double at(int r, int c) const;       // scalar indices, normalized
    bool trusted(int j) const noexcept { return j >= trusted_lo && j <= trusted_hi; }
    Matrix v(int j) const;               // needs j-1, j trusted
    Matrix w(int j) const;
    double col_norm2(int n) const;       // over the band; needs the neighbouring blocks trusted
};

DeltaBlocks delta_of_gmp(const GmpWindow& w, const DeltaData& d, int margin);

// 1/2 tr(v0^T v0 + w0^2 + v1 v1^T) - (g+1) - log det v0 v1
double h_term(const Matrix& v0, const Matrix& w0, const Matrix& v1);
double h_at(const DeltaBlocks& db, int j);
// sum of h_j over j0..j1
double H_plus_partial(const DeltaBlocks& db, int j0, int j1);
// 1/2 |Delta e_{m(g+1)-1}|^2 - 1 - log |v^{(m-1)}_{gg} v^{(m)}_{gg}|
double d_term(const DeltaBlocks& db, int m);

// d_term at m = 0 of the flowed window
double delta_J_H(const GmpWindow& w, const DeltaData& d, int margin);

struct FlowIdentityReport {
    int n_blocks = 0;
    double H_A = 0.0;
    double H_JA = 0.0;
    double d0 = 0.0;     // delta_J H_+(A)
    double dN = 0.0;     // boundary term at the far end of the range
    double residual = 0.0;
};
// H_N(A) = H_N(JA) + d(JA, 0) - d(JA, N) with H_N = sum_{j=0}^{N-1} h_j
FlowIdentityReport flow_functional_identity(const GmpWindow& w, const DeltaData& d, int n_blocks, int margin);

struct TelescopingReport {
    int n = 0;
    double lhs = 0.0, rhs = 0.0, residual = 0.0;
    double det_lhs = 0.0, det_rhs = 0.0, det_residual = 0.0;   // determinant chain, relative
    Vec tilde_H_A;     // partial sums for A, m = 1..n
    Vec tilde_H_A1;    // for the block-shifted window
    Vec h0;            // h(v_0(m), w_0(m), v_1(m)), m = 0..n
};
// Htilde_n(A) + h_0(A(n)) = h_0(A(0)) + Htilde_n(A_1), A_1 = block shift of A
TelescopingReport telescoping_check(const GmpWindow& w, const DeltaData& d, int n, int margin);
// Blocks above 0 needed by telescoping_check.
int telescoping_required_top(int n, int margin);

struct Sequence {
    std::string name;
    Vec values;
    Vec partial;      // running sums of squares
    bool diverging = false;
};

struct KsDiagnostics {
    std::vector<Sequence> seq;
    bool any_diverging = false;
};

// all steps of the trajectory; C is read from the states
KsDiagnostics ks_diagnostics(const flow::FlowTrajectory& t, const DeltaData& d);
bool diverging_trend(const Vec& partial);

struct DensityReport {
    Vec x;                     // preimages of y
    double det_w = 0.0;
    double det_w_cauchy = 0.0;
    double prod_dprime = 0.0;
    double prod_dprime_formula = 0.0;
    double rel_err_det = 0.0;
    double rel_err_prod = 0.0;
};
// Delta(x) = sum lam_k / (c_k - x)
DensityReport density_identity(const Vec& c, const Vec& lam, double y);

}  // namespace gmpflow::ks
