#pragma once

#include <map>
#include <string>
#include <vector>

#include "gmpflow/numkit.hpp"

namespace gmpflow::gmp {

using nk::Matrix;
using nk::Matrix2;
using nk::Vec;

struct GmpBlock {
    Vec p;  // p_0..p_g
    Vec q;  // q_0..q_g

    int g() const noexcept { return static_cast<int>(p.size()) - 1; }
    double norm_p() const { return nk::norm2(p); }
    // |d_k p| = |(p_k, ..., p_g)|
    double tail_norm(int k) const;
    void validate() const;
};

// Blocks j_min..j_max; block j holds scalar indices j(g+1)..j(g+1)+g.
struct GmpWindow {
    int g = 1;
    Vec C;  // ordered poles c_1..c_g
    int j_min = 0;
    std::vector<GmpBlock> blocks;

    int j_max() const noexcept { return j_min + static_cast<int>(blocks.size()) - 1; }
    int size() const noexcept { return static_cast<int>(blocks.size()); }
    bool has(int j) const noexcept { return j >= j_min && j <= j_max(); }
    const GmpBlock& at(int j) const;
    GmpBlock& at(int j);
    int dim() const noexcept { return size() * (g + 1); }
    // position of scalar index n in assemble_dense
    int dense_index(int n) const noexcept { return n - j_min * (g + 1); }
    void validate() const;
};

GmpWindow periodic_window(const GmpBlock& blk, const Vec& C, int j_min, int j_max);
// block j <- block j+1 (conjugation by the shift S^{g+1})
GmpWindow block_shift(const GmpWindow& w);
// keep blocks lo..hi
GmpWindow restrict_window(const GmpWindow& w, int lo, int hi);

// canonical representative under (p_m, q_m) ~ (-p_m, -q_m), m < g
GmpBlock canonical_sign(const GmpBlock& blk);
double block_distance(const GmpBlock& a, const GmpBlock& b);          // max abs
double block_distance_mod_sign(const GmpBlock& a, const GmpBlock& b);

Matrix build_block_B(const GmpBlock& blk, const Vec& C);
Matrix assemble_dense(const GmpWindow& w);

// Reads blocks lo..hi of a class-A matrix whose row 0 is scalar index
// base_block*(g+1). Block p-vectors come from the last row of the previous block,
// so lo > base_block.
GmpWindow extract_window(const Matrix& m, int g, const Vec& C, int base_block, int lo, int hi);
// Max deviation of m from the class-A pattern rebuilt from its own coefficients,
// over blocks base_block+1..; coupling rows of the first block are included.
double class_a_residual(const Matrix& m, int g, const Vec& C, int base_block = 0);

Matrix2 j_matrix();  // [[0,-1],[1,0]]
Matrix2 bp_factor(double z, double c, double p, double q);
Matrix2 bp_factor_inf(double z, double p, double q);

Matrix2 transfer_matrix(const GmpBlock& blk, const Vec& C, double z);
Matrix2 transfer_via_resolvent(const GmpBlock& blk, const Vec& C, double z);
// M_0 = B - p q^T; upper triangular with diagonal (c_1..c_g, 0)
Matrix upper_chain_m0(const GmpBlock& blk, const Vec& C);

double lambda_k(const GmpBlock& blk, const Vec& C, int k);  // k = 1..g
double lambda_sharp(const GmpBlock& next, const GmpBlock& cur, const Vec& C, int k);
// q_g - sum_j p_j q_j / p_g recomputed through the factor product
double alternative_qg(const GmpBlock& blk, const Vec& C);

struct ValidityReport {
    bool valid = false;
    bool insufficient = false;
    Vec min_per_k;       // k = 1..g
    int worst_k = 0;     // 1-based, 0 if none
    int worst_j = 0;
    std::string message;
};

ValidityReport validate_gmp(const GmpWindow& w, double floor = 1e-8);

struct ResolventColumn {
    int k = 1;
    std::map<int, double> entries;     // scalar index -> value, blocks -1..1
    double support_residual = 0.0;     // residual of the rows of blocks -2 and 2
    double lambda_sharp_m1 = 0.0;      // Lambda#_{-1,k}
    double lambda_sharp_0 = 0.0;       // Lambda#_{0,k}
    std::map<int, double> closed_form; // entries given in closed form
};

ResolventColumn resolvent_column(const GmpWindow& w, int k);

}  // namespace gmpflow::gmp
