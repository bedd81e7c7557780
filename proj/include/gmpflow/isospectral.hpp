#pragma once

#include "gmpflow/finite_gap.hpp"
#include "gmpflow/gmp_core.hpp"

namespace gmpflow::iso {

using fg::DeltaData;
using gmp::GmpBlock;
using nk::Matrix;
using nk::Vec;

// (lambda0 p_g - 1, lambda0 sum_{j=0..g} p_j q_j + c0, Lambda_k - lambda_k), k = 1..g.
// C is the ordering of the poles of Delta used by the block.
Vec is_residual(const GmpBlock& blk, const Vec& C, const DeltaData& d);
double residual_norm(const Vec& r);  // max abs
// max |tr T(z) - Delta(z)| over the given sample points
double trace_mismatch(const GmpBlock& blk, const Vec& C, const DeltaData& d, const Vec& z);
// sample points in the gaps and outside the hull, away from poles
Vec trace_samples(const DeltaData& d, int n);

struct IsPoint {
    GmpBlock blk;
    Vec C;
    DeltaData d;
    Vec residual;
    double residual_max = 0.0;
    int iterations = 0;
};

struct SolveOptions {
    double tol = 1e-10;
    int max_iter = 100;
};
// Gauss-Newton with p_g = 1/lambda0 fixed; minimum-norm steps with halving.
IsPoint solve_is_point(const DeltaData& d, const Vec& C, const GmpBlock& seed, const SolveOptions& opt = {});

// Jacobian of the full residual in coordinates (p_0, q_0, ..., p_g, q_g), analytic.
Matrix residual_jacobian(const GmpBlock& blk, const Vec& C, const DeltaData& d);

struct IsJacobian {
    Matrix t;            // d Lambda_k / d(p_0, q_0, ..., p_{g-1}, q_{g-1}), analytic
    Matrix t_fd;         // central differences, step h
    double fd_gap = 0.0; // max relative deviation between the two
    double sigma_min = 0.0;
};
IsJacobian is_jacobian(const GmpBlock& blk, const Vec& C, const DeltaData& d, double h = 1e-6);

struct MagicReport {
    double deviation = 0.0;   // max deviation of central rows from S^{g+1} + S^{-(g+1)}
    int rows_checked = 0;
    int blocks = 0;
    int margin = 0;
};
// Delta(A) for the periodic window of the point, dense.
MagicReport magic_check(const IsPoint& pt, int window_blocks, int margin);
MagicReport magic_check(const GmpBlock& blk, const Vec& C, const DeltaData& d, int window_blocks, int margin);

struct DistanceResult {
    double distance = 0.0;
    IsPoint nearest;
    int iterations = 0;
};
// Nearest surface point in the Euclidean metric on (p_0, q_0, ..., p_g, q_g).
DistanceResult is_distance(const GmpBlock& blk, const Vec& C, const DeltaData& d, const SolveOptions& opt = {});

}  // namespace gmpflow::iso
