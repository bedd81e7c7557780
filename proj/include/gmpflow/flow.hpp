#pragma once

#include <vector>

#include "gmpflow/gmp_core.hpp"
#include "gmpflow/jacobi_core.hpp"

namespace gmpflow::flow {

using gmp::GmpBlock;
using gmp::GmpWindow;
using nk::Matrix;
using nk::Matrix2;
using nk::Vec;

Matrix2 rotation_o(double phi);  // [[sin, cos], [cos, -sin]]

namespace testing {
// Mutation hook for the self-test: flips the sign of the lower-right entry of rotation_o.
void set_rotation_fault(bool on);
bool rotation_fault();
}  // namespace testing
Matrix u_block(const Vec& p);

// Angle of the pair (p_{g-1}, p_g).
double omega_angle(const GmpBlock& blk);
// O map by explicit conjugation; output blocks j_min+1..j_max, ordering (c_g, c_1, ..., c_{g-1}).
GmpWindow omega_step(const GmpWindow& w);
// Same blocks from the per-block closed forms.
GmpWindow omega_closed_form(const GmpWindow& w);

// Flow step from the closed forms; output blocks j_min..j_max-1.
GmpWindow jacobi_flow_step(const GmpWindow& w);
// Flow step by explicit conjugation S^{-1} U* A U S; output blocks j_min+1..j_max-1.
GmpWindow jacobi_flow_dense(const GmpWindow& w);

struct OdsInput {
    double a_in = 0.0;
    double b_in = 0.0;
};
struct OdsResult {
    GmpBlock state;
    double b_out = 0.0;
};
OdsInput ods_input(const GmpBlock& next, const Vec& C);
OdsResult ods_step(const GmpBlock& state, const Vec& C, const OdsInput& in);

struct StepDiagnostics {
    Vec lambda;            // Lambda_k of block 0
    double validity_min = 0.0;
    bool valid = false;
};

struct FlowTrajectory {
    std::vector<GmpWindow> states;     // A(0), A(1), ...
    std::vector<StepDiagnostics> diag; // one per state
    Vec a_out;                         // a(n) = |p_0(n)|
    Vec b_out;                         // b(n) = q_g^{(-1)}(n+1) p_g^{(-1)}(n+1)
    Vec b_ods;                         // the same b(n) from the open system form
    int first_invalid = -1;            // first state failing validate_gmp, -1 if none
};

struct FlowOptions {
    int margin = 1;          // blocks kept above block 0 at the last step
    bool strict = true;      // throw on validity loss
    double floor = 1e-8;
};

// Blocks needed above 0 for n steps.
int required_top(int n_steps, int margin);
FlowTrajectory flow_run(const GmpWindow& w, int n_steps, const FlowOptions& opt = {});
// a(0..N-1), b(0..N-2) as a one-sided window over the available range.
jac::JacobiWindow extract_jacobi(const FlowTrajectory& t);

// Max deviation between the closed-form and conjugation versions over common blocks.
double flow_identity_residual(const GmpWindow& w);
double omega_identity_residual(const GmpWindow& w);
// O(J A) against J(O A), modulo sign, over common blocks.
double omega_commutation_residual(const GmpWindow& w, int n_steps);

}  // namespace gmpflow::flow
