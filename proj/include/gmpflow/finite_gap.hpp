#pragma once

#include <complex>
#include <utility>
#include <vector>

#include "gmpflow/numkit.hpp"

namespace gmpflow::fg {

using nk::Vec;

// E = [b0, a0] minus the open gaps (a_j, b_j), j = 1..g.
struct GapSet {
    double b0 = -2.0;
    double a0 = 2.0;
    std::vector<std::pair<double, double>> gaps;

    int g() const noexcept { return static_cast<int>(gaps.size()); }
    Vec a_points() const;  // a0, a_1..a_g
    Vec b_points() const;  // b0, b_1..b_g
    double diam() const noexcept { return a0 - b0; }
    void validate() const;
};

struct Pole {
    double c;
    double lambda;
};

// Delta(z) = lambda0 z + c0 + sum lambda_k / (c_k - z)
struct DeltaData {
    double lambda0 = 1.0;
    double c0 = 0.0;
    std::vector<Pole> poles;

    int g() const noexcept { return static_cast<int>(poles.size()); }
    Vec cs() const;
    void validate() const;
};

// c_{pi(1)}, ..., c_{pi(g)} for a 1-based permutation pi.
Vec apply_ordering(const DeltaData& d, const std::vector<int>& perm);
// residue lambda attached to pole c (exact match within 1e-12 relative).
double residue_at(const DeltaData& d, double c);

double poly_a(const GapSet& e, double z);
double poly_b(const GapSet& e, double z);
double delta_poly_ratio(const GapSet& e, double z);

Vec gap_zeros(const GapSet& e);
DeltaData delta_from_gaps(const GapSet& e);

double eval_delta(const DeltaData& d, double z);
std::complex<double> eval_delta(const DeltaData& d, std::complex<double> z);
double eval_delta_prime(const DeltaData& d, double z);

// One preimage of y per band, ascending.
Vec delta_inverse_points(const DeltaData& d, double y);
// Outer ends of Delta^{-1}([-2,2]).
std::pair<double, double> delta_hull(const DeltaData& d);

double eval_psi(const GapSet& e, double x);

}  // namespace gmpflow::fg
