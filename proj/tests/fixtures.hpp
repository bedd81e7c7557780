#pragma once

#include <cmath>
#include <random>

#include "gmpflow/finite_gap.hpp"
#include "gmpflow/gmp_core.hpp"

namespace fx {

inline gmpflow::fg::GapSet two_band_set() { return {-2.0, 2.0, {{-1.0, 1.0}}}; }

inline gmpflow::fg::DeltaData two_band_delta() { return {2.0, 0.0, {{0.0, 4.0}}}; }

inline gmpflow::gmp::GmpBlock periodic_block() { return {{std::sqrt(2.0), 0.5}, {0.0, 0.0}}; }

inline gmpflow::gmp::GmpWindow periodic_base_window(int j_min, int j_max) {
    return gmpflow::gmp::periodic_window(periodic_block(), {0.0}, j_min, j_max);
}

inline double uniform(std::mt19937_64& rng, double lo, double hi) {
    return std::uniform_real_distribution<double>(lo, hi)(rng);
}

}  // namespace fx
