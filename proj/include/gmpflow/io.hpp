#pragma once

#include <string>

#include "gmpflow/finite_gap.hpp"
#include "gmpflow/gmp_core.hpp"
#include "gmpflow/isospectral.hpp"
#include "gmpflow/jacobi_core.hpp"

// JSON text <-> core types. Parse errors carry line and column; schema errors name the field.
namespace gmpflow::io {

fg::GapSet gapset_from_json(const std::string& text, const std::string& source = "gapset");
fg::DeltaData delta_from_json(const std::string& text, const std::string& source = "deltadata");
gmp::GmpBlock block_from_json(const std::string& text, const std::string& source = "block");
gmp::GmpWindow window_from_json(const std::string& text, const std::string& source = "gmpwindow");
// A window, a single-block window or a point {"block", "C"}; the last two repeat over -width..width.
gmp::GmpWindow window_or_point_from_json(const std::string& text, int width, const std::string& source = "gmpwindow");
jac::JacobiWindow jacobi_from_json(const std::string& text, const std::string& source = "jacobiwindow");
jac::DiscreteMeasure measure_from_json(const std::string& text, const std::string& source = "measure");

std::string to_json(const fg::GapSet& e);
std::string to_json(const fg::DeltaData& d);
std::string to_json(const gmp::GmpBlock& b);
std::string to_json(const gmp::GmpWindow& w);
std::string to_json(const jac::JacobiWindow& j);
std::string to_json(const jac::DiscreteMeasure& m);
std::string to_json(const iso::IsPoint& pt);

// Shortest round-trip decimal form (at most 17 significant digits).
std::string format_double(double x);

}  // namespace gmpflow::io
