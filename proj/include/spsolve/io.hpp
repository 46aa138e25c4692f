#pragma once

#include "spsolve/linops.hpp"

#include <iosfwd>
#include <string>

namespace spsolve {

// Dense text format: first line "rows cols", then rows lines of
// whitespace-separated decimal floats.  Vectors are stored with cols = 1.
Matrix read_dense_matrix(const std::string& path);
Vector read_dense_vector(const std::string& path);

void write_dense_matrix(const std::string& path, const Matrix& m);
void write_dense_vector(const std::string& path, const Vector& v);

void write_dense_matrix(std::ostream& os, const Matrix& m);
Matrix read_dense_matrix(std::istream& is, const std::string& name);

// Round-trip-safe float formatting (17 significant digits).
std::string format_double(double v);

}  // namespace spsolve
