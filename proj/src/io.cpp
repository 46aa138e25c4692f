#include "spsolve/io.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

namespace spsolve {

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

Matrix read_dense_matrix(std::istream& is, const std::string& name) {
  Index rows = 0, cols = 0;
  if (!(is >> rows >> cols) || rows < 0 || cols < 0) {
    throw std::runtime_error(name + ": malformed header (expected 'rows cols')");
  }
  Matrix m(rows, cols);
  for (Index i = 0; i < rows; ++i) {
    for (Index j = 0; j < cols; ++j) {
      if (!(is >> m(i, j))) {
        std::ostringstream os;
        os << name << ": truncated at entry (" << i << "," << j << ")";
        throw std::runtime_error(os.str());
      }
    }
  }
  return m;
}

Matrix read_dense_matrix(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw std::runtime_error("cannot open " + path);
  return read_dense_matrix(f, path);
}

Vector read_dense_vector(const std::string& path) {
  Matrix m = read_dense_matrix(path);
  if (m.cols() != 1) {
    std::ostringstream os;
    os << path << ": expected a vector (cols = 1), got cols = " << m.cols();
    throw std::runtime_error(os.str());
  }
  return m.col(0);
}

void write_dense_matrix(std::ostream& os, const Matrix& m) {
  os << m.rows() << " " << m.cols() << "\n";
  for (Index i = 0; i < m.rows(); ++i) {
    for (Index j = 0; j < m.cols(); ++j) {
      if (j) os << " ";
      os << format_double(m(i, j));
    }
    os << "\n";
  }
}

void write_dense_matrix(const std::string& path, const Matrix& m) {
  std::ofstream f(path);
  if (!f) throw std::runtime_error("cannot write " + path);
  write_dense_matrix(f, m);
}

void write_dense_vector(const std::string& path, const Vector& v) {
  write_dense_matrix(path, Matrix(v));
}

}  // namespace spsolve
