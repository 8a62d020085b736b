#include "alab/io.hpp"

#include <cstdio>

namespace alab {

std::string format_double(double value) {
  char buffer[32];
  std::snprintf(buffer, sizeof buffer, "%.17g", value);
  return buffer;
}

void write_field_csv(std::ostream& out, const FieldSample& sample) {
  const LatticeBox& region = sample.region();
  const int d = region.dim();
  for (int a = 0; a < d; ++a) out << 'x' << (a + 1) << ',';
  out << "value\n";
  for (std::size_t i = 0; i < region.size(); ++i) {
    for (int s : region.site(i)) out << s << ',';
    out << format_double(sample[i]) << '\n';
  }
}

void write_mask_csv(std::ostream& out, const LatticeCube& cube,
                    std::span<const std::size_t> indices) {
  out << "index,";
  for (int a = 0; a < cube.axes(); ++a) out << 'c' << (a + 1) << ',';
  out << "distance\n";
  for (std::size_t i : indices) {
    out << i << ',';
    for (int a = 0; a < cube.axes(); ++a) out << format_double(cube.coordinate(i, a)) << ',';
    out << format_double(cube.distance_from_center(i)) << '\n';
  }
}

void write_combes_thomas_csv(std::ostream& out, const CombesThomasReport& report) {
  out << "x,y,distance,measured,envelope,envelope_particle_dim,ratio\n";
  for (const CombesThomasPair& p : report.pairs) {
    out << p.x << ',' << p.y << ',' << format_double(p.distance) << ','
        << format_double(p.measured) << ',' << format_double(p.envelope) << ','
        << format_double(p.envelope_particle_dim) << ',' << format_double(p.ratio) << '\n';
  }
}

void write_matrix_market(std::ostream& out, const SparseMatrix& matrix) {
  std::size_t entries = 0;
  for (Eigen::Index r = 0; r < matrix.outerSize(); ++r)
    for (SparseMatrix::InnerIterator it(matrix, r); it; ++it)
      if (it.col() <= r) ++entries;
  out << "%%MatrixMarket matrix coordinate real symmetric\n";
  out << matrix.rows() << ' ' << matrix.cols() << ' ' << entries << '\n';
  for (Eigen::Index r = 0; r < matrix.outerSize(); ++r)
    for (SparseMatrix::InnerIterator it(matrix, r); it; ++it)
      if (it.col() <= r) out << (r + 1) << ' ' << (it.col() + 1) << ' ' << format_double(it.value()) << '\n';
}

}  // namespace alab
