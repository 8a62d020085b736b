#pragma once

#include <ostream>
#include <span>
#include <string>

#include "alab/field.hpp"
#include "alab/geometry.hpp"
#include "alab/hamiltonian.hpp"
#include "alab/spectral.hpp"

namespace alab {

/// Round-trip decimal text of a double (17 significant digits).
std::string format_double(double value);

/// Columns x1..xd, value.
void write_field_csv(std::ostream& out, const FieldSample& sample);

/// Columns index, c1..c{nd}, distance for the given grid indices.
void write_mask_csv(std::ostream& out, const LatticeCube& cube,
                    std::span<const std::size_t> indices);

/// Columns x, y, distance, measured, envelope, envelope_particle_dim, ratio.
void write_combes_thomas_csv(std::ostream& out, const CombesThomasReport& report);

/// MatrixMarket coordinate real symmetric, lower triangle, 1-based.
void write_matrix_market(std::ostream& out, const SparseMatrix& matrix);

}  // namespace alab
