#include "alab/hamiltonian.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "alab/errors.hpp"

namespace alab {

std::string_view to_string(InteractionProfile profile) {
  return profile == InteractionProfile::Step ? "step" : "hat";
}

InteractionProfile parse_interaction_profile(std::string_view text) {
  if (text == "step") return InteractionProfile::Step;
  if (text == "hat") return InteractionProfile::Hat;
  throw ConfigError("unknown interaction profile '" + std::string(text) +
                    "' (expected step or hat)");
}

double InteractionSpec::phi(double r) const noexcept {
  if (r > r0 || r < 0.0) return 0.0;
  if (profile == InteractionProfile::Step) return u0;
  return r0 > 0.0 ? u0 * (1.0 - r / r0) : u0;
}

void InteractionSpec::validate() const {
  if (!(u0 >= 0.0)) throw DomainError("interaction amplitude u0 must be >= 0");
  if (!(r0 >= 0.0)) throw DomainError("interaction range r0 must be >= 0");
}

double interaction_energy(std::span<const double> x, int n, int d,
                          const InteractionSpec& spec) {
  double u = 0.0;
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) {
      double r = 0.0;
      for (int a = 0; a < d; ++a) r = std::max(r, std::abs(x[i * d + a] - x[j * d + a]));
      u += spec.phi(r);
    }
  }
  return u;
}

namespace {

// cells[k][a] = lattice cell per grid line j for coordinate a of particle k.
std::vector<std::vector<std::vector<int>>> particle_cells(const LatticeCube& cube) {
  const int n = cube.particles(), d = cube.dim(), m = cube.points_per_axis();
  std::vector<std::vector<std::vector<int>>> cells(n, std::vector<std::vector<int>>(d));
  for (int k = 0; k < n; ++k) {
    for (int a = 0; a < d; ++a) {
      auto& line = cells[k][a];
      line.resize(m);
      for (int j = 0; j < m; ++j) line[j] = field_cell(cube.center()[k * d + a] + cube.offset(j));
    }
  }
  return cells;
}

}  // namespace

LatticeBox required_field_region(const LatticeCube& cube) {
  const int d = cube.dim();
  const auto cells = particle_cells(cube);
  std::vector<int> lo(d), hi(d);
  for (int a = 0; a < d; ++a) {
    lo[a] = cells[0][a].front();
    hi[a] = cells[0][a].back();
    for (const auto& particle : cells) {
      lo[a] = std::min(lo[a], particle[a].front());
      hi[a] = std::max(hi[a], particle[a].back());
    }
  }
  std::vector<int> ext(d);
  for (int a = 0; a < d; ++a) ext[a] = hi[a] - lo[a] + 1;
  return LatticeBox(std::move(lo), std::move(ext));
}

AssembledHamiltonian assemble(const LatticeCube& cube, const FieldSample& field,
                              const InteractionSpec& interaction) {
  if (field.region().dim() != cube.dim()) {
    throw DomainError("field dimension does not match the cube's single-particle dimension");
  }
  // Every particle projection must be covered by the field region.
  const int d = cube.dim();
  const auto cells = particle_cells(cube);
  std::vector<std::vector<int>> missing;
  std::size_t missing_count = 0;
  for (const auto& particle : cells) {
    std::vector<int> ext(d);
    std::vector<int> lo(d);
    for (int a = 0; a < d; ++a) {
      lo[a] = particle[a].front();
      ext[a] = particle[a].back() - particle[a].front() + 1;
    }
    const LatticeBox box(lo, ext);
    for (std::size_t i = 0; i < box.size(); ++i) {
      std::vector<int> s = box.site(i);
      if (!field.covers(s)) {
        ++missing_count;
        if (missing.size() < 8 &&
            std::find(missing.begin(), missing.end(), s) == missing.end()) {
          missing.push_back(std::move(s));
        }
      }
    }
  }
  if (missing_count > 0) {
    std::ostringstream msg;
    msg << "field region does not cover the cube projection; missing sites:";
    for (const auto& s : missing) {
      msg << " (";
      for (int a = 0; a < d; ++a) msg << (a ? "," : "") << s[a];
      msg << ")";
    }
    if (missing_count > missing.size()) msg << " ... (" << missing_count << " total)";
    throw DomainError(msg.str());
  }
  return assemble(cube, [&field](std::span<const int> s) { return field.at(s); }, interaction);
}

AssembledHamiltonian assemble(const LatticeCube& cube, const SitePotential& potential,
                              const InteractionSpec& interaction) {
  interaction.validate();
  const int n = cube.particles(), d = cube.dim(), axes = cube.axes();
  const std::size_t size = cube.size();
  const double h2 = cube.spacing() * cube.spacing();
  const double hop = -1.0 / h2;
  const double kinetic = 2.0 * axes / h2;
  const auto cells = particle_cells(cube);

  AssembledHamiltonian out{cube, interaction, SparseMatrix(size, size),
                           Eigen::VectorXd(size), Eigen::VectorXd(size), 0.0};

  std::vector<Eigen::Triplet<double>> triplets;
  triplets.reserve(size * (2 * axes + 1));
  std::vector<int> site(d);
  std::vector<double> x(axes);
  double gersh = std::numeric_limits<double>::infinity();

  for (std::size_t i = 0; i < size; ++i) {
    double v = 0.0;
    for (int k = 0; k < n; ++k) {
      for (int a = 0; a < d; ++a) site[a] = cells[k][a][cube.grid_index(i, k * d + a)];
      v += potential(site);
    }
    if (!(v >= 0.0)) {
      throw DomainError("site potential must be non-negative and finite");
    }
    for (int a = 0; a < axes; ++a) x[a] = cube.coordinate(i, a);
    const double u = n > 1 ? interaction_energy(x, n, d, interaction) : 0.0;
    out.potential[i] = v;
    out.interaction_part[i] = u;

    // Neighbours in increasing column order keep each CSR row sorted.
    int neighbours = 0;
    for (int a = 0; a < axes; ++a) {
      if (cube.grid_index(i, a) > 0) {
        triplets.emplace_back(i, i - cube.stride(a), hop);
        ++neighbours;
      }
    }
    triplets.emplace_back(i, i, kinetic + v + u);
    for (int a = axes - 1; a >= 0; --a) {
      if (cube.grid_index(i, a) + 1 < cube.points_per_axis()) {
        triplets.emplace_back(i, i + cube.stride(a), hop);
        ++neighbours;
      }
    }
    gersh = std::min(gersh, kinetic + v + u - neighbours / h2);
  }
  out.matrix.setFromTriplets(triplets.begin(), triplets.end());
  out.matrix.makeCompressed();
  out.gershgorin_lower = gersh;
  return out;
}

std::vector<double> kronecker_sum_spectrum(std::span<const double> single, int n) {
  if (n < 1) throw DomainError("kronecker sum needs n >= 1");
  std::vector<double> sums{0.0};
  for (int k = 0; k < n; ++k) {
    std::vector<double> next;
    next.reserve(sums.size() * single.size());
    for (double s : sums)
      for (double l : single) next.push_back(s + l);
    sums = std::move(next);
  }
  std::sort(sums.begin(), sums.end());
  return sums;
}

std::vector<double> kronecker_sum_oracle(const AssembledHamiltonian& h1, int n) {
  if (h1.interaction.interacting()) {
    throw DomainError("kronecker_sum_oracle applies only to the non-interacting case (u0 = 0)");
  }
  if (h1.cube.particles() != 1) {
    throw DomainError("kronecker_sum_oracle expects a one-particle Hamiltonian");
  }
  const Eigen::MatrixXd dense = Eigen::MatrixXd(h1.matrix);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(dense, Eigen::EigenvaluesOnly);
  const Eigen::VectorXd& ev = solver.eigenvalues();
  return kronecker_sum_spectrum(std::span<const double>(ev.data(), ev.size()), n);
}

}  // namespace alab
