#include "alab/spectral.hpp"

#include <Eigen/IterativeLinearSolvers>
#include <Eigen/SparseCholesky>
#include <unsupported/Eigen/IterativeSolvers>
#include <algorithm>
#include <atomic>
#include <cmath>
#include <map>
#include <optional>
#include <sstream>

#include "alab/errors.hpp"

namespace alab {

std::optional<double> SpectralData::gap_at(double energy) const {
  const std::vector<double>& values = spectrum.empty() ? lowest : spectrum;
  if (values.empty()) return std::nullopt;
  if (spectrum.empty() && energy > lowest.back()) return std::nullopt;
  auto it = std::lower_bound(values.begin(), values.end(), energy);
  double gap = INFINITY;
  if (it != values.end()) gap = std::min(gap, *it - energy);
  if (it != values.begin()) gap = std::min(gap, energy - *std::prev(it));
  return gap;
}

SpectralData spectral_bottom(const SparseMatrix& a, int k, const EigenOptions& opts) {
  const EigenPairs pairs = lowest_eigenpairs(a, k, opts);
  SpectralData out;
  out.dense = pairs.dense;
  out.lowest.assign(pairs.values.data(), pairs.values.data() + pairs.values.size());
  out.e0 = out.lowest.front();
  out.vectors = pairs.vectors;
  out.residuals = pairs.residuals;
  if (pairs.dense) {
    out.spectrum.assign(pairs.spectrum.data(), pairs.spectrum.data() + pairs.spectrum.size());
  }
  return out;
}

SpectralData spectral_bottom(const AssembledHamiltonian& h, int k, const EigenOptions& opts) {
  SpectralData out = spectral_bottom(h.matrix, k, opts);
  const double slack = 1e-9 * std::max(1.0, std::abs(h.gershgorin_lower));
  if (out.e0 < h.gershgorin_lower - slack) {
    std::ostringstream msg;
    msg << "smallest eigenvalue " << out.e0 << " lies below the Gershgorin bound "
        << h.gershgorin_lower;
    throw NumericError(msg.str(), h.gershgorin_lower - out.e0);
  }
  return out;
}

double distance_to_spectrum(const SparseMatrix& a, double energy, const SpectralData* hint,
                            const EigenOptions& opts) {
  if (hint) {
    if (auto gap = hint->gap_at(energy)) return *gap;
  }
  const SpectralData bottom = spectral_bottom(a, 1, opts);
  if (auto gap = bottom.gap_at(energy)) return *gap;
  try {
    const EigenPairs near = nearest_eigenpairs(a, energy, 1, opts);
    return std::abs(near.values[0] - energy);
  } catch (const SpectralCollision&) {
    return 0.0;
  }
}

std::string_view to_string(SolveMethod method) {
  return method == SolveMethod::Dense ? "dense" : "iterative";
}

namespace {

std::atomic<std::uint64_t> g_solves{0};
std::atomic<std::uint64_t> g_failures{0};
std::atomic<double> g_max_residual{0.0};

void record_solve(double residual, bool ok) {
  g_solves.fetch_add(1, std::memory_order_relaxed);
  if (!ok) g_failures.fetch_add(1, std::memory_order_relaxed);
  double current = g_max_residual.load(std::memory_order_relaxed);
  while (residual > current &&
         !g_max_residual.compare_exchange_weak(current, residual, std::memory_order_relaxed)) {
  }
}

using ColMatrix = Eigen::SparseMatrix<double, Eigen::ColMajor>;

}  // namespace

CertificateStats certificate_stats() {
  return {g_solves.load(), g_failures.load(), g_max_residual.load()};
}

void reset_certificate_stats() {
  g_solves = 0;
  g_failures = 0;
  g_max_residual = 0.0;
}

struct Resolvent::Impl {
  ColMatrix shifted;
  std::optional<Eigen::SimplicialLDLT<ColMatrix>> direct;
  std::optional<Eigen::ConjugateGradient<ColMatrix, Eigen::Lower | Eigen::Upper>> cg;
  std::optional<Eigen::MINRES<ColMatrix, Eigen::Lower | Eigen::Upper>> minres;

  Eigen::VectorXd solve(const Eigen::VectorXd& b) const {
    if (direct) return direct->solve(b);
    if (cg) return cg->solve(b);
    return minres->solve(b);
  }
};

Resolvent::Resolvent(const SparseMatrix& a, double energy, bool below_spectrum,
                     ResolventOptions opts)
    : a_(a),
      energy_(energy),
      below_spectrum_(below_spectrum),
      opts_(opts),
      method_(static_cast<std::size_t>(a.rows()) <= opts.direct_limit ? SolveMethod::Dense
                                                                       : SolveMethod::Iterative),
      impl_(std::make_unique<Impl>()) {
  impl_->shifted = ColMatrix(a);
  for (Eigen::Index i = 0; i < a.rows(); ++i) impl_->shifted.coeffRef(i, i) -= energy;
  impl_->shifted.makeCompressed();

  if (method_ == SolveMethod::Dense) {
    impl_->direct.emplace(impl_->shifted);
    if (impl_->direct->info() != Eigen::Success) {
      std::ostringstream msg;
      msg << "factorization of H - E failed at E = " << energy;
      if (below_spectrum_) throw NumericError(msg.str(), INFINITY);
      throw SpectralCollision(msg.str(), energy, 0.0);
    }
  } else if (below_spectrum_) {
    impl_->cg.emplace();
    impl_->cg->setTolerance(opts_.certificate * 1e-3);
    impl_->cg->setMaxIterations(opts_.max_iterations);
    impl_->cg->compute(impl_->shifted);
  } else {
    impl_->minres.emplace();
    impl_->minres->setTolerance(opts_.certificate * 1e-3);
    impl_->minres->setMaxIterations(opts_.max_iterations);
    impl_->minres->compute(impl_->shifted);
  }
}

Resolvent::~Resolvent() = default;

Eigen::MatrixXd Resolvent::solve_unit_columns(std::span<const std::size_t> columns) const {
  const Eigen::Index n = a_.rows();
  Eigen::MatrixXd out(n, static_cast<Eigen::Index>(columns.size()));
  Eigen::VectorXd b = Eigen::VectorXd::Zero(n);
  for (std::size_t c = 0; c < columns.size(); ++c) {
    const auto j = static_cast<Eigen::Index>(columns[c]);
    b.setZero();
    b[j] = 1.0;
    Eigen::VectorXd x = impl_->solve(b);
    Eigen::VectorXd r = b - impl_->shifted * x;
    double res = r.norm();
    for (int step = 0; step < opts_.refinement_steps && res > opts_.certificate; ++step) {
      x += impl_->solve(r);
      r = b - impl_->shifted * x;
      res = r.norm();
    }
    const bool ok = res <= opts_.certificate && std::isfinite(res);
    record_solve(std::isfinite(res) ? res : INFINITY, ok);
    if (!ok) {
      std::ostringstream msg;
      msg << "resolvent column " << j << " at E = " << energy_
          << " misses the residual certificate (" << res << " > " << opts_.certificate << ")";
      if (below_spectrum_) throw NumericError(msg.str(), res);
      throw SpectralCollision(msg.str(), energy_, 0.0);
    }
    max_residual_ = std::max(max_residual_, res);
    out.col(static_cast<Eigen::Index>(c)) = x;
  }
  return out;
}

double power_iteration_norm(const Eigen::MatrixXd& block, double tolerance, int max_iterations) {
  if (block.size() == 0) return 0.0;
  Eigen::VectorXd v(block.cols());
  for (Eigen::Index i = 0; i < v.size(); ++i) v[i] = 1.0 + 1e-3 * static_cast<double>(i % 7);
  v.normalize();
  double estimate = 0.0;
  for (int it = 0; it < max_iterations; ++it) {
    Eigen::VectorXd w = block.transpose() * (block * v);
    const double rayleigh = v.dot(w);
    const double norm = w.norm();
    if (norm == 0.0) return 0.0;
    v = w / norm;
    if (it > 0 && std::abs(rayleigh - estimate) <= tolerance * std::abs(rayleigh)) {
      return std::sqrt(std::max(0.0, rayleigh));
    }
    estimate = rayleigh;
  }
  throw NumericError("power iteration for the block norm did not converge",
                     std::abs(estimate));
}

double operator_norm(const Eigen::MatrixXd& block, const ResolventOptions& opts) {
  if (block.size() == 0) return 0.0;
  const auto small = static_cast<std::size_t>(std::min(block.rows(), block.cols()));
  if (small <= opts.dense_gram_limit) {
    const Eigen::MatrixXd gram = block.rows() <= block.cols()
                                     ? Eigen::MatrixXd(block * block.transpose())
                                     : Eigen::MatrixXd(block.transpose() * block);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(gram, Eigen::EigenvaluesOnly);
    return std::sqrt(std::max(0.0, solver.eigenvalues().maxCoeff()));
  }
  return power_iteration_norm(block, opts.power_tolerance, opts.power_max_iterations);
}

ResolventBlockNorm resolvent_block_norm(const SparseMatrix& a, double energy,
                                        std::span<const std::size_t> from,
                                        std::span<const std::size_t> to,
                                        const ResolventOptions& opts,
                                        const SpectralData* hint) {
  const double dist = distance_to_spectrum(a, energy, hint, opts.eigen);
  if (!(dist > opts.collision_tolerance)) {
    std::ostringstream msg;
    msg << "spectral collision: E = " << energy << " is within " << dist
        << " of the spectrum";
    throw SpectralCollision(msg.str(), energy, dist);
  }
  // E below the spectrum iff the gap equals e0 - E; decided from the hint
  // or a fresh bottom computation only when cheap to know.
  bool below = false;
  if (hint) below = energy < hint->e0;
  else below = energy < spectral_bottom(a, 1, opts.eigen).e0;

  ResolventBlockNorm out;
  out.energy = energy;
  out.spectral_distance = dist;
  out.columns = from.size();
  if (from.empty() || to.empty()) return out;

  const Resolvent resolvent(a, energy, below, opts);
  const Eigen::MatrixXd columns = resolvent.solve_unit_columns(from);
  Eigen::MatrixXd block(static_cast<Eigen::Index>(to.size()), columns.cols());
  for (std::size_t r = 0; r < to.size(); ++r) {
    block.row(static_cast<Eigen::Index>(r)) = columns.row(static_cast<Eigen::Index>(to[r]));
  }
  out.norm = operator_norm(block, opts);
  out.method = resolvent.method();
  out.max_residual = resolvent.max_residual();
  return out;
}

ResolventBlockNorm resolvent_block_norm(const AssembledHamiltonian& h, double energy,
                                        const RegionMask& from_mask,
                                        const RegionMask& to_mask,
                                        const ResolventOptions& opts,
                                        const SpectralData* hint) {
  const std::vector<std::size_t> from = mask_indices(h.cube, from_mask);
  const std::vector<std::size_t> to = mask_indices(h.cube, to_mask);
  ResolventBlockNorm out = resolvent_block_norm(h.matrix, energy, from, to, opts, hint);
  out.from_mask = from_mask;
  out.to_mask = to_mask;
  return out;
}

double combes_thomas_envelope(double energy, double e0, double gamma, int ambient_dim,
                              double distance) {
  const double eta = e0 - energy;
  if (!(eta > 0.0)) throw DomainError("Combes-Thomas envelope needs E < e0 (eta > 0)");
  if (!(gamma > 0.0 && gamma < 1.0)) {
    throw DomainError("Combes-Thomas gamma must lie in (0, 1)");
  }
  if (ambient_dim < 1) throw DomainError("Combes-Thomas dimension must be >= 1");
  const double root = std::sqrt(eta);
  return std::exp(gamma * std::sqrt(eta * ambient_dim) - gamma * root * distance) /
         ((1.0 - gamma * gamma) * eta);
}

CombesThomasReport verify_combes_thomas(const AssembledHamiltonian& h, double energy,
                                        double gamma,
                                        std::span<const std::pair<std::size_t, std::size_t>> pairs,
                                        const CombesThomasOptions& opts,
                                        const SpectralData* hint) {
  std::optional<SpectralData> own;
  if (!hint) {
    own = spectral_bottom(h, 1, opts.resolvent.eigen);
    hint = &*own;
  }
  CombesThomasReport report;
  report.energy = energy;
  report.e0 = hint->e0;
  report.eta = hint->e0 - energy;
  report.gamma = gamma;
  report.ambient_dim = h.cube.axes();
  report.particle_dim = h.cube.dim();
  if (!(report.eta >= opts.min_eta)) {
    std::ostringstream msg;
    msg << "Combes-Thomas check needs E <= e0 - " << opts.min_eta << " (eta = " << report.eta
        << ")";
    throw DomainError(msg.str());
  }
  if (!(gamma > 0.0 && gamma < 1.0)) throw DomainError("Combes-Thomas gamma must lie in (0, 1)");

  // One resolvent column per distinct y.
  std::map<std::size_t, std::size_t> column_of;
  for (const auto& [x, y] : pairs) {
    if (x >= h.dim() || y >= h.dim()) throw DomainError("Combes-Thomas pair outside the grid");
    column_of.emplace(y, 0);
  }
  std::vector<std::size_t> ys;
  for (auto& [y, slot] : column_of) {
    slot = ys.size();
    ys.push_back(y);
  }
  const Resolvent resolvent(h.matrix, energy, true, opts.resolvent);
  const Eigen::MatrixXd columns = resolvent.solve_unit_columns(ys);

  report.pairs.reserve(pairs.size());
  for (const auto& [x, y] : pairs) {
    CombesThomasPair row;
    row.x = x;
    row.y = y;
    row.distance = h.cube.distance(x, y);
    row.measured = std::abs(columns(static_cast<Eigen::Index>(x),
                                    static_cast<Eigen::Index>(column_of[y])));
    row.envelope = combes_thomas_envelope(energy, report.e0, gamma, report.ambient_dim, row.distance);
    row.envelope_particle_dim =
        combes_thomas_envelope(energy, report.e0, gamma, report.particle_dim, row.distance);
    row.ratio = row.measured / row.envelope;
    report.max_ratio = std::max(report.max_ratio, row.ratio);
    if (row.measured > row.envelope + opts.tolerance) report.violations.push_back(report.pairs.size());
    report.pairs.push_back(row);
  }
  return report;
}

std::vector<std::pair<std::size_t, std::size_t>> all_pairs(std::size_t size) {
  std::vector<std::pair<std::size_t, std::size_t>> out;
  out.reserve(size * size);
  for (std::size_t x = 0; x < size; ++x)
    for (std::size_t y = 0; y < size; ++y) out.emplace_back(x, y);
  return out;
}

}  // namespace alab
