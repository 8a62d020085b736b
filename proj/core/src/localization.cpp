#include "alab/localization.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <sstream>

#include "alab/errors.hpp"
#include "alab/stats.hpp"

namespace alab {

std::vector<DecayFit> eigenfunction_decay_fit(const LatticeCube& cube,
                                              const Eigen::MatrixXd& vectors,
                                              std::span<const double> eigenvalues,
                                              double noise_floor) {
  if (static_cast<std::size_t>(vectors.rows()) != cube.size()) {
    throw DomainError("eigenvector length does not match the cube grid");
  }
  if (eigenvalues.size() != static_cast<std::size_t>(vectors.cols())) {
    throw DomainError("eigenvalue count does not match the eigenvector count");
  }
  const double h = cube.spacing();
  std::vector<DecayFit> fits;
  for (Eigen::Index c = 0; c < vectors.cols(); ++c) {
    DecayFit fit;
    fit.index = static_cast<std::size_t>(c);
    fit.eigenvalue = eigenvalues[static_cast<std::size_t>(c)];
    Eigen::Index peak = 0;
    const double top = vectors.col(c).cwiseAbs().maxCoeff(&peak);
    fit.peak = static_cast<std::size_t>(peak);
    if (!(top > 0.0)) {
      fits.push_back(fit);
      continue;
    }

    // Max |psi| per distance shell (in grid steps), then the tail maximum.
    std::vector<double> shell;
    for (std::size_t i = 0; i < cube.size(); ++i) {
      const auto r = static_cast<std::size_t>(std::llround(cube.distance(fit.peak, i) / h));
      if (r >= shell.size()) shell.resize(r + 1, 0.0);
      shell[r] = std::max(shell[r], std::abs(vectors(static_cast<Eigen::Index>(i), c)));
    }
    for (std::size_t r = shell.size(); r-- > 1;) shell[r - 1] = std::max(shell[r - 1], shell[r]);

    std::vector<double> xs, ys;
    for (std::size_t r = 0; r < shell.size(); ++r) {
      if (!(shell[r] > noise_floor * top)) break;
      xs.push_back(static_cast<double>(r) * h);
      ys.push_back(std::log(shell[r]));
    }
    fit.points = xs.size();
    if (xs.size() >= 3) {
      const LinearFit line = fit_line(xs, ys);
      fit.rate = -line.slope;
      fit.r_squared = line.r_squared;
    }
    fit.localized = fit.rate > 0.0 && fit.r_squared >= 0.5;
    fits.push_back(fit);
  }
  return fits;
}

DynamicalMomentTrace dynamical_moment(const AssembledHamiltonian& h,
                                      const DynamicalMomentSpec& spec) {
  const std::size_t dim = h.dim();
  if (dim > kDynamicsDimensionCap) {
    std::ostringstream msg;
    msg << "dynamical moment needs a full diagonalization; dimension " << dim
        << " exceeds the cap " << kDynamicsDimensionCap;
    throw ResourceError(msg.str());
  }
  if (!(spec.s > 0.0)) throw DomainError("moment exponent s must be > 0");
  for (double t : spec.times) {
    if (!(t >= 0.0) || !std::isfinite(t)) throw DomainError("times must be finite and >= 0");
  }
  for (std::size_t k : spec.region) {
    if (k >= dim) throw DomainError("initial region K is not contained in the cube");
  }

  DynamicalMomentTrace out;
  out.times = spec.times;
  out.values.assign(spec.times.size(), 0.0);

  const Eigen::MatrixXd dense(h.matrix);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(dense);
  if (solver.info() != Eigen::Success) throw NumericError("dense eigensolver failed", INFINITY);
  const Eigen::VectorXd& lambda = solver.eigenvalues();

  std::vector<Eigen::Index> inside;
  for (Eigen::Index a = 0; a < lambda.size(); ++a) {
    if (lambda[a] >= spec.e_low && lambda[a] <= spec.e_high) inside.push_back(a);
  }
  out.projected_states = inside.size();
  if (inside.empty() || spec.region.empty() || spec.times.empty()) {
    if (!spec.times.empty()) out.argmax_time = spec.times.front();
    return out;
  }

  const auto p = static_cast<Eigen::Index>(inside.size());
  const auto nk = static_cast<Eigen::Index>(spec.region.size());
  Eigen::MatrixXd phi(static_cast<Eigen::Index>(dim), p);
  for (Eigen::Index a = 0; a < p; ++a) phi.col(a) = solver.eigenvectors().col(inside[a]);

  Eigen::VectorXd weight(static_cast<Eigen::Index>(dim));
  for (std::size_t i = 0; i < dim; ++i) {
    double r = 0.0;
    for (int a = 0; a < h.cube.axes(); ++a) r = std::max(r, std::abs(h.cube.coordinate(i, a)));
    weight[static_cast<Eigen::Index>(i)] = std::pow(r, 2.0 * spec.s);
  }
  const Eigen::MatrixXd q = phi.transpose() * weight.asDiagonal() * phi;
  Eigen::MatrixXd b(p, nk);
  for (Eigen::Index k = 0; k < nk; ++k) {
    b.col(k) = phi.row(static_cast<Eigen::Index>(spec.region[static_cast<std::size_t>(k)]))
                   .transpose();
  }
  const Eigen::MatrixXcd qc = q.cast<std::complex<double>>();

  out.max_value = -1.0;
  for (std::size_t ti = 0; ti < spec.times.size(); ++ti) {
    const double t = spec.times[ti];
    Eigen::MatrixXcd c(p, nk);
    for (Eigen::Index a = 0; a < p; ++a) {
      const std::complex<double> phase = std::polar(1.0, -lambda[inside[a]] * t);
      c.row(a) = phase * b.row(a).cast<std::complex<double>>();
    }
    Eigen::MatrixXcd m = c.adjoint() * qc * c;
    m = 0.5 * (m + m.adjoint()).eval();
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> small(m, Eigen::EigenvaluesOnly);
    const double value = std::sqrt(std::max(0.0, small.eigenvalues().maxCoeff()));
    out.values[ti] = value;
    if (value > out.max_value) {
      out.max_value = value;
      out.argmax_time = t;
    }
  }
  return out;
}

std::vector<double> log_time_grid(double t_min, double t_max, std::size_t count) {
  if (!(t_min > 0.0) || !(t_max > t_min) || count < 2) {
    throw DomainError("log time grid needs 0 < t_min < t_max and at least 2 points");
  }
  std::vector<double> out(count);
  const double ratio = std::log(t_max / t_min);
  for (std::size_t i = 0; i < count; ++i) {
    out[i] = t_min * std::exp(ratio * static_cast<double>(i) / static_cast<double>(count - 1));
  }
  out.back() = t_max;
  return out;
}

std::vector<double> refine_time_grid(std::span<const double> times) {
  std::vector<double> out;
  out.reserve(2 * times.size());
  for (std::size_t i = 0; i < times.size(); ++i) {
    if (i > 0) {
      const double a = times[i - 1], b = times[i];
      out.push_back(a > 0.0 && b > 0.0 ? std::sqrt(a * b) : 0.5 * (a + b));
    }
    out.push_back(times[i]);
  }
  return out;
}

std::vector<std::size_t> neighbourhood(const LatticeCube& cube, std::size_t center,
                                       double radius) {
  if (center >= cube.size()) throw DomainError("neighbourhood center outside the cube");
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < cube.size(); ++i) {
    if (cube.distance(center, i) <= radius + 1e-12) out.push_back(i);
  }
  return out;
}

}  // namespace alab
