#include "alab/lanczos.hpp"

#include <Eigen/SparseCholesky>
#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <sstream>

#include "alab/errors.hpp"
#include "alab/rng.hpp"

namespace alab {

namespace {

using ColMatrix = Eigen::SparseMatrix<double, Eigen::ColMajor>;

enum class Want { Largest, LargestMagnitude };

double residual_norm(const SparseMatrix& a, const Eigen::VectorXd& v, double lambda) {
  return (a * v - lambda * v).norm();
}

EigenPairs dense_pairs(const SparseMatrix& a) {
  const Eigen::MatrixXd dense(a);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(dense);
  if (solver.info() != Eigen::Success) {
    throw NumericError("dense symmetric eigensolver failed", INFINITY);
  }
  EigenPairs out;
  out.dense = true;
  out.spectrum = solver.eigenvalues();
  out.values = solver.eigenvalues();
  out.vectors = solver.eigenvectors();
  return out;
}

void select_columns(EigenPairs& pairs, const SparseMatrix& a,
                    const std::vector<Eigen::Index>& order, double tol) {
  const auto k = static_cast<Eigen::Index>(order.size());
  Eigen::VectorXd values(k);
  Eigen::MatrixXd vectors(pairs.vectors.rows(), k);
  for (Eigen::Index i = 0; i < k; ++i) {
    values[i] = pairs.values[order[i]];
    vectors.col(i) = pairs.vectors.col(order[i]);
  }
  pairs.values = std::move(values);
  pairs.vectors = std::move(vectors);
  pairs.residuals.clear();
  double worst = 0.0;
  for (Eigen::Index i = 0; i < k; ++i) {
    const double r = residual_norm(a, pairs.vectors.col(i), pairs.values[i]);
    pairs.residuals.push_back(r);
    worst = std::max(worst, r);
  }
  if (worst > tol) {
    throw NumericError("dense eigenpairs miss the residual certificate", worst);
  }
}

// Thick-restart Lanczos on the operator (A - sigma)^-1. Ritz pairs of the
// operator are mapped back through Rayleigh quotients of A.
EigenPairs shift_invert_lanczos(const SparseMatrix& a, double sigma, int k, Want want,
                                const EigenOptions& opts) {
  const Eigen::Index n = a.rows();
  ColMatrix shifted = ColMatrix(a);
  for (Eigen::Index i = 0; i < n; ++i) shifted.coeffRef(i, i) -= sigma;
  shifted.makeCompressed();

  Eigen::SimplicialLDLT<ColMatrix> factor(shifted);
  if (factor.info() != Eigen::Success) {
    std::ostringstream msg;
    msg << "A - " << sigma << " I is singular to working precision";
    throw SpectralCollision(msg.str(), sigma, 0.0);
  }
  auto apply = [&factor](const Eigen::VectorXd& v) -> Eigen::VectorXd { return factor.solve(v); };

  const Eigen::Index m = std::min<Eigen::Index>(
      n, opts.krylov_dim > 0 ? opts.krylov_dim : std::max(2 * k + 20, 40));
  const Eigen::Index keep = std::min<Eigen::Index>(m - 1, k + std::max(k, 10));

  Engine engine = make_engine(opts.start_seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  auto random_vector = [&] {
    Eigen::VectorXd v(n);
    for (Eigen::Index i = 0; i < n; ++i) v[i] = normal(engine);
    return v;
  };

  Eigen::MatrixXd basis(n, m), image(n, m);
  Eigen::VectorXd start = random_vector();
  basis.col(0) = start.normalized();
  image.col(0) = apply(basis.col(0));
  Eigen::Index filled = 1;

  double best = INFINITY;
  for (int restart = 0; restart <= opts.max_restarts; ++restart) {
    while (filled < m) {
      Eigen::VectorXd w = image.col(filled - 1);
      const double before = w.norm();
      auto orthogonalize = [&](Eigen::VectorXd& v) {
        for (int pass = 0; pass < 2; ++pass) {
          v -= basis.leftCols(filled) * (basis.leftCols(filled).transpose() * v);
        }
      };
      orthogonalize(w);
      double norm = w.norm();
      if (!(norm > 1e-10 * before)) {
        // Invariant subspace found: continue with a fresh direction.
        w = random_vector();
        orthogonalize(w);
        norm = w.norm();
      }
      basis.col(filled) = w / norm;
      image.col(filled) = apply(basis.col(filled));
      ++filled;
    }

    Eigen::MatrixXd t = basis.transpose() * image;
    t = 0.5 * (t + t.transpose()).eval();
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> small(t);
    const Eigen::VectorXd& theta = small.eigenvalues();

    std::vector<Eigen::Index> order(static_cast<std::size_t>(m));
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](Eigen::Index x, Eigen::Index y) {
      return want == Want::Largest ? theta[x] > theta[y]
                                   : std::abs(theta[x]) > std::abs(theta[y]);
    });

    EigenPairs out;
    out.restarts = restart;
    out.values.resize(k);
    out.vectors.resize(n, k);
    double worst = 0.0;
    for (int i = 0; i < k; ++i) {
      Eigen::VectorXd x = basis * small.eigenvectors().col(order[i]);
      x.normalize();
      const double lambda = x.dot(a * x);
      const double r = residual_norm(a, x, lambda);
      out.values[i] = lambda;
      out.vectors.col(i) = x;
      out.residuals.push_back(r);
      worst = std::max(worst, r);
    }
    best = std::min(best, worst);
    if (worst <= opts.tolerance) {
      std::vector<Eigen::Index> asc(static_cast<std::size_t>(k));
      std::iota(asc.begin(), asc.end(), 0);
      std::stable_sort(asc.begin(), asc.end(),
                       [&](Eigen::Index x, Eigen::Index y) { return out.values[x] < out.values[y]; });
      EigenPairs sorted;
      sorted.restarts = restart;
      sorted.values.resize(k);
      sorted.vectors.resize(n, k);
      for (int i = 0; i < k; ++i) {
        sorted.values[i] = out.values[asc[i]];
        sorted.vectors.col(i) = out.vectors.col(asc[i]);
        sorted.residuals.push_back(out.residuals[asc[i]]);
      }
      return sorted;
    }
    if (m == n) break;  // the basis spans everything; restarting cannot help

    Eigen::MatrixXd y(m, keep);
    for (Eigen::Index i = 0; i < keep; ++i) y.col(i) = small.eigenvectors().col(order[i]);
    const Eigen::MatrixXd new_basis = basis * y;
    const Eigen::MatrixXd new_image = image * y;
    basis.leftCols(keep) = new_basis;
    image.leftCols(keep) = new_image;
    filled = keep;
  }
  std::ostringstream msg;
  msg << "Lanczos did not meet the residual certificate " << opts.tolerance
      << " after " << opts.max_restarts << " restarts";
  throw NumericError(msg.str(), best);
}

void check_k(const SparseMatrix& a, int k) {
  if (a.rows() != a.cols()) throw DomainError("eigensolver needs a square matrix");
  if (k < 1 || k > a.rows()) {
    std::ostringstream msg;
    msg << "requested k = " << k << " eigenpairs of a " << a.rows() << "-dimensional matrix";
    throw DomainError(msg.str());
  }
}

}  // namespace

double gershgorin_lower_bound(const SparseMatrix& a) {
  double bound = INFINITY;
  for (Eigen::Index r = 0; r < a.outerSize(); ++r) {
    double diag = 0.0, off = 0.0;
    for (SparseMatrix::InnerIterator it(a, r); it; ++it) {
      if (it.col() == r) diag += it.value();
      else off += std::abs(it.value());
    }
    bound = std::min(bound, diag - off);
  }
  return bound;
}

EigenPairs lowest_eigenpairs(const SparseMatrix& a, int k, const EigenOptions& opts) {
  check_k(a, k);
  if (static_cast<std::size_t>(a.rows()) < opts.dense_threshold) {
    EigenPairs pairs = dense_pairs(a);
    std::vector<Eigen::Index> order(static_cast<std::size_t>(k));
    std::iota(order.begin(), order.end(), 0);
    select_columns(pairs, a, order, opts.tolerance);
    return pairs;
  }
  const double lower = gershgorin_lower_bound(a);
  const double sigma = lower - 0.1 - 1e-3 * std::abs(lower);
  return shift_invert_lanczos(a, sigma, k, Want::Largest, opts);
}

EigenPairs nearest_eigenpairs(const SparseMatrix& a, double target, int k,
                              const EigenOptions& opts) {
  check_k(a, k);
  if (static_cast<std::size_t>(a.rows()) < opts.dense_threshold) {
    EigenPairs pairs = dense_pairs(a);
    std::vector<Eigen::Index> order(static_cast<std::size_t>(pairs.values.size()));
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](Eigen::Index x, Eigen::Index y) {
      return std::abs(pairs.values[x] - target) < std::abs(pairs.values[y] - target);
    });
    order.resize(static_cast<std::size_t>(k));
    std::sort(order.begin(), order.end());
    select_columns(pairs, a, order, opts.tolerance);
    return pairs;
  }
  return shift_invert_lanczos(a, target, k, Want::LargestMagnitude, opts);
}

}  // namespace alab
