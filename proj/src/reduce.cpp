#include <cmath>

#include <Eigen/Dense>

#include "prospect/error.hpp"
#include "prospect/topics.hpp"

namespace prospect {

Reduction PcaReducer::reduce(const EmbeddingMatrix& x, std::size_t n_components,
                             std::uint64_t /*seed*/) const {
  if (n_components < 1 || n_components > x.dim()) {
    throw ContractError("n_components must lie in [1, " + std::to_string(x.dim()) + "], got " +
                        std::to_string(n_components));
  }
  if (x.rows() < n_components) {
    throw ContractError("need at least n_components rows to reduce (" +
                        std::to_string(x.rows()) + " < " + std::to_string(n_components) + ")");
  }
  const auto n = static_cast<Eigen::Index>(x.rows());
  const auto d = static_cast<Eigen::Index>(x.dim());
  const auto k = static_cast<Eigen::Index>(n_components);

  Eigen::MatrixXd data(n, d);
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto row = x.row(static_cast<std::size_t>(i));
    for (Eigen::Index j = 0; j < d; ++j) data(i, j) = row[static_cast<std::size_t>(j)];
  }
  const Eigen::RowVectorXd mean = data.colwise().mean();
  data.rowwise() -= mean;

  const Eigen::MatrixXd cov = (data.transpose() * data) / std::max<double>(1.0, double(n - 1));
  const double total_variance = cov.trace();

  Reduction out{EmbeddingMatrix(x.rows(), std::max<std::size_t>(n_components, 2)),
                std::vector<double>(n_components, 0.0)};
  if (!(total_variance > 0.0)) {
    // All rows identical: nothing to project.
    return out;
  }

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(cov);
  if (solver.info() != Eigen::Success) throw ContractError("PCA eigendecomposition failed");
  // Eigenvalues come back ascending.
  Eigen::MatrixXd axes(d, k);
  for (Eigen::Index c = 0; c < k; ++c) {
    const Eigen::Index src = d - 1 - c;
    Eigen::VectorXd v = solver.eigenvectors().col(src);
    Eigen::Index arg = 0;
    v.cwiseAbs().maxCoeff(&arg);
    if (v(arg) < 0) v = -v;
    axes.col(c) = v;
    out.explained_variance_ratio[static_cast<std::size_t>(c)] =
        std::max(0.0, solver.eigenvalues()(src)) / total_variance;
  }

  const Eigen::MatrixXd projected = data * axes;
  // A single requested axis is padded with a zero column to keep dim >= 2.
  const std::size_t out_dim = std::max<std::size_t>(n_components, 2);
  std::vector<float> values(x.rows() * out_dim, 0.0f);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index c = 0; c < k; ++c) {
      values[static_cast<std::size_t>(i) * out_dim + static_cast<std::size_t>(c)] =
          static_cast<float>(projected(i, c));
    }
  }
  out.matrix = EmbeddingMatrix(x.rows(), out_dim, std::move(values));
  return out;
}

EmbeddingMatrix reduce_dimensions(const EmbeddingMatrix& x, std::size_t n_components,
                                  std::uint64_t seed) {
  if (n_components < 2) throw ContractError("n_components must be at least 2");
  return PcaReducer{}.reduce(x, n_components, seed).matrix;
}

}  // namespace prospect
