#include "hsdm/normalizer.hpp"

#include <fmt/format.h>

#include "hsdm/errors.hpp"

namespace hsdm {

Normalizer fit_normalizer(const Matrix& features) {
  if (features.rows() == 0) throw EmptyInputError("fit_normalizer: no rows");
  return Normalizer{features.colwise().minCoeff(), features.colwise().maxCoeff()};
}

Normalizer identity_normalizer(Eigen::Index width) {
  return Normalizer{Eigen::RowVectorXd::Constant(width, -1.0),
                    Eigen::RowVectorXd::Constant(width, 1.0)};
}

Matrix Normalizer::apply(const Matrix& features) const {
  if (features.cols() != width()) {
    throw ShapeMismatchError(
        fmt::format("normalizer: {} features, fitted on {}", features.cols(), width()));
  }
  Matrix out(features.rows(), features.cols());
  for (Eigen::Index j = 0; j < features.cols(); ++j) {
    const double lo = min(j);
    const double hi = max(j);
    if (hi > lo) {
      const double mid = 0.5 * (lo + hi);
      const double half = 0.5 * (hi - lo);
      out.col(j) = (features.col(j).array() - mid) / half;
    } else {
      out.col(j).setZero();
    }
  }
  return out;
}

}  // namespace hsdm
