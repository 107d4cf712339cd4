#pragma once

#include "hsdm/matrix.hpp"

namespace hsdm {

/// Per-feature affine map sending the fitted min to -1 and max to +1.
/// Constant features map to 0. Values outside the fitted range are not clipped.
struct Normalizer {
  Eigen::RowVectorXd min;
  Eigen::RowVectorXd max;

  Eigen::Index width() const { return min.size(); }
  Matrix apply(const Matrix& features) const;
};

/// Throws EmptyInputError when `features` has no rows.
Normalizer fit_normalizer(const Matrix& features);

/// Normalizer that leaves every feature unchanged (min -1, max +1).
Normalizer identity_normalizer(Eigen::Index width);

}  // namespace hsdm
