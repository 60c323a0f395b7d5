#pragma once

#include <Eigen/Dense>

namespace lpvembed {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

}  // namespace lpvembed
