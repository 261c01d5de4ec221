#pragma once

#include <algorithm>

#include <Eigen/Core>

namespace permlim::detail {

// Bilinear interpolation of a square table whose node (k, l) sits at (k/(m-1), l/(m-1)).
inline double bilinear(const Eigen::MatrixXd& t, double x, double y) {
    const auto m = t.rows();
    const double span = static_cast<double>(m - 1);
    double fx = x * span, fy = y * span;
    auto i = std::min<Eigen::Index>(static_cast<Eigen::Index>(fx), m - 2);
    auto j = std::min<Eigen::Index>(static_cast<Eigen::Index>(fy), m - 2);
    double s = fx - static_cast<double>(i), r = fy - static_cast<double>(j);
    return (1 - s) * (1 - r) * t(i, j) + s * (1 - r) * t(i + 1, j) + (1 - s) * r * t(i, j + 1) +
           s * r * t(i + 1, j + 1);
}

}  // namespace permlim::detail
