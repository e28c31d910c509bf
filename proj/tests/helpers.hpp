#pragma once

#include "cvqit/core.hpp"
#include "doctest.h"

#include <cmath>

namespace testing {

inline double max_abs_diff(const cvqit::Mat& a, const cvqit::Mat& b) {
    REQUIRE(a.rows() == b.rows());
    REQUIRE(a.cols() == b.cols());
    return (a - b).cwiseAbs().maxCoeff();
}

inline cvqit::Mat diag(std::initializer_list<double> v) {
    cvqit::Vec d(static_cast<Eigen::Index>(v.size()));
    int i = 0;
    for (double x : v) d(i++) = x;
    return d.asDiagonal();
}

inline bool close_rel(double a, double b, double rel, double abs = 0.0) {
    return std::abs(a - b) <= std::max(abs, rel * std::max(std::abs(a), std::abs(b)));
}

}  // namespace testing
