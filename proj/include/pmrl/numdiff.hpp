#pragma once

#include <functional>
#include <span>
#include <vector>

#include "pmrl/matrix.hpp"

namespace pmrl {

// Central finite differences of a scalar function. Forward evaluations
// only, so results stay independent of any analytic gradient path under
// test.
Matrix central_difference(const std::function<double(const Matrix&)>& f,
                          const Matrix& at, double step = 1e-5);

std::vector<double> central_difference(
    const std::function<double(std::span<const double>)>& f,
    std::span<const double> at, double step = 1e-5);

// ||a - b||_F / max(||b||_F, floor)
double relative_error(const Matrix& a, const Matrix& b, double floor = 1e-12);
double relative_error(std::span<const double> a, std::span<const double> b,
                      double floor = 1e-12);

}  // namespace pmrl
