#pragma once

#include <Eigen/Dense>

#include <stdexcept>
#include <string>

namespace mhm {

using Point = Eigen::Vector2d;
using Mat2 = Eigen::Matrix2d;

/// Base class for all errors raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Raised when a linear system cannot be factorized or is numerically singular.
class SingularSystemError : public Error {
public:
    using Error::Error;
};

/// Absolute tolerance for point-on-segment tests, in unit-box coordinates.
inline constexpr double geometry_tolerance = 1e-12;

inline double cross(const Point& a, const Point& b) { return a.x() * b.y() - a.y() * b.x(); }

}  // namespace mhm
