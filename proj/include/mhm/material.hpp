#pragma once

// Isotropic material data and boundary-value problem data.

#include "mhm/common.hpp"

#include <functional>

namespace mhm {

using ScalarFunction = std::function<double(const Point&)>;
using VectorFunction = std::function<Point(const Point&)>;

/// Compressibility epsilon = (1 - 2 nu) / (2 G nu), so that p = -div(u) / epsilon.
inline double compressibility(double shear, double poisson) {
    return (1.0 - 2.0 * poisson) / (2.0 * shear * poisson);
}

/// Shear modulus and Poisson ratio as functions of position. Both are sampled
/// at fine-triangle centroids, so coefficients are piecewise constant.
struct Material {
    ScalarFunction shear;
    ScalarFunction poisson;

    static Material constant(double shear, double poisson) {
        if (!(shear > 0.0)) throw Error("Material: shear modulus must be positive");
        if (!(poisson > 0.0 && poisson < 0.5)) throw Error("Material: Poisson ratio must lie in (0, 1/2)");
        return {[shear](const Point&) { return shear; }, [poisson](const Point&) { return poisson; }};
    }
};

/// Load, Neumann traction and Dirichlet data. Empty functions mean zero.
struct LoadData {
    VectorFunction body_force;
    VectorFunction traction;
    VectorFunction dirichlet;

    Point force_at(const Point& x) const { return body_force ? body_force(x) : Point::Zero(); }
    Point traction_at(const Point& x) const { return traction ? traction(x) : Point::Zero(); }
    Point dirichlet_at(const Point& x) const { return dirichlet ? dirichlet(x) : Point::Zero(); }
};

}  // namespace mhm
