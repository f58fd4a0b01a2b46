#pragma once

#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "fvsim/linalg.hpp"

namespace fvsim {

struct DimensionMismatch : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

struct BoundingBox {
    Vec lower;
    Vec upper;
};

/// Bounded open domain with an exact Euclidean boundary-distance function.
///
/// Supported shapes: Interval[a,b] (d=1), Ball, Ellipsoid (axis-aligned) and
/// AxisBox. The box boundary is not C2; simulations on boxes are flagged as
/// running outside the smoothness assumptions the collar analysis relies on.
class Domain {
  public:
    enum class Shape { Interval, Ball, Ellipsoid, AxisBox };

    static Domain interval(double a, double b);
    static Domain ball(Vec center, double radius);
    static Domain ellipsoid(Vec center, Vec semi_axes);
    static Domain axis_box(Vec lower, Vec upper);

    Shape shape() const { return shape_; }
    int dim() const { return dim_; }

    /// True iff x lies in the open set D.
    bool contains(const Vec& x) const;

    /// Euclidean distance to the boundary; 0 for exterior and boundary points.
    double boundary_distance(const Vec& x) const;

    /// Signed distance: positive inside, negative outside (used for kill-time
    /// interpolation when an Euler endpoint lands outside).
    double signed_boundary_distance(const Vec& x) const;

    /// Gradient of the boundary distance (unit inward normal direction).
    /// Empty where the distance is not differentiable: box ridge points, and
    /// shape centers where the distance attains its maximum.
    std::optional<Vec> boundary_distance_gradient(const Vec& x) const;

    BoundingBox bounding_box() const;

    /// Radius of the largest ball contained in D.
    double inradius() const;

    /// False for AxisBox (non-C2 boundary).
    bool smooth_boundary() const { return shape_ != Shape::AxisBox; }

    std::string describe() const;

  private:
    Domain() = default;
    void check_dim(const Vec& x) const;
    double ellipsoid_boundary_distance(const Vec& x, Vec* nearest) const;

    Shape shape_ = Shape::Interval;
    int dim_ = 1;
    Vec center_;     // ball / ellipsoid
    double radius_ = 0.0;
    Vec semi_axes_;  // ellipsoid
    Vec lower_, upper_;  // interval (component 0) / box
};

/// Probability that a Brownian bridge between boundary distances phi0 and
/// phi1, run over dt with variance rate s2, stays positive:
///   1 - exp(-2 phi0 phi1 / (s2 dt)).
/// Half-space approximation used to correct the survival bias of plain
/// endpoint testing between Euler steps. Returns 0 when either endpoint sits
/// on the boundary; value lies in [0, 1).
double bridge_survival_probability(double phi0, double phi1, double dt, double s2);

}  // namespace fvsim
