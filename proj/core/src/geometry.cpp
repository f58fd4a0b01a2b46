#include "fvsim/geometry.hpp"

#include <cmath>
#include <limits>
#include <sstream>

namespace fvsim {

Domain Domain::interval(double a, double b) {
    if (!(a < b)) throw std::invalid_argument("interval: requires a < b");
    Domain d;
    d.shape_ = Shape::Interval;
    d.dim_ = 1;
    d.lower_ = Vec{a};
    d.upper_ = Vec{b};
    return d;
}

Domain Domain::ball(Vec center, double radius) {
    if (!(radius > 0.0)) throw std::invalid_argument("ball: radius must be positive");
    if (center.size() < 1 || center.size() > kMaxDim)
        throw std::invalid_argument("ball: unsupported dimension");
    Domain d;
    d.shape_ = Shape::Ball;
    d.dim_ = center.size();
    d.center_ = center;
    d.radius_ = radius;
    return d;
}

Domain Domain::ellipsoid(Vec center, Vec semi_axes) {
    if (center.size() != semi_axes.size())
        throw std::invalid_argument("ellipsoid: center/semi-axes dimension mismatch");
    for (int i = 0; i < semi_axes.size(); ++i)
        if (!(semi_axes[i] > 0.0))
            throw std::invalid_argument("ellipsoid: semi-axes must be positive");
    Domain d;
    d.shape_ = Shape::Ellipsoid;
    d.dim_ = center.size();
    d.center_ = center;
    d.semi_axes_ = semi_axes;
    return d;
}

Domain Domain::axis_box(Vec lower, Vec upper) {
    if (lower.size() != upper.size())
        throw std::invalid_argument("axis_box: lower/upper dimension mismatch");
    for (int i = 0; i < lower.size(); ++i)
        if (!(lower[i] < upper[i]))
            throw std::invalid_argument("axis_box: requires lower < upper per axis");
    Domain d;
    d.shape_ = Shape::AxisBox;
    d.dim_ = lower.size();
    d.lower_ = lower;
    d.upper_ = upper;
    return d;
}

void Domain::check_dim(const Vec& x) const {
    if (x.size() != dim_)
        throw DimensionMismatch("point dimension " + std::to_string(x.size()) +
                                " does not match domain dimension " + std::to_string(dim_));
}

bool Domain::contains(const Vec& x) const {
    check_dim(x);
    switch (shape_) {
        case Shape::Interval:
            return x[0] > lower_[0] && x[0] < upper_[0];
        case Shape::Ball:
            return (x - center_).norm() < radius_;
        case Shape::Ellipsoid: {
            double q = 0.0;
            for (int i = 0; i < dim_; ++i) {
                const double z = (x[i] - center_[i]) / semi_axes_[i];
                q += z * z;
            }
            return q < 1.0;
        }
        case Shape::AxisBox:
            for (int i = 0; i < dim_; ++i)
                if (!(x[i] > lower_[i] && x[i] < upper_[i])) return false;
            return true;
    }
    return false;
}

// Nearest boundary point of the ellipsoid via the one-dimensional
// Lagrange-multiplier equation g(lam) = sum_i (s_i z_i / (s_i^2+lam))^2 - 1,
// solved by safeguarded Newton to 1e-12 in lam. Interior points whose
// active-axis root falls below -min(s)^2 project off-axis onto a shortest
// semi-axis instead.
double Domain::ellipsoid_boundary_distance(const Vec& x, Vec* nearest) const {
    const int d = dim_;
    Vec z = x - center_;

    double q = 0.0;
    double s_min = semi_axes_[0];
    for (int i = 0; i < d; ++i) {
        const double t = z[i] / semi_axes_[i];
        q += t * t;
        s_min = std::min(s_min, semi_axes_[i]);
    }
    const bool inside = q < 1.0;

    // center: distance is the shortest semi-axis, attained on that axis
    double znorm = z.norm();
    if (znorm == 0.0) {
        if (nearest) {
            Vec w(d);
            for (int i = 0; i < d; ++i)
                if (semi_axes_[i] == s_min) {
                    w[i] = s_min;
                    break;
                }
            *nearest = center_ + w;
        }
        return s_min;
    }

    auto g = [&](double lam) {
        double v = -1.0;
        for (int i = 0; i < d; ++i) {
            if (z[i] == 0.0) continue;
            const double t = semi_axes_[i] * z[i] / (semi_axes_[i] * semi_axes_[i] + lam);
            v += t * t;
        }
        return v;
    };
    auto dg = [&](double lam) {
        double v = 0.0;
        for (int i = 0; i < d; ++i) {
            if (z[i] == 0.0) continue;
            const double s2 = semi_axes_[i] * semi_axes_[i];
            v += -2.0 * s2 * z[i] * z[i] / ((s2 + lam) * (s2 + lam) * (s2 + lam));
        }
        return v;
    };

    double lo, hi;
    if (inside) {
        double s_active = -1.0;
        for (int i = 0; i < d; ++i)
            if (z[i] != 0.0)
                s_active = s_active < 0 ? semi_axes_[i] : std::min(s_active, semi_axes_[i]);
        lo = -s_active * s_active;
        hi = 0.0;
    } else {
        lo = 0.0;
        hi = s_min * s_min;
        while (g(hi) > 0.0) hi *= 2.0;
    }

    // bisection-guarded Newton on g
    double lam = 0.5 * (lo + hi);
    for (int it = 0; it < 100; ++it) {
        const double gl = g(lam);
        if (gl > 0.0)
            lo = lam;
        else
            hi = lam;
        const double step = gl / dg(lam);
        double next = lam - step;
        if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
        if (std::abs(next - lam) <= 1e-12 * (1.0 + std::abs(lam))) {
            lam = next;
            break;
        }
        lam = next;
    }

    Vec w(d);
    for (int i = 0; i < d; ++i) {
        const double s2 = semi_axes_[i] * semi_axes_[i];
        w[i] = s2 * z[i] / (s2 + lam);
    }
    double best = (w - z).norm();
    bool have_candidate = !inside || lam >= -s_min * s_min;

    if (inside && lam < -s_min * s_min + 1e-14) {
        // off-axis projection: lam pinned at -s_min^2, mass on a shortest axis
        Vec u(d);
        double rem = 1.0;
        bool ok = true;
        for (int i = 0; i < d; ++i) {
            const double s2 = semi_axes_[i] * semi_axes_[i];
            if (semi_axes_[i] == s_min) {
                u[i] = 0.0;
                continue;
            }
            u[i] = s2 * z[i] / (s2 - s_min * s_min);
            rem -= (u[i] * u[i]) / s2;
            if (std::abs(u[i]) > semi_axes_[i]) ok = false;
        }
        if (ok && rem >= 0.0) {
            for (int i = 0; i < d; ++i)
                if (semi_axes_[i] == s_min && z[i] == 0.0) {
                    u[i] = s_min * std::sqrt(rem);
                    break;
                }
            const double cand = (u - z).norm();
            if (!have_candidate || cand < best) {
                best = cand;
                w = u;
            }
            have_candidate = true;
        }
    }

    if (nearest) *nearest = center_ + w;
    return best;
}

double Domain::boundary_distance(const Vec& x) const {
    const double s = signed_boundary_distance(x);
    return s > 0.0 ? s : 0.0;
}

double Domain::signed_boundary_distance(const Vec& x) const {
    check_dim(x);
    switch (shape_) {
        case Shape::Interval:
            return std::min(x[0] - lower_[0], upper_[0] - x[0]);
        case Shape::Ball:
            return radius_ - (x - center_).norm();
        case Shape::Ellipsoid: {
            const double dist = ellipsoid_boundary_distance(x, nullptr);
            return contains(x) ? dist : -dist;
        }
        case Shape::AxisBox: {
            double inner = std::numeric_limits<double>::infinity();
            double outer2 = 0.0;
            bool outside = false;
            for (int i = 0; i < dim_; ++i) {
                const double lo = x[i] - lower_[i];
                const double hi = upper_[i] - x[i];
                inner = std::min(inner, std::min(lo, hi));
                const double v = std::max(std::max(-lo, -hi), 0.0);
                if (v > 0.0) outside = true;
                outer2 += v * v;
            }
            return outside ? -std::sqrt(outer2) : inner;
        }
    }
    return 0.0;
}

std::optional<Vec> Domain::boundary_distance_gradient(const Vec& x) const {
    check_dim(x);
    switch (shape_) {
        case Shape::Interval: {
            const double lo = x[0] - lower_[0];
            const double hi = upper_[0] - x[0];
            if (lo == hi) return std::nullopt;  // midpoint ridge
            return Vec{lo < hi ? 1.0 : -1.0};
        }
        case Shape::Ball: {
            Vec z = x - center_;
            const double r = z.norm();
            if (r == 0.0) return std::nullopt;
            return (-1.0 / r) * z;
        }
        case Shape::Ellipsoid: {
            Vec p(dim_);
            ellipsoid_boundary_distance(x, &p);
            Vec g = x - p;
            const double n = g.norm();
            if (n == 0.0) return std::nullopt;
            if (!contains(x)) g *= -1.0;
            return (1.0 / n) * g;
        }
        case Shape::AxisBox: {
            int arg = -1;
            double best = std::numeric_limits<double>::infinity();
            double sign = 1.0;
            bool tie = false;
            for (int i = 0; i < dim_; ++i) {
                const double lo = x[i] - lower_[i];
                const double hi = upper_[i] - x[i];
                const double m = std::min(lo, hi);
                if (m == best) tie = true;
                if (m < best) {
                    best = m;
                    arg = i;
                    sign = lo < hi ? 1.0 : -1.0;
                    tie = lo == hi;
                }
            }
            if (tie || arg < 0) return std::nullopt;  // edge/corner ridge
            Vec g(dim_);
            g[arg] = sign;
            return g;
        }
    }
    return std::nullopt;
}

BoundingBox Domain::bounding_box() const {
    BoundingBox bb;
    switch (shape_) {
        case Shape::Interval:
            bb.lower = lower_;
            bb.upper = upper_;
            break;
        case Shape::Ball: {
            bb.lower = Vec(dim_);
            bb.upper = Vec(dim_);
            for (int i = 0; i < dim_; ++i) {
                bb.lower[i] = center_[i] - radius_;
                bb.upper[i] = center_[i] + radius_;
            }
            break;
        }
        case Shape::Ellipsoid: {
            bb.lower = Vec(dim_);
            bb.upper = Vec(dim_);
            for (int i = 0; i < dim_; ++i) {
                bb.lower[i] = center_[i] - semi_axes_[i];
                bb.upper[i] = center_[i] + semi_axes_[i];
            }
            break;
        }
        case Shape::AxisBox:
            bb.lower = lower_;
            bb.upper = upper_;
            break;
    }
    return bb;
}

double Domain::inradius() const {
    switch (shape_) {
        case Shape::Interval:
            return 0.5 * (upper_[0] - lower_[0]);
        case Shape::Ball:
            return radius_;
        case Shape::Ellipsoid: {
            double m = semi_axes_[0];
            for (int i = 1; i < dim_; ++i) m = std::min(m, semi_axes_[i]);
            return m;
        }
        case Shape::AxisBox: {
            double m = std::numeric_limits<double>::infinity();
            for (int i = 0; i < dim_; ++i) m = std::min(m, 0.5 * (upper_[i] - lower_[i]));
            return m;
        }
    }
    return 0.0;
}

double bridge_survival_probability(double phi0, double phi1, double dt, double s2) {
    if (phi0 < 0.0 || phi1 < 0.0)
        throw std::invalid_argument("bridge_survival_probability: distances must be >= 0");
    if (!(dt > 0.0) || !(s2 > 0.0))
        throw std::invalid_argument("bridge_survival_probability: dt and s2 must be > 0");
    if (phi0 == 0.0 || phi1 == 0.0) return 0.0;
    return -std::expm1(-2.0 * phi0 * phi1 / (s2 * dt));
}

std::string Domain::describe() const {
    std::ostringstream os;
    switch (shape_) {
        case Shape::Interval:
            os << "interval(" << lower_[0] << ", " << upper_[0] << ")";
            break;
        case Shape::Ball:
            os << "ball(d=" << dim_ << ", r=" << radius_ << ")";
            break;
        case Shape::Ellipsoid:
            os << "ellipsoid(d=" << dim_ << ")";
            break;
        case Shape::AxisBox:
            os << "axis_box(d=" << dim_ << ", non-C2 boundary)";
            break;
    }
    return os.str();
}

}  // namespace fvsim
