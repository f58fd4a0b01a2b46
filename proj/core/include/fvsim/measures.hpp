#pragma once

#include <string>
#include <vector>

#include "fvsim/geometry.hpp"
#include "fvsim/linalg.hpp"

namespace fvsim {

/// Equal-weight sample cloud.
struct EmpiricalMeasure {
    int dim = 0;
    std::vector<Vec> points;

    int count() const { return static_cast<int>(points.size()); }

    /// Mean of f over the cloud.
    template <typename F>
    double integrate(F&& f) const {
        double s = 0.0;
        for (const auto& p : points) s += f(p);
        return s / static_cast<double>(points.size());
    }
};

/// Uniform per-axis binning over an axis-aligned box.
struct Binning {
    int dim = 0;
    std::vector<std::vector<double>> edges;  // per axis, ascending, size nbins+1

    static Binning uniform(const BoundingBox& box, int bins_per_axis);
    static Binning uniform(const BoundingBox& box, const std::vector<int>& bins_per_axis);

    int axis_bins(int axis) const { return static_cast<int>(edges[axis].size()) - 1; }
    int total_bins() const;

    /// Flat bin index of x, or -1 for out-of-range points.
    /// Convention: axis bins are left-open right-closed, (e_i, e_{i+1}]; a
    /// point exactly on an interior edge belongs to the lower bin.
    int flat_index(const Vec& x) const;

    bool operator==(const Binning& o) const { return dim == o.dim && edges == o.edges; }
};

/// Default bins per axis for TV estimation between clouds:
/// ceil(min_count^(1/(d+2))), clamped to [10, 100].
int default_bins_per_axis(int min_cloud_size, int dim);

/// Normalized bin probabilities plus a single out-of-range bucket.
struct Histogram {
    Binning binning;
    std::vector<double> probs;
    double out_of_range = 0.0;
};

Histogram histogram(const EmpiricalMeasure& measure, const Binning& binning);

/// Total variation distance in the two-sided convention,
///   sup_{|f|<=1} |mu1(f) - mu2(f)| = sum_bins |p_i - q_i|,
/// taking values in [0, 2]; histograms must share the binning.
double tv_distance(const Histogram& h1, const Histogram& h2);

/// Fraction of samples within distance alpha of the boundary.
double boundary_mass(const EmpiricalMeasure& measure, const Domain& domain, double alpha);

/// Exponential-decay fit tv(t) ~ C exp(-gamma t).
struct RateFit {
    double c = 0.0;
    double gamma = 0.0;
    double r_squared = 0.0;
    double t_lo = 0.0, t_hi = 0.0;  // fitted window
    int points_used = 0;
    double noise_floor = 0.0;
};

struct InsufficientData : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Least squares on (t, log tv) restricted to tv > noise_floor.
/// Throws InsufficientData with fewer than 3 points above the floor.
RateFit fit_exponential(const std::vector<double>& times, const std::vector<double>& tv_values,
                        double noise_floor);

/// Default noise floor for a TV curve: 3 sqrt(2 B / M_min).
double default_noise_floor(int total_bins, int min_cloud_size);

}  // namespace fvsim
