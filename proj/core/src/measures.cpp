#include "fvsim/measures.hpp"

#include <algorithm>
#include <cmath>

namespace fvsim {

Binning Binning::uniform(const BoundingBox& box, int bins_per_axis) {
    return uniform(box, std::vector<int>(static_cast<size_t>(box.lower.size()), bins_per_axis));
}

Binning Binning::uniform(const BoundingBox& box, const std::vector<int>& bins_per_axis) {
    const int d = box.lower.size();
    if (static_cast<int>(bins_per_axis.size()) != d)
        throw std::invalid_argument("binning: bins_per_axis size mismatch");
    Binning b;
    b.dim = d;
    b.edges.resize(static_cast<size_t>(d));
    for (int ax = 0; ax < d; ++ax) {
        const int n = bins_per_axis[static_cast<size_t>(ax)];
        if (n < 1) throw std::invalid_argument("binning: bins must be >= 1");
        auto& e = b.edges[static_cast<size_t>(ax)];
        e.resize(static_cast<size_t>(n) + 1);
        const double lo = box.lower[ax], hi = box.upper[ax];
        if (!(hi > lo)) throw std::invalid_argument("binning: degenerate box");
        for (int i = 0; i <= n; ++i)
            e[static_cast<size_t>(i)] = lo + (hi - lo) * static_cast<double>(i) / n;
        e.front() = lo;
        e.back() = hi;
    }
    return b;
}

int Binning::total_bins() const {
    int t = 1;
    for (int ax = 0; ax < dim; ++ax) t *= axis_bins(ax);
    return t;
}

int Binning::flat_index(const Vec& x) const {
    if (x.size() != dim) throw DimensionMismatch("binning: point dimension mismatch");
    int flat = 0;
    for (int ax = 0; ax < dim; ++ax) {
        const auto& e = edges[static_cast<size_t>(ax)];
        // first edge >= x: bins are (e_i, e_{i+1}], so an exact edge hit
        // resolves to the lower bin
        const auto it = std::lower_bound(e.begin(), e.end(), x[ax]);
        if (it == e.begin() || it == e.end()) return -1;
        const int idx = static_cast<int>(it - e.begin()) - 1;
        flat = flat * axis_bins(ax) + idx;
    }
    return flat;
}

int default_bins_per_axis(int min_cloud_size, int dim) {
    const double b = std::ceil(std::pow(static_cast<double>(min_cloud_size),
                                        1.0 / static_cast<double>(dim + 2)));
    return static_cast<int>(std::clamp(b, 10.0, 100.0));
}

Histogram histogram(const EmpiricalMeasure& measure, const Binning& binning) {
    if (measure.count() == 0) throw std::invalid_argument("histogram: empty measure");
    if (measure.dim != binning.dim)
        throw DimensionMismatch("histogram: measure/binning dimension mismatch");
    Histogram h;
    h.binning = binning;
    h.probs.assign(static_cast<size_t>(binning.total_bins()), 0.0);
    const double w = 1.0 / static_cast<double>(measure.count());
    for (const auto& p : measure.points) {
        const int idx = binning.flat_index(p);
        if (idx < 0)
            h.out_of_range += w;
        else
            h.probs[static_cast<size_t>(idx)] += w;
    }
    return h;
}

double tv_distance(const Histogram& h1, const Histogram& h2) {
    if (!(h1.binning == h2.binning))
        throw std::invalid_argument("tv_distance: histograms use different binnings");
    double s = std::abs(h1.out_of_range - h2.out_of_range);
    for (size_t i = 0; i < h1.probs.size(); ++i) s += std::abs(h1.probs[i] - h2.probs[i]);
    return s;
}

double boundary_mass(const EmpiricalMeasure& measure, const Domain& domain, double alpha) {
    if (!(alpha > 0.0)) throw std::invalid_argument("boundary_mass: alpha must be > 0");
    if (measure.count() == 0) return 0.0;
    int n = 0;
    for (const auto& p : measure.points)
        if (domain.boundary_distance(p) < alpha) ++n;
    return static_cast<double>(n) / static_cast<double>(measure.count());
}

RateFit fit_exponential(const std::vector<double>& times, const std::vector<double>& tv_values,
                        double noise_floor) {
    if (times.size() != tv_values.size())
        throw std::invalid_argument("fit_exponential: size mismatch");
    std::vector<double> t, y;
    for (size_t i = 0; i < times.size(); ++i) {
        if (tv_values[i] > noise_floor) {
            t.push_back(times[i]);
            y.push_back(std::log(tv_values[i]));
        }
    }
    if (t.size() < 3)
        throw InsufficientData("fit_exponential: insufficient points above noise floor (" +
                               std::to_string(t.size()) + " of " + std::to_string(times.size()) +
                               ")");

    const double n = static_cast<double>(t.size());
    double st = 0, sy = 0, stt = 0, sty = 0;
    for (size_t i = 0; i < t.size(); ++i) {
        st += t[i];
        sy += y[i];
        stt += t[i] * t[i];
        sty += t[i] * y[i];
    }
    const double denom = n * stt - st * st;
    if (denom == 0.0) throw InsufficientData("fit_exponential: degenerate time grid");
    const double slope = (n * sty - st * sy) / denom;
    const double intercept = (sy - slope * st) / n;

    double ss_res = 0, ss_tot = 0;
    const double ybar = sy / n;
    for (size_t i = 0; i < t.size(); ++i) {
        const double e = y[i] - (intercept + slope * t[i]);
        ss_res += e * e;
        ss_tot += (y[i] - ybar) * (y[i] - ybar);
    }

    RateFit fit;
    fit.c = std::exp(intercept);
    fit.gamma = -slope;
    fit.r_squared = ss_tot > 0.0 ? 1.0 - ss_res / ss_tot : 1.0;
    fit.t_lo = *std::min_element(t.begin(), t.end());
    fit.t_hi = *std::max_element(t.begin(), t.end());
    fit.points_used = static_cast<int>(t.size());
    fit.noise_floor = noise_floor;
    return fit;
}

double default_noise_floor(int total_bins, int min_cloud_size) {
    return 3.0 * std::sqrt(2.0 * static_cast<double>(total_bins) /
                           static_cast<double>(min_cloud_size));
}

}  // namespace fvsim
