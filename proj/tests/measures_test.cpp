#include <doctest.h>

#include <cmath>

#include "fvsim/measures.hpp"
#include "fvsim/rng.hpp"
#include "support/oracles.hpp"

using namespace fvsim;

namespace {

EmpiricalMeasure cloud_1d(const std::vector<double>& xs) {
    EmpiricalMeasure m;
    m.dim = 1;
    for (const double x : xs) m.points.push_back(Vec{x});
    return m;
}

Binning unit_binning(int bins) {
    BoundingBox bb{Vec{0.0}, Vec{1.0}};
    return Binning::uniform(bb, bins);
}

Histogram hist_from_probs(const std::vector<double>& p, const Binning& b) {
    Histogram h;
    h.binning = b;
    h.probs = p;
    return h;
}

// iid draws from the quasi-stationary density via inverse CDF
EmpiricalMeasure qsd_cloud(int n, Rng& rng) {
    EmpiricalMeasure m;
    m.dim = 1;
    for (int i = 0; i < n; ++i)
        m.points.push_back(Vec{std::acos(1.0 - 2.0 * rng.uniform()) / oracle::kPi});
    return m;
}

}  // namespace

TEST_CASE("histogram: point mass, normalization, empty input") {
    const Binning b = unit_binning(10);
    const Histogram h = histogram(cloud_1d({0.55}), b);
    double total = h.out_of_range;
    int nonzero = 0;
    for (const double p : h.probs) {
        total += p;
        if (p > 0) ++nonzero;
    }
    CHECK(nonzero == 1);
    CHECK(total == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(h.probs[5] == doctest::Approx(1.0));

    CHECK_THROWS_AS((void)histogram(EmpiricalMeasure{1, {}}, b), std::invalid_argument);
}

TEST_CASE("histogram: uniform law fills bins evenly") {
    const Binning b = unit_binning(10);
    Rng rng(31);
    EmpiricalMeasure m;
    m.dim = 1;
    for (int i = 0; i < 1000000; ++i) m.points.push_back(Vec{rng.uniform()});
    const Histogram h = histogram(m, b);
    for (const double p : h.probs) CHECK(p == doctest::Approx(0.1).epsilon(0.012));
    CHECK(h.out_of_range == 0.0);
}

TEST_CASE("histogram: point on an interior edge joins the lower bin") {
    const Binning b = unit_binning(10);
    const double edge = b.edges[0][2];  // boundary between bins 1 and 2
    const Histogram h = histogram(cloud_1d({edge}), b);
    CHECK(h.probs[1] == doctest::Approx(1.0));
    CHECK(h.probs[2] == 0.0);
    // the box minimum itself has no lower bin and lands out of range
    const Histogram h0 = histogram(cloud_1d({0.0}), b);
    CHECK(h0.out_of_range == doctest::Approx(1.0));
    const Histogram h1 = histogram(cloud_1d({1.0}), b);
    CHECK(h1.probs[9] == doctest::Approx(1.0));
}

TEST_CASE("tv_distance: frozen examples") {
    const Binning b2 = unit_binning(2);
    const Histogram p = hist_from_probs({0.6, 0.4}, b2);
    const Histogram q = hist_from_probs({0.5, 0.5}, b2);
    CHECK(tv_distance(p, p) == 0.0);
    CHECK(tv_distance(p, q) == doctest::Approx(0.2).epsilon(1e-12));

    const Histogram d1 = hist_from_probs({1.0, 0.0}, b2);
    const Histogram d2 = hist_from_probs({0.0, 1.0}, b2);
    CHECK(tv_distance(d1, d2) == doctest::Approx(2.0));  // orthogonal measures

    const Binning b3 = unit_binning(3);
    const Histogram r = hist_from_probs({0.5, 0.25, 0.25}, b3);
    CHECK_THROWS_AS((void)tv_distance(p, r), std::invalid_argument);
}

TEST_CASE("tv_distance is a metric on a fixed binning") {
    const Binning b = unit_binning(16);
    Rng rng(41);
    auto random_hist = [&]() {
        std::vector<double> p(16);
        double s = 0.0;
        for (auto& v : p) {
            v = rng.uniform();
            s += v;
        }
        for (auto& v : p) v /= s;
        return hist_from_probs(p, b);
    };
    for (int k = 0; k < 2000; ++k) {
        const Histogram a = random_hist(), c = random_hist(), d = random_hist();
        const double ac = tv_distance(a, c);
        CHECK(ac >= 0.0);
        CHECK(ac <= 2.0 + 1e-12);
        CHECK(ac == doctest::Approx(tv_distance(c, a)));          // symmetry
        CHECK(tv_distance(a, a) == 0.0);                          // identity
        CHECK(ac <= tv_distance(a, d) + tv_distance(d, c) + 1e-12);  // triangle
    }
}

TEST_CASE("tv_distance between same-law clouds decreases with sample size") {
    const Binning b = unit_binning(20);
    Rng rng(43);
    double prev = 3.0;
    for (const int m : {1000, 10000, 100000}) {
        EmpiricalMeasure c1, c2;
        c1.dim = c2.dim = 1;
        for (int i = 0; i < m; ++i) c1.points.push_back(Vec{rng.uniform()});
        for (int i = 0; i < m; ++i) c2.points.push_back(Vec{rng.uniform()});
        const double tv = tv_distance(histogram(c1, b), histogram(c2, b));
        CHECK(tv < prev);
        prev = tv;
    }
}

TEST_CASE("boundary_mass: frozen examples and the QSD collar integral") {
    const Domain iv = Domain::interval(0.0, 1.0);
    // all mass at the center
    CHECK(boundary_mass(cloud_1d(std::vector<double>(100, 0.5)), iv, 0.3) == 0.0);

    // uniform law, alpha = 0.1: two collars of width 0.1
    Rng rng(47);
    EmpiricalMeasure u;
    u.dim = 1;
    for (int i = 0; i < 200000; ++i) u.points.push_back(Vec{rng.uniform()});
    CHECK(boundary_mass(u, iv, 0.1) == doctest::Approx(0.2).epsilon(0.03));

    // QSD cloud, alpha = 0.05: 2 * integral_0^0.05 (pi/2) sin = 0.012312
    const double expect = 2.0 * oracle::qsd_mass_below(0.05);
    CHECK(expect == doctest::Approx(0.0123116594).epsilon(1e-6));
    EmpiricalMeasure q = qsd_cloud(200000, rng);
    CHECK(boundary_mass(q, iv, 0.05) == doctest::Approx(expect).epsilon(0.1));

    CHECK_THROWS_AS((void)boundary_mass(u, iv, 0.0), std::invalid_argument);
}

TEST_CASE("fit_exponential: exact recovery on synthetic data") {
    std::vector<double> ts, tvs;
    for (double t = 0.1; t <= 1.05; t += 0.1) {
        ts.push_back(t);
        tvs.push_back(2.0 * std::exp(-3.0 * t));
    }
    const RateFit fit = fit_exponential(ts, tvs, 0.0);
    CHECK(fit.c == doctest::Approx(2.0).epsilon(1e-12));
    CHECK(fit.gamma == doctest::Approx(3.0).epsilon(1e-12));
    CHECK(fit.r_squared == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(fit.points_used == 10);
}

TEST_CASE("fit_exponential: noise floor excludes low points") {
    const std::vector<double> ts{0.1, 0.2, 0.3, 0.4};
    const std::vector<double> tvs{1.0, 0.5, 0.25, 0.01};
    const RateFit fit = fit_exponential(ts, tvs, 0.05);
    CHECK(fit.points_used == 3);
    CHECK(fit.t_hi == doctest::Approx(0.3));
    CHECK(fit.gamma == doctest::Approx(std::log(2.0) / 0.1).epsilon(1e-9));

    CHECK_THROWS_AS((void)fit_exponential(ts, tvs, 0.6), InsufficientData);
}

TEST_CASE("default binning and noise-floor rules") {
    CHECK(default_bins_per_axis(3000, 1) == 15);   // ceil(3000^(1/3))
    CHECK(default_bins_per_axis(2000, 2) == 10);   // ceil(2000^(1/4)) = 7, clamped up
    CHECK(default_bins_per_axis(100000000, 1) == 100);  // clamped down
    CHECK(default_noise_floor(40, 3000) ==
          doctest::Approx(3.0 * std::sqrt(80.0 / 3000.0)).epsilon(1e-12));
}

TEST_CASE("empirical measure integrate") {
    const EmpiricalMeasure m = cloud_1d({0.1, 0.3, 0.8});
    CHECK(m.integrate([](const Vec& x) { return x[0]; }) == doctest::Approx(0.4));
    CHECK(m.integrate([](const Vec& x) { return x[0] <= 0.5 ? 1.0 : 0.0; }) ==
          doctest::Approx(2.0 / 3.0));
}
