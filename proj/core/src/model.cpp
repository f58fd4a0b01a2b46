#include "fvsim/model.hpp"

#include <cmath>
#include <limits>

namespace fvsim {

namespace {
constexpr double kTwoPi = 6.283185307179586476925286766559;
}

TimePeriodicModel::TimePeriodicModel(std::string name, int dim, double period, DriftFn b,
                                     DiffusionFn sigma, KillRateFn kappa, double declared_k0,
                                     double declared_c0, double declared_kappa_max)
    : name_(std::move(name)),
      dim_(dim),
      period_(period),
      b_(std::move(b)),
      sigma_(std::move(sigma)),
      kappa_(std::move(kappa)),
      declared_k0_(declared_k0),
      declared_c0_(declared_c0),
      declared_kappa_max_(declared_kappa_max) {
    if (dim_ < 1 || dim_ > kMaxDim) throw std::invalid_argument("model: unsupported dimension");
    if (!(period_ > 0.0)) throw std::invalid_argument("model: period must be positive");
    if (declared_c0_ < 0.0) throw std::invalid_argument("model: declared_c0 must be >= 0");
    if (declared_kappa_max_ < 0.0)
        throw std::invalid_argument("model: declared_kappa_max must be >= 0");
}

Coefficients TimePeriodicModel::eval(double t, const Vec& x) const {
    if (x.size() != dim_)
        throw DimensionMismatch("model eval: point dimension mismatch");
    Coefficients c;
    c.drift = b_(t, x);
    c.diffusion = sigma_(t, x);
    c.kill_rate = kappa_(t, x);
    if (!c.drift.all_finite() || !c.diffusion.all_finite() || !std::isfinite(c.kill_rate))
        throw ModelError("model '" + name_ + "': non-finite coefficient at t=" +
                         std::to_string(t));
    if (c.kill_rate < 0.0)
        throw ModelError("model '" + name_ + "': negative kill rate");
    return c;
}

std::optional<double> normal_diffusivity(const Domain& domain, const TimePeriodicModel& model,
                                         double t, const Vec& x) {
    const auto grad = domain.boundary_distance_gradient(x);
    if (!grad) return std::nullopt;
    const Mat a = model.diffusion(t, x).gram();
    return grad->dot(a.apply(*grad));
}

double max_diffusivity(const TimePeriodicModel& model, double t, const Vec& x) {
    const Mat a = model.diffusion(t, x).gram();
    const SymEigen e = sym_eigen(a);
    return e.values[e.values.size() - 1];
}

Vec sample_domain_point(const Domain& domain, Rng& rng) {
    const BoundingBox bb = domain.bounding_box();
    const int d = domain.dim();
    for (int tries = 0; tries < 100000; ++tries) {
        Vec x(d);
        for (int i = 0; i < d; ++i)
            x[i] = bb.lower[i] + (bb.upper[i] - bb.lower[i]) * rng.uniform();
        if (domain.contains(x)) return x;
    }
    throw std::runtime_error("sample_domain_point: rejection sampling failed");
}

double check_periodicity(const TimePeriodicModel& model, const Domain& domain, int n_time,
                         int n_space, Rng& rng) {
    if (n_time < 1 || n_space < 1)
        throw std::invalid_argument("check_periodicity: counts must be >= 1");
    const double period = model.period();
    double worst = 0.0;
    for (int it = 0; it < n_time; ++it) {
        const double t = 3.0 * period * rng.uniform();
        for (int ix = 0; ix < n_space; ++ix) {
            const Vec x = sample_domain_point(domain, rng);
            const Coefficients a = model.eval(t, x);
            const Coefficients b = model.eval(t + period, x);
            const double dev = (b.diffusion - a.diffusion).frobenius_norm() +
                               (b.drift - a.drift).norm() +
                               std::abs(b.kill_rate - a.kill_rate);
            worst = std::max(worst, dev);
        }
    }
    return worst;
}

double check_ellipticity(const TimePeriodicModel& model, const Domain& domain, int samples,
                         Rng& rng) {
    if (samples < 1) throw std::invalid_argument("check_ellipticity: samples must be >= 1");
    double worst = std::numeric_limits<double>::infinity();
    for (int i = 0; i < samples; ++i) {
        const double t = model.period() * rng.uniform();
        const Vec x = sample_domain_point(domain, rng);
        worst = std::min(worst, min_singular_value(model.diffusion(t, x)));
    }
    return worst;
}

double estimate_lipschitz(const TimePeriodicModel& model, const Domain& domain, int samples,
                          Rng& rng) {
    if (samples < 1) throw std::invalid_argument("estimate_lipschitz: samples must be >= 1");
    double worst = 0.0;
    for (int i = 0; i < samples; ++i) {
        const double t = model.period() * rng.uniform();
        const Vec x = sample_domain_point(domain, rng);
        const Vec y = sample_domain_point(domain, rng);
        const double r = (x - y).norm();
        if (r < 1e-12) continue;
        const double num = (model.diffusion(t, x) - model.diffusion(t, y)).frobenius_norm() +
                           (model.drift(t, x) - model.drift(t, y)).norm();
        worst = std::max(worst, num / r);
    }
    return worst;
}

std::pair<double, double> sample_kill_rate_range(const TimePeriodicModel& model,
                                                 const Domain& domain, int samples, Rng& rng) {
    double lo = std::numeric_limits<double>::infinity();
    double hi = -std::numeric_limits<double>::infinity();
    for (int i = 0; i < samples; ++i) {
        const double t = model.period() * rng.uniform();
        const Vec x = sample_domain_point(domain, rng);
        const double k = model.kill_rate(t, x);
        lo = std::min(lo, k);
        hi = std::max(hi, k);
    }
    return {lo, hi};
}

// ---------------------------------------------------------------------------
// Library

namespace {

double param(const std::map<std::string, double>& p, const std::string& key, double fallback) {
    auto it = p.find(key);
    return it == p.end() ? fallback : it->second;
}

Vec zero_vec(int d) { return Vec(d); }

Domain unit_ball(const std::map<std::string, double>& p, double fallback_dim) {
    const int d = static_cast<int>(param(p, "dim", fallback_dim));
    return Domain::ball(Vec(d), 1.0);
}

TimePeriodicModel make_brownian(const Domain&, const std::map<std::string, double>& p) {
    const int d = static_cast<int>(param(p, "dim", 1));
    return TimePeriodicModel(
        "brownian", d, param(p, "period", 1.0),
        [d](double, const Vec&) { return zero_vec(d); },
        [d](double, const Vec&) { return Mat::identity(d); },
        [](double, const Vec&) { return 0.0; },
        /*k0=*/0.0, /*c0=*/1.0, /*kappa_max=*/0.0);
}

TimePeriodicModel make_brownian_softkill(const Domain&, const std::map<std::string, double>& p) {
    const int d = static_cast<int>(param(p, "dim", 1));
    const double rate = param(p, "rate", 1.0);
    if (rate < 0.0) throw std::invalid_argument("brownian_softkill: rate must be >= 0");
    return TimePeriodicModel(
        "brownian_softkill", d, param(p, "period", 1.0),
        [d](double, const Vec&) { return zero_vec(d); },
        [d](double, const Vec&) { return Mat::identity(d); },
        [rate](double, const Vec&) { return rate; },
        0.0, 1.0, rate);
}

TimePeriodicModel make_brownian_softkill_periodic(const Domain&,
                                                  const std::map<std::string, double>& p) {
    const int d = static_cast<int>(param(p, "dim", 1));
    const double rate = param(p, "rate", 1.0);
    const double period = param(p, "period", 1.0);
    if (rate < 0.0) throw std::invalid_argument("brownian_softkill_periodic: rate must be >= 0");
    return TimePeriodicModel(
        "brownian_softkill_periodic", d, period,
        [d](double, const Vec&) { return zero_vec(d); },
        [d](double, const Vec&) { return Mat::identity(d); },
        [rate, period](double t, const Vec&) {
            return 0.5 * rate * (1.0 + std::cos(kTwoPi * t / period));
        },
        0.0, 1.0, rate);
}

// isotropic noise amplified away from the boundary: sigma = (1 + phi_D(x)) I
TimePeriodicModel make_remark1_1(const Domain& domain, const std::map<std::string, double>& p) {
    const int d = domain.dim();
    // k0 = sqrt(d): ||(phi(x)-phi(y)) I||_F <= sqrt(d) |x-y| by 1-Lipschitz phi_D
    return TimePeriodicModel(
        "remark1_1", d, param(p, "period", 1.0),
        [d](double, const Vec&) { return zero_vec(d); },
        [domain](double, const Vec& x) {
            return (1.0 + domain.boundary_distance(x)) * Mat::identity(domain.dim());
        },
        [](double, const Vec&) { return 0.0; },
        std::sqrt(static_cast<double>(d)), 1.0, 0.0);
}

// outward drift vanishing at the boundary: b = phi_D(x) x
TimePeriodicModel make_remark1_2(const Domain& domain, const std::map<std::string, double>& p) {
    const int d = domain.dim();
    // k0 = 2 on the unit ball: |phi(x)x - phi(y)y| <= (|x| + phi(y)) |x-y| <= 2 |x-y|
    return TimePeriodicModel(
        "remark1_2", d, param(p, "period", 1.0),
        [domain](double, const Vec& x) { return domain.boundary_distance(x) * x; },
        [d](double, const Vec&) { return Mat::identity(d); },
        [](double, const Vec&) { return 0.0; },
        2.0, 1.0, 0.0);
}

// rotating space-constant drift: b(t) = r (cos(2 pi t / P), sin(2 pi t / P), 0, ...)
TimePeriodicModel make_remark1_3(const Domain& domain, const std::map<std::string, double>& p) {
    const int d = domain.dim();
    if (d < 2) throw std::invalid_argument("remark1_3: requires dim >= 2");
    const double r = param(p, "rotation_radius", 0.5);
    const double period = param(p, "period", 1.0);
    return TimePeriodicModel(
        "remark1_3", d, period,
        [d, r, period](double t, const Vec&) {
            Vec b(d);
            b[0] = r * std::cos(kTwoPi * t / period);
            b[1] = r * std::sin(kTwoPi * t / period);
            return b;
        },
        [d](double, const Vec&) { return Mat::identity(d); },
        [](double, const Vec&) { return 0.0; },
        0.0, 1.0, 0.0);
}

// Lipschitz-only noise: sigma = (1 + h(x) phi_D(x)) I with h(x) = (1+sin x_1)/4
TimePeriodicModel make_remark1_4(const Domain& domain, const std::map<std::string, double>& p) {
    const int d = domain.dim();
    // k0 = 0.75 sqrt(d) on the unit ball: sup h = 1/2, Lip h = 1/4, phi <= 1
    return TimePeriodicModel(
        "remark1_4", d, param(p, "period", 1.0),
        [d](double, const Vec&) { return zero_vec(d); },
        [domain](double, const Vec& x) {
            const double h = 0.25 * (1.0 + std::sin(x[0]));
            return (1.0 + h * domain.boundary_distance(x)) * Mat::identity(domain.dim());
        },
        [](double, const Vec&) { return 0.0; },
        0.75 * std::sqrt(static_cast<double>(d)), 1.0, 0.0);
}

}  // namespace

const std::vector<ModelLibraryEntry>& model_library() {
    static const std::vector<ModelLibraryEntry> entries = {
        {"brownian",
         "standard Brownian motion (b=0, sigma=I, kappa=0); k0=0, c0=1",
         [](const auto& p) { return unit_ball(p, 1); }, make_brownian},
        {"brownian_softkill",
         "Brownian motion with constant kill rate kappa=rate; k0=0, c0=1, kappa_max=rate",
         [](const auto& p) { return unit_ball(p, 1); }, make_brownian_softkill},
        {"brownian_softkill_periodic",
         "Brownian motion, kill rate rate*(1+cos(2 pi t/period))/2; kappa_max=rate",
         [](const auto& p) { return unit_ball(p, 1); }, make_brownian_softkill_periodic},
        {"remark1_1",
         "unit ball, sigma=(1+phi_D(x))I, b=0: noise grows toward the center; "
         "k0=sqrt(d) from 1-Lipschitz phi_D, c0=1 at the boundary",
         [](const auto& p) { return unit_ball(p, 2); }, make_remark1_1},
        {"remark1_2",
         "unit disc, sigma=I, b=phi_D(x)x: outward drift vanishing at the boundary; "
         "k0=2 from |x|<=1 and phi_D<=1, c0=1",
         [](const auto& p) { return unit_ball(p, 2); }, make_remark1_2},
        {"remark1_3",
         "unit ball, sigma=I, time-periodic rotating drift b(t)=r(cos,sin)(2 pi t/period); "
         "k0=0 (b constant in x), c0=1",
         [](const auto& p) { return unit_ball(p, 2); }, make_remark1_3},
        {"remark1_4",
         "unit ball, sigma=(1+h(x)phi_D(x))I with h=(1+sin x_1)/4 in [0,1/2]: "
         "Lipschitz-only diffusion; k0=0.75 sqrt(d), c0=1",
         [](const auto& p) { return unit_ball(p, 2); }, make_remark1_4},
    };
    return entries;
}

const ModelLibraryEntry& find_model(const std::string& name) {
    for (const auto& e : model_library())
        if (e.name == name) return e;
    throw std::invalid_argument("unknown model '" + name + "'");
}

TimePeriodicModel build_model(const std::string& name, const Domain& domain,
                              const std::map<std::string, double>& params) {
    return find_model(name).build(domain, params);
}

}  // namespace fvsim
