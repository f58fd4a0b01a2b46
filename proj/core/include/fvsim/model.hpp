#pragma once

#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "fvsim/geometry.hpp"
#include "fvsim/rng.hpp"

namespace fvsim {

struct ModelError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Coefficient values at one (t, x).
struct Coefficients {
    Vec drift;
    Mat diffusion;
    double kill_rate = 0.0;
};

/// SDE coefficient set (b, sigma, kappa), periodic in t with period `period`,
/// plus the declared constants the validators audit against.
///
/// Models are immutable after construction; eval is pure and safe to call
/// from any number of workers.
class TimePeriodicModel {
  public:
    using DriftFn = std::function<Vec(double, const Vec&)>;
    using DiffusionFn = std::function<Mat(double, const Vec&)>;
    using KillRateFn = std::function<double(double, const Vec&)>;

    TimePeriodicModel(std::string name, int dim, double period, DriftFn b, DiffusionFn sigma,
                      KillRateFn kappa, double declared_k0, double declared_c0,
                      double declared_kappa_max);

    const std::string& name() const { return name_; }
    int dim() const { return dim_; }
    double period() const { return period_; }
    double declared_k0() const { return declared_k0_; }
    double declared_c0() const { return declared_c0_; }
    double declared_kappa_max() const { return declared_kappa_max_; }

    /// Evaluate (b, sigma, kappa) at (t, x). Non-finite values signal a
    /// malformed user model (ModelError).
    Coefficients eval(double t, const Vec& x) const;

    /// Copy with different declared constants (config-file overrides).
    TimePeriodicModel with_declared(double k0, double c0, double kappa_max) const {
        TimePeriodicModel m = *this;
        m.declared_k0_ = k0;
        m.declared_c0_ = c0;
        m.declared_kappa_max_ = kappa_max;
        return m;
    }

    Vec drift(double t, const Vec& x) const { return b_(t, x); }
    Mat diffusion(double t, const Vec& x) const { return sigma_(t, x); }
    double kill_rate(double t, const Vec& x) const { return kappa_(t, x); }

  private:
    std::string name_;
    int dim_;
    double period_;
    DriftFn b_;
    DiffusionFn sigma_;
    KillRateFn kappa_;
    double declared_k0_;
    double declared_c0_;
    double declared_kappa_max_;
};

/// Diffusivity along the inward normal at x:
///   grad(phi_D)(x)^T sigma sigma^*(t, x) grad(phi_D)(x).
/// Empty where the boundary-distance gradient is undefined (box edges and
/// corners, shape centers); callers fall back to a conservative bound.
std::optional<double> normal_diffusivity(const Domain& domain, const TimePeriodicModel& model,
                                         double t, const Vec& x);

/// Largest eigenvalue of sigma sigma^*(t, x); the conservative fallback
/// variance rate where the normal direction is unavailable.
double max_diffusivity(const TimePeriodicModel& model, double t, const Vec& x);

// ---------------------------------------------------------------------------
// Validators. Sampling-based consistency checks of the declared constants;
// sampled maxima are lower bounds for the true constants, so mismatches are
// reported as warnings by callers rather than hard errors.

/// Max over sampled (t, x) of
///   ||sigma(t+P,x)-sigma(t,x)||_F + |b(t+P,x)-b(t,x)| + |kappa(t+P,x)-kappa(t,x)|.
double check_periodicity(const TimePeriodicModel& model, const Domain& domain, int n_time,
                         int n_space, Rng& rng);

/// Min over sampled (t, x) of the smallest singular value of sigma(t, x).
double check_ellipticity(const TimePeriodicModel& model, const Domain& domain, int samples,
                         Rng& rng);

/// Max over sampled pairs of (||sigma(t,x)-sigma(t,y)||_F + |b(t,x)-b(t,y)|) / |x-y|.
double estimate_lipschitz(const TimePeriodicModel& model, const Domain& domain, int samples,
                          Rng& rng);

/// Range of kappa over sampled (t, x): {min, max}.
std::pair<double, double> sample_kill_rate_range(const TimePeriodicModel& model,
                                                 const Domain& domain, int samples, Rng& rng);

/// Uniform sample from the open domain (rejection from the bounding box).
Vec sample_domain_point(const Domain& domain, Rng& rng);

// ---------------------------------------------------------------------------
// Built-in model library.

struct ModelLibraryEntry {
    std::string name;
    std::string summary;  // one-line description incl. declared-constant derivation
    std::function<Domain(const std::map<std::string, double>&)> default_domain;
    std::function<TimePeriodicModel(const Domain&, const std::map<std::string, double>&)> build;
};

const std::vector<ModelLibraryEntry>& model_library();
const ModelLibraryEntry& find_model(const std::string& name);
TimePeriodicModel build_model(const std::string& name, const Domain& domain,
                              const std::map<std::string, double>& params = {});

}  // namespace fvsim
