#pragma once

#include "fvsim/killed_path.hpp"

namespace fvsim {

/// Parameters of the reflection-style coupling of two killed paths.
struct CouplingParams {
    double lambda0 = 0.0;        // sigma sigma^* - lambda0 I stays positive definite
    double epsilon_couple = 0.0; // pair declared coupled below this separation
    double k0 = 0.0;             // Lipschitz constant entering the reflection profile
};

/// lambda0 = 0.5 * (min sampled eigenvalue of sigma sigma^*) and
/// epsilon_couple = sqrt(lambda0 dt) / 4.
CouplingParams default_coupling_params(const TimePeriodicModel& model, const Domain& domain,
                                       double dt, int samples, Rng& rng);

/// Unique symmetric PSD square root of sigma sigma^*(t,x) - lambda0 I.
/// A non-PSD argument signals that lambda0 is too large (std::domain_error).
Mat sigma0(const TimePeriodicModel& model, double t, const Vec& x, double lambda0);

/// Reflection strength profile k(r) = ((k0+1)^2 r^2 / 2 v r)^(1/4);
/// continuous, nondecreasing, k(0) = 0.
double k_func(double r, double k0);

/// Cross-covariance block
///   C_t(x,y) = lambda0 (I - 2 u u^*) + sigma_0(t,x) sigma_0(t,y)^*
/// with u(x,y) = k(|x-y|)(x-y) / ((k(|x-y|)+1)|x-y|); requires x != y.
Mat coupling_matrix(const TimePeriodicModel& model, double t, const Vec& x, const Vec& y,
                    const CouplingParams& params);

/// Unit-capped reflection direction u(x,y); |u| < 1 for all x != y.
Vec coupling_direction(const Vec& x, const Vec& y, double k0);

/// Joint 2d x 2d diffusion matrix [[a(x), C], [C^T, a(y)]] of the pair.
Mat joint_covariance(const TimePeriodicModel& model, double t, const Vec& x, const Vec& y,
                     const CouplingParams& params);

struct MarginalState {
    enum class Status { Alive, HardKilled, SoftKilled };
    Status status = Status::Alive;
    double kill_time = 0.0;
    double soft_clock = 0.0;
    double soft_threshold = 0.0;

    bool alive() const { return status == Status::Alive; }
};

/// Two killed paths evolved jointly: before coupling they move under the
/// correlated pair generator; once their separation drops below
/// epsilon_couple they are glued and move as a single marginal path. Each
/// marginal keeps its own soft-kill clock throughout, so both marginal laws
/// coincide with the single-path dynamics.
struct CoupledPair {
    Vec y1, y2;
    MarginalState m1, m2;
    bool coupled = false;
    double coupling_time = 0.0;  // valid iff coupled
};

/// Initialize a pair at (y1, y2); draws the two soft-kill thresholds.
/// |y1 - y2| < epsilon_couple couples the pair immediately.
CoupledPair make_coupled_pair(const Vec& y1, const Vec& y2, double s,
                              const CouplingParams& params, Rng& rng);

/// Advance the pair by one step of size dt at time t.
void coupled_step(CoupledPair& pair, const TimePeriodicModel& model, const Domain& domain,
                  double t, double dt, const CouplingParams& params, Rng& rng,
                  bool bridge_correction = true);

/// Run a pair over [s, t] with step dt (final step shrunk onto t).
CoupledPair run_coupled_pair(const TimePeriodicModel& model, const Domain& domain, const Vec& y1,
                             const Vec& y2, double s, double t, double dt,
                             const CouplingParams& params, Rng& rng,
                             bool bridge_correction = true);

struct CouplingFailureEstimate {
    double p_fail = 0.0;
    double stderr_ = 0.0;
    long replicas = 0;
};

/// Monte-Carlo estimate of the coupling-failure probability
///   P(t < tau1 v tau2  and  T_c > t ^ tau1 ^ tau2):
/// at least one marginal is alive at t and the pair neither coupled before t
/// nor before the first death.
CouplingFailureEstimate estimate_coupling_failure(const TimePeriodicModel& model,
                                                  const Domain& domain, const Vec& y1,
                                                  const Vec& y2, double s, double t,
                                                  long replicas, const SimParams& sim,
                                                  const CouplingParams& params);

}  // namespace fvsim
