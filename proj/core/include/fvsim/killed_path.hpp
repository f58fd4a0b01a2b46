#pragma once

#include <cstdint>
#include <variant>

#include "fvsim/measures.hpp"
#include "fvsim/model.hpp"
#include "fvsim/rng.hpp"

namespace fvsim {

struct SimParams {
    double dt = 1e-3;
    bool bridge_correction = true;
    uint64_t seed = 0;
    int workers = 1;
};

/// Result of a full path simulation over [s, t].
struct PathOutcome {
    enum class Status { Alive, HardKilled, SoftKilled };
    Status status = Status::Alive;
    Vec position;            // valid iff Alive
    double kill_time = 0.0;  // valid iff killed; lies in [s, t]
    long steps_taken = 0;

    bool alive() const { return status == Status::Alive; }
};

/// One Euler-Maruyama step with hard and soft killing.
struct StepResult {
    enum class Kind { Moved, HardKilled, SoftKilled };
    Kind kind = Kind::Moved;
    Vec position;            // valid iff Moved
    double event_time = 0.0; // valid iff killed; interpolated within the step
    double soft_clock = 0.0; // updated integral of kappa along the path
};

/// Advance one step of size dt from x at time t.
///
/// The proposal is x' = x + b dt + sigma sqrt(dt) xi. Hard killing fires when
/// x' leaves D, and otherwise (with bridge_correction on) with probability
/// 1 - bridge_survival_probability(phi(x), phi(x'), dt, s2) where s2 is the
/// normal diffusivity at (t, x); where the boundary normal is undefined the
/// largest eigenvalue of sigma sigma^* is used instead, which kills more.
/// The soft clock advances by kappa(t, x) dt (left-endpoint rule) and soft
/// killing fires when it crosses `threshold`. When both mechanisms fire in
/// one step, the earlier linearly-interpolated event time wins.
StepResult step(const TimePeriodicModel& model, const Domain& domain, double t, const Vec& x,
                double dt, Rng& rng, double soft_clock, double threshold,
                bool bridge_correction = true);

/// Kill resolution for a precomputed proposal (shared by step and the
/// coupled-pair dynamics): applies the hard-kill rules to x -> proposal and
/// advances the soft clock by kappa dt against `threshold`.
StepResult resolve_kill(const TimePeriodicModel& model, const Domain& domain, double t,
                        const Vec& x, const Vec& proposal, double kappa, double dt, Rng& rng,
                        double soft_clock, double threshold, bool bridge_correction);

/// Simulate a killed path from x over [s, t]; the last step is shrunk to
/// land exactly on t.
PathOutcome simulate(const TimePeriodicModel& model, const Domain& domain, const Vec& x,
                     double s, double t, const SimParams& params, Rng& rng);

/// Initial condition for estimators: a point mass, the uniform law on the
/// domain, or resampling from an explicit cloud.
class InitialLaw {
  public:
    static InitialLaw point(Vec x);
    static InitialLaw uniform();
    static InitialLaw cloud(EmpiricalMeasure cloud);

    Vec sample(const Domain& domain, Rng& rng) const;
    bool is_point() const { return kind_ == Kind::Point; }

  private:
    enum class Kind { Point, Uniform, Cloud };
    Kind kind_ = Kind::Uniform;
    Vec point_;
    EmpiricalMeasure cloud_;
};

struct SurvivalEstimate {
    double p_hat = 0.0;
    double stderr_ = 0.0;
    long replicas = 0;
    long survivors = 0;
};

/// Monte-Carlo proportion of paths alive at t, with binomial standard error.
/// Replica i draws its start point and path noise from the substream keyed
/// (seed, replica, i); results do not depend on the worker count.
SurvivalEstimate estimate_survival(const TimePeriodicModel& model, const Domain& domain,
                                   const InitialLaw& init, double s, double t, long replicas,
                                   const SimParams& params);

struct InsufficientSurvivors : std::runtime_error {
    InsufficientSurvivors(const std::string& what, long achieved_)
        : std::runtime_error(what), achieved(achieved_) {}
    long achieved;
};

struct ConditionedSample {
    EmpiricalMeasure survivors;
    long replicas_used = 0;
    double acceptance_rate = 0.0;
};

/// Rejection estimate of the law at t conditioned on survival: simulate
/// paths until target_survivors alive endpoints are collected (full batches,
/// so results are independent of worker count) or max_replicas is exhausted,
/// in which case InsufficientSurvivors reports the achieved count.
ConditionedSample conditioned_sample(const TimePeriodicModel& model, const Domain& domain,
                                     const InitialLaw& init, double s, double t,
                                     long target_survivors, long max_replicas,
                                     const SimParams& params);

/// Rejection estimate of the law at an intermediate time t for paths
/// conditioned to survive until the later horizon T >= t: positions at t are
/// kept only when the same path is still alive at T. The acceptance_rate is
/// the estimated survival probability to T.
ConditionedSample horizon_conditioned_sample(const TimePeriodicModel& model,
                                             const Domain& domain, const InitialLaw& init,
                                             double s, double t, double horizon,
                                             long target_survivors, long max_replicas,
                                             const SimParams& params);

}  // namespace fvsim
