#pragma once

#include <vector>

#include "fvsim/killed_path.hpp"

namespace fvsim {

struct RebirthEvent {
    double time = 0.0;
    int killed_index = -1;
    int donor_index = -1;
    enum class Kind { Hard, Soft } kind = Kind::Hard;
};

/// N interacting killed paths with instantaneous uniform rebirth: a killed
/// particle jumps onto a donor chosen uniformly among the particles not
/// killed during the same step, so the population stays at N.
class ParticleSystem {
  public:
    ParticleSystem(TimePeriodicModel model, Domain domain, std::vector<Vec> positions, double s,
                   SimParams params);

    int size() const { return static_cast<int>(positions_.size()); }
    double clock() const { return clock_; }
    double start_time() const { return start_; }
    const std::vector<Vec>& positions() const { return positions_; }
    const std::vector<RebirthEvent>& rebirth_log() const { return log_; }
    const Domain& domain() const { return domain_; }
    const TimePeriodicModel& model() const { return model_; }
    const SimParams& params() const { return params_; }

    EmpiricalMeasure empirical_measure() const;

    /// Advance by at most dt; an all-killed step is rejected and retried at
    /// half the step until some particle survives (hard error on underflow).
    /// Returns the time actually advanced. Emitted rebirth events are
    /// appended to the log in increasing time order.
    double advance(double dt);

  private:
    TimePeriodicModel model_;
    Domain domain_;
    std::vector<Vec> positions_;
    std::vector<double> soft_clock_;
    std::vector<double> soft_threshold_;
    std::vector<RebirthEvent> log_;
    double start_ = 0.0;
    double clock_ = 0.0;
    uint64_t attempt_ = 0;
    SimParams params_;
};

/// Build a particle system from an initial law (N independent draws) at time s.
ParticleSystem fv_init(const TimePeriodicModel& model, const Domain& domain,
                       const InitialLaw& init, int n, double s, const SimParams& params);

/// Build a particle system from explicit initial positions.
ParticleSystem fv_init(const TimePeriodicModel& model, const Domain& domain,
                       std::vector<Vec> positions, double s, const SimParams& params);

/// Advance one step of (at most) dt; wrapper over ParticleSystem::advance.
double fv_step(ParticleSystem& system, double dt);

struct FvCheckpoint {
    double time = 0.0;
    EmpiricalMeasure cloud;
};

/// Run to t_end, snapshotting the empirical measure exactly at each
/// checkpoint (steps are shrunk to land on checkpoint times).
std::vector<FvCheckpoint> fv_run(ParticleSystem& system, double t_end,
                                 const std::vector<double>& checkpoints);

struct JumpTimeDiagnostic {
    long count = 0;
    double min_gap = 0.0;  // infinity when fewer than two events
    std::vector<double> rate_per_unit_time;
};

/// Summary of rebirth-event times over [s, t_end]: establishes the absence
/// of event accumulation at the scales simulated.
JumpTimeDiagnostic fv_jump_time_diagnostic(const std::vector<RebirthEvent>& log, double s,
                                           double t_end);

}  // namespace fvsim
