#include "fvsim/killed_path.hpp"

#include <algorithm>
#include <cmath>

#include "fvsim/exec.hpp"

namespace fvsim {

StepResult step(const TimePeriodicModel& model, const Domain& domain, double t, const Vec& x,
                double dt, Rng& rng, double soft_clock, double threshold,
                bool bridge_correction) {
    if (!(dt > 0.0)) throw std::invalid_argument("step: dt must be > 0");
    const Coefficients co = model.eval(t, x);
    const int d = x.size();

    Vec xi = rng.normal_vec(d);
    Vec proposal = x + dt * co.drift + std::sqrt(dt) * co.diffusion.apply(xi);
    return resolve_kill(model, domain, t, x, proposal, co.kill_rate, dt, rng, soft_clock,
                        threshold, bridge_correction);
}

StepResult resolve_kill(const TimePeriodicModel& model, const Domain& domain, double t,
                        const Vec& x, const Vec& proposal, double kappa, double dt, Rng& rng,
                        double soft_clock, double threshold, bool bridge_correction) {
    if (!proposal.all_finite())
        throw ModelError("step: non-finite proposal from model '" + model.name() + "'");

    // soft clock, left-endpoint quadrature
    const double new_clock = soft_clock + kappa * dt;
    const bool soft_fires = new_clock >= threshold;
    const double soft_time = soft_fires ? t + (threshold - soft_clock) / kappa : 0.0;

    // hard killing
    const double phi0 = domain.boundary_distance(x);
    bool hard_fires = false;
    double hard_time = 0.0;
    if (!domain.contains(proposal)) {
        hard_fires = true;
        const double overshoot = std::max(-domain.signed_boundary_distance(proposal), 0.0);
        const double span = phi0 + overshoot;
        hard_time = span > 0.0 ? t + dt * phi0 / span : t;
    } else if (bridge_correction) {
        const double phi1 = domain.boundary_distance(proposal);
        const auto s2 = normal_diffusivity(domain, model, t, x);
        const double var_rate = s2 ? *s2 : max_diffusivity(model, t, x);
        if (var_rate > 0.0) {
            const double p_survive = bridge_survival_probability(phi0, phi1, dt, var_rate);
            if (rng.uniform() >= p_survive) {
                hard_fires = true;
                hard_time = t + dt * phi0 / (phi0 + phi1);
            }
        }
    }

    StepResult r;
    r.soft_clock = new_clock;
    if (hard_fires && (!soft_fires || hard_time <= soft_time)) {
        r.kind = StepResult::Kind::HardKilled;
        r.event_time = hard_time;
    } else if (soft_fires) {
        r.kind = StepResult::Kind::SoftKilled;
        r.event_time = soft_time;
    } else {
        r.kind = StepResult::Kind::Moved;
        r.position = proposal;
    }
    return r;
}

PathOutcome simulate(const TimePeriodicModel& model, const Domain& domain, const Vec& x,
                     double s, double t, const SimParams& params, Rng& rng) {
    if (!(t >= s)) throw std::invalid_argument("simulate: requires s <= t");
    if (!domain.contains(x)) throw std::invalid_argument("simulate: start point not in domain");

    PathOutcome out;
    out.position = x;
    if (t == s) return out;

    const double threshold = rng.exponential();
    double clock = 0.0;
    double now = s;
    Vec pos = x;
    while (now < t) {
        const double remaining = t - now;
        const double h = remaining <= params.dt ? remaining : params.dt;
        const StepResult r =
            step(model, domain, now, pos, h, rng, clock, threshold, params.bridge_correction);
        ++out.steps_taken;
        clock = r.soft_clock;
        if (r.kind == StepResult::Kind::Moved) {
            pos = r.position;
            now = remaining <= params.dt ? t : now + h;
        } else {
            out.status = r.kind == StepResult::Kind::HardKilled ? PathOutcome::Status::HardKilled
                                                                : PathOutcome::Status::SoftKilled;
            out.kill_time = r.event_time;
            return out;
        }
    }
    out.position = pos;
    return out;
}

InitialLaw InitialLaw::point(Vec x) {
    InitialLaw l;
    l.kind_ = Kind::Point;
    l.point_ = x;
    return l;
}

InitialLaw InitialLaw::uniform() {
    InitialLaw l;
    l.kind_ = Kind::Uniform;
    return l;
}

InitialLaw InitialLaw::cloud(EmpiricalMeasure cloud) {
    if (cloud.count() == 0) throw std::invalid_argument("InitialLaw: empty cloud");
    InitialLaw l;
    l.kind_ = Kind::Cloud;
    l.cloud_ = std::move(cloud);
    return l;
}

Vec InitialLaw::sample(const Domain& domain, Rng& rng) const {
    switch (kind_) {
        case Kind::Point:
            return point_;
        case Kind::Uniform:
            return sample_domain_point(domain, rng);
        case Kind::Cloud:
            return cloud_.points[static_cast<size_t>(
                rng.uniform_below(static_cast<uint64_t>(cloud_.count())))];
    }
    return point_;
}

SurvivalEstimate estimate_survival(const TimePeriodicModel& model, const Domain& domain,
                                   const InitialLaw& init, double s, double t, long replicas,
                                   const SimParams& params) {
    if (replicas < 1) throw std::invalid_argument("estimate_survival: replicas must be >= 1");
    std::vector<uint8_t> alive(static_cast<size_t>(replicas), 0);
    parallel_for(replicas, params.workers, [&](int64_t i) {
        Rng rng = Rng::keyed(params.seed, StreamTag::replica, static_cast<uint64_t>(i));
        const Vec x0 = init.sample(domain, rng);
        const PathOutcome o = simulate(model, domain, x0, s, t, params, rng);
        alive[static_cast<size_t>(i)] = o.alive() ? 1 : 0;
    });
    long survivors = 0;
    for (const auto a : alive) survivors += a;
    SurvivalEstimate e;
    e.replicas = replicas;
    e.survivors = survivors;
    e.p_hat = static_cast<double>(survivors) / static_cast<double>(replicas);
    e.stderr_ = std::sqrt(e.p_hat * (1.0 - e.p_hat) / static_cast<double>(replicas));
    return e;
}

ConditionedSample conditioned_sample(const TimePeriodicModel& model, const Domain& domain,
                                     const InitialLaw& init, double s, double t,
                                     long target_survivors, long max_replicas,
                                     const SimParams& params) {
    if (target_survivors < 1)
        throw std::invalid_argument("conditioned_sample: target_survivors must be >= 1");
    if (max_replicas < 1)
        throw std::invalid_argument("conditioned_sample: max_replicas must be >= 1");

    // fixed batch size keeps the stopping rule independent of worker count
    const long batch = 4096;
    ConditionedSample out;
    out.survivors.dim = domain.dim();

    long processed = 0;
    std::vector<Vec> slot(static_cast<size_t>(batch));
    std::vector<uint8_t> ok(static_cast<size_t>(batch));
    while (processed < max_replicas &&
           static_cast<long>(out.survivors.points.size()) < target_survivors) {
        const long n = std::min(batch, max_replicas - processed);
        std::fill(ok.begin(), ok.end(), 0);
        parallel_for(n, params.workers, [&](int64_t j) {
            const uint64_t replica = static_cast<uint64_t>(processed + j);
            Rng rng = Rng::keyed(params.seed, StreamTag::replica, replica);
            const Vec x0 = init.sample(domain, rng);
            const PathOutcome o = simulate(model, domain, x0, s, t, params, rng);
            if (o.alive()) {
                slot[static_cast<size_t>(j)] = o.position;
                ok[static_cast<size_t>(j)] = 1;
            }
        });
        for (long j = 0; j < n; ++j)
            if (ok[static_cast<size_t>(j)])
                out.survivors.points.push_back(slot[static_cast<size_t>(j)]);
        processed += n;
    }

    out.replicas_used = processed;
    out.acceptance_rate =
        static_cast<double>(out.survivors.points.size()) / static_cast<double>(processed);
    if (static_cast<long>(out.survivors.points.size()) < target_survivors)
        throw InsufficientSurvivors(
            "conditioned_sample: " + std::to_string(out.survivors.points.size()) + " of " +
                std::to_string(target_survivors) + " survivors after " +
                std::to_string(processed) + " replicas",
            static_cast<long>(out.survivors.points.size()));
    return out;
}

ConditionedSample horizon_conditioned_sample(const TimePeriodicModel& model,
                                             const Domain& domain, const InitialLaw& init,
                                             double s, double t, double horizon,
                                             long target_survivors, long max_replicas,
                                             const SimParams& params) {
    if (!(s <= t && t <= horizon))
        throw std::invalid_argument("horizon_conditioned_sample: requires s <= t <= horizon");
    if (target_survivors < 1)
        throw std::invalid_argument("horizon_conditioned_sample: target_survivors must be >= 1");

    const long batch = 4096;
    ConditionedSample out;
    out.survivors.dim = domain.dim();

    long processed = 0;
    std::vector<Vec> slot(static_cast<size_t>(batch));
    std::vector<uint8_t> ok(static_cast<size_t>(batch));
    while (processed < max_replicas &&
           static_cast<long>(out.survivors.points.size()) < target_survivors) {
        const long n = std::min(batch, max_replicas - processed);
        std::fill(ok.begin(), ok.end(), 0);
        parallel_for(n, params.workers, [&](int64_t j) {
            const uint64_t replica = static_cast<uint64_t>(processed + j);
            Rng rng = Rng::keyed(params.seed, StreamTag::replica, replica);
            const Vec x0 = init.sample(domain, rng);
            const PathOutcome mid = simulate(model, domain, x0, s, t, params, rng);
            if (!mid.alive()) return;
            const PathOutcome tail = simulate(model, domain, mid.position, t, horizon, params, rng);
            if (tail.alive()) {
                slot[static_cast<size_t>(j)] = mid.position;
                ok[static_cast<size_t>(j)] = 1;
            }
        });
        for (long j = 0; j < n; ++j)
            if (ok[static_cast<size_t>(j)])
                out.survivors.points.push_back(slot[static_cast<size_t>(j)]);
        processed += n;
    }

    out.replicas_used = processed;
    out.acceptance_rate =
        static_cast<double>(out.survivors.points.size()) / static_cast<double>(processed);
    if (static_cast<long>(out.survivors.points.size()) < target_survivors)
        throw InsufficientSurvivors(
            "horizon_conditioned_sample: " + std::to_string(out.survivors.points.size()) +
                " of " + std::to_string(target_survivors) + " survivors after " +
                std::to_string(processed) + " replicas",
            static_cast<long>(out.survivors.points.size()));
    return out;
}

}  // namespace fvsim
