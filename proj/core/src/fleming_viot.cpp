#include "fvsim/fleming_viot.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "fvsim/exec.hpp"

namespace fvsim {

ParticleSystem::ParticleSystem(TimePeriodicModel model, Domain domain,
                               std::vector<Vec> positions, double s, SimParams params)
    : model_(std::move(model)),
      domain_(std::move(domain)),
      positions_(std::move(positions)),
      start_(s),
      clock_(s),
      params_(params) {
    if (positions_.size() < 2)
        throw std::invalid_argument("particle system: needs N >= 2 (rebirth needs a donor)");
    for (const auto& p : positions_)
        if (!domain_.contains(p))
            throw std::invalid_argument("particle system: initial point outside the domain");
    const size_t n = positions_.size();
    soft_clock_.assign(n, 0.0);
    soft_threshold_.resize(n);
    for (size_t i = 0; i < n; ++i)
        soft_threshold_[i] =
            Rng::keyed(params_.seed, StreamTag::rebirth, static_cast<uint64_t>(i), 0).exponential();
}

EmpiricalMeasure ParticleSystem::empirical_measure() const {
    EmpiricalMeasure m;
    m.dim = domain_.dim();
    m.points = positions_;
    return m;
}

double ParticleSystem::advance(double dt) {
    if (!(dt > 0.0)) throw std::invalid_argument("fv_step: dt must be > 0");
    const int n = size();
    std::vector<StepResult> results(static_cast<size_t>(n));

    double h = dt;
    const double h_floor = dt * 0x1.0p-48;
    for (;;) {
        const uint64_t attempt = attempt_++;
        parallel_for(n, params_.workers, [&](int64_t i) {
            Rng rng = Rng::keyed(params_.seed, StreamTag::particle_step,
                                 static_cast<uint64_t>(i), attempt);
            results[static_cast<size_t>(i)] =
                step(model_, domain_, clock_, positions_[static_cast<size_t>(i)], h, rng,
                     soft_clock_[static_cast<size_t>(i)],
                     soft_threshold_[static_cast<size_t>(i)], params_.bridge_correction);
        });

        bool any_survivor = false;
        for (const auto& r : results)
            if (r.kind == StepResult::Kind::Moved) {
                any_survivor = true;
                break;
            }
        if (any_survivor) break;

        h *= 0.5;
        if (h < h_floor)
            throw std::runtime_error(
                "fv_step: dt underflow while retrying an all-killed step at t=" +
                std::to_string(clock_) + " (N=" + std::to_string(n) + ")");
    }

    std::vector<int> survivors;
    survivors.reserve(static_cast<size_t>(n));
    for (int i = 0; i < n; ++i)
        if (results[static_cast<size_t>(i)].kind == StepResult::Kind::Moved)
            survivors.push_back(i);

    // survivors move; soft clocks advance
    for (const int i : survivors) {
        positions_[static_cast<size_t>(i)] = results[static_cast<size_t>(i)].position;
        soft_clock_[static_cast<size_t>(i)] = results[static_cast<size_t>(i)].soft_clock;
    }

    // rebirths, ascending killed index; donors are end-of-step survivor
    // positions, never particles reborn within the same step
    const uint64_t attempt_used = attempt_ - 1;
    std::vector<RebirthEvent> emitted;
    for (int i = 0; i < n; ++i) {
        const auto& r = results[static_cast<size_t>(i)];
        if (r.kind == StepResult::Kind::Moved) continue;
        Rng rng = Rng::keyed(params_.seed, StreamTag::rebirth, static_cast<uint64_t>(i),
                             attempt_used + 1);
        const int donor =
            survivors[static_cast<size_t>(rng.uniform_below(survivors.size()))];
        positions_[static_cast<size_t>(i)] = positions_[static_cast<size_t>(donor)];
        soft_clock_[static_cast<size_t>(i)] = 0.0;
        soft_threshold_[static_cast<size_t>(i)] = rng.exponential();

        RebirthEvent ev;
        ev.time = r.event_time;
        ev.killed_index = i;
        ev.donor_index = donor;
        ev.kind = r.kind == StepResult::Kind::HardKilled ? RebirthEvent::Kind::Hard
                                                         : RebirthEvent::Kind::Soft;
        emitted.push_back(ev);
    }

    // log is strictly increasing in time; exact float ties are nudged
    std::sort(emitted.begin(), emitted.end(), [](const RebirthEvent& a, const RebirthEvent& b) {
        return a.time != b.time ? a.time < b.time : a.killed_index < b.killed_index;
    });
    for (auto& ev : emitted) {
        if (!log_.empty() && ev.time <= log_.back().time)
            ev.time = std::nextafter(log_.back().time, std::numeric_limits<double>::infinity());
        log_.push_back(ev);
    }

    clock_ += h;
    return h;
}

ParticleSystem fv_init(const TimePeriodicModel& model, const Domain& domain,
                       const InitialLaw& init, int n, double s, const SimParams& params) {
    if (n < 2) throw std::invalid_argument("fv_init: needs N >= 2");
    std::vector<Vec> pts(static_cast<size_t>(n));
    for (int i = 0; i < n; ++i) {
        Rng rng = Rng::keyed(params.seed, StreamTag::init, static_cast<uint64_t>(i));
        pts[static_cast<size_t>(i)] = init.sample(domain, rng);
    }
    return ParticleSystem(model, domain, std::move(pts), s, params);
}

ParticleSystem fv_init(const TimePeriodicModel& model, const Domain& domain,
                       std::vector<Vec> positions, double s, const SimParams& params) {
    return ParticleSystem(model, domain, std::move(positions), s, params);
}

double fv_step(ParticleSystem& system, double dt) { return system.advance(dt); }

std::vector<FvCheckpoint> fv_run(ParticleSystem& system, double t_end,
                                 const std::vector<double>& checkpoints) {
    if (!(t_end >= system.clock()))
        throw std::invalid_argument("fv_run: t_end precedes the system clock");
    if (!std::is_sorted(checkpoints.begin(), checkpoints.end()))
        throw std::invalid_argument("fv_run: checkpoints must be sorted");
    for (const double c : checkpoints)
        if (c < system.start_time() || c > t_end)
            throw std::invalid_argument("fv_run: checkpoint outside [s, t_end]");

    std::vector<FvCheckpoint> out;
    size_t next = 0;
    const double dt = system.params().dt;

    // checkpoints at or before the current clock snapshot the current cloud
    while (next < checkpoints.size() && checkpoints[next] <= system.clock()) {
        out.push_back({checkpoints[next], system.empirical_measure()});
        ++next;
    }
    while (system.clock() < t_end) {
        const double stop = next < checkpoints.size() ? checkpoints[next] : t_end;
        while (system.clock() < stop) {
            const double h = std::min(dt, stop - system.clock());
            system.advance(h);
        }
        while (next < checkpoints.size() && checkpoints[next] <= system.clock()) {
            out.push_back({checkpoints[next], system.empirical_measure()});
            ++next;
        }
    }
    return out;
}

JumpTimeDiagnostic fv_jump_time_diagnostic(const std::vector<RebirthEvent>& log, double s,
                                           double t_end) {
    JumpTimeDiagnostic d;
    d.count = static_cast<long>(log.size());
    d.min_gap = std::numeric_limits<double>::infinity();
    for (size_t i = 1; i < log.size(); ++i)
        d.min_gap = std::min(d.min_gap, log[i].time - log[i - 1].time);

    const double span = t_end - s;
    const int buckets = std::max(1, static_cast<int>(std::ceil(span)));
    d.rate_per_unit_time.assign(static_cast<size_t>(buckets), 0.0);
    for (const auto& ev : log) {
        int b = static_cast<int>(std::floor(ev.time - s));
        b = std::clamp(b, 0, buckets - 1);
        d.rate_per_unit_time[static_cast<size_t>(b)] += 1.0;
    }
    for (int b = 0; b < buckets; ++b) {
        const double len = std::min(span - b, 1.0);
        if (len > 0.0) d.rate_per_unit_time[static_cast<size_t>(b)] /= len;
    }
    return d;
}

}  // namespace fvsim
