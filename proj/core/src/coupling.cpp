#include "fvsim/coupling.hpp"

#include <cmath>
#include <limits>

#include "fvsim/exec.hpp"

namespace fvsim {

CouplingParams default_coupling_params(const TimePeriodicModel& model, const Domain& domain,
                                       double dt, int samples, Rng& rng) {
    double min_eig = std::numeric_limits<double>::infinity();
    for (int i = 0; i < samples; ++i) {
        const double t = model.period() * rng.uniform();
        const Vec x = sample_domain_point(domain, rng);
        min_eig = std::min(min_eig, min_sym_eigenvalue(model.diffusion(t, x).gram()));
    }
    if (!(min_eig > 0.0))
        throw std::domain_error("default_coupling_params: sigma sigma^* is not uniformly "
                                "positive definite on samples");
    CouplingParams p;
    p.lambda0 = 0.5 * min_eig;
    p.epsilon_couple = 0.25 * std::sqrt(p.lambda0 * dt);
    p.k0 = model.declared_k0();
    return p;
}

Mat sigma0(const TimePeriodicModel& model, double t, const Vec& x, double lambda0) {
    const int d = model.dim();
    Mat a = model.diffusion(t, x).gram() - lambda0 * Mat::identity(d);
    try {
        return sym_sqrt(a, 1e-12);
    } catch (const std::domain_error&) {
        throw std::domain_error("sigma0: sigma sigma^* - lambda0 I not positive semidefinite "
                                "(lambda0 too large)");
    }
}

double k_func(double r, double k0) {
    if (r < 0.0) throw std::invalid_argument("k_func: r must be >= 0");
    const double quad = (k0 + 1.0) * (k0 + 1.0) * r * r / 2.0;
    return std::pow(std::max(quad, r), 0.25);
}

Vec coupling_direction(const Vec& x, const Vec& y, double k0) {
    Vec diff = x - y;
    const double r = diff.norm();
    if (r == 0.0)
        throw std::invalid_argument("coupling_direction: undefined on the diagonal x == y");
    const double k = k_func(r, k0);
    return (k / ((k + 1.0) * r)) * diff;
}

Mat coupling_matrix(const TimePeriodicModel& model, double t, const Vec& x, const Vec& y,
                    const CouplingParams& params) {
    const int d = x.size();
    const Vec u = coupling_direction(x, y, params.k0);
    Mat refl = Mat::identity(d);
    for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j) refl(i, j) -= 2.0 * u[i] * u[j];
    const Mat s0x = sigma0(model, t, x, params.lambda0);
    const Mat s0y = sigma0(model, t, y, params.lambda0);
    return params.lambda0 * refl + s0x.mul(s0y.transposed());
}

Mat joint_covariance(const TimePeriodicModel& model, double t, const Vec& x, const Vec& y,
                     const CouplingParams& params) {
    const int d = x.size();
    if (2 * d > kMaxDim)
        throw std::invalid_argument("joint_covariance: pair dimension exceeds capacity");
    const Mat ax = model.diffusion(t, x).gram();
    const Mat ay = model.diffusion(t, y).gram();
    const Mat c = coupling_matrix(model, t, x, y, params);
    Mat joint(2 * d);
    for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j) {
            joint(i, j) = ax(i, j);
            joint(d + i, d + j) = ay(i, j);
            joint(i, d + j) = c(i, j);
            joint(d + j, i) = c(i, j);
        }
    return joint;
}

CoupledPair make_coupled_pair(const Vec& y1, const Vec& y2, double s,
                              const CouplingParams& params, Rng& rng) {
    if (y1.size() != y2.size()) throw DimensionMismatch("coupled pair: dimension mismatch");
    CoupledPair p;
    p.y1 = y1;
    p.y2 = y2;
    p.m1.soft_threshold = rng.exponential();
    p.m2.soft_threshold = rng.exponential();
    if ((y1 - y2).norm() < params.epsilon_couple) {
        p.coupled = true;
        p.coupling_time = s;
        p.y2 = p.y1;
    }
    return p;
}

namespace {

void apply_marginal(MarginalState& m, Vec& pos, const StepResult& r) {
    m.soft_clock = r.soft_clock;
    switch (r.kind) {
        case StepResult::Kind::Moved:
            pos = r.position;
            break;
        case StepResult::Kind::HardKilled:
            m.status = MarginalState::Status::HardKilled;
            m.kill_time = r.event_time;
            break;
        case StepResult::Kind::SoftKilled:
            m.status = MarginalState::Status::SoftKilled;
            m.kill_time = r.event_time;
            break;
    }
}

}  // namespace

void coupled_step(CoupledPair& pair, const TimePeriodicModel& model, const Domain& domain,
                  double t, double dt, const CouplingParams& params, Rng& rng,
                  bool bridge_correction) {
    if (!(dt > 0.0)) throw std::invalid_argument("coupled_step: dt must be > 0");
    const int d = model.dim();

    const bool a1 = pair.m1.alive();
    const bool a2 = pair.m2.alive();
    if (!a1 && !a2) return;

    if (!(a1 && a2)) {
        // one marginal left: a plain killed-path step
        Vec& pos = a1 ? pair.y1 : pair.y2;
        MarginalState& m = a1 ? pair.m1 : pair.m2;
        const StepResult r = step(model, domain, t, pos, dt, rng, m.soft_clock,
                                  m.soft_threshold, bridge_correction);
        apply_marginal(m, pos, r);
        return;
    }

    if (pair.coupled) {
        // glued: one spatial move and one shared hard-kill draw; soft clocks
        // stay per-marginal so each marginal keeps the single-path law
        const Vec pos = pair.y1;
        const Coefficients co = model.eval(t, pos);
        const Vec xi = rng.normal_vec(d);
        const Vec proposal = pos + dt * co.drift + std::sqrt(dt) * co.diffusion.apply(xi);
        constexpr double kNoSoft = std::numeric_limits<double>::infinity();
        const StepResult hard = resolve_kill(model, domain, t, pos, proposal, 0.0, dt, rng, 0.0,
                                             kNoSoft, bridge_correction);
        const bool hard_fires = hard.kind == StepResult::Kind::HardKilled;

        for (MarginalState* m : {&pair.m1, &pair.m2}) {
            const double new_clock = m->soft_clock + co.kill_rate * dt;
            const bool soft_fires = new_clock >= m->soft_threshold;
            const double soft_time =
                soft_fires ? t + (m->soft_threshold - m->soft_clock) / co.kill_rate : 0.0;
            m->soft_clock = new_clock;
            if (hard_fires && (!soft_fires || hard.event_time <= soft_time)) {
                m->status = MarginalState::Status::HardKilled;
                m->kill_time = hard.event_time;
            } else if (soft_fires) {
                m->status = MarginalState::Status::SoftKilled;
                m->kill_time = soft_time;
            }
        }
        if (pair.m1.alive()) pair.y1 = proposal;
        if (pair.m2.alive()) pair.y2 = proposal;
        return;
    }

    // both alive, not yet coupled: correlated joint increment
    const Mat joint = joint_covariance(model, t, pair.y1, pair.y2, params);
    Mat root;
    try {
        root = sym_sqrt(joint, 1e-9);
    } catch (const std::domain_error& e) {
        throw std::domain_error(std::string("coupled_step: covariance factorization failure "
                                            "(lambda0/PSD misconfiguration): ") +
                                e.what());
    }

    Vec xi(2 * d);
    for (int i = 0; i < 2 * d; ++i) xi[i] = rng.normal();
    const Vec inc = root.apply(xi);

    const Vec b1 = model.drift(t, pair.y1);
    const Vec b2 = model.drift(t, pair.y2);
    Vec prop1(d), prop2(d);
    const double sq = std::sqrt(dt);
    for (int i = 0; i < d; ++i) {
        prop1[i] = pair.y1[i] + dt * b1[i] + sq * inc[i];
        prop2[i] = pair.y2[i] + dt * b2[i] + sq * inc[d + i];
    }

    const double kap1 = model.kill_rate(t, pair.y1);
    const double kap2 = model.kill_rate(t, pair.y2);
    const StepResult r1 = resolve_kill(model, domain, t, pair.y1, prop1, kap1, dt, rng,
                                       pair.m1.soft_clock, pair.m1.soft_threshold,
                                       bridge_correction);
    apply_marginal(pair.m1, pair.y1, r1);
    const StepResult r2 = resolve_kill(model, domain, t, pair.y2, prop2, kap2, dt, rng,
                                       pair.m2.soft_clock, pair.m2.soft_threshold,
                                       bridge_correction);
    apply_marginal(pair.m2, pair.y2, r2);

    if (pair.m1.alive() && pair.m2.alive() &&
        (pair.y1 - pair.y2).norm() < params.epsilon_couple) {
        pair.coupled = true;
        pair.coupling_time = t + dt;
        pair.y2 = pair.y1;
    }
}

CoupledPair run_coupled_pair(const TimePeriodicModel& model, const Domain& domain, const Vec& y1,
                             const Vec& y2, double s, double t, double dt,
                             const CouplingParams& params, Rng& rng, bool bridge_correction) {
    if (!domain.contains(y1) || !domain.contains(y2))
        throw std::invalid_argument("run_coupled_pair: start points must lie in the domain");
    CoupledPair pair = make_coupled_pair(y1, y2, s, params, rng);
    double now = s;
    while (now < t && (pair.m1.alive() || pair.m2.alive())) {
        const double remaining = t - now;
        const double h = remaining <= dt ? remaining : dt;
        coupled_step(pair, model, domain, now, h, params, rng, bridge_correction);
        now = remaining <= dt ? t : now + h;
    }
    return pair;
}

CouplingFailureEstimate estimate_coupling_failure(const TimePeriodicModel& model,
                                                  const Domain& domain, const Vec& y1,
                                                  const Vec& y2, double s, double t,
                                                  long replicas, const SimParams& sim,
                                                  const CouplingParams& params) {
    if (replicas < 1)
        throw std::invalid_argument("estimate_coupling_failure: replicas must be >= 1");
    std::vector<uint8_t> fail(static_cast<size_t>(replicas), 0);
    parallel_for(replicas, sim.workers, [&](int64_t i) {
        Rng rng = Rng::keyed(sim.seed, StreamTag::pair, static_cast<uint64_t>(i));
        const CoupledPair p = run_coupled_pair(model, domain, y1, y2, s, t, sim.dt, params, rng,
                                               sim.bridge_correction);
        const bool any_alive = p.m1.alive() || p.m2.alive();
        fail[static_cast<size_t>(i)] = (any_alive && !p.coupled) ? 1 : 0;
    });
    long n_fail = 0;
    for (const auto f : fail) n_fail += f;
    CouplingFailureEstimate e;
    e.replicas = replicas;
    e.p_fail = static_cast<double>(n_fail) / static_cast<double>(replicas);
    e.stderr_ = std::sqrt(e.p_fail * (1.0 - e.p_fail) / static_cast<double>(replicas));
    return e;
}

}  // namespace fvsim
