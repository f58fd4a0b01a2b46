#include "fvsim/scenario.hpp"

#include <cmath>
#include <fstream>
#include <iostream>
#include <sstream>

#include "fvsim/io.hpp"

namespace fvsim {

namespace {

constexpr double kPi = 3.14159265358979323846;

uint64_t derive_seed(uint64_t seed, uint64_t a, uint64_t b = 0) {
    uint64_t sm = seed;
    (void)splitmix64(sm);
    sm ^= splitmix64(sm) + a;
    sm ^= splitmix64(sm) + b;
    return splitmix64(sm);
}

[[noreturn]] void fail(const std::string& msg) { throw ScenarioError("scenario: " + msg); }

const Json& need(const Json& j, const std::string& key) {
    if (!j.contains(key)) fail("missing field '" + key + "'");
    return j.at(key);
}

double as_num(const Json& j, const std::string& key) {
    const Json& v = need(j, key);
    if (!v.is_number()) fail("field '" + key + "' must be a number");
    return v.get<double>();
}

double num_or(const Json& j, const std::string& key, double fallback) {
    return j.contains(key) ? as_num(j, key) : fallback;
}

Vec as_vec(const Json& v, const std::string& key) {
    if (!v.is_array() || v.empty() || v.size() > static_cast<size_t>(kMaxDim))
        fail("field '" + key + "' must be a short numeric array");
    Vec x(static_cast<int>(v.size()));
    for (size_t i = 0; i < v.size(); ++i) x[static_cast<int>(i)] = v[i].get<double>();
    return x;
}

std::vector<double> as_list(const Json& j, const std::string& key) {
    const Json& v = need(j, key);
    if (!v.is_array()) fail("field '" + key + "' must be an array");
    std::vector<double> out;
    for (const auto& e : v) out.push_back(e.get<double>());
    return out;
}

Domain parse_domain(const Json& j) {
    const Json& d = need(j, "domain");
    const std::string type = need(d, "type").get<std::string>();
    if (type == "interval") return Domain::interval(as_num(d, "a"), as_num(d, "b"));
    if (type == "ball") return Domain::ball(as_vec(need(d, "center"), "center"), as_num(d, "radius"));
    if (type == "ellipsoid")
        return Domain::ellipsoid(as_vec(need(d, "center"), "center"),
                                 as_vec(need(d, "semi_axes"), "semi_axes"));
    if (type == "box")
        return Domain::axis_box(as_vec(need(d, "lower"), "lower"),
                                as_vec(need(d, "upper"), "upper"));
    fail("unknown domain type '" + type + "'");
}

InitialLaw parse_init(const Json& j, const std::string& key) {
    const Json& v = need(j, key);
    const std::string type = need(v, "type").get<std::string>();
    if (type == "uniform") return InitialLaw::uniform();
    if (type == "point") return InitialLaw::point(as_vec(need(v, "x"), "x"));
    fail("unknown init type '" + type + "' (expected uniform|point)");
}

// expected-noise proxy for an empirical TV value between clouds of sizes m1, m2
double tv_noise_proxy(int total_bins, long m1, long m2) {
    const double b = static_cast<double>(total_bins);
    return std::sqrt(2.0 * b / (kPi * static_cast<double>(m1))) +
           std::sqrt(2.0 * b / (kPi * static_cast<double>(m2)));
}

Binning scenario_binning(const Scenario& sc, long min_cloud) {
    const int per_axis =
        sc.bins > 0 ? sc.bins : default_bins_per_axis(static_cast<int>(min_cloud), sc.domain.dim());
    return Binning::uniform(sc.domain.bounding_box(), per_axis);
}

double collar_alpha(const Scenario& sc) {
    return sc.alpha > 0.0 ? sc.alpha : 0.1 * sc.domain.inradius();
}

}  // namespace

TimePeriodicModel Scenario::build() const {
    TimePeriodicModel m = build_model(model_name, domain, model_params);
    if (raw.contains("declared")) {
        const Json& d = raw.at("declared");
        m = m.with_declared(num_or(d, "k0", m.declared_k0()), num_or(d, "c0", m.declared_c0()),
                            num_or(d, "kappa_max", m.declared_kappa_max()));
        if (d.contains("period") && as_num(d, "period") != m.period())
            fail("declared.period must match the model period; set model params instead");
    }
    return m;
}

Scenario parse_scenario(const Json& j, const ScenarioOverrides& overrides) {
    Scenario sc;
    sc.raw = j;
    sc.experiment = need(j, "experiment").get<std::string>();
    static const std::vector<std::string> kinds = {"fv-run",   "conditioned-mc", "mixing-curve",
                                                   "fv-vs-mc", "coupling-sweep", "check-model"};
    if (std::find(kinds.begin(), kinds.end(), sc.experiment) == kinds.end())
        fail("unknown experiment '" + sc.experiment + "'");

    sc.domain = parse_domain(j);

    const Json& m = need(j, "model");
    sc.model_name = need(m, "name").get<std::string>();
    (void)find_model(sc.model_name);  // names must resolve at parse time
    if (m.contains("params"))
        for (const auto& [k, v] : m.at("params").items())
            sc.model_params[k] = v.get<double>();

    sc.sim.dt = num_or(j, "dt", 1e-3);
    if (!(sc.sim.dt > 0.0)) fail("dt must be > 0");
    sc.sim.bridge_correction = j.value("bridge_correction", true);
    sc.sim.seed = overrides.seed ? *overrides.seed
                                 : static_cast<uint64_t>(j.value("seed", 1.0));
    sc.sim.workers = overrides.workers ? *overrides.workers
                                       : static_cast<int>(num_or(j, "workers", 1));
    if (sc.sim.workers < 1) fail("workers must be >= 1");

    if (j.contains("init")) sc.init = parse_init(j, "init");
    if (j.contains("init2")) sc.init2 = parse_init(j, "init2");

    sc.s = num_or(j, "s", 0.0);
    sc.t_end = num_or(j, "t_end", 0.0);
    sc.n_particles = static_cast<long>(num_or(j, "n_particles", 1000));
    sc.target_survivors = static_cast<long>(num_or(j, "target_survivors", 3000));
    sc.max_replicas = static_cast<long>(num_or(j, "max_replicas", 2000000));
    sc.replicas = static_cast<long>(num_or(j, "replicas", 10000));
    sc.bins = static_cast<int>(num_or(j, "bins", 0));
    sc.alpha = num_or(j, "alpha", 0.0);
    sc.ref_leg = num_or(j, "ref_leg", 1.0);
    sc.validator_samples = static_cast<int>(num_or(j, "validator_samples", 10000));
    if (j.contains("noise_floor")) sc.noise_floor = as_num(j, "noise_floor");
    if (j.contains("lambda0")) sc.lambda0 = as_num(j, "lambda0");
    if (j.contains("checkpoints")) sc.checkpoints = as_list(j, "checkpoints");
    if (j.contains("separations")) sc.separations = as_list(j, "separations");
    if (j.contains("times")) sc.times = as_list(j, "times");

    if (!std::is_sorted(sc.checkpoints.begin(), sc.checkpoints.end()))
        fail("checkpoints must be sorted");
    for (const double c : sc.checkpoints)
        if (c < sc.s) fail("checkpoints must lie at or after s");
    if (sc.t_end == 0.0 && !sc.checkpoints.empty()) sc.t_end = sc.checkpoints.back();
    if (!sc.checkpoints.empty() && sc.checkpoints.back() > sc.t_end)
        fail("checkpoints must lie in [s, t_end]");

    if (sc.target_survivors < 1) fail("target_survivors must be >= 1");
    if (sc.max_replicas < 1) fail("max_replicas must be >= 1");
    if (sc.replicas < 1) fail("replicas must be >= 1");
    if (sc.bins < 0) fail("bins must be >= 0");

    sc.out_dir = overrides.out_dir ? *overrides.out_dir : j.value("out_dir", std::string("out"));

    // resolved copy for the output artifacts
    sc.raw["experiment"] = sc.experiment;
    sc.raw["dt"] = sc.sim.dt;
    sc.raw["seed"] = sc.sim.seed;
    sc.raw["workers"] = sc.sim.workers;
    sc.raw["bridge_correction"] = sc.sim.bridge_correction;
    sc.raw["out_dir"] = sc.out_dir.string();
    return sc;
}

Scenario load_scenario(const std::filesystem::path& path, const ScenarioOverrides& overrides) {
    std::ifstream in(path);
    if (!in) throw ScenarioError("scenario: cannot open '" + path.string() + "'");
    Json j;
    try {
        in >> j;
    } catch (const Json::exception& e) {
        throw ScenarioError("scenario: parse error in '" + path.string() + "': " + e.what());
    }
    return parse_scenario(j, overrides);
}

namespace {

struct Outputs {
    std::filesystem::path dir;
    Json summary;

    explicit Outputs(const Scenario& sc) : dir(sc.out_dir) {
        summary["scenario"] = sc.raw;
        write_file_atomic(dir / "resolved_scenario.json", sc.raw.dump(2) + "\n");
    }
    void finish() const { write_file_atomic(dir / "summary.json", summary.dump(2) + "\n"); }
};

Json run_check_model(const Scenario& sc) {
    Outputs out(sc);
    const TimePeriodicModel model = sc.build();
    const int n = sc.validator_samples;
    Rng rng = Rng::keyed(sc.sim.seed, StreamTag::validator);

    Json r;
    bool hard_fail = false;

    const int n_time = std::max(1, static_cast<int>(std::sqrt(static_cast<double>(n))));
    const double period_dev = check_periodicity(model, sc.domain, n_time, n_time, rng);
    r["periodicity_deviation"] = period_dev;
    r["periodicity_pass"] = period_dev <= 1e-9;
    hard_fail |= period_dev > 1e-9;

    const double min_sv = check_ellipticity(model, sc.domain, n, rng);
    r["ellipticity_min_singular_value"] = min_sv;
    r["declared_c0"] = model.declared_c0();
    r["ellipticity_pass"] = min_sv >= model.declared_c0() - 1e-9;

    const double lip = estimate_lipschitz(model, sc.domain, n, rng);
    r["lipschitz_estimate"] = lip;
    r["declared_k0"] = model.declared_k0();
    r["lipschitz_pass"] = lip <= model.declared_k0() + 1e-9;

    const auto [kmin, kmax] = sample_kill_rate_range(model, sc.domain, n, rng);
    r["kill_rate_min"] = kmin;
    r["kill_rate_max"] = kmax;
    r["declared_kappa_max"] = model.declared_kappa_max();
    const bool kappa_ok = kmin >= -1e-12 && kmax <= model.declared_kappa_max() + 1e-9;
    r["kill_rate_pass"] = kappa_ok;
    hard_fail |= !kappa_ok;

    // joint pair-covariance must stay PSD for the coupled dynamics
    double lambda0 = 0.0;
    double joint_min_eig = std::numeric_limits<double>::infinity();
    try {
        CouplingParams cp;
        if (sc.lambda0) {
            cp.lambda0 = *sc.lambda0;
        } else {
            cp = default_coupling_params(model, sc.domain, sc.sim.dt, std::min(n, 2000), rng);
        }
        cp.k0 = model.declared_k0();
        lambda0 = cp.lambda0;
        for (int i = 0; i < n; ++i) {
            const double t = model.period() * rng.uniform();
            const Vec x = sample_domain_point(sc.domain, rng);
            const Vec y = sample_domain_point(sc.domain, rng);
            if ((x - y).norm() == 0.0) continue;
            joint_min_eig =
                std::min(joint_min_eig, min_sym_eigenvalue(joint_covariance(model, t, x, y, cp)));
        }
        r["lambda0"] = lambda0;
        r["joint_covariance_min_eigenvalue"] = joint_min_eig;
        r["joint_covariance_pass"] = joint_min_eig >= -1e-9;
        hard_fail |= joint_min_eig < -1e-9;
    } catch (const std::domain_error& e) {
        r["joint_covariance_pass"] = false;
        r["joint_covariance_error"] = e.what();
        hard_fail = true;
    }

    for (const char* key : {"periodicity_pass", "ellipticity_pass", "lipschitz_pass",
                            "kill_rate_pass", "joint_covariance_pass"})
        std::cout << "check-model " << sc.model_name << " " << key << "="
                  << (r[key].get<bool>() ? "yes" : "no") << "\n";

    r["hard_fail"] = hard_fail;
    out.summary["validators"] = r;
    out.finish();
    if (hard_fail) throw ScenarioError("check-model: validator hard failure for '" +
                                       sc.model_name + "' (see summary.json)");
    return out.summary;
}

Json run_fv(const Scenario& sc) {
    Outputs out(sc);
    const TimePeriodicModel model = sc.build();
    if (sc.n_particles < 2) fail("fv-run: n_particles must be >= 2");
    if (!(sc.t_end >= sc.s)) fail("fv-run: t_end must be >= s");

    ParticleSystem sys = fv_init(model, sc.domain, sc.init, static_cast<int>(sc.n_particles),
                                 sc.s, sc.sim);
    const double alpha = collar_alpha(sc);
    out.summary["initial_boundary_mass"] =
        boundary_mass(sys.empirical_measure(), sc.domain, alpha);
    out.summary["alpha"] = alpha;

    std::vector<double> cps = sc.checkpoints.empty() ? std::vector<double>{sc.t_end}
                                                     : sc.checkpoints;
    const auto snaps = fv_run(sys, sc.t_end, cps);

    Json cp_json = Json::array();
    for (size_t k = 0; k < snaps.size(); ++k) {
        std::ostringstream name;
        name << "cloud_" << k << ".csv";
        write_cloud_csv(out.dir / name.str(), snaps[k].cloud);
        const double bm = boundary_mass(snaps[k].cloud, sc.domain, alpha);
        Json c;
        c["time"] = snaps[k].time;
        c["file"] = name.str();
        c["boundary_mass"] = bm;
        cp_json.push_back(c);
        std::cout << "fv-run checkpoint t=" << format_double(snaps[k].time)
                  << " particles=" << snaps[k].cloud.count()
                  << " boundary_mass=" << format_double(bm) << "\n";
    }
    out.summary["checkpoints"] = cp_json;

    CsvBuilder log_csv({"time", "killed", "donor", "kind"});
    for (const auto& ev : sys.rebirth_log()) {
        log_csv.begin_row()
            .add(ev.time)
            .add(static_cast<long>(ev.killed_index))
            .add(static_cast<long>(ev.donor_index))
            .add(ev.kind == RebirthEvent::Kind::Hard ? "hard" : "soft");
    }
    log_csv.write(out.dir / "rebirth_log.csv");

    const auto diag = fv_jump_time_diagnostic(sys.rebirth_log(), sc.s, sc.t_end);
    Json dj;
    dj["count"] = diag.count;
    dj["min_gap"] = std::isfinite(diag.min_gap) ? diag.min_gap : 0.0;
    dj["rate_per_unit_time"] = diag.rate_per_unit_time;
    out.summary["jump_diagnostic"] = dj;

    out.finish();
    return out.summary;
}

Json run_conditioned_mc(const Scenario& sc) {
    Outputs out(sc);
    const TimePeriodicModel model = sc.build();
    if (sc.checkpoints.empty()) fail("conditioned-mc: checkpoints required");

    Json cp_json = Json::array();
    for (size_t k = 0; k < sc.checkpoints.size(); ++k) {
        SimParams sim = sc.sim;
        sim.seed = derive_seed(sc.sim.seed, 100 + k);
        const auto cs = conditioned_sample(model, sc.domain, sc.init, sc.s, sc.checkpoints[k],
                                           sc.target_survivors, sc.max_replicas, sim);
        std::ostringstream name;
        name << "survivors_" << k << ".csv";
        write_cloud_csv(out.dir / name.str(), cs.survivors);
        Json c;
        c["time"] = sc.checkpoints[k];
        c["file"] = name.str();
        c["survivors"] = cs.survivors.count();
        // the acceptance rate of the rejection sampler is the survival estimate
        c["p_hat"] = cs.acceptance_rate;
        c["stderr"] = std::sqrt(cs.acceptance_rate * (1.0 - cs.acceptance_rate) /
                                static_cast<double>(cs.replicas_used));
        c["replicas"] = cs.replicas_used;
        c["dt"] = sc.sim.dt;
        c["seed"] = sc.sim.seed;
        cp_json.push_back(c);
        std::cout << "conditioned-mc checkpoint t=" << format_double(sc.checkpoints[k])
                  << " survivors=" << cs.survivors.count()
                  << " p_hat=" << format_double(cs.acceptance_rate) << "\n";
    }
    out.summary["checkpoints"] = cp_json;
    out.finish();
    return out.summary;
}

Json run_mixing_curve(const Scenario& sc) {
    Outputs out(sc);
    const TimePeriodicModel model = sc.build();
    if (!sc.init2) fail("mixing-curve: init2 required (two initial laws to compare)");
    if (sc.checkpoints.empty()) fail("mixing-curve: checkpoints (the time grid) required");

    const Binning binning = scenario_binning(sc, sc.target_survivors);
    const int total_bins = binning.total_bins();
    const double floor = sc.noise_floor ? *sc.noise_floor
                                        : default_noise_floor(total_bins,
                                                              static_cast<int>(sc.target_survivors));

    std::vector<double> tvs;
    CsvBuilder curve({"t", "tv", "stderr_proxy"});
    Json points = Json::array();
    for (size_t k = 0; k < sc.checkpoints.size(); ++k) {
        const double t = sc.checkpoints[k];
        SimParams sim1 = sc.sim;
        sim1.seed = derive_seed(sc.sim.seed, 2 * k);
        SimParams sim2 = sc.sim;
        sim2.seed = derive_seed(sc.sim.seed, 2 * k + 1);
        const auto c1 = conditioned_sample(model, sc.domain, sc.init, sc.s, t,
                                           sc.target_survivors, sc.max_replicas, sim1);
        const auto c2 = conditioned_sample(model, sc.domain, *sc.init2, sc.s, t,
                                           sc.target_survivors, sc.max_replicas, sim2);
        const double tv = tv_distance(histogram(c1.survivors, binning),
                                      histogram(c2.survivors, binning));
        const double proxy = tv_noise_proxy(total_bins, c1.survivors.count(),
                                            c2.survivors.count());
        tvs.push_back(tv);
        curve.begin_row().add(t).add(tv).add(proxy);
        Json p;
        p["t"] = t;
        p["tv"] = tv;
        p["stderr_proxy"] = proxy;
        points.push_back(p);
        std::cout << "mixing-curve t=" << format_double(t) << " tv=" << format_double(tv)
                  << "\n";
    }
    curve.write(out.dir / "tv_curve.csv");
    out.summary["points"] = points;
    out.summary["bins_per_axis"] = binning.axis_bins(0);
    out.summary["noise_floor"] = floor;

    const RateFit fit = fit_exponential(sc.checkpoints, tvs, floor);
    Json fj;
    fj["C"] = fit.c;
    fj["gamma"] = fit.gamma;
    fj["r_squared"] = fit.r_squared;
    fj["t_lo"] = fit.t_lo;
    fj["t_hi"] = fit.t_hi;
    fj["points_used"] = fit.points_used;
    fj["noise_floor"] = fit.noise_floor;
    out.summary["rate_fit"] = fj;
    write_file_atomic(out.dir / "rate_fit.json", fj.dump(2) + "\n");
    std::cout << "mixing-curve fit gamma=" << format_double(fit.gamma)
              << " C=" << format_double(fit.c) << " r2=" << format_double(fit.r_squared)
              << "\n";

    out.finish();
    return out.summary;
}

Json run_fv_vs_mc(const Scenario& sc) {
    Outputs out(sc);
    const TimePeriodicModel model = sc.build();
    if (sc.checkpoints.empty()) fail("fv-vs-mc: checkpoints required");
    if (sc.n_particles < 2) fail("fv-vs-mc: n_particles must be >= 2");

    // particle side
    ParticleSystem sys = fv_init(model, sc.domain, sc.init, static_cast<int>(sc.n_particles),
                                 sc.s, sc.sim);
    const auto snaps = fv_run(sys, sc.t_end, sc.checkpoints);

    // reference side: the conditioned law propagated leg by leg; each leg
    // restarts the rejection sampler from the previous survivor cloud, which
    // keeps the per-leg acceptance bounded away from zero at long horizons
    std::vector<double> ref_times;
    for (const double c : sc.checkpoints) ref_times.push_back(c);
    std::vector<double> grid;
    double prev = sc.s;
    for (const double t : ref_times) {
        const int legs = std::max(1, static_cast<int>(std::ceil((t - prev) / sc.ref_leg - 1e-12)));
        for (int i = 1; i < legs; ++i) grid.push_back(prev + (t - prev) * i / legs);
        grid.push_back(t);  // checkpoints land exactly on the grid
        prev = t;
    }

    InitialLaw current = sc.init;
    double leg_start = sc.s;
    size_t cp_idx = 0;
    CsvBuilder curve({"t", "tv", "stderr_proxy"});
    Json points = Json::array();
    const Binning binning =
        scenario_binning(sc, std::min(sc.n_particles, sc.target_survivors));
    const int total_bins = binning.total_bins();

    for (size_t g = 0; g < grid.size(); ++g) {
        SimParams sim = sc.sim;
        sim.seed = derive_seed(sc.sim.seed, 500 + g);
        const auto cs = conditioned_sample(model, sc.domain, current, leg_start, grid[g],
                                           sc.target_survivors, sc.max_replicas, sim);
        current = InitialLaw::cloud(cs.survivors);
        leg_start = grid[g];

        if (cp_idx < sc.checkpoints.size() && grid[g] == sc.checkpoints[cp_idx]) {
            const auto& fv_cloud = snaps[cp_idx].cloud;
            const double tv = tv_distance(histogram(fv_cloud, binning),
                                          histogram(cs.survivors, binning));
            const double proxy =
                tv_noise_proxy(total_bins, fv_cloud.count(), cs.survivors.count());
            curve.begin_row().add(grid[g]).add(tv).add(proxy);
            Json p;
            p["t"] = grid[g];
            p["tv"] = tv;
            p["stderr_proxy"] = proxy;
            p["ref_survivors"] = cs.survivors.count();
            p["ref_acceptance"] = cs.acceptance_rate;
            points.push_back(p);
            std::cout << "fv-vs-mc checkpoint t=" << format_double(grid[g])
                      << " tv=" << format_double(tv) << "\n";
            ++cp_idx;
        }
    }
    curve.write(out.dir / "tv_curve.csv");
    out.summary["points"] = points;
    out.summary["bins_per_axis"] = binning.axis_bins(0);
    out.finish();
    return out.summary;
}

Json run_coupling_sweep(const Scenario& sc) {
    Outputs out(sc);
    const TimePeriodicModel model = sc.build();
    if (sc.separations.empty()) fail("coupling-sweep: separations required");
    if (sc.times.empty()) fail("coupling-sweep: times required");

    Rng rng = Rng::keyed(sc.sim.seed, StreamTag::validator, 77);
    CouplingParams base;
    if (sc.lambda0) {
        base.lambda0 = *sc.lambda0;
        base.epsilon_couple = 0.25 * std::sqrt(base.lambda0 * sc.sim.dt);
        base.k0 = model.declared_k0();
    } else {
        base = default_coupling_params(model, sc.domain, sc.sim.dt, 10000, rng);
    }
    CouplingParams wide = base;
    wide.epsilon_couple = 4.0 * base.epsilon_couple;

    const BoundingBox bb = sc.domain.bounding_box();
    Vec center(sc.domain.dim());
    for (int i = 0; i < sc.domain.dim(); ++i) center[i] = 0.5 * (bb.lower[i] + bb.upper[i]);

    CsvBuilder csv({"separation", "t", "p_fail", "stderr", "p_fail_eps4", "stderr_eps4"});
    Json cells = Json::array();
    size_t cell = 0;
    for (const double sep : sc.separations) {
        Vec y1 = center, y2 = center;
        y1[0] += 0.5 * sep;
        y2[0] -= 0.5 * sep;
        if (!sc.domain.contains(y1) || !sc.domain.contains(y2))
            fail("coupling-sweep: separation " + format_double(sep) +
                 " places points outside the domain");
        for (const double t : sc.times) {
            SimParams sim = sc.sim;
            sim.seed = derive_seed(sc.sim.seed, 900 + cell);
            const auto e1 = estimate_coupling_failure(model, sc.domain, y1, y2, sc.s, t,
                                                      sc.replicas, sim, base);
            const auto e4 = estimate_coupling_failure(model, sc.domain, y1, y2, sc.s, t,
                                                      sc.replicas, sim, wide);
            csv.begin_row()
                .add(sep)
                .add(t)
                .add(e1.p_fail)
                .add(e1.stderr_)
                .add(e4.p_fail)
                .add(e4.stderr_);
            Json c;
            c["separation"] = sep;
            c["t"] = t;
            c["p_fail"] = e1.p_fail;
            c["stderr"] = e1.stderr_;
            c["p_fail_eps4"] = e4.p_fail;
            c["stderr_eps4"] = e4.stderr_;
            cells.push_back(c);
            std::cout << "coupling-sweep sep=" << format_double(sep)
                      << " t=" << format_double(t) << " p_fail=" << format_double(e1.p_fail)
                      << "\n";
            ++cell;
        }
    }
    csv.write(out.dir / "coupling_sweep.csv");
    out.summary["cells"] = cells;
    out.summary["lambda0"] = base.lambda0;
    out.summary["epsilon_couple"] = base.epsilon_couple;
    out.summary["epsilon_couple_wide"] = wide.epsilon_couple;
    out.summary["k0"] = base.k0;
    out.finish();
    return out.summary;
}

}  // namespace

RunResult run_scenario(const Scenario& sc) {
    RunResult result;
    try {
        const TimePeriodicModel probe = sc.build();
        if (sc.sim.dt > probe.period() / 10.0)
            std::cerr << "warning: dt=" << format_double(sc.sim.dt)
                      << " exceeds period/10; discretization bias may be visible\n";

        if (sc.experiment == "check-model")
            result.summary = run_check_model(sc);
        else if (sc.experiment == "fv-run")
            result.summary = run_fv(sc);
        else if (sc.experiment == "conditioned-mc")
            result.summary = run_conditioned_mc(sc);
        else if (sc.experiment == "mixing-curve")
            result.summary = run_mixing_curve(sc);
        else if (sc.experiment == "fv-vs-mc")
            result.summary = run_fv_vs_mc(sc);
        else if (sc.experiment == "coupling-sweep")
            result.summary = run_coupling_sweep(sc);
        else
            fail("unknown experiment '" + sc.experiment + "'");
        result.exit_code = 0;
    } catch (const InsufficientSurvivors& e) {
        Json err;
        err["error"]["type"] = "insufficient_survivors";
        err["error"]["message"] = e.what();
        err["error"]["achieved"] = e.achieved;
        result.summary = err;
        result.exit_code = 2;
    } catch (const std::exception& e) {
        Json err;
        err["error"]["type"] = "runtime";
        err["error"]["message"] = e.what();
        result.summary = err;
        result.exit_code = 2;
    }
    if (result.exit_code != 0) {
        std::cout << result.summary.dump() << "\n";
        try {
            write_file_atomic(sc.out_dir / "error.json", result.summary.dump(2) + "\n");
        } catch (...) {
            // the error report itself is best-effort
        }
    }
    return result;
}

RunResult run_scenario_file(const std::filesystem::path& path,
                            const ScenarioOverrides& overrides) {
    try {
        return run_scenario(load_scenario(path, overrides));
    } catch (const std::exception& e) {
        RunResult r;
        Json err;
        err["error"]["type"] = "scenario";
        err["error"]["message"] = e.what();
        r.summary = err;
        r.exit_code = 1;
        std::cout << err.dump() << "\n";
        return r;
    }
}

std::string list_models_text() {
    std::ostringstream os;
    for (const auto& e : model_library()) os << e.name << "  -  " << e.summary << "\n";
    return os.str();
}

std::string describe_model_text(const std::string& name) {
    const auto& e = find_model(name);  // throws on unknown name
    std::ostringstream os;
    os << e.name << "\n  " << e.summary << "\n";
    const Domain d = e.default_domain({});
    os << "  default domain: " << d.describe() << "\n";
    const TimePeriodicModel m = e.build(d, {});
    os << "  declared: k0=" << format_double(m.declared_k0())
       << " c0=" << format_double(m.declared_c0())
       << " kappa_max=" << format_double(m.declared_kappa_max())
       << " period=" << format_double(m.period()) << "\n";
    return os.str();
}

}  // namespace fvsim
