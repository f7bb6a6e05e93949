#include "erosion/harness.hpp"

#include "erosion/analysis.hpp"
#include "erosion/errors.hpp"
#include "erosion/flows.hpp"
#include "erosion/green.hpp"
#include "erosion/idla.hpp"

#include <CLI11.hpp>
#include <openssl/evp.h>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <exception>
#include <filesystem>
#include <fstream>
#include <limits>
#include <map>
#include <optional>
#include <sstream>
#include <thread>

namespace erosion {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

const std::vector<std::string> kRequired = {"experiment", "domain", "m", "alpha", "delta"};
const std::vector<std::string> kOptional = {
    "n", "sources", "steps", "snapshot_interval", "seeds", "out", "initial", "bernoulli_p", "eps",
    "eps1", "eps2", "idla_eps", "eps_prime", "C", "D", "replicas", "circulations"};

std::string join(const std::vector<std::string>& xs) {
    std::string s;
    for (const auto& x : xs) s += (s.empty() ? "" : ", ") + x;
    return s;
}

template <class T>
T get(const json& j, const char* key) {
    try {
        return j.at(key).get<T>();
    } catch (const json::exception&) {
        throw ConfigError(std::string("config key '") + key + "' has the wrong type");
    }
}

double get_number(const json& j, const char* key) {
    if (!j.at(key).is_number()) throw ConfigError(std::string("config key '") + key + "' must be a number");
    return j.at(key).get<double>();
}

std::int64_t get_integer(const json& j, const char* key) {
    if (!j.at(key).is_number_integer()) throw ConfigError(std::string("config key '") + key + "' must be an integer");
    return j.at(key).get<std::int64_t>();
}

const char* initial_name(InitialKind k) {
    switch (k) {
    case InitialKind::UniformExact: return "uniform";
    case InitialKind::LevelSet: return "level-set";
    case InitialKind::BernoulliRepaired: return "bernoulli";
    }
    return "uniform";
}

InitialKind parse_initial(const std::string& s) {
    if (s == "uniform") return InitialKind::UniformExact;
    if (s == "level-set") return InitialKind::LevelSet;
    if (s == "bernoulli") return InitialKind::BernoulliRepaired;
    throw ConfigError("config key 'initial' must be one of uniform, level-set, bernoulli");
}

DomainSpec parse_domain(const json& d) {
    if (!d.is_object()) throw ConfigError("config key 'domain' must be an object such as {\"family\":\"disc\"}");
    for (const auto& [k, v] : d.items())
        if (k != "family" && k != "c" && k != "theta1" && k != "theta2")
            throw ConfigError("unknown domain key '" + k + "'");
    if (!d.contains("family")) throw ConfigError("domain needs a 'family' (disc or quad)");
    DomainSpec s;
    const auto fam = get<std::string>(d, "family");
    if (fam == "disc") {
        s.family = Family::Disc;
        if (d.contains("c")) throw ConfigError("domain key 'c' only applies to the quad family");
    } else if (fam == "quad") {
        s.family = Family::Quadratic;
        if (!d.contains("c")) throw ConfigError("quad domain needs 'c'");
        s.c = get_number(d, "c");
    } else {
        throw ConfigError("domain family must be disc or quad, got '" + fam + "'");
    }
    if (d.contains("theta1")) s.theta1 = get_number(d, "theta1");
    if (d.contains("theta2")) s.theta2 = get_number(d, "theta2");
    return s;
}

json domain_json(const DomainSpec& s) {
    json d;
    d["family"] = s.family == Family::Disc ? "disc" : "quad";
    if (s.family == Family::Quadratic) d["c"] = s.c;
    d["theta1"] = s.theta1;
    d["theta2"] = s.theta2;
    return d;
}

std::string fmt(double x) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

std::string fmt_short(double x) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.6g", x);
    return buf;
}

std::ofstream open_out(const fs::path& p) {
    std::ofstream f(p, std::ios::binary);
    if (!f) throw ConfigError("cannot write " + p.string());
    return f;
}

std::string seed_tag(std::uint64_t s) { return "seed" + std::to_string(s); }

struct Outputs {
    fs::path dir;
    std::vector<std::string> files;
    json summary = json::object();

    fs::path add(const std::string& name) {
        files.push_back(name);
        return dir / name;
    }
};

void write_manifest(const std::string& command, const RunConfig& cfg, const Outputs& o) {
    json m;
    m["tool"] = "erosion_lab";
    m["command"] = command;
    m["config"] = to_json(cfg);
    m["config_hash"] = config_hash(cfg);
    m["outputs"] = o.files;
    m["summary"] = o.summary;
    auto f = open_out(o.dir / (command == "report" ? "report_manifest.json" : "manifest.json"));
    f << m.dump(2) << '\n';
}

std::vector<cplx> interface_points(const LatticeDomain& lat, double alpha) {
    return geodesic_points(lat.domain(), beta_of_alpha(lat.domain(), alpha), 4 * lat.n());
}

// Subcommands. Each returns the one-line summary.

std::string cmd_discretize(const RunConfig& cfg, Outputs& o) {
    const auto lat = build_lattice(cfg);
    {
        auto f = open_out(o.add("lattice.csv"));
        write_lattice_csv(lat, f);
    }
    RenderOptions ro;
    ro.scale = std::max(1, 256 / lat.n());
    Configuration blobs;
    blobs.color.assign(static_cast<std::size_t>(lat.size()), kRed);
    for (int v : lat.blob(1)) blobs.set(v, kBlue);
    {
        auto f = open_out(o.add("lattice.ppm"));
        write_ppm(render_configuration(lat, blobs, ro), f);
    }
    o.summary = {{"n", lat.n()}, {"vertices", lat.size()}, {"edges", lat.graph().num_edges()},
                 {"blob_size", lat.blob_size()}};
    return "discretize: n=" + std::to_string(lat.n()) + " vertices=" + std::to_string(lat.size()) +
           " blob=" + std::to_string(lat.blob_size());
}

struct SimRow {
    std::uint64_t seed = 0;
    std::int64_t steps = 0;
    ClassifyFlags flags;
    double sym_diff = 0.0;
};

std::string cmd_simulate(const RunConfig& cfg, Outputs& o) {
    const auto lat = build_lattice(cfg);
    const auto field = solve_green(lat);
    const double beta = beta_of_alpha(lat.domain(), cfg.alpha);
    const auto shells = build_shells(lat.domain(), lat.n(), beta, -1);
    const auto curve = interface_points(lat, cfg.alpha);
    const auto region = level_region_mask(lat, beta);
    const int count = static_cast<int>(cfg.seeds.size());
    std::vector<SimRow> rows(static_cast<std::size_t>(count));
    std::vector<std::string> traj_names(rows.size()), raster_names(rows.size());
    for (int i = 0; i < count; ++i) {
        traj_names[i] = "trajectory_" + seed_tag(cfg.seeds[i]) + ".csv";
        raster_names[i] = "final_" + seed_tag(cfg.seeds[i]) + ".ppm";
    }

    parallel_for(count, worker_count(), [&](int i) {
        const std::uint64_t seed = cfg.seeds[i];
        auto state = make_chain(sample_initial(lat, cfg.alpha, cfg.initial, seed, cfg.bernoulli_p), seed);
        auto f = open_out(o.dir / traj_names[i]);
        f << "t,blue_count,wrong_in,wrong_out,w_value,in_A_eps,in_G_eps\n";
        auto log = [&](std::int64_t t) {
            const auto fl = classify(lat, state.config, field, shells, cfg.alpha, cfg.eps, cfg.eps1, cfg.eps2);
            f << t << ',' << state.config.blue_count << ',' << fl.wrong_red_inside << ','
              << fl.wrong_blue_outside << ',' << fmt(fl.weight) << ',' << int(fl.in_A) << ','
              << int(fl.in_G) << '\n';
            return fl;
        };
        log(0);
        for (std::int64_t t = 1; t <= cfg.steps; ++t) {
            erosion_step(lat, state);
            if (t < cfg.steps && cfg.snapshot_interval > 0 && t % cfg.snapshot_interval == 0) log(t);
        }
        SimRow& r = rows[i];
        r.seed = seed;
        r.steps = cfg.steps;
        r.flags = log(cfg.steps);
        r.sym_diff = symmetric_difference_fraction(state.config, region);
        RenderOptions ro;
        ro.scale = std::max(1, 256 / lat.n());
        ro.overlay = curve;
        auto img = open_out(o.dir / raster_names[i]);
        write_ppm(render_configuration(lat, state.config, ro), img);
    });

    for (int i = 0; i < count; ++i) {
        o.files.push_back(traj_names[i]);
        o.files.push_back(raster_names[i]);
    }
    auto f = open_out(o.add("summary.csv"));
    f << "seed,steps,wrong_in,wrong_out,sym_diff,w_value,w_max,in_A_eps,in_G_eps,in_Omega_eps\n";
    const double n2 = static_cast<double>(lat.n()) * lat.n();
    double mean_sd = 0.0, mean_in = 0.0, mean_out = 0.0;
    for (const auto& r : rows) {
        f << r.seed << ',' << r.steps << ',' << r.flags.wrong_red_inside << ',' << r.flags.wrong_blue_outside
          << ',' << fmt(r.sym_diff) << ',' << fmt(r.flags.weight) << ',' << fmt(r.flags.weight_max) << ','
          << int(r.flags.in_A) << ',' << int(r.flags.in_G) << ',' << int(r.flags.in_Omega) << '\n';
        mean_sd += r.sym_diff / count;
        mean_in += r.flags.wrong_red_inside / n2 / count;
        mean_out += r.flags.wrong_blue_outside / n2 / count;
    }
    o.summary = {{"mean_sym_diff", mean_sd}, {"mean_wrong_in_fraction", mean_in},
                 {"mean_wrong_out_fraction", mean_out}, {"beta", beta}};
    return "simulate: n=" + std::to_string(lat.n()) + " seeds=" + std::to_string(count) +
           " steps=" + std::to_string(cfg.steps) + " mean_sym_diff=" + fmt_short(mean_sd);
}

std::string cmd_idla(const RunConfig& cfg, Outputs& o) {
    const auto lat = build_lattice(cfg);
    AnnulusOptions opts;
    opts.C = cfg.C;
    opts.D = cfg.D;
    opts.record_stages = true;
    const double eps_prime = cfg.eps_prime > 0 ? cfg.eps_prime : cfg.idla_eps / cfg.D;
    const int count = static_cast<int>(cfg.seeds.size());
    std::vector<AnnulusReport> parts(static_cast<std::size_t>(count));
    parallel_for(count, worker_count(), [&](int i) {
        parts[i] = annulus_experiment(lat, cfg.alpha, cfg.idla_eps, eps_prime, {cfg.seeds[i]}, opts);
    });
    AnnulusReport rep = parts.front();
    rep.seeds.clear();
    rep.max_statistic = 0.0;
    rep.contained = true;
    for (const auto& p : parts) {
        rep.seeds.insert(rep.seeds.end(), p.seeds.begin(), p.seeds.end());
        rep.max_statistic = std::max(rep.max_statistic, p.max_statistic);
        rep.contained = rep.contained && p.contained;
    }
    {
        auto f = open_out(o.add("annulus.csv"));
        f << "seed,new_sites,deepest_h,deepest_fraction,depth,statistic,contained\n";
        for (const auto& s : rep.seeds)
            f << s.seed << ',' << s.new_sites << ',' << fmt(s.deepest_h) << ',' << fmt(s.deepest_fraction)
              << ',' << fmt(s.depth) << ',' << fmt(s.statistic) << ',' << int(s.contained) << '\n';
    }
    {
        auto f = open_out(o.add("stages.csv"));
        write_stage_csv(rep, f);
    }
    o.summary = {{"particles", rep.particles}, {"initial_shells", rep.initial_shells},
                 {"empirical_C", rep.max_statistic}, {"C", rep.C}, {"contained", rep.contained}};
    return "idla: n=" + std::to_string(lat.n()) + " particles=" + std::to_string(rep.particles) +
           " empirical_C=" + fmt_short(rep.max_statistic) + " contained(C=" + fmt_short(rep.C) +
           ")=" + (rep.contained ? "yes" : "no");
}

std::string cmd_green(const RunConfig& cfg, Outputs& o, bool continuum) {
    const auto lat = build_lattice(cfg);
    const auto field = solve_green(lat);
    {
        auto f = open_out(o.add("green.csv"));
        write_green_csv(lat, field.values, f);
    }
    RenderOptions ro;
    ro.scale = std::max(1, 256 / lat.n());
    {
        auto f = open_out(o.add("green.ppm"));
        write_ppm(render_field(lat, field.values, ro), f);
    }
    o.summary = {{"n", lat.n()}, {"max_residual", field.max_residual},
                 {"iterations", field.info.iterations}};
    std::string line = "green: n=" + std::to_string(lat.n()) + " residual=" + fmt_short(field.max_residual);
    if (continuum) {
        const auto cg = ContinuumGreen::for_lattice(lat);
        const auto rows = compare_green_continuum({&lat}, cg);
        auto f = open_out(o.add("green_continuum.csv"));
        f << "m,n,supnorm,fitted_scale,supnorm_fitted,value_at_zero\n";
        for (const auto& r : rows)
            f << r.m << ',' << r.n << ',' << fmt(r.supnorm) << ',' << fmt(r.fitted_scale) << ','
              << fmt(r.supnorm_fitted) << ',' << fmt(r.value_at_zero) << '\n';
        o.summary["supnorm"] = rows.front().supnorm;
        line += " sup|G_n-G_*|=" + fmt_short(rows.front().supnorm);
    }
    return line;
}

std::string cmd_predict(const RunConfig& cfg, Outputs& o, std::ostream& out) {
    const SmoothDomain dom(cfg.domain);
    const double beta = beta_of_alpha(dom, cfg.alpha);
    const double area = area_of_level_region(dom, beta) / dom.area();
    const auto pts = geodesic_points(dom, beta, 256);
    {
        auto f = open_out(o.add("geodesic.csv"));
        f << "x,y\n";
        for (cplx z : pts) f << fmt(z.real()) << ',' << fmt(z.imag()) << '\n';
    }
    char buf[96];
    std::snprintf(buf, sizeof buf, "beta=%.10f", beta);
    out << buf << '\n';
    o.summary = {{"alpha", cfg.alpha}, {"beta", beta}, {"area_fraction", area}};
    return "predict: alpha=" + fmt_short(cfg.alpha) + " " + buf + " area_fraction=" + fmt_short(area);
}

std::string cmd_drift(const RunConfig& cfg, Outputs& o) {
    const auto lat = build_lattice(cfg);
    const auto field = solve_green(lat);
    const int count = static_cast<int>(cfg.seeds.size());
    std::vector<DriftResult> ex(static_cast<std::size_t>(count));
    std::vector<McEstimate> mc(ex.size());
    parallel_for(count, worker_count(), [&](int i) {
        const auto c = sample_initial(lat, cfg.alpha, cfg.initial, cfg.seeds[i], cfg.bernoulli_p);
        ex[i] = drift_exact(lat, c, field, cfg.replicas, cfg.seeds[i]);
        mc[i] = drift_mc(lat, c, field, cfg.replicas, cfg.seeds[i]);
    });
    auto f = open_out(o.add("drift.csv"));
    f << "seed,drift_exact,drift_mc,stderr,fallback\n";
    int agree = 0;
    for (int i = 0; i < count; ++i) {
        f << cfg.seeds[i] << ',' << fmt(ex[i].value) << ',' << fmt(mc[i].estimate) << ','
          << fmt(mc[i].stderr_) << ',' << int(ex[i].fallback) << '\n';
        agree += std::abs(ex[i].value - mc[i].estimate) <= 3 * mc[i].stderr_ + 1e-12;
    }
    o.summary = {{"within_3_sigma", agree}, {"configs", count}};
    return "drift: n=" + std::to_string(lat.n()) + " configs=" + std::to_string(count) +
           " within_3sigma=" + std::to_string(agree);
}

std::string cmd_flows_check(const RunConfig& cfg, Outputs& o, bool& failed) {
    const auto lat = build_lattice(cfg);
    const auto field = solve_green(lat);
    const int count = static_cast<int>(cfg.seeds.size());
    std::vector<EnergyReport> reps(static_cast<std::size_t>(count));
    std::vector<int> violations(reps.size(), 0);
    std::vector<double> min_excess(reps.size(), 0.0);
    parallel_for(count, worker_count(), [&](int i) {
        const auto c = sample_initial(lat, cfg.alpha, cfg.initial, cfg.seeds[i], cfg.bernoulli_p);
        reps[i] = energy_decomposition_check(lat, c, field);
        Rng rng(cfg.seeds[i], 0, Rng::tag("circulation"));
        std::vector<Flow> trials;
        for (int k = 0; k < cfg.circulations; ++k) {
            Flow t = gradient(lat.graph(), field.values);
            t += random_circulation(lat, 8, rng);
            trials.push_back(std::move(t));
        }
        const auto verdicts = thomson_check(lat, field, trials);
        double mn = std::numeric_limits<double>::infinity();
        for (const auto& v : verdicts) {
            violations[i] += !(v.accepted && v.holds);
            mn = std::min(mn, v.excess);
        }
        min_excess[i] = verdicts.empty() ? 0.0 : mn;
    });
    int bad = 0, disjoint = 0;
    {
        auto f = open_out(o.add("energy.csv"));
        write_energy_csv_header(f);
        for (int i = 0; i < count; ++i) write_energy_csv_row(f, static_cast<int>(cfg.seeds[i]), reps[i]);
    }
    {
        auto f = open_out(o.add("thomson.csv"));
        f << "seed,trials,violations,min_excess,regime,star_monotone,splits,wired_monotone,drift_bound\n";
        for (int i = 0; i < count; ++i) {
            const auto& r = reps[i];
            f << cfg.seeds[i] << ',' << cfg.circulations << ',' << violations[i] << ',' << fmt(min_excess[i])
              << ',' << to_string(r.regime) << ',' << int(r.star_monotone) << ',' << int(r.splits) << ','
              << int(r.wired_monotone) << ',' << int(r.drift_bound) << '\n';
            disjoint += r.disjoint;
            const bool ok = violations[i] == 0 && r.wired_monotone && r.drift_bound &&
                            (!r.disjoint || (r.star_monotone && r.splits));
            bad += !ok;
        }
    }
    failed = bad > 0;
    o.summary = {{"configs", count}, {"disjoint", disjoint}, {"failed", bad}};
    return "flows-check: n=" + std::to_string(lat.n()) + " configs=" + std::to_string(count) +
           " disjoint=" + std::to_string(disjoint) + " failed=" + std::to_string(bad);
}

std::vector<std::string> split_csv(const std::string& line) {
    std::vector<std::string> out;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) out.push_back(cell);
    return out;
}

std::string cmd_report(const RunConfig& cfg, Outputs& o) {
    const fs::path src = fs::path(cfg.out) / "summary.csv";
    std::ifstream in(src);
    if (!in) throw ConfigError("report needs " + src.string() + " from an earlier simulate run");
    std::string line;
    std::getline(in, line);
    const auto head = split_csv(line);
    std::map<std::string, std::vector<double>> cols;
    int rows = 0;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        const auto cells = split_csv(line);
        if (cells.size() != head.size()) throw ConfigError("malformed row in " + src.string());
        for (std::size_t k = 0; k < cells.size(); ++k) cols[head[k]].push_back(std::stod(cells[k]));
        ++rows;
    }
    if (rows == 0) throw ConfigError(src.string() + " has no rows");
    json stats = json::object();
    for (const auto& [name, v] : cols) {
        if (name == "seed") continue;
        double mean = 0.0, var = 0.0;
        for (double x : v) mean += x / rows;
        for (double x : v) var += (x - mean) * (x - mean);
        stats[name] = {{"mean", mean}, {"sd", rows > 1 ? std::sqrt(var / (rows - 1)) : 0.0},
                       {"min", *std::min_element(v.begin(), v.end())},
                       {"max", *std::max_element(v.begin(), v.end())}};
    }
    {
        auto f = open_out(o.add("report.json"));
        f << json{{"rows", rows}, {"columns", stats}}.dump(2) << '\n';
    }
    o.summary = {{"rows", rows}};
    std::string line_out = "report: rows=" + std::to_string(rows);
    if (cols.count("sym_diff")) line_out += " mean_sym_diff=" + fmt_short(stats["sym_diff"]["mean"].get<double>());
    return line_out;
}

} // namespace

RunConfig parse_config(const json& j) {
    if (!j.is_object()) throw ConfigError("config must be a JSON object");
    std::vector<std::string> missing;
    for (const auto& k : kRequired)
        if (!j.contains(k)) missing.push_back(k);
    if (!missing.empty()) throw ConfigError("missing required keys: " + join(missing));
    for (const auto& [k, v] : j.items())
        if (std::find(kRequired.begin(), kRequired.end(), k) == kRequired.end() &&
            std::find(kOptional.begin(), kOptional.end(), k) == kOptional.end())
            throw ConfigError("unknown config key '" + k + "'");

    RunConfig c;
    c.experiment = get<std::string>(j, "experiment");
    c.domain = parse_domain(j.at("domain"));
    c.m = static_cast<int>(get_integer(j, "m"));
    c.alpha = get_number(j, "alpha");
    c.delta = get_number(j, "delta");
    if (j.contains("n")) c.n = static_cast<int>(get_integer(j, "n"));
    if (j.contains("sources")) {
        const auto s = get<std::string>(j, "sources");
        if (s == "blob") c.sources = SourceMode::Blob;
        else if (s == "point") c.sources = SourceMode::Point;
        else throw ConfigError("config key 'sources' must be blob or point");
    }
    if (j.contains("steps")) c.steps = get_integer(j, "steps");
    if (j.contains("snapshot_interval")) c.snapshot_interval = get_integer(j, "snapshot_interval");
    if (j.contains("seeds")) {
        c.seeds = get<std::vector<std::uint64_t>>(j, "seeds");
        if (c.seeds.empty()) throw ConfigError("config key 'seeds' must be a nonempty list");
    }
    if (j.contains("out")) c.out = get<std::string>(j, "out");
    if (j.contains("initial")) c.initial = parse_initial(get<std::string>(j, "initial"));
    if (j.contains("bernoulli_p")) c.bernoulli_p = get_number(j, "bernoulli_p");
    if (j.contains("eps")) c.eps = get_number(j, "eps");
    if (j.contains("eps1")) c.eps1 = get_number(j, "eps1");
    if (j.contains("eps2")) c.eps2 = get_number(j, "eps2");
    if (j.contains("idla_eps")) c.idla_eps = get_number(j, "idla_eps");
    if (j.contains("eps_prime")) c.eps_prime = get_number(j, "eps_prime");
    if (j.contains("C")) c.C = get_number(j, "C");
    if (j.contains("D")) c.D = get_number(j, "D");
    if (j.contains("replicas")) c.replicas = get_integer(j, "replicas");
    if (j.contains("circulations")) c.circulations = static_cast<int>(get_integer(j, "circulations"));
    validate(c);
    return c;
}

void validate(const RunConfig& c) {
    if (std::find(kSubcommands.begin(), kSubcommands.end(), c.experiment) == kSubcommands.end())
        throw ConfigError("experiment must be one of " + join(kSubcommands) + ", got '" + c.experiment + "'");
    if (c.m < 3 || c.m > 12) throw ConfigError("m must lie in [3, 12]");
    if (c.n != 0 && c.n < 8) throw ConfigError("n must be at least 8");
    if (!(c.alpha > 0.0 && c.alpha <= 0.5)) throw ConfigError("alpha must lie in (0, 1/2]");
    if (!(c.delta > 0.0)) throw ConfigError("delta must be positive");
    if (c.steps < 0) throw ConfigError("steps must be nonnegative");
    if (c.snapshot_interval < 0) throw ConfigError("snapshot_interval must be nonnegative");
    if (!(c.bernoulli_p >= 0.0 && c.bernoulli_p <= 1.0)) throw ConfigError("bernoulli_p must lie in [0, 1]");
    for (double e : {c.eps, c.eps1, c.eps2})
        if (!(e > 0.0 && e < 1.0)) throw ConfigError("eps, eps1 and eps2 must lie in (0, 1)");
    if (!(c.idla_eps > 0.0 && c.idla_eps < 1.0)) throw ConfigError("idla_eps must lie in (0, 1)");
    if (!(c.D > 0.0) || !(c.C > 0.0)) throw ConfigError("C and D must be positive");
    if (c.eps_prime < 0.0 || c.eps_prime > c.idla_eps / c.D)
        throw ConfigError("eps_prime must lie in [0, idla_eps / D]");
    if (c.replicas < 1) throw ConfigError("replicas must be positive");
    if (c.circulations < 0) throw ConfigError("circulations must be nonnegative");
    const int n = c.n > 0 ? c.n : (1 << c.m);
    if ((c.experiment == "simulate" || c.experiment == "idla") && n < 16)
        throw ConfigError(c.experiment + " needs a mesh with n >= 16");
    try {
        const SmoothDomain dom(c.domain);
        inward_point(dom, dom.x1(), c.delta);
        inward_point(dom, dom.x2(), c.delta);
    } catch (const ArgumentError& e) {
        throw ConfigError(std::string("domain: ") + e.what());
    } catch (const DomainError& e) {
        throw ConfigError(std::string("delta too large for the domain: ") + e.what());
    }
}

RunConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot read config file " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    const std::string text = ss.str();
    if (text.find_first_not_of(" \t\r\n") == std::string::npos)
        throw ConfigError("empty config; missing required keys: " + join(kRequired));
    json j;
    try {
        j = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ConfigError(std::string("config is not valid JSON: ") + e.what());
    }
    return parse_config(j);
}

json to_json(const RunConfig& c) {
    json j;
    j["experiment"] = c.experiment;
    j["domain"] = domain_json(c.domain);
    j["m"] = c.m;
    if (c.n != 0) j["n"] = c.n;
    j["alpha"] = c.alpha;
    j["delta"] = c.delta;
    j["sources"] = c.sources == SourceMode::Blob ? "blob" : "point";
    j["steps"] = c.steps;
    j["snapshot_interval"] = c.snapshot_interval;
    j["seeds"] = c.seeds;
    j["out"] = c.out;
    j["initial"] = initial_name(c.initial);
    j["bernoulli_p"] = c.bernoulli_p;
    j["eps"] = c.eps;
    j["eps1"] = c.eps1;
    j["eps2"] = c.eps2;
    j["idla_eps"] = c.idla_eps;
    j["eps_prime"] = c.eps_prime;
    j["C"] = c.C;
    j["D"] = c.D;
    j["replicas"] = c.replicas;
    j["circulations"] = c.circulations;
    return j;
}

std::string config_hash(const RunConfig& cfg) {
    json j = to_json(cfg);
    j.erase("out");
    const std::string body = j.dump();
    const std::string obj = "blob " + std::to_string(body.size()) + std::string(1, '\0') + body;
    unsigned char md[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    if (EVP_Digest(obj.data(), obj.size(), md, &len, EVP_sha1(), nullptr) != 1)
        throw NumericalError("sha1 digest failed");
    static const char* hex = "0123456789abcdef";
    std::string s;
    for (unsigned int i = 0; i < len; ++i) {
        s += hex[md[i] >> 4];
        s += hex[md[i] & 15];
    }
    return s;
}

LatticeDomain build_lattice(const RunConfig& cfg) {
    const SmoothDomain dom(cfg.domain);
    return cfg.n > 0 ? discretize_n(dom, cfg.n, cfg.delta, cfg.sources)
                     : discretize(dom, cfg.m, cfg.delta, cfg.sources);
}

int worker_count() {
    if (const char* env = std::getenv("EROSION_LAB_THREADS")) {
        char* end = nullptr;
        const long v = std::strtol(env, &end, 10);
        if (end == env || *end != '\0' || v < 1)
            throw ConfigError(std::string("EROSION_LAB_THREADS must be a positive integer, got '") + env + "'");
        return static_cast<int>(v);
    }
    return std::max(1u, std::thread::hardware_concurrency());
}

void parallel_for(int count, int workers, const std::function<void(int)>& fn) {
    workers = std::max(1, std::min(workers, count));
    std::vector<std::exception_ptr> errors(static_cast<std::size_t>(std::max(count, 0)));
    std::atomic<int> next{0};
    auto work = [&] {
        for (int i = next++; i < count; i = next++) {
            try {
                fn(i);
            } catch (...) {
                errors[i] = std::current_exception();
            }
        }
    };
    if (workers == 1) {
        work();
    } else {
        std::vector<std::thread> pool;
        for (int w = 0; w < workers; ++w) pool.emplace_back(work);
        for (auto& t : pool) t.join();
    }
    for (auto& e : errors)
        if (e) std::rethrow_exception(e);
}

namespace {

struct Flags {
    std::optional<std::string> config, domain, sources, initial, out;
    std::optional<double> c, theta1, theta2, alpha, delta, bernoulli_p, eps, eps1, eps2, idla_eps, eps_prime,
        C, D;
    std::optional<int> m, n, circulations;
    std::optional<std::int64_t> steps, snapshot, replicas;
    std::vector<std::uint64_t> seeds;
    bool continuum = false;
};

void add_flags(CLI::App* sub, Flags& f) {
    sub->add_option("--config", f.config, "JSON run config; flags override its keys")->check(CLI::ExistingFile);
    sub->add_option("--domain", f.domain, "Domain family: disc (default) or quad");
    sub->add_option("--c", f.c, "Quadratic family coefficient, |c| <= 0.4");
    sub->add_option("--theta1", f.theta1, "Angle of mark x1 on the preimage disc (default -pi/2)");
    sub->add_option("--theta2", f.theta2, "Angle of mark x2 on the preimage disc (default pi/2)");
    sub->add_option("--m", f.m, "Mesh exponent, n = 2^m (default 6)");
    sub->add_option("--n", f.n, "Non-dyadic mesh size overriding 2^m");
    sub->add_option("--alpha", f.alpha, "Blue area fraction in (0, 1/2] (default 0.5)");
    sub->add_option("--delta", f.delta, "Source offset delta (default 0.2)");
    sub->add_option("--sources", f.sources, "blob (default) or point");
    sub->add_option("--steps", f.steps, "Chain steps (default 0)");
    sub->add_option("--snapshot", f.snapshot, "Trajectory row interval in steps (default: endpoints)");
    sub->add_option("--seed,--seeds", f.seeds, "One or more seeds (default 1)");
    sub->add_option("--initial", f.initial, "Initial state: uniform (default), level-set, bernoulli");
    sub->add_option("--bernoulli-p", f.bernoulli_p, "Colouring probability of the bernoulli start (default 1/3)");
    sub->add_option("--eps", f.eps, "Good-set tolerance (default 0.05)");
    sub->add_option("--eps1", f.eps1, "First weight tolerance (default 0.05)");
    sub->add_option("--eps2", f.eps2, "Second weight tolerance (default 0.05)");
    sub->add_option("--idla-eps", f.idla_eps, "IDLA particle fraction eps (default 0.02)");
    sub->add_option("--eps-prime", f.eps_prime, "Initial IDLA shell fraction (default idla_eps / D)");
    sub->add_option("--C", f.C, "Annulus containment constant (default 8)");
    sub->add_option("--D", f.D, "Ratio bound eps / eps_prime (default 10)");
    sub->add_option("--replicas", f.replicas, "Monte Carlo replicas (default 10000)");
    sub->add_option("--circulations", f.circulations, "Thomson trial flows per config (default 100)");
    sub->add_option("--out", f.out, "Output directory (default out)");
}

json merged_config(const std::string& command, const Flags& f) {
    json j;
    if (f.config) {
        std::ifstream in(*f.config);
        std::stringstream ss;
        ss << in.rdbuf();
        const std::string text = ss.str();
        if (text.find_first_not_of(" \t\r\n") == std::string::npos)
            throw ConfigError("empty config; missing required keys: " + join(kRequired));
        try {
            j = json::parse(text);
        } catch (const json::parse_error& e) {
            throw ConfigError(std::string("config is not valid JSON: ") + e.what());
        }
        if (!j.is_object()) throw ConfigError("config must be a JSON object");
        if (j.contains("experiment") && j["experiment"] != command)
            throw ConfigError("config experiment '" + j["experiment"].dump() + "' does not match subcommand '" +
                              command + "'");
    } else {
        j = {{"experiment", command}, {"domain", {{"family", "disc"}}}, {"m", 6}, {"alpha", 0.5}, {"delta", 0.2}};
    }
    if (f.domain) {
        j["domain"] = {{"family", *f.domain}};
        if (f.c) j["domain"]["c"] = *f.c;
    } else if (f.c) {
        if (!j.contains("domain") || !j["domain"].is_object()) j["domain"] = json::object();
        j["domain"]["c"] = *f.c;
        j["domain"]["family"] = "quad";
    }
    if (f.theta1) j["domain"]["theta1"] = *f.theta1;
    if (f.theta2) j["domain"]["theta2"] = *f.theta2;
    auto put = [&](const char* key, const auto& opt) {
        if (opt) j[key] = *opt;
    };
    put("m", f.m);
    put("n", f.n);
    put("alpha", f.alpha);
    put("delta", f.delta);
    put("sources", f.sources);
    put("steps", f.steps);
    put("snapshot_interval", f.snapshot);
    put("initial", f.initial);
    put("bernoulli_p", f.bernoulli_p);
    put("eps", f.eps);
    put("eps1", f.eps1);
    put("eps2", f.eps2);
    put("idla_eps", f.idla_eps);
    put("eps_prime", f.eps_prime);
    put("C", f.C);
    put("D", f.D);
    put("replicas", f.replicas);
    put("circulations", f.circulations);
    put("out", f.out);
    if (!f.seeds.empty()) j["seeds"] = f.seeds;
    return j;
}

} // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"Competitive erosion laboratory"};
    app.require_subcommand(1, 1);
    Flags flags;
    std::map<std::string, CLI::App*> subs;
    const std::map<std::string, std::string> help = {
        {"discretize", "Build the lattice and write its vertex table"},
        {"simulate", "Run the erosion chain per seed; trajectory CSV and final raster"},
        {"idla", "Annulus containment experiment for IDLA"},
        {"green", "Solve the discrete Green function"},
        {"predict", "Print the predicted interface level beta(alpha)"},
        {"drift", "Exact and Monte Carlo one-step drift of the weight"},
        {"flows-check", "Energy inequalities and Thomson checks on sampled configurations"},
        {"report", "Aggregate summary.csv of an earlier simulate run in --out"}};
    for (const auto& name : kSubcommands) {
        auto* s = app.add_subcommand(name, help.at(name));
        add_flags(s, flags);
        if (name == "green") s->add_flag("--continuum", flags.continuum, "Also compare with the continuum limit");
        subs[name] = s;
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        app.exit(e, out, err);
        return 0;
    } catch (const CLI::CallForAllHelp& e) {
        app.exit(e, out, err);
        return 0;
    } catch (const CLI::ParseError& e) {
        app.exit(e, out, err);
        err << app.help();
        return 2;
    }

    std::string command;
    for (const auto& [name, s] : subs)
        if (s->parsed()) command = name;

    try {
        const RunConfig cfg = parse_config(merged_config(command, flags));
        Outputs o;
        o.dir = cfg.out;
        fs::create_directories(o.dir);
        std::string line;
        bool failed = false;
        if (command == "discretize") line = cmd_discretize(cfg, o);
        else if (command == "simulate") line = cmd_simulate(cfg, o);
        else if (command == "idla") line = cmd_idla(cfg, o);
        else if (command == "green") line = cmd_green(cfg, o, flags.continuum);
        else if (command == "predict") line = cmd_predict(cfg, o, out);
        else if (command == "drift") line = cmd_drift(cfg, o);
        else if (command == "flows-check") line = cmd_flows_check(cfg, o, failed);
        else line = cmd_report(cfg, o);
        write_manifest(command, cfg, o);
        out << line << '\n';
        if (failed) {
            err << "numerical failure: an inequality check did not hold\n";
            return 3;
        }
        return 0;
    } catch (const ConfigError& e) {
        err << "config error: " << e.what() << '\n';
        return 2;
    } catch (const ArgumentError& e) {
        err << "config error: " << e.what() << '\n';
        return 2;
    } catch (const DomainError& e) {
        err << "config error: " << e.what() << '\n';
        return 2;
    } catch (const fs::filesystem_error& e) {
        err << "config error: " << e.what() << '\n';
        return 2;
    } catch (const NumericalError& e) {
        err << "numerical failure: " << e.what() << '\n';
        return 3;
    } catch (const std::exception& e) {
        err << "numerical failure: " << e.what() << '\n';
        return 3;
    }
}

} // namespace erosion
