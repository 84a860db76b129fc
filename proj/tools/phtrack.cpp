#include "phtrack/config.hpp"
#include "phtrack/report.hpp"
#include "phtrack/scenarios.hpp"
#include "phtrack/sim.hpp"

#include <CLI11.hpp>
#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include <chrono>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <random>

namespace {

using namespace phtrack;

constexpr const char* kVersion = "0.1.0";
constexpr int kPass = 0;
constexpr int kError = 1;
constexpr int kFail = 2;

struct Options {
    std::string config;
    std::string out;
    std::string compare_out;
    std::optional<double> dt;
    std::optional<double> horizon;
    std::optional<std::uint64_t> seed;
    bool unsafe = false;
};

void setup_logging() {
    auto logger = spdlog::stderr_color_mt("phtrack");
    spdlog::set_default_logger(logger);
    spdlog::set_level(spdlog::level::warn);
    if (const char* env = std::getenv("PHTRACK_LOG")) {
        spdlog::set_level(spdlog::level::from_str(env));
    }
}

ScenarioConfig load(const Options& o) {
    if (o.config.empty()) {
        throw ConfigError("--config is required");
    }
    ScenarioConfig c = load_config(o.config);
    spdlog::info("config {} sha256 {}", o.config, c.hash);
    if (o.dt) {
        c.build.dt = *o.dt;
    }
    if (o.horizon) {
        c.build.horizon = *o.horizon;
    }
    if (o.seed) {
        c.build.seed = *o.seed;
    }
    return c;
}

void header(Report& r, const ScenarioConfig& c, const std::string& command) {
    r.comment("phtrack " + std::string(kVersion) + " " + command);
    r.set("config", c.origin);
    r.set("config_hash", c.hash);
    r.set("seed", static_cast<long long>(c.build.seed));
    r.set("tool_version", kVersion);
}

void emit(const Report& r, const std::string& path) {
    if (path.empty()) {
        r.write(std::cout);
        return;
    }
    std::ofstream os(path);
    if (!os) {
        throw Error("cannot write '" + path + "'");
    }
    r.write(os);
}

void write_manifest(const ScenarioConfig& c, const std::string& scenario_id,
                    const std::vector<std::string>& outputs) {
    if (outputs.empty() || outputs.front().empty()) {
        return;
    }
    Report m;
    m.comment("run manifest");
    m.set("scenario", scenario_id);
    m.set("config_hash", c.hash);
    m.set("seed", static_cast<long long>(c.build.seed));
    m.set("tool_version", kVersion);
    std::string outs;
    for (const auto& o : outputs) {
        if (!o.empty()) {
            outs += (outs.empty() ? "" : ",") + o;
        }
    }
    m.set("outputs", outs);
    emit(m, outputs.front() + ".manifest.txt");
}

void add_certificate(Report& r, const ContractionCertificate& cert) {
    r.set("verdict", cert.pass ? "pass" : "fail");
    r.set("reason", cert.reason);
    r.set("hurwitz_ok", cert.hurwitz_ok);
    r.set("abscissa", cert.abscissa);
    r.set("alpha", cert.bounds.alpha);
    r.set("beta", cert.bounds.beta);
    r.set("hessian_min_eigenvalue", cert.bounds.min_eigenvalue);
    r.set("hessian_max_eigenvalue", cert.bounds.max_eigenvalue);
    r.set("hessian_bounds_valid", cert.bounds.valid);
    r.set("sample_count", cert.bounds.sample_count);
    r.set("domain_lower", cert.bounds.domain.lower);
    r.set("domain_upper", cert.bounds.domain.upper);
    if (cert.bounds.witness.size() > 0) {
        r.set("witness", cert.bounds.witness);
    }
    r.set("epsilon", cert.epsilon_found ? format_number(*cert.epsilon_found) : "none");
    r.set("n_axis_distance", cert.n_spectrum_min_redistance);
}

void add_matching(Report& r, const Scenario& s) {
    for (const auto& [name, value] : s.matching.equations) {
        r.set("matching." + name, value);
    }
    r.set("feasibility_residual", s.feasibility);
}

ContractionCertificate certify_config(const ScenarioConfig& c, const Scenario& s) {
    CertifySettings settings;
    settings.n_samples = c.certify_samples;
    settings.seed = c.build.seed;
    return certify_scenario(s, settings);
}

int cmd_certify(const Options& o) {
    const auto start = std::chrono::steady_clock::now();
    const ScenarioConfig c = load(o);
    Report r;
    header(r, c, "certify");
    const Scenario s = build_scenario(c, false);
    r.set("scenario", s.id);
    r.set("controller", to_string(s.tracker->kind()));
    add_matching(r, s);
    const ContractionCertificate cert = certify_config(c, s);
    add_certificate(r, cert);
    const bool gates = s.matching.ok() && s.feasibility <= 1e-6;
    r.set("gates_ok", gates);
    r.set("runtime_s", std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count());
    emit(r, o.out);
    write_manifest(c, s.id, {o.out});
    return cert.pass && gates ? kPass : kFail;
}

Vector random_perturbation(Index dim, double norm, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> g;
    Vector v(dim);
    for (Index i = 0; i < dim; ++i) {
        v(i) = g(rng);
    }
    return norm * v / v.norm();
}

void write_trace(const SimulationTrace& tr, const std::string& path) {
    if (path.empty()) {
        return;
    }
    std::ofstream os(path);
    if (!os) {
        throw Error("cannot write '" + path + "'");
    }
    tr.write_csv(os);
}

int cmd_simulate(const Options& o) {
    const ScenarioConfig c = load(o);
    Report r;
    header(r, c, "simulate");
    const Scenario s = build_scenario(c, true);
    r.set("scenario", s.id);
    r.set("controller", to_string(s.tracker->kind()));
    std::optional<ContractionCertificate> cert;
    if (!o.unsafe) {
        cert = certify_config(c, s);
        r.set("verdict", cert->pass ? "pass" : "fail");
        if (!cert->pass) {
            r.set("reason", cert->reason);
            r.set("status", "refused: design is not certified (use --unsafe to override)");
            r.write(std::cout);
            return kFail;
        }
    } else {
        r.set("verdict", "skipped");
    }
    SimulationOptions so = s.sim;
    so.unsafe = o.unsafe;
    const InitialState x0 = s.initial_state();
    const SimulationTrace tr = simulate(*s.tracker, s.reference, s.schedule, x0, so,
                                        cert ? &*cert : nullptr);
    if (o.out.empty()) {
        tr.write_csv(std::cout);
    } else {
        write_trace(tr, o.out);
    }
    r.set("steps", tr.size());
    if (tr.size() > 0) {
        const double tf = tr.t.back();
        r.set("terminal_err_q", tr.err_q.back());
        r.set("terminal_err_full", tr.err_full.back());
        r.set("final_second_max_err_q1",
              max_coordinate_error(tr, s.reference, 0, std::max(0.0, tf - 1.0), tf));
    }
    if (!o.compare_out.empty() && tr.size() > 0) {
        InitialState xb = x0;
        const Vector dx = random_perturbation(s.tracker->state_dim(), c.perturbation, c.build.seed);
        const Index n = s.plant.dof;
        xb.q += dx.segment(0, n);
        xb.p += dx.segment(n, n);
        xb.c += dx.segment(2 * n, s.tracker->controller_dim());
        const SimulationTrace tb = simulate(*s.tracker, s.reference, s.schedule, xb, so,
                                            cert ? &*cert : nullptr);
        write_trace(tb, o.compare_out);
        const double tf = tr.t.back();
        const ConvergenceFit fit = convergence_fit(tr, tb, 0.1 * tf, tf);
        r.set("convergence_rate", fit.rate);
        r.set("convergence_r2", fit.r2);
    }
    if (!o.out.empty()) {
        r.write(std::cout);
    } else {
        r.write(std::cerr);
    }
    write_manifest(c, s.id, {o.out, o.compare_out});
    return kPass;
}

int cmd_reference(const Options& o) {
    const ScenarioConfig c = load(o);
    Report r;
    header(r, c, "reference");
    const Scenario s = build_scenario(c, false);
    r.set("scenario", s.id);
    const auto grid = s.sim.horizon > 0 ? time_grid(s.reference.t0, s.reference.tf, c.build.dt)
                                        : std::vector<double>{};
    if (o.out.empty()) {
        write_reference_csv(std::cout, s.reference, grid);
    } else {
        std::ofstream os(o.out);
        if (!os) {
            throw Error("cannot write '" + o.out + "'");
        }
        write_reference_csv(os, s.reference, grid);
    }
    r.set("feasibility_residual", s.feasibility);
    const bool ok = s.feasibility <= 1e-6;
    r.set("status", ok ? "pass" : "fail");
    r.write(o.out.empty() ? std::cerr : std::cout);
    write_manifest(c, s.id, {o.out});
    return ok ? kPass : kFail;
}

int cmd_match_check(const Options& o) {
    const ScenarioConfig c = load(o);
    Report r;
    header(r, c, "match-check");
    const Scenario s = build_scenario(c, false);
    r.set("scenario", s.id);
    add_matching(r, s);
    const bool ok = s.matching.ok(1e-8);
    r.set("status", ok ? "pass" : "fail");
    emit(r, o.out);
    write_manifest(c, s.id, {o.out});
    return ok ? kPass : kFail;
}

}  // namespace

int main(int argc, char** argv) {
    setup_logging();
    CLI::App app{"Contraction-based tracking controllers for port-Hamiltonian mechanical systems"};
    app.set_version_flag("--version", kVersion);
    app.require_subcommand(1);
    app.fallthrough();
    Options o;
    app.add_option("--config", o.config, "Scenario config file");
    app.add_option("--out", o.out, "Output path");
    app.add_option("--dt", o.dt, "Integration step (s)");
    app.add_option("--horizon", o.horizon, "Horizon (s)");
    app.add_option("--seed", o.seed, "Sampling seed");
    app.add_flag("--unsafe", o.unsafe, "Simulate even if the certificate fails");

    int code = kPass;
    auto* certify = app.add_subcommand("certify", "Check the contraction certificate");
    certify->callback([&] { code = cmd_certify(o); });
    auto* simulate = app.add_subcommand("simulate", "Simulate the closed loop");
    simulate->add_option("--compare-out", o.compare_out,
                         "Trace of a second run from a perturbed initial state");
    simulate->callback([&] { code = cmd_simulate(o); });
    auto* reference = app.add_subcommand("reference", "Export the reference trajectory");
    reference->callback([&] { code = cmd_reference(o); });
    auto* match = app.add_subcommand("match-check", "Evaluate matching residuals");
    match->callback([&] { code = cmd_match_check(o); });

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? kPass : kError;
    } catch (const phtrack::GateError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kFail;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kError;
    }
    return code;
}
