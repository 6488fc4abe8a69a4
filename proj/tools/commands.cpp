#include "commands.hpp"

#include "entrobound/bounds.hpp"
#include "entrobound/csv.hpp"
#include "entrobound/empirical.hpp"
#include "entrobound/error.hpp"
#include "entrobound/ode.hpp"
#include "entrobound/spec_file.hpp"
#include "entrobound/verify.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>

namespace entrobound::cli {

namespace {

void write_file(const std::filesystem::path& path, const std::string& content)
{
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot write " + path.string());
    out << content;
    if (!out) throw Error("failed writing " + path.string());
}

void apply_overrides(SpecFile& spec, const RunOptions& o)
{
    if (o.seed) spec.horizon.seed = *o.seed;
    if (o.t_max) {
        if (!(*o.t_max > spec.t0())) throw ParseError("--t-max must exceed t0", 0);
        spec.horizon.t_max = *o.t_max;
    }
    if (o.dt) {
        if (!(*o.dt > 0.0)) throw ParseError("--dt must be positive", 0);
        spec.horizon.dt = *o.dt;
    }
    if (o.results) {
        spec.results.clear();
        std::stringstream ss(*o.results);
        std::string id;
        const auto& ids = result_ids();
        while (std::getline(ss, id, ',')) {
            if (std::find(ids.begin(), ids.end(), id) == ids.end())
                throw ParseError("unknown result id '" + id + "'", 0);
            spec.results.push_back(id);
        }
    }
    if (o.eps) spec.empirical.eps = parse_real_list(*o.eps);
    if (o.horizons) spec.empirical.horizons = parse_real_list(*o.horizons);
}

int cmd_bounds(const SpecFile& spec, const std::filesystem::path& out, std::ostream& log)
{
    BoundSession session(spec.system, spec.initial_set(), spec.horizon);
    std::string csv = bound_csv_header();
    std::string summary;
    bool converged = true;
    for (const auto& id : spec.results) {
        const auto r = compute_bound(session, spec.system, id, spec.superset);
        csv += bound_csv_row(r);
        summary += "[" + id + "]\n" + bound_key_values(r) + "\n";
        converged = converged && r.converged();
        log << id << " = " << format_real(r.bound) << "\n";
    }
    write_file(out / "bounds.csv", csv);
    write_file(out / "summary.txt", summary);
    return converged ? kOk : kNotConverged;
}

int cmd_empirical(const SpecFile& spec, const std::filesystem::path& out, std::ostream& log)
{
    const auto est = estimate_entropy(spec.system, spec.initial_set(), spec.t0(), spec.empirical, spec.horizon.dt);
    write_file(out / "entropy.csv", entropy_csv(est));
    std::string summary = "estimate = " + format_real(est.estimate) + "\nband = " + format_real(est.band) + "\n";
    if (est.candidates > 0) summary += "candidates = " + std::to_string(est.candidates) + "\n";
    write_file(out / "summary.txt", summary);
    log << "estimate = " << format_real(est.estimate) << " +/- " << format_real(est.band) << "\n";
    return kOk;
}

std::string check_line(const CheckResult& c)
{
    std::string s = c.name + ": " + (c.passed() ? "PASS" : "FAIL") + " checks=" + std::to_string(c.checks) +
                    " violations=" + std::to_string(c.violations) + " worst=" + format_real(c.worst);
    if (!c.note.empty()) s += " note=" + c.note;
    return s + "\n";
}

int cmd_verify(const SpecFile& spec, const std::filesystem::path& out, std::ostream& log)
{
    const auto& sys = spec.system;
    const auto& k = spec.initial_set();
    const auto& v = spec.verify;
    HorizonConfig local = spec.horizon;
    local.t_max = spec.t0() + v.horizon;

    std::vector<CheckResult> checks;
    checks.push_back(verify_liouville(sys, spec.t0() + v.horizon, spec.horizon.dt));
    const auto sep = verify_separation_bounds(sys, k, spec.t0(), v.horizon, v.pairs, spec.horizon, v.slack);
    checks.push_back(sep.componentwise);
    checks.push_back(sep.coppel_upper);
    checks.push_back(sep.coppel_lower);
    if (sys.dimension() <= 3) {
        auto vol = verify_volume_bound(sys, k, spec.t0(), v.horizon, v.mc_samples, spec.horizon, v.slack);
        vol.check.note = "gamma=" + format_real(vol.gamma) + " bound=" + format_real(vol.bound) +
                         " estimate=" + format_real(vol.estimate) + " sigma=" + format_real(vol.sigma) +
                         (vol.tight ? " tight" : "");
        checks.push_back(vol.check);
    }
    checks.push_back(verify_metzler_monotonicity(std::max(2, sys.partition().blocks()), v.pairs, spec.horizon.seed,
                                                 v.slack));
    checks.push_back(verify_block_domination(sys, local, v.slack));
    if (v.t1 && sys.dimension() <= 2) {
        auto inv = verify_initial_time_invariance(sys, k, spec.t0(), *v.t1, spec.horizon, spec.empirical);
        inv.check.note = "from_t0=" + format_real(inv.from_t0.estimate) +
                         " from_t1=" + format_real(inv.from_t1.estimate) +
                         " relative_gap=" + format_real(inv.relative_gap);
        checks.push_back(inv.check);
    }

    std::string text;
    bool ok = true;
    for (const auto& c : checks) {
        text += check_line(c);
        ok = ok && c.passed();
    }
    write_file(out / "verify.txt", text);
    log << text;
    return ok ? kOk : kViolation;
}

int cmd_simulate(const SpecFile& spec, const std::filesystem::path& out, std::ostream& log)
{
    const auto ens = sample_ensemble(spec.system, spec.initial_set(), spec.horizon.ensemble, spec.horizon.t_max,
                                     spec.horizon.dt, spec.horizon.seed);
    const int n = spec.system.dimension();
    std::vector<std::string> header{"t"};
    for (int i = 1; i <= n; ++i) header.push_back("x" + std::to_string(i));
    for (std::size_t m = 0; m < ens.members(); ++m) {
        std::string csv = csv_row(header);
        std::vector<std::string> row(static_cast<std::size_t>(n) + 1);
        for (std::size_t t = 0; t < ens.grid.size(); ++t) {
            row[0] = format_real(ens.grid.times[t]);
            const auto s = ens.state(m, t);
            for (std::size_t i = 0; i < s.size(); ++i) row[i + 1] = format_real(s[i]);
            csv += csv_row(row);
        }
        char name[32];
        std::snprintf(name, sizeof name, "traj_%03zu.csv", m);
        write_file(out / name, csv);
    }
    log << "wrote " << ens.members() << " trajectories\n";
    return kOk;
}

}  // namespace

int run(const RunOptions& opts, std::ostream& log, std::ostream& err)
{
    try {
        SpecFile spec = load_spec(opts.spec);
        apply_overrides(spec, opts);
        if (opts.command == "empirical" && spec.system.dimension() > 2) {
            err << "error: empirical estimation supports n <= 2 (n = " << spec.system.dimension() << ")\n";
            return kDimensionTooLarge;
        }
        std::filesystem::create_directories(opts.out);
        if (opts.command == "bounds") return cmd_bounds(spec, opts.out, log);
        if (opts.command == "empirical") return cmd_empirical(spec, opts.out, log);
        if (opts.command == "verify") return cmd_verify(spec, opts.out, log);
        if (opts.command == "simulate") return cmd_simulate(spec, opts.out, log);
        err << "error: unknown command " << opts.command << "\n";
        return kFailure;
    } catch (const ParseError& e) {
        err << "error: " << opts.spec.string() << ": " << e.what() << "\n";
        return kParseError;
    } catch (const BlowUpError& e) {
        err << "error: blow-up at t = " << format_real(e.time()) << ": " << e.what() << "\n";
        return kBlowUp;
    } catch (const DomainError& e) {
        err << "error: " << e.what() << "\n";
        return kBlowUp;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return kFailure;
    }
}

int main_entry(int argc, char** argv)
{
    CLI::App app{"Topological entropy bounds and estimates for ODE systems", "entrobound"};
    app.require_subcommand(1, 1);
    RunOptions opts;
    std::uint64_t seed = 0;
    double t_max = 0.0, dt = 0.0;
    std::string results, eps, horizons;
    const std::vector<std::pair<const char*, const char*>> commands{
        {"bounds", "Closed-form entropy bounds; writes bounds.csv and summary.txt"},
        {"empirical", "Counting estimate of the entropy; writes entropy.csv and summary.txt"},
        {"verify", "Numerical checks of the supporting lemmas; writes verify.txt"},
        {"simulate", "Integrates the ensemble; writes traj_NNN.csv"},
    };
    std::vector<CLI::App*> subs;
    for (const auto& [name, help] : commands) {
        auto* sub = app.add_subcommand(name, help);
        sub->add_option("--spec", opts.spec, "System spec file")->required()->check(CLI::ExistingFile);
        sub->add_option("--out", opts.out, "Output directory");
        sub->add_option("--seed", seed, "Sampling seed");
        sub->add_option("--t-max", t_max, "Horizon end");
        sub->add_option("--dt", dt, "Integration step");
        sub->add_option("--results", results, "Comma-separated result ids");
        sub->add_option("--eps", eps, "Comma-separated eps values, decreasing");
        sub->add_option("--horizons", horizons, "Comma-separated horizons, increasing");
        subs.push_back(sub);
    }
    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kOk : kParseError;
    }
    for (auto* sub : subs) {
        if (!sub->parsed()) continue;
        opts.command = sub->get_name();
        if (sub->count("--seed")) opts.seed = seed;
        if (sub->count("--t-max")) opts.t_max = t_max;
        if (sub->count("--dt")) opts.dt = dt;
        if (sub->count("--results")) opts.results = results;
        if (sub->count("--eps")) opts.eps = eps;
        if (sub->count("--horizons")) opts.horizons = horizons;
    }
    return run(opts, std::cout, std::cerr);
}

}  // namespace entrobound::cli
