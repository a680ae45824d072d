// Command-line front end: scenario pipelines plus a quick selftest battery.

#include <cmath>
#include <cstdio>
#include <iostream>

#include <CLI11.hpp>

#include "finelab/finefun.hpp"
#include "finelab/harmonic.hpp"
#include "finelab/potential.hpp"
#include "finelab/scenario_io.hpp"

namespace {

using namespace finelab;
using geom::cpoint;

int run_pipeline(const std::string& file, const scenario::run_overrides& overrides) {
    const auto result = scenario::run_scenario_file(file, overrides);
    std::cout << result.summary << "\n";
    for (const auto& a : result.artifacts) std::cout << "  wrote " << a << "\n";
    return result.exit_code;
}

int selftest() {
    int failures = 0;
    auto check = [&](bool ok, const std::string& name) {
        std::cout << (ok ? "PASS " : "FAIL ") << name << "\n";
        if (!ok) ++failures;
    };

    // exact harmonic measure at the center
    {
        const geom::disk d(0.0, 1.0);
        const auto arc = geom::circ_arc::from_sweep(0.0, 1.0, 0.0, geom::pi);
        check(harmonic::hm_disk_arc_exact(d, arc, 0.0) == 0.5, "center harmonic measure is exact");
    }
    // two-constant and propagation identities
    {
        const double b = harmonic::two_constant_bound(std::exp(-8.0), std::exp(1.0), 0.25);
        check(std::abs(b - (-1.25)) < 1e-12, "two-constant bound identity");
        check(harmonic::propagation_bound(100.0, 0.25) == -25.0, "propagation bound identity");
    }
    // walk-on-spheres against the exact formula
    {
        const geom::disk d(0.0, 1.0);
        const auto arc = geom::circ_arc::from_sweep(0.0, 1.0, 0.3, 2.0);
        const cpoint z(0.2, -0.1);
        const harmonic::slit_domain dom(d, {});
        const harmonic::wos_config cfg{1e-4, 100000, 20000, 77, 1};
        const auto est = harmonic::hm_wos(dom, harmonic::arc_target{arc}, z, cfg);
        const double exact = harmonic::hm_disk_arc_exact(d, arc, z);
        check(std::abs(est.value - exact) <= 3.0 * est.std_error, "walk-on-spheres fidelity");
    }
    // square-root branch normalization
    {
        const cpoint w = finefun::eval_sqrt_branch(-1.0, 1.0, 2.0);
        check(std::abs(w - std::sqrt(3.0)) < 1e-12, "sqrt branch at a real point");
        const cpoint far = finefun::eval_sqrt_branch(-1.0, 1.0, cpoint(0, 1000));
        check(std::abs(far - cpoint(0, 1000)) < 1e-2, "sqrt branch normalized at infinity");
    }
    // thin-union recipe certifies itself
    {
        const auto spec = potential::build_thin_union({cpoint(2.0, 0.0), cpoint(0.0, 2.0)}, 1.0);
        const auto verdict = potential::thinness_report(spec);
        check(verdict.thin_certified, "thin union certificate");
    }
    std::cout << (failures == 0 ? "selftest: all good\n" : "selftest: FAILURES\n");
    return failures == 0 ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"finelab: numerical certificates for fine analytic continuation"};
    app.require_subcommand(1);

    scenario::run_overrides overrides;
    long samples = -1;
    long long seed = -1;
    int resolution = -1;
    std::string profile;

    auto add_common = [&](CLI::App* cmd) {
        cmd->add_option("--out", overrides.out_dir, "output directory (default: out)");
        cmd->add_option("--samples", samples, "override the Monte Carlo sample count");
        cmd->add_option("--seed", seed, "override the base seed");
        cmd->add_option("--resolution", resolution, "override grid resolutions");
        cmd->add_option("--tolerance-profile", profile, "strict | default | fast");
    };

    std::string file;
    std::vector<std::pair<std::string, CLI::App*>> cmds;
    for (const char* name : {"certify", "components", "sheets", "hm-study", "decay-study"}) {
        CLI::App* cmd = app.add_subcommand(
            name, std::string("run the ") + name + " pipeline on a scenario file");
        cmd->add_option("file", file, "scenario file")->required();
        add_common(cmd);
        cmds.emplace_back(name, cmd);
    }
    CLI::App* self = app.add_subcommand("selftest", "run the built-in quick checks");

    CLI11_PARSE(app, argc, argv);

    if (self->parsed()) return selftest();

    if (samples >= 0) overrides.samples = samples;
    if (seed >= 0) overrides.seed = static_cast<std::uint64_t>(seed);
    if (resolution > 0) overrides.resolution = resolution;
    if (!profile.empty()) overrides.tolerance_profile = profile;

    for (const auto& [name, cmd] : cmds)
        if (cmd->parsed()) return run_pipeline(file, overrides);
    return 2;
}
