#include <CLI11.hpp>

#include <string>
#include <vector>

#include "bsgaps/runner.hpp"

namespace {

void add_common(CLI::App* cmd, bsgaps::RunConfig& cfg) {
    cmd->add_option("--threads", cfg.threads, "worker threads (0 = BSGAPS_THREADS env or 1)");
    cmd->add_option("--seed", cfg.seed, "random seed");
    cmd->add_option("--out", cfg.outPath, "output file (default stdout)");
    cmd->add_flag("--no-timestamp", cfg.noTimestamp, "omit the timestamp from the provenance header");
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"bsgaps - spectral toolkit for periodic Schrodinger operators"};
    app.require_subcommand(1);
    bsgaps::RunConfig cfg;

    auto* bands = app.add_subcommand("bands", "band functions over a quasi-momentum grid (CSV)");
    bands->add_option("--potential", cfg.potentialPath, "potential JSON file")->required();
    bands->add_option("--cutoff", cfg.cutoff, "basis-radius margin above sqrt(lambda-max)");
    bands->add_option("--kgrid", cfg.kgrid, "grid nodes per dimension");
    bands->add_option("--lambda-max", cfg.lambdaMax, "largest certified band value");
    add_common(bands, cfg);

    auto* gaps = app.add_subcommand("gaps", "band intervals and spectral gaps in a window (JSON)");
    gaps->add_option("--potential", cfg.potentialPath, "potential JSON file")->required();
    std::vector<double> windowVals;
    gaps->add_option("--window", windowVals, "spectral window lo:hi")->delimiter(':');
    gaps->add_option("--cutoff", cfg.cutoff, "basis-radius margin above sqrt(window hi)");
    gaps->add_option("--kgrid", cfg.kgrid, "grid nodes per dimension");
    gaps->add_option("--zeta", cfg.lambdaList, "lambdas to sample the overlap function at")
        ->delimiter(',');
    gaps->add_flag("--refine", cfg.refine, "golden-section refinement of band endpoints");
    add_common(gaps, cfg);

    auto* ids = app.add_subcommand("ids", "integrated density of states (CSV)");
    ids->add_option("--potential", cfg.potentialPath, "potential JSON file")->required();
    ids->add_option("--lambda", cfg.lambdaList, "lambda values")->delimiter(',')->required();
    ids->add_option("--kgrid", cfg.kgrid, "midpoint grid nodes per dimension");
    ids->add_option("--cutoff", cfg.cutoff, "basis-radius margin above sqrt(lambda)");
    add_common(ids, cfg);

    auto* asym = app.add_subcommand("asym", "non-resonant eigenvalue asymptotics at one point");
    asym->add_option("--potential", cfg.potentialPath, "potential JSON file")->required();
    asym->add_option("--xi", cfg.xi, "dual point, comma separated")->delimiter(',')->required();
    asym->add_option("--mode", cfg.mode, "full | order2");
    asym->add_option("--M", cfg.M, "Theta_M shell count");
    add_common(asym, cfg);

    auto* classify = app.add_subcommand("classify", "resonance classification of a dual point");
    classify->add_option("--potential", cfg.potentialPath, "potential JSON file")->required();
    classify->add_option("--rho", cfg.rho, "spectral radius rho (lambda = rho^2)")->required();
    classify->add_option("--xi", cfg.xi, "dual point, comma separated")->delimiter(',')->required();
    classify->add_option("--M", cfg.M, "Theta_M shell count");
    add_common(classify, cfg);

    auto* regions = app.add_subcommand("regions", "resonance-partition diagnostics (JSON)");
    regions->add_option("--potential", cfg.potentialPath, "potential JSON file")->required();
    regions->add_option("--rho", cfg.rho, "spectral radius")->required();
    regions->add_option("--samples", cfg.samples, "Monte-Carlo samples");
    regions->add_option("--M", cfg.M, "Theta_M shell count");
    add_common(regions, cfg);

    auto* latcheck = app.add_subcommand("latcheck", "lattice-geometry bound verification (JSON)");
    latcheck->add_option("--dim", cfg.maxDim, "maximum ambient dimension");
    latcheck->add_option("--radius", cfg.radius, "constraint-vector radius");
    latcheck->add_option("--trials", cfg.trials, "seeded instances");
    add_common(latcheck, cfg);

    auto* perturb = app.add_subcommand("perturb-check", "invariant-subspace bound verification (JSON)");
    perturb->add_option("--trials", cfg.trials, "seeded instances");
    perturb->add_option("--max-dim", cfg.maxDim, "maximum matrix dimension");
    add_common(perturb, cfg);

    auto* volume = app.add_subcommand("volume", "Monte-Carlo region volumes (JSON)");
    volume->add_option("--potential", cfg.potentialPath, "potential JSON file")->required();
    volume->add_option("--rho", cfg.rho, "spectral radius")->required();
    volume->add_option("--delta", cfg.delta, "g-window half width");
    volume->add_option("--samples", cfg.samples, "Monte-Carlo samples");
    volume->add_option("--M", cfg.M, "Theta_M shell count");
    volume->add_option("--shift", cfg.shift, "translation a for vol(B meet B+a)")->delimiter(',');
    add_common(volume, cfg);

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }

    for (CLI::App* sub :
         {bands, gaps, ids, asym, classify, regions, latcheck, perturb, volume}) {
        if (sub->parsed()) {
            cfg.command = sub->get_name();
            break;
        }
    }
    if (gaps->parsed() && !windowVals.empty()) {
        cfg.windowLo = windowVals[0];
        if (windowVals.size() >= 2) cfg.windowHi = windowVals[1];
    }
    return bsgaps::dispatch(cfg);
}
