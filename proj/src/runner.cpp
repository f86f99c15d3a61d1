#include "bsgaps/runner.hpp"

#include <chrono>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>

#include <json.hpp>

#include "bsgaps/asymptotics.hpp"
#include "bsgaps/bloch.hpp"
#include "bsgaps/lattice.hpp"
#include "bsgaps/model.hpp"
#include "bsgaps/perturbation.hpp"
#include "bsgaps/regions.hpp"
#include "bsgaps/spectral.hpp"

namespace bsgaps {

namespace {

using nlohmann::json;

int resolve_threads(int requested) {
    if (requested > 0) return requested;
    if (const char* env = std::getenv("BSGAPS_THREADS")) {
        const int n = std::atoi(env);
        if (n > 0) return n;
    }
    return 1;
}

json provenance(const RunConfig& c) {
    json p;
    p["tool"] = "bsgaps";
    p["version"] = kVersion;
    p["command"] = c.command;
    p["seed"] = c.seed;
    p["threads"] = resolve_threads(c.threads);
    if (!c.potentialPath.empty()) p["potential"] = c.potentialPath;
    if (!c.noTimestamp) {
        const auto now = std::chrono::system_clock::now();
        p["timestamp"] =
            std::chrono::duration_cast<std::chrono::seconds>(now.time_since_epoch()).count();
    }
    return p;
}

void write_text(const RunConfig& c, const std::string& text) {
    if (c.outPath.empty()) {
        std::cout << text;
        return;
    }
    std::ofstream out(c.outPath, std::ios::binary);
    if (!out) throw InvalidParameter("cannot open output file: " + c.outPath);
    out << text;
}

void write_json(const RunConfig& c, json j) {
    j["provenance"] = provenance(c);
    write_text(c, j.dump(2) + "\n");
}

PotentialFile need_potential(const RunConfig& c) {
    if (c.potentialPath.empty()) throw InvalidParameter("this command needs --potential");
    return load_potential_json(c.potentialPath);
}

std::string csv_header(const RunConfig& c) {
    std::ostringstream os;
    os << "# bsgaps " << kVersion << " command=" << c.command << " seed=" << c.seed;
    if (!c.noTimestamp) {
        const auto now = std::chrono::system_clock::now();
        os << " time="
           << std::chrono::duration_cast<std::chrono::seconds>(now.time_since_epoch()).count();
    }
    os << "\n";
    return os.str();
}

std::string fmt(double x) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

int cmd_bands(const RunConfig& c) {
    const auto pf = need_potential(c);
    const double lambdaMax = c.lambdaMax > 0.0 ? c.lambdaMax : c.windowHi;
    const double radius = std::sqrt(lambdaMax) + c.cutoff;
    if (lambdaMax >= 0.5 * radius * radius)
        throw Uncertified("cutoff margin too small for the requested lambda-max");
    const auto grid = uniform_k_grid(pf.metric.dim, c.kgrid);
    const BandTable table = band_table(grid, radius, pf.potential, pf.metric, lambdaMax,
                                       resolve_threads(c.threads));
    std::ostringstream os;
    os << csv_header(c);
    os << "# cutoff_radius=" << fmt(radius) << " kgrid=" << c.kgrid
       << " lambda_max=" << fmt(lambdaMax) << " bands=" << table.jCount << "\n";
    for (int i = 0; i < pf.metric.dim; ++i) os << "k" << (i + 1) << ",";
    for (int j = 1; j <= table.jCount; ++j) os << "lambda_" << j << (j == table.jCount ? "" : ",");
    os << "\n";
    for (std::size_t kx = 0; kx < table.kGrid.size(); ++kx) {
        for (int i = 0; i < pf.metric.dim; ++i) os << fmt(table.kGrid[kx](i)) << ",";
        for (int j = 0; j < table.jCount; ++j)
            os << fmt(table.eigs[kx][static_cast<std::size_t>(j)])
               << (j + 1 == table.jCount ? "" : ",");
        os << "\n";
    }
    write_text(c, os.str());
    return 0;
}

int cmd_gaps(const RunConfig& c) {
    const auto pf = need_potential(c);
    const SpectralReport rep =
        gaps_pipeline(pf.potential, pf.metric, c.windowLo, c.windowHi, c.kgrid, c.cutoff,
                      resolve_threads(c.threads), c.refine);
    json j;
    j["window"] = {c.windowLo, c.windowHi};
    j["cutoff_radius"] = rep.cutoffRadius;
    j["certified_lambda_max"] = rep.certifiedLambdaMax;
    j["kgrid"] = c.kgrid;
    j["truncation_changes"] = rep.truncation.maxChange;
    json bands = json::array();
    for (const auto& b : rep.bands)
        bands.push_back({{"j", b.j}, {"lo", b.lo}, {"hi", b.hi}, {"uncertainty", b.uncertainty}});
    j["bands"] = bands;
    json gaps = json::array();
    for (const auto& g : rep.gaps)
        gaps.push_back(
            {{"lo", g.lo}, {"hi", g.hi}, {"resolved", g.resolved}, {"uncertainty", g.uncertainty}});
    j["gaps"] = gaps;
    if (!c.lambdaList.empty()) {
        json zr = json::array();
        for (const auto& row : zeta_scaling_check(rep.bands, rep.gaps, pf.metric.dim, c.lambdaList))
            zr.push_back({{"lambda", row.lambda},
                          {"zeta", row.zeta},
                          {"scaled", row.scaled},
                          {"skipped", row.skipped},
                          {"note", row.note}});
        j["zeta"] = zr;
    }
    write_json(c, j);
    return 0;
}

int cmd_ids(const RunConfig& c) {
    const auto pf = need_potential(c);
    if (c.lambdaList.empty()) throw InvalidParameter("ids needs --lambda values");
    std::ostringstream os;
    os << csv_header(c);
    os << "lambda,N\n";
    for (double lambda : c.lambdaList) {
        const double radius = std::sqrt(lambda) + c.cutoff;
        const double n = integrated_density_of_states(pf.potential, pf.metric, lambda, c.kgrid,
                                                      radius, resolve_threads(c.threads));
        os << fmt(lambda) << "," << fmt(n) << "\n";
    }
    write_text(c, os.str());
    return 0;
}

int cmd_asym(const RunConfig& c) {
    const auto pf = need_potential(c);
    if (static_cast<int>(c.xi.size()) != pf.metric.dim)
        throw InvalidParameter("--xi must have the potential's dimension");
    const Vecd xi = to_vecd(c.xi);
    json j;
    if (c.mode == "order2") {
        j["value"] = g_nonresonant(xi, pf.potential, pf.metric, c.M, GMode::Order2);
        j["iterations"] = 0;
        j["residual"] = 0.0;
    } else if (c.mode == "full") {
        const FixedPointTrace tr = schur_fixed_point(xi, pf.potential, pf.metric, c.M);
        j["value"] = tr.value;
        j["iterations"] = tr.iterations;
        j["residual"] = tr.residual;
        j["min_separation"] = tr.minSeparation;
        j["rcond"] = tr.rcond;
        j["in_window"] = tr.inWindow;
    } else {
        throw InvalidParameter("--mode must be full or order2");
    }
    write_json(c, j);
    return 0;
}

int cmd_classify(const RunConfig& c) {
    const auto pf = need_potential(c);
    if (static_cast<int>(c.xi.size()) != pf.metric.dim)
        throw InvalidParameter("--xi must have the potential's dimension");
    const SpectralWindow window = derive_spectral_window(c.rho, pf.potential);
    const RegionParameters params =
        region_parameters(pf.metric.dim, c.rho, pf.potential.supportRadius, c.M);
    const RegionGeometry geometry(window, params, pf.metric);
    const ResonanceLabel label = geometry.classify(to_vecd(c.xi));
    json j;
    j["resonant"] = label.resonant;
    if (label.resonant) {
        j["tier"] = label.tier;
        json basis = json::array();
        for (const auto& row : label.subspace.basis) basis.push_back(row);
        j["subspace_basis"] = basis;
        j["subspace_dim"] = label.subspace.dim();
        j["xi_V_norm"] = label.decomp.xi_V.norm();
        j["r"] = label.decomp.r;
    }
    write_json(c, j);
    return 0;
}

int cmd_regions(const RunConfig& c) {
    const auto pf = need_potential(c);
    const SpectralWindow window = derive_spectral_window(c.rho, pf.potential);
    const RegionParameters params =
        region_parameters(pf.metric.dim, c.rho, pf.potential.supportRadius, c.M);
    const RegionGeometry geometry(window, params, pf.metric);
    const PartitionReport rep =
        partition_diagnostics(geometry, c.samples, c.seed, resolve_threads(c.threads));
    json j;
    j["samples"] = rep.samples;
    j["resonant"] = rep.resonant;
    j["non_resonant"] = rep.nonResonant;
    j["overlap_samples"] = rep.overlapSamples;
    j["overlap_rate"] = rep.overlapRate;
    j["changedXi0_violations"] = rep.changedXi0Violations;
    j["max_xiV_over_Ln"] = rep.maxXiVOverLn;
    j["total"] = rep.total;
    j["deterministic"] = rep.deterministic;
    j["rho_p_gt_R2beta"] = params.rhoP_gt_R2beta;
    write_json(c, j);
    return rep.total && rep.deterministic ? 0 : 1;
}

int cmd_latcheck(const RunConfig& c) {
    Rng rootRng(c.seed);
    long long violations = 0;
    double worstBoundRatio = 0.0;
    double worstProductRatio = 0.0;
    for (int t = 0; t < c.trials; ++t) {
        const LatticeTrial trial = random_lattice_trial(rootRng.next_u64(), c.maxDim, c.radius);
        try {
            const ShortestOrthogonal so = shortest_orthogonal_vector(trial.lattice, trial.nus);
            worstBoundRatio = std::max(worstBoundRatio, so.ratio);
            if (so.ratio > 1.0) ++violations;
        } catch (const InternalError&) {
            ++violations;
        }
        if (trial.nus.size() >= 2) {
            IntMat partial(trial.nus.begin(), trial.nus.end() - 1);
            const auto ob = orthogonal_sublattice_basis(trial.lattice, partial);
            worstProductRatio = std::max(worstProductRatio, ob.productRatio);
        }
    }
    // exhaustive d=2 angle bound: sin(angle) |theta| |mu| >= 1
    double minAngleProduct = std::numeric_limits<double>::infinity();
    {
        const auto pts = enumerate_ball(2, c.radius);
        for (const auto& mu : pts) {
            if (is_zero(mu)) continue;
            for (const auto& th : pts) {
                if (is_zero(th)) continue;
                IntMat pair{th, mu};
                if (gram_det_exact(pair) <= 0) continue;
                const double a = angle_vector_subspace(mu, IntMat{th});
                minAngleProduct =
                    std::min(minAngleProduct, std::sin(a) * norm(th) * norm(mu));
            }
        }
        if (minAngleProduct < 1.0 - 1e-9) ++violations;
    }
    json j;
    j["trials"] = c.trials;
    j["violations"] = violations;
    j["worst_bound_ratio"] = worstBoundRatio;
    j["worst_product_ratio"] = worstProductRatio;
    j["min_angle_product_d2"] = minAngleProduct;
    write_json(c, j);
    return violations == 0 ? 0 : 1;
}

int cmd_perturb_check(const RunConfig& c) {
    Rng rootRng(c.seed);
    long long violations = 0;
    double worstRatio = 0.0;
    std::vector<long long> histogram(10, 0);
    for (int t = 0; t < c.trials; ++t) {
        const PerturbationInstance inst =
            random_instance(rootRng.next_u64(), c.maxDim, 5, 0.5, 40.0);
        const Lemma1Report rep = verify_lemma1(inst);
        if (!rep.pass) ++violations;
        const double ratio = rep.bound > 0.0 ? rep.gap / rep.bound : 0.0;
        worstRatio = std::max(worstRatio, ratio);
        const int bucket = std::min(9, static_cast<int>(ratio * 10.0));
        ++histogram[static_cast<std::size_t>(bucket)];
    }
    long long lemma2Violations = 0;
    const int lemma2Trials = std::max(1, c.trials / 5);
    for (int t = 0; t < lemma2Trials; ++t) {
        const Lemma2Instance inst = random_lemma2_instance(rootRng.next_u64(), 3, 3, 0.3);
        const Lemma2Report rep = verify_lemma2(inst);
        if (!rep.boundHolds || !rep.exclusionHolds || !rep.indexShiftHolds) ++lemma2Violations;
    }
    json j;
    j["trials"] = c.trials;
    j["violations"] = violations;
    j["worstRatio"] = worstRatio;
    j["histogram"] = histogram;
    j["lemma2_trials"] = lemma2Trials;
    j["lemma2_violations"] = lemma2Violations;
    write_json(c, j);
    return violations + lemma2Violations == 0 ? 0 : 1;
}

int cmd_volume(const RunConfig& c) {
    const auto pf = need_potential(c);
    const SpectralWindow window = derive_spectral_window(c.rho, pf.potential);
    const RegionParameters params =
        region_parameters(pf.metric.dim, c.rho, pf.potential.supportRadius, c.M);
    const RegionGeometry geometry(window, params, pf.metric);
    const Metric& metric = pf.metric;
    const FourierPotential& pot = pf.potential;
    auto g = [&](const Vecd& xi) {
        if (pot.empty()) return metric.quad(xi);
        return g_nonresonant(xi, pot, metric, c.M);
    };
    Vecd shift;
    const Vecd* shiftPtr = nullptr;
    if (!c.shift.empty()) {
        if (static_cast<int>(c.shift.size()) != pf.metric.dim)
            throw InvalidParameter("--shift must have the potential's dimension");
        shift = to_vecd(c.shift);
        shiftPtr = &shift;
    }
    const VolumeEstimates est = volume_estimates(geometry, c.delta, c.samples, c.seed, g, shiftPtr,
                                                 resolve_threads(c.threads));
    json j;
    j["samples"] = est.samples;
    j["shell_volume"] = est.shellVolume;
    j["vol_A"] = est.volA;
    j["sigma_A"] = est.sigmaA;
    j["vol_B"] = est.volB;
    j["sigma_B"] = est.sigmaB;
    j["vol_D"] = est.volD;
    j["sigma_D"] = est.sigmaD;
    j["predicted_AB"] = est.predictedAB;
    j["ratio_A"] = est.ratioA;
    j["ratio_B"] = est.ratioB;
    if (est.shiftRequested) {
        j["vol_shift_intersection"] = est.volShift;
        j["sigma_shift_intersection"] = est.sigmaShift;
        j["predicted_shift"] = est.predictedShift;
        j["ratio_shift"] = est.ratioShift;
    }
    write_json(c, j);
    return 0;
}

} // namespace

int dispatch(const RunConfig& config) {
    try {
        if (config.command == "bands") return cmd_bands(config);
        if (config.command == "gaps") return cmd_gaps(config);
        if (config.command == "ids") return cmd_ids(config);
        if (config.command == "asym") return cmd_asym(config);
        if (config.command == "classify") return cmd_classify(config);
        if (config.command == "regions") return cmd_regions(config);
        if (config.command == "latcheck") return cmd_latcheck(config);
        if (config.command == "perturb-check") return cmd_perturb_check(config);
        if (config.command == "volume") return cmd_volume(config);
        std::cerr << "bsgaps: unknown command '" << config.command << "'\n";
        return 2;
    } catch (const NotConverged& e) {
        std::cerr << "bsgaps " << config.command << ": " << e.what() << "\n";
        return 1;
    } catch (const Error& e) {
        std::cerr << "bsgaps " << config.command << ": " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "bsgaps " << config.command << ": " << e.what() << "\n";
        return 2;
    }
}

} // namespace bsgaps
