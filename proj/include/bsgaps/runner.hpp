#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace bsgaps {

inline constexpr const char* kVersion = "0.1.0";

// Parsed command configuration. Every run echoes this (plus seed and
// version) in a provenance header so outputs are reproducible byte for byte;
// the timestamp field is the one exception and can be suppressed.
struct RunConfig {
    std::string command;
    std::string potentialPath;
    std::string outPath; // empty -> stdout

    double rho = 50.0;
    double cutoff = 6.0; // basis-radius margin above sqrt(lambda-max)
    double windowLo = 1.0;
    double windowHi = 120.0;
    double lambdaMax = 0.0;
    double delta = 0.1;
    double radius = 5.0;
    int kgrid = 16;
    int M = 3;
    int trials = 100;
    int maxDim = 4;
    int dim = 2;
    int nCluster = 1;
    long long samples = 10000;
    std::uint64_t seed = 1;
    int threads = 0; // 0 -> BSGAPS_THREADS env or 1
    bool noTimestamp = false;
    bool refine = false;
    std::string mode = "full"; // full|order2
    std::vector<double> xi;
    std::vector<double> lambdaList;
    std::vector<double> shift; // optional translation for the volume command
};

// Executes exactly one subcommand. Returns 0 on success, 1 when an asserted
// bound is violated, 2 on usage/configuration errors (with a one-line
// diagnostic on stderr).
int dispatch(const RunConfig& config);

} // namespace bsgaps
