#include "bsgaps/perturbation.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace bsgaps {

namespace {

int block_of(const std::vector<std::pair<int, int>>& blocks, int idx) {
    for (std::size_t b = 0; b < blocks.size(); ++b)
        if (idx >= blocks[b].first && idx < blocks[b].second) return static_cast<int>(b);
    return -1;
}

void validate_structure(const PerturbationInstance& inst) {
    if (inst.N <= 0 || inst.blocks.empty()) throw InvalidInput("empty instance");
    int cursor = 0;
    for (const auto& [b, e] : inst.blocks) {
        if (b != cursor || e <= b) throw InvalidInput("blocks must tile 0..N contiguously");
        cursor = e;
    }
    if (cursor != inst.N) throw InvalidInput("blocks do not cover the dimension");
    const int n = inst.chainLength();
    for (int i = 0; i < inst.N; ++i)
        for (int j = 0; j < inst.N; ++j) {
            const int bi = block_of(inst.blocks, i), bj = block_of(inst.blocks, j);
            if (std::abs(bi - bj) > 1 && inst.v(i, j) != 0.0)
                throw InvalidInput("V violates the block-tridiagonal mask");
            if ((bi != n || bj != n) && inst.a(i, j) != 0.0)
                throw InvalidInput("A has support outside the last block");
        }
}

Matd h_of(const PerturbationInstance& inst) {
    Matd h = inst.v;
    for (int i = 0; i < inst.N; ++i) h(i, i) += inst.h0(i);
    return h;
}

} // namespace

InstanceNorms instance_norms(const PerturbationInstance& inst) {
    validate_structure(inst);
    InstanceNorms out;
    out.normV = spectral_norm_sym(inst.v);
    out.normA = spectral_norm_sym(inst.a);
    out.a = out.normV + out.normA;
    const Vecd mu = eigen_sym_values(h_of(inst));
    if (inst.targetIndex < 0 || inst.targetIndex >= inst.N)
        throw InvalidParameter("target eigenvalue index out of range");
    out.muL = mu(inst.targetIndex);
    const int n = inst.chainLength();
    out.aj.resize(static_cast<std::size_t>(n));
    out.admissible = true;
    for (int j = 1; j <= n; ++j) {
        double dist = std::numeric_limits<double>::infinity();
        for (int i = inst.blocks[static_cast<std::size_t>(j)].first;
             i < inst.blocks[static_cast<std::size_t>(j)].second; ++i)
            dist = std::min(dist, std::abs(inst.h0(i) - out.muL));
        out.aj[static_cast<std::size_t>(j - 1)] = dist;
        if (!(dist > 4.0 * out.a)) out.admissible = false;
    }
    return out;
}

double lemma1_bound(const PerturbationInstance& inst) {
    const InstanceNorms norms = instance_norms(inst);
    const int n = inst.chainLength();
    double bound = std::pow(2.0, 2 * n) * std::pow(norms.a, 2 * n + 1);
    for (int j = 1; j <= n; ++j) {
        const double margin = norms.aj[static_cast<std::size_t>(j - 1)] - 2.0 * norms.a;
        if (!(margin > 0.0))
            throw InadmissibleInstance("a_j <= 2a at j=" + std::to_string(j));
        bound /= margin * margin;
    }
    return bound;
}

Lemma1Report verify_lemma1(const PerturbationInstance& inst) {
    Lemma1Report rep;
    rep.bound = lemma1_bound(inst);
    const Vecd mu = eigen_sym_values(h_of(inst));
    Matd hhat = h_of(inst) + inst.a;
    const Vecd muHat = eigen_sym_values(hhat);
    rep.muL = mu(inst.targetIndex);
    rep.muHatL = muHat(inst.targetIndex);
    rep.gap = std::abs(rep.muHatL - rep.muL);
    rep.pass = rep.gap <= rep.bound + 1e-9 * (1.0 + std::abs(rep.muL));
    return rep;
}

PerturbationInstance random_instance(std::uint64_t seed, int maxDim, int maxBlocks,
                                     double couplingScale, double gapScale) {
    if (maxDim < 2 || maxBlocks < 1 || couplingScale < 0.0 || gapScale <= 0.0)
        throw InvalidParameter("random_instance parameters must be positive");
    Rng rng(seed);
    for (int attempt = 0; attempt < 48; ++attempt) {
        const int nBlocks = static_cast<int>(rng.uniform_int(1, maxBlocks));
        std::vector<int> sizes(static_cast<std::size_t>(nBlocks));
        int total = 0;
        for (auto& s : sizes) {
            s = static_cast<int>(rng.uniform_int(1, std::max(1, maxDim / nBlocks)));
            total += s;
        }
        if (total > maxDim) continue;

        PerturbationInstance inst;
        inst.N = total;
        inst.h0.resize(total);
        inst.v = Matd::Zero(total, total);
        inst.a = Matd::Zero(total, total);
        int cursor = 0;
        for (int b = 0; b < nBlocks; ++b) {
            inst.blocks.emplace_back(cursor, cursor + sizes[static_cast<std::size_t>(b)]);
            for (int i = cursor; i < cursor + sizes[static_cast<std::size_t>(b)]; ++i)
                inst.h0(i) = (b == 0 ? rng.uniform(-2.0, 2.0)
                                     : b * gapScale + rng.uniform(0.0, 0.5 * gapScale));
            cursor += sizes[static_cast<std::size_t>(b)];
        }
        const double scale = couplingScale / std::pow(2.0, attempt / 8);
        for (int i = 0; i < total; ++i)
            for (int j = i + 1; j < total; ++j) {
                const int bi = block_of(inst.blocks, i), bj = block_of(inst.blocks, j);
                if (std::abs(bi - bj) <= 1) {
                    const double x = rng.uniform(-scale, scale);
                    inst.v(i, j) = x;
                    inst.v(j, i) = x;
                }
            }
        for (int i = 0; i < total; ++i) {
            const int bi = block_of(inst.blocks, i);
            if (bi != nBlocks - 1) continue;
            inst.v(i, i) = rng.uniform(-scale, scale) * 0.5;
        }
        const auto& last = inst.blocks.back();
        for (int i = last.first; i < last.second; ++i)
            for (int j = i; j < last.second; ++j) {
                const double x = rng.uniform(-scale, scale);
                inst.a(i, j) = x;
                inst.a(j, i) = x;
            }

        // target the eigenvalue closest to the centre of block 0
        double center = 0.0;
        for (int i = inst.blocks[0].first; i < inst.blocks[0].second; ++i) center += inst.h0(i);
        center /= static_cast<double>(inst.blocks[0].second - inst.blocks[0].first);
        const Vecd mu = eigen_sym_values(h_of(inst));
        int best = 0;
        for (int i = 1; i < total; ++i)
            if (std::abs(mu(i) - center) < std::abs(mu(best) - center)) best = i;
        inst.targetIndex = best;

        if (instance_norms(inst).admissible) return inst;
    }
    throw GenerationFailed("could not generate an admissible instance");
}

namespace {

struct Lemma2Layout {
    std::vector<std::pair<int, int>> familyRange; // whole P^m span
};

Lemma2Layout layout_of(const Lemma2Instance& inst) {
    Lemma2Layout lay;
    for (const auto& chain : inst.chains)
        lay.familyRange.emplace_back(chain.front().first, chain.back().second);
    return lay;
}

void validate_lemma2(const Lemma2Instance& inst) {
    if (inst.N <= 0 || inst.chains.empty()) throw InvalidInput("empty lemma-2 instance");
    // the mask: within-chain tridiagonal, last chain block to Q, Q to Q
    auto allowed = [&](int i, int j) {
        auto locate = [&](int idx, int& fam, int& link) {
            fam = -1;
            link = -1;
            for (std::size_t m = 0; m < inst.chains.size(); ++m)
                for (std::size_t l = 0; l < inst.chains[m].size(); ++l)
                    if (idx >= inst.chains[m][l].first && idx < inst.chains[m][l].second) {
                        fam = static_cast<int>(m);
                        link = static_cast<int>(l);
                    }
        };
        int fi, li, fj, lj;
        locate(i, fi, li);
        locate(j, fj, lj);
        const bool qi = fi < 0, qj = fj < 0;
        if (qi && qj) return true;
        if (qi != qj) {
            const int fam = qi ? fj : fi;
            const int link = qi ? lj : li;
            return link == static_cast<int>(inst.chains[static_cast<std::size_t>(fam)].size()) - 1;
        }
        if (fi != fj) return false;
        return std::abs(li - lj) <= 1;
    };
    for (int i = 0; i < inst.N; ++i)
        for (int j = 0; j < inst.N; ++j)
            if (inst.v(i, j) != 0.0 && !allowed(i, j))
                throw InvalidInput("V violates the lemma-2 coupling mask");
}

} // namespace

Lemma2Report verify_lemma2(const Lemma2Instance& inst) {
    validate_lemma2(inst);
    Lemma2Report rep;
    rep.v = spectral_norm_sym(inst.v);
    const double l1 = inst.lambda1, l2 = inst.lambda2;

    // margin preconditions
    auto dist_to_J = [&](double x) {
        if (x < l1) return l1 - x;
        if (x > l2) return x - l2;
        return 0.0;
    };
    rep.marginsHold = true;
    double tau = 0.0;
    for (const auto& chain : inst.chains) {
        const int jm = static_cast<int>(chain.size()) - 1;
        double term = std::pow(6.0 * rep.v, 2 * jm + 1);
        for (int j = 1; j <= jm; ++j) {
            double ajm = std::numeric_limits<double>::infinity();
            for (int i = chain[static_cast<std::size_t>(j)].first;
                 i < chain[static_cast<std::size_t>(j)].second; ++i)
                ajm = std::min(ajm, dist_to_J(inst.h0(i)));
            if (!(ajm > 16.0 * rep.v)) rep.marginsHold = false;
            const double margin = ajm - 6.0 * rep.v;
            if (margin > 0.0) term /= margin * margin;
        }
        tau = std::max(tau, term);
    }
    for (int i = inst.q.first; i < inst.q.second; ++i)
        if (!(dist_to_J(inst.h0(i)) > 6.0 * rep.v)) rep.marginsHold = false;
    if (!rep.marginsHold) throw InadmissibleInstance("lemma-2 margin preconditions unmet");
    rep.tau = tau;

    // H and H~ = sum_m P^m H P^m + Q H0 Q
    Matd h = inst.v;
    for (int i = 0; i < inst.N; ++i) h(i, i) += inst.h0(i);
    const Lemma2Layout lay = layout_of(inst);
    Matd htilde = Matd::Zero(inst.N, inst.N);
    for (const auto& [b, e] : lay.familyRange)
        htilde.block(b, b, e - b, e - b) = h.block(b, b, e - b, e - b);
    for (int i = inst.q.first; i < inst.q.second; ++i) htilde(i, i) = inst.h0(i);

    const Vecd mu = eigen_sym_values(h);
    const Vecd muT = eigen_sym_values(htilde);

    rep.worstGap = 0.0;
    std::vector<int> inside;
    for (int r = 0; r < inst.N; ++r)
        if (mu(r) >= l1 && mu(r) <= l2) inside.push_back(r);
    rep.insideCount = static_cast<int>(inside.size());
    for (int r : inside) rep.worstGap = std::max(rep.worstGap, std::abs(muT(r) - mu(r)));
    rep.boundHolds = rep.worstGap <= rep.tau + 1e-9 * (1.0 + std::abs(l2));

    rep.exclusionHolds = true;
    for (int r = 0; r < inst.N; ++r) {
        if (std::find(inside.begin(), inside.end(), r) != inside.end()) continue;
        if (muT(r) > l1 + 2.0 * rep.v && muT(r) < l2 - 2.0 * rep.v) rep.exclusionHolds = false;
    }

    // corollary index shift: mu_j(sum P^m H P^m) = mu_{j+l}(H~) with
    // l = #{eigenvalues of Q H0 Q below lambda1}
    std::vector<double> family_eigs;
    for (const auto& [b, e] : lay.familyRange) {
        const Vecd blockEigs = eigen_sym_values(h.block(b, b, e - b, e - b));
        for (Eigen::Index i = 0; i < blockEigs.size(); ++i) family_eigs.push_back(blockEigs(i));
    }
    std::sort(family_eigs.begin(), family_eigs.end());
    int l = 0;
    for (int i = inst.q.first; i < inst.q.second; ++i)
        if (inst.h0(i) < l1) ++l;
    rep.indexShiftHolds = true;
    for (std::size_t j = 0; j < family_eigs.size(); ++j) {
        if (family_eigs[j] < l1 || family_eigs[j] > l2) continue;
        const std::size_t shifted = j + static_cast<std::size_t>(l);
        if (shifted >= static_cast<std::size_t>(inst.N) ||
            std::abs(family_eigs[j] - muT(static_cast<Eigen::Index>(shifted))) >
                1e-9 * (1.0 + std::abs(l2)))
            rep.indexShiftHolds = false;
    }
    return rep;
}

Lemma2Instance random_lemma2_instance(std::uint64_t seed, int maxFamilies, int maxChain,
                                      double couplingScale) {
    Rng rng(seed);
    Lemma2Instance inst;
    const int families = static_cast<int>(rng.uniform_int(1, std::max(1, maxFamilies)));
    int cursor = 0;
    std::vector<std::vector<int>> chainSizes;
    for (int m = 0; m < families; ++m) {
        const int links = static_cast<int>(rng.uniform_int(1, std::max(1, maxChain)));
        std::vector<int> sizes;
        for (int l = 0; l < links; ++l)
            sizes.push_back(static_cast<int>(rng.uniform_int(1, 3)));
        chainSizes.push_back(sizes);
    }
    const int qSize = static_cast<int>(rng.uniform_int(0, 6));
    for (const auto& sizes : chainSizes) {
        std::vector<std::pair<int, int>> chain;
        for (int s : sizes) {
            chain.emplace_back(cursor, cursor + s);
            cursor += s;
        }
        inst.chains.push_back(chain);
    }
    inst.q = {cursor, cursor + qSize};
    cursor += qSize;
    inst.N = cursor;
    inst.lambda1 = -3.0;
    inst.lambda2 = 3.0;

    inst.h0.resize(inst.N);
    const double vCap = couplingScale * inst.N; // crude upper bound for ||V||
    for (std::size_t m = 0; m < inst.chains.size(); ++m) {
        for (std::size_t l = 0; l < inst.chains[m].size(); ++l) {
            const auto& [b, e] = inst.chains[m][l];
            for (int i = b; i < e; ++i) {
                if (l == 0) {
                    inst.h0(i) = rng.uniform(-2.0, 2.0);
                } else {
                    const double sign = (m % 2 == 0) ? 1.0 : -1.0;
                    inst.h0(i) = sign * (3.0 + 20.0 * vCap * static_cast<double>(l) +
                                         rng.uniform(0.0, 1.0));
                }
            }
        }
    }
    for (int i = inst.q.first; i < inst.q.second; ++i)
        inst.h0(i) = (rng.uniform() < 0.5 ? -1.0 : 1.0) * (3.0 + 8.0 * vCap + rng.uniform(0.0, 2.0));

    inst.v = Matd::Zero(inst.N, inst.N);
    auto fill = [&](int i, int j) {
        const double x = rng.uniform(-couplingScale, couplingScale);
        inst.v(i, j) = x;
        inst.v(j, i) = x;
    };
    for (std::size_t m = 0; m < inst.chains.size(); ++m) {
        const auto& chain = inst.chains[m];
        for (std::size_t l = 0; l < chain.size(); ++l) {
            for (int i = chain[l].first; i < chain[l].second; ++i)
                for (int j = i; j < chain[l].second; ++j) fill(i, j);
            if (l + 1 < chain.size())
                for (int i = chain[l].first; i < chain[l].second; ++i)
                    for (int j = chain[l + 1].first; j < chain[l + 1].second; ++j) fill(i, j);
        }
        for (int i = chain.back().first; i < chain.back().second; ++i)
            for (int j = inst.q.first; j < inst.q.second; ++j) fill(i, j);
    }
    for (int i = inst.q.first; i < inst.q.second; ++i)
        for (int j = i; j < inst.q.second; ++j) fill(i, j);
    return inst;
}

} // namespace bsgaps
