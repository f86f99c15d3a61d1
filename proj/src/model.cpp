#include "bsgaps/model.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include <json.hpp>

namespace bsgaps {

double Metric::fnorm(const Vecd& xi) const { return std::sqrt(std::max(0.0, quad(xi))); }

double Metric::quad_int(const IntVec& m) const {
    Vecd x(dim);
    for (int i = 0; i < dim; ++i) x(i) = static_cast<double>(m[static_cast<std::size_t>(i)]);
    return quad(x);
}

double Metric::gdot_int(const Vecd& a, const IntVec& m) const {
    Vecd x(dim);
    for (int i = 0; i < dim; ++i) x(i) = static_cast<double>(m[static_cast<std::size_t>(i)]);
    return gdot(a, x);
}

Metric metric_from_G(const Matd& G) {
    if (G.rows() != G.cols() || G.rows() < 2)
        throw InvalidMetric("G must be a d x d matrix with d >= 2");
    const double scale = G.cwiseAbs().maxCoeff();
    if ((G - G.transpose()).cwiseAbs().maxCoeff() > 1e-12 * (1.0 + scale))
        throw InvalidMetric("G is not symmetric");
    const Matd Gs = 0.5 * (G + G.transpose());
    const EigenSym es = eigen_sym(Gs);
    if (es.values(0) <= 0.0)
        throw InvalidMetric("G is not positive definite; smallest eigenvalue " +
                            std::to_string(es.values(0)));
    Matd sq = es.values.cwiseSqrt().asDiagonal();
    Matd F = es.vectors * sq * es.vectors.transpose();
    F = 0.5 * (F + F.transpose()).eval();
    Metric m;
    m.dim = static_cast<int>(G.rows());
    m.G = Gs;
    m.F = F;
    m.gmin = es.values(0);
    m.gmax = es.values(es.values.size() - 1);
    return m;
}

Metric metric_identity(int dim) { return metric_from_G(Matd::Identity(dim, dim)); }

FourierPotential make_potential(int dim, const std::map<IntVec, double>& coeffs) {
    FourierPotential p;
    p.dim = dim;
    double v = 0.0;
    double rmax2 = 0.0;
    for (const auto& [m, c] : coeffs) {
        if (static_cast<int>(m.size()) != dim)
            throw InvalidPotential("coefficient index has wrong dimension");
        if (c == 0.0) continue;
        if (is_zero(m)) throw InvalidPotential("vhat(0) must be zero (zero-mean potential)");
        const auto it = coeffs.find(negate(m));
        if (it == coeffs.end() || it->second != c)
            throw InvalidPotential("potential is not even: vhat(-m) != vhat(m) at m=" +
                                   format_intvec(m));
        p.coeffs[m] = c;
        v += std::abs(c);
        rmax2 = std::max(rmax2, static_cast<double>(norm2_exact(m)));
    }
    p.normBound = v;
    p.supportRadius = std::max(1.0, std::sqrt(rmax2));
    return p;
}

FourierPotential zero_potential(int dim) { return make_potential(dim, {}); }

FourierPotential cos_potential(int dim, int axes, double amplitude) {
    std::map<IntVec, double> c;
    for (int ax = 0; ax < axes; ++ax) {
        IntVec e(static_cast<std::size_t>(dim), 0);
        e[static_cast<std::size_t>(ax)] = 1;
        c[e] = amplitude;
        c[negate(e)] = amplitude;
    }
    return make_potential(dim, c);
}

PotentialFile parse_potential_json(const std::string& text) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const std::exception& e) {
        throw InvalidPotential(std::string("malformed potential file: ") + e.what());
    }
    if (!j.contains("dim")) throw InvalidPotential("potential file missing \"dim\"");
    const int dim = j.at("dim").get<int>();
    if (dim < 2) throw InvalidPotential("dim must be >= 2");

    Matd G = Matd::Identity(dim, dim);
    if (j.contains("G")) {
        const auto& gj = j.at("G");
        if (static_cast<int>(gj.size()) != dim)
            throw InvalidPotential("G has wrong number of rows");
        for (int r = 0; r < dim; ++r) {
            if (static_cast<int>(gj.at(r).size()) != dim)
                throw InvalidPotential("G has wrong number of columns");
            for (int c = 0; c < dim; ++c) G(r, c) = gj.at(r).at(c).get<double>();
        }
    }

    std::map<IntVec, double> coeffs;
    if (j.contains("coeffs")) {
        for (const auto& e : j.at("coeffs")) {
            IntVec m;
            for (const auto& x : e.at("m")) m.push_back(x.get<long long>());
            if (static_cast<int>(m.size()) != dim)
                throw InvalidPotential("coefficient index has wrong dimension");
            const double re = e.value("re", 0.0);
            const double im = e.value("im", 0.0);
            if (im != 0.0)
                throw InvalidPotential("complex coefficients are not supported (v1 is "
                                       "restricted to real, even potentials)");
            if (re == 0.0) continue;
            auto it = coeffs.find(m);
            if (it != coeffs.end() && it->second != re)
                throw InvalidPotential("duplicate coefficient with conflicting value at m=" +
                                       format_intvec(m));
            coeffs[m] = re;
        }
    }
    // Hermitian closure: fill missing -m; for real data the conjugate is the value itself
    std::map<IntVec, double> closed = coeffs;
    for (const auto& [m, c] : coeffs) {
        const IntVec neg = negate(m);
        auto it = closed.find(neg);
        if (it == closed.end())
            closed[neg] = c;
        else if (it->second != c)
            throw InvalidPotential("Hermitian symmetry violated at m=" + format_intvec(m));
    }

    PotentialFile out;
    out.metric = metric_from_G(G);
    out.potential = make_potential(dim, closed);
    return out;
}

PotentialFile load_potential_json(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw InvalidPotential("cannot open potential file: " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_potential_json(ss.str());
}

SpectralWindow derive_spectral_window(double rho, const FourierPotential& potential) {
    if (!(rho > 0.0)) throw InvalidParameter("rho must be positive");
    SpectralWindow w;
    w.rho = rho;
    w.lambda = rho * rho;
    w.v = potential.normBound;
    return w;
}

RegionParameters region_parameters(int dim, double rho, double R, int M) {
    if (dim < 2) throw InvalidParameter("dimension must be >= 2");
    if (!(rho > 0.0)) throw InvalidParameter("rho must be positive");
    if (!(R > 0.0)) throw InvalidParameter("support radius must be positive");
    if (M <= 2) throw InvalidParameter("M must be > 2");
    RegionParameters rp;
    rp.dim = dim;
    rp.rho = rho;
    rp.R = R;
    rp.M = M;
    rp.p = 1.0 / (9.0 * dim);
    rp.qn.resize(static_cast<std::size_t>(dim) + 1);
    rp.Ln.resize(static_cast<std::size_t>(dim) + 1);
    for (int n = 0; n <= dim; ++n) {
        rp.qn[static_cast<std::size_t>(n)] = 3.0 * n * rp.p;
        rp.Ln[static_cast<std::size_t>(n)] = std::pow(rho, rp.qn[static_cast<std::size_t>(n)]);
    }
    rp.K = std::pow(rho, rp.p);
    // beta = max over admissible (n, m, l) of alpha = n + m + 2l(m + n - l + 1)
    double beta = 0.0;
    for (int n = 1; n < dim; ++n)
        for (int m = 1; m < dim; ++m)
            for (int l = 0; l <= std::min(n, m); ++l) {
                if (n + m - l > dim) continue;
                beta = std::max(beta, static_cast<double>(n + m + 2 * l * (m + n - l + 1)));
            }
    rp.beta = beta;
    rp.rhoP_gt_R2beta = rp.K > std::pow(R, 2.0 * beta);
    return rp;
}

} // namespace bsgaps
