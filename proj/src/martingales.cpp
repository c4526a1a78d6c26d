#include "sle/martingales.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <limits>
#include <map>
#include <sstream>

namespace sle {

namespace {

using CS = Series<Complex>;

struct Jet {
    Complex v, d1, d2, d3;
};

Jet jet(const CS& s, Complex z)
{
    Jet j{};
    for (int n = s.lo(); n <= s.hi(); ++n) {
        Complex c = s.coeff(n);
        if (c == Complex(0.0)) continue;
        double dn = n;
        j.v += c * std::pow(z, n);
        j.d1 += c * dn * std::pow(z, n - 1);
        j.d2 += c * dn * (dn - 1) * std::pow(z, n - 2);
        j.d3 += c * dn * (dn - 1) * (dn - 2) * std::pow(z, n - 3);
    }
    return j;
}

std::string sign_char(int s) { return s > 0 ? "+" : "-"; }


} // namespace

std::string probe_string(const ObservableSpec& o)
{
    std::ostringstream os;
    if (o.coeff > 0)
        os << "coeff:" << o.coeff;
    else
        os << "z=" << o.z.real() << (o.z.imag() < 0 ? "" : "+") << o.z.imag() << "i";
    return os.str();
}

std::string ObservableSpec::id() const
{
    std::string s;
    switch (kind) {
    case ObsKind::VirasoroBB: {
        std::ostringstream os;
        os << "bb(c=" << c << ",h=" << h << ")";
        s = os.str();
        break;
    }
    case ObsKind::HeisenbergCurrent: s = "heis.H" + std::to_string(index + 1); break;
    case ObsKind::HeisenbergVirasoro: s = "heis.L"; break;
    case ObsKind::Sl2Current: s = std::string("sl2.") + field + "." + sign_char(tops.bra) + sign_char(tops.ket); break;
    case ObsKind::Sl2Virasoro: s = "sl2.L." + sign_char(tops.bra) + sign_char(tops.ket); break;
    case ObsKind::HeisenbergResidueIdentity: s = "heis.residue_identity"; break;
    }
    if (variant == Variant::printed) s += ".printed";
    return s;
}

ObservableSpec ObservableSpec::bb(double kappa, Complex z)
{
    ObservableSpec o;
    o.kind = ObsKind::VirasoroBB;
    o.c = (3 * kappa - 8) * (6 - kappa) / (2 * kappa);
    o.h = (6 - kappa) / (2 * kappa);
    o.z = z;
    return o;
}

ObservableSpec ObservableSpec::sl2_current(char X, int bra, int ket, Complex z, Variant v)
{
    ObservableSpec o;
    o.kind = ObsKind::Sl2Current;
    o.field = X;
    o.tops = {bra, ket};
    o.z = z;
    o.variant = v;
    return o;
}

ObservableSpec ObservableSpec::sl2_virasoro(int bra, int ket, Complex z, Variant v)
{
    ObservableSpec o;
    o.kind = ObsKind::Sl2Virasoro;
    o.field = 'L';
    o.tops = {bra, ket};
    o.z = z;
    o.variant = v;
    return o;
}

ObservableSpec ObservableSpec::heis_current(int j, double lambda, Complex z)
{
    ObservableSpec o;
    o.kind = ObsKind::HeisenbergCurrent;
    o.index = j;
    o.lambda = lambda;
    o.z = z;
    return o;
}

ObservableSpec ObservableSpec::heis_virasoro(double lambda, Complex z)
{
    ObservableSpec o;
    o.kind = ObsKind::HeisenbergVirasoro;
    o.lambda = lambda;
    o.z = z;
    return o;
}

std::vector<ObservableSpec> sl2_observables(Complex z, Variant v)
{
    std::vector<ObservableSpec> out;
    const int pairs[4][2] = {{+1, +1}, {-1, +1}, {+1, -1}, {-1, -1}};
    for (char X : {'E', 'H', 'F'})
        for (auto& p : pairs) out.push_back(ObservableSpec::sl2_current(X, p[0], p[1], z, v));
    for (auto& p : pairs) out.push_back(ObservableSpec::sl2_virasoro(p[0], p[1], z, v));
    return out;
}

Fields<Complex> fields_at(const SLEPathState& s, Complex z)
{
    Fields<Complex> f;
    Jet r = jet(s.rho, z);
    f.r1 = r.d1 / r.v;
    f.schw = r.d3 / r.d1 - 1.5 * (r.d2 / r.d1) * (r.d2 / r.d1);
    Jet e = jet(s.e, z), h = jet(s.h, z), ff = jet(s.f, z);
    f.e = e.v;
    f.de = e.d1;
    f.h = h.v;
    f.dh = h.d1;
    f.f = ff.v;
    f.df = ff.d1;
    for (const CS& hi : s.heis) f.dheis.push_back(jet(hi, z).d1);
    return f;
}

Fields<CS> fields_series(const SLEPathState& s)
{
    Fields<CS> f;
    f.r1 = derivative(s.rho) * mul_inverse(s.rho);
    f.schw = schwarzian(s.rho);
    auto rz = [](const CS& x) { return x.relabeled(Var::z); };
    f.e = rz(s.e);
    f.de = derivative(f.e);
    f.h = rz(s.h);
    f.dh = derivative(f.h);
    f.f = rz(s.f);
    f.df = derivative(f.f);
    for (const CS& hi : s.heis) f.dheis.push_back(derivative(rz(hi)));
    return f;
}

namespace {

template <class V>
V eval_fields(const Fields<V>& fl, const ObservableSpec& o)
{
    using S = typename FieldOps<V>::S;
    switch (o.kind) {
    case ObsKind::VirasoroBB: return virasoro_bb(fl, S(o.c), S(o.h));
    case ObsKind::HeisenbergCurrent:
        if (o.index < 0 || o.index >= static_cast<int>(fl.dheis.size()))
            throw std::invalid_argument("Heisenberg current index out of range");
        return heisenberg_current(fl, o.index, S(o.lambda));
    case ObsKind::HeisenbergVirasoro:
        if (fl.dheis.empty()) throw std::invalid_argument("Heisenberg observable on a state without h^i");
        return heisenberg_virasoro(fl, S(o.lambda));
    case ObsKind::Sl2Current:
    case ObsKind::Sl2Virasoro:
        return o.variant == Variant::derived ? sl2_matrix_element_derived(fl, o.field, o.tops)
                                             : sl2_matrix_element_printed(fl, o.field, o.tops);
    case ObsKind::HeisenbergResidueIdentity: break;
    }
    throw std::invalid_argument("observable has no closed form");
}

} // namespace

Complex eval_observable(const SLEPathState& s, const ObservableSpec& o)
{
    if (o.kind == ObsKind::HeisenbergResidueIdentity) {
        ResidueProbe p = residue_identity_probe(s, o.z);
        return p.lhs - p.rhs;
    }
    if (o.coeff > 0) return eval_fields(fields_series(s), o).coeff(-o.coeff);
    if (std::abs(o.z) < kZMin) {
        std::ostringstream os;
        os << "probe |z| = " << std::abs(o.z) << " is below z_min = " << kZMin;
        throw std::invalid_argument(os.str());
    }
    return eval_fields(fields_at(s, o.z), o);
}

DriftReport drift_report(const TrajectoryTable& tab, std::size_t j, const std::string& id, const std::string& probe,
                         double threshold)
{
    DriftReport r;
    r.id = id;
    r.probe = probe;
    r.threshold = threshold;
    r.times = tab.times;
    const std::size_t n = tab.n_paths();
    if (n == 0) return r;
    if (tab.times.empty() || tab.times.front() != 0.0) throw std::invalid_argument("drift_report: first sample time must be 0");
    r.m0 = tab.at(0, 0, j);
    for (std::size_t k = 0; k < tab.times.size(); ++k) {
        double sr = 0, si = 0;
        for (std::size_t p = 0; p < n; ++p) {
            sr += tab.at(p, k, j).real();
            si += tab.at(p, k, j).imag();
        }
        double mr = sr / double(n), mi = si / double(n);
        double vr = 0, vi = 0;
        for (std::size_t p = 0; p < n; ++p) {
            vr += std::pow(tab.at(p, k, j).real() - mr, 2);
            vi += std::pow(tab.at(p, k, j).imag() - mi, 2);
        }
        double ser = n > 1 ? std::sqrt(vr / double(n - 1) / double(n)) : 0.0;
        double sei = n > 1 ? std::sqrt(vi / double(n - 1) / double(n)) : 0.0;
        auto zs = [](double diff, double se, double scale) {
            if (se > 0) return std::abs(diff) / se;
            return std::abs(diff) <= 1e-12 * (1 + std::abs(scale)) ? 0.0 : std::numeric_limits<double>::infinity();
        };
        double z = std::max(zs(mr - r.m0.real(), ser, r.m0.real()), zs(mi - r.m0.imag(), sei, r.m0.imag()));
        r.mean.emplace_back(mr, mi);
        r.se.emplace_back(ser, sei);
        r.z.push_back(z);
        r.max_z = std::max(r.max_z, z);
    }
    r.pass = r.max_z <= threshold;
    return r;
}

std::vector<DriftReport> drift_test(const PathConfig& cfg, const std::vector<ObservableSpec>& obs, std::size_t n_paths,
                                    const std::vector<double>& times0, double threshold)
{
    std::vector<double> times = times0;
    if (times.empty() || times.front() != 0.0) times.insert(times.begin(), 0.0);
    auto tab = run_paths(cfg, n_paths, times, obs.size(), [&](const SLEPathState& s) {
        std::vector<Complex> v;
        v.reserve(obs.size());
        for (const auto& o : obs) v.push_back(eval_observable(s, o));
        return v;
    });
    std::vector<DriftReport> out;
    for (std::size_t j = 0; j < obs.size(); ++j) out.push_back(drift_report(tab, j, obs[j].id(), probe_string(obs[j]), threshold));
    return out;
}

std::vector<DriftReport> vector_martingale_check(const PathConfig& cfg, int D, std::size_t n_paths,
                                                 const std::vector<double>& times0, double threshold)
{
    if (cfg.kase != Case::sl2) throw std::invalid_argument("vector_martingale_check runs on the sl2 lattice module");
    cfg.require_valid();
    using Mod = Module<Complex>;
    Mod mod = Mod::lattice_sl2(D + 2);
    std::vector<Mono> basis = mod.basis_upto(D);
    std::map<Mono, int> index;
    for (std::size_t i = 0; i < basis.size(); ++i) index[basis[i]] = static_cast<int>(i);
    const int n = static_cast<int>(basis.size());

    using Mat = Eigen::MatrixXcd;
    auto matrix_of = [&](const std::function<Mod::Vec(const Mod::Vec&)>& op) {
        Mat m = Mat::Zero(n, n);
        for (int c = 0; c < n; ++c) {
            Mod::Vec out = op(Mod::Vec(basis[std::size_t(c)], Complex(1.0)));
            for (const auto& [mono, val] : out.terms) {
                auto it = index.find(mono);
                if (it != index.end()) m(it->second, c) = val;
            }
        }
        return m;
    };
    const double r2 = 1.0 / std::sqrt(2.0);
    const Complex I(0, 1);
    auto X = [&](int r, const Mod::Vec& v) {
        switch (r) {
        case 1: return mod.X(Gen::h(), -1, v) * Complex(r2);
        case 2: return (mod.X(Gen::e(), -1, v) + mod.X(Gen::f(), -1, v)) * Complex(r2);
        default: return (mod.X(Gen::e(), -1, v) - mod.X(Gen::f(), -1, v)) * (I * r2);
        }
    };
    const double tau = cfg.sl2_tau();
    Mat A = matrix_of([&](const Mod::Vec& v) {
        Mod::Vec r = mod.L(-2, v) * Complex(-2.0) + mod.L(-1, mod.L(-1, v)) * Complex(cfg.kappa / 2);
        for (int k = 1; k <= 3; ++k) r += X(k, X(k, v)) * Complex(tau / 2);
        return r;
    });
    std::vector<Mat> Nz{matrix_of([&](const Mod::Vec& v) { return mod.L(-1, v); })};
    const double sg = cfg.sign == SignConvention::appC ? -1.0 : 1.0;
    for (int k = 1; k <= 3; ++k) Nz.push_back(matrix_of([&](const Mod::Vec& v) { return X(k, v) * Complex(sg); }));

    std::vector<double> times = times0;
    if (times.empty() || times.front() != 0.0) times.insert(times.begin(), 0.0);
    auto steps = sample_steps(cfg, times);
    const int col = index.at(mod.top().terms.begin()->first);

    TrajectoryTable tab;
    tab.times = times;
    tab.n_obs = std::size_t(n);
    tab.values.assign(n_paths * times.size() * std::size_t(n), Complex(0.0));
    parallel_for(n_paths, [&](std::size_t p) {
        BrownianDriver drv(cfg, p);
        Mat G = Mat::Identity(n, n);
        std::size_t j = 0;
        for (long s = 0; j < steps.size(); ++s) {
            while (j < steps.size() && steps[j] == s) {
                for (int i = 0; i < n; ++i) tab.values[(p * times.size() + j) * std::size_t(n) + std::size_t(i)] = G(i, col);
                ++j;
            }
            if (j == steps.size()) break;
            const auto& dB = drv.next(cfg.dt);
            Mat inc = Mat::Identity(n, n) + A * cfg.dt;
            for (int k = 0; k < 4; ++k) inc += Nz[std::size_t(k)] * dB[std::size_t(k)];
            G = G * inc;
        }
    });
    std::vector<DriftReport> out;
    for (int i = 0; i < n; ++i) {
        const Mono& m = basis[std::size_t(i)];
        std::ostringstream id;
        id << "vec.deg" << mod.degree(m) << ".u" << i;
        out.push_back(drift_report(tab, std::size_t(i), id.str(), "component", threshold));
    }
    return out;
}

ResidueProbe residue_identity_probe(const SLEPathState& s, Complex z, int depth)
{
    if (s.heis.empty()) throw std::invalid_argument("residue identity needs the Heisenberg case");
    depth = std::min(depth, -s.rho.prec());
    const int rank = static_cast<int>(s.heis.size());
    CS lhs = residue_identity_lhs(s.rho, rank, depth);
    Fields<Complex> f = fields_at(s, z);
    Complex rhs = f.schw * (double(rank) / 12.0);
    for (const Complex& d : f.dheis) rhs += 0.5 * d * d;
    return {evaluate(lhs, z), rhs};
}

} // namespace sle
