#include "sle/verify.hpp"

#include "sle/operators.hpp"

#include <chrono>
#include <cmath>
#include <random>
#include <sstream>

namespace sle {

using M = Module<GaussQ>;
using V = M::Vec;
using QS = Series<GaussQ>;

bool SuiteResult::pass() const
{
    for (const auto& c : checks)
        if (!c.pass) return false;
    return !checks.empty();
}

void SuiteResult::add(std::string n, bool ok, std::string detail)
{
    checks.push_back({std::move(n), ok, std::move(detail)});
}

namespace {

class Timer {
public:
    explicit Timer(SuiteResult& r) : r_(r), t0_(std::chrono::steady_clock::now()) {}
    ~Timer() { r_.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0_).count(); }

private:
    SuiteResult& r_;
    std::chrono::steady_clock::time_point t0_;
};

std::string str(const GaussQ& q)
{
    std::ostringstream os;
    os << q;
    return os.str();
}

GaussQ rq(std::mt19937& rng)
{
    std::uniform_int_distribution<int> num(-4, 4), den(1, 3);
    return gq(num(rng), den(rng));
}

QS random_poly(std::mt19937& rng, int lo, int hi)
{
    std::map<int, GaussQ> t;
    for (int n = lo; n <= hi; ++n) t[n] = rq(rng);
    return QS::polynomial(Var::zeta, t);
}

std::vector<Gen> gens_of(const M& mod)
{
    if (mod.kind() == ModuleKind::HeisenbergFock) {
        std::vector<Gen> g;
        for (int i = 0; i < mod.rank(); ++i) g.push_back(Gen::h(i));
        return g;
    }
    return {Gen::e(), Gen::h(), Gen::f()};
}

std::size_t nnz(const V& v) { return v.terms.size(); }

} // namespace

SuiteResult verify_singular(unsigned seed)
{
    SuiteResult r{"singular"};
    Timer t(r);
    for (GaussQ kappa : {gq(2), gq(6), gq(8, 3)}) {
        auto [c, h] = sle_central_charge_weight(kappa);
        SingularResidual res = singular_check(c, h, kappa);
        r.add("kappa=" + str(kappa), res.zero(), "c=" + str(c) + " h=" + str(h));
    }
    std::mt19937 rng(seed);
    const GaussQ kappas[] = {gq(2), gq(6), gq(8, 3)};
    for (int i = 0; i < 5; ++i) {
        GaussQ kappa = kappas[i % 3], c, h;
        auto [c0, h0] = sle_central_charge_weight(kappa);
        do {
            c = rq(rng);
            h = rq(rng);
        } while (c == c0 && h == h0);
        SingularResidual res = singular_check(c, h, kappa);
        r.add("nonconforming kappa=" + str(kappa) + " c=" + str(c) + " h=" + str(h), !res.zero(),
              "residual terms " + std::to_string(nnz(res.l1) + nnz(res.l2)));
    }
    return r;
}

SuiteResult verify_annihilators()
{
    SuiteResult r{"annihilator"};
    Timer t(r);
    for (int rank : {1, 2})
        for (GaussQ lam : {gq(0), gq(1, 2)}) {
            M mod = M::heisenberg(rank, lam);
            std::vector<GaussQ> tau(static_cast<std::size_t>(rank), gq(2));
            tau[0] = gq(2) - gq(4) * lam * lam;
            std::string tag = "heisenberg l=" + std::to_string(rank) + " lambda=" + str(lam);
            r.add(tag, annihilator_apply(mod, gq(4), tau, mod.top()).is_zero());
            tau[0] += gq(1);
            r.add(tag + " tau_1+1 (control)", !annihilator_apply(mod, gq(4), tau, mod.top()).is_zero());
        }
    M lat = M::lattice_sl2();
    for (auto [k, tau] : {std::pair{gq(2), gq(1)}, std::pair{gq(1), gq(3, 2)}, std::pair{gq(3), gq(1, 2)}})
        for (int s : {+1, -1}) {
            std::string tag = std::string("sl2 e^") + (s > 0 ? "+" : "-") + "Lambda kappa=" + str(k) + " tau=" + str(tau);
            r.add(tag, annihilator_apply(lat, k, {tau}, lat.top(s)).is_zero());
            r.add(tag + " tau+1/2 (control)", !annihilator_apply(lat, k, {tau + gq(1, 2)}, lat.top(s)).is_zero());
        }
    return r;
}

SuiteResult verify_sugawara(int degree)
{
    SuiteResult r{"sugawara"};
    Timer t(r);
    const int cut = degree + 4;
    std::vector<std::pair<std::string, M>> mods;
    mods.emplace_back("heisenberg l=1", M::heisenberg(1, gq(1, 2), cut));
    mods.emplace_back("heisenberg l=2", M::heisenberg(2, gq(1, 3), cut));
    mods.emplace_back("lattice sl2", M::lattice_sl2(cut));
    for (const auto& [name, mod] : mods) {
        // central charge read from <top|[L2, L-2] - 4 L0|top>
        V top = mod.top();
        GaussQ c = mod.top_coeff(mod.L(2, mod.L(-2, top)) - mod.L(-2, mod.L(2, top)) - mod.L(0, top) * gq(4)) * gq(2);
        GaussQ want = mod.kind() == ModuleKind::HeisenbergFock ? gq(mod.rank()) : gq(1);
        r.add(name + " central charge", c == want && mod.central_charge() == want, "c=" + str(c));

        long vv = 0, vx = 0, xx = 0, bad_vv = 0, bad_vx = 0, bad_xx = 0;
        for (const Mono& b : mod.basis_upto(degree)) {
            V v(b, gq(1));
            for (int m = -2; m <= 2; ++m)
                for (int n = -2; n <= 2; ++n) {
                    V lhs = mod.L(m, mod.L(n, v)) - mod.L(n, mod.L(m, v));
                    V rhs = mod.L(m + n, v) * gq(m - n);
                    if (m + n == 0) rhs += v * (want * gq((long long)m * m * m - m, 12));
                    ++vv;
                    bad_vv += !(lhs == rhs);
                    for (Gen x : gens_of(mod)) {
                        ++vx;
                        bad_vx += !(mod.L(m, mod.X(x, n, v)) - mod.X(x, n, mod.L(m, v)) == mod.X(x, m + n, v) * gq(-n));
                        for (Gen y : gens_of(mod)) {
                            V l2 = mod.X(x, m, mod.X(y, n, v)) - mod.X(y, n, mod.X(x, m, v));
                            V r2;
                            for (auto [k, z] : lie_bracket(x, y, mod.kind())) r2.add(mod.X(z, m + n, v), gq(k));
                            if (m + n == 0) r2.add(v, gq(m * killing(x, y, mod.kind())));
                            ++xx;
                            bad_xx += !(l2 == r2);
                        }
                    }
                }
        }
        auto tally = [](long bad, long all) { return std::to_string(all - bad) + "/" + std::to_string(all) + " zero"; };
        r.add(name + " [L_m, L_n]", bad_vv == 0, tally(bad_vv, vv));
        r.add(name + " [L_m, X(n)]", bad_vx == 0, tally(bad_vx, vx));
        r.add(name + " [X(m), Y(n)]", bad_xx == 0, tally(bad_xx, xx));
    }
    return r;
}

SuiteResult verify_conjugations(int degree, int depth, unsigned seed)
{
    SuiteResult r{"conjugation"};
    Timer t(r);
    std::mt19937 rng(seed);
    const int D = degree, cut = degree + 4, window = 4 * (depth + 4);
    M lat = M::lattice_sl2(cut);
    const Gen gens[] = {Gen::e(), Gen::h(), Gen::f()};
    const auto basis = lat.basis_upto(D);
    for (Gen A : gens)
        for (Gen X : gens) {
            QS a = random_poly(rng, -depth, -1), x = random_poly(rng, -depth, 2);
            auto printed = twist_sl2_case(A, a, X, x, window);
            long bad = 0;
            for (const Mono& b : basis) bad += !conjugation_residual(lat, A, a, X, x, printed, V(b, gq(1)), D).is_zero();
            r.add(std::string("A=") + gen_name(A) + " X=" + gen_name(X), bad == 0,
                  std::to_string(basis.size() - std::size_t(bad)) + "/" + std::to_string(basis.size()) + " basis vectors");
        }
    M heis = M::heisenberg(2, gq(1, 3), cut);
    std::vector<std::pair<std::string, const M*>> mods{{"heisenberg", &heis}, {"lattice sl2", &lat}};
    for (const auto& [name, mod] : mods) {
        long bad = 0, all = 0;
        for (Gen A : gens_of(*mod)) {
            QS a = random_poly(rng, -depth, -1);
            for (const Mono& b : mod->basis_upto(D))
                for (int n = -2; n <= 2; ++n, ++all)
                    bad += !virasoro_internal_residual(*mod, A, a, n, V(b, gq(1)), D).is_zero();
        }
        r.add(name + " Virasoro under internal twist", bad == 0,
              std::to_string(all - bad) + "/" + std::to_string(all) + " zero");
    }
    return r;
}

SymmetryResult verify_symmetry(const SymmetryOptions& o)
{
    SymmetryResult out;
    SuiteResult& r = out.suite;
    r.name = "symmetry";
    Timer t(r);
    SymVars V(o.K);
    const int need = safe_window(o.dmax, o.lmax);
    if (o.K < need) {
        r.add("window", false, "K = " + std::to_string(o.K) + " < safe window " + std::to_string(need));
        return out;
    }

    std::vector<PolyState> states;
    if (o.oracle_degree > 0) {
        MartingaleTable tab = martingale_table(V, o.oracle_degree);
        long bad = 0, all = 0;
        for (char X : {'E', 'H', 'F', 'L'})
            for (int l = -o.lmax; l <= o.lmax; ++l) {
                auto img = tab.mode(X, l);
                SymOp op = build_operator(V, X, l, o.oracle_degree, o.variant);
                for (std::size_t u = 0; u < tab.M.size(); ++u, ++all) bad += !(apply_symmetry_op(op, tab.M[u]) == img[u]);
            }
        r.add("module oracle M_{X(l)u} = X_l M_u, deg <= " + std::to_string(o.oracle_degree), bad == 0,
              std::to_string(all - bad) + "/" + std::to_string(all) + " exact");
        for (std::size_t u = 0; u < tab.M.size(); ++u)
            if (tab.degree[u] <= o.dmax) states.push_back(tab.M[u]);
    }
    {
        // dense random states on every monomial of weight <= dmax
        std::vector<Poly> ms{Poly(1)};
        for (std::size_t i = 0; i < ms.size(); ++i) {
            int w = ms[i].max_weight([&](int v) { return V.weight(v); });
            int from = ms[i].max_var();
            for (int v = std::max(0, from); v < V.count(); ++v)
                if (w + V.weight(v) <= o.dmax) ms.push_back(ms[i] * Poly::var(v));
        }
        std::mt19937 rng(o.seed);
        std::uniform_int_distribution<int> c(-3, 3);
        for (int k = 0; k < o.random_states; ++k) {
            PolyState p;
            for (const Poly& m : ms) {
                p.c[0] += Poly(c(rng)) * m;
                p.c[1] += Poly(c(rng)) * m;
            }
            states.push_back(p);
        }
    }

    long bad = 0;
    for (char a : {'E', 'H', 'F', 'L'})
        for (char b : {'E', 'H', 'F', 'L'})
            for (int l = -o.lmax; l <= o.lmax; ++l)
                for (int m = -o.lmax; m <= o.lmax; ++m) {
                    out.brackets.push_back(commutator_check(V, a, l, b, m, states, o.dmax, o.variant));
                    bad += !out.brackets.back().pass();
                }
    auto find = [&](char a, int l, char b, int m) -> const CommutatorReport& {
        for (const auto& x : out.brackets)
            if (x.a == a && x.l == l && x.b == b && x.m == m) return x;
        throw std::logic_error("bracket missing");
    };
    r.add("brackets |l|,|m| <= " + std::to_string(o.lmax), bad == 0,
          std::to_string(out.brackets.size() - std::size_t(bad)) + "/" + std::to_string(out.brackets.size()) + " zero on " +
              std::to_string(states.size()) + " states");
    if (o.lmax >= 1) {
        r.add("central [E_1, F_-1]", find('E', 1, 'F', -1).pass());
        r.add("central [H_1, H_-1]", find('H', 1, 'H', -1).pass());
    }

    // central charge read off [L_2, L_-2] - 4 L_0 on the constant
    if (o.lmax >= 2) {
        const PolyState p = constant_state(-1);
        SymOp l2 = build_operator(V, 'L', 2, 2, o.variant), lm2 = build_operator(V, 'L', -2, 0, o.variant),
              l0 = build_operator(V, 'L', 0, 0, o.variant);
        PolyState d = apply_symmetry_op(l2, apply_symmetry_op(lm2, p)) - apply_symmetry_op(lm2, apply_symmetry_op(l2, p)) -
                      Poly(4) * apply_symmetry_op(l0, p);
        bool ok = d.c[0].is_zero() && d.c[1].is_constant();
        GaussQ c = d.c[1].constant() * gq(2);
        r.add("central charge from [L_2, L_-2]", ok && c == gq(1), "c = " + str(c));
    }

    PathConfig cfg;
    SLEPathState id = initial_state(cfg);
    double worst = 0;
    for (char X : {'E', 'H', 'F', 'L'})
        for (int bra : {+1, -1})
            for (int ket : {+1, -1}) {
                out.genfun.push_back(generating_function_check(V, X, {bra, ket}, id, o.genfun_depth, o.variant));
                worst = std::max(worst, out.genfun.back().max_residual);
            }
    std::ostringstream os;
    os << "max residual " << worst;
    r.add("generating functions at the identity", worst == 0.0, os.str());
    return out;
}

IntegratorComparison compare_integrators(PathConfig cfg, std::size_t n_paths, const std::vector<double>& dts)
{
    IntegratorComparison out;
    auto obs = [](const SLEPathState& s) {
        return std::vector<Complex>{s.e.coeff(-2), s.h.coeff(-2), s.f.coeff(-2)};
    };
    for (double dt : dts) {
        PathConfig a = cfg;
        a.dt = dt;
        a.integrator = Integrator::coefficient_euler;
        PathConfig b = a;
        b.integrator = Integrator::multiplicative;
        auto ta = run_paths(a, n_paths, {a.T}, 3, obs), tb = run_paths(b, n_paths, {b.T}, 3, obs);
        double ms = 0;
        for (std::size_t p = 0; p < n_paths; ++p)
            for (std::size_t j = 0; j < 3; ++j) ms += std::norm(ta.at(p, 0, j) - tb.at(p, 0, j));
        out.dts.push_back(dt);
        out.msq.push_back(ms / double(n_paths));
    }
    if (out.msq.size() >= 2 && out.msq[0] > 0) out.ratio = out.msq.back() / out.msq.front();
    return out;
}

SuiteResult verify_deterministic(double dt, double T, int depth, std::size_t stochastic_paths)
{
    SuiteResult r{"deterministic"};
    Timer t(r);
    PathConfig c;
    c.kase = Case::virasoro_only;
    c.kappa = 0;
    c.dt = dt;
    c.T = T;
    c.N = std::max(c.N, depth + 2);
    SLEPathState s;
    simulate_path(c, 0, {c.steps()}, [&](std::size_t, const SLEPathState& st) { s = st; });
    // sqrt(z^2 + 4T) = z sum_k binom(1/2, k) (4T)^k z^{-2k}
    double worst = 0, worst_even = 0, binom = 1;
    for (int k = 1; 2 * k - 1 <= depth; ++k) {
        binom *= (0.5 - (k - 1)) / k;
        double want = binom * std::pow(4 * T, k);
        worst = std::max(worst, std::abs(s.g().coeff(1 - 2 * k) - want) / std::abs(want));
        if (2 * k <= depth) worst_even = std::max(worst_even, std::abs(s.g().coeff(-2 * k)));
    }
    std::ostringstream os;
    os << "max relative error " << worst << " (z^-1..z^-" << depth << "), even coefficients " << worst_even;
    r.add("kappa=0 matches sqrt(z^2+4t)", worst <= 1e-4 && worst_even <= 1e-12, os.str());

    PathConfig sc;
    sc.kase = Case::sl2;
    sc.kappa = 2;
    sc.dt = 1e-3;
    sc.T = 0.25;
    sc.N = 8;
    sc.M = 6;
    std::vector<double> times;
    for (int k = 0; k <= 5; ++k) times.push_back(0.05 * k);
    auto tab = run_paths(sc, stochastic_paths, times, 1, [](const SLEPathState& st) {
        return std::vector<Complex>{st.g().coeff(-1) - Complex(2 * st.t)};
    });
    double a1 = 0;
    for (const Complex& v : tab.values) a1 = std::max(a1, std::abs(v));
    std::ostringstream os2;
    os2 << "max |a1 - 2t| = " << a1 << " over " << stochastic_paths << " paths";
    r.add("a1 = 2t on stochastic paths", a1 <= 1e-6, os2.str());
    return r;
}

ResidueReport residue_report(const PathConfig& cfg, std::size_t n_paths, const std::vector<double>& times, Complex z)
{
    ResidueReport out;
    out.times = times;
    auto tab = run_paths(cfg, n_paths, times, 2, [&](const SLEPathState& s) {
        ResidueProbe p = residue_identity_probe(s, z);
        return std::vector<Complex>{p.lhs, p.rhs};
    });
    const double n = double(n_paths);
    out.zero_at_start = !times.empty() && times.front() == 0.0 && n_paths > 0;
    for (std::size_t k = 0; k < times.size(); ++k) {
        Complex sl = 0, sr = 0, sd = 0;
        double var_re = 0, var_im = 0, mx = 0;
        for (std::size_t p = 0; p < n_paths; ++p) {
            Complex l = tab.at(p, k, 0), r = tab.at(p, k, 1);
            sl += l;
            sr += r;
            sd += l - r;
            mx = std::max(mx, std::abs(l - r));
            if (k == 0 && (l != Complex(0.0) || r != Complex(0.0))) out.zero_at_start = false;
        }
        Complex md = sd / n;
        for (std::size_t p = 0; p < n_paths; ++p) {
            Complex d = tab.at(p, k, 0) - tab.at(p, k, 1) - md;
            var_re += d.real() * d.real();
            var_im += d.imag() * d.imag();
        }
        double dn = std::max(1.0, n - 1);
        out.mean_lhs.push_back(sl / n);
        out.mean_rhs.push_back(sr / n);
        out.mean_diff.push_back(md);
        out.se_diff.push_back(Complex(std::sqrt(var_re / dn / n), std::sqrt(var_im / dn / n)));
        out.max_abs_diff.push_back(mx);
    }
    return out;
}

} // namespace sle
