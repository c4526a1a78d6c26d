#include <doctest.h>

#include "sle/martingales.hpp"
#include "sle/operators.hpp"

#include <random>
#include <set>

using namespace sle;
using M = Module<GaussQ>;
using V = M::Vec;
using QS = Series<GaussQ>;

namespace {

GaussQ rq(std::mt19937& rng)
{
    std::uniform_int_distribution<int> num(-4, 4), den(1, 3);
    return gq(num(rng), den(rng));
}

QS random_loop(std::mt19937& rng, int depth, int window)
{
    std::map<int, GaussQ> t;
    for (int n = -1; n >= -depth; --n) t[n] = rq(rng);
    return with_window(QS::polynomial(Var::zeta, t), -window);
}

QS random_rho(std::mt19937& rng, int depth, int window)
{
    std::map<int, GaussQ> t{{1, gq(1)}};
    for (int n = 0; n >= -depth; --n) t[n] = rq(rng);
    return with_window(QS::polynomial(Var::z, t), -window);
}

// <bra| Y(z) w> as a z-series from the modes Y_n, n = 0..D, where w has
// components of degree <= D; Y = 'L' means the Virasoro field.
QS field_oracle(const M& mod, char Y, Gen g, int bra, const V& w, int D)
{
    QS out(Var::z, Y == 'L' ? -2 - D : -1 - D);
    for (int n = 0; n <= D; ++n) {
        V piece;
        for (const auto& [m, c] : w.terms)
            if (mod.degree(m) == n) piece.add(m, c);
        if (Y == 'L')
            out.add_to(-n - 2, mod.top_coeff(mod.L(n, piece), bra));
        else
            out.add_to(-n - 1, mod.top_coeff(mod.X(g, n, piece), bra));
    }
    return out;
}

Fields<QS> exact_fields(const QS& rho, const QS& e, const QS& h, const QS& f, const std::vector<QS>& heis = {})
{
    Fields<QS> fl;
    fl.r1 = derivative(rho) * mul_inverse(rho);
    fl.schw = schwarzian(rho);
    fl.e = e.relabeled(Var::z);
    fl.de = derivative(fl.e);
    fl.h = h.relabeled(Var::z);
    fl.dh = derivative(fl.h);
    fl.f = f.relabeled(Var::z);
    fl.df = derivative(fl.f);
    for (const QS& x : heis) fl.dheis.push_back(derivative(x.relabeled(Var::z)));
    return fl;
}

// coefficients z^{lo..2} agree
bool same_upto(const QS& a, const QS& b, int lo)
{
    for (int n = lo; n <= 2; ++n)
        if (a.coeff(n) != b.coeff(n)) return false;
    return true;
}

Gen gen_of(char Y) { return Y == 'E' ? Gen::e() : Y == 'H' ? Gen::h() : Gen::f(); }

SLEPathState identity_state(Case k)
{
    PathConfig cfg;
    cfg.kase = k;
    if (k == Case::heisenberg) {
        cfg.kappa = 4;
        cfg.lambda = 0.5;
        cfg.tau_vec = {1.0};
    }
    return initial_state(cfg);
}

} // namespace

TEST_CASE("observables on the identity state")
{
    SLEPathState s = identity_state(Case::sl2);
    const Complex z(4.0, 0.0);
    auto ev = [&](const ObservableSpec& o) { return eval_observable(s, o); };
    CHECK(std::abs(ev(ObservableSpec::bb(8.0 / 3, z)) - Complex(0.625 / 16)) < 1e-15);
    CHECK(std::abs(ev(ObservableSpec::sl2_current('E', +1, -1, z))) - 0.25 == doctest::Approx(0.0));
    CHECK(std::abs(ev(ObservableSpec::sl2_current('E', -1, +1, z))) == 0.0);
    for (Variant v : {Variant::derived, Variant::printed})
        for (int bra : {+1, -1})
            for (int ket : {+1, -1}) {
                Complex l = ev(ObservableSpec::sl2_virasoro(bra, ket, z, v));
                CHECK(std::abs(l - Complex(bra == ket ? 0.25 / 16 : 0.0)) < 1e-15);
                Complex hh = ev(ObservableSpec::sl2_current('H', bra, ket, z, v));
                CHECK(std::abs(hh - Complex(bra == ket ? bra * 0.25 : 0.0)) < 1e-15);
            }
    CHECK_THROWS_AS(ev(ObservableSpec::bb(2, Complex(2.0, 0.0))), std::invalid_argument);
    CHECK(sl2_observables(z).size() == 16);

    SLEPathState hs = identity_state(Case::heisenberg);
    CHECK(std::abs(eval_observable(hs, ObservableSpec::heis_current(0, 0.5, z)) - Complex(0.125)) < 1e-15);
    CHECK(std::abs(eval_observable(hs, ObservableSpec::heis_virasoro(0.5, z)) - Complex(0.125 / 16)) < 1e-15);
    ResidueProbe p = residue_identity_probe(hs, z);
    CHECK(p.lhs == Complex(0.0));
    CHECK(p.rhs == Complex(0.0));
}

TEST_CASE("identity-state generating functions match the lattice module")
{
    const int D = 4;
    M mod = M::lattice_sl2(D);
    QS rho = with_window(QS::identity(Var::z, -kExact), -12), zero = QS::zero(Var::zeta, -12);
    Fields<QS> fl = exact_fields(rho, zero, zero, zero);
    for (char Y : {'E', 'H', 'F', 'L'})
        for (int bra : {+1, -1})
            for (int ket : {+1, -1}) {
                QS direct = field_oracle(mod, Y, Y == 'L' ? Gen::e() : gen_of(Y), bra, mod.top(ket), D);
                CAPTURE(Y);
                CAPTURE(bra);
                CAPTURE(ket);
                TopPair tp{bra, ket};
                CHECK(same_upto(sl2_matrix_element_derived(fl, Y, tp), direct, Y == 'L' ? -2 - D : -1 - D));
                // the printed <v_-|F|v_+> drops e^{2h} and vanishes here
                bool off = Y == 'F' && bra < 0 && ket > 0;
                CHECK(same_upto(sl2_matrix_element_printed(fl, Y, tp), direct, Y == 'L' ? -2 - D : -1 - D) != off);
            }
}

// <v'| Y(z) Theta Q(rho) |v> with Theta = e^{E(e)} e^{H(h)} e^{F(f)}; the bra
// is invariant under Theta since e, h, f only carry negative modes.
TEST_CASE("sl2 matrix elements against the exact lattice oracle")
{
    const int D = 4, W = 12;
    M mod = M::lattice_sl2(D);
    std::set<std::string> printed_wrong;
    for (unsigned seed : {3u, 11u}) {
        std::mt19937 rng(seed);
        QS rho = random_rho(rng, D + 2, W);
        QS e = random_loop(rng, 3, W), h = random_loop(rng, 3, W), f = random_loop(rng, 3, W);
        Fields<QS> fl = exact_fields(rho, e, h, f);
        for (int ket : {+1, -1}) {
            V w = Q_operator(mod, rho, mod.top(ket));
            w = exp_loop(mod, Gen::f(), f, w, D);
            w = exp_loop(mod, Gen::h(), h, w, D);
            w = exp_loop(mod, Gen::e(), e, w, D);
            for (char Y : {'E', 'H', 'F', 'L'})
                for (int bra : {+1, -1}) {
                    QS direct = field_oracle(mod, Y, Y == 'L' ? Gen::e() : gen_of(Y), bra, w, D);
                    TopPair tp{bra, ket};
                    int lo = Y == 'L' ? -2 - D : -1 - D;
                    CAPTURE(Y);
                    CAPTURE(bra);
                    CAPTURE(ket);
                    CHECK(same_upto(sl2_matrix_element_derived(fl, Y, tp), direct, lo));
                    if (!same_upto(sl2_matrix_element_printed(fl, Y, tp), direct, lo))
                        printed_wrong.insert(ObservableSpec::sl2_current(Y, bra, ket, 4.0).id().substr(4));
                }
        }
    }
    // the printed closed forms that disagree with the module computation
    const std::set<std::string> expected{"E.++", "E.--", "F.++", "F.-+", "F.--"};
    if (printed_wrong != expected)
        for (const auto& s : printed_wrong) MESSAGE("printed formula off: " << s);
    CHECK(printed_wrong == expected);
}

TEST_CASE("Heisenberg matrix elements against the Fock module")
{
    const int D = 4, W = 12;
    const GaussQ lam = gq(1, 2);
    M mod = M::heisenberg(2, lam, D);
    std::mt19937 rng(5);
    QS rho = random_rho(rng, D + 2, W);
    std::vector<QS> hs{random_loop(rng, 3, W), random_loop(rng, 3, W)};
    QS zero = QS::zero(Var::zeta, -W);
    Fields<QS> fl = exact_fields(rho, zero, zero, zero, hs);
    V w = Q_operator(mod, rho, mod.top());
    for (int i = 0; i < 2; ++i) w = exp_loop(mod, Gen::h(i), hs[std::size_t(i)], w, D);
    for (int j = 0; j < 2; ++j)
        CHECK(same_upto(heisenberg_current(fl, j, lam), field_oracle(mod, 'X', Gen::h(j), +1, w, D), -1 - D));
    CHECK(same_upto(heisenberg_virasoro(fl, lam), field_oracle(mod, 'L', Gen::h(), +1, w, D), -2 - D));
}

TEST_CASE("double-residue side of the Heisenberg identity is l/12 times the Schwarzian")
{
    std::mt19937 rng(9);
    for (int rank : {1, 2, 3}) {
        QS rho = random_rho(rng, 8, 20);
        QS lhs = residue_identity_lhs(rho, rank, 14);
        QS s = schwarzian(rho) * Ring<GaussQ>::div_int(Ring<GaussQ>::from_int(rank), 12);
        for (int n = -16; n <= 2; ++n) CHECK(lhs.coeff(n) == s.coeff(n));
    }
}

TEST_CASE("observable ids and probes")
{
    CHECK(ObservableSpec::sl2_current('F', -1, +1, 4.0).id() == "sl2.F.-+");
    CHECK(ObservableSpec::sl2_virasoro(+1, +1, 4.0, Variant::printed).id() == "sl2.L.++.printed");
    CHECK(ObservableSpec::heis_current(0, 0.5, 4.0).id() == "heis.H1");
    ObservableSpec o = ObservableSpec::bb(2, 4.0);
    o.coeff = 2;
    SLEPathState s = identity_state(Case::sl2);
    CHECK(eval_observable(s, o) == Complex(o.h));
}

TEST_CASE("drift reports")
{
    TrajectoryTable tab;
    tab.times = {0.0, 0.1};
    tab.n_obs = 1;
    tab.values = {1.0, 1.0, 1.0, 1.0, 1.0, 1.0};
    DriftReport r = drift_report(tab, 0, "x", "p");
    CHECK(r.pass);
    CHECK(r.max_z == 0.0);
    tab.values = {1.0, 2.0, 1.0, 2.0, 1.0, 2.0};
    CHECK_FALSE(drift_report(tab, 0, "x", "p").pass);
    tab.times = {0.1, 0.2};
    CHECK_THROWS(drift_report(tab, 0, "x", "p"));
}

TEST_CASE("small sl2 drift run and the vector check")
{
    PathConfig cfg;
    cfg.kappa = 2;
    cfg.tau = 1.0;
    cfg.dt = 1e-2;
    cfg.T = 0.1;
    cfg.N = 10;
    cfg.M = 8;
    auto reps = drift_test(cfg, sl2_observables(4.0), 200, {0.05, 0.1}, 5.0);
    CHECK(reps.size() == 16);
    for (const auto& r : reps) {
        CAPTURE(r.id);
        CHECK(r.times.size() == 3);
        CHECK(r.pass);
    }
    auto vec = vector_martingale_check(cfg, 2, 100, {0.1}, 5.0);
    CHECK(vec.size() >= 8);
    int ones = 0;
    for (const auto& r : vec) {
        CAPTURE(r.id);
        CHECK((r.m0 == Complex(0.0) || r.m0 == Complex(1.0)));
        ones += r.m0 == Complex(1.0);
        CHECK(r.pass);
    }
    CHECK(ones == 1);
}
