#pragma once

#include "sle/algebra.hpp"
#include "sle/sde.hpp"
#include "sle/series.hpp"

#include <string>
#include <vector>

namespace sle {

// Arithmetic needed by the closed forms, for pointwise values (Complex) and
// for whole z-series (coefficient probes, exact oracles).
template <class V>
struct FieldOps;

template <>
struct FieldOps<Complex> {
    using S = Complex;
    static Complex exp(const Complex& v) { return std::exp(v); }
    static Complex cst(const Complex&, const S& c) { return c; }
};

template <class T>
struct FieldOps<Series<T>> {
    using S = T;
    static Series<T> exp(const Series<T>& v) { return exp_series(v); }
    static Series<T> cst(const Series<T>& proto, const T& c)
    {
        return Series<T>::constant(proto.var(), c, proto.prec(), proto.order());
    }
};

// rho'/rho, the Schwarzian of rho and the internal fields with their first
// derivatives, all at the probe (pointwise or as series in z).
template <class V>
struct Fields {
    V r1, schw;
    V e, de, h, dh, f, df;
    std::vector<V> dheis;
};

// Top-space bookkeeping for L(Lambda) = C v_Lambda + C v_{-Lambda}.
struct TopPair {
    int bra = +1, ket = +1;
    bool diag() const { return bra == ket; }
    int E0() const { return bra > 0 && ket < 0 ? 1 : 0; }
    int F0() const { return bra < 0 && ket > 0 ? 1 : 0; }
    int H0() const { return diag() ? ket : 0; }
};

// alpha L(z) + a E(z) + b H(z) + c F(z) + const, level 1, (H|H) = 2, (E|F) = 1
template <class V>
struct Sl2Combo {
    V L, E, H, F, c;
};

// e^{-a A} Y e^{a A} on every piece of the combination, with da = a'(z).
template <class V>
Sl2Combo<V> conjugate_sl2(const Sl2Combo<V>& x, Gen::Kind A, const V& a, const V& da)
{
    using Op = FieldOps<V>;
    using S = typename Op::S;
    const S two = Ring<S>::from_int(2);
    Sl2Combo<V> n = x;
    switch (A) {
    case Gen::E:
        // E -> E, H -> H + 2aE, F -> F - aH - a^2 E
        n.E = x.E + a * x.H * two - a * a * x.F;
        n.H = x.H - a * x.F;
        n.c = x.c - da * x.F;
        n.E = n.E - da * x.L;
        break;
    case Gen::H: {
        V em = Op::exp(a * (Ring<S>::zero() - two)), ep = Op::exp(a * two);
        n.E = x.E * em;
        n.F = x.F * ep;
        n.c = x.c - da * x.H * two + da * da * x.L;
        n.H = x.H - da * x.L;
        break;
    }
    case Gen::F:
        // F -> F, H -> H - 2aF, E -> E + aH - a^2 F
        n.H = x.H + a * x.E;
        n.F = x.F - a * x.H * two - a * a * x.E;
        n.c = x.c - da * x.E;
        n.F = n.F - da * x.L;
        break;
    }
    return n;
}

// <v'| Y(z) G |v> from the generic conjugation: Theta = e^e e^h e^f, then Q.
// Y is one of the currents ('E', 'H', 'F') or the Virasoro field ('L').
template <class V>
V sl2_matrix_element_derived(const Fields<V>& fl, char Y, TopPair tp)
{
    using Op = FieldOps<V>;
    using S = typename Op::S;
    const V zero = Op::cst(fl.r1, Ring<S>::zero()), one = Op::cst(fl.r1, Ring<S>::one());
    Sl2Combo<V> x{zero, zero, zero, zero, zero};
    switch (Y) {
    case 'E': x.E = one; break;
    case 'H': x.H = one; break;
    case 'F': x.F = one; break;
    case 'L': x.L = one; break;
    default: throw std::invalid_argument("unknown field");
    }
    x = conjugate_sl2(x, Gen::E, fl.e, fl.de);
    x = conjugate_sl2(x, Gen::H, fl.h, fl.dh);
    x = conjugate_sl2(x, Gen::F, fl.f, fl.df);
    V out = fl.r1 * (x.E * Ring<S>::from_int(tp.E0()) + x.H * Ring<S>::from_int(tp.H0()) +
                     x.F * Ring<S>::from_int(tp.F0()));
    if (tp.diag()) {
        // h_Lambda = 1/4, c = 1
        out = out + x.c + x.L * (fl.r1 * fl.r1 * Ring<S>::div_int(Ring<S>::one(), 4) +
                                 fl.schw * Ring<S>::div_int(Ring<S>::one(), 12));
    }
    return out;
}

// The closed forms exactly as printed in the local-martingale theorems for
// sl2 (kept to measure them against the derivation).
template <class V>
V sl2_matrix_element_printed(const Fields<V>& fl, char Y, TopPair tp)
{
    using Op = FieldOps<V>;
    using S = typename Op::S;
    auto k = [](int n) { return Ring<S>::from_int(n); };
    const V one = Op::cst(fl.r1, Ring<S>::one());
    const V zero = Op::cst(fl.r1, Ring<S>::zero());
    const V em = Op::exp(fl.h * k(-2));
    const V &e = fl.e, &f = fl.f, &r = fl.r1;
    const bool pp = tp.bra > 0 && tp.ket > 0, mp = tp.bra < 0 && tp.ket > 0, pm = tp.bra > 0 && tp.ket < 0;
    switch (Y) {
    case 'E':
        if (pp) return em * f * r - fl.df;
        if (mp) return zero - em * f * f * r;
        if (pm) return em * r;
        return zero - em * f * r - fl.df;
    case 'H': {
        V a = one + em * e * f * k(2);
        V cst = fl.dh * k(2) + em * e * fl.df * k(2);
        if (pp) return a * r - cst;
        if (mp) return zero - (f * k(2) + em * e * f * f * k(2)) * r;
        if (pm) return em * e * r * k(2);
        return zero - a * r - cst;
    }
    case 'F': {
        V a = e + em * e * e * f;
        V cst = e * fl.df * k(2) + em * e * e * fl.df - fl.de;
        if (pp) return zero - a * r + cst;
        if (mp) return (e * f * k(2) + em * e * e * f * f) * r;
        if (pm) return zero - em * e * e * r;
        return a * r + cst;
    }
    case 'L': {
        V q = fl.dh + em * f * fl.de;
        V diag = r * r * Ring<S>::div_int(Ring<S>::one(), 4) + fl.dh * fl.dh + em * fl.de * fl.df +
                 fl.schw * Ring<S>::div_int(Ring<S>::one(), 12);
        if (pp) return diag - q * r;
        if (mp) return zero - (fl.df - f * fl.dh * k(2) - em * f * f * fl.de) * r;
        if (pm) return zero - em * fl.de * r;
        return diag + q * r;
    }
    }
    throw std::invalid_argument("unknown field");
}

// <v_Lambda| H_j(z) G |v_Lambda> for the rank-l Heisenberg algebra with an
// orthonormal basis and Lambda = lambda H_1.
template <class V>
V heisenberg_current(const Fields<V>& fl, int j, const typename FieldOps<V>::S& lambda)
{
    V out = -fl.dheis.at(static_cast<std::size_t>(j));
    if (j == 0) out = out + fl.r1 * lambda;
    return out;
}

template <class V>
V heisenberg_virasoro(const Fields<V>& fl, const typename FieldOps<V>::S& lambda)
{
    using S = typename FieldOps<V>::S;
    const S half = Ring<S>::div_int(Ring<S>::one(), 2);
    const S c = Ring<S>::from_int(static_cast<int>(fl.dheis.size()));
    V out = fl.r1 * fl.r1 * (lambda * lambda * half) - fl.dheis.at(0) * fl.r1 * lambda +
            fl.schw * Ring<S>::div_int(c, 12);
    for (const V& d : fl.dheis) out = out + d * d * half;
    return out;
}

template <class V>
V virasoro_bb(const Fields<V>& fl, const typename FieldOps<V>::S& c, const typename FieldOps<V>::S& h)
{
    using S = typename FieldOps<V>::S;
    return fl.r1 * fl.r1 * h + fl.schw * (c * Ring<S>::div_int(Ring<S>::one(), 12));
}

// ---------------------------------------------------------------------------

enum class ObsKind { VirasoroBB, HeisenbergCurrent, HeisenbergVirasoro, Sl2Current, Sl2Virasoro, HeisenbergResidueIdentity };
enum class Variant { derived, printed };

struct ObservableSpec {
    ObsKind kind = ObsKind::VirasoroBB;
    char field = 'E';      // Sl2Current: E, H or F
    int index = 0;         // HeisenbergCurrent generator
    TopPair tops;
    Variant variant = Variant::derived;
    double c = 0, h = 0;   // VirasoroBB
    double lambda = 0;     // Heisenberg weight
    // probe: a point z, or the coefficient of z^{-coeff} when coeff > 0
    Complex z{4.0, 0.0};
    int coeff = 0;

    std::string id() const;

    static ObservableSpec bb(double kappa, Complex z);
    static ObservableSpec sl2_current(char X, int bra, int ket, Complex z, Variant v = Variant::derived);
    static ObservableSpec sl2_virasoro(int bra, int ket, Complex z, Variant v = Variant::derived);
    static ObservableSpec heis_current(int j, double lambda, Complex z);
    static ObservableSpec heis_virasoro(double lambda, Complex z);
};

// "z=4+0i", or "coeff:n" for coefficient probes.
std::string probe_string(const ObservableSpec& o);

// All sixteen sl2 observables at the probe.
std::vector<ObservableSpec> sl2_observables(Complex z, Variant v = Variant::derived);

inline constexpr double kZMin = 3.0;

Fields<Complex> fields_at(const SLEPathState& s, Complex z);
Fields<Series<Complex>> fields_series(const SLEPathState& s);

// Throws for numeric probes with |z| < kZMin.
Complex eval_observable(const SLEPathState& s, const ObservableSpec& o);

struct DriftReport {
    std::string id;
    std::string probe;
    Complex m0;
    std::vector<double> times;
    std::vector<Complex> mean, se;
    std::vector<double> z;      // per time, max over re/im
    double max_z = 0;
    double threshold = 3;
    bool pass = true;
};

// z-scores of mean(M_t) - M_0 over paths from a trajectory table column.
DriftReport drift_report(const TrajectoryTable& tab, std::size_t j, const std::string& id, const std::string& probe,
                         double threshold = 3);

std::vector<DriftReport> drift_test(const PathConfig& cfg, const std::vector<ObservableSpec>& obs, std::size_t n_paths,
                                    const std::vector<double>& times, double threshold = 3);

// Components of G_t v_Lambda in the lattice module up to degree D, evolved
// with the exact increment operator.
std::vector<DriftReport> vector_martingale_check(const PathConfig& cfg, int D, std::size_t n_paths,
                                                 const std::vector<double>& times, double threshold = 3);

// The two sides of the Heisenberg residue identity at a probe.
struct ResidueProbe {
    Complex lhs, rhs;
};

// l/2 times the double-residue bracket as a z-series. Using
// 1/(rho(w) - rho(z)) = K(w, z)/(w - z) in both regions, the bracket is
// F (w-z)^-3 expanded for |w|>|z| minus the same for |z|>|w| with
// F = rho'(w) rho'(z) K^2; the first expansion has no w^-1 term.
template <class S>
Series<S> residue_identity_lhs(const Series<S>& rho, int rank, int depth)
{
    const int D = depth;
    KernelGrid<S> K = kernel_factor(rho, D);
    Series<S> drho = derivative(rho);
    // F = rho'(w) rho'(z) K(w,z)^2 on total degree <= D
    auto idx = [D](int i, int j) { return static_cast<std::size_t>((-i) * (D + 1) + (-j)); };
    std::vector<S> K2((D + 1) * (D + 1), Ring<S>::zero()), F(K2.size(), Ring<S>::zero());
    for (int i1 = 0; i1 >= -D; --i1)
        for (int j1 = 0; -i1 - j1 <= D; --j1) {
            S a = K.at(i1, j1);
            if (Ring<S>::is_zero(a)) continue;
            for (int i2 = 0; i2 >= -D; --i2)
                for (int j2 = 0; -i2 - j2 <= D + i1 + j1; --j2) K2[idx(i1 + i2, j1 + j2)] += a * K.at(i2, j2);
        }
    for (int i1 = 0; i1 >= -D; --i1)
        for (int j1 = 0; -i1 - j1 <= D; --j1) {
            S a = K2[idx(i1, j1)];
            if (Ring<S>::is_zero(a)) continue;
            for (int p = 0; -(i1 + p) - j1 <= D; --p) {
                S dp = drho.coeff(p);
                if (Ring<S>::is_zero(dp)) continue;
                for (int q = 0; -(i1 + p) - (j1 + q) <= D; --q) {
                    S dq = drho.coeff(q);
                    if (!Ring<S>::is_zero(dq)) F[idx(i1 + p, j1 + q)] += a * dp * dq;
                }
            }
        }
    // Res_w of -F (w-z)^-3 for |z|>|w| = sum_m C(m+2, 2) z^{-m-3} [w^{-m-1}] F
    Series<S> out(Var::z, -(D + 2));
    const S half_rank = Ring<S>::div_int(Ring<S>::from_int(rank), 2);
    for (int n = 3; n <= D + 2; ++n) {
        S acc = Ring<S>::zero();
        for (int m = 0; m <= n - 3; ++m)
            acc += Ring<S>::from_int((m + 2) * (m + 1) / 2) * F[idx(-m - 1, m + 3 - n)];
        if (!Ring<S>::is_zero(acc)) out.set(-n, acc * half_rank);
    }
    return out;
}

ResidueProbe residue_identity_probe(const SLEPathState& s, Complex z, int depth = 24);

} // namespace sle
