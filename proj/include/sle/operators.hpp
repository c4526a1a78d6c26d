#pragma once

#include "sle/algebra.hpp"

#include <array>
#include <functional>

namespace sle {

// Linear map on graded vectors.
template <class S>
using LinOp = std::function<GradedVector<S>(const GradedVector<S>&)>;

// exp(N) v for a degree-raising N, truncated at the module cutoff (each
// term of the exponential raises the degree, so the sum terminates).
template <class S>
GradedVector<S> exp_raising(const Module<S>& mod, const LinOp<S>& N, const GradedVector<S>& v, int cutoff)
{
    GradedVector<S> total = mod.project(v, cutoff), term = total;
    for (int k = 1; !term.is_zero(); ++k) {
        term = mod.project(N(term), cutoff) * Ring<S>::div_int(Ring<S>::one(), k);
        total += term;
        if (k > 4 * cutoff + 8) throw std::logic_error("exp_raising: operator is not degree raising");
    }
    return total;
}

// exp(N) v for a degree-lowering N; terminates because degrees are bounded below.
template <class S>
GradedVector<S> exp_lowering(const LinOp<S>& N, const GradedVector<S>& v)
{
    GradedVector<S> total = v, term = v;
    for (int k = 1; !term.is_zero(); ++k) {
        term = N(term) * Ring<S>::div_int(Ring<S>::one(), k);
        total += term;
        if (k > 512) throw std::logic_error("exp_lowering: operator is not nilpotent");
    }
    return total;
}

// v0^{-L0} on L0-homogeneous pieces. Exact mode needs an integer exponent.
template <class S>
GradedVector<S> scale_by_weight(const Module<S>& mod, const S& v0, const GradedVector<S>& v)
{
    if (v0 == Ring<S>::one()) return v;
    GradedVector<S> r;
    for (const auto& [m, c] : v.terms) {
        S weight = mod.top_weight() + Ring<S>::from_int(mod.degree(m));
        S f;
        if constexpr (is_exact_v<S>) {
            const GaussQ& w = weight;
            if (w.im() != 0 || denominator(w.re()) != 1)
                throw DomainError("v0^{-L0} needs integer conformal weights in exact mode");
            long long e = static_cast<long long>(numerator(w.re()));
            S base = e >= 0 ? Ring<S>::inverse(v0) : v0;
            f = Ring<S>::one();
            for (long long i = 0; i < std::llabs(e); ++i) f *= base;
        } else {
            f = std::pow(v0, -weight);
        }
        r.add(m, c * f);
    }
    return r;
}

// R(rho) = exp(-sum_{i>0} v_i L_i) v0^{-L0}, rho given at w = 0 (ascending).
template <class S>
GradedVector<S> R_operator(const Module<S>& mod, const Series<S>& rho, const GradedVector<S>& v)
{
    if (rho.descending()) throw std::invalid_argument("R_operator: rho must be a w-series at 0");
    VCoeffs<S> vc = v_extract(rho);
    GradedVector<S> u = scale_by_weight(mod, vc.v0, v);
    int d = std::max(0, mod.max_degree(v));
    LinOp<S> N = [&](const GradedVector<S>& x) {
        GradedVector<S> r;
        for (const auto& [i, vi] : vc.v)
            if (i <= d && !Ring<S>::is_zero(vi)) r.add(mod.L(i, x), Ring<S>::zero() - vi);
        return r;
    };
    return exp_lowering(N, u);
}

// Q(rho) = exp(-sum_{j<0} v_j L_j) v0^{-L0}, rho = z + b0 + ... at infinity,
// truncated at the module cutoff.
template <class S>
GradedVector<S> Q_operator(const Module<S>& mod, const Series<S>& rho, const GradedVector<S>& v)
{
    if (!rho.descending()) throw std::invalid_argument("Q_operator: rho must be a z-series at infinity");
    VCoeffs<S> vc = v_extract(rho);
    if (vc.v0 != Ring<S>::one()) throw DomainError("Q_operator: rho must lie in Aut+ (v0 = 1)");
    int D = mod.cutoff();
    for (int j = -1; j >= -D; --j)
        if (!vc.v.count(j)) throw TruncationInsufficient("Q_operator: rho window shallower than the cutoff");
    LinOp<S> N = [&](const GradedVector<S>& x) {
        GradedVector<S> r;
        for (const auto& [j, vj] : vc.v)
            if (j >= -D && !Ring<S>::is_zero(vj)) r.add(mod.L(j, x), Ring<S>::zero() - vj);
        return r;
    };
    return exp_raising(mod, N, v, D);
}

// <c,h| L(z) Q(rho) |c,h> as a z-series, exact for exponents >= -2 - cutoff.
template <class S>
Series<S> virasoro_field_matrix_element(const Module<S>& mod, const Series<S>& rho)
{
    int D = mod.cutoff();
    GradedVector<S> q = Q_operator(mod, rho, mod.top());
    Series<S> out(Var::z, -2 - D);
    for (int n = 0; n <= D; ++n) {
        GradedVector<S> piece;
        for (const auto& [m, c] : q.terms)
            if (mod.degree(m) == n) piece.add(m, c);
        out.add_to(-n - 2, mod.top_coeff(mod.L(n, piece)));
    }
    return out;
}

struct SingularResidual {
    GradedVector<GaussQ> l1, l2;
    bool zero() const { return l1.is_zero() && l2.is_zero(); }
};

// chi = (-2 L_{-2} + kappa/2 L_{-1}^2)|c,h>; returns (L1 chi, L2 chi).
inline SingularResidual singular_check(const GaussQ& c, const GaussQ& h, const GaussQ& kappa)
{
    Module<GaussQ> mod = Module<GaussQ>::verma(c, h, 4);
    auto top = mod.top();
    auto chi = mod.L(-2, top) * gq(-2) + mod.L(-1, mod.L(-1, top)) * (kappa / gq(2));
    return {mod.L(1, chi), mod.L(2, chi)};
}

// c(kappa), h(kappa) making chi singular
inline std::pair<GaussQ, GaussQ> sle_central_charge_weight(const GaussQ& kappa)
{
    GaussQ d = kappa - gq(4);
    return {gq(1) - gq(3) * d * d / (gq(2) * kappa), (gq(6) - kappa) / (gq(2) * kappa)};
}

// sum_r X_r(-1)^2 for the module's Lie algebra, weighted per direction for
// the Heisenberg case.
template <class S>
GradedVector<S> casimir_minus_one(const Module<S>& mod, const GradedVector<S>& v, const std::vector<S>& tau)
{
    GradedVector<S> r;
    if (mod.kind() == ModuleKind::HeisenbergFock) {
        if (static_cast<int>(tau.size()) != mod.rank()) throw std::invalid_argument("casimir: one tau per direction");
        for (int i = 0; i < mod.rank(); ++i) r.add(mod.X(Gen::h(i), -1, mod.X(Gen::h(i), -1, v)), tau[i]);
        return r;
    }
    if (tau.size() != 1) throw std::invalid_argument("casimir: sl2 takes a single tau");
    r.add(mod.X(Gen::h(), -1, mod.X(Gen::h(), -1, v)), Ring<S>::div_int(Ring<S>::one(), 2));
    r.add(mod.X(Gen::e(), -1, mod.X(Gen::f(), -1, v)), Ring<S>::one());
    r.add(mod.X(Gen::f(), -1, mod.X(Gen::e(), -1, v)), Ring<S>::one());
    return r * tau[0];
}

// (-2 L_{-2} + kappa/2 L_{-1}^2 + 1/2 sum_r tau_r X_r(-1)^2) v
template <class S>
GradedVector<S> annihilator_apply(const Module<S>& mod, const S& kappa, const std::vector<S>& tau, const GradedVector<S>& v)
{
    GradedVector<S> r = mod.L(-2, v) * Ring<S>::from_int(-2);
    r.add(mod.L(-1, mod.L(-1, v)), Ring<S>::div_int(kappa, 2));
    r.add(casimir_minus_one(mod, v, tau), Ring<S>::div_int(Ring<S>::one(), 2));
    return r;
}

// --- conjugation by e^{A (x) a(zeta)} ----------------------------------------

// X (x) x(zeta) = sum_n x_n X(n); modes that push every term past the cutoff
// are skipped.
template <class S>
GradedVector<S> loop_apply(const Module<S>& mod, Gen X, const Series<S>& x, const GradedVector<S>& v, int cap)
{
    if (x.descending() && x.prec() > -cap) throw TruncationInsufficient("loop_apply: series window shallower than the cutoff");
    GradedVector<S> r;
    for (int n = x.lo(); n <= x.hi(); ++n) {
        S c = x.coeff(n);
        if (Ring<S>::is_zero(c) || n < -cap) continue;
        r.add(mod.X(X, n, v), c);
    }
    return r;
}

template <class S>
GradedVector<S> exp_loop(const Module<S>& mod, Gen A, const Series<S>& a, const GradedVector<S>& v, int cap)
{
    LinOp<S> N = [&](const GradedVector<S>& u) { return loop_apply(mod, A, a, u, cap); };
    return exp_raising(mod, N, v, cap);
}

// sum of (coefficient series) x (generator) plus a scalar
template <class S>
struct LoopElement {
    std::vector<std::pair<Gen, Series<S>>> parts;
    S scalar = Ring<S>::zero();
};

template <class S>
GradedVector<S> loop_element_apply(const Module<S>& mod, const LoopElement<S>& el, const GradedVector<S>& v, int cap)
{
    GradedVector<S> r = v * el.scalar;
    for (const auto& [g, x] : el.parts) r += loop_apply(mod, g, x, v, cap);
    return r;
}

// sum_m (-1)^m/m! (ad A)^m X (x) a^m x - k (A|X) Res(da x), for sl2 or the
// Heisenberg algebra, with series truncated at exponent -window.
template <class S>
LoopElement<S> twist_general(ModuleKind kind, Gen A, const Series<S>& a, Gen X, const Series<S>& x, int window)
{
    LoopElement<S> out;
    std::vector<std::pair<S, Gen>> cur{{Ring<S>::one(), X}};
    Series<S> am = Series<S>::constant(Var::zeta, Ring<S>::one(), -window);
    S fact = Ring<S>::one();
    for (int m = 0; !cur.empty() && !am.is_zero(); ++m) {
        Series<S> coef = with_window(am * with_window(x, -window), -window);
        S sign = (m % 2 == 0) ? Ring<S>::one() : Ring<S>::from_int(-1);
        for (const auto& [c, g] : cur) out.parts.push_back({g, coef * (c * sign / fact)});
        std::vector<std::pair<S, Gen>> next;
        for (const auto& [c, g] : cur)
            for (auto [k, z] : lie_bracket(A, g, kind)) next.push_back({c * Ring<S>::from_int(k), z});
        cur = next;
        am = with_window(am * a, -window);
        fact *= Ring<S>::from_int(m + 1);
    }
    long long kap = killing(A, X, kind);
    if (kap != 0) out.scalar = Ring<S>::zero() - Ring<S>::from_int(kap) * residue(derivative(a) * with_window(x, -window));
    return out;
}

// The nine sl2 cases, written out as printed.
template <class S>
LoopElement<S> twist_sl2_case(Gen A, const Series<S>& a, Gen X, const Series<S>& x, int window)
{
    const int k = 1;
    Series<S> xw = with_window(x, -window), aw = with_window(a, -window);
    auto neg = [](const S& s) { return Ring<S>::zero() - s; };
    LoopElement<S> out;
    auto res = [&] { return residue(derivative(a) * xw); };
    using G = Gen;
    if (X.kind == G::H && A.kind == G::H) {
        out.parts = {{G::h(), xw}};
        out.scalar = neg(Ring<S>::from_int(2 * k) * res());
    } else if (X.kind == G::H && A.kind == G::E) {
        out.parts = {{G::h(), xw}, {G::e(), with_window(aw * xw, -window) * Ring<S>::from_int(2)}};
    } else if (X.kind == G::H && A.kind == G::F) {
        out.parts = {{G::h(), xw}, {G::f(), with_window(aw * xw, -window) * Ring<S>::from_int(-2)}};
    } else if (X.kind == G::E && A.kind == G::H) {
        out.parts = {{G::e(), with_window(exp_series(aw * Ring<S>::from_int(-2)) * xw, -window)}};
    } else if (X.kind == G::E && A.kind == G::E) {
        out.parts = {{G::e(), xw}};
    } else if (X.kind == G::E && A.kind == G::F) {
        out.parts = {{G::e(), xw}, {G::h(), with_window(aw * xw, -window)}, {G::f(), -with_window(aw * aw * xw, -window)}};
        out.scalar = neg(Ring<S>::from_int(k) * res());
    } else if (X.kind == G::F && A.kind == G::H) {
        out.parts = {{G::f(), with_window(exp_series(aw * Ring<S>::from_int(2)) * xw, -window)}};
    } else if (X.kind == G::F && A.kind == G::E) {
        out.parts = {{G::f(), xw}, {G::h(), -with_window(aw * xw, -window)}, {G::e(), -with_window(aw * aw * xw, -window)}};
        out.scalar = neg(Ring<S>::from_int(k) * res());
    } else {
        out.parts = {{G::f(), xw}};
    }
    return out;
}

// e^{-a} (X (x) x) e^{a} v, projected to degree <= D.
template <class S>
GradedVector<S> conjugated_apply(const Module<S>& mod, Gen A, const Series<S>& a, Gen X, const Series<S>& x,
                                 const GradedVector<S>& v, int D)
{
    int pmax = std::max(0, x.hi());
    GradedVector<S> u = exp_loop(mod, A, a, v, D + pmax);
    GradedVector<S> w = mod.project(loop_apply(mod, X, x, u, D), D);
    return exp_loop(mod, A, -a, w, D);
}

// Largest |coefficient| difference between the two sides over all basis
// vectors of degree <= D (zero means the identity holds exactly).
template <class S>
GradedVector<S> conjugation_residual(const Module<S>& mod, Gen A, const Series<S>& a, Gen X, const Series<S>& x,
                                     const LoopElement<S>& rhs, const GradedVector<S>& v, int D)
{
    GradedVector<S> lhs = conjugated_apply(mod, A, a, X, x, v, D);
    return lhs - mod.project(loop_element_apply(mod, rhs, v, D), D);
}

// e^{-a} L_n e^{a} v versus L_n - sum_j j a_j A(n+j) + k(A|A)/2 sum_{j+j'=-n} j j' a_j a_j'.
template <class S>
GradedVector<S> virasoro_internal_residual(const Module<S>& mod, Gen A, const Series<S>& a, int n,
                                           const GradedVector<S>& v, int D)
{
    int pmax = std::max(0, n);
    GradedVector<S> u = exp_loop(mod, A, a, v, D + pmax);
    GradedVector<S> lhs = exp_loop(mod, A, -a, mod.project(mod.L(n, u), D), D);
    GradedVector<S> rhs = mod.L(n, v);
    S quad = Ring<S>::zero();
    for (int j = a.lo(); j <= a.hi(); ++j) {
        S aj = a.coeff(j);
        if (Ring<S>::is_zero(aj)) continue;
        rhs.add(mod.X(A, n + j, v), Ring<S>::zero() - Ring<S>::from_int(j) * aj);
        int jp = -n - j;
        if (jp >= a.lo() && jp <= a.hi()) quad += Ring<S>::from_int((long long)j * jp) * aj * a.coeff(jp);
    }
    rhs.add(v, Ring<S>::div_int(Ring<S>::from_int(mod.level() * killing(A, A, mod.kind())) * quad, 2));
    return lhs - mod.project(rhs, D);
}

} // namespace sle
