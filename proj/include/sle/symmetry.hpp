#pragma once

#include "sle/martingales.hpp"
#include "sle/poly.hpp"
#include "sle/series.hpp"

#include <array>
#include <string>
#include <vector>

namespace sle {

// Variables of the martingale space: x, g_0..g_{-K}, and e_n, h_n, f_n for
// -K <= n <= -1. Weights: x -> 1, g_n -> 1 - n, e_n, h_n, f_n -> -n; every
// M_u is homogeneous of weight deg(u), and X_l lowers weight by l.
class SymVars {
public:
    explicit SymVars(int K = 8) : K_(K) {}
    int K() const { return K_; }
    int count() const { return 2 + 4 * K_; }
    int x() const { return 0; }
    int g(int n) const { return check(n, 0), 1 - n; }
    int e(int n) const { return check(n, -1), 2 + K_ + (-n - 1); }
    int h(int n) const { return check(n, -1), 2 + 2 * K_ + (-n - 1); }
    int f(int n) const { return check(n, -1), 2 + 3 * K_ + (-n - 1); }
    int weight(int v) const;
    std::string name(int v) const;
    // 'x', 'g', 'e', 'h', 'f' and the mode index
    std::pair<char, int> decode(int v) const;

private:
    void check(int n, int top) const
    {
        if (n > top || n < -K_) throw TruncationInsufficient("variable index outside the window");
    }
    int K_;
};

// An element of L(Lambda)^* (x) polynomials: components on v_Lambda, v_{-Lambda}.
struct PolyState {
    std::array<Poly, 2> c;

    bool is_zero() const { return c[0].is_zero() && c[1].is_zero(); }
    friend PolyState operator+(PolyState a, const PolyState& b)
    {
        a.c[0] += b.c[0];
        a.c[1] += b.c[1];
        return a;
    }
    friend PolyState operator-(PolyState a, const PolyState& b)
    {
        a.c[0] -= b.c[0];
        a.c[1] -= b.c[1];
        return a;
    }
    friend PolyState operator*(const Poly& s, const PolyState& a) { return {{s * a.c[0], s * a.c[1]}}; }
    friend bool operator==(const PolyState& a, const PolyState& b) { return a.c == b.c; }
    int max_weight(const SymVars& v) const;
};

// (pi(X) phi)(v) = -phi(X v) on the two-dimensional L(Lambda)^*
PolyState pi_action(char X, const PolyState& p);

enum class SymVariant { derived, printed };

// A first-order differential operator on the martingale space.
struct SymOp {
    char id = 'E';
    int ell = 0;
    SymVariant variant = SymVariant::derived;
    int wmax = 0;                           // inputs up to this weight
    int K = 8;                              // variable window
    std::vector<std::pair<int, Poly>> der;  // coefficient of d/d(var)
    std::array<Poly, 3> pi;                 // E, H, F
    Poly dx;
    Poly scalar;
};

// Throws TruncationInsufficient when wmax - ell does not fit the window.
SymOp build_operator(const SymVars& vars, char id, int ell, int wmax, SymVariant v = SymVariant::derived);

// Throws TruncationInsufficient on inputs heavier than op.wmax.
PolyState apply_symmetry_op(const SymOp& op, const PolyState& p);

// M_u for every monomial basis vector u of degree <= D of the lattice module,
// computed as u^*(e^E(e) e^H(h) e^F(f) Q(g) e^{x L_-1} v). Also the
// action of a mode: minus u^*(X(-l) ...) for currents, u^*(L_{-l} ...) for L.
struct MartingaleTable {
    int D = 0;
    std::vector<Mono> basis;
    std::vector<int> degree;
    std::vector<PolyState> M;
    // image of the mode under u -> M_{X(l) u}, in the same basis order
    std::vector<PolyState> mode(char id, int ell) const;

    struct Impl;
    std::shared_ptr<const Impl> impl;
};

MartingaleTable martingale_table(const SymVars& vars, int D);

struct CommutatorReport {
    char a, b;
    int l, m;
    int states = 0;
    int checked_coeffs = 0;
    int nonzero = 0;        // residual coefficients on the safe window
    double max_residual = 0;
    bool pass() const { return nonzero == 0; }
    std::string key() const;
};

// ([A_l, B_m] - expected) P over the sample states; expected brackets are those
// of the affine sl2 and Virasoro modes at k = 1, c = 1.
CommutatorReport commutator_check(const SymVars& vars, char a, int l, char b, int m, const std::vector<PolyState>& states,
                                  int dmax, SymVariant v = SymVariant::derived);

// Smallest window K for which all brackets with |l|, |m| <= lm act exactly on
// states of weight <= dmax.
int safe_window(int dmax, int lm);

struct GenFunReport {
    char X;
    TopPair tops;
    int depth = 0;
    std::vector<Complex> from_ops, closed_form;
    double max_residual = 0;
};

// -sum_n z^{-n-1} (X_{-n} M_{v'})(v) at the state against the closed form of
// <v'|X(z) G|v>, n = 0..depth-1.
GenFunReport generating_function_check(const SymVars& vars, char X, TopPair tops, const SLEPathState& s, int depth,
                                       SymVariant v = SymVariant::derived);

// Values of the variables at a simulated state; x = B_t.
std::vector<Complex> state_values(const SymVars& vars, const SLEPathState& s);

PolyState constant_state(int sign);

} // namespace sle
