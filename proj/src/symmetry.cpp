#include "sle/symmetry.hpp"

#include "sle/operators.hpp"

#include <cmath>
#include <map>
#include <sstream>
#include <tuple>

namespace sle {

using PS = Series<Poly>;

int SymVars::weight(int v) const
{
    auto [k, n] = decode(v);
    if (k == 'x') return 1;
    if (k == 'g') return 1 - n;
    return -n;
}

std::pair<char, int> SymVars::decode(int v) const
{
    if (v == 0) return {'x', 0};
    if (v <= K_ + 1) return {'g', 1 - v};
    int r = v - 2 - K_;
    const char names[] = {'e', 'h', 'f'};
    if (r < 0 || r >= 3 * K_) throw std::out_of_range("SymVars: unknown variable");
    return {names[r / K_], -(r % K_) - 1};
}

std::string SymVars::name(int v) const
{
    auto [k, n] = decode(v);
    if (k == 'x') return "x";
    return std::string(1, k) + "_" + std::to_string(n);
}

int PolyState::max_weight(const SymVars& v) const
{
    auto w = [&](int i) { return v.weight(i); };
    return std::max(c[0].max_weight(w), c[1].max_weight(w));
}

PolyState pi_action(char X, const PolyState& p)
{
    switch (X) {
    case 'E': return {{Poly(), -p.c[0]}};
    case 'H': return {{-p.c[0], p.c[1]}};
    case 'F': return {{-p.c[1], Poly()}};
    }
    throw std::invalid_argument("pi_action: unknown generator");
}

PolyState constant_state(int sign)
{
    PolyState p;
    p.c[sign > 0 ? 0 : 1] = Poly(1);
    return p;
}

namespace {

// Symbolic series of the generic group element, exact down to z^-K.
struct Ctx {
    const SymVars& V;
    int K;
    PS g, gp, e, h, f, de, dh, df, ep2h, em2h, schw, ginv;
    KernelGrid<Poly> ker;

    explicit Ctx(const SymVars& vars) : V(vars), K(vars.K())
    {
        std::map<int, Poly> tg{{1, Poly(1)}};
        for (int n = 0; n >= -K; --n) tg[n] = Poly::var(V.g(n));
        g = with_window(PS::polynomial(Var::z, tg), -K);
        auto field = [&](auto idx) {
            std::map<int, Poly> t;
            for (int n = -1; n >= -K; --n) t[n] = Poly::var(idx(n));
            return with_window(PS::polynomial(Var::z, t), -K);
        };
        e = field([&](int n) { return V.e(n); });
        h = field([&](int n) { return V.h(n); });
        f = field([&](int n) { return V.f(n); });
        gp = derivative(g);
        de = derivative(e);
        dh = derivative(h);
        df = derivative(f);
        ep2h = exp_series(h * Poly(2));
        em2h = exp_series(h * Poly(-2));
        schw = schwarzian(g);
        ginv = mul_inverse(g);
        ker = kernel_factor(g, K - 1);
    }

    PS zpow(int n) const { return PS::monomial(Var::z, Poly(1), n, -kExact); }

    // Res_z Res_w w^{-n-1} a(w) b(z) / (g(w) - g(z)), |w| > |z|
    Poly dres(const PS& a, const PS& b, int n) const
    {
        Poly acc;
        for (int p = 0; p >= n + 1; --p) {
            if (!a.known(p)) throw TruncationInsufficient("dres: w-series window too small");
            Poly ap = a.coeff(p);
            if (ap.is_zero()) continue;
            const int i = n - p;
            for (int q = n - p; q <= b.hi(); ++q) {
                if (!b.known(q)) throw TruncationInsufficient("dres: z-series window too small");
                Poly bq = b.coeff(q);
                if (bq.is_zero()) continue;
                const int j = -1 - q;
                // 1/(g(w)-g(z)) = K(w,z) sum_{m>=0} z^m w^{-m-1}
                Poly kij;
                for (int m = std::max(0, j); i + m + 1 <= 0; ++m) kij += ker.at(i + m + 1, j - m);
                if (!kij.is_zero()) acc += ap * bq * kij;
            }
        }
        return acc;
    }

    // Res_z c(z) / (g(z) - x)^k for k = 1, 2, |g(z)| > |x|
    Poly sres(const PS& c, int k) const
    {
        Poly acc;
        if (c.empty()) return acc;
        const Poly x = Poly::var(V.x());
        Poly xm(1);
        PS gpow = k == 1 ? ginv : ginv * ginv;
        for (int m = 0; c.hi() - m - k >= -1; ++m) {
            PS prod = c * gpow;
            if (!prod.known(-1)) throw TruncationInsufficient("sres: window too small");
            Poly r = prod.coeff(-1);
            long long bin = k == 1 ? 1 : m + 1;
            if (!r.is_zero()) acc += xm * r * Poly(GaussQ(bin));
            xm = xm * x;
            gpow = gpow * ginv;
        }
        return acc;
    }

    Poly res(const PS& c) const
    {
        if (!c.known(-1)) throw TruncationInsufficient("res: window too small");
        return c.coeff(-1);
    }
};

// numerators sum_i a_i(w) b_i(z) of a double residue
struct Dterm {
    PS a, b;
};

struct Builder {
    const Ctx& C;
    SymOp& op;
    std::map<int, Poly> der;

    void add_der(char kind, const std::vector<Dterm>& terms, const Poly& sign)
    {
        const int top = kind == 'g' ? 0 : -1;
        for (int n = top; n >= -C.K; --n) {
            const int w = kind == 'g' ? 1 - n : -n;
            if (w > op.wmax) break;
            Poly acc;
            for (const auto& t : terms) acc += C.dres(t.a, t.b, n);
            if (acc.is_zero()) continue;
            int var = kind == 'g' ? C.V.g(n) : kind == 'e' ? C.V.e(n) : kind == 'h' ? C.V.h(n) : C.V.f(n);
            der[var] += sign * acc;
        }
    }

    void finish()
    {
        for (auto& [v, c] : der)
            if (!c.is_zero()) op.der.emplace_back(v, c);
    }
};

PS one_w(const Ctx& C) { return PS::constant(Var::z, Poly(1), -C.K); }

// G E(theta) Y = (D_E[theta]) G Y + Res theta/(z-x) G Y(E v), with theta
// already pulled back to z and multiplied by g'(z)
void add_divide(Builder& B, char Y, const PS& bz, const Poly& sign)
{
    const Ctx& C = B.C;
    const PS one = one_w(C);
    switch (Y) {
    case 'E':
        B.add_der('e', {{C.ep2h, bz}}, sign);
        B.add_der('h', {{C.f, bz}}, -sign);
        B.add_der('f', {{C.f * C.f, bz}}, -sign);
        break;
    case 'H':
        B.add_der('h', {{one, bz}}, sign);
        B.add_der('f', {{C.f, bz}}, sign * Poly(2));
        break;
    case 'F': B.add_der('f', {{one, bz}}, sign); break;
    }
    // <u|G Y(Yv,x)|0> = -(pi(Y) M_u)(v)
    B.op.pi[Y == 'E' ? 0 : Y == 'H' ? 1 : 2] -= sign * C.sres(bz, 1);
}

void build_derived(const Ctx& C, SymOp& op)
{
    const int ell = op.ell;
    Fields<PS> fl;
    fl.e = C.e;
    fl.de = C.de;
    fl.h = C.h;
    fl.dh = C.dh;
    fl.f = C.f;
    fl.df = C.df;
    PS zero = PS::zero(Var::z, -C.K);
    Sl2Combo<PS> x{zero, zero, zero, zero, zero};
    // <X(l)u| = -<u|X(-l), <L_l u| = <u|L_{-l}
    Poly sign(op.id == 'L' ? 1 : -1);
    switch (op.id) {
    case 'E': x.E = C.zpow(-ell); break;
    case 'H': x.H = C.zpow(-ell); break;
    case 'F': x.F = C.zpow(-ell); break;
    case 'L': x.L = C.zpow(-ell + 1); break;
    }
    x = conjugate_sl2(x, Gen::E, fl.e, fl.de);
    x = conjugate_sl2(x, Gen::H, fl.h, fl.dh);
    x = conjugate_sl2(x, Gen::F, fl.f, fl.df);

    Builder B{C, op, {}};
    add_divide(B, 'E', x.E * C.gp, sign);
    add_divide(B, 'H', x.H * C.gp, sign);
    add_divide(B, 'F', x.F * C.gp, sign);
    op.scalar += sign * C.res(x.c);
    if (op.id == 'L') {
        // theta_L(z) (g'^2 L(g(z)) + c/12 Sg): L_m with m <= -2 by derivations in g,
        // m >= -1 through the primary field at x
        PS t = x.L * C.gp * C.gp;
        B.add_der('g', {{one_w(C), t}}, -sign);
        op.dx += sign * C.sres(t, 1);
        op.scalar += sign * (C.sres(t, 2) * Poly(GaussQ(rat(1, 4))) + C.res(x.L * C.schw) * Poly(GaussQ(rat(1, 12))));
    }
    B.finish();
}

void build_printed(const Ctx& C, SymOp& op)
{
    const int ell = op.ell;
    const PS one = one_w(C);
    const PS zl = C.zpow(-ell), gz = zl * C.gp;
    const PS &e = C.e, &f = C.f, &em = C.em2h;
    Builder B{C, op, {}};
    auto P = [](int n) { return Poly(n); };
    // (f(z) - f(w))^k as pairs a(w) b(z)
    auto fdiff = [&](const PS& bz) { return std::vector<Dterm>{{one, f * bz}, {-f, bz}}; };
    auto fdiff2 = [&](const PS& bz) {
        return std::vector<Dterm>{{one, f * f * bz}, {f * P(-2), f * bz}, {f * f, bz}};
    };
    auto cat = [](std::vector<Dterm> a, const std::vector<Dterm>& b) {
        a.insert(a.end(), b.begin(), b.end());
        return a;
    };
    switch (op.id) {
    case 'E':
        B.add_der('e', {{C.ep2h, em * gz}}, P(-1));
        B.add_der('h', fdiff(em * gz), P(-1));
        B.add_der('f', fdiff2(em * gz), P(1));
        op.pi[0] += C.sres(em * gz, 1);
        op.pi[1] += C.sres(em * f * gz, 1);
        op.pi[2] -= C.sres(em * f * f * gz, 1);
        op.scalar += C.res(C.df * em * zl);
        break;
    case 'H':
        B.add_der('e', {{C.ep2h, em * e * gz}}, P(-2));
        // 1 + 2 e^{-2h(z)} (f(z) - f(w)), as printed (no e(z))
        B.add_der('h', cat({{one, gz}}, fdiff(em * gz * P(2))), P(-1));
        // f(w) - f(z) - e^{-2h(z)} e(z) (f(w) - f(z))^2
        B.add_der('f', cat({{f, gz}, {-one, f * gz}}, fdiff2(em * e * gz * P(-1))), P(-2));
        op.pi[0] += C.sres(em * e * gz, 1) * P(2);
        op.pi[1] += C.sres((one + em * e * f * P(2)) * gz, 1);
        op.pi[2] -= C.sres((one + em * e * f) * f * gz, 1) * P(2);
        op.scalar += C.res((C.dh - C.df * em * e) * zl) * P(2);
        break;
    case 'F':
        B.add_der('e', {{C.ep2h, em * e * e * gz}}, P(1));
        // (1 + e^{-2h(z)} e(z) (f(w) - f(z))) e(z)
        B.add_der('h', {{one, e * gz}, {f, em * e * e * gz}, {-one, em * e * e * f * gz}}, P(-1));
        B.add_der('f', cat(cat({{one, C.ep2h * gz}}, fdiff(e * gz * P(2))), fdiff2(em * e * e * gz)), P(-1));
        op.pi[0] -= C.sres(em * e * e * gz, 1);
        op.pi[1] -= C.sres((one + em * e * f) * e * gz, 1);
        op.pi[2] += C.sres((C.ep2h + e * f * P(2) + em * e * e * f * f) * gz, 1);
        op.scalar -= C.res((C.dh * e * P(2) - C.de + C.df * em * e * e) * zl);
        break;
    case 'L': {
        const PS zl1 = C.zpow(-ell + 1), t = zl1 * C.gp;
        B.add_der('g', {{one, zl1 * C.gp * C.gp}}, P(-1));
        B.add_der('e', {{C.ep2h, em * C.de * t}}, P(-1));
        B.add_der('h', cat({{one, C.dh * t}}, fdiff(em * C.de * t)), P(-1));
        B.add_der('f', cat(cat({{one, C.df * t}}, fdiff(C.dh * t * P(-2))), fdiff2(em * C.de * t * P(-1))), P(-1));
        PS t2 = zl1 * C.gp * C.gp;
        op.dx += C.sres(t2, 1);
        op.scalar += C.sres(t2, 2) * Poly(GaussQ(rat(1, 4)));
        op.pi[0] += C.sres(em * C.de * t, 1);
        op.pi[1] += C.sres((C.dh + em * f * C.de) * t, 1);
        op.pi[2] += C.sres((C.df - f * C.dh * P(2) - em * f * f * C.de) * t, 1);
        op.scalar += C.res(zl1 * (C.schw * Poly(GaussQ(rat(1, 12))) + C.dh * C.dh + em * C.df * C.de));
        break;
    }
    default: throw std::invalid_argument("unknown symmetry operator");
    }
    B.finish();
}

} // namespace

SymOp build_operator(const SymVars& vars, char id, int ell, int wmax, SymVariant v)
{
    if (wmax - ell > vars.K() - 1 || -ell > vars.K() - 1) {
        std::ostringstream os;
        os << "operator " << id << "_" << ell << " on weight <= " << wmax << " needs a window K >= " << wmax - ell + 1;
        throw TruncationInsufficient(os.str());
    }
    Ctx C(vars);
    SymOp op;
    op.id = id;
    op.ell = ell;
    op.variant = v;
    op.wmax = wmax;
    op.K = vars.K();
    if (v == SymVariant::derived)
        build_derived(C, op);
    else
        build_printed(C, op);
    return op;
}

PolyState apply_symmetry_op(const SymOp& op, const PolyState& p)
{
    if (p.max_weight(SymVars(op.K)) > op.wmax) {
        std::ostringstream os;
        os << "state of weight " << p.max_weight(SymVars(op.K)) << " exceeds operator window " << op.wmax;
        throw TruncationInsufficient(os.str());
    }
    PolyState out;
    for (int s = 0; s < 2; ++s) {
        const Poly& q = p.c[s];
        out.c[s] = op.scalar * q;
        if (!op.dx.is_zero()) out.c[s] += op.dx * q.derivative(0);
        for (const auto& [var, coef] : op.der) out.c[s] += coef * q.derivative(var);
    }
    const char gens[] = {'E', 'H', 'F'};
    for (int k = 0; k < 3; ++k)
        if (!op.pi[k].is_zero()) out = out + op.pi[k] * pi_action(gens[k], p);
    return out;
}

// ---------------------------------------------------------------------------

struct MartingaleTable::Impl {
    SymVars vars;
    Module<Poly> mod;
    std::array<Module<Poly>::Vec, 2> W;  // e^E e^H e^F Q(g) e^{x L-1} v_{+-}
    Impl(const SymVars& v, int cutoff) : vars(v), mod(Module<Poly>::lattice_sl2(cutoff)) {}
};

MartingaleTable martingale_table(const SymVars& vars, int D)
{
    auto impl = std::make_shared<MartingaleTable::Impl>(vars, D + 2);
    Ctx C(vars);
    auto& mod = impl->mod;
    const int cap = D + 2;
    if (cap > vars.K()) throw TruncationInsufficient("martingale_table: window smaller than the module cutoff");
    auto zeta = [](const PS& s) { return s.relabeled(Var::zeta); };
    const Poly x = Poly::var(vars.x());
    for (int s = 0; s < 2; ++s) {
        using Vec = Module<Poly>::Vec;
        LinOp<Poly> N = [&](const Vec& u) { return mod.L(-1, u) * x; };
        Vec w = exp_raising(mod, N, mod.top(s == 0 ? +1 : -1), cap);
        w = Q_operator(mod, C.g, w);
        w = exp_loop(mod, Gen::f(), zeta(C.f), w, cap);
        w = exp_loop(mod, Gen::h(), zeta(C.h), w, cap);
        w = exp_loop(mod, Gen::e(), zeta(C.e), w, cap);
        impl->W[std::size_t(s)] = w;
    }
    MartingaleTable t;
    t.D = D;
    t.basis = mod.basis_upto(D);
    for (const Mono& u : t.basis) {
        t.degree.push_back(mod.degree(u));
        t.M.push_back({{impl->W[0].coeff(u), impl->W[1].coeff(u)}});
    }
    t.impl = impl;
    return t;
}

std::vector<PolyState> MartingaleTable::mode(char id, int ell) const
{
    const auto& mod = impl->mod;
    std::vector<PolyState> out(basis.size());
    for (int s = 0; s < 2; ++s) {
        Module<Poly>::Vec y;
        const auto& w = impl->W[std::size_t(s)];
        switch (id) {
        case 'L': y = mod.L(-ell, w); break;
        case 'E': y = mod.X(Gen::e(), -ell, w) * Poly(-1); break;
        case 'H': y = mod.X(Gen::h(), -ell, w) * Poly(-1); break;
        case 'F': y = mod.X(Gen::f(), -ell, w) * Poly(-1); break;
        default: throw std::invalid_argument("mode: unknown generator");
        }
        for (std::size_t i = 0; i < basis.size(); ++i) out[i].c[std::size_t(s)] = y.coeff(basis[i]);
    }
    return out;
}

// ---------------------------------------------------------------------------

std::string CommutatorReport::key() const
{
    std::ostringstream os;
    os << "[" << a << "_" << l << "," << b << "_" << m << "]";
    return os.str();
}

int safe_window(int dmax, int lm) { return dmax + 2 * lm + 1; }

namespace {

int killing_form(char a, char b)
{
    if (a == 'H' && b == 'H') return 2;
    if ((a == 'E' && b == 'F') || (a == 'F' && b == 'E')) return 1;
    return 0;
}

// [a, b] in sl2 as (coefficient, generator)
std::vector<std::pair<int, char>> bracket(char a, char b)
{
    if (a == 'E' && b == 'F') return {{1, 'H'}};
    if (a == 'F' && b == 'E') return {{-1, 'H'}};
    if (a == 'H' && b == 'E') return {{2, 'E'}};
    if (a == 'E' && b == 'H') return {{-2, 'E'}};
    if (a == 'H' && b == 'F') return {{-2, 'F'}};
    if (a == 'F' && b == 'H') return {{2, 'F'}};
    return {};
}

struct OpCache {
    const SymVars& vars;
    SymVariant v;
    std::map<std::tuple<char, int, int>, SymOp> ops;
    const SymOp& get(char id, int ell, int wmax)
    {
        auto k = std::make_tuple(id, ell, wmax);
        auto it = ops.find(k);
        if (it == ops.end()) it = ops.emplace(k, build_operator(vars, id, ell, wmax, v)).first;
        return it->second;
    }
};

} // namespace

CommutatorReport commutator_check(const SymVars& vars, char a, int l, char b, int m, const std::vector<PolyState>& states,
                                  int dmax, SymVariant v)
{
    CommutatorReport r{a, b, l, m};
    OpCache cache{vars, v, {}};
    const SymOp& A = cache.get(a, l, dmax + std::max(0, -m));
    const SymOp& B = cache.get(b, m, dmax + std::max(0, -l));
    for (const PolyState& p : states) {
        if (p.max_weight(vars) > dmax) throw TruncationInsufficient("commutator_check: sample state heavier than dmax");
        PolyState lhs = apply_symmetry_op(A, apply_symmetry_op(B, p)) - apply_symmetry_op(B, apply_symmetry_op(A, p));
        PolyState rhs;
        const int n = l + m;
        if (a == 'L' && b == 'L') {
            rhs = Poly(l - m) * apply_symmetry_op(cache.get('L', n, dmax), p);
            if (n == 0) rhs = rhs + Poly(GaussQ(rat(l * l * l - l, 12))) * p;
        } else if (a == 'L') {
            rhs = Poly(-m) * apply_symmetry_op(cache.get(b, n, dmax), p);
        } else if (b == 'L') {
            rhs = Poly(l) * apply_symmetry_op(cache.get(a, n, dmax), p);
        } else {
            for (auto [c, g] : bracket(a, b)) rhs = rhs + Poly(c) * apply_symmetry_op(cache.get(g, n, dmax), p);
            if (n == 0 && killing_form(a, b)) rhs = rhs + Poly(l * killing_form(a, b)) * p;
        }
        PolyState res = lhs - rhs;
        ++r.states;
        for (int s = 0; s < 2; ++s) {
            r.checked_coeffs += static_cast<int>(lhs.c[s].terms().size() + rhs.c[s].terms().size());
            for (const auto& [mono, c] : res.c[s].terms()) {
                ++r.nonzero;
                r.max_residual = std::max(r.max_residual, std::abs(c.to_complex()));
            }
        }
    }
    return r;
}

std::vector<Complex> state_values(const SymVars& vars, const SLEPathState& s)
{
    std::vector<Complex> v(std::size_t(vars.count()), Complex(0.0));
    Series<Complex> g = s.g();
    v[std::size_t(vars.x())] = s.B;
    for (int n = 0; n >= -vars.K(); --n) v[std::size_t(vars.g(n))] = g.known(n) ? g.coeff(n) : 0.0;
    for (int n = -1; n >= -vars.K(); --n) {
        v[std::size_t(vars.e(n))] = s.e.known(n) ? s.e.coeff(n) : 0.0;
        v[std::size_t(vars.h(n))] = s.h.known(n) ? s.h.coeff(n) : 0.0;
        v[std::size_t(vars.f(n))] = s.f.known(n) ? s.f.coeff(n) : 0.0;
    }
    return v;
}

GenFunReport generating_function_check(const SymVars& vars, char X, TopPair tops, const SLEPathState& s, int depth,
                                       SymVariant v)
{
    GenFunReport r{X, tops, depth, {}, {}, 0};
    const auto vals = state_values(vars, s);
    auto value_of = [&](int i) { return vals[std::size_t(i)]; };
    const PolyState m = constant_state(tops.bra);
    const int k = tops.ket > 0 ? 0 : 1;
    for (int n = 0; n < depth; ++n) {
        SymOp op = build_operator(vars, X, -n, 0, v);
        Complex a = -apply_symmetry_op(op, m).c[std::size_t(k)].evaluate(value_of);
        ObservableSpec o = X == 'L' ? ObservableSpec::sl2_virasoro(tops.bra, tops.ket, 4.0)
                                    : ObservableSpec::sl2_current(X, tops.bra, tops.ket, 4.0);
        // <v'|L(z)|.> has z^{-n-2}, the currents z^{-n-1}
        o.coeff = n + (X == 'L' ? 2 : 1);
        Complex b = eval_observable(s, o);
        if (X == 'L') a = -a;
        r.from_ops.push_back(a);
        r.closed_form.push_back(b);
        r.max_residual = std::max(r.max_residual, std::abs(a - b));
    }
    return r;
}

} // namespace sle
