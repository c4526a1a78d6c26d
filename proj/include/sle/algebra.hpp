#pragma once

#include "sle/series.hpp"

#include <algorithm>
#include <compare>
#include <functional>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

namespace sle {

struct DegreeOverflow : std::runtime_error {
    using std::runtime_error::runtime_error;
};

enum class ModuleKind { VirasoroVerma, HeisenbergFock, LatticeSl2 };

// Negative-mode generators are packed as depth * kSlots + index.
inline constexpr int kSlots = 8;
inline int gen_code(int index, int depth) { return depth * kSlots + index; }
inline int gen_depth(int code) { return code / kSlots; }
inline int gen_index(int code) { return code % kSlots; }

// PBW monomial: creation modes (nonincreasing codes) on a top label. For the
// lattice module the label is m in e^{m alpha + Lambda}; e^{Lambda} is m = 0
// and e^{-Lambda} is m = -1.
struct Mono {
    int top = 0;
    std::vector<int> gens;
    auto operator<=>(const Mono&) const = default;
};

template <class S>
class GradedVector {
public:
    std::map<Mono, S> terms;

    GradedVector() = default;
    GradedVector(const Mono& m, const S& c) { add(m, c); }

    void add(const Mono& m, const S& c)
    {
        if (Ring<S>::is_zero(c)) return;
        auto [it, fresh] = terms.try_emplace(m, c);
        if (!fresh) {
            it->second += c;
            if (Ring<S>::is_zero(it->second)) terms.erase(it);
        }
    }

    void add(const GradedVector& v, const S& c)
    {
        for (const auto& [m, x] : v.terms) add(m, x * c);
    }

    S coeff(const Mono& m) const
    {
        auto it = terms.find(m);
        return it == terms.end() ? Ring<S>::zero() : it->second;
    }

    bool is_zero() const { return terms.empty(); }

    GradedVector& operator+=(const GradedVector& o)
    {
        for (const auto& [m, c] : o.terms) add(m, c);
        return *this;
    }
    GradedVector& operator-=(const GradedVector& o)
    {
        for (const auto& [m, c] : o.terms) add(m, Ring<S>::zero() - c);
        return *this;
    }
    GradedVector& operator*=(const S& s)
    {
        if (Ring<S>::is_zero(s)) {
            terms.clear();
            return *this;
        }
        for (auto& [m, c] : terms) c *= s;
        return *this;
    }
    friend GradedVector operator+(GradedVector a, const GradedVector& b) { return a += b; }
    friend GradedVector operator-(GradedVector a, const GradedVector& b) { return a -= b; }
    friend GradedVector operator*(GradedVector a, const S& s) { return a *= s; }
    friend GradedVector operator*(const S& s, GradedVector a) { return a *= s; }
    friend bool operator==(const GradedVector& a, const GradedVector& b) { return a.terms == b.terms; }
};

// Affine generators: sl2 standard basis, or an orthonormal Heisenberg H_i.
struct Gen {
    enum Kind : char { E, H, F } kind = H;
    int index = 0;
    static Gen e() { return {E, 0}; }
    static Gen h(int i = 0) { return {H, i}; }
    static Gen f() { return {F, 0}; }
    auto operator<=>(const Gen&) const = default;
};

inline const char* gen_name(Gen g)
{
    switch (g.kind) {
    case Gen::E: return "E";
    case Gen::H: return "H";
    case Gen::F: return "F";
    }
    return "?";
}

template <class S>
class Module {
public:
    using Vec = GradedVector<S>;

    static Module verma(S c, S h, int cutoff = 6)
    {
        Module m(ModuleKind::VirasoroVerma, cutoff);
        m.c_ = c;
        m.h_ = h;
        return m;
    }

    // rank-l Heisenberg at level 1 with top weight lambda H_1
    static Module heisenberg(int rank, S lambda, int cutoff = 6)
    {
        if (rank < 1 || rank > kSlots) throw std::invalid_argument("heisenberg: rank out of range");
        Module m(ModuleKind::HeisenbergFock, cutoff);
        m.rank_ = rank;
        m.lambda_ = lambda;
        m.c_ = Ring<S>::from_int(rank);
        m.h_ = Ring<S>::div_int(lambda * lambda, 2);
        m.hdual_ = 0;
        return m;
    }

    // level-1 affine sl2 realized on V_{Q + Lambda}, Q = Z alpha, Lambda = alpha/2
    static Module lattice_sl2(int cutoff = 6)
    {
        Module m(ModuleKind::LatticeSl2, cutoff);
        m.c_ = Ring<S>::one();
        m.h_ = Ring<S>::div_int(Ring<S>::one(), 4);
        m.hdual_ = 2;
        return m;
    }

    ModuleKind kind() const { return kind_; }
    int cutoff() const { return cutoff_; }
    void set_cutoff(int d) { cutoff_ = d; }
    const S& central_charge() const { return c_; }
    const S& top_weight() const { return h_; }
    int rank() const { return rank_; }
    int level() const { return 1; }
    int dual_coxeter() const { return hdual_; }

    // sign +1: |c,h>, v_Lambda or e^{Lambda}; sign -1: e^{-Lambda}
    Vec top(int sign = +1) const
    {
        Mono m;
        m.top = (kind_ == ModuleKind::LatticeSl2 && sign < 0) ? -1 : 0;
        return Vec(m, Ring<S>::one());
    }

    int degree(const Mono& m) const
    {
        int d = m.top * m.top + m.top;
        for (int g : m.gens) d += gen_depth(g);
        return d;
    }

    int max_degree(const Vec& v) const
    {
        int d = -1;
        for (const auto& [m, c] : v.terms) d = std::max(d, degree(m));
        return d;
    }

    Vec project(const Vec& v, int cutoff) const
    {
        Vec r;
        for (const auto& [m, c] : v.terms)
            if (degree(m) <= cutoff) r.terms.emplace(m, c);
        return r;
    }

    Vec checked(Vec v) const
    {
        for (const auto& [m, c] : v.terms)
            if (degree(m) > cutoff_)
                throw DegreeOverflow("result has degree " + std::to_string(degree(m)) + " above cutoff " +
                                     std::to_string(cutoff_));
        return v;
    }

    // All PBW monomials of exactly the given degree.
    std::vector<Mono> basis(int deg) const
    {
        std::vector<Mono> out;
        auto parts = [&](int total, int charge) {
            std::vector<int> cur;
            int slots = kind_ == ModuleKind::HeisenbergFock ? rank_ : 1;
            std::function<void(int, int)> rec = [&](int remaining, int maxcode) {
                if (remaining == 0) {
                    out.push_back(Mono{charge, cur});
                    return;
                }
                for (int code = maxcode; code >= kSlots; --code) {
                    if (gen_index(code) >= slots) continue;
                    int d = gen_depth(code);
                    if (d > remaining) continue;
                    cur.push_back(code);
                    rec(remaining - d, code);
                    cur.pop_back();
                }
            };
            rec(total, gen_code(kSlots - 1, total));
        };
        if (kind_ == ModuleKind::LatticeSl2) {
            for (int m = -deg - 1; m <= deg; ++m) {
                int base = m * m + m;
                if (base <= deg) parts(deg - base, m);
            }
        } else {
            parts(deg, 0);
        }
        return out;
    }

    std::vector<Mono> basis_upto(int deg) const
    {
        std::vector<Mono> out;
        for (int d = 0; d <= deg; ++d) {
            auto b = basis(d);
            out.insert(out.end(), b.begin(), b.end());
        }
        return out;
    }

    // Virasoro L_n: PBW normal ordering on the Verma module, Segal-Sugawara
    // on the affine modules. Exact; no cutoff check.
    Vec L(int n, const Vec& v) const
    {
        Vec r;
        if (kind_ == ModuleKind::VirasoroVerma) {
            for (const auto& [m, c] : v.terms) r.add(verma_L(n, m), c);
            return r;
        }
        return sugawara(n, v);
    }

    // Free-boson form of L_n on the lattice module; used to cross-check the
    // Sugawara construction.
    Vec L_free_boson(int n, const Vec& v) const
    {
        if (kind_ != ModuleKind::LatticeSl2) throw std::logic_error("L_free_boson: lattice module only");
        Vec r;
        int d = std::max(0, max_degree(v));
        for (int j = n - d - 1; j <= d + 1; ++j) {
            int p = n - j, q = j;
            Vec t = (p < 0) ? alpha(p, alpha(q, v)) : alpha(q, alpha(p, v));
            r.add(t, Ring<S>::div_int(Ring<S>::one(), 4));
        }
        return r;
    }

    // Affine generator X(n) (exact, no cutoff check).
    Vec X(Gen g, int n, const Vec& v) const
    {
        switch (kind_) {
        case ModuleKind::HeisenbergFock:
            if (g.kind != Gen::H || g.index >= rank_) throw std::invalid_argument("heisenberg module: bad generator");
            return heis(g.index, n, v);
        case ModuleKind::LatticeSl2:
            if (g.kind == Gen::H) return alpha(n, v);
            return vertex_mode(g.kind == Gen::E ? +1 : -1, n, v);
        default: throw std::invalid_argument("Verma module has no affine generators");
        }
    }

    Vec apply_generator(Gen g, int n, const Vec& v) const { return checked(X(g, n, v)); }
    Vec apply_L(int n, const Vec& v) const { return checked(L(n, v)); }

    // Mode n of Gamma_{s alpha}(z) = e^{s alpha} z^{s alpha(0)} E^-(z) E^+(z).
    Vec vertex_mode(int s, int n, const Vec& v) const
    {
        Vec r;
        for (const auto& [m, c] : v.terms) {
            int fock = degree(m) - (m.top * m.top + m.top);
            int shift = s * (2 * m.top + 1); // (s alpha | m alpha + Lambda)
            // annihilation part: z^{-b} coefficients Q_b, b = 0..fock
            std::vector<Vec> Q(static_cast<std::size_t>(fock + 1));
            Q[0] = Vec(m, Ring<S>::one());
            for (int b = 1; b <= fock; ++b) {
                Vec acc;
                for (int j = 1; j <= b; ++j) acc.add(alpha(j, Q[static_cast<std::size_t>(b - j)]), Ring<S>::from_int(-s));
                Q[static_cast<std::size_t>(b)] = acc * Ring<S>::div_int(Ring<S>::one(), b);
            }
            for (int b = 0; b <= fock; ++b) {
                int a = b - n - 1 - shift;
                if (a < 0 || Q[static_cast<std::size_t>(b)].is_zero()) continue;
                Vec t = schur_creation(s, a, Q[static_cast<std::size_t>(b)]);
                for (const auto& [mm, cc] : t.terms) {
                    Mono moved = mm;
                    moved.top += s;
                    r.add(moved, cc * c);
                }
            }
        }
        return r;
    }

    // Contragredient pairing <word top'| v> with <X(n)u|v> = -<u|X(-n)v>
    // (affine) or <L_n u|v> = <u|L_{-n}v> (Virasoro); <top|top> = 1.
    S pairing(const Vec& u, const Vec& v) const
    {
        S acc = Ring<S>::zero();
        for (const auto& [mu, cu] : u.terms) {
            if (kind_ == ModuleKind::LatticeSl2 && mu.top != 0 && mu.top != -1)
                throw std::invalid_argument("pairing: lattice bra must be a Heisenberg word on e^{+-Lambda}");
            Vec w = v;
            S sign = Ring<S>::one();
            for (int g : mu.gens) {
                int depth = gen_depth(g);
                if (kind_ == ModuleKind::VirasoroVerma) {
                    w = L(depth, w);
                } else {
                    w = (kind_ == ModuleKind::HeisenbergFock) ? heis(gen_index(g), depth, w) : alpha(depth, w);
                    sign = Ring<S>::zero() - sign;
                }
            }
            Mono t;
            t.top = mu.top;
            acc += cu * sign * w.coeff(t);
        }
        return acc;
    }

    // <top'| component of v
    S top_coeff(const Vec& v, int sign = +1) const
    {
        Mono t;
        t.top = (kind_ == ModuleKind::LatticeSl2 && sign < 0) ? -1 : 0;
        return v.coeff(t);
    }

private:
    Module(ModuleKind k, int cutoff) : kind_(k), cutoff_(cutoff), c_(Ring<S>::zero()), h_(Ring<S>::zero()), lambda_(Ring<S>::zero()) {}

    Vec verma_L(int n, const Mono& m) const
    {
        Vec r;
        if (m.gens.empty()) {
            if (n > 0) return r;
            if (n == 0) {
                r.add(m, h_);
                return r;
            }
            r.add(Mono{0, {gen_code(0, -n)}}, Ring<S>::one());
            return r;
        }
        int a = gen_depth(m.gens.front());
        if (n < 0 && -n >= a) {
            Mono p = m;
            p.gens.insert(p.gens.begin(), gen_code(0, -n));
            r.add(p, Ring<S>::one());
            return r;
        }
        Mono rest{0, std::vector<int>(m.gens.begin() + 1, m.gens.end())};
        // L_n L_{-a} rest = L_{-a} L_n rest + [L_n, L_{-a}] rest
        Vec inner = verma_L(n, rest);
        for (const auto& [mm, cc] : inner.terms) r.add(verma_L(-a, mm), cc);
        if (n + a != 0) r.add(verma_L(n - a, rest), Ring<S>::from_int(n + a));
        if (n == a) {
            long long k = (long long)n * n * n - n;
            Vec t(rest, Ring<S>::one());
            r.add(t, Ring<S>::div_int(c_ * Ring<S>::from_int(k), 12));
        }
        return r;
    }

    // Heisenberg H_i(n) on the Fock module, [H_i(m), H_j(n)] = m delta_ij delta_{m+n}
    Vec heis(int i, int n, const Vec& v) const
    {
        Vec r;
        for (const auto& [m, c] : v.terms) {
            if (n < 0) {
                Mono p = m;
                int code = gen_code(i, -n);
                auto pos = std::upper_bound(p.gens.begin(), p.gens.end(), code, std::greater<int>());
                p.gens.insert(pos, code);
                r.add(p, c);
            } else if (n == 0) {
                if (i == 0) r.add(m, c * lambda_);
            } else {
                int code = gen_code(i, n);
                long long mult = std::count(m.gens.begin(), m.gens.end(), code);
                if (mult == 0) continue;
                Mono p = m;
                p.gens.erase(std::find(p.gens.begin(), p.gens.end(), code));
                r.add(p, c * Ring<S>::from_int(mult * n));
            }
        }
        return r;
    }

    // lattice alpha(n), (alpha|alpha) = 2
    Vec alpha(int n, const Vec& v) const
    {
        Vec r;
        for (const auto& [m, c] : v.terms) {
            if (n < 0) {
                Mono p = m;
                int code = gen_code(0, -n);
                auto pos = std::upper_bound(p.gens.begin(), p.gens.end(), code, std::greater<int>());
                p.gens.insert(pos, code);
                r.add(p, c);
            } else if (n == 0) {
                r.add(m, c * Ring<S>::from_int(2 * m.top + 1));
            } else {
                int code = gen_code(0, n);
                long long mult = std::count(m.gens.begin(), m.gens.end(), code);
                if (mult == 0) continue;
                Mono p = m;
                p.gens.erase(std::find(p.gens.begin(), p.gens.end(), code));
                r.add(p, c * Ring<S>::from_int(2 * mult * n));
            }
        }
        return r;
    }

    // coefficient of z^a in exp(sum_{j>=1} s alpha(-j) z^j / j), applied to v
    Vec schur_creation(int s, int a, const Vec& v) const
    {
        std::vector<Vec> P(static_cast<std::size_t>(a + 1));
        P[0] = v;
        for (int k = 1; k <= a; ++k) {
            Vec acc;
            for (int j = 1; j <= k; ++j) acc.add(alpha(-j, P[static_cast<std::size_t>(k - j)]), Ring<S>::from_int(s));
            P[static_cast<std::size_t>(k)] = acc * Ring<S>::div_int(Ring<S>::one(), k);
        }
        return P[static_cast<std::size_t>(a)];
    }

    // :A(p)B(q): = A(p)B(q) if p < 0, else B(q)A(p)
    Vec normal_pair(Gen a, int p, Gen b, int q, const Vec& v) const
    {
        return p < 0 ? X(a, p, X(b, q, v)) : X(b, q, X(a, p, v));
    }

    Vec sugawara(int n, const Vec& v) const
    {
        if (kind_ == ModuleKind::VirasoroVerma) throw std::logic_error("sugawara on Verma");
        int k = 1;
        if (k + hdual_ == 0) throw std::domain_error("Segal-Sugawara undefined at the critical level");
        Vec r;
        if (v.is_zero()) return r;
        int d = std::max(0, max_degree(v));
        S pref = Ring<S>::div_int(Ring<S>::one(), 2 * (k + hdual_));
        for (int j = n - d; j <= d; ++j) {
            int p = n - j, q = j;
            if (kind_ == ModuleKind::HeisenbergFock) {
                for (int i = 0; i < rank_; ++i) r.add(normal_pair(Gen::h(i), p, Gen::h(i), q, v), pref);
            } else {
                // Casimir in the dual bases {E, H, F} / {F, H/2, E}
                r.add(normal_pair(Gen::h(), p, Gen::h(), q, v), Ring<S>::div_int(pref, 2));
                r.add(normal_pair(Gen::e(), p, Gen::f(), q, v), pref);
                r.add(normal_pair(Gen::f(), p, Gen::e(), q, v), pref);
            }
        }
        return r;
    }

    ModuleKind kind_;
    int cutoff_;
    S c_, h_, lambda_;
    int rank_ = 1;
    int hdual_ = 0;
};

// sl2 structure: (H|H) = 2, (E|F) = 1; Heisenberg: (H_i|H_j) = delta_ij.
inline long long killing(Gen a, Gen b, ModuleKind kind)
{
    if (kind == ModuleKind::HeisenbergFock) return (a.kind == Gen::H && b.kind == Gen::H && a.index == b.index) ? 1 : 0;
    if (a.kind == Gen::H && b.kind == Gen::H) return 2;
    if ((a.kind == Gen::E && b.kind == Gen::F) || (a.kind == Gen::F && b.kind == Gen::E)) return 1;
    return 0;
}

// [a, b] in sl2 as (coefficient, generator); zero for commuting pairs.
inline std::vector<std::pair<int, Gen>> lie_bracket(Gen a, Gen b, ModuleKind kind)
{
    if (kind == ModuleKind::HeisenbergFock) return {};
    auto K = [](Gen g) { return g.kind; };
    if (K(a) == K(b)) return {};
    if (K(a) == Gen::H && K(b) == Gen::E) return {{2, Gen::e()}};
    if (K(a) == Gen::H && K(b) == Gen::F) return {{-2, Gen::f()}};
    if (K(a) == Gen::E && K(b) == Gen::F) return {{1, Gen::h()}};
    if (K(a) == Gen::E && K(b) == Gen::H) return {{-2, Gen::e()}};
    if (K(a) == Gen::F && K(b) == Gen::H) return {{2, Gen::f()}};
    return {{-1, Gen::h()}}; // [F, E]
}

} // namespace sle
