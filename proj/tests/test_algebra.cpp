#include <doctest.h>

#include "sle/algebra.hpp"

#include <random>

using namespace sle;
using M = Module<GaussQ>;
using V = M::Vec;

namespace {

V word(const M& mod, const std::vector<std::pair<Gen, int>>& ops, V v)
{
    for (auto it = ops.rbegin(); it != ops.rend(); ++it) v = mod.X(it->first, it->second, v);
    return v;
}

V lword(const M& mod, const std::vector<int>& modes, V v)
{
    for (auto it = modes.rbegin(); it != modes.rend(); ++it) v = mod.L(*it, v);
    return v;
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

} // namespace

TEST_CASE("Verma module brackets on the top")
{
    const GaussQ c = gq(7, 3), h = gq(-2, 5);
    M mod = M::verma(c, h);
    V top = mod.top();
    CHECK(lword(mod, {1, -1}, top) == top * (gq(2) * h));
    CHECK(lword(mod, {2, -2}, top) == top * (gq(4) * h + c / gq(2)));
    CHECK(mod.L(0, mod.L(-3, top)) == mod.L(-3, top) * (h + gq(3)));
}

TEST_CASE("Verma [L_m, L_n] with central term on every basis vector up to degree 4")
{
    M mod = M::verma(gq(-3, 7), gq(5, 2), 8);
    for (const Mono& b : mod.basis_upto(4)) {
        V v(b, gq(1));
        for (int m = -3; m <= 3; ++m)
            for (int n = -3; n <= 3; ++n) {
                V lhs = mod.L(m, mod.L(n, v)) - mod.L(n, mod.L(m, v));
                V rhs = mod.L(m + n, v) * gq(m - n);
                if (m + n == 0) rhs += v * (mod.central_charge() * gq((long long)m * m * m - m, 12));
                CHECK(lhs == rhs);
            }
    }
}

TEST_CASE("pairing")
{
    const GaussQ c = gq(1, 2), h = gq(3, 4);
    M mod = M::verma(c, h);
    V top = mod.top();
    CHECK(mod.pairing(top, top) == gq(1));
    V l1 = mod.L(-1, top);
    CHECK(mod.pairing(l1, l1) == gq(2) * h);
    CHECK(mod.pairing(l1, mod.L(-2, top)) == gq(0));
    CHECK(mod.pairing(top, l1) == gq(0));

    M lat = M::lattice_sl2();
    CHECK(lat.pairing(lat.top(), lat.top()) == gq(1));
    CHECK(lat.pairing(lat.top(-1), lat.top(-1)) == gq(1));
    CHECK(lat.pairing(lat.top(-1), lat.top()) == gq(0));
    // <alpha(-1) e^L | alpha(-1) e^L> = -<e^L | alpha(1) alpha(-1) e^L> = -2
    V a1 = lat.X(Gen::h(), -1, lat.top());
    CHECK(lat.pairing(a1, a1) == gq(-2));
}

TEST_CASE("Kac determinant at level 2")
{
    for (auto [c, h] : {std::pair{gq(1, 2), gq(1, 3)}, std::pair{gq(-7, 5), gq(2)}}) {
        M mod = M::verma(c, h);
        V top = mod.top();
        std::vector<V> b{mod.L(-2, top), mod.L(-1, mod.L(-1, top))};
        GaussQ g[2][2];
        for (int i = 0; i < 2; ++i)
            for (int j = 0; j < 2; ++j) {
                // <b_i|b_j> via the adjoint word applied to b_j
                V w = b[j];
                w = i == 0 ? mod.L(2, w) : mod.L(1, mod.L(1, w));
                g[i][j] = mod.top_coeff(w);
                CHECK(g[i][j] == mod.pairing(b[i], b[j]));
            }
        GaussQ det = g[0][0] * g[1][1] - g[0][1] * g[1][0];
        GaussQ kac = gq(2) * h * (gq(16) * h * h + gq(2) * (c - gq(5)) * h + c);
        CHECK(det == kac);
    }
}

TEST_CASE("Heisenberg Fock module")
{
    M mod = M::heisenberg(2, gq(1, 2));
    V top = mod.top();
    for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j)
            CHECK(mod.X(Gen::h(i), 1, mod.X(Gen::h(j), -1, top)) == top * gq(i == j ? 1 : 0));
    CHECK(mod.L(0, top) == top * gq(1, 8));
    CHECK(mod.X(Gen::h(0), 0, top) == top * gq(1, 2));
    CHECK(mod.X(Gen::h(1), 0, top).is_zero());
}

TEST_CASE("lattice vertex modes")
{
    M mod = M::lattice_sl2();
    V p = mod.top(+1), m = mod.top(-1);
    V a2(Mono{0, {gen_code(0, 2)}}, gq(1));
    CHECK(mod.X(Gen::e(), -1, p).is_zero());
    CHECK(mod.X(Gen::e(), -1, mod.X(Gen::f(), -1, p)) == a2);
    CHECK(mod.X(Gen::h(), 0, p) == p);
    CHECK(mod.X(Gen::h(), 0, m) == m * gq(-1));
    // the zero modes move between the two tops
    CHECK(mod.X(Gen::f(), 0, p) == m);
    CHECK(mod.X(Gen::e(), 0, m) == p);
    CHECK(mod.X(Gen::e(), 0, p).is_zero());
    CHECK(mod.X(Gen::f(), 0, m).is_zero());
    V a2m(Mono{-1, {gen_code(0, 2)}}, gq(-1));
    CHECK(mod.X(Gen::f(), -1, mod.X(Gen::e(), -1, m)) == a2m);
}

TEST_CASE("Sugawara L0 eigenvalues")
{
    M lat = M::lattice_sl2();
    CHECK(lat.L(0, lat.top()) == lat.top() * gq(1, 4));
    CHECK(lat.L(0, lat.top(-1)) == lat.top(-1) * gq(1, 4));
    for (int deg = 0; deg <= 3; ++deg)
        for (const Mono& b : lat.basis(deg)) {
            V v(b, gq(1));
            CHECK(lat.L(0, v) == v * (gq(1, 4) + gq(deg)));
        }
    M heis = M::heisenberg(1, gq(1, 2));
    CHECK(heis.L(0, heis.top()) == heis.top() * gq(1, 8));
    M h0 = M::heisenberg(3, gq(0));
    CHECK(h0.L(0, h0.top()).is_zero());
}

TEST_CASE("Sugawara agrees with the free boson on the lattice module")
{
    M lat = M::lattice_sl2();
    for (const Mono& b : lat.basis_upto(3)) {
        V v(b, gq(1));
        for (int n = -2; n <= 2; ++n) CHECK(lat.L(n, v) == lat.L_free_boson(n, v));
    }
}

TEST_CASE("central charge from <top|[L2, L-2] - 4 L0|top>")
{
    auto c_of = [](const M& mod) {
        V t = mod.top();
        V x = mod.L(2, mod.L(-2, t)) - mod.L(-2, mod.L(2, t)) - mod.L(0, t) * gq(4);
        return mod.top_coeff(x) * gq(2);
    };
    CHECK(c_of(M::heisenberg(1, gq(1, 2))) == gq(1));
    CHECK(c_of(M::heisenberg(2, gq(0))) == gq(2));
    CHECK(c_of(M::lattice_sl2()) == gq(1));
}

TEST_CASE("degree overflow is explicit")
{
    M mod = M::lattice_sl2(2);
    V v = mod.X(Gen::h(), -2, mod.top());
    CHECK_NOTHROW(mod.checked(v));
    CHECK_THROWS_AS(mod.apply_generator(Gen::h(), -1, v), DegreeOverflow);
}

TEST_CASE("affine brackets from the vertex modes, degree <= 3")
{
    for (const M& mod : {M::lattice_sl2(8), M::heisenberg(2, gq(1, 3), 8)}) {
        auto gens = gens_of(mod);
        for (const Mono& b : mod.basis_upto(3)) {
            V v(b, gq(1));
            for (Gen x : gens)
                for (Gen y : gens)
                    for (int m = -2; m <= 2; ++m)
                        for (int n = -2; n <= 2; ++n) {
                            V lhs = mod.X(x, m, mod.X(y, n, v)) - mod.X(y, n, mod.X(x, m, v));
                            V rhs;
                            for (auto [k, z] : lie_bracket(x, y, mod.kind())) rhs.add(mod.X(z, m + n, v), gq(k));
                            if (m + n == 0) rhs.add(v, gq(m * killing(x, y, mod.kind())));
                            CHECK(lhs == rhs);
                        }
        }
    }
}

TEST_CASE("Sugawara [L_m, L_n] and [L_m, X(n)]")
{
    for (const M& mod : {M::lattice_sl2(8), M::heisenberg(2, gq(1, 2), 8)}) {
        const GaussQ c = mod.central_charge();
        for (const Mono& b : mod.basis_upto(2)) {
            V v(b, gq(1));
            for (int m = -2; m <= 2; ++m)
                for (int n = -2; n <= 2; ++n) {
                    V lhs = mod.L(m, mod.L(n, v)) - mod.L(n, mod.L(m, v));
                    V rhs = mod.L(m + n, v) * gq(m - n);
                    if (m + n == 0) rhs += v * (c * gq((long long)m * m * m - m, 12));
                    CHECK(lhs == rhs);
                }
            for (Gen x : gens_of(mod))
                for (int m = -2; m <= 2; ++m)
                    for (int n = -2; n <= 2; ++n)
                        CHECK(mod.L(m, mod.X(x, n, v)) - mod.X(x, n, mod.L(m, v)) == mod.X(x, m + n, v) * gq(-n));
        }
    }
}
