#include <doctest.h>

#include "sle/sde.hpp"

#include <cmath>
#include <cstdlib>
#include <random>

using namespace sle;
using CS = Series<Complex>;

namespace {

double binom_half(int k)
{
    double r = 1;
    for (int j = 0; j < k; ++j) r *= (0.5 - j) / (j + 1);
    return r;
}

CS random_internal(std::mt19937_64& rng, int M)
{
    std::uniform_real_distribution<double> U(-0.5, 0.5);
    CS s(Var::zeta, -M);
    for (int n = -1; n >= -M; --n) s.set(n, Complex(U(rng), U(rng)) / double(-n));
    return s;
}

double max_diff(const CS& a, const CS& b)
{
    double m = 0;
    for (int n = 0; n >= std::max(a.prec(), b.prec()); --n) m = std::max(m, std::abs(a.coeff(n) - b.coeff(n)));
    return m;
}

PathConfig sl2_cfg()
{
    PathConfig c;
    c.kase = Case::sl2;
    c.kappa = 2;
    return c;
}

} // namespace

TEST_CASE("one Loewner step from the identity")
{
    SLEPathState s = initial_state(sl2_cfg());
    step_loewner(s, 0.03, 1e-3);
    CHECK(s.rho.coeff(1) == Complex(1.0));
    CHECK(s.rho.coeff(0) == Complex(-0.03));
    CHECK(s.rho.coeff(-1) == Complex(2e-3));
    CHECK(s.rho.coeff(-2) == Complex(0.0));
    CHECK(s.rho.coeff(-3) == Complex(0.0));
    CHECK(s.g().coeff(0) == Complex(0.0));
}

TEST_CASE("zero noise reproduces sqrt(z^2 + 4t)")
{
    PathConfig c;
    c.kase = Case::virasoro_only;
    c.kappa = 0;
    c.dt = 1e-4;
    c.T = 0.25;
    for (auto scheme : {LoewnerScheme::heun, LoewnerScheme::euler}) {
        c.scheme = scheme;
        SLEPathState s;
        simulate_path(c, 0, {c.steps()}, [&](std::size_t, const SLEPathState& st) { s = st; });
        CHECK(s.t == doctest::Approx(0.25));
        double worst = 0;
        for (int k = 1; k <= 4; ++k) {
            double want = binom_half(k) * std::pow(4 * 0.25, k);
            worst = std::max(worst, std::abs(s.g().coeff(1 - 2 * k) - want) / std::abs(want));
            CHECK(std::abs(s.g().coeff(-2 * k)) < 1e-14);
        }
        if (scheme == LoewnerScheme::heun)
            CHECK(worst <= 1e-4);
        else
            CHECK(worst > 1e-4); // first-order error dt/t is visible at this step size
    }
}

TEST_CASE("a1 = 2t and r0 = -B on stochastic paths")
{
    PathConfig c = sl2_cfg();
    c.T = 0.05;
    auto steps = sample_steps(c, {0.01, 0.05});
    for (std::uint64_t p = 0; p < 5; ++p)
        simulate_path(c, p, steps, [&](std::size_t, const SLEPathState& s) {
            CHECK(std::abs(s.g().coeff(-1) - Complex(2 * s.t)) < 1e-12);
            CHECK(s.rho.coeff(0) == Complex(-s.B));
            CHECK(s.e.coeff(0) == Complex(0.0));
            CHECK(s.h.coeff(0) == Complex(0.0));
            CHECK(s.f.coeff(0) == Complex(0.0));
        });
}

TEST_CASE("Heisenberg steps")
{
    PathConfig c;
    c.kase = Case::heisenberg;
    c.kappa = 4;
    c.lambda = 0.5;
    c.rank = 2;
    SLEPathState s = initial_state(c);
    step_internal_heisenberg(s, {0.0, 0.0});
    CHECK(s.heis[0].is_zero());
    step_internal_heisenberg(s, {0.1, -0.2});
    CHECK(s.heis[0].coeff(-1) == Complex(0.1));
    CHECK(s.heis[1].coeff(-1) == Complex(-0.2));
    CHECK(s.heis[0].coeff(-2) == Complex(0.0));
    step_internal_heisenberg(s, {0.1, -0.2}, SignConvention::sec5);
    CHECK(s.heis[0].is_zero());

    // Ito isometry: Var h^i_{-1}(t) ~ tau_i t for small t
    c.T = c.dt * 50;
    auto tab = run_paths(c, 4000, {c.T}, 2, [](const SLEPathState& st) {
        return std::vector<Complex>{st.heis[0].coeff(-1), st.heis[1].coeff(-1)};
    });
    auto tau = c.internal_variances();
    CHECK(tau[0] == doctest::Approx(1.0));
    for (std::size_t j = 0; j < 2; ++j) {
        double m2 = 0;
        for (std::size_t p = 0; p < 4000; ++p) m2 += std::norm(tab.at(p, 0, j));
        m2 /= 4000;
        double want = tau[j] * c.T;
        CHECK(std::abs(m2 - want) < 4 * want * std::sqrt(2.0 / 4000));
    }
}

TEST_CASE("sl2 Euler steps")
{
    PathConfig c = sl2_cfg();
    SLEPathState s = initial_state(c);
    const double dB[3] = {0.01, 0.02, -0.03};
    step_internal_sl2(s, dB, 0, 1.0);
    CHECK(std::abs(s.e.coeff(-1) - Complex(0.02, -0.03) * (-1 / std::sqrt(2.0))) < 1e-15);
    CHECK(std::abs(s.h.coeff(-1) - Complex(-0.01 / std::sqrt(2.0))) < 1e-15);
    CHECK(std::abs(s.f.coeff(-1) - (Complex(-0.02, -0.03) / std::sqrt(2.0))) < 1e-15);

    // zero noise: only the dt drift of h survives
    c.kappa = 0;
    c.tau = 2.0;
    c.T = 0.1;
    c.sign = SignConvention::appC;
    SLEPathState z = initial_state(c);
    const double zero[3] = {0, 0, 0};
    for (long n = 0; n < c.steps(); ++n) {
        step_internal_sl2(z, zero, c.dt, 2.0);
        step_loewner(z, 0.0, c.dt, LoewnerScheme::heun);
    }
    CHECK(z.e.is_zero());
    CHECK(z.f.is_zero());
    CHECK(std::abs(z.h.coeff(-1)) == 0.0);
    CHECK(z.h.coeff(-2).real() == doctest::Approx(-2.0 * 0.1 / 2).epsilon(1e-12));
}

TEST_CASE("Gauss factorisation round trip")
{
    std::mt19937_64 rng(7);
    for (int trial = 0; trial < 5; ++trial) {
        CS e = random_internal(rng, 10), h = random_internal(rng, 10), f = random_internal(rng, 10);
        Mat2 th = theta_from_gauss(e, h, f);
        // det = 1
        CS det = th.a * th.d - th.b * th.c;
        CHECK(std::abs(det.coeff(0) - 1.0) < 1e-14);
        for (int n = -1; n >= -10; --n) CHECK(std::abs(det.coeff(n)) < 1e-13);
        CS e2, h2, f2;
        gauss_from_theta(th, e2, h2, f2);
        CHECK(max_diff(e, e2) < 1e-13);
        CHECK(max_diff(h, h2) < 1e-13);
        CHECK(max_diff(f, f2) < 1e-13);
    }
}

TEST_CASE("multiplicative step")
{
    PathConfig c = sl2_cfg();
    std::mt19937_64 rng(11);
    SLEPathState s = initial_state(c);
    s.e = random_internal(rng, c.M);
    s.h = random_internal(rng, c.M);
    s.f = random_internal(rng, c.M);
    s.rho = s.rho + CS::monomial(Var::z, Complex(0.3), -1, -c.N);
    SLEPathState z = s;
    const double zero[3] = {0, 0, 0};
    step_multiplicative(z, zero);
    CHECK(max_diff(z.e, s.e) < 1e-14);
    CHECK(max_diff(z.h, s.h) < 1e-14);
    CHECK(max_diff(z.f, s.f) < 1e-14);

    // first order in the increments both integrators agree
    const double eps = 1e-5;
    const double dB[3] = {0.7 * eps, -0.4 * eps, 1.1 * eps};
    SLEPathState a = s, b = s;
    step_multiplicative(a, dB);
    step_internal_sl2(b, dB, 0, 1.0);
    CHECK(max_diff(a.e, s.e) > 1e-6);
    CHECK(max_diff(a.e, b.e) < 1e-9);
    CHECK(max_diff(a.h, b.h) < 1e-9);
    CHECK(max_diff(a.f, b.f) < 1e-9);

    // at the identity a pure dB^1 increment is exp(-H x/(sqrt2 zeta)): a
    // shift of h and nothing else
    SLEPathState id = initial_state(c);
    const double hx[3] = {0.2, 0, 0};
    step_multiplicative(id, hx);
    CHECK(std::abs(id.h.coeff(-1) - Complex(-0.2 / std::sqrt(2.0))) < 1e-15);
    CHECK(std::abs(id.h.coeff(-2)) < 1e-15);
    CHECK(id.e.is_zero());
}

TEST_CASE("run_paths determinism and edge cases")
{
    PathConfig c = sl2_cfg();
    c.T = 0.02;
    auto obs = [](const SLEPathState& s) {
        return std::vector<Complex>{s.rho.coeff(-3), s.e.coeff(-2), s.f.coeff(-1)};
    };
    auto t1 = run_paths(c, 6, {0.0, 0.01, 0.02}, 3, obs);
    auto t2 = run_paths(c, 6, {0.0, 0.01, 0.02}, 3, obs);
    CHECK(t1.values == t2.values);
    CHECK(t1.n_paths() == 6);
    CHECK(t1.at(0, 0, 0) == Complex(0.0));
    setenv("SLE_LAB_THREADS", "3", 1);
    auto t3 = run_paths(c, 6, {0.0, 0.01, 0.02}, 3, obs);
    unsetenv("SLE_LAB_THREADS");
    CHECK(t1.values == t3.values);
    c.seed = 2;
    auto t4 = run_paths(c, 6, {0.0, 0.01, 0.02}, 3, obs);
    CHECK(t1.values != t4.values);

    auto empty = run_paths(c, 0, {0.01}, 3, obs);
    CHECK(empty.values.empty());
    CHECK(empty.n_paths() == 0);

    CHECK_THROWS(sample_steps(c, {0.0105}));
    CHECK_THROWS(sample_steps(c, {0.03}));

    // kappa = 0 makes every path the deterministic one
    PathConfig d;
    d.kase = Case::virasoro_only;
    d.kappa = 0;
    d.T = 0.01;
    auto td = run_paths(d, 3, {0.01}, 1, [](const SLEPathState& s) { return std::vector<Complex>{s.rho.coeff(-3)}; });
    CHECK(td.at(0, 0, 0) == td.at(1, 0, 0));
    CHECK(td.at(0, 0, 0) == td.at(2, 0, 0));
}

TEST_CASE("path configuration validation")
{
    PathConfig c = sl2_cfg();
    CHECK(c.validate().empty());
    CHECK(c.sl2_tau() == 1.0);
    c.tau = 2.0;
    CHECK(c.validate().size() == 1);
    c.intentional_violation = true;
    CHECK(c.validate().empty());

    PathConfig h;
    h.kase = Case::heisenberg;
    h.kappa = 4;
    h.lambda = 0.8;
    auto err = h.validate();
    REQUIRE(err.size() == 1);
    CHECK(err[0].find("tau_1") != std::string::npos);

    PathConfig bad;
    bad.kappa = -1;
    bad.dt = 0;
    bad.N = 2;
    CHECK(bad.validate().size() >= 3);
    CHECK_THROWS_AS(bad.require_valid(), std::invalid_argument);
}

TEST_CASE("E[f(t)] vanishes for the sl2 Euler integrator")
{
    PathConfig c = sl2_cfg();
    c.T = 0.1;
    const std::size_t n = 2000;
    auto tab = run_paths(c, n, {c.T}, 2, [](const SLEPathState& s) {
        return std::vector<Complex>{s.f.coeff(-1), s.f.coeff(-2)};
    });
    for (std::size_t j = 0; j < 2; ++j) {
        Complex m = 0;
        double m2 = 0;
        for (std::size_t p = 0; p < n; ++p) {
            m += tab.at(p, 0, j);
            m2 += std::norm(tab.at(p, 0, j));
        }
        m /= double(n);
        double se = std::sqrt(m2 / double(n) / double(n));
        CHECK(std::abs(m) < 4 * se);
    }
}
