#include "sle/sde.hpp"

#include <Eigen/Dense>

#include <atomic>
#include <cmath>
#include <cstdlib>
#include <sstream>
#include <stdexcept>
#include <thread>

namespace sle {

namespace {

using CS = Series<Complex>;
const Complex I(0.0, 1.0);
const double kInvSqrt2 = 1.0 / std::sqrt(2.0);

std::string fmt(double v)
{
    std::ostringstream os;
    os << v;
    return os.str();
}

// 1/rho as a zeta-series, coarsened to the internal window
CS inverse_rho(const SLEPathState& s, int M)
{
    return with_window(mul_inverse(s.rho).relabeled(Var::zeta), -M);
}

int internal_window(const SLEPathState& s)
{
    if (!s.heis.empty()) return -s.heis.front().prec();
    return -s.e.prec();
}

} // namespace

const char* case_name(Case c)
{
    switch (c) {
    case Case::virasoro_only: return "virasoro-only";
    case Case::heisenberg: return "heisenberg";
    case Case::sl2: return "sl2";
    }
    return "?";
}

const char* integrator_name(Integrator i)
{
    return i == Integrator::coefficient_euler ? "coefficient-euler" : "multiplicative";
}

const char* scheme_name(LoewnerScheme s) { return s == LoewnerScheme::euler ? "euler" : "heun"; }

const char* sign_name(SignConvention s) { return s == SignConvention::appC ? "appC" : "sec5"; }

double PathConfig::sl2_tau() const { return tau ? *tau : (4.0 - kappa) / 2.0; }

int PathConfig::internal_dim() const
{
    switch (kase) {
    case Case::virasoro_only: return 0;
    case Case::heisenberg: return rank;
    case Case::sl2: return 3;
    }
    return 0;
}

long PathConfig::steps() const { return dt > 0 ? std::lround(T / dt) : 0; }

std::vector<double> PathConfig::internal_variances() const
{
    switch (kase) {
    case Case::virasoro_only: return {};
    case Case::heisenberg: {
        if (!tau_vec.empty()) return tau_vec;
        std::vector<double> v(static_cast<std::size_t>(std::max(rank, 0)), 2.0);
        if (!v.empty()) v[0] = 2.0 - 4.0 * lambda * lambda;
        return v;
    }
    case Case::sl2: return std::vector<double>(3, sl2_tau());
    }
    return {};
}

std::vector<std::string> PathConfig::validate() const
{
    std::vector<std::string> err;
    if (!std::isfinite(kappa) || kappa < 0) err.push_back("kappa must be a finite number >= 0, got " + fmt(kappa));
    if (!(dt > 0) || !std::isfinite(dt)) err.push_back("dt must be > 0");
    if (!(T >= 0) || !std::isfinite(T)) err.push_back("T must be >= 0");
    if (dt > 0 && T >= 0 && std::abs(double(steps()) * dt - T) > 1e-9 * std::max(1.0, T))
        err.push_back("T must be an integer multiple of dt");
    if (N < 4) err.push_back("N (rho window) must be >= 4, got " + std::to_string(N));
    if (M < 2) err.push_back("M (internal window) must be >= 2, got " + std::to_string(M));
    if (M > N) err.push_back("M must not exceed N: internal products need 1/rho down to zeta^-M");

    switch (kase) {
    case Case::virasoro_only:
        if (tau || !tau_vec.empty()) err.push_back("tau has no meaning for the virasoro-only case");
        break;
    case Case::heisenberg: {
        if (rank < 1) err.push_back("heisenberg rank must be >= 1");
        if (std::abs(kappa - 4.0) > 1e-12 && !intentional_violation)
            err.push_back("heisenberg requires kappa = 4 (annihilator condition), got " + fmt(kappa));
        double t1 = 2.0 - 4.0 * lambda * lambda;
        if (t1 < 0)
            err.push_back("heisenberg weight lambda = " + fmt(lambda) +
                          " gives tau_1 = 2 - 4 lambda^2 = " + fmt(t1) +
                          " < 0; the Heisenberg annihilator needs |lambda| <= 1/sqrt(2)");
        if (tau) err.push_back("heisenberg takes a tau vector, not a scalar tau");
        if (!tau_vec.empty()) {
            if (static_cast<int>(tau_vec.size()) != rank)
                err.push_back("tau vector must have one entry per Heisenberg generator");
            for (double v : tau_vec)
                if (v < 0) err.push_back("tau vector entries must be >= 0");
            if (!intentional_violation && static_cast<int>(tau_vec.size()) == rank) {
                for (int i = 0; i < rank; ++i) {
                    double want = i == 0 ? t1 : 2.0;
                    if (std::abs(tau_vec[static_cast<std::size_t>(i)] - want) > 1e-12)
                        err.push_back("tau_" + std::to_string(i + 1) + " = " + fmt(tau_vec[std::size_t(i)]) +
                                      " breaks the annihilator relation (expected " + fmt(want) +
                                      "); set intentional_violation to run it anyway");
                }
            }
        }
        break;
    }
    case Case::sl2: {
        double t = sl2_tau();
        if (!tau && t < 0) err.push_back("sl2 with kappa > 4 gives tau = (4 - kappa)/2 < 0");
        if (tau && *tau < 0) err.push_back("tau must be >= 0");
        if (tau && std::abs(kappa + 2 * *tau - 4) > 1e-12 && !intentional_violation)
            err.push_back("kappa + 2 tau - 4 = " + fmt(kappa + 2 * *tau - 4) +
                          " != 0; set intentional_violation to run a negative control");
        if (!tau_vec.empty()) err.push_back("sl2 takes a scalar tau, not a tau vector");
        break;
    }
    }
    return err;
}

void PathConfig::require_valid() const
{
    auto err = validate();
    if (err.empty()) return;
    std::string msg = "invalid path configuration:";
    for (const auto& e : err) msg += "\n  - " + e;
    throw std::invalid_argument(msg);
}

BrownianDriver::BrownianDriver(const PathConfig& cfg, std::uint64_t path)
{
    std::vector<double> var{cfg.kappa};
    for (double v : cfg.internal_variances()) var.push_back(v);
    for (std::size_t k = 0; k < var.size(); ++k) {
        std::seed_seq seq{std::uint32_t(cfg.seed), std::uint32_t(cfg.seed >> 32), std::uint32_t(path),
                          std::uint32_t(path >> 32), std::uint32_t(k)};
        eng_.emplace_back(seq);
        sd_.push_back(std::sqrt(var[k]));
    }
    out_.resize(var.size());
}

const std::vector<double>& BrownianDriver::next(double dt)
{
    double r = std::sqrt(dt);
    for (std::size_t k = 0; k < eng_.size(); ++k) {
        // one draw per stream per step, so streams never share state
        normal_.reset();
        out_[k] = sd_[k] * r * normal_(eng_[k]);
    }
    return out_;
}

CS SLEPathState::g() const
{
    CS r = rho;
    r.add_to(0, Complex(B));
    return r;
}

SLEPathState initial_state(const PathConfig& cfg)
{
    SLEPathState s;
    s.rho = CS::identity(Var::z, -cfg.N);
    CS zero(Var::zeta, -cfg.M);
    if (cfg.kase == Case::heisenberg) s.heis.assign(static_cast<std::size_t>(cfg.rank), zero);
    s.e = s.h = s.f = zero;
    return s;
}

void step_loewner(SLEPathState& s, double dB0, double dt, LoewnerScheme scheme)
{
    if (s.rho.coeff(1) != Complex(1.0)) throw DomainError("step_loewner: rho lost its unit leading coefficient");
    CS inv = mul_inverse(s.rho);
    if (scheme == LoewnerScheme::euler) {
        s.rho = s.rho + inv * Complex(2 * dt);
    } else {
        CS pred = s.rho + inv * Complex(2 * dt);
        pred.add_to(0, Complex(-dB0));
        s.rho = s.rho + (inv + mul_inverse(pred)) * Complex(dt);
    }
    s.rho.add_to(0, Complex(-dB0));
    s.B += dB0;
    s.t += dt;
}

void step_internal_heisenberg(SLEPathState& s, const std::vector<double>& dB, SignConvention sign)
{
    if (dB.size() < s.heis.size()) throw std::invalid_argument("step_internal_heisenberg: too few increments");
    double sg = sign == SignConvention::appC ? 1.0 : -1.0;
    CS u = inverse_rho(s, internal_window(s));
    for (std::size_t i = 0; i < s.heis.size(); ++i) s.heis[i] += u * Complex(sg * dB[i]);
}

void step_internal_sl2(SLEPathState& s, const double dB[3], double dt, double tau, SignConvention sign)
{
    double sg = sign == SignConvention::appC ? 1.0 : -1.0;
    const double b1 = sg * dB[0], b2 = sg * dB[1], b3 = sg * dB[2];
    const int M = internal_window(s);
    CS u = inverse_rho(s, M);
    const Complex w = Complex(b2, b3) * kInvSqrt2; // (dB2 + i dB3)/sqrt2
    CS e2h = exp_series(s.h * Complex(2.0));
    CS fu = s.f * u;
    CS ffu = s.f * fu;

    CS de = e2h * u * (-w);
    CS dh = u * u * Complex(-tau * dt / 2) + u * Complex(-b1 * kInvSqrt2) + fu * w;
    CS df = fu * Complex(-std::sqrt(2.0) * b1) - (u - ffu) * Complex(b2 * kInvSqrt2) +
            (u + ffu) * (I * b3 * kInvSqrt2);
    s.e += de;
    s.h += dh;
    s.f += df;
}

Mat2 theta_from_gauss(const CS& e, const CS& h, const CS& f)
{
    CS eh = exp_series(h), emh = exp_series(-h);
    CS emf = emh * f;
    return {eh + e * emf, e * emh, emf, emh};
}

void gauss_from_theta(const Mat2& th, CS& e, CS& h, CS& f)
{
    // D = e^{-h} keeps constant term 1 under right multiplication by
    // 1 + O(zeta^-1); anything else means the state was corrupted
    if (th.d.coeff(0) != Complex(1.0)) throw SingularSeries("Gauss decomposition: D(infinity) != 1");
    h = -log_series(th.d);
    CS dinv = mul_inverse(th.d);
    e = th.b * dinv;
    f = th.c * dinv;
}

void step_multiplicative(SLEPathState& s, const double dB[3], SignConvention sign)
{
    double sg = sign == SignConvention::appC ? 1.0 : -1.0;
    const int M = internal_window(s);
    // left increment exp(-sum_r X_r rho^-1 dB^r) = exp(u K) with K constant and traceless
    Eigen::Matrix2cd X1, X2, X3;
    X1 << 1, 0, 0, -1;
    X2 << 0, 1, 1, 0;
    X3 << 0, I, -I, 0;
    Eigen::Matrix2cd K = -sg * kInvSqrt2 * (X1 * dB[0] + X2 * dB[1] + X3 * dB[2]);
    const Complex s2 = -K.determinant(); // K^2 = s2 * Id

    CS u = inverse_rho(s, M);
    CS C = CS::constant(Var::zeta, Complex(1.0), -M), Sn(Var::zeta, -M);
    CS upow = u;
    Complex c = 1.0;
    for (int n = 1; n <= M; ++n) {
        c /= double(n);
        if (n % 2 == 1)
            Sn += upow * c;
        else
            C += upow * c;
        upow = upow * u;
        if (n % 2 == 1) c *= s2;
    }
    if (!s.theta) s.theta = theta_from_gauss(s.e, s.h, s.f);
    const Mat2& t = *s.theta;
    CS E00 = C + Sn * K(0, 0), E01 = Sn * K(0, 1), E10 = Sn * K(1, 0), E11 = C + Sn * K(1, 1);
    Mat2 nt{t.a * E00 + t.b * E10, t.a * E01 + t.b * E11, t.c * E00 + t.d * E10, t.c * E01 + t.d * E11};
    s.theta = nt;
    gauss_from_theta(nt, s.e, s.h, s.f);
}

void step(const PathConfig& cfg, SLEPathState& s, const std::vector<double>& dB)
{
    switch (cfg.kase) {
    case Case::virasoro_only: break;
    case Case::heisenberg:
        step_internal_heisenberg(s, std::vector<double>(dB.begin() + 1, dB.end()), cfg.sign);
        break;
    case Case::sl2:
        if (cfg.integrator == Integrator::coefficient_euler)
            step_internal_sl2(s, dB.data() + 1, cfg.dt, cfg.sl2_tau(), cfg.sign);
        else
            step_multiplicative(s, dB.data() + 1, cfg.sign);
        break;
    }
    step_loewner(s, dB[0], cfg.dt, cfg.scheme);
}

std::vector<long> sample_steps(const PathConfig& cfg, const std::vector<double>& times)
{
    std::vector<long> out;
    for (double t : times) {
        long k = std::lround(t / cfg.dt);
        if (t < 0 || std::abs(double(k) * cfg.dt - t) > 1e-9 * std::max(1.0, t))
            throw std::invalid_argument("sample time " + fmt(t) + " is not on the dt grid");
        if (k > cfg.steps()) throw std::invalid_argument("sample time " + fmt(t) + " exceeds T");
        if (!out.empty() && k < out.back()) throw std::invalid_argument("sample times must be nondecreasing");
        out.push_back(k);
    }
    return out;
}

void simulate_path(const PathConfig& cfg, std::uint64_t path, const std::vector<long>& steps,
                   const std::function<void(std::size_t, const SLEPathState&)>& on_sample)
{
    if (steps.empty()) return;
    BrownianDriver drv(cfg, path);
    SLEPathState s = initial_state(cfg);
    std::size_t j = 0;
    for (long n = 0;; ++n) {
        while (j < steps.size() && steps[j] == n) on_sample(j++, s);
        if (j == steps.size()) break;
        step(cfg, s, drv.next(cfg.dt));
    }
}

unsigned thread_count()
{
    if (const char* v = std::getenv("SLE_LAB_THREADS")) {
        int n = std::atoi(v);
        if (n > 0) return static_cast<unsigned>(n);
    }
    return 1;
}

void parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn)
{
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (std::size_t p; (p = next.fetch_add(1)) < n;) fn(p);
    };
    unsigned nt = static_cast<unsigned>(std::min<std::size_t>(thread_count(), n));
    if (nt <= 1) {
        worker();
        return;
    }
    std::vector<std::thread> pool;
    std::vector<std::exception_ptr> errs(nt);
    for (unsigned i = 0; i < nt; ++i)
        pool.emplace_back([&, i] {
            try {
                worker();
            } catch (...) {
                errs[i] = std::current_exception();
                next = n;
            }
        });
    for (auto& th : pool) th.join();
    for (auto& e : errs)
        if (e) std::rethrow_exception(e);
}

TrajectoryTable run_paths(const PathConfig& cfg, std::size_t n_paths, const std::vector<double>& times,
                          std::size_t n_obs, const Observer& obs)
{
    cfg.require_valid();
    TrajectoryTable tab;
    tab.times = times;
    tab.n_obs = n_obs;
    if (n_paths == 0 || times.empty() || n_obs == 0) return tab;
    auto steps = sample_steps(cfg, times);
    tab.values.assign(n_paths * times.size() * n_obs, Complex(0.0));
    parallel_for(n_paths, [&](std::size_t p) {
        simulate_path(cfg, p, steps, [&](std::size_t k, const SLEPathState& s) {
            auto v = obs(s);
            if (v.size() != n_obs) throw std::logic_error("observer returned the wrong number of values");
            std::copy(v.begin(), v.end(), tab.values.begin() + std::ptrdiff_t((p * times.size() + k) * n_obs));
        });
    });
    return tab;
}

} // namespace sle
