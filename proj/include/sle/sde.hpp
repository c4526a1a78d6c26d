#pragma once

#include "sle/series.hpp"

#include <cstdint>
#include <functional>
#include <optional>
#include <random>
#include <string>
#include <vector>

namespace sle {

enum class Case { virasoro_only, heisenberg, sl2 };
enum class Integrator { coefficient_euler, multiplicative };
// Heun only touches the Loewner drift; the noise there is additive so the
// scheme stays consistent for the Ito equation.
enum class LoewnerScheme { euler, heun };
// appC: internal noise enters as printed in the sl2 proposition and the
// Heisenberg SDE; sec5: every internal increment is negated.
enum class SignConvention { appC, sec5 };

const char* case_name(Case c);
const char* integrator_name(Integrator i);
const char* scheme_name(LoewnerScheme s);
const char* sign_name(SignConvention s);

struct PathConfig {
    Case kase = Case::sl2;
    double kappa = 2.0;
    std::optional<double> tau;           // sl2 override
    std::vector<double> tau_vec;         // heisenberg override
    double lambda = 0.0;                 // Heisenberg weight along direction 0
    int rank = 1;                        // Heisenberg rank
    double dt = 1e-3;
    double T = 0.25;
    int N = 16;                          // rho exact down to z^-N
    int M = 12;                          // internal series exact down to zeta^-M
    std::uint64_t seed = 1;
    Integrator integrator = Integrator::coefficient_euler;
    LoewnerScheme scheme = LoewnerScheme::heun;
    SignConvention sign = SignConvention::appC;
    // lets tau break the annihilator relation (negative controls)
    bool intentional_violation = false;

    // every problem, not just the first
    std::vector<std::string> validate() const;
    void require_valid() const;

    // Variances of the internal Brownian motions.
    std::vector<double> internal_variances() const;
    double sl2_tau() const;
    int internal_dim() const;
    long steps() const;
};

// Increments for one path. Stream 0 drives the Loewner equation, streams
// 1..dim the internal processes; each stream owns its own engine seeded by
// (seed, path, stream).
class BrownianDriver {
public:
    BrownianDriver(const PathConfig& cfg, std::uint64_t path);
    // dB^(0), ..., dB^(dim) for one step of size dt
    const std::vector<double>& next(double dt);

private:
    std::vector<std::mt19937_64> eng_;
    std::vector<double> sd_;
    std::vector<double> out_;
    std::normal_distribution<double> normal_;
};

struct Mat2 {
    Series<Complex> a, b, c, d;
};

struct SLEPathState {
    double t = 0;
    double B = 0;
    Series<Complex> rho;                // z + r0 + r_{-1} z^-1 + ...
    std::vector<Series<Complex>> heis;  // h^i(zeta)
    Series<Complex> e, h, f;            // Gauss coordinates of Theta
    std::optional<Mat2> theta;          // kept by the multiplicative integrator

    Series<Complex> g() const;          // rho + B
};

SLEPathState initial_state(const PathConfig& cfg);

void step_loewner(SLEPathState& s, double dB0, double dt, LoewnerScheme scheme = LoewnerScheme::euler);
// Internal steps read rho at the left end of the step; call them before
// step_loewner.
void step_internal_heisenberg(SLEPathState& s, const std::vector<double>& dB, SignConvention sign = SignConvention::appC);
void step_internal_sl2(SLEPathState& s, const double dB[3], double dt, double tau,
                       SignConvention sign = SignConvention::appC);
void step_multiplicative(SLEPathState& s, const double dB[3], SignConvention sign = SignConvention::appC);

Mat2 theta_from_gauss(const Series<Complex>& e, const Series<Complex>& h, const Series<Complex>& f);
void gauss_from_theta(const Mat2& th, Series<Complex>& e, Series<Complex>& h, Series<Complex>& f);

// One full step of the configured system.
void step(const PathConfig& cfg, SLEPathState& s, const std::vector<double>& dB);

// Step indices closest to the requested times; throws if a time is off the
// grid or beyond T.
std::vector<long> sample_steps(const PathConfig& cfg, const std::vector<double>& times);

using Observer = std::function<std::vector<Complex>(const SLEPathState&)>;

struct TrajectoryTable {
    std::vector<double> times;
    std::size_t n_obs = 0;
    // values[(path * times.size() + k) * n_obs + j]
    std::vector<Complex> values;
    std::size_t n_paths() const { return times.empty() || n_obs == 0 ? 0 : values.size() / (times.size() * n_obs); }
    const Complex& at(std::size_t path, std::size_t k, std::size_t j) const
    {
        return values[(path * times.size() + k) * n_obs + j];
    }
};

// Simulates one path and calls `on_sample(k, state)` at each sample index.
void simulate_path(const PathConfig& cfg, std::uint64_t path, const std::vector<long>& steps,
                   const std::function<void(std::size_t, const SLEPathState&)>& on_sample);

// Paths run on SLE_LAB_THREADS worker threads (default 1); results are
// stored by path index, so the table does not depend on the thread count.
TrajectoryTable run_paths(const PathConfig& cfg, std::size_t n_paths, const std::vector<double>& times,
                          std::size_t n_obs, const Observer& obs);

unsigned thread_count();

// fn(0), ..., fn(n-1) on thread_count() workers; the first exception is
// rethrown after all workers stop.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn);

} // namespace sle
