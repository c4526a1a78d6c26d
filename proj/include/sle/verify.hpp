#pragma once

#include "sle/martingales.hpp"
#include "sle/symmetry.hpp"

#include <string>
#include <vector>

namespace sle {

struct Check {
    std::string name;
    bool pass = false;
    std::string detail;
};

struct SuiteResult {
    std::string name;
    std::vector<Check> checks;
    double seconds = 0;
    bool pass() const;
    void add(std::string n, bool ok, std::string detail = {});
};

// Exact suites on the graded modules.
SuiteResult verify_singular(unsigned seed = 1);
SuiteResult verify_annihilators();
SuiteResult verify_sugawara(int degree = 4);
SuiteResult verify_conjugations(int degree = 4, int depth = 4, unsigned seed = 1);

struct SymmetryOptions {
    int K = 8;
    int dmax = 3;
    int lmax = 2;
    int oracle_degree = 3;  // 0 skips the module oracle
    int random_states = 4;
    int genfun_depth = 6;
    unsigned seed = 1;
    SymVariant variant = SymVariant::derived;
};

struct SymmetryResult {
    SuiteResult suite;
    std::vector<CommutatorReport> brackets;
    std::vector<GenFunReport> genfun;
};

SymmetryResult verify_symmetry(const SymmetryOptions& o);

// Mean over paths of sum_{X = e,h,f} |X_-2^euler(T) - X_-2^mult(T)|^2 on shared
// increments, for each dt.
struct IntegratorComparison {
    std::vector<double> dts;
    std::vector<double> msq;
    double ratio = 0;
};

IntegratorComparison compare_integrators(PathConfig cfg, std::size_t n_paths, const std::vector<double>& dts);

// kappa = 0 against sqrt(z^2 + 4t), and a1 = 2t on stochastic paths.
SuiteResult verify_deterministic(double dt = 1e-4, double T = 0.25, int depth = 7, std::size_t stochastic_paths = 200);

struct ResidueReport {
    std::vector<double> times;
    std::vector<Complex> mean_lhs, mean_rhs, mean_diff, se_diff;
    std::vector<double> max_abs_diff;
    bool zero_at_start = false;
};

ResidueReport residue_report(const PathConfig& cfg, std::size_t n_paths, const std::vector<double>& times, Complex z);

} // namespace sle
