#include "run.hpp"

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <ostream>

#ifndef SLE_LAB_VERSION
#define SLE_LAB_VERSION "0.0.0"
#endif

namespace sle::cli {

using nlohmann::json;
namespace fs = std::filesystem;

bool RunManifest::pass() const
{
    for (const auto& [n, ok] : suites)
        if (!ok) return false;
    return !suites.empty();
}

json RunManifest::to_json() const
{
    json j;
    j["hash"] = hash;
    j["config"] = config;
    j["input"] = input;
    j["seed"] = seed;
    j["version"] = version;
    j["wall_seconds"] = wall_seconds;
    j["suites"] = json::object();
    for (const auto& [n, ok] : suites) j["suites"][n] = ok ? "pass" : "fail";
    j["pass"] = pass();
    j["files"] = files;
    return j;
}

namespace {

std::string num(double x)
{
    if (x == 0) x = 0;  // no "-0"
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

json complex_json(Complex z) { return json::array({z.real(), z.imag()}); }

std::uint64_t fnv1a(const std::string& s)
{
    std::uint64_t h = 1469598103934665603ull;
    for (unsigned char ch : s) {
        h ^= ch;
        h *= 1099511628211ull;
    }
    return h;
}

json suite_json(const SuiteResult& r)
{
    json j;
    j["name"] = r.name;
    j["pass"] = r.pass();
    j["seconds"] = r.seconds;
    j["checks"] = json::array();
    for (const auto& c : r.checks) j["checks"].push_back({{"name", c.name}, {"pass", c.pass}, {"detail", c.detail}});
    return j;
}

class Artifacts {
public:
    Artifacts(const fs::path& dir, std::string hash, RunManifest& m) : dir_(dir), hash_(std::move(hash)), m_(m)
    {
        std::error_code ec;
        fs::create_directories(dir_, ec);
        if (ec) throw std::runtime_error("cannot create output directory '" + dir_.string() + "': " + ec.message());
    }

    // <stem>.<hash>.<ext>, so every artifact names its manifest
    std::ofstream open(const std::string& stem, const std::string& ext)
    {
        fs::path p = dir_ / (stem + "." + hash_.substr(0, 12) + "." + ext);
        std::ofstream out(p, std::ios::binary);
        if (!out) throw std::runtime_error("cannot write '" + p.string() + "'");
        m_.files.push_back(p.filename().string());
        return out;
    }

    void close(std::ofstream& out, const std::string& what)
    {
        out.close();
        if (!out) throw std::runtime_error("write failed for " + what + " in '" + dir_.string() + "'");
    }

private:
    fs::path dir_;
    std::string hash_;
    RunManifest& m_;
};

void run_algebra(const ExperimentConfig& c, Artifacts& art, RunManifest& m, std::ostream& log)
{
    std::vector<SuiteResult> rs;
    rs.push_back(verify_singular(static_cast<unsigned>(c.path.seed)));
    rs.push_back(verify_annihilators());
    rs.push_back(verify_sugawara(c.degree));
    rs.push_back(verify_conjugations(c.degree, c.depth, static_cast<unsigned>(c.path.seed)));
    json j = json::array();
    for (const auto& r : rs) {
        log << (r.pass() ? "PASS " : "FAIL ") << r.name << " (" << r.seconds << " s)\n";
        for (const auto& ch : r.checks)
            if (!ch.pass) log << "  failed: " << ch.name << " " << ch.detail << "\n";
        m.suites.emplace_back(r.name, r.pass());
        j.push_back(suite_json(r));
    }
    auto out = art.open("algebra", "json");
    out << j.dump(2) << "\n";
    art.close(out, "algebra report");
}

void run_simulate(const ExperimentConfig& c, Artifacts& art, RunManifest& m, std::ostream& log)
{
    auto obs = resolve_observables(c);
    TrajectoryTable tab = run_paths(c.path, c.n_paths, c.sample_times, obs.size(), [&](const SLEPathState& s) {
        std::vector<Complex> v;
        v.reserve(obs.size());
        for (const auto& o : obs) v.push_back(eval_observable(s, o));
        return v;
    });
    auto out = art.open("trajectories", "csv");
    out << "path,sample_time,observable_id,probe,value_re,value_im\n";
    for (std::size_t p = 0; p < tab.n_paths(); ++p)
        for (std::size_t k = 0; k < tab.times.size(); ++k)
            for (std::size_t j = 0; j < obs.size(); ++j) {
                Complex v = tab.at(p, k, j);
                out << p << "," << num(tab.times[k]) << "," << obs[j].id() << "," << probe_string(obs[j]) << ","
                    << num(v.real()) << "," << num(v.imag()) << "\n";
            }
    art.close(out, "trajectories");
    log << "simulated " << c.n_paths << " paths, " << obs.size() << " observables\n";
    m.suites.emplace_back("simulate", true);
}

void run_drift(const ExperimentConfig& c, Artifacts& art, RunManifest& m, std::ostream& log)
{
    auto obs = resolve_observables(c);
    auto reps = drift_test(c.path, obs, c.n_paths, c.sample_times, c.threshold);
    auto out = art.open("drift", "csv");
    out << "observable_id,probe,sample_time,mean_re,mean_im,se_re,se_im,zscore,pass\n";
    bool all = true;
    for (const auto& r : reps) {
        for (std::size_t k = 0; k < r.times.size(); ++k)
            out << r.id << "," << r.probe << "," << num(r.times[k]) << "," << num(r.mean[k].real()) << ","
                << num(r.mean[k].imag()) << "," << num(r.se[k].real()) << "," << num(r.se[k].imag()) << "," << num(r.z[k])
                << "," << (r.z[k] <= r.threshold ? "true" : "false") << "\n";
        if (!r.pass) log << "  drift: " << r.id << " at " << r.probe << " max z = " << r.max_z << "\n";
        all = all && r.pass;
    }
    art.close(out, "drift table");
    log << (all ? "PASS" : "FAIL") << " drift-test: " << reps.size() << " observables, threshold " << c.threshold
        << " sigma\n";
    m.suites.emplace_back("drift-test", all);

    if (c.residue_identity) {
        std::vector<double> times{0.0};
        for (double t : c.sample_times)
            if (t > 0) times.push_back(t);
        ResidueReport rr = residue_report(c.path, c.n_paths, times, c.probes.front());
        auto rc = art.open("residue_identity", "csv");
        rc << "sample_time,mean_lhs_re,mean_lhs_im,mean_rhs_re,mean_rhs_im,mean_diff_re,mean_diff_im,se_diff_re,se_diff_im,"
              "max_abs_diff\n";
        for (std::size_t k = 0; k < rr.times.size(); ++k)
            rc << num(rr.times[k]) << "," << num(rr.mean_lhs[k].real()) << "," << num(rr.mean_lhs[k].imag()) << ","
               << num(rr.mean_rhs[k].real()) << "," << num(rr.mean_rhs[k].imag()) << "," << num(rr.mean_diff[k].real())
               << "," << num(rr.mean_diff[k].imag()) << "," << num(rr.se_diff[k].real()) << ","
               << num(rr.se_diff[k].imag()) << "," << num(rr.max_abs_diff[k]) << "\n";
        art.close(rc, "residue identity report");
        // the pathwise identity is reported, not asserted
        log << (rr.zero_at_start ? "PASS" : "FAIL") << " residue identity report (both sides zero at t = 0)\n";
        m.suites.emplace_back("residue-identity-report", rr.zero_at_start);
    }
}

void run_symmetry(const ExperimentConfig& c, Artifacts& art, RunManifest& m, std::ostream& log)
{
    SymmetryResult r = verify_symmetry(c.symmetry);
    json j = suite_json(r.suite);
    j["brackets"] = json::object();
    for (const auto& b : r.brackets)
        j["brackets"][b.key()] = {{"idA", std::string(1, b.a)}, {"l", b.l},
                                  {"idB", std::string(1, b.b)}, {"m", b.m},
                                  {"states", b.states}, {"checked_coeffs", b.checked_coeffs},
                                  {"nonzero", b.nonzero}, {"max_residual", b.max_residual},
                                  {"pass", b.pass()}};
    auto out = art.open("symmetry", "json");
    out << j.dump(2) << "\n";
    art.close(out, "symmetry report");

    auto g = art.open("generating_functions", "csv");
    g << "observable_id,n,from_ops_re,from_ops_im,closed_form_re,closed_form_im,residual\n";
    for (const auto& gf : r.genfun) {
        std::string id = ObservableSpec::sl2_current(gf.X == 'L' ? 'E' : gf.X, gf.tops.bra, gf.tops.ket, 4.0).id();
        if (gf.X == 'L') id = ObservableSpec::sl2_virasoro(gf.tops.bra, gf.tops.ket, 4.0).id();
        for (std::size_t n = 0; n < gf.from_ops.size(); ++n)
            g << id << "," << n << "," << num(gf.from_ops[n].real()) << "," << num(gf.from_ops[n].imag()) << ","
              << num(gf.closed_form[n].real()) << "," << num(gf.closed_form[n].imag()) << ","
              << num(std::abs(gf.from_ops[n] - gf.closed_form[n])) << "\n";
    }
    art.close(g, "generating functions");
    log << (r.suite.pass() ? "PASS " : "FAIL ") << "symmetry (" << r.suite.seconds << " s)\n";
    for (const auto& ch : r.suite.checks) log << "  " << (ch.pass ? "ok   " : "FAIL ") << ch.name << " " << ch.detail << "\n";
    m.suites.emplace_back("symmetry", r.suite.pass());
}

} // namespace

json resolved_config(const ExperimentConfig& c)
{
    json j;
    j["suite"] = suite_name(c.suite);
    j["seed"] = c.path.seed;
    j["sign_convention"] = sign_name(c.path.sign);
    j["scalar_mode"] = c.scalar_mode;
    switch (c.suite) {
    case Suite::algebra_verify:
        j["degree"] = c.degree;
        j["depth"] = c.depth;
        break;
    case Suite::symmetry_verify: {
        const auto& o = c.symmetry;
        j["K"] = o.K;
        j["d_max"] = o.dmax;
        j["l_max"] = o.lmax;
        j["oracle_degree"] = o.oracle_degree;
        j["random_states"] = o.random_states;
        j["genfun_depth"] = o.genfun_depth;
        j["variant"] = o.variant == SymVariant::derived ? "derived" : "printed";
        break;
    }
    case Suite::simulate:
    case Suite::drift_test: {
        const PathConfig& p = c.path;
        j["case"] = case_name(p.kase);
        j["kappa"] = p.kappa;
        if (p.kase == Case::sl2) j["tau"] = p.sl2_tau();
        if (p.kase == Case::heisenberg) {
            j["tau_vec"] = p.internal_variances();
            j["lambda"] = p.lambda;
            j["rank"] = p.rank;
        }
        j["dt"] = p.dt;
        j["T"] = p.T;
        j["N"] = p.N;
        j["M"] = p.M;
        j["integrator"] = integrator_name(p.integrator);
        j["loewner_scheme"] = scheme_name(p.scheme);
        j["intentional_violation"] = p.intentional_violation;
        j["n_paths"] = c.n_paths;
        j["sample_times"] = c.sample_times;
        j["probes"] = json::array();
        for (Complex z : c.probes) j["probes"].push_back(complex_json(z));
        std::vector<std::string> ids;
        for (const auto& o : resolve_observables(c))
            if (o.z == c.probes.front()) ids.push_back(o.id());
        j["observables"] = ids;
        j["threshold"] = c.threshold;
        j["residue_identity"] = c.residue_identity;
        break;
    }
    }
    return j;
}

std::string config_hash(const ExperimentConfig& c)
{
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx",
                  static_cast<unsigned long long>(fnv1a(resolved_config(c).dump() + "|" + SLE_LAB_VERSION)));
    return buf;
}

RunManifest run_suite(const ExperimentConfig& c, std::ostream& log)
{
    auto t0 = std::chrono::steady_clock::now();
    RunManifest m;
    m.config = resolved_config(c);
    m.input = c.raw;
    m.hash = config_hash(c);
    m.seed = c.path.seed;
    m.version = SLE_LAB_VERSION;
    Artifacts art(c.out_dir, m.hash, m);
    log << suite_name(c.suite) << " manifest " << m.hash << "\n";
    switch (c.suite) {
    case Suite::algebra_verify: run_algebra(c, art, m, log); break;
    case Suite::simulate: run_simulate(c, art, m, log); break;
    case Suite::drift_test: run_drift(c, art, m, log); break;
    case Suite::symmetry_verify: run_symmetry(c, art, m, log); break;
    }
    m.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    fs::path mp = fs::path(c.out_dir) / "manifest.json";
    std::ofstream out(mp);
    if (!out) throw std::runtime_error("cannot write '" + mp.string() + "'");
    out << m.to_json().dump(2) << "\n";
    if (!out) throw std::runtime_error("write failed for '" + mp.string() + "'");
    return m;
}

} // namespace sle::cli
