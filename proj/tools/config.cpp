#include "config.hpp"

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

namespace sle::cli {

using nlohmann::json;

const char* suite_name(Suite s)
{
    switch (s) {
    case Suite::algebra_verify: return "algebra-verify";
    case Suite::simulate: return "simulate";
    case Suite::drift_test: return "drift-test";
    case Suite::symmetry_verify: return "symmetry-verify";
    }
    return "?";
}

std::optional<Suite> parse_suite(const std::string& s)
{
    for (Suite x : {Suite::algebra_verify, Suite::simulate, Suite::drift_test, Suite::symmetry_verify})
        if (s == suite_name(x)) return x;
    return std::nullopt;
}

namespace {

const std::set<std::string> kCommon{"suite", "seed", "output_dir", "sign_convention", "scalar_mode"};
const std::set<std::string> kPath{"case", "kappa", "tau", "tau_vec", "lambda", "rank", "dt", "T", "N", "M",
                                  "integrator", "loewner_scheme", "intentional_violation"};
const std::set<std::string> kPaths{"n_paths", "sample_times", "probes", "observables", "threshold", "residue_identity"};
const std::set<std::string> kAlgebra{"degree", "depth"};
const std::set<std::string> kSymmetry{"K", "d_max", "l_max", "oracle_degree", "random_states", "genfun_depth", "variant"};

bool simulates(Suite s) { return s == Suite::simulate || s == Suite::drift_test; }

std::vector<std::string> required_keys(Suite s)
{
    if (simulates(s)) return {"case", "kappa"};
    return {};
}

std::string join(const std::vector<std::string>& v)
{
    std::string out;
    for (const auto& s : v) out += (out.empty() ? "" : ", ") + s;
    return out.empty() ? "none" : out;
}

// Typed field readers that record errors instead of throwing.
struct Reader {
    const json& j;
    std::vector<std::string>& err;

    bool has(const char* k) const { return j.contains(k); }

    template <class T>
    bool get(const char* k, T& out)
    {
        if (!j.contains(k)) return false;
        const json& v = j.at(k);
        try {
            if constexpr (std::is_same_v<T, bool>) {
                if (!v.is_boolean()) throw std::invalid_argument("");
            } else if constexpr (std::is_integral_v<T>) {
                if (!v.is_number_integer()) throw std::invalid_argument("");
            } else if constexpr (std::is_floating_point_v<T>) {
                if (!v.is_number()) throw std::invalid_argument("");
            } else if constexpr (std::is_same_v<T, std::string>) {
                if (!v.is_string()) throw std::invalid_argument("");
            }
            out = v.get<T>();
            return true;
        } catch (const std::exception&) {
            err.push_back(std::string("'") + k + "' has the wrong type: " + v.dump());
            return false;
        }
    }

    bool complex_value(const json& v, Complex& z)
    {
        if (v.is_number()) {
            z = Complex(v.get<double>(), 0.0);
            return true;
        }
        if (v.is_array() && v.size() == 2 && v[0].is_number() && v[1].is_number()) {
            z = Complex(v[0].get<double>(), v[1].get<double>());
            return true;
        }
        return false;
    }
};

std::string fmt(double x)
{
    std::ostringstream os;
    os << x;
    return os.str();
}

} // namespace

ParseResult parse_config_text(const std::string& text, Suite suite)
{
    ParseResult r;
    auto& err = r.errors;
    if (text.find_first_not_of(" \t\r\n") == std::string::npos) {
        err.push_back(std::string("empty config; required keys for ") + suite_name(suite) + ": " + join(required_keys(suite)));
        return r;
    }
    json j;
    try {
        j = json::parse(text);
    } catch (const json::parse_error& e) {
        err.push_back(std::string("config is not valid JSON: ") + e.what());
        return r;
    }
    if (!j.is_object()) {
        err.push_back("config must be a JSON object");
        return r;
    }

    std::set<std::string> allowed = kCommon;
    if (simulates(suite)) {
        allowed.insert(kPath.begin(), kPath.end());
        allowed.insert(kPaths.begin(), kPaths.end());
    }
    if (suite == Suite::algebra_verify) allowed.insert(kAlgebra.begin(), kAlgebra.end());
    if (suite == Suite::symmetry_verify) {
        allowed.insert(kSymmetry.begin(), kSymmetry.end());
        allowed.insert("case");
    }
    for (const auto& [k, v] : j.items())
        if (!allowed.count(k)) err.push_back("unknown key '" + k + "' for suite " + suite_name(suite));
    for (const auto& k : required_keys(suite))
        if (!j.contains(k)) err.push_back("missing required key '" + k + "'");

    ExperimentConfig c;
    c.suite = suite;
    c.raw = j;
    Reader rd{j, err};

    std::string s;
    if (rd.get("suite", s) && s != suite_name(suite))
        err.push_back("config is for suite '" + s + "' but '" + suite_name(suite) + "' was requested");
    long long seed = 1;
    if (rd.get("seed", seed)) {
        if (seed < 0) err.push_back("seed must be >= 0");
        c.path.seed = static_cast<std::uint64_t>(seed);
    }
    rd.get("output_dir", c.out_dir);
    if (rd.get("sign_convention", s)) {
        if (s == "appC")
            c.path.sign = SignConvention::appC;
        else if (s == "sec5")
            c.path.sign = SignConvention::sec5;
        else
            err.push_back("sign_convention must be appC or sec5, got '" + s + "'");
    }
    if (rd.get("scalar_mode", c.scalar_mode)) {
        bool exact_suite = suite == Suite::algebra_verify || suite == Suite::symmetry_verify;
        if (c.scalar_mode != "exact" && c.scalar_mode != "complex")
            err.push_back("scalar_mode must be exact or complex");
        else if (exact_suite && c.scalar_mode != "exact")
            err.push_back(std::string(suite_name(suite)) + " runs in exact arithmetic only");
        else if (!exact_suite && c.scalar_mode != "complex")
            err.push_back(std::string(suite_name(suite)) + " runs in complex floating point only");
    } else {
        c.scalar_mode = simulates(suite) ? "complex" : "exact";
    }

    if (simulates(suite)) {
        PathConfig& p = c.path;
        if (rd.get("case", s)) {
            if (s == "sl2")
                p.kase = Case::sl2;
            else if (s == "heisenberg")
                p.kase = Case::heisenberg;
            else if (s == "virasoro" || s == "virasoro-only")
                p.kase = Case::virasoro_only;
            else
                err.push_back("case must be sl2, heisenberg or virasoro, got '" + s + "'");
        }
        rd.get("kappa", p.kappa);
        double tau = 0;
        if (rd.get("tau", tau)) p.tau = tau;
        if (rd.has("tau_vec")) {
            const json& v = j.at("tau_vec");
            if (!v.is_array())
                err.push_back("'tau_vec' must be an array of numbers");
            else
                for (const auto& x : v) {
                    if (!x.is_number()) {
                        err.push_back("'tau_vec' entries must be numbers");
                        break;
                    }
                    p.tau_vec.push_back(x.get<double>());
                }
        }
        rd.get("lambda", p.lambda);
        rd.get("rank", p.rank);
        rd.get("dt", p.dt);
        rd.get("T", p.T);
        rd.get("N", p.N);
        rd.get("M", p.M);
        rd.get("intentional_violation", p.intentional_violation);
        if (rd.get("integrator", s)) {
            if (s == "coefficient-euler" || s == "euler")
                p.integrator = Integrator::coefficient_euler;
            else if (s == "multiplicative")
                p.integrator = Integrator::multiplicative;
            else
                err.push_back("integrator must be coefficient-euler or multiplicative, got '" + s + "'");
        }
        if (rd.get("loewner_scheme", s)) {
            if (s == "euler")
                p.scheme = LoewnerScheme::euler;
            else if (s == "heun")
                p.scheme = LoewnerScheme::heun;
            else
                err.push_back("loewner_scheme must be euler or heun, got '" + s + "'");
        }
        for (const auto& e : p.validate()) err.push_back(e);

        long long n = 0;
        if (rd.get("n_paths", n)) {
            if (n < 1)
                err.push_back("n_paths must be >= 1");
            else
                c.n_paths = static_cast<std::size_t>(n);
        }
        if (rd.get("threshold", c.threshold) && !(c.threshold > 0)) err.push_back("threshold must be > 0");
        rd.get("residue_identity", c.residue_identity);
        if (c.residue_identity && p.kase != Case::heisenberg)
            err.push_back("residue_identity needs case heisenberg");
        if (rd.has("sample_times")) {
            const json& v = j.at("sample_times");
            if (!v.is_array() || v.empty())
                err.push_back("'sample_times' must be a non-empty array of numbers");
            else
                for (const auto& x : v) {
                    if (!x.is_number()) {
                        err.push_back("'sample_times' entries must be numbers");
                        break;
                    }
                    c.sample_times.push_back(x.get<double>());
                }
        } else if (p.dt > 0 && p.T > 0) {
            for (int k = 1; k <= 5; ++k) c.sample_times.push_back(p.T * k / 5);
            try {
                sample_steps(p, c.sample_times);
            } catch (const std::exception&) {
                c.sample_times = {p.T};
            }
        }
        for (std::size_t i = 1; i < c.sample_times.size(); ++i)
            if (!(c.sample_times[i] > c.sample_times[i - 1])) {
                err.push_back("sample_times must be strictly increasing");
                break;
            }
        if (p.validate().empty() && !c.sample_times.empty()) {
            try {
                sample_steps(p, c.sample_times);
            } catch (const std::exception& e) {
                err.push_back(std::string("sample_times: ") + e.what());
            }
        }
        if (rd.has("probes")) {
            const json& v = j.at("probes");
            c.probes.clear();
            if (!v.is_array() || v.empty()) {
                err.push_back("'probes' must be a non-empty array of numbers or [re, im] pairs");
            } else {
                for (const auto& x : v) {
                    Complex z;
                    if (!rd.complex_value(x, z)) {
                        err.push_back("probe " + x.dump() + " is not a number or [re, im] pair");
                        continue;
                    }
                    if (std::abs(z) < kZMin)
                        err.push_back("probe |z| = " + fmt(std::abs(z)) + " is below z_min = " + fmt(kZMin));
                    c.probes.push_back(z);
                }
            }
        }
        if (rd.has("observables")) {
            const json& v = j.at("observables");
            if (!v.is_array())
                err.push_back("'observables' must be an array of strings");
            else
                for (const auto& x : v) {
                    if (!x.is_string()) {
                        err.push_back("'observables' entries must be strings");
                        break;
                    }
                    c.observables.push_back(x.get<std::string>());
                }
        }
        resolve_observables(c, &err);
    }

    if (suite == Suite::algebra_verify) {
        if (rd.get("degree", c.degree) && (c.degree < 1 || c.degree > 6)) err.push_back("degree must be in 1..6");
        if (rd.get("depth", c.depth) && (c.depth < 1 || c.depth > 8)) err.push_back("depth must be in 1..8");
    }

    if (suite == Suite::symmetry_verify) {
        SymmetryOptions& o = c.symmetry;
        if (rd.get("case", s) && s != "sl2") err.push_back("symmetry-verify is defined for case sl2 only");
        rd.get("K", o.K);
        rd.get("d_max", o.dmax);
        rd.get("l_max", o.lmax);
        rd.get("oracle_degree", o.oracle_degree);
        rd.get("random_states", o.random_states);
        rd.get("genfun_depth", o.genfun_depth);
        o.seed = static_cast<unsigned>(c.path.seed);
        if (rd.get("variant", s)) {
            if (s == "derived")
                o.variant = SymVariant::derived;
            else if (s == "printed")
                o.variant = SymVariant::printed;
            else
                err.push_back("variant must be derived or printed, got '" + s + "'");
        }
        if (o.dmax < 0) err.push_back("d_max must be >= 0");
        if (o.lmax < 0) err.push_back("l_max must be >= 0");
        if (o.random_states < 0) err.push_back("random_states must be >= 0");
        if (o.oracle_degree < 0) err.push_back("oracle_degree must be >= 0");
        if (o.genfun_depth < 1) err.push_back("genfun_depth must be >= 1");
        if (o.dmax >= 0 && o.lmax >= 0 && o.K < safe_window(o.dmax, o.lmax))
            err.push_back("K = " + std::to_string(o.K) + " is below the safe window " +
                          std::to_string(safe_window(o.dmax, o.lmax)) + " for d_max = " + std::to_string(o.dmax) +
                          ", l_max = " + std::to_string(o.lmax));
        if (o.oracle_degree > 0 && o.oracle_degree + 2 > o.K)
            err.push_back("oracle_degree + 2 must not exceed K");
        if (o.genfun_depth > o.K) err.push_back("genfun_depth must not exceed K");
    }

    if (err.empty()) r.config = std::move(c);
    return r;
}

ParseResult parse_config_file(const std::string& path, Suite suite)
{
    std::ifstream in(path);
    if (!in) return {std::nullopt, {"cannot open config file '" + path + "'"}};
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_config_text(ss.str(), suite);
}

std::vector<ObservableSpec> resolve_observables(const ExperimentConfig& cfg, std::vector<std::string>* errors)
{
    const PathConfig& p = cfg.path;
    std::vector<std::string> names = cfg.observables;
    if (names.empty()) {
        if (p.kase == Case::sl2) names = {"sl2", "bb"};
        if (p.kase == Case::heisenberg) names = {"heis"};
        if (p.kase == Case::virasoro_only) names = {"bb"};
    }
    std::vector<ObservableSpec> out;
    auto fail = [&](const std::string& m) {
        if (errors) errors->push_back(m);
    };
    for (Complex z : cfg.probes) {
        // everything this case can produce at z
        std::vector<ObservableSpec> all{ObservableSpec::bb(p.kappa, z)};
        if (p.kase == Case::sl2) {
            for (const auto& o : sl2_observables(z)) all.push_back(o);
            for (const auto& o : sl2_observables(z, Variant::printed)) all.push_back(o);
        }
        if (p.kase == Case::heisenberg) {
            for (int i = 0; i < p.rank; ++i) all.push_back(ObservableSpec::heis_current(i, p.lambda, z));
            all.push_back(ObservableSpec::heis_virasoro(p.lambda, z));
        }
        for (const auto& n : names) {
            std::size_t before = out.size();
            for (const auto& o : all) {
                const std::string id = o.id();
                bool printed = id.size() > 8 && id.compare(id.size() - 8, 8, ".printed") == 0;
                bool take = id == n || (n == "bb" && o.kind == ObsKind::VirasoroBB) ||
                            (n == "sl2" && id.rfind("sl2.", 0) == 0 && !printed) ||
                            (n == "sl2.printed" && id.rfind("sl2.", 0) == 0 && printed) ||
                            (n == "heis" && id.rfind("heis.", 0) == 0);
                if (take) out.push_back(o);
            }
            if (out.size() == before && z == cfg.probes.front())
                fail("observable '" + n + "' is not available for case " + case_name(p.kase));
        }
    }
    return out;
}

} // namespace sle::cli
