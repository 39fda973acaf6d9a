// polyens command-line tool: kernels on grids, Monte Carlo batches and the
// verification suites, written as CSV or JSON.

#include <unistd.h>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "polyens/ensembles.hpp"
#include "polyens/errors.hpp"
#include "polyens/kernels.hpp"
#include "polyens/rmt_sim.hpp"
#include "polyens/verify.hpp"

namespace {

using json = nlohmann::ordered_json;
using namespace polyens;

constexpr double kConditionWarning = 1e12;

struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

const std::vector<std::string> kCommands = {"sample", "kernel", "hard-edge", "borodin", "verify", "density-compare"};

struct KeyInfo {
    std::string help;
};

const std::map<std::string, KeyInfo>& known_keys() {
    static const std::map<std::string, KeyInfo> keys = {
        {"model", {"ginibre, inverse or truncation"}},
        {"n", {"number of points"}},
        {"M", {"number of factors (checked against the length of --nu)"}},
        {"nu", {"comma-separated nu_1..nu_M"}},
        {"tilde-nu", {"comma-separated tilde nu_1..tilde nu_K of the inverse factors"}},
        {"l", {"size of the Haar unitary for the truncation model"}},
        {"alpha", {"Borodin alpha > -1"}},
        {"theta", {"Borodin theta > 0"}},
        {"grid-x", {"comma-separated x values"}},
        {"grid-y", {"comma-separated y values"}},
        {"samples", {"number of draws"}},
        {"seed", {"64-bit seed"}},
        {"tol", {"numerical tolerance"}},
        {"route", {"kernel route"}},
        {"out", {"output path (stdout when absent)"}},
        {"suite", {"verification suite, or all"}},
        {"threads", {"worker threads (default POLYENS_THREADS or the core count)"}},
        {"ks-threshold", {"KS bound for density-compare"}},
    };
    return keys;
}

const std::map<std::string, std::set<std::string>>& allowed_keys() {
    static const std::map<std::string, std::set<std::string>> allowed = {
        {"kernel", {"model", "n", "M", "nu", "tilde-nu", "l", "grid-x", "grid-y", "tol", "route", "out"}},
        {"hard-edge", {"M", "nu", "grid-x", "grid-y", "tol", "route", "out"}},
        {"borodin", {"alpha", "theta", "grid-x", "grid-y", "tol", "out"}},
        {"verify", {"suite", "n", "samples", "seed", "threads", "out"}},
        {"sample", {"model", "n", "M", "nu", "tilde-nu", "l", "samples", "seed", "threads", "out"}},
        {"density-compare",
         {"model", "n", "M", "nu", "tilde-nu", "l", "samples", "seed", "threads", "ks-threshold", "out"}},
    };
    return allowed;
}

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return "";
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

// Flat key = value lines; '#' starts a comment.
std::map<std::string, std::string> read_config_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw UsageError("cannot read config file '" + path + "'");
    std::map<std::string, std::string> out;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (const auto h = line.find('#'); h != std::string::npos) line.erase(h);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos) {
            throw UsageError(path + ":" + std::to_string(lineno) + ": expected key = value");
        }
        const std::string key = trim(line.substr(0, eq));
        if (!known_keys().count(key)) {
            throw UsageError(path + ":" + std::to_string(lineno) + ": unknown key '" + key + "'");
        }
        out[key] = trim(line.substr(eq + 1));
    }
    return out;
}

struct RunConfig {
    std::string command;
    std::map<std::string, std::string> values;  // resolved: flags over config file

    bool has(const std::string& k) const { return values.count(k) > 0; }
    const std::string& raw(const std::string& k) const {
        const auto it = values.find(k);
        if (it == values.end()) throw UsageError(command + " needs --" + k);
        return it->second;
    }
    std::string str(const std::string& k, const std::string& fallback) const { return has(k) ? raw(k) : fallback; }
    long long integer(const std::string& k) const {
        const std::string& s = raw(k);
        std::size_t pos = 0;
        long long v = 0;
        try {
            v = std::stoll(s, &pos);
        } catch (const std::exception&) {
            pos = 0;
        }
        if (pos != s.size() || s.empty()) throw UsageError("--" + k + " expects an integer, got '" + s + "'");
        return v;
    }
    std::uint64_t unsigned_integer(const std::string& k) const {
        const std::string& s = raw(k);
        std::size_t pos = 0;
        std::uint64_t v = 0;
        try {
            if (!s.empty() && s[0] != '-') v = std::stoull(s, &pos);
        } catch (const std::exception&) {
            pos = 0;
        }
        if (pos != s.size() || s.empty()) throw UsageError("--" + k + " expects a nonnegative integer, got '" + s + "'");
        return v;
    }
    double real(const std::string& k) const { return parse_real(k, raw(k)); }
    std::vector<double> reals(const std::string& k) const {
        std::vector<double> out;
        std::stringstream ss(raw(k));
        std::string item;
        while (std::getline(ss, item, ',')) out.push_back(parse_real(k, trim(item)));
        if (out.empty()) throw UsageError("--" + k + " needs at least one value");
        return out;
    }
    std::vector<int> integers(const std::string& k) const {
        std::vector<int> out;
        for (double v : reals(k)) {
            if (v != std::round(v) || std::abs(v) > 1e6) throw UsageError("--" + k + " expects integers");
            out.push_back(static_cast<int>(v));
        }
        return out;
    }

    json to_json() const {
        json j;
        j["command"] = command;
        for (const auto& [k, v] : values) j[k] = v;
        return j;
    }

private:
    static double parse_real(const std::string& k, const std::string& s) {
        std::size_t pos = 0;
        double v = 0.0;
        try {
            v = std::stod(s, &pos);
        } catch (const std::exception&) {
            pos = 0;
        }
        if (pos != s.size() || s.empty() || !std::isfinite(v)) {
            throw UsageError("--" + k + " expects a number, got '" + s + "'");
        }
        return v;
    }
};

// --- output -----------------------------------------------------------------

void write_output(const RunConfig& cfg, const std::string& text) {
    if (!cfg.has("out")) {
        std::cout << text;
        std::cout.flush();
        return;
    }
    const std::filesystem::path target = cfg.raw("out");
    std::filesystem::path tmp = target;
    tmp += ".tmp." + std::to_string(::getpid());
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw std::runtime_error("cannot open '" + tmp.string() + "' for writing");
        out << text;
        out.flush();
        if (!out) throw std::runtime_error("write to '" + tmp.string() + "' failed");
    }
    std::error_code ec;
    std::filesystem::rename(tmp, target, ec);
    if (ec) {
        std::filesystem::remove(tmp);
        throw std::runtime_error("cannot rename onto '" + target.string() + "': " + ec.message());
    }
}

std::string fmt17(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

json provenance(const RunConfig& cfg, const json& extra) {
    json p;
    p["tool"] = "polyens";
    p["version"] = POLYENS_VERSION;
    p["config"] = cfg.to_json();
    for (const auto& [k, v] : extra.items()) p[k] = v;
    return p;
}

std::string csv_header(const json& prov) {
    std::string out;
    out += "# polyens " + prov["version"].get<std::string>() + "\n";
    for (const auto& [k, v] : prov.items()) {
        if (k == "tool" || k == "version") continue;
        out += "# " + k + ": " + v.dump() + "\n";
    }
    return out;
}

void warn_conditioning(const PolynomialEnsemble& ens, json& extra) {
    const double cond = normalization_detail(ens).condition;
    extra["moment_matrix_condition"] = cond;
    if (cond > kConditionWarning) {
        std::cerr << "warning: moment matrix condition estimate " << fmt17(cond)
                  << " exceeds 1e12; kernel and density values may have lost digits\n";
    }
}

// --- models -------------------------------------------------------------------

struct Model {
    std::string name;
    MatrixChainSpec chain;
    std::optional<TruncationModelParams> truncation;
};

void check_M(const RunConfig& cfg, std::size_t count) {
    if (cfg.has("M") && cfg.integer("M") != static_cast<long long>(count)) {
        throw UsageError("--M " + cfg.raw("M") + " does not match the " + std::to_string(count) + " entries of --nu");
    }
}

Model build_model(const RunConfig& cfg, const std::string& default_model) {
    Model m;
    m.name = cfg.str("model", default_model);
    const long long n = cfg.integer("n");
    if (n < 1 || n > 10000) throw UsageError("--n must be a positive integer");
    const std::vector<int> nu = cfg.integers("nu");
    check_M(cfg, nu.size());
    if (m.name != "inverse" && cfg.has("tilde-nu")) throw UsageError("--tilde-nu only applies to --model inverse");
    if (m.name != "truncation" && cfg.has("l")) throw UsageError("--l only applies to --model truncation");
    if (m.name == "ginibre") {
        m.chain = MatrixChainSpec::ginibre_chain(static_cast<int>(n), nu);
    } else if (m.name == "inverse") {
        if (!cfg.has("tilde-nu")) throw UsageError("--model inverse needs --tilde-nu");
        m.chain = MatrixChainSpec::inverse_chain(static_cast<int>(n), nu, cfg.integers("tilde-nu"));
    } else if (m.name == "truncation") {
        if (!cfg.has("l")) throw UsageError("--model truncation needs --l (size of the Haar unitary)");
        TruncationModelParams p;
        p.n = static_cast<int>(n);
        p.M = static_cast<int>(nu.size());
        p.nu = nu;
        p.l = static_cast<int>(cfg.integer("l"));
        try {
            p.validate();
        } catch (const TruncationError& e) {
            throw UsageError(e.what());
        } catch (const DomainError& e) {
            throw UsageError(e.what());
        }
        m.truncation = p;
        m.chain = MatrixChainSpec::truncated_chain(p);
    } else {
        throw UsageError("unknown --model '" + m.name + "' (ginibre, inverse, truncation)");
    }
    try {
        m.chain.validate();
    } catch (const Error& e) {
        throw UsageError(e.what());
    }
    return m;
}

double tolerance(const RunConfig& cfg, double fallback) {
    if (!cfg.has("tol")) return fallback;
    const double t = cfg.real("tol");
    if (!(t > 0.0)) throw UsageError("--tol must be positive");
    return t;
}

int threads(const RunConfig& cfg) {
    if (!cfg.has("threads")) return 0;
    const long long t = cfg.integer("threads");
    if (t < 1 || t > 4096) throw UsageError("--threads must be between 1 and 4096");
    return static_cast<int>(t);
}

int sample_count(const RunConfig& cfg) {
    const long long s = cfg.integer("samples");
    if (s < 1 || s > 100000000) throw UsageError("--samples must be a positive integer");
    return static_cast<int>(s);
}

// --- grid commands ------------------------------------------------------------

struct GridRow {
    double x, y;
    KernelValue v;
};

std::string grid_csv(const json& prov, const std::vector<GridRow>& rows) {
    std::string out = csv_header(prov);
    out += "x,y,value,abs_imag_residual,route,converged\n";
    for (const auto& r : rows) {
        out += fmt17(r.x) + "," + fmt17(r.y) + "," + fmt17(r.v.value) + "," + fmt17(r.v.abs_imag_residual) + "," +
               prov["route"].get<std::string>() + "," + (r.v.converged ? "true" : "false") + "\n";
    }
    return out;
}

template <class F>
std::vector<GridRow> evaluate_grid(const RunConfig& cfg, F&& f) {
    const auto xs = cfg.reals("grid-x");
    const auto ys = cfg.reals("grid-y");
    std::vector<GridRow> rows;
    for (double x : xs)
        for (double y : ys) rows.push_back({x, y, f(x, y)});
    return rows;
}

int cmd_kernel(const RunConfig& cfg) {
    const Model m = build_model(cfg, "truncation");
    const double tol = tolerance(cfg, 1e-9);
    json extra;
    extra["tolerance"] = tol;
    std::vector<GridRow> rows;
    if (m.truncation) {
        const std::string route_name = cfg.str("route", "contour");
        KernelRoute route;
        try {
            route = kernel_route_from_string(route_name);
        } catch (const DomainError&) {
            throw UsageError("unknown --route '" + route_name + "' (contour, biorthogonal_sum, meijer_product)");
        }
        extra["route"] = route_name;
        KernelOptions opts;
        opts.tolerance = tol;
        rows = evaluate_grid(cfg, [&](double x, double y) { return kernel_finite(*m.truncation, x, y, route, opts); });
    } else {
        if (cfg.str("route", "generic") != "generic") {
            throw UsageError("--model " + m.name + " evaluates the kernel from the moment matrix: --route generic");
        }
        extra["route"] = "generic";
        const PolynomialEnsemble ens = chain_ensemble(m.chain);
        warn_conditioning(ens, extra);
        const GenericKernel k(ens);
        rows = evaluate_grid(cfg, [&](double x, double y) {
            KernelValue v;
            v.value = k(x, y);
            v.converged = std::isfinite(v.value);
            return v;
        });
    }
    write_output(cfg, grid_csv(provenance(cfg, extra), rows));
    return 0;
}

int cmd_hard_edge(const RunConfig& cfg) {
    HardEdgeParams p;
    p.nu = cfg.reals("nu");
    check_M(cfg, p.nu.size());
    try {
        p.validate();
    } catch (const Error& e) {
        throw UsageError(e.what());
    }
    const std::string route_name = cfg.str("route", "contour");
    if (route_name != "contour" && route_name != "meijer_product") {
        throw UsageError("unknown --route '" + route_name + "' (contour, meijer_product)");
    }
    const KernelRoute route = kernel_route_from_string(route_name);
    KernelOptions opts;
    opts.tolerance = tolerance(cfg, 1e-9);
    json extra;
    extra["tolerance"] = opts.tolerance;
    extra["route"] = route_name;
    const auto rows = evaluate_grid(cfg, [&](double x, double y) { return kernel_hard_edge(p, x, y, route, opts); });
    write_output(cfg, grid_csv(provenance(cfg, extra), rows));
    return 0;
}

int cmd_borodin(const RunConfig& cfg) {
    BorodinParams p;
    p.alpha = cfg.real("alpha");
    p.theta = cfg.real("theta");
    try {
        p.validate();
    } catch (const Error& e) {
        throw UsageError(e.what());
    }
    const double tol = tolerance(cfg, 1e-11);
    json extra;
    extra["tolerance"] = tol;
    extra["route"] = "wright";
    const auto rows = evaluate_grid(cfg, [&](double x, double y) {
        KernelValue v;
        v.value = kernel_borodin(p, x, y, tol);
        v.converged = true;
        return v;
    });
    write_output(cfg, grid_csv(provenance(cfg, extra), rows));
    return 0;
}

// --- stochastic commands --------------------------------------------------------

int cmd_sample(const RunConfig& cfg) {
    const Model m = build_model(cfg, "ginibre");
    const int count = sample_count(cfg);
    const std::uint64_t seed = cfg.unsigned_integer("seed");
    const SampleBatch batch = sample_chain(m.chain, seed, count, threads(cfg));
    json extra;
    extra["seed"] = seed;
    extra["rejections"] = batch.rejections;
    std::string out = csv_header(provenance(cfg, extra));
    out += "draw";
    for (int j = 1; j <= m.chain.n; ++j) out += ",x" + std::to_string(j);
    out += "\n";
    for (std::size_t i = 0; i < batch.samples.size(); ++i) {
        out += std::to_string(i);
        for (double v : batch.samples[i]) out += "," + fmt17(v);
        out += "\n";
    }
    write_output(cfg, out);
    return 0;
}

int cmd_density_compare(const RunConfig& cfg) {
    const Model m = build_model(cfg, "ginibre");
    const int count = sample_count(cfg);
    const std::uint64_t seed = cfg.unsigned_integer("seed");
    const double threshold = cfg.has("ks-threshold") ? cfg.real("ks-threshold") : 0.02;
    if (!(threshold > 0.0)) throw UsageError("--ks-threshold must be positive");
    json extra;
    extra["seed"] = seed;
    const PolynomialEnsemble ens = chain_ensemble(m.chain);
    warn_conditioning(ens, extra);
    const SampleBatch batch = sample_chain(m.chain, seed, count, threads(cfg));
    extra["rejections"] = batch.rejections;
    const GoodnessReport g = empirical_vs_density(batch, pooled_density(ens), threshold);
    json j;
    j["provenance"] = provenance(cfg, extra);
    j["model"] = m.name;
    j["ks_distance"] = g.ks_distance;
    j["ks_threshold"] = threshold;
    j["sample_count"] = g.sample_count;
    j["bin_chi2"] = g.bin_chi2;
    j["chi2_dof"] = g.chi2_dof;
    j["chi2_p_value"] = g.chi2_p_value;
    j["density_mass"] = g.density_mass;
    j["pass"] = g.pass;
    write_output(cfg, j.dump(2) + "\n");
    return g.pass ? 0 : 1;
}

// --- verify -------------------------------------------------------------------

json report_json(const VerifyReport& r) {
    json j;
    j["suite"] = r.suite;
    j["metric_name"] = r.metric_name;
    j["max_metric"] = r.max_metric;
    j["seconds"] = r.seconds;
    json cases = json::array();
    for (const auto& c : r.cases) {
        json cj;
        cj["name"] = c.name;
        // JSON has no infinity; a failed computation is reported as null
        cj["metric"] = std::isfinite(c.metric) ? json(c.metric) : json(nullptr);
        cj["threshold"] = std::isfinite(c.threshold) ? json(c.threshold) : json(nullptr);
        cj["bound"] = c.upper_bound ? "upper" : "lower";
        cj["pass"] = c.pass;
        cases.push_back(cj);
    }
    j["cases"] = cases;
    j["pass"] = r.pass;
    return j;
}

int cmd_verify(const RunConfig& cfg) {
    VerifyOptions opts;
    if (cfg.has("n")) {
        const long long n = cfg.integer("n");
        if (n < 1 || n > 64) throw UsageError("--n must be between 1 and 64");
        opts.n = static_cast<int>(n);
    }
    if (cfg.has("samples")) opts.samples = sample_count(cfg);
    if (cfg.has("seed")) opts.seed = cfg.unsigned_integer("seed");
    opts.threads = threads(cfg);
    const std::string suite = cfg.str("suite", "all");
    const auto& names = verify_suite_names();
    if (suite != "all" && std::find(names.begin(), names.end(), suite) == names.end()) {
        std::string list;
        for (const auto& s : names) list += (list.empty() ? "" : ", ") + s;
        throw UsageError("unknown --suite '" + suite + "' (all, " + list + ")");
    }
    json extra;
    extra["seed"] = opts.seed;
    extra["samples"] = opts.samples;
    json j;
    bool pass = true;
    if (suite == "all") {
        json suites = json::array();
        for (const auto& s : names) {
            const VerifyReport r = run_verify_suite(s, opts);
            std::cerr << (r.pass ? "PASS " : "FAIL ") << s << "\n";
            suites.push_back(report_json(r));
            pass = pass && r.pass;
        }
        j["provenance"] = provenance(cfg, extra);
        j["suite"] = "all";
        j["suites"] = suites;
    } else {
        const VerifyReport r = run_verify_suite(suite, opts);
        j["provenance"] = provenance(cfg, extra);
        const json rj = report_json(r);
        for (const auto& [k, v] : rj.items()) j[k] = v;
        pass = r.pass;
    }
    j["pass"] = pass;
    write_output(cfg, j.dump(2) + "\n");
    return pass ? 0 : 1;
}

// --- driver -------------------------------------------------------------------

std::string error_kind(const Error& e) {
    if (dynamic_cast<const ConvergenceError*>(&e)) return "ConvergenceError";
    if (dynamic_cast<const TruncationError*>(&e)) return "TruncationError";
    if (dynamic_cast<const SingularityError*>(&e)) return "SingularityError";
    if (dynamic_cast<const RouteDisagreementError*>(&e)) return "RouteDisagreementError";
    if (dynamic_cast<const NumericalError*>(&e)) return "NumericalError";
    if (dynamic_cast<const SingularFactorError*>(&e)) return "SingularFactorError";
    if (dynamic_cast<const DegenerateInputError*>(&e)) return "DegenerateInputError";
    if (dynamic_cast<const StripError*>(&e)) return "StripError";
    if (dynamic_cast<const PoleError*>(&e)) return "PoleError";
    if (dynamic_cast<const GeometryError*>(&e)) return "GeometryError";
    if (dynamic_cast<const SpecError*>(&e)) return "SpecError";
    if (dynamic_cast<const DomainError*>(&e)) return "DomainError";
    return "Error";
}

RunConfig resolve(const std::string& command, const std::map<std::string, std::string>& flags,
                  const std::string& config_path) {
    RunConfig cfg;
    cfg.command = command;
    if (!config_path.empty()) cfg.values = read_config_file(config_path);
    for (const auto& [k, v] : flags) cfg.values[k] = v;
    const auto& allowed = allowed_keys().at(command);
    for (const auto& [k, v] : cfg.values) {
        if (!allowed.count(k)) throw UsageError("--" + k + " does not apply to " + command);
    }
    return cfg;
}

int run(const RunConfig& cfg) {
    if (cfg.command == "kernel") return cmd_kernel(cfg);
    if (cfg.command == "hard-edge") return cmd_hard_edge(cfg);
    if (cfg.command == "borodin") return cmd_borodin(cfg);
    if (cfg.command == "verify") return cmd_verify(cfg);
    if (cfg.command == "sample") return cmd_sample(cfg);
    return cmd_density_compare(cfg);
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Polynomial ensembles of products of random matrices: kernels, sampling and checks"};
    app.set_version_flag("--version", std::string("polyens ") + POLYENS_VERSION);
    app.require_subcommand(1, 1);
    app.fallthrough();

    std::map<std::string, std::string> flags;
    std::map<std::string, CLI::Option*> options;
    for (const auto& [key, info] : known_keys()) {
        options[key] = app.add_option("--" + key, flags[key], info.help);
    }
    std::string config_path;
    app.add_option("--config", config_path, "flat key = value file; flags win over its values");
    for (const auto& c : kCommands) app.add_subcommand(c, "")->fallthrough();

    try {
        app.parse(argc, argv);
    } catch (const CLI::Success& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }
    std::map<std::string, std::string> given;
    for (const auto& [key, opt] : options)
        if (opt->count() > 0) given[key] = flags[key];

    const std::string command = app.get_subcommands().front()->get_name();
    RunConfig cfg;
    try {
        cfg = resolve(command, given, config_path);
        return run(cfg);
    } catch (const UsageError& e) {
        std::cerr << "usage error: " << e.what() << "\n";
        return 2;
    } catch (const Error& e) {
        json d;
        d["error"] = error_kind(e);
        d["message"] = e.what();
        d["config"] = cfg.to_json();
        std::cerr << d.dump(2) << "\n";
        return 1;
    } catch (const std::exception& e) {
        json d;
        d["error"] = "Failure";
        d["message"] = e.what();
        d["config"] = cfg.to_json();
        std::cerr << d.dump(2) << "\n";
        return 1;
    }
}
