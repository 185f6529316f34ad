/**
 * @file mvcone.cpp
 * @brief Batch command-line front end: solve, unconstrained, simulate, frontier, oracle-compare
 *
 * Exit codes: 0 success, 2 configuration error, 3 solver error, 4 I/O error.
 */

#include "mvcone/csv.hpp"
#include "mvcone/errors.hpp"
#include "mvcone/json_io.hpp"
#include "mvcone/opportunity.hpp"
#include "mvcone/oracle.hpp"
#include "mvcone/simulate.hpp"
#include "mvcone/stats.hpp"

#include <CLI11.hpp>
#include <json.hpp>
#include <openssl/evp.h>

#include <algorithm>
#include <cctype>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <numeric>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

namespace fs = std::filesystem;
using nlohmann::json;
using mvcone::io::ConfigError;

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitSolver = 3;
constexpr int kExitIo = 4;

struct IoError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct Overrides {
    std::optional<std::string> out;
    std::optional<std::uint64_t> seed;
    std::optional<int> steps;
    std::optional<int> paths;
};

struct Options {
    int n_steps = 1000;
    std::string scheme = "rk4";
    int mc_paths = 100000;
    std::uint64_t seed = 20240601;
    double x = 0.0;
    std::optional<double> m;
    std::optional<double> gamma;
    std::vector<double> m_grid;
    int gauss_points = 5;
    int tree_n = 80;
    std::vector<int> tree_steps{20, 40, 80, 160};
    int ode_steps = 0;  // 0: smallest multiple of all tree sizes that is at least 1000
    bool write_paths = true;

    json to_json() const {
        json j;
        j["n_steps"] = n_steps;
        j["scheme"] = scheme;
        j["mc_paths"] = mc_paths;
        j["seed"] = seed;
        j["x"] = x;
        j["m"] = m ? json(*m) : json(nullptr);
        j["gamma"] = gamma ? json(*gamma) : json(nullptr);
        j["m_grid"] = m_grid;
        j["gauss_points"] = gauss_points;
        j["tree_n"] = tree_n;
        j["tree_steps"] = tree_steps;
        j["ode_steps"] = ode_steps;
        j["write_paths"] = write_paths;
        return j;
    }
};

struct RunConfig {
    fs::path config_path;
    std::string config_sha256;
    json model_doc;
    json cone_doc;
    std::optional<mvcone::LevyModel> model;
    std::optional<mvcone::Cone> cone;
    Options opts;
    fs::path out_dir;
};

std::string sha256_hex(const std::string& data) {
    unsigned char md[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    if (EVP_Digest(data.data(), data.size(), md, &len, EVP_sha256(), nullptr) != 1) {
        throw IoError("SHA-256 computation failed");
    }
    static const char* hex = "0123456789abcdef";
    std::string out;
    for (unsigned int i = 0; i < len; ++i) {
        out.push_back(hex[md[i] >> 4]);
        out.push_back(hex[md[i] & 15]);
    }
    return out;
}

std::string read_file(const fs::path& p, const std::string& field) {
    std::ifstream in(p, std::ios::binary);
    if (!in) throw ConfigError(field, "cannot read file '" + p.string() + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

template <class T>
T get_option(const json& o, const char* key, T fallback) {
    const auto it = o.find(key);
    if (it == o.end() || it->is_null()) return fallback;
    try {
        return it->get<T>();
    } catch (const json::exception&) {
        throw ConfigError(std::string("options.") + key, "has the wrong type");
    }
}

std::optional<double> get_optional_number(const json& o, const char* key) {
    const auto it = o.find(key);
    if (it == o.end() || it->is_null()) return std::nullopt;
    if (!it->is_number()) throw ConfigError(std::string("options.") + key, "expected a number");
    return it->get<double>();
}

RunConfig load_config(const std::string& path, const Overrides& ov) {
    RunConfig rc;
    rc.config_path = path;
    const std::string text = read_file(path, "--config");
    rc.config_sha256 = sha256_hex(text);
    const json doc = mvcone::io::parse_document(text, "config");
    if (!doc.is_object()) throw ConfigError("config", "expected a JSON object");

    if (doc.contains("model") && doc.contains("model_file")) {
        throw ConfigError("model_file", "give either model or model_file, not both");
    }
    if (const auto it = doc.find("model_file"); it != doc.end()) {
        if (!it->is_string()) throw ConfigError("model_file", "expected a path string");
        const fs::path mp = fs::path(path).parent_path() / it->get<std::string>();
        rc.model_doc = mvcone::io::parse_document(read_file(mp, "model_file"), "model_file");
    } else if (const auto mit = doc.find("model"); mit != doc.end()) {
        rc.model_doc = *mit;
    } else {
        throw ConfigError("model", "missing");
    }
    rc.model = mvcone::io::model_from_json(rc.model_doc, "model");
    rc.cone_doc = doc.contains("cone") ? doc.at("cone") : json{{"type", "full"}};
    rc.cone = mvcone::io::cone_from_json(rc.cone_doc, rc.model->dim(), "cone");

    const json opts = doc.contains("options") ? doc.at("options") : json::object();
    if (!opts.is_object()) throw ConfigError("options", "expected an object");
    Options& o = rc.opts;
    o.n_steps = get_option(opts, "n_steps", o.n_steps);
    o.scheme = get_option(opts, "scheme", o.scheme);
    o.mc_paths = get_option(opts, "mc_paths", o.mc_paths);
    o.seed = get_option(opts, "seed", o.seed);
    o.x = get_option(opts, "x", o.x);
    o.m = get_optional_number(opts, "m");
    o.gamma = get_optional_number(opts, "gamma");
    o.m_grid = get_option(opts, "m_grid", o.m_grid);
    o.gauss_points = get_option(opts, "gauss_points", o.gauss_points);
    o.tree_n = get_option(opts, "tree_n", o.tree_n);
    o.tree_steps = get_option(opts, "tree_steps", o.tree_steps);
    o.ode_steps = get_option(opts, "ode_steps", o.ode_steps);
    o.write_paths = get_option(opts, "write_paths", o.write_paths);

    std::string out = doc.contains("output") ? get_option(doc, "output", std::string("out")) : std::string("out");
    if (ov.out) out = *ov.out;
    if (ov.seed) o.seed = *ov.seed;
    if (ov.paths) o.mc_paths = *ov.paths;
    rc.out_dir = out;
    return rc;
}

void check_range(bool ok, const std::string& field, const std::string& msg) {
    if (!ok) throw ConfigError(field, msg);
}

void validate_options(const Options& o) {
    check_range(o.n_steps >= 1, "options.n_steps", "must be at least 1");
    check_range(o.scheme == "rk4" || o.scheme == "euler", "options.scheme", "must be 'rk4' or 'euler'");
    check_range(o.mc_paths >= 2, "options.mc_paths", "must be at least 2");
    check_range(std::isfinite(o.x), "options.x", "must be finite");
    check_range(!o.gamma || *o.gamma > 0.0, "options.gamma", "must be positive");
    check_range(!(o.gamma && o.m), "options.gamma", "give either m or gamma, not both");
    check_range(o.gauss_points >= 1 && o.gauss_points <= 40, "options.gauss_points", "must be in [1, 40]");
    check_range(o.tree_n >= 1, "options.tree_n", "must be at least 1");
    check_range(o.ode_steps >= 0, "options.ode_steps", "must be nonnegative");
    for (int n : o.tree_steps) check_range(n >= 1, "options.tree_steps", "entries must be at least 1");
}

/// Collects artifacts in memory; nothing touches the disk until every
/// artifact has been produced and scanned.
class Artifacts {
public:
    void add(const std::string& name, std::string content) { files_.emplace_back(name, std::move(content)); }

    void scan_for_nan() const {
        for (const auto& [name, content] : files_) {
            std::string lower(content.size(), ' ');
            std::transform(content.begin(), content.end(), lower.begin(),
                           [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
            for (const char* bad : {"nan", "inf"}) {
                if (lower.find(bad) != std::string::npos) {
                    throw mvcone::Error(mvcone::ErrorCode::InvalidState,
                                        "non-finite value in " + name + "; refusing to write it");
                }
            }
        }
    }

    void write(const RunConfig& rc, const std::string& command) const {
        json manifest;
        manifest["command"] = command;
        manifest["inputs"] = {{"config", rc.config_path.string()},
                              {"config_sha256", rc.config_sha256},
                              {"model", mvcone::io::model_to_json(*rc.model)},
                              {"cone", mvcone::io::cone_to_json(*rc.cone)}};
        manifest["options"] = rc.opts.to_json();
        manifest["outputs"] = json::array();
        std::error_code ec;
        fs::create_directories(rc.out_dir, ec);
        if (ec) throw IoError("cannot create output directory '" + rc.out_dir.string() + "': " + ec.message());
        for (const auto& [name, content] : files_) {
            put(rc.out_dir / name, content);
            manifest["outputs"].push_back({{"path", name}, {"sha256", sha256_hex(content)}});
        }
        put(rc.out_dir / "manifest.json", manifest.dump(2) + "\n");
    }

private:
    static void put(const fs::path& p, const std::string& content) {
        std::ofstream out(p, std::ios::binary | std::ios::trunc);
        if (!out) throw IoError("cannot open '" + p.string() + "' for writing");
        out << content;
        out.close();
        if (!out) throw IoError("failed writing '" + p.string() + "'");
    }

    std::vector<std::pair<std::string, std::string>> files_;
};

std::string two_column(const char* a, const char* b, const std::vector<double>& xs, const std::vector<double>& ys) {
    std::ostringstream os;
    os << a << ',' << b << '\n';
    for (std::size_t i = 0; i < xs.size(); ++i) os << mvcone::csv::num(xs[i]) << ',' << mvcone::csv::num(ys[i]) << '\n';
    return os.str();
}

mvcone::OpportunitySolution solve_base(const RunConfig& rc, int n_steps) {
    mvcone::OpportunityOptions oo;
    oo.scheme = mvcone::parse_scheme(rc.opts.scheme);
    return mvcone::solve_opportunity(*rc.model, mvcone::constant_cone(*rc.cone), n_steps, oo);
}

void cmd_solve(RunConfig& rc, const Overrides& ov, Artifacts& art) {
    if (ov.steps) rc.opts.n_steps = *ov.steps;
    validate_options(rc.opts);
    const auto sol = solve_base(rc, rc.opts.n_steps);
    std::ostringstream os;
    mvcone::write_opportunity_csv(os, sol);
    art.add("opportunity.csv", os.str());
    art.add("plot_L_plus.csv", two_column("t", "L_plus", sol.grid.times, sol.grid.l_plus));
    art.add("plot_L_minus.csv", two_column("t", "L_minus", sol.grid.times, sol.grid.l_minus));
    json s = {{"L_plus_0", sol.grid.l_plus.front()}, {"L_minus_0", sol.grid.l_minus.front()}};
    art.add("summary.json", s.dump(2) + "\n");
}

void cmd_unconstrained(RunConfig& rc, const Overrides& ov, Artifacts& art) {
    if (ov.steps) rc.opts.n_steps = *ov.steps;
    validate_options(rc.opts);
    const auto u = mvcone::solve_unconstrained(*rc.model, rc.opts.n_steps, mvcone::parse_scheme(rc.opts.scheme));
    std::ostringstream os;
    mvcone::write_opportunity_csv(os, u.solution);
    art.add("unconstrained.csv", os.str());
    art.add("plot_L.csv", two_column("t", "L", u.solution.grid.times, u.solution.grid.l_plus));
    json adj = json::array();
    for (Eigen::Index i = 0; i < u.adjustment.size(); ++i) adj.push_back(u.adjustment(i));
    json s = {{"L_0", u.solution.grid.l_plus.front()}, {"rate", u.rate}, {"adjustment", adj}};
    art.add("summary.json", s.dump(2) + "\n");
}

std::optional<mvcone::MarkowitzTarget> target_of(const Options& o) {
    if (o.m) return mvcone::MarkowitzTarget::mean(*o.m);
    if (o.gamma) return mvcone::MarkowitzTarget::risk_aversion(*o.gamma);
    return std::nullopt;
}

void cmd_simulate(RunConfig& rc, const Overrides& ov, Artifacts& art) {
    if (ov.steps) rc.opts.n_steps = *ov.steps;
    validate_options(rc.opts);
    const Options& o = rc.opts;
    const auto base = solve_base(rc, o.n_steps);
    json s;
    std::vector<double> vt;
    if (const auto target = target_of(o)) {
        const auto ms = mvcone::markowitz_from_base(*rc.model, base, o.x, *target, o.mc_paths, o.seed);
        const auto raw = mvcone::terminal_wealth(*rc.model, base.policy, -1.0, o.mc_paths, o.seed);
        for (double v : raw) vt.push_back(ms.wealth_from_base(v));
        s["scale"] = ms.scale;
        s["e_hat"] = ms.e_hat;
        s["e_hat_stderr"] = ms.e_hat_stderr;
        s["tilde_m"] = ms.tilde_m;
    } else {
        vt = mvcone::terminal_wealth(*rc.model, base.policy, o.x, o.mc_paths, o.seed);
    }
    const auto m = mvcone::stats::moments(vt);
    s["mean"] = m.mean;
    s["variance"] = m.variance;
    s["stderr"] = m.stderr_mean;
    s["paths"] = o.mc_paths;
    art.add("summary.json", s.dump(2) + "\n");
    if (o.write_paths) {
        std::ostringstream os;
        os << "path,V_T,gain\n";
        for (std::size_t p = 0; p < vt.size(); ++p) {
            os << p << ',' << mvcone::csv::num(vt[p]) << ',' << mvcone::csv::num(vt[p] - o.x) << '\n';
        }
        art.add("paths.csv", os.str());
    }
}

void cmd_frontier(RunConfig& rc, const Overrides& ov, Artifacts& art) {
    if (ov.steps) rc.opts.n_steps = *ov.steps;
    validate_options(rc.opts);
    const Options& o = rc.opts;
    if (o.m_grid.empty()) throw ConfigError("options.m_grid", "must list at least one target mean");
    const auto base = solve_base(rc, o.n_steps);
    const auto rows = mvcone::efficient_frontier(*rc.model, base, o.x, o.m_grid, o.mc_paths, o.seed);
    std::ostringstream os;
    mvcone::write_frontier_csv(os, rows);
    art.add("frontier.csv", os.str());
    std::vector<double> ms, vs;
    for (const auto& r : rows) {
        ms.push_back(r.m);
        vs.push_back(r.variance);
    }
    art.add("plot_frontier.csv", two_column("m", "variance", ms, vs));
}

void cmd_oracle_compare(RunConfig& rc, const Overrides& ov, Artifacts& art) {
    if (ov.steps) rc.opts.tree_n = *ov.steps;
    validate_options(rc.opts);
    Options& o = rc.opts;
    int common = o.tree_n;
    for (int n : o.tree_steps) common = std::lcm(common, n);
    if (o.ode_steps == 0) o.ode_steps = common * std::max(1, (1000 + common - 1) / common);
    if (o.ode_steps % common != 0) {
        throw ConfigError("options.ode_steps", "must be a multiple of every tree size");
    }
    const auto ode = solve_base(rc, o.ode_steps);
    const auto cone_fn = mvcone::constant_cone(*rc.cone);

    mvcone::ScenarioTree tree = mvcone::discretize(*rc.model, o.tree_n, o.gauss_points);
    const auto policy = mvcone::dp_backward(tree, cone_fn);
    const auto cmp = mvcone::compare_to_ode(tree, ode.grid);
    const auto table = mvcone::convergence_table(*rc.model, cone_fn, ode.grid, o.tree_steps, o.gauss_points);

    std::ostringstream os;
    mvcone::write_tree_csv(os, tree, policy);
    art.add("tree.csv", os.str());
    json j;
    j["n"] = o.tree_n;
    j["max_err_plus"] = cmp.max_err_plus;
    j["max_err_minus"] = cmp.max_err_minus;
    j["l2_err_plus"] = cmp.l2_err_plus;
    j["l2_err_minus"] = cmp.l2_err_minus;
    j["table"] = json::array();
    for (const auto& r : table) j["table"].push_back({{"n", r.n}, {"err", r.err}});
    art.add("comparison.json", j.dump(2) + "\n");
    std::vector<double> ns, errs;
    for (const auto& r : table) {
        ns.push_back(r.n);
        errs.push_back(r.err);
    }
    art.add("plot_convergence.csv", two_column("n", "err", ns, errs));
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Cone-constrained mean-variance portfolio selection in Lévy models"};
    app.require_subcommand(1);

    std::string config;
    std::string out;
    std::uint64_t seed = 0;
    int steps = 0;
    int paths = 0;
    struct Sub {
        CLI::App* app;
        void (*run)(RunConfig&, const Overrides&, Artifacts&);
    };
    std::vector<Sub> subs;
    const auto add = [&](const char* name, const char* help, void (*fn)(RunConfig&, const Overrides&, Artifacts&)) {
        CLI::App* s = app.add_subcommand(name, help);
        s->add_option("--config", config, "Run configuration (JSON)")->required();
        s->add_option("--out", out, "Output directory");
        s->add_option("--seed", seed, "Monte Carlo seed");
        s->add_option("--steps", steps, "Time steps (tree steps for oracle-compare)");
        s->add_option("--paths", paths, "Monte Carlo paths");
        subs.push_back({s, fn});
    };
    add("solve", "Integrate the coupled equations for L+ and L-", cmd_solve);
    add("unconstrained", "Single opportunity process for an unconstrained market", cmd_unconstrained);
    add("simulate", "Simulate terminal wealth under the optimal feedback policy", cmd_simulate);
    add("frontier", "Efficient frontier by Monte Carlo", cmd_frontier);
    add("oracle-compare", "Compare the ODE solution with the scenario-tree oracle", cmd_oracle_compare);

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kExitConfig;
    }

    for (const Sub& s : subs) {
        if (!s.app->parsed()) continue;
        Overrides ov;
        if (s.app->count("--out")) ov.out = out;
        if (s.app->count("--seed")) ov.seed = seed;
        if (s.app->count("--steps")) ov.steps = steps;
        if (s.app->count("--paths")) ov.paths = paths;
        try {
            RunConfig rc = load_config(config, ov);
            Artifacts art;
            s.run(rc, ov, art);
            art.scan_for_nan();
            art.write(rc, s.app->get_name());
            std::cout << "wrote " << (rc.out_dir / "manifest.json").string() << '\n';
            return 0;
        } catch (const ConfigError& e) {
            std::cerr << "ConfigError: " << e.what() << '\n';
            return kExitConfig;
        } catch (const mvcone::Error& e) {
            std::cerr << "SolverError: " << e.what() << '\n';
            return kExitSolver;
        } catch (const IoError& e) {
            std::cerr << "IoError: " << e.what() << '\n';
            return kExitIo;
        }
    }
    return kExitConfig;
}
