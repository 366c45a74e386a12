#include "gcflow/config.hpp"

#include <cctype>
#include <cstdio>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "gcflow/errors.hpp"

namespace gcflow {

namespace {

std::string trim(const std::string& s) {
    std::size_t a = 0, b = s.size();
    while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
    while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
    return s.substr(a, b - a);
}

const std::set<std::string>& known_keys() {
    static const std::set<std::string> keys = {
        "experiment",   "grid.dims",        "grid.n",
        "grid.h",       "grid.S",           "f.family",
        "f.k",          "f.l",              "f.dim",
        "eps",          "n_cut",            "sigma",
        "t_max",        "snap_every",       "shape.kind",
        "shape.radius", "shape.a",          "shape.b",
        "shape.clamp",  "arrival.tol",      "arrival.max_iters",
        "arrival.level_h", "probe.margin",  "probe.tol_cone",
        "pairs.count",  "pairs.steps",      "verify.tau_draws",
        "verify.gamma_draws", "out_dir",    "seed",
    };
    return keys;
}

struct KindEntry {
    const char* name;
    ExperimentKind kind;
};

constexpr KindEntry kKinds[] = {
    {"shrink_circle", ExperimentKind::shrink_circle},
    {"shrink_ball", ExperimentKind::shrink_ball},
    {"shrink_ellipse", ExperimentKind::shrink_ellipse},
    {"arrival_ball", ExperimentKind::arrival_ball},
    {"andrews_track", ExperimentKind::andrews_track},
    {"comparison_pair", ExperimentKind::comparison_pair},
    {"contraction_pair", ExperimentKind::contraction_pair},
    {"relabel_check", ExperimentKind::relabel_check},
    {"probe_run", ExperimentKind::probe_run},
    {"envelope_audit", ExperimentKind::envelope_audit},
};

// experiment-specific values for keys the file leaves unset
void apply_defaults(ExperimentConfig& c, const std::map<std::string, std::string>& kv) {
    const auto unset = [&](const char* key) { return kv.find(key) == kv.end(); };
    struct D {
        int dims, n;
        double h, S, eps, sigma, t_max, snap;
        int k, fdim, n_cut;
    };
    D d{};
    switch (c.experiment) {
    case ExperimentKind::shrink_circle:
        d = {2, 251, 0.01, 1.25, 0.01, 1e-3, 0.7, 0.05, 1, 2, 2};
        break;
    case ExperimentKind::shrink_ball:
        d = {3, 96, 0.025, 1.15, 0.158, 2.5e-3, 0.33, 0.05, 2, 3, 2};
        break;
    case ExperimentKind::shrink_ellipse:
        d = {2, 125, 0.02, 1.3, 0.01, 2e-4, 0.15, 0.05, 1, 2, 4};
        break;
    case ExperimentKind::arrival_ball:
        d = {2, 345, 0.006, 10.0, 0.01, 6e-5, 0.0, 0.1, 1, 2, 4};
        break;
    case ExperimentKind::andrews_track:
        d = {2, 101, 0.025, 1.3, 0.01, 2.5e-4, 0.9, 0.06, 1, 2, 4};
        break;
    case ExperimentKind::comparison_pair:
    case ExperimentKind::contraction_pair:
        d = {2, 41, 0.05, 0.95, 0.15, 4e-3, 0.0, 0.0, 1, 2, 2};
        break;
    case ExperimentKind::relabel_check:
        d = {2, 125, 0.02, 1.3, 0.01, 2e-4, 0.25, 0.0, 1, 2, 4};
        break;
    case ExperimentKind::probe_run:
        d = {2, 63, 0.04, 1.35, 0.01, 4e-4, 0.03, 0.0, 1, 2, 4};
        break;
    case ExperimentKind::envelope_audit:
        d = {2, 33, 0.1, 10.0, 0.15, 0.0, 0.0, 0.0, 2, 3, 2};
        break;
    }
    if (unset("grid.dims")) c.grid_dims = d.dims;
    if (unset("grid.n")) c.grid_n = d.n;
    if (unset("grid.h")) c.grid_h = d.h;
    if (unset("grid.S")) c.grid_S = d.S;
    if (unset("eps")) c.reg.eps = d.eps;
    if (unset("sigma")) c.reg.sigma = d.sigma;
    if (unset("n_cut")) c.reg.n_cut = d.n_cut;
    if (unset("t_max")) c.t_max = d.t_max;
    if (unset("snap_every")) c.snap_every = d.snap;
    if (unset("f.k")) c.f.k = d.k;
    if (unset("f.dim")) c.f.dim = d.fdim;
    // The 96^3 default grid only extends to |x| ~ 1.19, so the clamp band
    // around the unit sphere must stay narrower than on the 2d grids.
    if (c.experiment == ExperimentKind::shrink_ball && unset("shape.clamp"))
        c.shape_clamp = 0.12;
}

} // namespace

const char* experiment_name(ExperimentKind k) {
    for (const KindEntry& e : kKinds)
        if (e.kind == k) return e.name;
    return "?";
}

ExperimentConfig parse_config(const std::string& text) {
    std::map<std::string, std::string> kv;
    std::vector<std::string> problems;

    std::istringstream in(text);
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const std::size_t hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        line = trim(line);
        if (line.empty()) continue;
        const std::size_t eq = line.find('=');
        if (eq == std::string::npos) {
            problems.push_back("line " + std::to_string(lineno) + ": expected key=value, got '" +
                               line + "'");
            continue;
        }
        const std::string key = trim(line.substr(0, eq));
        const std::string val = trim(line.substr(eq + 1));
        if (key.empty() || val.empty()) {
            problems.push_back("line " + std::to_string(lineno) + ": empty key or value");
            continue;
        }
        if (kv.count(key))
            throw config_error("config: line " + std::to_string(lineno) + ": duplicate key '" +
                               key + "'");
        if (!known_keys().count(key)) {
            problems.push_back("unknown key '" + key + "'");
            continue;
        }
        kv[key] = val;
    }

    ExperimentConfig cfg;
    const auto kit = kv.find("experiment");
    if (kit == kv.end()) {
        problems.push_back("missing required key 'experiment'");
        throw config_error("config: " + problems.front());
    }
    bool found = false;
    for (const KindEntry& e : kKinds)
        if (kit->second == e.name) {
            cfg.experiment = e.kind;
            found = true;
        }
    if (!found)
        throw config_error("config: unknown experiment '" + kit->second + "'");

    apply_defaults(cfg, kv);

    const auto bad = [&](const std::string& key, const std::string& why, const std::string& got) {
        problems.push_back("key '" + key + "': " + why + ", got " + got);
    };
    const auto get_double = [&](const char* key, double& out) {
        const auto it = kv.find(key);
        if (it == kv.end()) return;
        try {
            std::size_t used = 0;
            const double v = std::stod(it->second, &used);
            if (used != it->second.size()) throw std::invalid_argument("trailing");
            out = v;
        } catch (const std::exception&) {
            bad(key, "not a number", "'" + it->second + "'");
        }
    };
    const auto get_long = [&](const char* key, long& out) {
        const auto it = kv.find(key);
        if (it == kv.end()) return;
        try {
            std::size_t used = 0;
            const long v = std::stol(it->second, &used);
            if (used != it->second.size()) throw std::invalid_argument("trailing");
            out = v;
        } catch (const std::exception&) {
            bad(key, "not an integer", "'" + it->second + "'");
        }
    };
    const auto get_int = [&](const char* key, int& out) {
        long tmp = out;
        get_long(key, tmp);
        out = static_cast<int>(tmp);
    };

    get_int("grid.dims", cfg.grid_dims);
    get_int("grid.n", cfg.grid_n);
    get_double("grid.h", cfg.grid_h);
    get_double("grid.S", cfg.grid_S);
    if (kv.count("f.family")) {
        const std::string& fam = kv["f.family"];
        if (fam == "sigma")
            cfg.f.family = CurvatureFamily::sigma_k;
        else if (fam == "quotient")
            cfg.f.family = CurvatureFamily::quotient;
        else
            bad("f.family", "must be sigma or quotient", "'" + fam + "'");
    }
    get_int("f.k", cfg.f.k);
    get_int("f.l", cfg.f.l);
    get_int("f.dim", cfg.f.dim);
    get_double("eps", cfg.reg.eps);
    get_int("n_cut", cfg.reg.n_cut);
    get_double("sigma", cfg.reg.sigma);
    get_double("t_max", cfg.t_max);
    get_double("snap_every", cfg.snap_every);
    if (kv.count("shape.kind")) cfg.shape_kind = kv["shape.kind"];
    get_double("shape.radius", cfg.shape_radius);
    get_double("shape.a", cfg.shape_a);
    get_double("shape.b", cfg.shape_b);
    get_double("shape.clamp", cfg.shape_clamp);
    get_double("arrival.tol", cfg.arrival_tol);
    get_long("arrival.max_iters", cfg.arrival_max_iters);
    get_double("arrival.level_h", cfg.arrival_level_h);
    get_double("probe.margin", cfg.probe_margin);
    get_double("probe.tol_cone", cfg.probe_tol_cone);
    get_int("pairs.count", cfg.pairs_count);
    get_int("pairs.steps", cfg.pairs_steps);
    get_long("verify.tau_draws", cfg.verify_tau_draws);
    get_long("verify.gamma_draws", cfg.verify_gamma_draws);
    if (kv.count("out_dir")) cfg.out_dir = kv["out_dir"];
    if (kv.count("seed")) {
        try {
            std::size_t used = 0;
            cfg.seed = std::stoul(kv["seed"], &used);
            if (used != kv["seed"].size()) throw std::invalid_argument("trailing");
        } catch (const std::exception&) {
            bad("seed", "not a nonnegative integer", "'" + kv["seed"] + "'");
        }
    }

    // range validation, all findings reported together
    const auto fmtv = [](double v) {
        char buf[40];
        std::snprintf(buf, sizeof buf, "%g", v);
        return std::string(buf);
    };
    if (cfg.grid_dims != 2 && cfg.grid_dims != 3)
        bad("grid.dims", "must be 2 or 3", fmtv(cfg.grid_dims));
    if (cfg.grid_n < 9) bad("grid.n", "must be at least 9", fmtv(cfg.grid_n));
    if (!(cfg.grid_h > 0.0)) bad("grid.h", "must be positive", fmtv(cfg.grid_h));
    if (!(cfg.grid_S > 0.0)) bad("grid.S", "must be positive", fmtv(cfg.grid_S));
    if (!(cfg.reg.eps > 0.0 && cfg.reg.eps < 1.0)) bad("eps", "must be in (0,1)", fmtv(cfg.reg.eps));
    if (cfg.reg.n_cut < 2) bad("n_cut", "must be at least 2", fmtv(cfg.reg.n_cut));
    if (!(cfg.reg.sigma >= 0.0)) bad("sigma", "must be nonnegative", fmtv(cfg.reg.sigma));
    // the algebraic audit may pair a 3d curvature family with 2d smoothing
    // fields; every field-evolving experiment needs the dimensions to agree
    if (cfg.f.dim != cfg.grid_dims && cfg.experiment != ExperimentKind::envelope_audit)
        bad("f.dim", "must match grid.dims", fmtv(cfg.f.dim));
    if (cfg.f.family == CurvatureFamily::sigma_k) {
        if (cfg.f.k < 1 || cfg.f.k > cfg.f.dim)
            bad("f.k", "must be in [1, f.dim]", fmtv(cfg.f.k));
        if (cfg.f.l != 0) bad("f.l", "must be 0 for the sigma family", fmtv(cfg.f.l));
    } else {
        if (cfg.f.k < 1 || cfg.f.k > cfg.f.dim)
            bad("f.k", "must be in [1, f.dim]", fmtv(cfg.f.k));
        if (cfg.f.l < 1 || cfg.f.l >= cfg.f.k)
            bad("f.l", "must be in [1, f.k)", fmtv(cfg.f.l));
    }
    if (!(cfg.t_max >= 0.0)) bad("t_max", "must be nonnegative", fmtv(cfg.t_max));
    if (!(cfg.snap_every >= 0.0)) bad("snap_every", "must be nonnegative", fmtv(cfg.snap_every));
    if (cfg.shape_kind != "circle" && cfg.shape_kind != "ellipse")
        bad("shape.kind", "must be circle or ellipse", "'" + cfg.shape_kind + "'");
    if (!(cfg.shape_radius > 0.0)) bad("shape.radius", "must be positive", fmtv(cfg.shape_radius));
    if (!(cfg.shape_a > 0.0)) bad("shape.a", "must be positive", fmtv(cfg.shape_a));
    if (!(cfg.shape_b > 0.0)) bad("shape.b", "must be positive", fmtv(cfg.shape_b));
    if (!(cfg.shape_clamp > 0.0)) bad("shape.clamp", "must be positive", fmtv(cfg.shape_clamp));
    if (!(cfg.arrival_tol > 0.0)) bad("arrival.tol", "must be positive", fmtv(cfg.arrival_tol));
    if (cfg.arrival_max_iters < 1)
        bad("arrival.max_iters", "must be at least 1", fmtv(cfg.arrival_max_iters));
    if (!(cfg.arrival_level_h > 0.0))
        bad("arrival.level_h", "must be positive", fmtv(cfg.arrival_level_h));
    if (!(cfg.probe_tol_cone >= 0.0))
        bad("probe.tol_cone", "must be nonnegative", fmtv(cfg.probe_tol_cone));
    if (cfg.pairs_count < 1) bad("pairs.count", "must be at least 1", fmtv(cfg.pairs_count));
    if (cfg.pairs_steps < 1) bad("pairs.steps", "must be at least 1", fmtv(cfg.pairs_steps));
    if (cfg.verify_tau_draws < 1)
        bad("verify.tau_draws", "must be at least 1", fmtv(cfg.verify_tau_draws));
    if (cfg.verify_gamma_draws < 1)
        bad("verify.gamma_draws", "must be at least 1", fmtv(cfg.verify_gamma_draws));
    if (cfg.out_dir.empty()) bad("out_dir", "must not be empty", "''");

    if (!problems.empty()) {
        std::string msg = "config:";
        for (const std::string& p : problems) msg += "\n  " + p;
        throw config_error(msg);
    }
    return cfg;
}

ExperimentConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw config_error("config: cannot read '" + path + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_config(buf.str());
}

} // namespace gcflow
