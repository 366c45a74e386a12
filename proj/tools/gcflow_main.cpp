// Command-line driver: run one configured experiment and report PASS/FAIL
// metrics.  Exit 0 when every metric passes, 1 on any failure, 2 on bad
// usage or configuration, 3 on a solver error.
#include <cstdio>
#include <exception>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "gcflow/config.hpp"
#include "gcflow/errors.hpp"
#include "gcflow/experiments.hpp"

namespace {

struct SubcommandSpec {
    const char* name;
    const char* blurb;
    std::vector<gcflow::ExperimentKind> kinds;
};

const std::vector<SubcommandSpec>& subcommands() {
    using K = gcflow::ExperimentKind;
    static const std::vector<SubcommandSpec> subs = {
        {"evolve",
         "time-dependent flows: shrink_circle, shrink_ball, shrink_ellipse, "
         "comparison_pair, contraction_pair, relabel_check",
         {K::shrink_circle, K::shrink_ball, K::shrink_ellipse, K::comparison_pair,
          K::contraction_pair, K::relabel_check}},
        {"arrival", "stationary arrival profile: arrival_ball", {K::arrival_ball}},
        {"andrews", "inscribed-ball audit along a flow: andrews_track", {K::andrews_track}},
        {"probe", "space-time consistency audit: probe_run", {K::probe_run}},
        {"verify", "randomized property sweep: envelope_audit", {K::envelope_audit}},
    };
    return subs;
}

int run(const SubcommandSpec& sub, const std::string& config_path, const std::string& out_dir,
        long long seed) {
    gcflow::ExperimentConfig cfg = gcflow::load_config(config_path);
    bool allowed = false;
    for (const gcflow::ExperimentKind k : sub.kinds) allowed = allowed || (k == cfg.experiment);
    if (!allowed)
        throw gcflow::config_error(std::string("config: experiment '") +
                                   gcflow::experiment_name(cfg.experiment) +
                                   "' does not belong to subcommand '" + sub.name + "'");
    if (!out_dir.empty()) cfg.out_dir = out_dir;
    if (seed >= 0) cfg.seed = static_cast<unsigned long>(seed);

    const gcflow::ExperimentOutcome out = gcflow::run_experiment(cfg);
    for (const gcflow::SummaryRow& r : out.rows)
        std::printf("%-28s %14.6g  (threshold %g)  %s\n", r.name.c_str(), r.value, r.threshold,
                    r.pass ? "PASS" : "FAIL");
    std::printf("%s: %s\n", gcflow::experiment_name(cfg.experiment),
                out.all_pass ? "all metrics PASS" : "FAILED");
    return out.all_pass ? 0 : 1;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"level-set curvature flow solver and verification harness"};
    app.require_subcommand(1);

    std::string config_path, out_dir;
    long long seed = -1;

    std::vector<CLI::App*> parsed;
    for (const SubcommandSpec& sub : subcommands()) {
        CLI::App* s = app.add_subcommand(sub.name, sub.blurb);
        s->add_option("--config", config_path, "experiment configuration file")->required();
        s->add_option("--out-dir", out_dir, "override the configured output directory");
        s->add_option("--seed", seed, "override the configured random seed");
        parsed.push_back(s);
    }

    CLI11_PARSE(app, argc, argv);

    try {
        for (std::size_t i = 0; i < parsed.size(); ++i)
            if (parsed[i]->parsed()) return run(subcommands()[i], config_path, out_dir, seed);
        std::fprintf(stderr, "no subcommand selected\n");
        return 2;
    } catch (const gcflow::config_error& e) {
        std::fprintf(stderr, "%s\n", e.what());
        return 2;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 3;
    }
}
