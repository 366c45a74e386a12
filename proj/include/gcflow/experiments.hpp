#pragma once
#include <string>
#include <vector>

#include "gcflow/config.hpp"

namespace gcflow {

// One metric of an experiment.  `pass` already encodes the comparison
// direction (most metrics are upper-bounded errors or violation counts; a
// few, like ratio floors, are lower-bounded).
struct SummaryRow {
    std::string name;
    double value = 0.0;
    double threshold = 0.0;
    bool pass = false;
};

struct ExperimentOutcome {
    std::vector<SummaryRow> rows;
    bool all_pass = true;
};

// Run the configured experiment, write its artifacts (summary.csv plus the
// per-experiment files documented in the README) under cfg.out_dir, and
// return the metric rows.  Identical config and seed give bit-identical
// output files.  Errors from the solver layers propagate unchanged;
// unwritable out_dir -> config_error.
ExperimentOutcome run_experiment(const ExperimentConfig& cfg);

} // namespace gcflow
