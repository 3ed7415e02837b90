#pragma once
// Flat key-value run configuration. Unknown keys are errors; beta, resolution
// and the t grid have no defaults, tolerances do.

#include <map>
#include <string>
#include <vector>

#include "prekopa/fields.hpp"
#include "prekopa/geometry.hpp"

namespace prekopa {

enum class RunMode { verify, certify_i, certify_ii, beta_limit, ibp_check };

std::string mode_name(RunMode m);

struct Tolerances {
    double identity_rel = 1e-2;    // headline relative spread for verify
    double solver_residual = 1e-10;
    double sign_slack = 1e-8;
    double ibp_rel = 1e-3;
    double limit_abs = 1e-3;
};

struct RunConfig {
    RunMode mode = RunMode::verify;
    Domain domain{Interval{0.0, 1.0}};
    int n = 1;
    std::string oracle_name;
    std::map<std::string, std::vector<double>> oracle_params;
    double beta = 0.0;                 // verify / ibp_check
    std::vector<double> beta_values;   // certify / beta_limit
    std::vector<double> t_values;
    Resolution resolution;
    double h_t = 0.0;  // 0 selects 1e-3 (1+|t|)
    Tolerances tol;
    std::string out_dir = ".";

    FieldOracle make_field_oracle() const;
};

// Parses "key = value" lines ('#' comments); validates mode-specific
// hypotheses and names the violated one in the error message.
RunConfig parse_config(const std::string& text);
RunConfig parse_config_file(const std::string& path);

}  // namespace prekopa
