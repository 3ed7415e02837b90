// prekopa — numerical verification of the dimensional Prekopa second-derivative
// identity and its convexity/concavity certificates.
//
// Subcommands: verify | certify | limit | ibp. Each takes a key-value config
// file; see README for the format. Exit codes: 0 pass, 1 execution error,
// 2 verification failure.

#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "prekopa/config.hpp"
#include "prekopa/runner.hpp"

namespace {

bool mode_matches(const std::string& sub, prekopa::RunMode mode) {
    using prekopa::RunMode;
    if (sub == "verify") return mode == RunMode::verify;
    if (sub == "certify") return mode == RunMode::certify_i || mode == RunMode::certify_ii;
    if (sub == "limit") return mode == RunMode::beta_limit;
    if (sub == "ibp") return mode == RunMode::ibp_check;
    return false;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"dimensional Prekopa identity verifier"};
    app.require_subcommand(1);

    std::string config_path, out_dir;
    std::vector<int> resolution;
    bool quiet = false;

    for (const char* name : {"verify", "certify", "limit", "ibp"}) {
        CLI::App* sub = app.add_subcommand(name);
        sub->add_option("--config", config_path, "run configuration file")->required();
        sub->add_option("--out", out_dir, "output directory (default: config's out path)");
        sub->add_option("--resolution", resolution, "resolution override (m or m_r,m_theta)")
            ->delimiter(',');
        sub->add_flag("--quiet", quiet, "suppress progress output");
    }

    CLI11_PARSE(app, argc, argv);
    const std::string sub = app.get_subcommands().front()->get_name();

    try {
        prekopa::RunConfig cfg = prekopa::parse_config_file(config_path);
        if (!mode_matches(sub, cfg.mode)) {
            std::cerr << "error: subcommand '" << sub << "' does not match config mode '"
                      << prekopa::mode_name(cfg.mode) << "'\n";
            return 1;
        }
        prekopa::RunOptions opts;
        opts.out_dir = out_dir;
        opts.quiet = quiet;
        if (!resolution.empty()) {
            if (resolution.size() == 1)
                opts.res_override = {resolution[0], 0};
            else if (resolution.size() == 2)
                opts.res_override = {resolution[0], resolution[1]};
            else {
                std::cerr << "error: --resolution takes one or two integers\n";
                return 1;
            }
        }
        return prekopa::run(cfg, opts);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}
