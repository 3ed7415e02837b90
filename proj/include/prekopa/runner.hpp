#pragma once
// Executes a parsed run configuration: builds meshes, runs the selected
// pipeline for every t (with the refinement companion where the mode needs
// one), and emits one summary file plus one CSV table.
//
// Exit codes: 0 all checks pass, 1 execution error, 2 verification failure.

#include <string>

#include "prekopa/config.hpp"

namespace prekopa {

struct RunOptions {
    std::string out_dir;        // empty: use config's out path
    Resolution res_override{};  // m_r == 0: no override
    bool quiet = false;
};

int run(const RunConfig& cfg, const RunOptions& opts);

// 17-significant-digit formatting used for all emitted numbers.
std::string fmt17(double v);

}  // namespace prekopa
