#pragma once

#include <stdexcept>

namespace prekopa {

// Resolution below the derivative-reconstruction stencil minimum. Kept as a
// distinct type so the runner can report it as a failed verification check
// rather than an execution error.
struct UnderResolvedError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

}  // namespace prekopa
