#pragma once

#include <stdexcept>

namespace sppl {

// Error categories map to CLI exit codes: config=2, artifact=3, backend=4.
struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct ArtifactError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct BackendError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

} // namespace sppl
