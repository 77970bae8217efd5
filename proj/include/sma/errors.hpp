#pragma once

#include <stdexcept>
#include <string>

namespace sma {

struct NonConvergence : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct UnstableInitialState : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct SingularSystem : std::runtime_error {
    using std::runtime_error::runtime_error;
};

} // namespace sma
