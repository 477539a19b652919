#pragma once

#include <stdexcept>
#include <string>

namespace eraselab {

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Dimension or index mismatch between objects that must agree.
class StructuralError : public Error {
public:
    using Error::Error;
};

// Invalid or infeasible configuration detected before any work starts.
class ConfigError : public Error {
public:
    using Error::Error;
};

// Rejection sampling exhausted its attempt budget.
class GenerationError : public Error {
public:
    using Error::Error;
};

// Non-finite loss during an optimization loop; carries the offending step.
class TrainingDivergedError : public Error {
public:
    explicit TrainingDivergedError(int step)
        : Error("training diverged: non-finite loss at step " + std::to_string(step)),
          step_(step) {}

    int step() const { return step_; }

private:
    int step_;
};

} // namespace eraselab
