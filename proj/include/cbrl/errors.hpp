#pragma once

#include <stdexcept>
#include <string>

namespace cbrl {

/// A parameter outside its documented domain (temperature <= 0, K >= 1, ...).
class invalid_parameter : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Inconsistent layer chain, input length, or parameter/gradient shapes.
class dimension_mismatch : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

class invalid_action : public std::out_of_range {
public:
    using std::out_of_range::out_of_range;
};

class unsupported_environment : public std::logic_error {
public:
    using std::logic_error::logic_error;
};

/// Thrown by train_step when the replay buffer holds fewer than batch_size
/// transitions. No parameters are touched.
class insufficient_buffer : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class config_error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace cbrl
