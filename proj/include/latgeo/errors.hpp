#pragma once

#include <stdexcept>
#include <string>

namespace latgeo {

// Shape or rank disagreement between operands.
class DimensionError : public std::runtime_error {
public:
    explicit DimensionError(const std::string& msg) : std::runtime_error(msg) {}
};

// Non-finite values or other numeric contract violations.
class NumericError : public std::runtime_error {
public:
    explicit NumericError(const std::string& msg) : std::runtime_error(msg) {}
};

// Malformed external input (file formats, inconsistent record counts).
class FormatError : public std::runtime_error {
public:
    explicit FormatError(const std::string& msg) : std::runtime_error(msg) {}
};

// Invalid configuration; message lists every violation with a JSON pointer.
class ConfigError : public std::runtime_error {
public:
    explicit ConfigError(const std::string& msg) : std::runtime_error(msg) {}
};

// Training diverged or an optimization produced a non-finite value.
class TrainingError : public std::runtime_error {
public:
    explicit TrainingError(const std::string& msg) : std::runtime_error(msg) {}
};

// Statistic undefined for the given sample (zero mean, all-zero differences).
class StatError : public std::runtime_error {
public:
    explicit StatError(const std::string& msg) : std::runtime_error(msg) {}
};

// Operation requested on a model that lacks the needed part (e.g. RBF field).
class CapabilityError : public std::runtime_error {
public:
    explicit CapabilityError(const std::string& msg) : std::runtime_error(msg) {}
};

}  // namespace latgeo
