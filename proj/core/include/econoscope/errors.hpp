#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace econoscope {

/// Problems with input data, files or models (as opposed to programming
/// errors or bad call arguments, which raise std::invalid_argument).
class DataError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A record failed validation. Carries the source location and field name.
class ValidationError : public DataError {
public:
    ValidationError(std::string file, std::size_t line, std::string field, const std::string& message);

    const std::string& file() const noexcept { return file_; }
    std::size_t line() const noexcept { return line_; }
    const std::string& field() const noexcept { return field_; }

private:
    std::string file_;
    std::size_t line_;
    std::string field_;
};

/// Feature layout or model family does not match what an operation expects.
class SchemaMismatch : public DataError {
public:
    using DataError::DataError;
};

/// The model has no encoding (or sub-model) for the round's map.
class UnknownMapError : public SchemaMismatch {
public:
    using SchemaMismatch::SchemaMismatch;
};

/// Model file is truncated, malformed or fails its checksum.
class CorruptModelError : public DataError {
public:
    using DataError::DataError;
};

class ModelVersionError : public DataError {
public:
    ModelVersionError(int found, int supported);

    int found() const noexcept { return found_; }
    int supported() const noexcept { return supported_; }

private:
    int found_;
    int supported_;
};

/// Numerical failure during training (non-finite loss).
class TrainingError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace econoscope
