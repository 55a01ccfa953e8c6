#pragma once

#include <stdexcept>
#include <string>
#include <utility>

namespace fewsim {

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Dataset problems. `field()` names the offending manifest field, column or file.
class DatasetError : public Error {
public:
    enum class Kind { missing_file, schema, horizon };

    DatasetError(Kind kind, std::string field, const std::string& message)
        : Error(message), kind_(kind), field_(std::move(field)) {}

    Kind kind() const noexcept { return kind_; }
    const std::string& field() const noexcept { return field_; }

private:
    Kind kind_;
    std::string field_;
};

class NotFoundError : public Error {
public:
    NotFoundError(const std::string& message, std::string hint = {})
        : Error(message), hint_(std::move(hint)) {}

    /// Nearest existing ancestor or similar, empty when there is none.
    const std::string& hint() const noexcept { return hint_; }

private:
    std::string hint_;
};

class ValidationError : public Error {
public:
    using Error::Error;
};

/// Duplicate names, busy cases and other state conflicts.
class ConflictError : public Error {
public:
    using Error::Error;
};

}  // namespace fewsim
