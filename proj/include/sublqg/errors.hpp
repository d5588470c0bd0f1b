#pragma once

#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace sublqg {

/// Base of every domain error raised by the library. `code()` is a stable
/// identifier ("NotPSD", "NotSubstitutable", ...) used in CLI diagnostics.
class Error : public std::runtime_error {
public:
    Error(std::string code, const std::string& message)
        : std::runtime_error(message), code_(std::move(code)) {}

    [[nodiscard]] const std::string& code() const noexcept { return code_; }

private:
    std::string code_;
};

/// Input file or text that does not follow the scenario schema.
class ParseError : public Error {
public:
    explicit ParseError(const std::string& message) : Error("ParseError", message) {}
};

/// One failed model check: which field, which rule.
struct Violation {
    std::string code;  // DimensionMismatch | NotPSD | NotSymmetric | PartitionArity | ModeMismatch | ...
    std::string field;
    std::string message;
};

class ValidationError : public Error {
public:
    explicit ValidationError(std::vector<Violation> violations)
        : Error(violations.empty() ? "ValidationError" : violations.front().code,
                summarize(violations)),
          violations_(std::move(violations)) {}

    [[nodiscard]] const std::vector<Violation>& violations() const noexcept { return violations_; }

private:
    static std::string summarize(const std::vector<Violation>& v) {
        std::string s = "model validation failed:";
        for (const auto& x : v) s += " [" + x.code + " " + x.field + ": " + x.message + "]";
        return s;
    }

    std::vector<Violation> violations_;
};

class NotSubstitutable : public Error {
public:
    explicit NotSubstitutable(const std::string& message) : Error("NotSubstitutable", message) {}
};

class SingularInnovation : public Error {
public:
    explicit SingularInnovation(const std::string& message) : Error("SingularInnovation", message) {}
};

class SingularObservationCovariance : public Error {
public:
    explicit SingularObservationCovariance(const std::string& message)
        : Error("SingularObservationCovariance", message) {}
};

class MissingPartition : public Error {
public:
    explicit MissingPartition(const std::string& message) : Error("MissingPartition", message) {}
};

class ModeMismatch : public Error {
public:
    explicit ModeMismatch(const std::string& message) : Error("ModeMismatch", message) {}
};

class NonlinearProfile : public Error {
public:
    explicit NonlinearProfile(const std::string& message) : Error("NonlinearProfile", message) {}
};

class RankFailure : public Error {
public:
    explicit RankFailure(const std::string& message) : Error("RankFailure", message) {}
};

}  // namespace sublqg
