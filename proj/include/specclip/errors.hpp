#ifndef SPECCLIP_ERRORS_HPP
#define SPECCLIP_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace specclip {

/// Coarse error buckets; the CLI maps Data to exit code 3 and Numerical to 4.
enum class ErrorCategory { Data, Numerical };

/// Base class for every error thrown by this library. `code()` is a stable
/// machine-readable name (the concrete class name).
class Error : public std::runtime_error {
public:
    Error(const char* code, ErrorCategory category, const std::string& message)
        : std::runtime_error(std::string(code) + ": " + message),
          code_(code),
          category_(category) {}

    const char* code() const noexcept { return code_; }
    ErrorCategory category() const noexcept { return category_; }

private:
    const char* code_;
    ErrorCategory category_;
};

class DimensionMismatch : public Error {
public:
    explicit DimensionMismatch(const std::string& message)
        : Error("DimensionMismatch", ErrorCategory::Data, message) {}
};

class EmptyData : public Error {
public:
    explicit EmptyData(const std::string& message)
        : Error("EmptyData", ErrorCategory::Data, message) {}
};

class RankTooLarge : public Error {
public:
    explicit RankTooLarge(const std::string& message)
        : Error("RankTooLarge", ErrorCategory::Data, message) {}
};

class TooShort : public Error {
public:
    explicit TooShort(const std::string& message)
        : Error("TooShort", ErrorCategory::Data, message) {}
};

class NonConjugateSubset : public Error {
public:
    explicit NonConjugateSubset(const std::string& message)
        : Error("NonConjugateSubset", ErrorCategory::Data, message) {}
};

class ParseError : public Error {
public:
    explicit ParseError(const std::string& message)
        : Error("ParseError", ErrorCategory::Data, message) {}
};

class VersionMismatch : public Error {
public:
    explicit VersionMismatch(const std::string& message)
        : Error("VersionMismatch", ErrorCategory::Data, message) {}
};

class EigFailure : public Error {
public:
    explicit EigFailure(const std::string& message)
        : Error("EigFailure", ErrorCategory::Numerical, message) {}
};

class NonRealResult : public Error {
public:
    explicit NonRealResult(const std::string& message)
        : Error("NonRealResult", ErrorCategory::Numerical, message) {}
};

class PerturbationFailed : public Error {
public:
    explicit PerturbationFailed(const std::string& message)
        : Error("PerturbationFailed", ErrorCategory::Numerical, message) {}
};

class NumericalOverflow : public Error {
public:
    explicit NumericalOverflow(const std::string& message)
        : Error("NumericalOverflow", ErrorCategory::Numerical, message) {}
};

class RiccatiNoConverge : public Error {
public:
    explicit RiccatiNoConverge(const std::string& message)
        : Error("RiccatiNoConverge", ErrorCategory::Numerical, message) {}
};

}  // namespace specclip

#endif  // SPECCLIP_ERRORS_HPP
