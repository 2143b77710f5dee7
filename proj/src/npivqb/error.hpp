#pragma once

#include <stdexcept>
#include <string>

namespace npivqb {

// Numeric values are shared with the C API status codes in npivqb.h.
enum class ErrorCode : int {
    kDomain = 1,
    kData = 2,
    kConfiguration = 3,
    kDimension = 4,
    kSpectrumExhausted = 5,
    kUnsupportedFamily = 6,
    kInitialization = 7,
    kStuckChain = 8,
    kIllConditioned = 9,
    kAbsoluteContinuity = 10,
    kCsvEmpty = 11,
    kCsvMissingHeader = 12,
    kCsvMalformedRow = 13,
    kCsvOutOfRange = 14,
    kIo = 15,
    kNumerical = 16,
};

class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& what) : std::runtime_error(what), code_(code) {}
    ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

// Raised by bvm_approx when the cross-Gram matrix is too close to singular.
class IllConditionedError : public Error {
public:
    IllConditionedError(double tau_hat, const std::string& what)
        : Error(ErrorCode::kIllConditioned, what), tau_hat_(tau_hat) {}
    double tau_hat() const noexcept { return tau_hat_; }

private:
    double tau_hat_;
};

inline bool is_numerical_failure(ErrorCode code) {
    return code == ErrorCode::kStuckChain || code == ErrorCode::kIllConditioned ||
           code == ErrorCode::kNumerical;
}

}  // namespace npivqb
