#pragma once

#include <doctest.h>

#include <functional>

#include "npivqb/error.hpp"

// Runs fn and returns the library error code it throws. Fails the test if
// nothing (or something else) is thrown.
inline npivqb::ErrorCode code_of(const std::function<void()>& fn) {
    try {
        fn();
    } catch (const npivqb::Error& e) {
        return e.code();
    }
    FAIL("expected an npivqb::Error");
    return npivqb::ErrorCode::kNumerical;
}
