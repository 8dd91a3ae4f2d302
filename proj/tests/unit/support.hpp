#pragma once

#include <doctest.h>

#include "fogsim/error.hpp"

// Runs `expr` and checks that it throws fogsim::Error with `code`.
#define CHECK_ERROR_CODE(expr, expected_code)                                 \
    do {                                                                      \
        bool thrown_ = false;                                                 \
        try {                                                                 \
            (void)(expr);                                                     \
        } catch (const fogsim::Error& e_) {                                   \
            thrown_ = true;                                                   \
            CHECK_MESSAGE(e_.code() == (expected_code), e_.what());           \
        }                                                                     \
        CHECK_MESSAGE(thrown_, "expected fogsim::Error from " #expr);         \
    } while (0)
