#pragma once

#include <gtest/gtest.h>

#include "favstego/error.hpp"

namespace favstego::testing {

template <typename Fn>
void expect_error(ErrorCode code, Fn&& fn) {
  try {
    fn();
    ADD_FAILURE() << "expected " << to_string(code) << " but no error was raised";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), code) << e.what();
  }
}

}  // namespace favstego::testing
