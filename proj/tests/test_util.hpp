#pragma once

#include "c1bench/core.hpp"

#include <optional>

namespace c1bench::testing {

/// Code of the c1bench::Error thrown by f, or nullopt if f returns normally.
template <class F>
std::optional<Errc> error_code(F&& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  return std::nullopt;
}

}  // namespace c1bench::testing
