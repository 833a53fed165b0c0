#pragma once

#include <cstddef>
#include <exception>

namespace eqport::detail {

// Runs body(i) for i in [0, n); the first exception thrown by any iteration is
// rethrown after the loop.
template <class Body>
void for_each_index(std::size_t n, bool parallel, Body&& body) {
  std::exception_ptr err;
  const long long count = static_cast<long long>(n);
#pragma omp parallel for schedule(static) if (parallel)
  for (long long i = 0; i < count; ++i) {
    try {
      body(static_cast<std::size_t>(i));
    } catch (...) {
#pragma omp critical(eqport_first_error)
      if (!err) err = std::current_exception();
    }
  }
  if (err) std::rethrow_exception(err);
}

}  // namespace eqport::detail
