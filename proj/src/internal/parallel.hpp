// Copyright 2026 The kgact Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef KGACT_INTERNAL_PARALLEL_HPP_
#define KGACT_INTERNAL_PARALLEL_HPP_

#include <exception>
#include <utility>

namespace kgact::internal {

// Exceptions must not escape an OpenMP region. Loop bodies run through
// capture(); the first exception is rethrown after the region ends.
class ErrorSlot {
 public:
  template <typename Fn>
  void capture(Fn&& fn) noexcept {
    try {
      std::forward<Fn>(fn)();
    } catch (...) {
#pragma omp critical(kgact_error_slot)
      {
        if (!error_) error_ = std::current_exception();
      }
    }
  }

  void rethrow() const {
    if (error_) std::rethrow_exception(error_);
  }

 private:
  std::exception_ptr error_;
};

}  // namespace kgact::internal

#endif  // KGACT_INTERNAL_PARALLEL_HPP_
