/*
 * Copyright 2026 The Ablate Authors.
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#ifndef ABLATE_ERROR_H_
#define ABLATE_ERROR_H_

#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace ablate {

// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A precondition on an argument was violated (bad rate, shape mismatch, ...).
class InvalidArgument : public Error {
 public:
  using Error::Error;
};

// Input data could not be ingested or is unusable.
class DataError : public Error {
 public:
  using Error::Error;
};

// A linear system was singular or too ill-conditioned to solve reliably.
class SingularSystemError : public Error {
 public:
  SingularSystemError(const std::string& what, std::vector<std::size_t> columns,
                      double condition)
      : Error(what), columns_(std::move(columns)), condition_(condition) {}

  // Columns implicated in the rank deficiency, when they can be identified.
  const std::vector<std::size_t>& columns() const { return columns_; }
  double condition() const { return condition_; }

 private:
  std::vector<std::size_t> columns_;
  double condition_;
};

// Training or gradient evaluation produced a non-finite value.
class NumericalError : public Error {
 public:
  using Error::Error;
};

}  // namespace ablate

#endif  // ABLATE_ERROR_H_
