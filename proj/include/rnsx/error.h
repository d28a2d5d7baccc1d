/* Copyright 2026 The rnsx Authors. All Rights Reserved.

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
==============================================================================*/

#ifndef RNSX_ERROR_H_
#define RNSX_ERROR_H_

#include <stdexcept>
#include <string>

namespace rnsx {

enum class ErrorKind {
  kDimension,
  kDomain,
  kSingular,
  kDegenerate,
  kFormat,
  kUsage,
  kNumeric,
  kIo,
};

// All library failures are reported as rnsx::Error; the kind decides the
// CLI exit code and the C API status.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}
  ErrorKind kind() const { return kind_; }

 private:
  ErrorKind kind_;
};

class SingularMatrixError : public Error {
 public:
  SingularMatrixError(const std::string& what, double condition_estimate)
      : Error(ErrorKind::kSingular, what),
        condition_estimate_(condition_estimate) {}
  double condition_estimate() const { return condition_estimate_; }

 private:
  double condition_estimate_;
};

[[noreturn]] inline void Fail(ErrorKind kind, const std::string& what) {
  throw Error(kind, what);
}

}  // namespace rnsx

#endif  // RNSX_ERROR_H_
