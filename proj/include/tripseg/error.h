// Copyright 2026 The tripseg Authors.
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

#ifndef TRIPSEG_ERROR_H_
#define TRIPSEG_ERROR_H_

#include <stdexcept>
#include <string>

namespace tripseg {

enum class ErrorKind {
  kParse,       // malformed input text
  kValidation,  // well-formed input that breaks a data invariant
  kInvalidArgument,
  kIo,          // missing files, unreadable directories, failed writes
};

// Single exception type for the library. The kind drives the CLI exit code:
// kIo maps to 2, everything else to 1.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message)
      : std::runtime_error(message), kind_(kind) {}

  ErrorKind kind() const { return kind_; }

 private:
  ErrorKind kind_;
};

[[noreturn]] inline void Fail(ErrorKind kind, const std::string& message) {
  throw Error(kind, message);
}

}  // namespace tripseg

#endif  // TRIPSEG_ERROR_H_
