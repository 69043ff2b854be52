// Copyright 2026 The superpose Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//    http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <stdexcept>
#include <string>

namespace superpose {

enum class ErrorKind {
  domain,
  infeasible,
  numerical,
  resource,
  decode_failure,
  io,
};

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}
  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

struct DomainError : Error {
  explicit DomainError(const std::string& w) : Error(ErrorKind::domain, w) {}
};
struct InfeasibleError : Error {
  explicit InfeasibleError(const std::string& w)
      : Error(ErrorKind::infeasible, w) {}
};
struct NumericalError : Error {
  explicit NumericalError(const std::string& w)
      : Error(ErrorKind::numerical, w) {}
};
struct ResourceError : Error {
  explicit ResourceError(const std::string& w)
      : Error(ErrorKind::resource, w) {}
};
struct DecodeFailure : Error {
  explicit DecodeFailure(const std::string& w)
      : Error(ErrorKind::decode_failure, w) {}
};
struct IoError : Error {
  explicit IoError(const std::string& w) : Error(ErrorKind::io, w) {}
};

}  // namespace superpose
