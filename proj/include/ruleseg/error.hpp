// Copyright 2026 The ruleseg Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef RULESEG_ERROR_HPP_
#define RULESEG_ERROR_HPP_

#include <stdexcept>
#include <string>

namespace ruleseg {

/// Base class of every exception thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed or inconsistent input data (files, dimensions, parameters).
/// The CLI maps this to exit code 2.
class InputError : public Error {
 public:
  using Error::Error;
};

}  // namespace ruleseg

#endif  // RULESEG_ERROR_HPP_
