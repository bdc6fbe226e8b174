// Copyright 2026 The attrib Authors.
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

#ifndef ATTRIB_ERROR_H_
#define ATTRIB_ERROR_H_

#include <stdexcept>
#include <string>

namespace attrib {

// Base of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Mismatched or empty dimensions.
class ShapeError : public Error {
 public:
  using Error::Error;
};

// A hyperparameter or argument outside its admissible range.
class ParameterError : public Error {
 public:
  using Error::Error;
};

// File-system, encoding or subprocess failures.
class IoError : public Error {
 public:
  using Error::Error;
};

// Requested capability (e.g. input gradients) is not provided.
class UnsupportedError : public Error {
 public:
  using Error::Error;
};

// An attribution or evaluation run failed part-way; the message names the
// method and the step.
class MethodError : public Error {
 public:
  using Error::Error;
};

}  // namespace attrib

#endif  // ATTRIB_ERROR_H_
