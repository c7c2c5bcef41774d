// Copyright 2026 The stratest Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef STRATEST_ERRORS_HPP_
#define STRATEST_ERRORS_HPP_

#include <stdexcept>
#include <string>

namespace stratest {

// Every failure raised by the library derives from Error so callers (the CLI
// in particular) can map them to exit codes with a single catch.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class InvalidMatrix : public Error {
 public:
  using Error::Error;
};

class InvalidDimensions : public Error {
 public:
  using Error::Error;
};

class InvalidCovariance : public Error {
 public:
  using Error::Error;
};

class NotPositiveDefinite : public Error {
 public:
  using Error::Error;
};

class SingularConditioning : public Error {
 public:
  using Error::Error;
};

class SingularInnovation : public Error {
 public:
  using Error::Error;
};

// A requested message covariance cannot be produced by any affine policy
// (the implied injected-noise covariance is negative definite).
class InfeasibleMessage : public Error {
 public:
  using Error::Error;
};

// The other sensors already use more than the receiver's normalized
// variance budget, so no best response exists on the normalized surface.
class InfeasibleOthers : public Error {
 public:
  using Error::Error;
};

class UnsupportedRegime : public Error {
 public:
  using Error::Error;
};

}  // namespace stratest

#endif  // STRATEST_ERRORS_HPP_
