/* Copyright 2026 The WeakCube Authors. All Rights Reserved.

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

#pragma once

#include <stdexcept>
#include <string>

namespace weakcube {

// Root of every exception thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class InvalidArgument : public Error {
 public:
  using Error::Error;
};

class DegenerateRotation : public Error {
 public:
  using Error::Error;
};

class BehindCamera : public Error {
 public:
  using Error::Error;
};

class DimensionMismatch : public Error {
 public:
  using Error::Error;
};

class DegenerateCloud : public Error {
 public:
  using Error::Error;
};

class NoValidDepth : public Error {
 public:
  using Error::Error;
};

class InfeasiblePlacement : public Error {
 public:
  using Error::Error;
};

class MissingPrior : public Error {
 public:
  using Error::Error;
};

class MissingPseudoDepth : public Error {
 public:
  using Error::Error;
};

// A file could not be opened, read or written.
class IoError : public Error {
 public:
  using Error::Error;
};

// Malformed file contents (PFM/PGM headers, JSON schemas).
class FormatError : public Error {
 public:
  using Error::Error;
};

}  // namespace weakcube
