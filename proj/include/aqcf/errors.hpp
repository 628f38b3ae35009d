// Copyright 2026 The AQCF Authors
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

#pragma once

#include <stdexcept>
#include <string>

namespace aqcf {

/// Base class of every error raised by the library.
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// A request exceeds a hard resource ceiling (e.g. qubit count).
struct CapacityError : Error {
    using Error::Error;
};

/// Input values are malformed: NaN/Inf, out-of-range indices, bad labels.
struct InvalidInputError : Error {
    using Error::Error;
};

/// Operand shapes are incompatible.
struct DimensionError : Error {
    using Error::Error;
};

/// Inconsistent or incomplete configuration.
struct ConfigError : Error {
    using Error::Error;
};

/// backward() invoked on a graph that was already consumed.
struct StaleGraphError : Error {
    using Error::Error;
};

/// Gradient requested for something without a continuous parameter.
struct NotDifferentiableError : Error {
    using Error::Error;
};

/// A gradient oracle could not be trusted (e.g. non-deterministic function).
struct OracleInvalidError : Error {
    using Error::Error;
};

/// Malformed file contents. Carries the 1-based line number when known.
struct ParseError : Error {
    ParseError(const std::string& what, long line = -1)
        : Error(line >= 0 ? "line " + std::to_string(line) + ": " + what : what), line(line) {}
    long line;
};

/// Non-finite loss detected before a parameter update.
struct NumericalError : Error {
    using Error::Error;
};

}  // namespace aqcf
