/*
 * Copyright (C) 2026 The planforge Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#pragma once

#include <stdexcept>
#include <string>

namespace planforge {

/// Base class for all planforge errors.
class Error : public std::runtime_error {
public:
  explicit Error(const std::string& what) : std::runtime_error(what) {}
};

/// Malformed or incomplete record during decode; names the first offending field.
class SchemaError : public Error {
public:
  using Error::Error;
};

/// Structural invariant violated (graph, configuration, agent spec).
class ValidationError : public Error {
public:
  using Error::Error;
};

/// Fenced markup block could not be parsed.
class ParseError : public Error {
public:
  using Error::Error;
};

/// An atomic-op batch was rejected (cycle, dangling reference, illegal op).
class RevisionError : public Error {
public:
  using Error::Error;
};

/// Operation invoked in a state that does not admit it.
class StateError : public Error {
public:
  using Error::Error;
};

/// Bad user-facing configuration (missing file, bad manifest, bad params).
class ConfigError : public Error {
public:
  using Error::Error;
};

/// Transport or protocol failure talking to a model backend.
class BackendError : public Error {
public:
  using Error::Error;
};

/// Plan instantiation failed after exhausting parse retries.
class InitializationError : public Error {
public:
  using Error::Error;
};

/// Inconsistent numeric data (negative token counts and the like).
class DataError : public Error {
public:
  using Error::Error;
};

/// Filesystem read/write failures.
class IoError : public Error {
public:
  using Error::Error;
};

}  // namespace planforge
