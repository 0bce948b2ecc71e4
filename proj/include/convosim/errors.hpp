// Copyright 2026 The convosim Authors
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

#pragma once

#include <map>
#include <stdexcept>
#include <string>

namespace convosim {

/// Base class for all recoverable pipeline errors. Subclasses carry the
/// error taxonomy used by the C API and the CLI exit-code mapping: errors
/// derived from InvalidInputError map to exit code 2, everything else to 1.
class Error : public std::runtime_error {
public:
    explicit Error(const std::string& what) : std::runtime_error(what) {}
};

class InvalidInputError : public Error {
public:
    explicit InvalidInputError(const std::string& what) : Error(what) {}
};

// ---- catalog ----

class DuplicateTrackIdError : public InvalidInputError {
public:
    explicit DuplicateTrackIdError(const std::string& id)
        : InvalidInputError("duplicate track_id: " + id), track_id(id) {}
    std::string track_id;
};

class MalformedRecordError : public InvalidInputError {
public:
    MalformedRecordError(std::size_t line, const std::string& detail)
        : InvalidInputError("malformed record at line " + std::to_string(line) + ": " + detail),
          line_number(line),
          detail(detail) {}
    std::size_t line_number;
    std::string detail;
};

class InsufficientTracksError : public Error {
public:
    explicit InsufficientTracksError(const std::string& what) : Error(what) {}
};

/// Raised when the balanced sampler cannot meet its quotas in strict mode.
/// Carries the per-stratum shortfall so callers can report what is missing.
class QuotaUnsatisfiableError : public Error {
public:
    QuotaUnsatisfiableError(const std::string& what, std::map<std::string, long> shortfall)
        : Error(what), shortfall_per_stratum(std::move(shortfall)) {}
    std::map<std::string, long> shortfall_per_stratum;
};

// ---- goal catalog ----

class UnknownCodeError : public InvalidInputError {
public:
    explicit UnknownCodeError(const std::string& code)
        : InvalidInputError("unknown code: " + code), code(code) {}
    std::string code;
};

// ---- gateway ----

class BackendUnavailableError : public Error {
public:
    explicit BackendUnavailableError(const std::string& what) : Error(what) {}
};

class AttachmentMissingError : public Error {
public:
    explicit AttachmentMissingError(const std::string& locator)
        : Error("attachment missing: " + locator), locator(locator) {}
    std::string locator;
};

class ScriptExhaustedError : public Error {
public:
    explicit ScriptExhaustedError(const std::string& what) : Error(what) {}
};

// ---- store ----

class SinkUnavailableError : public Error {
public:
    explicit SinkUnavailableError(const std::string& what) : Error(what) {}
};

class EmptyDatasetError : public Error {
public:
    explicit EmptyDatasetError(const std::string& what) : Error(what) {}
};

}  // namespace convosim
