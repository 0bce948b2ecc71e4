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

#include <cstdint>
#include <string>

namespace convosim {

/// Seconds since the Unix epoch, UTC. Fractional seconds are truncated on
/// parse; they never matter at session granularity.
using UtcTimestamp = std::int64_t;

/// Parses an RFC 3339 datetime ("2019-06-01T12:30:00Z",
/// "2018-12-31T23:59:59+01:00", date-only "2019-06-01" also accepted).
/// Throws InvalidInputError on anything else.
UtcTimestamp parse_rfc3339(const std::string& text);

/// Formats as "YYYY-MM-DDTHH:MM:SSZ".
std::string format_rfc3339(UtcTimestamp ts);

/// Current wall clock, UTC.
UtcTimestamp now_utc();

}  // namespace convosim
