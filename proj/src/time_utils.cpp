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

#include "convosim/time_utils.hpp"

#include <cctype>
#include <chrono>
#include <cstdio>

#include "convosim/errors.hpp"

namespace convosim {

namespace {

bool is_leap(int year) {
    return (year % 4 == 0 && year % 100 != 0) || year % 400 == 0;
}

int days_in_month(int year, int month) {
    static const int table[12] = {31, 28, 31, 30, 31, 30, 31, 31, 30, 31, 30, 31};
    if (month == 2 && is_leap(year)) return 29;
    return table[month - 1];
}

// Days since 1970-01-01 for a civil date. Valid for years >= 1.
std::int64_t days_from_civil(int y, int m, int d) {
    y -= m <= 2;
    const std::int64_t era = (y >= 0 ? y : y - 399) / 400;
    const unsigned yoe = static_cast<unsigned>(y - era * 400);
    const unsigned doy = (153u * (m + (m > 2 ? -3 : 9)) + 2) / 5 + d - 1;
    const unsigned doe = yoe * 365 + yoe / 4 - yoe / 100 + doy;
    return era * 146097 + static_cast<std::int64_t>(doe) - 719468;
}

int parse_digits(const std::string& s, std::size_t pos, std::size_t count) {
    int value = 0;
    for (std::size_t i = 0; i < count; ++i) {
        if (pos + i >= s.size() || !std::isdigit(static_cast<unsigned char>(s[pos + i])))
            throw InvalidInputError("invalid RFC 3339 datetime: " + s);
    }
    for (std::size_t i = 0; i < count; ++i) value = value * 10 + (s[pos + i] - '0');
    return value;
}

}  // namespace

UtcTimestamp parse_rfc3339(const std::string& text) {
    if (text.size() < 10) throw InvalidInputError("invalid RFC 3339 datetime: " + text);

    const int year = parse_digits(text, 0, 4);
    if (text[4] != '-') throw InvalidInputError("invalid RFC 3339 datetime: " + text);
    const int month = parse_digits(text, 5, 2);
    if (text[7] != '-') throw InvalidInputError("invalid RFC 3339 datetime: " + text);
    const int day = parse_digits(text, 8, 2);
    if (month < 1 || month > 12 || day < 1 || day > days_in_month(year, month))
        throw InvalidInputError("invalid RFC 3339 date: " + text);

    int hour = 0, minute = 0, second = 0;
    std::size_t pos = 10;
    if (pos < text.size()) {
        if (text[pos] != 'T' && text[pos] != 't' && text[pos] != ' ')
            throw InvalidInputError("invalid RFC 3339 datetime: " + text);
        ++pos;
        hour = parse_digits(text, pos, 2);
        if (text[pos + 2] != ':') throw InvalidInputError("invalid RFC 3339 datetime: " + text);
        minute = parse_digits(text, pos + 3, 2);
        if (text[pos + 5] != ':') throw InvalidInputError("invalid RFC 3339 datetime: " + text);
        second = parse_digits(text, pos + 6, 2);
        pos += 8;
        if (hour > 23 || minute > 59 || second > 60)
            throw InvalidInputError("invalid RFC 3339 time: " + text);
        if (second == 60) second = 59;  // fold leap second

        if (pos < text.size() && text[pos] == '.') {
            ++pos;
            while (pos < text.size() && std::isdigit(static_cast<unsigned char>(text[pos]))) ++pos;
        }
    }

    std::int64_t offset_seconds = 0;
    if (pos < text.size()) {
        const char c = text[pos];
        if (c == 'Z' || c == 'z') {
            ++pos;
        } else if (c == '+' || c == '-') {
            const int oh = parse_digits(text, pos + 1, 2);
            if (text[pos + 3] != ':') throw InvalidInputError("invalid RFC 3339 offset: " + text);
            const int om = parse_digits(text, pos + 4, 2);
            offset_seconds = (c == '+' ? 1 : -1) * (oh * 3600 + om * 60);
            pos += 6;
        } else {
            throw InvalidInputError("invalid RFC 3339 datetime: " + text);
        }
    }
    if (pos != text.size()) throw InvalidInputError("trailing characters in datetime: " + text);

    const std::int64_t days = days_from_civil(year, month, day);
    return days * 86400 + hour * 3600 + minute * 60 + second - offset_seconds;
}

std::string format_rfc3339(UtcTimestamp ts) {
    std::int64_t days = ts / 86400;
    std::int64_t rem = ts % 86400;
    if (rem < 0) {
        rem += 86400;
        days -= 1;
    }

    // Inverse of days_from_civil.
    std::int64_t z = days + 719468;
    const std::int64_t era = (z >= 0 ? z : z - 146096) / 146097;
    const unsigned doe = static_cast<unsigned>(z - era * 146097);
    const unsigned yoe = (doe - doe / 1460 + doe / 36524 - doe / 146096) / 365;
    std::int64_t y = static_cast<std::int64_t>(yoe) + era * 400;
    const unsigned doy = doe - (365 * yoe + yoe / 4 - yoe / 100);
    const unsigned mp = (5 * doy + 2) / 153;
    const unsigned d = doy - (153 * mp + 2) / 5 + 1;
    const unsigned m = mp + (mp < 10 ? 3 : -9);
    y += (m <= 2);

    char buf[32];
    std::snprintf(buf, sizeof(buf), "%04lld-%02u-%02uT%02lld:%02lld:%02lldZ",
                  static_cast<long long>(y), m, d, static_cast<long long>(rem / 3600),
                  static_cast<long long>((rem % 3600) / 60), static_cast<long long>(rem % 60));
    return buf;
}

UtcTimestamp now_utc() {
    return std::chrono::duration_cast<std::chrono::seconds>(
               std::chrono::system_clock::now().time_since_epoch())
        .count();
}

}  // namespace convosim
