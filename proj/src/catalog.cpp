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

#include "convosim/catalog.hpp"

#include <algorithm>
#include <fstream>
#include <istream>
#include <set>
#include <sstream>
#include <unordered_set>

#include "convosim/errors.hpp"
#include "convosim/rng.hpp"
#include <json.hpp>

namespace convosim {

using nlohmann::json;

const char* to_string(Partition p) {
    return p == Partition::kTrain ? "train" : "test";
}

const char* to_string(Temperature t) {
    switch (t) {
        case Temperature::kWarm: return "warm";
        case Temperature::kCold: return "cold";
        default: return "not_applicable";
    }
}

void Catalog::add(Track track) {
    if (track.track_id.empty()) throw InvalidInputError("track_id must be non-empty");
    auto [it, inserted] = tracks_.emplace(track.track_id, std::move(track));
    if (!inserted) throw DuplicateTrackIdError(it->first);
}

bool Catalog::contains(const std::string& track_id) const {
    return tracks_.count(track_id) > 0;
}

const Track& Catalog::at(const std::string& track_id) const {
    auto it = tracks_.find(track_id);
    if (it == tracks_.end()) throw InvalidInputError("unknown track_id: " + track_id);
    return it->second;
}

namespace {

std::string require_string(const json& record, const char* field, std::size_t line) {
    auto it = record.find(field);
    if (it == record.end() || !it->is_string() || it->get<std::string>().empty())
        throw MalformedRecordError(line, std::string("missing or empty field '") + field + "'");
    return it->get<std::string>();
}

std::optional<std::string> optional_string(const json& record, const char* field) {
    auto it = record.find(field);
    if (it == record.end() || it->is_null()) return std::nullopt;
    if (it->is_string()) return it->get<std::string>();
    return std::nullopt;
}

std::vector<std::string> string_list(const json& record, const char* field, std::size_t line) {
    std::vector<std::string> out;
    auto it = record.find(field);
    if (it == record.end() || it->is_null()) return out;
    if (!it->is_array()) throw MalformedRecordError(line, std::string("field '") + field + "' must be a list");
    for (const auto& v : *it) {
        if (!v.is_string()) throw MalformedRecordError(line, std::string("field '") + field + "' must hold strings");
        out.push_back(v.get<std::string>());
    }
    return out;
}

Track parse_track(const json& record, std::size_t line) {
    Track t;
    t.track_id = require_string(record, "track_id", line);
    t.title = record.value("title", "");
    t.artist = record.value("artist", "");
    t.album = record.value("album", "");
    t.release_date = optional_string(record, "release_date");
    if (auto it = record.find("popularity"); it != record.end() && !it->is_null()) {
        if (!it->is_number_integer())
            throw MalformedRecordError(line, "field 'popularity' must be an integer");
        const int pop = it->get<int>();
        if (pop < 0 || pop > 100)
            throw MalformedRecordError(line, "field 'popularity' out of [0,100]");
        t.popularity = pop;
    }
    t.tags = string_list(record, "tags", line);
    t.lyrics = optional_string(record, "lyrics");
    if (auto it = record.find("tempo_bpm"); it != record.end() && !it->is_null()) {
        if (!it->is_number() || it->get<double>() <= 0.0)
            throw MalformedRecordError(line, "field 'tempo_bpm' must be a positive number");
        t.tempo_bpm = it->get<double>();
    }
    t.key = optional_string(record, "key");
    t.chords = string_list(record, "chords", line);
    t.audio_ref = optional_string(record, "audio_ref");
    t.image_ref = optional_string(record, "image_ref");
    return t;
}

Demographics parse_demographics(const json& record) {
    Demographics d;
    if (!record.is_object()) return d;
    auto grab = [&](const char* field, std::string& slot) {
        auto it = record.find(field);
        if (it != record.end() && it->is_string() && !it->get<std::string>().empty())
            slot = it->get<std::string>();
    };
    grab("age_group", d.age_group);
    grab("country", d.country);
    grab("gender", d.gender);
    grab("preferred_language", d.preferred_language);
    return d;
}

json parse_line(const std::string& line, std::size_t line_number) {
    json record = json::parse(line, nullptr, false);
    if (record.is_discarded() || !record.is_object())
        throw MalformedRecordError(line_number, "not a JSON object");
    return record;
}

}  // namespace

Catalog load_catalog(std::istream& source) {
    Catalog catalog;
    std::string line;
    std::size_t line_number = 0;
    while (std::getline(source, line)) {
        ++line_number;
        if (line.empty()) continue;
        catalog.add(parse_track(parse_line(line, line_number), line_number));
    }
    return catalog;
}

Catalog load_catalog_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw InvalidInputError("cannot open catalog file: " + path);
    return load_catalog(in);
}

std::vector<ListeningSession> load_sessions(std::istream& source) {
    std::vector<ListeningSession> sessions;
    std::string line;
    std::size_t line_number = 0;
    std::unordered_set<std::string> seen_ids;
    while (std::getline(source, line)) {
        ++line_number;
        if (line.empty()) continue;
        const json record = parse_line(line, line_number);
        ListeningSession s;
        s.session_id = require_string(record, "session_id", line_number);
        if (!seen_ids.insert(s.session_id).second)
            throw MalformedRecordError(line_number, "duplicate session_id '" + s.session_id + "'");
        s.user_id = require_string(record, "user_id", line_number);
        try {
            s.timestamp = parse_rfc3339(require_string(record, "timestamp", line_number));
        } catch (const InvalidInputError& e) {
            throw MalformedRecordError(line_number, e.what());
        }
        if (auto it = record.find("demographics"); it != record.end())
            s.demographics = parse_demographics(*it);
        s.track_ids = string_list(record, "track_ids", line_number);
        sessions.push_back(std::move(s));
    }
    return sessions;
}

std::vector<ListeningSession> load_sessions_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw InvalidInputError("cannot open sessions file: " + path);
    return load_sessions(in);
}

std::map<std::string, Partition> chronological_split(
    const std::vector<ListeningSession>& sessions, UtcTimestamp boundary) {
    std::map<std::string, Partition> out;
    for (const auto& s : sessions)
        out[s.session_id] = s.timestamp >= boundary ? Partition::kTest : Partition::kTrain;
    return out;
}

UtcTimestamp default_split_boundary() {
    return parse_rfc3339("2019-01-01T00:00:00Z");
}

std::vector<SplitAssignment> classify_temperature(
    const std::vector<ListeningSession>& sessions,
    const std::map<std::string, Partition>& partition) {
    std::unordered_set<std::string> train_users;
    std::unordered_set<std::string> train_tracks;
    for (const auto& s : sessions) {
        auto it = partition.find(s.session_id);
        if (it == partition.end())
            throw InvalidInputError("partition map does not cover session " + s.session_id);
        if (it->second == Partition::kTrain) {
            train_users.insert(s.user_id);
            train_tracks.insert(s.track_ids.begin(), s.track_ids.end());
        }
    }

    std::vector<SplitAssignment> out;
    out.reserve(sessions.size());
    for (const auto& s : sessions) {
        SplitAssignment a;
        a.session_id = s.session_id;
        a.partition = partition.at(s.session_id);
        if (a.partition == Partition::kTest) {
            a.user_temperature =
                train_users.count(s.user_id) ? Temperature::kWarm : Temperature::kCold;
            for (const auto& id : s.track_ids)
                a.track_temperatures[id] =
                    train_tracks.count(id) ? Temperature::kWarm : Temperature::kCold;
        }
        out.push_back(std::move(a));
    }
    return out;
}

std::vector<std::string> resolvable_unique_tracks(const ListeningSession& session,
                                                  const Catalog& catalog) {
    std::vector<std::string> out;
    std::unordered_set<std::string> seen;
    for (const auto& id : session.track_ids) {
        if (!catalog.contains(id)) continue;
        if (seen.insert(id).second) out.push_back(id);
    }
    return out;
}

std::vector<ListeningSession> select_eligible(const std::vector<ListeningSession>& sessions,
                                              const Catalog& catalog, std::size_t min_tracks) {
    std::vector<ListeningSession> out;
    for (const auto& s : sessions)
        if (resolvable_unique_tracks(s, catalog).size() >= min_tracks) out.push_back(s);
    return out;
}

SessionSample sample_session(const ListeningSession& session, const Catalog& catalog,
                             std::uint64_t rng_seed, const SamplingBounds& bounds) {
    const std::vector<std::string> tracks = resolvable_unique_tracks(session, catalog);
    if (tracks.size() < bounds.profile_size + bounds.pool_min)
        throw InsufficientTracksError("session " + session.session_id + " has only " +
                                      std::to_string(tracks.size()) + " usable tracks");

    Rng rng(derive_seed(rng_seed, session.session_id));

    const auto profile_idx = rng.sample_indices(tracks.size(), bounds.profile_size);
    std::unordered_set<std::size_t> in_profile(profile_idx.begin(), profile_idx.end());

    std::vector<std::string> remainder;
    remainder.reserve(tracks.size() - bounds.profile_size);
    for (std::size_t i = 0; i < tracks.size(); ++i)
        if (!in_profile.count(i)) remainder.push_back(tracks[i]);

    if (remainder.size() < bounds.pool_min)
        throw InsufficientTracksError("session " + session.session_id +
                                      " cannot cover the minimum pool size");

    const std::size_t pool_cap = std::min(bounds.pool_max, remainder.size());
    const std::size_t pool_size =
        static_cast<std::size_t>(rng.next_in(bounds.pool_min, pool_cap));
    const auto pool_idx = rng.sample_indices(remainder.size(), pool_size);

    SessionSample sample;
    sample.session_id = session.session_id;
    sample.demographics = session.demographics;
    for (std::size_t i : profile_idx) sample.profile_tracks.push_back(tracks[i]);
    for (std::size_t i : pool_idx) sample.pool_tracks.push_back(remainder[i]);
    return sample;
}

namespace {

std::string stratum_key(const Demographics& d) {
    return d.country + "|" + d.gender + "|" + d.age_group;
}

// Round-robin over strata (seed-shuffled order), one session per stratum per
// round. Within a stratum, sessions keep a seed-shuffled order.
std::vector<std::string> round_robin_pick(
    std::map<std::string, std::vector<const ListeningSession*>>& strata, std::size_t quota,
    Rng& rng) {
    std::vector<std::string> stratum_order;
    stratum_order.reserve(strata.size());
    for (const auto& [key, _] : strata) stratum_order.push_back(key);
    for (std::size_t i = stratum_order.size(); i > 1; --i)
        std::swap(stratum_order[i - 1], stratum_order[rng.next_below(i)]);

    for (auto& [_, sessions] : strata)
        for (std::size_t i = sessions.size(); i > 1; --i)
            std::swap(sessions[i - 1], sessions[rng.next_below(i)]);

    std::vector<std::string> picked;
    std::map<std::string, std::size_t> cursor;
    while (picked.size() < quota) {
        bool progressed = false;
        for (const auto& key : stratum_order) {
            if (picked.size() >= quota) break;
            auto& sessions = strata[key];
            std::size_t& pos = cursor[key];
            if (pos < sessions.size()) {
                picked.push_back(sessions[pos]->session_id);
                ++pos;
                progressed = true;
            }
        }
        if (!progressed) break;  // every stratum exhausted
    }
    return picked;
}

}  // namespace

BalancedSelection balanced_test_sampling(const std::vector<ListeningSession>& test_sessions,
                                         const std::vector<SplitAssignment>& assignments,
                                         const Quotas& quotas, std::uint64_t rng_seed,
                                         bool strict) {
    std::map<std::string, Temperature> user_temp;
    for (const auto& a : assignments)
        if (a.partition == Partition::kTest) user_temp[a.session_id] = a.user_temperature;

    std::map<std::string, std::vector<const ListeningSession*>> warm_strata;
    std::map<std::string, std::vector<const ListeningSession*>> cold_strata;
    for (const auto& s : test_sessions) {
        auto it = user_temp.find(s.session_id);
        if (it == user_temp.end()) continue;
        auto& strata = it->second == Temperature::kCold ? cold_strata : warm_strata;
        strata[stratum_key(s.demographics)].push_back(&s);
    }

    BalancedSelection result;
    Rng warm_rng(derive_seed(rng_seed, "balanced.warm"));
    Rng cold_rng(derive_seed(rng_seed, "balanced.cold"));
    auto warm = round_robin_pick(warm_strata, quotas.warm_conversations, warm_rng);
    auto cold = round_robin_pick(cold_strata, quotas.cold_conversations, cold_rng);

    if (warm.size() < quotas.warm_conversations) {
        result.satisfied = false;
        for (const auto& [key, sessions] : warm_strata)
            result.shortfall_per_stratum["warm|" + key] = static_cast<long>(sessions.size());
        result.shortfall_per_stratum["warm|_total_missing"] =
            static_cast<long>(quotas.warm_conversations - warm.size());
    }
    if (cold.size() < quotas.cold_conversations) {
        result.satisfied = false;
        for (const auto& [key, sessions] : cold_strata)
            result.shortfall_per_stratum["cold|" + key] = static_cast<long>(sessions.size());
        result.shortfall_per_stratum["cold|_total_missing"] =
            static_cast<long>(quotas.cold_conversations - cold.size());
    }

    result.session_ids = std::move(warm);
    result.session_ids.insert(result.session_ids.end(), cold.begin(), cold.end());

    if (!result.satisfied && strict)
        throw QuotaUnsatisfiableError("balanced sampling quotas unsatisfiable",
                                      result.shortfall_per_stratum);
    return result;
}

}  // namespace convosim
