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
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "convosim/time_utils.hpp"

namespace convosim {

/// One catalog item. Enrichment fields (tempo, key, chords, lyrics,
/// attachments) are opaque inputs; nothing downstream interprets them beyond
/// rendering and token accounting.
struct Track {
    std::string track_id;
    std::string title;
    std::string artist;
    std::string album;
    std::optional<std::string> release_date;
    std::optional<int> popularity;  // 0-100
    std::vector<std::string> tags;
    std::optional<std::string> lyrics;
    std::optional<double> tempo_bpm;
    std::optional<std::string> key;
    std::vector<std::string> chords;
    std::optional<std::string> audio_ref;
    std::optional<std::string> image_ref;
};

/// All four fields are always present; unknown values carry the literal
/// token "unknown", never absence.
struct Demographics {
    std::string age_group = "unknown";
    std::string country = "unknown";
    std::string gender = "unknown";
    std::string preferred_language = "unknown";
};

struct ListeningSession {
    std::string session_id;
    std::string user_id;
    UtcTimestamp timestamp = 0;
    Demographics demographics;
    std::vector<std::string> track_ids;  // may repeat; deduplicated before sampling
};

/// Per-session track subsets for one conversation: exactly 5 profiling
/// tracks and a disjoint pool of 16-32 candidates.
struct SessionSample {
    std::string session_id;
    std::vector<std::string> profile_tracks;
    std::vector<std::string> pool_tracks;
    Demographics demographics;
};

enum class Partition { kTrain, kTest };

enum class Temperature { kWarm, kCold, kNotApplicable };

const char* to_string(Partition p);
const char* to_string(Temperature t);

struct SplitAssignment {
    std::string session_id;
    Partition partition = Partition::kTrain;
    Temperature user_temperature = Temperature::kNotApplicable;
    std::map<std::string, Temperature> track_temperatures;
};

/// Immutable after construction; safe to share across threads.
class Catalog {
public:
    void add(Track track);  // throws DuplicateTrackIdError

    bool contains(const std::string& track_id) const;
    const Track& at(const std::string& track_id) const;
    std::size_t size() const { return tracks_.size(); }

private:
    std::unordered_map<std::string, Track> tracks_;
};

/// Reads newline-delimited track records (one JSON object per line, UTF-8,
/// unknown fields ignored). Throws DuplicateTrackIdError / MalformedRecordError.
Catalog load_catalog(std::istream& source);
Catalog load_catalog_file(const std::string& path);

/// Same encoding for sessions; timestamps are RFC 3339.
std::vector<ListeningSession> load_sessions(std::istream& source);
std::vector<ListeningSession> load_sessions_file(const std::string& path);

/// Sessions with timestamp >= boundary go to test, the rest to train.
std::map<std::string, Partition> chronological_split(
    const std::vector<ListeningSession>& sessions, UtcTimestamp boundary);

/// Boundary default for the "sessions after 2019" convention.
UtcTimestamp default_split_boundary();

/// For every session: user is cold iff its user_id appears in no
/// train-partition session, and likewise per track. Train sessions get
/// kNotApplicable and no track map.
std::vector<SplitAssignment> classify_temperature(
    const std::vector<ListeningSession>& sessions,
    const std::map<std::string, Partition>& partition);

/// The deduplicated, catalog-resolvable track list of a session, in first
/// occurrence order. Shared by eligibility and sampling.
std::vector<std::string> resolvable_unique_tracks(const ListeningSession& session,
                                                  const Catalog& catalog);

/// Keeps sessions whose deduplicated resolvable track list has at least
/// min_tracks entries (default 21).
std::vector<ListeningSession> select_eligible(const std::vector<ListeningSession>& sessions,
                                              const Catalog& catalog,
                                              std::size_t min_tracks = 21);

struct SamplingBounds {
    std::size_t profile_size = 5;
    std::size_t pool_min = 16;
    std::size_t pool_max = 32;
};

/// Draws the profiling tracks, then a pool of uniform size in
/// [pool_min, min(pool_max, remaining)] from the remainder. Fully determined
/// by (session_id, rng_seed). Throws InsufficientTracksError when the
/// remainder cannot cover pool_min.
SessionSample sample_session(const ListeningSession& session, const Catalog& catalog,
                             std::uint64_t rng_seed, const SamplingBounds& bounds = {});

struct Quotas {
    std::size_t warm_conversations = 0;
    std::size_t cold_conversations = 0;
};

struct BalancedSelection {
    std::vector<std::string> session_ids;  // selection order
    bool satisfied = true;
    std::map<std::string, long> shortfall_per_stratum;
};

/// Selects warm/cold test sessions per quota, round-robin across
/// (country, gender, age_group) strata; deterministic under seed. In strict
/// mode an unmet quota throws QuotaUnsatisfiableError; otherwise the result
/// comes back flagged with per-stratum shortfalls.
BalancedSelection balanced_test_sampling(const std::vector<ListeningSession>& test_sessions,
                                         const std::vector<SplitAssignment>& assignments,
                                         const Quotas& quotas, std::uint64_t rng_seed,
                                         bool strict = true);

}  // namespace convosim
