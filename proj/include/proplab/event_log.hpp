#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

namespace proplab {

/// One logged action. `seq` is the user's action index, gapless from 0.
struct EventRecord {
    std::string user;
    std::int64_t seq = 0;
    std::string community;
    std::int64_t replies = 0;
    std::int64_t score = 0;

    bool operator==(const EventRecord&) const = default;
};

struct EventLog {
    std::vector<EventRecord> records;

    bool empty() const { return records.empty(); }
    std::size_t size() const { return records.size(); }

    /// (user, seq) uniqueness and gapless per-user seq from 0; throws
    /// std::invalid_argument naming the offending user.
    void validate() const;

    /// Records grouped per user, sorted by seq. Users appear in order of
    /// first appearance in the log.
    std::vector<std::pair<std::string, std::vector<const EventRecord*>>> by_user() const;

    /// Action counts per community, keyed by id (sorted).
    std::map<std::string, std::int64_t> community_counts() const;
};

/// Parses a JSONL event log; one object per line with fields
/// {user, seq, community, replies, score}. Errors carry the line number.
EventLog load_event_log(const std::filesystem::path& path);

/// Writes JSONL with a fixed field order; load(save(x)) == x byte-for-byte
/// on canonical files. The write is atomic (temp file + rename).
void save_event_log(const EventLog& log, const std::filesystem::path& path);

/// Percentile of per-action reply counts (default 99th), clamped to >= 1.
/// Used as the corpus-level normalization cap for replies.
double reply_cap_percentile(const EventLog& log, double percentile = 0.99);

}  // namespace proplab
