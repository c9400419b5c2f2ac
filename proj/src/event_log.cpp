#include "proplab/event_log.hpp"

#include <algorithm>
#include <fstream>
#include <stdexcept>
#include <unordered_map>

#include "json.hpp"

namespace proplab {

void EventLog::validate() const {
    std::unordered_map<std::string, std::vector<std::int64_t>> seqs;
    for (const auto& r : records) {
        if (r.replies < 0)
            throw std::invalid_argument("event log: negative replies for user " + r.user);
        if (r.seq < 0)
            throw std::invalid_argument("event log: negative seq for user " + r.user);
        seqs[r.user].push_back(r.seq);
    }
    for (auto& [user, s] : seqs) {
        std::sort(s.begin(), s.end());
        for (std::size_t i = 0; i < s.size(); ++i) {
            if (s[i] != static_cast<std::int64_t>(i))
                throw std::invalid_argument(
                    "event log: seq for user " + user +
                    (i > 0 && s[i] == s[i - 1] ? " has a duplicate" : " has a gap") +
                    " at " + std::to_string(s[i]));
        }
    }
}

std::vector<std::pair<std::string, std::vector<const EventRecord*>>> EventLog::by_user() const {
    std::vector<std::pair<std::string, std::vector<const EventRecord*>>> out;
    std::unordered_map<std::string, std::size_t> pos;
    for (const auto& r : records) {
        auto [it, inserted] = pos.try_emplace(r.user, out.size());
        if (inserted) out.emplace_back(r.user, std::vector<const EventRecord*>{});
        out[it->second].second.push_back(&r);
    }
    for (auto& [user, recs] : out)
        std::sort(recs.begin(), recs.end(),
                  [](const EventRecord* a, const EventRecord* b) { return a->seq < b->seq; });
    return out;
}

std::map<std::string, std::int64_t> EventLog::community_counts() const {
    std::map<std::string, std::int64_t> counts;
    for (const auto& r : records) ++counts[r.community];
    return counts;
}

EventLog load_event_log(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open event log: " + path.string());
    EventLog log;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        nlohmann::json j;
        try {
            j = nlohmann::json::parse(line);
        } catch (const nlohmann::json::parse_error& e) {
            throw std::runtime_error(path.string() + ":" + std::to_string(lineno) +
                                     ": malformed JSON: " + e.what());
        }
        EventRecord r;
        try {
            r.user = j.at("user").get<std::string>();
            r.seq = j.at("seq").get<std::int64_t>();
            r.community = j.at("community").get<std::string>();
            r.replies = j.at("replies").get<std::int64_t>();
            r.score = j.at("score").get<std::int64_t>();
        } catch (const nlohmann::json::exception& e) {
            throw std::runtime_error(path.string() + ":" + std::to_string(lineno) +
                                     ": bad record: " + e.what());
        }
        log.records.push_back(std::move(r));
    }
    log.validate();
    return log;
}

void save_event_log(const EventLog& log, const std::filesystem::path& path) {
    const auto tmp = path.string() + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw std::runtime_error("cannot write event log: " + path.string());
        for (const auto& r : log.records) {
            nlohmann::ordered_json j;
            j["user"] = r.user;
            j["seq"] = r.seq;
            j["community"] = r.community;
            j["replies"] = r.replies;
            j["score"] = r.score;
            out << j.dump() << '\n';
        }
    }
    std::filesystem::rename(tmp, path);
}

double reply_cap_percentile(const EventLog& log, double percentile) {
    std::vector<std::int64_t> replies;
    replies.reserve(log.records.size());
    for (const auto& r : log.records) replies.push_back(r.replies);
    if (replies.empty()) return 1.0;
    std::sort(replies.begin(), replies.end());
    const auto idx = static_cast<std::size_t>(percentile * (replies.size() - 1));
    return std::max<double>(1.0, static_cast<double>(replies[idx]));
}

}  // namespace proplab
