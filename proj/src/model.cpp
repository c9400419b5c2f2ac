#include "proplab/model.hpp"

#include <stdexcept>

namespace proplab {

void ModelParams::validate() const {
    hdp.validate();
    if (!(learning.phi >= 0.0 && learning.phi <= 1.0))
        throw std::invalid_argument("ModelParams: phi must be in [0, 1]");
    if (!(learning.epsilon >= 0.0 && learning.epsilon <= 1.0))
        throw std::invalid_argument("ModelParams: epsilon must be in [0, 1]");
    if (!(reward.floor >= 0.0))
        throw std::invalid_argument("ModelParams: reward floor must be >= 0");
}

std::size_t Dataset::total_actions() const {
    std::size_t n = 0;
    for (const auto& a : actions) n += a.size();
    return n;
}

Dataset Dataset::build(const EventLog& log, double reply_cap) {
    Dataset ds;
    ds.reply_cap = reply_cap > 0.0 ? reply_cap : reply_cap_percentile(log);
    for (const auto& [community, count] : log.community_counts()) {
        ds.community_slot.emplace(community, static_cast<int>(ds.communities.size()));
        ds.communities.push_back(community);
    }
    return ds.rebuild(log);
}

Dataset Dataset::rebuild(const EventLog& log) const {
    Dataset ds;
    ds.communities = communities;
    ds.community_slot = community_slot;
    ds.reply_cap = reply_cap;
    for (const auto& [user, recs] : log.by_user()) {
        std::vector<IndexedAction> seq;
        seq.reserve(recs.size());
        for (const EventRecord* r : recs) {
            IndexedAction a;
            const auto it = ds.community_slot.find(r->community);
            // communities outside the index map to the unseen slot
            a.slot = it != ds.community_slot.end() ? it->second : ds.unseen_slot();
            a.feedback = {static_cast<double>(r->replies) / ds.reply_cap,
                          static_cast<double>(r->score)};
            seq.push_back(a);
        }
        ds.users.push_back(user);
        ds.actions.push_back(std::move(seq));
    }
    return ds;
}

}  // namespace proplab
