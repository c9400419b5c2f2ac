#pragma once

#include <string>
#include <unordered_map>
#include <vector>

#include "proplab/core.hpp"
#include "proplab/event_log.hpp"
#include "proplab/hdp.hpp"

namespace proplab {

/// Everything that governs generation, inference, prediction and simulation.
struct ModelParams {
    HdpParams hdp;
    LearningParams learning;
    RewardFunction reward;

    void validate() const;
};

/// A community-indexed action: the chosen slot plus the feedback received.
struct IndexedAction {
    int slot = 0;
    FeedbackVector feedback;
};

/// An event log preprocessed for likelihood work: a fixed community index
/// (sorted ids), per-user action sequences in seq order, and the reply
/// normalization cap used to build feedback vectors.
struct Dataset {
    std::vector<std::string> communities;
    std::unordered_map<std::string, int> community_slot;
    std::vector<std::string> users;                     // order of first appearance
    std::vector<std::vector<IndexedAction>> actions;    // parallel to users
    double reply_cap = 1.0;

    int slot_count() const { return static_cast<int>(communities.size()) + 1; }
    int unseen_slot() const { return static_cast<int>(communities.size()); }
    std::size_t total_actions() const;

    /// reply_cap <= 0 selects the corpus 99th-percentile cap.
    static Dataset build(const EventLog& log, double reply_cap = 0.0);

    /// Same community index and cap, actions taken from `log` (used to build
    /// training subsets against a fixed index).
    Dataset rebuild(const EventLog& log) const;
};

}  // namespace proplab
