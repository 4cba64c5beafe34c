#pragma once

#include "dossim/config.hpp"
#include "dossim/rng.hpp"
#include "dossim/types.hpp"

#include <cstdint>
#include <deque>
#include <map>
#include <set>
#include <span>
#include <string_view>
#include <vector>

namespace dossim::security
{
    enum class ChMode : std::uint8_t
    {
        Normal,
        AuthMode,
    };

    enum class SyncVerdict : std::uint8_t
    {
        Accept,
        Reject,
        EnterAuthMode,
    };

    enum class TokenVerdict : std::uint8_t
    {
        Valid,
        Flagged,
    };

    std::string_view to_string(SyncVerdict v) noexcept;
    std::string_view to_string(TokenVerdict v) noexcept;

    /// Per-CH vetting state for one round.
    struct ChAuthState
    {
        NodeId ch_id = 0;
        std::set<NodeId> roster;
        std::map<NodeId, std::deque<double>> sync_times; // arrivals inside the sliding window
        std::map<NodeId, double> last_sync_time;
        ChMode mode = ChMode::Normal;
        std::map<NodeId, std::uint64_t> issued_tokens; // current, unspent tokens
        std::set<NodeId> flagged;

        ChAuthState() = default;
        ChAuthState(NodeId ch, std::span<const NodeId> members) : ch_id(ch), roster(members.begin(), members.end()) {}

        bool is_member(NodeId id) const { return roster.count(id) != 0; }
        bool is_flagged(NodeId id) const { return flagged.count(id) != 0; }
    };

    /// Level-1 vetting of a Sync packet. Non-members are rejected. For members the
    /// sliding-window count (window = one duty period) and the inter-arrival gap are
    /// updated; too many syncs in the window or too short a gap switches the CH to
    /// AuthMode. Throws std::invalid_argument for non-Sync packets.
    SyncVerdict check_sync_packet(ChAuthState &state, const Packet &pkt, double now, const NetworkConfig &config);

    /// Level-2 check while in AuthMode: the packet must carry the member's current
    /// token. A matching token is spent; anything else flags the sender for good.
    /// Throws std::logic_error if the CH is not in AuthMode.
    TokenVerdict authenticate_member(ChAuthState &state, const Packet &pkt);

    /// Fresh per-member nonces, replacing any unspent ones. Flagged members get none.
    std::vector<std::pair<NodeId, std::uint64_t>> issue_tokens(ChAuthState &state, Rng &rng);
}
