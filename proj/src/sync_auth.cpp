#include "dossim/sync_auth.hpp"

#include <stdexcept>

namespace dossim::security
{
    std::string_view to_string(SyncVerdict v) noexcept
    {
        switch (v)
        {
        case SyncVerdict::Accept:
            return "accept";
        case SyncVerdict::Reject:
            return "reject";
        case SyncVerdict::EnterAuthMode:
            return "enter_auth_mode";
        }
        return "?";
    }

    std::string_view to_string(TokenVerdict v) noexcept
    {
        return v == TokenVerdict::Valid ? "valid" : "flagged";
    }

    SyncVerdict check_sync_packet(ChAuthState &state, const Packet &pkt, double now, const NetworkConfig &config)
    {
        if (pkt.kind != PacketKind::Sync)
            throw std::invalid_argument("check_sync_packet expects a Sync packet");
        if (!state.is_member(pkt.src))
            return SyncVerdict::Reject;

        auto &window = state.sync_times[pkt.src];
        const double horizon = now - config.duty_period();
        while (!window.empty() && window.front() <= horizon)
            window.pop_front();
        window.push_back(now);

        bool too_close = false;
        if (auto it = state.last_sync_time.find(pkt.src); it != state.last_sync_time.end())
            too_close = now - it->second < config.sync_interval_threshold;
        state.last_sync_time[pkt.src] = now;

        const bool too_many = static_cast<std::int64_t>(window.size()) > config.sync_count_threshold;
        if (too_many || too_close)
        {
            state.mode = ChMode::AuthMode;
            return SyncVerdict::EnterAuthMode;
        }
        return SyncVerdict::Accept;
    }

    TokenVerdict authenticate_member(ChAuthState &state, const Packet &pkt)
    {
        if (state.mode != ChMode::AuthMode)
            throw std::logic_error("authenticate_member requires AuthMode");
        if (!state.is_flagged(pkt.src) && pkt.token)
        {
            auto it = state.issued_tokens.find(pkt.src);
            if (it != state.issued_tokens.end() && it->second == *pkt.token)
            {
                state.issued_tokens.erase(it);
                return TokenVerdict::Valid;
            }
        }
        state.flagged.insert(pkt.src);
        state.issued_tokens.erase(pkt.src);
        return TokenVerdict::Flagged;
    }

    std::vector<std::pair<NodeId, std::uint64_t>> issue_tokens(ChAuthState &state, Rng &rng)
    {
        std::vector<std::pair<NodeId, std::uint64_t>> out;
        state.issued_tokens.clear();
        for (auto id : state.roster)
        {
            if (state.is_flagged(id))
                continue;
            const auto token = rng.next_u64();
            state.issued_tokens[id] = token;
            out.emplace_back(id, token);
        }
        return out;
    }
}
