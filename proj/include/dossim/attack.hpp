#pragma once

#include "dossim/config.hpp"
#include "dossim/rng.hpp"
#include "dossim/types.hpp"

#include <optional>
#include <stdexcept>
#include <vector>

namespace dossim::attack
{
    struct AttackProfile
    {
        AttackKind kind = AttackKind::SyncFlood;
        double rate = 20.0; // packets/s
        AttackTarget target = AttackTarget::OwnCluster;
        IdStrategy id_strategy = IdStrategy::OwnId;
        double burst_length = 1.0; // s of activity per cycle when bursting
        double interval = 0.0;     // s of silence between bursts; 0 = continuous

        /// Throws std::invalid_argument unless rate > 0.
        void validate() const;
    };

    /// One profile per configured attack kind.
    std::vector<AttackProfile> profiles_from_config(const NetworkConfig &config);

    /// Inputs the adversary sees when generating traffic.
    struct EmitContext
    {
        NodeId cluster_head = kBroadcast;         // destination for OwnCluster traffic
        std::int64_t node_count = 0;              // id space for forged ids
        std::uint32_t control_size = 32;          // bytes
        std::uint32_t data_size = 512;            // bytes
        std::optional<Packet> last_sleep_sync;    // last legitimate sync overheard
    };

    /// Packets the attacker sends in [now, now + window). Emission times are
    /// now + k/rate, skipping any that fall into a silent part of the burst cycle.
    /// Dead or non-attacker nodes emit nothing.
    std::vector<Packet> attacker_emit(const AttackProfile &profile, const SensorNode &attacker, double now, double window,
                                      const EmitContext &ctx, Rng &rng);

    /// Whether a burst-cycled attacker is transmitting at time t.
    bool burst_active(const AttackProfile &profile, double t) noexcept;
}
