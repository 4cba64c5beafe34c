#include "dossim/attack.hpp"

#include <cmath>

namespace dossim::attack
{
    void AttackProfile::validate() const
    {
        if (!(rate > 0.0))
            throw std::invalid_argument("attack rate must be > 0");
    }

    std::vector<AttackProfile> profiles_from_config(const NetworkConfig &config)
    {
        std::vector<AttackProfile> out;
        for (auto kind : config.attack_kinds)
        {
            AttackProfile p;
            p.kind = kind;
            p.rate = config.attacker_sync_rate;
            p.target = config.attack_target;
            p.id_strategy = kind == AttackKind::DummyDataForgedId ? IdStrategy::RandomForgedId : config.id_strategy;
            p.burst_length = config.duty_period();
            p.interval = config.attack_interval;
            p.validate();
            out.push_back(p);
        }
        return out;
    }

    bool burst_active(const AttackProfile &profile, double t) noexcept
    {
        if (profile.interval <= 0.0)
            return true;
        const double cycle = profile.burst_length + profile.interval;
        return std::fmod(t, cycle) < profile.burst_length;
    }

    namespace
    {
        NodeId claimed_id(const AttackProfile &profile, const SensorNode &attacker, const EmitContext &ctx, Rng &rng)
        {
            if (profile.id_strategy == IdStrategy::OwnId || ctx.node_count < 2)
                return attacker.id;
            // Any id but the attacker's own.
            auto forged = static_cast<NodeId>(rng.below(static_cast<std::uint64_t>(ctx.node_count - 1)));
            if (forged >= attacker.id)
                ++forged;
            return forged;
        }
    }

    std::vector<Packet> attacker_emit(const AttackProfile &profile, const SensorNode &attacker, double now, double window,
                                      const EmitContext &ctx, Rng &rng)
    {
        std::vector<Packet> out;
        if (!attacker.alive || !attacker.is_attacker || window <= 0.0)
            return out;
        profile.validate();
        if (profile.kind == AttackKind::SleepSyncReplay && !ctx.last_sleep_sync)
            return out;

        const double period = 1.0 / profile.rate;
        // k/rate < window, guarded so that rate*window landing on an integer is exact.
        const auto count = static_cast<std::int64_t>(std::ceil(profile.rate * window * (1.0 - 1e-12)));
        out.reserve(static_cast<std::size_t>(count));
        const NodeId dst = profile.target == AttackTarget::OwnCluster ? ctx.cluster_head : kBroadcast;

        for (std::int64_t k = 0; k < count; ++k)
        {
            const double t = now + static_cast<double>(k) * period;
            if (!burst_active(profile, t))
                continue;

            Packet p;
            p.timestamp = t;
            p.transmitter = attacker.id;
            p.legit = false;
            switch (profile.kind)
            {
            case AttackKind::SyncFlood:
                p.kind = PacketKind::Sync;
                p.src = claimed_id(profile, attacker, ctx, rng);
                p.dst = dst;
                p.size = ctx.control_size;
                p.intent = SyncIntent::StayAwake;
                break;
            case AttackKind::SleepSyncReplay:
                p = *ctx.last_sleep_sync;
                p.timestamp = t;
                p.transmitter = attacker.id;
                p.legit = false;
                p.src = profile.id_strategy == IdStrategy::OwnId ? attacker.id : claimed_id(profile, attacker, ctx, rng);
                p.dst = dst;
                p.intent = SyncIntent::StayAwake;
                break;
            case AttackKind::DummyDataForgedId:
                p.kind = PacketKind::Data;
                p.src = claimed_id(profile, attacker, ctx, rng);
                p.dst = ctx.cluster_head;
                p.size = ctx.data_size;
                break;
            }
            out.push_back(std::move(p));
        }
        return out;
    }
}
