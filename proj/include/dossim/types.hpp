#pragma once

#include <cmath>
#include <cstdint>
#include <optional>
#include <string_view>
#include <vector>

namespace dossim
{
    using NodeId = std::int32_t;

    inline constexpr NodeId kBroadcast = -1;

    struct Vec2
    {
        double x = 0.0;
        double y = 0.0;

        friend constexpr Vec2 operator+(Vec2 a, Vec2 b) noexcept { return {a.x + b.x, a.y + b.y}; }
        friend constexpr Vec2 operator-(Vec2 a, Vec2 b) noexcept { return {a.x - b.x, a.y - b.y}; }
        friend constexpr Vec2 operator*(double s, Vec2 v) noexcept { return {s * v.x, s * v.y}; }
        friend constexpr bool operator==(Vec2, Vec2) = default;
    };

    inline double distance(Vec2 a, Vec2 b) noexcept
    {
        return std::hypot(a.x - b.x, a.y - b.y);
    }

    inline double distance_sq(Vec2 a, Vec2 b) noexcept
    {
        const double dx = a.x - b.x;
        const double dy = a.y - b.y;
        return dx * dx + dy * dy;
    }

    enum class Role : std::uint8_t
    {
        Normal,
        ClusterHead,
        Sink,
    };

    enum class RadioState : std::uint8_t
    {
        Sleep,
        Idle,
        Rx,
        Tx,
    };

    std::string_view to_string(RadioState s) noexcept;
    std::string_view to_string(Role r) noexcept;

    struct SensorNode
    {
        NodeId id = 0;
        Vec2 position;
        Role role = Role::Normal;
        bool is_attacker = false;
        double residual_energy = 0.0;
        RadioState radio_state = RadioState::Idle;
        std::optional<NodeId> cluster_id;
        bool alive = true;
        // Maximum radius this node can reach; the radio adjusts power per packet below it.
        double tx_range = 0.0;

        friend bool operator==(const SensorNode &, const SensorNode &) = default;
    };

    enum class PacketKind : std::uint8_t
    {
        Data,
        Sync,
        SyncAuth,
        AuthToken,
        TdmaSchedule,
        KeyHalf1,
        KeyHalf2,
        Commitment,
        Ack,
    };

    std::string_view to_string(PacketKind k) noexcept;

    /// What a Sync packet asks its receivers to do with their sleep schedule.
    enum class SyncIntent : std::uint8_t
    {
        KeepSchedule,
        StayAwake,
        SleepNow,
    };

    struct Packet
    {
        PacketKind kind = PacketKind::Data;
        NodeId src = 0;
        NodeId dst = kBroadcast;
        std::uint32_t size = 1; // bytes
        std::vector<std::uint8_t> payload;
        double timestamp = 0.0;

        // Fields below are simulator bookkeeping, not on-air content visible to the defense.
        NodeId transmitter = 0;
        bool legit = true;
        SyncIntent intent = SyncIntent::KeepSchedule;
        std::optional<std::uint64_t> token;

        std::uint64_t bits() const noexcept { return std::uint64_t{size} * 8u; }
    };
}
