#pragma once

#include "dossim/attack.hpp"
#include "dossim/cipher.hpp"
#include "dossim/clustering.hpp"
#include "dossim/config.hpp"
#include "dossim/energy.hpp"
#include "dossim/event_log.hpp"
#include "dossim/interlock.hpp"
#include "dossim/metrics.hpp"
#include "dossim/network.hpp"
#include "dossim/rng.hpp"
#include "dossim/sink_auth.hpp"
#include "dossim/sink_planner.hpp"
#include "dossim/sync_auth.hpp"

#include <cstdint>
#include <functional>
#include <limits>
#include <map>
#include <optional>
#include <queue>
#include <string_view>
#include <variant>
#include <vector>

namespace dossim::engine
{
    /// Listed in tie-break rank order: at equal times, phase changes run first.
    enum class EventKind : std::uint8_t
    {
        RoundPhaseChange,
        DutyCycleToggle,
        SinkArrival,
        PacketDelivery,
        NodeDeath,
    };

    std::string_view to_string(EventKind k) noexcept;

    enum class Phase : std::uint8_t
    {
        ClusterFormation,
        DataCollection,
        DataRelay,
        RoundEnd,
    };

    std::string_view to_string(Phase p) noexcept;

    enum class ToggleKind : std::uint8_t
    {
        ListenStart,  // global duty-cycle window opens
        ListenEnd,    // global duty-cycle window closes
        SlotStart,    // a member's TDMA slot opens
        SlotEnd,      // a member's TDMA slot closes
        AwakeExpiry,  // a sync-extended wake period may have run out
    };

    struct PhasePayload
    {
        Phase phase = Phase::ClusterFormation;
    };

    struct TogglePayload
    {
        ToggleKind what = ToggleKind::ListenStart;
    };

    struct SinkPayload
    {
        std::size_t stop = 0;
    };

    struct DeathPayload
    {
        std::uint64_t version = 0;
    };

    struct Event
    {
        double time = 0.0;
        EventKind kind = EventKind::PacketDelivery;
        NodeId node = kBroadcast;
        std::uint64_t seq = 0;
        std::int64_t round = 0;
        std::variant<std::monostate, Packet, PhasePayload, TogglePayload, SinkPayload, DeathPayload> payload;
    };

    /// Min-queue ordered by (time, kind rank, node id, insertion order).
    class EventQueue
    {
    public:
        void push(Event e);
        Event pop();
        const Event &top() const { return heap_.top(); }
        bool empty() const noexcept { return heap_.empty(); }
        std::size_t size() const noexcept { return heap_.size(); }
        void clear() { heap_ = {}; }

    private:
        struct Later
        {
            bool operator()(const Event &a, const Event &b) const noexcept;
        };
        std::priority_queue<Event, std::vector<Event>, Later> heap_;
        std::uint64_t next_seq_ = 0;
    };

    enum class Delivery : std::uint8_t
    {
        Delivered,
        OutOfRange,
        ReceiverAsleep,
        ReceiverDead,
    };

    std::string_view to_string(Delivery d) noexcept;

    /// Energy the radio spends sending `bits` over `distance` (per-bit model, or
    /// power x airtime in fixed-power mode).
    double packet_tx_energy(std::uint64_t bits, double distance, const NetworkConfig &config) noexcept;
    double packet_rx_energy(std::uint64_t bits, const NetworkConfig &config) noexcept;

    /// Range, liveness and radio-state test for one receiver.
    Delivery classify_delivery(const SensorNode &sender, const SensorNode &receiver) noexcept;

    /// Unicast delivery: the sender always pays the transmit cost; the receiver
    /// pays the receive cost only if the packet is delivered.
    Delivery deliver(const Packet &pkt, SensorNode &sender, energy::EnergyLedger &sender_ledger, SensorNode &receiver,
                     energy::EnergyLedger &receiver_ledger, const NetworkConfig &config);

    struct SimulationOptions
    {
        std::optional<Network> network;  // replaces deploy_network(config, seed)
        std::function<std::vector<NodeId>(std::int64_t round, const Network &)> head_selector;
        EventLog *log = nullptr;
    };

    struct RunResult
    {
        metrics::MetricsReport report;
        std::size_t events_processed = 0;
    };

    /// One simulation: deployment, rounds until the clock passes sim_time or every
    /// sensor is dead, metrics at the end.
    class Simulation
    {
    public:
        Simulation(const NetworkConfig &config, std::uint64_t seed, SimulationOptions options = {});

        /// Runs one full round. Returns false once the simulation has finished.
        bool run_round();

        /// Runs to completion and returns the report.
        RunResult run();

        double clock() const noexcept { return clock_; }
        std::int64_t round() const noexcept { return round_; }
        Phase phase() const noexcept { return phase_; }
        bool finished() const noexcept { return finished_; }
        const Network &network() const noexcept { return net_; }
        const std::vector<energy::EnergyLedger> &ledgers() const noexcept { return ledgers_; }
        const std::vector<clustering::Cluster> &clusters() const noexcept { return clusters_; }
        const std::optional<sink::SinkPlan> &sink_plan() const noexcept { return plan_; }
        const std::vector<bool> &flagged() const noexcept { return flagged_; }
        const std::vector<bool> &vetted() const noexcept { return vetted_; }
        const security::SinkKeys &sink_keys() const noexcept { return keys_; }
        std::int64_t sink_accepted() const noexcept { return sink_accepted_; }
        std::int64_t sink_rejected() const noexcept { return sink_rejected_; }
        metrics::MetricsReport report() const;

    private:
        struct ChBuffer
        {
            double raw_bits = 0.0;
            double capacity_bits = 0.0;
            std::map<NodeId, std::int64_t> legit; // origin -> packets
        };

        struct Carry
        {
            double bits = 0.0; // already aggregated
            std::map<NodeId, std::int64_t> legit;
        };

        struct Episode
        {
            bool open = false;
            double start = 0.0;
        };

        // Round control
        void start_round(double t);
        void start_data_collection(double t);
        void start_data_relay(double t);
        void end_round(double t);
        void finish(double t);

        // Event handling
        void schedule(double time, EventKind kind, NodeId node,
                      std::variant<std::monostate, Packet, PhasePayload, TogglePayload, SinkPayload, DeathPayload> payload);
        void process(Event &e);
        void on_toggle(const Event &e, ToggleKind what);
        void on_packet(const Event &e, Packet &pkt);
        void on_upload(const Event &e);
        void on_death(const Event &e, std::uint64_t version);

        // Radio and energy
        bool wants_awake(NodeId id, double t) const;
        void update_state(NodeId id, double t);
        void settle(NodeId id, double t);
        void debit(NodeId id, energy::Bucket bucket, double joules, double t);
        void mark_dead(NodeId id, double t);
        void predict_death(NodeId id);
        void extend_awake(NodeId id, double until);
        double airtime(std::uint64_t bits, double rate) const noexcept;
        void transmit(NodeId id, std::uint64_t bits, double distance, double t);
        bool receive(NodeId sender, NodeId receiver, std::uint64_t bits, double t);

        // Protocol pieces
        void handle_sync(const Packet &pkt, NodeId ch, double t, bool &accepted);
        void handle_data(const Packet &pkt, double t);
        void issue_tokens_for(NodeId ch, double t);
        void emit_attacks(double from, double to);
        void note_loss(NodeId ch, double t, std::string_view reason);
        void close_episode(NodeId ch, double t, std::string_view reason);
        void flag_node(NodeId id, NodeId by_ch, double t);
        std::vector<NodeId> cluster_receivers(NodeId ch, NodeId except) const;

        void log(double t, std::string_view kind, NodeId node, nlohmann::json detail = nlohmann::json::object());

        NetworkConfig config_;
        std::uint64_t seed_;
        SimulationOptions options_;
        Network net_;
        std::vector<energy::EnergyLedger> ledgers_;
        WideBlockCipher cipher_;
        security::SinkKeys keys_;

        Rng election_rng_;
        Rng token_rng_;
        Rng session_rng_;
        clustering::Rotation rotation_;
        std::vector<attack::AttackProfile> profiles_;
        std::map<NodeId, Rng> attack_rngs_;

        EventQueue queue_;
        double clock_ = 0.0;
        std::int64_t round_ = -1;
        Phase phase_ = Phase::RoundEnd;
        double phase_end_ = 0.0;
        double round_start_ = 0.0;
        bool finished_ = false;
        bool listen_now_ = false;
        std::int64_t listen_index_ = 0;
        double next_listen_start_ = 0.0;
        std::uint64_t current_cause_ = 0;
        std::size_t events_processed_ = 0;

        // Per node
        std::vector<double> last_charge_;
        std::vector<double> airtime_credit_;
        std::vector<double> awake_until_;
        std::vector<double> expiry_pending_;
        std::vector<std::uint64_t> death_version_;
        std::vector<NodeId> cluster_of_;  // CH this round, or kBroadcast
        std::vector<NodeId> attack_ch_;   // CH an active attacker targets, or kBroadcast
        std::vector<double> attack_radius_;
        std::vector<bool> in_slot_;
        std::vector<double> slot_start_;
        std::vector<double> slot_end_;
        std::vector<std::optional<std::uint64_t>> token_;
        std::vector<bool> vetted_;
        std::vector<bool> flagged_;
        std::vector<bool> upload_done_;
        std::vector<Carry> carry_;
        std::vector<std::int64_t> received_;
        std::vector<std::int64_t> sent_;

        // Per round
        std::vector<clustering::Cluster> clusters_;
        std::map<NodeId, std::size_t> cluster_index_;
        std::map<NodeId, security::ChAuthState> auth_;
        std::map<NodeId, ChBuffer> buffers_;
        std::map<NodeId, Episode> episodes_open_;
        std::map<NodeId, Packet> last_legit_sync_;
        std::optional<sink::SinkPlan> plan_;

        std::vector<double> episodes_;
        std::int64_t rounds_completed_ = 0;
        std::int64_t sink_accepted_ = 0;
        std::int64_t sink_rejected_ = 0;
    };

    RunResult run_simulation(const NetworkConfig &config, std::uint64_t seed, EventLog *log = nullptr);
}
