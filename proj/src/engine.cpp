#include "dossim/engine.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace dossim::engine
{
    namespace
    {
        constexpr double kNever = std::numeric_limits<double>::infinity();
    }

    std::string_view to_string(EventKind k) noexcept
    {
        switch (k)
        {
        case EventKind::RoundPhaseChange:
            return "round_phase_change";
        case EventKind::DutyCycleToggle:
            return "duty_cycle_toggle";
        case EventKind::SinkArrival:
            return "sink_arrival";
        case EventKind::PacketDelivery:
            return "packet_delivery";
        case EventKind::NodeDeath:
            return "node_death";
        }
        return "?";
    }

    std::string_view to_string(Phase p) noexcept
    {
        switch (p)
        {
        case Phase::ClusterFormation:
            return "cluster_formation";
        case Phase::DataCollection:
            return "data_collection";
        case Phase::DataRelay:
            return "data_relay";
        case Phase::RoundEnd:
            return "round_end";
        }
        return "?";
    }

    std::string_view to_string(Delivery d) noexcept
    {
        switch (d)
        {
        case Delivery::Delivered:
            return "delivered";
        case Delivery::OutOfRange:
            return "out_of_range";
        case Delivery::ReceiverAsleep:
            return "receiver_asleep";
        case Delivery::ReceiverDead:
            return "receiver_dead";
        }
        return "?";
    }

    bool EventQueue::Later::operator()(const Event &a, const Event &b) const noexcept
    {
        if (a.time != b.time)
            return a.time > b.time;
        if (a.kind != b.kind)
            return a.kind > b.kind;
        if (a.node != b.node)
            return a.node > b.node;
        return a.seq > b.seq;
    }

    void EventQueue::push(Event e)
    {
        e.seq = next_seq_++;
        heap_.push(std::move(e));
    }

    Event EventQueue::pop()
    {
        Event e = heap_.top();
        heap_.pop();
        return e;
    }

    double packet_tx_energy(std::uint64_t bits, double distance, const NetworkConfig &config) noexcept
    {
        if (config.fixed_power_mode)
            return config.tx_power * static_cast<double>(bits) / config.channel_rate;
        return energy::tx_energy(bits, distance, config);
    }

    double packet_rx_energy(std::uint64_t bits, const NetworkConfig &config) noexcept
    {
        if (config.fixed_power_mode)
            return config.rx_power * static_cast<double>(bits) / config.channel_rate;
        return energy::rx_energy(bits, config);
    }

    Delivery classify_delivery(const SensorNode &sender, const SensorNode &receiver) noexcept
    {
        if (distance(sender.position, receiver.position) > sender.tx_range)
            return Delivery::OutOfRange;
        if (!receiver.alive)
            return Delivery::ReceiverDead;
        if (receiver.radio_state == RadioState::Sleep)
            return Delivery::ReceiverAsleep;
        return Delivery::Delivered;
    }

    Delivery deliver(const Packet &pkt, SensorNode &sender, energy::EnergyLedger &sender_ledger, SensorNode &receiver,
                     energy::EnergyLedger &receiver_ledger, const NetworkConfig &config)
    {
        if (!sender.alive)
            throw std::invalid_argument("a dead node cannot send");
        sender_ledger.debit(energy::Bucket::Tx, packet_tx_energy(pkt.bits(), distance(sender.position, receiver.position), config));
        sender.residual_energy = sender_ledger.residual();
        sender.alive = sender_ledger.alive();

        const auto outcome = classify_delivery(sender, receiver);
        if (outcome == Delivery::Delivered)
        {
            receiver_ledger.debit(energy::Bucket::Rx, packet_rx_energy(pkt.bits(), config));
            receiver.residual_energy = receiver_ledger.residual();
            receiver.alive = receiver_ledger.alive();
        }
        return outcome;
    }

    // ---------------------------------------------------------------------------------

    Simulation::Simulation(const NetworkConfig &config, std::uint64_t seed, SimulationOptions options)
        : config_(config), seed_(seed), options_(std::move(options)), election_rng_(seed, Stream::Election),
          token_rng_(seed, Stream::Tokens), session_rng_(seed, Stream::Session)
    {
        config_.validate();
        net_ = options_.network ? *options_.network : deploy_network(config_, seed_);
        const auto n = net_.nodes.size();
        for (std::size_t i = 0; i < n; ++i)
        {
            if (net_.nodes[i].id != static_cast<NodeId>(i))
                throw std::invalid_argument("node ids must be 0..n-1 in order");
            ledgers_.emplace_back(static_cast<NodeId>(i), net_.nodes[i].residual_energy);
        }

        Rng key_rng(seed_, Stream::Keys);
        keys_ = security::make_sink_keys(static_cast<std::size_t>(config_.rsa_prime_bits), n, key_rng);
        rotation_ = clustering::Rotation(n);
        profiles_ = attack::profiles_from_config(config_);

        last_charge_.assign(n, 0.0);
        airtime_credit_.assign(n, 0.0);
        awake_until_.assign(n, 0.0);
        expiry_pending_.assign(n, kNever);
        death_version_.assign(n, 0);
        cluster_of_.assign(n, kBroadcast);
        attack_ch_.assign(n, kBroadcast);
        attack_radius_.assign(n, 0.0);
        in_slot_.assign(n, false);
        slot_start_.assign(n, 0.0);
        slot_end_.assign(n, 0.0);
        token_.assign(n, std::nullopt);
        vetted_.assign(n, false);
        flagged_.assign(n, false);
        upload_done_.assign(n, false);
        carry_.assign(n, Carry{});
        received_.assign(n, 0);
        sent_.assign(n, 0);

        if (options_.log)
        {
            nlohmann::json attackers = nlohmann::json::array();
            nlohmann::json initial = nlohmann::json::array();
            for (const auto &node : net_.nodes)
            {
                if (node.is_attacker)
                    attackers.push_back(node.id);
                initial.push_back(node.residual_energy);
            }
            log(0.0, "run_start", kBroadcast,
                {{"node_count", n}, {"seed", seed_}, {"packet_size", config_.packet_size},
                 {"initial", initial}, {"attackers", attackers}, {"defense", config_.defense_enabled}});
        }

        if (config_.sim_time > 0.0)
        {
            schedule(0.0, EventKind::RoundPhaseChange, kBroadcast, PhasePayload{Phase::ClusterFormation});
            schedule(0.0, EventKind::DutyCycleToggle, kBroadcast, TogglePayload{ToggleKind::ListenStart});
            next_listen_start_ = 0.0;
        }
        else
        {
            finish(0.0);
        }
    }

    void Simulation::log(double t, std::string_view kind, NodeId node, nlohmann::json detail)
    {
        if (options_.log)
            options_.log->write(LogRecord{t, std::string(kind), node, std::move(detail)});
    }

    void Simulation::schedule(double time, EventKind kind, NodeId node,
                              std::variant<std::monostate, Packet, PhasePayload, TogglePayload, SinkPayload, DeathPayload> payload)
    {
        Event e;
        e.time = time;
        e.kind = kind;
        e.node = node;
        e.round = round_;
        e.payload = std::move(payload);
        queue_.push(std::move(e));
    }

    bool Simulation::run_round()
    {
        if (finished_)
            return false;
        const auto done = rounds_completed_;
        while (!finished_ && !queue_.empty() && rounds_completed_ == done)
        {
            Event e = queue_.pop();
            process(e);
        }
        if (!finished_ && queue_.empty())
            finish(clock_);
        return !finished_;
    }

    RunResult Simulation::run()
    {
        while (run_round())
        {
        }
        return RunResult{report(), events_processed_};
    }

    metrics::MetricsReport Simulation::report() const
    {
        std::vector<double> residual;
        std::vector<double> initial;
        std::vector<bool> attackers;
        for (std::size_t i = 0; i < ledgers_.size(); ++i)
        {
            residual.push_back(ledgers_[i].residual());
            initial.push_back(ledgers_[i].initial());
            attackers.push_back(net_.nodes[i].is_attacker);
        }
        const auto detection = metrics::tally_detection(attackers, vetted_, flagged_);
        return metrics::assemble_report(received_, sent_, detection, residual, initial, episodes_,
                                        static_cast<double>(config_.packet_size), clock_, rounds_completed_);
    }

    void Simulation::process(Event &e)
    {
        clock_ = e.time;
        current_cause_ = e.seq;
        ++events_processed_;
        if (options_.log)
            log(e.time, "event", e.node, {{"seq", e.seq}, {"type", to_string(e.kind)}});

        switch (e.kind)
        {
        case EventKind::RoundPhaseChange:
            switch (std::get<PhasePayload>(e.payload).phase)
            {
            case Phase::ClusterFormation:
                start_round(e.time);
                break;
            case Phase::DataCollection:
                start_data_collection(e.time);
                break;
            case Phase::DataRelay:
                start_data_relay(e.time);
                break;
            case Phase::RoundEnd:
                end_round(e.time);
                break;
            }
            break;
        case EventKind::DutyCycleToggle:
            on_toggle(e, std::get<TogglePayload>(e.payload).what);
            break;
        case EventKind::SinkArrival:
            if (e.round == round_)
                on_upload(e);
            break;
        case EventKind::PacketDelivery:
            if (e.round == round_)
                on_packet(e, std::get<Packet>(e.payload));
            break;
        case EventKind::NodeDeath:
            on_death(e, std::get<DeathPayload>(e.payload).version);
            break;
        }
    }

    // --- radio and energy -----------------------------------------------------------

    double Simulation::airtime(std::uint64_t bits, double rate) const noexcept
    {
        return static_cast<double>(bits) / rate;
    }

    void Simulation::settle(NodeId id, double t)
    {
        const auto i = static_cast<std::size_t>(id);
        auto &node = net_.nodes[i];
        if (!node.alive)
            return;
        const double dt = t - last_charge_[i];
        if (dt <= 0.0)
            return;
        // Time covered by packet airtime is charged per bit, not per second.
        const double credit = std::min(airtime_credit_[i], dt);
        airtime_credit_[i] -= credit;
        last_charge_[i] = t;

        const double power = energy::state_power(node.radio_state, config_);
        const double joules = (dt - credit) * power;
        if (joules <= 0.0)
            return;
        auto &ledger = ledgers_[i];
        const double residual = ledger.residual();
        const double taken = ledger.debit(energy::bucket_for(node.radio_state), joules);
        node.residual_energy = ledger.residual();
        if (options_.log)
            log(t, "energy", id, {{"bucket", energy::to_string(energy::bucket_for(node.radio_state))}, {"joules", taken}, {"cause", current_cause_}});
        if (!ledger.alive())
            mark_dead(id, std::min(t, t - dt + credit + residual / power));
    }

    void Simulation::debit(NodeId id, energy::Bucket bucket, double joules, double t)
    {
        const auto i = static_cast<std::size_t>(id);
        settle(id, t);
        if (!net_.nodes[i].alive || !(joules > 0.0))
            return;
        auto &ledger = ledgers_[i];
        const double taken = ledger.debit(bucket, joules);
        net_.nodes[i].residual_energy = ledger.residual();
        if (options_.log)
            log(t, "energy", id, {{"bucket", energy::to_string(bucket)}, {"joules", taken}, {"cause", current_cause_}});
        if (!ledger.alive())
            mark_dead(id, t);
        else
            predict_death(id);
    }

    void Simulation::mark_dead(NodeId id, double t)
    {
        auto &node = net_.nodes[static_cast<std::size_t>(id)];
        if (!node.alive)
            return;
        node.alive = false;
        node.residual_energy = 0.0;
        node.radio_state = RadioState::Sleep;
        ++death_version_[static_cast<std::size_t>(id)];
        if (options_.log)
            log(t, "node_death", id, {{"cause", current_cause_}});
        if (auto it = episodes_open_.find(id); it != episodes_open_.end() && it->second.open)
            close_episode(id, t, "death");
    }

    void Simulation::predict_death(NodeId id)
    {
        const auto i = static_cast<std::size_t>(id);
        const auto &node = net_.nodes[i];
        if (!node.alive)
            return;
        const double power = energy::state_power(node.radio_state, config_);
        if (power <= 0.0)
            return;
        const double when = last_charge_[i] + airtime_credit_[i] + ledgers_[i].residual() / power;
        if (when > phase_end_)
            return;
        schedule(std::max(when, clock_), EventKind::NodeDeath, id, DeathPayload{++death_version_[i]});
    }

    void Simulation::on_death(const Event &e, std::uint64_t version)
    {
        const auto i = static_cast<std::size_t>(e.node);
        if (version != death_version_[i] || !net_.nodes[i].alive)
            return;
        settle(e.node, e.time);
        if (!net_.nodes[i].alive)
            return;
        // Rounding can leave a sliver of energy at the predicted instant.
        const auto bucket = energy::bucket_for(net_.nodes[i].radio_state);
        const double rest = ledgers_[i].residual();
        if (rest <= 1e-9 * std::max(1.0, ledgers_[i].initial()))
            debit(e.node, bucket, rest, e.time);
        else
            predict_death(e.node);
    }

    bool Simulation::wants_awake(NodeId id, double t) const
    {
        const auto i = static_cast<std::size_t>(id);
        const auto &node = net_.nodes[i];
        if (node.is_attacker)
            return true;
        if (phase_ == Phase::ClusterFormation || phase_ == Phase::RoundEnd)
            return true;
        if (node.role == Role::ClusterHead)
        {
            if (phase_ == Phase::DataCollection || !upload_done_[i])
                return true;
        }
        else if (cluster_of_[i] == kBroadcast)
        {
            return false; // unclustered nodes sleep out the round
        }
        return in_slot_[i] || listen_now_ || awake_until_[i] > t;
    }

    void Simulation::update_state(NodeId id, double t)
    {
        auto &node = net_.nodes[static_cast<std::size_t>(id)];
        if (!node.alive)
            return;
        const auto want = wants_awake(id, t) ? RadioState::Idle : RadioState::Sleep;
        if (want == node.radio_state)
            return;
        settle(id, t);
        if (!node.alive)
            return;
        node.radio_state = want;
        predict_death(id);
    }

    void Simulation::extend_awake(NodeId id, double until)
    {
        const auto i = static_cast<std::size_t>(id);
        if (until <= awake_until_[i])
            return;
        awake_until_[i] = until;
        update_state(id, clock_);
        if (expiry_pending_[i] == kNever)
        {
            expiry_pending_[i] = until;
            schedule(until, EventKind::DutyCycleToggle, id, TogglePayload{ToggleKind::AwakeExpiry});
        }
    }

    void Simulation::transmit(NodeId id, std::uint64_t bits, double dist, double t)
    {
        const auto i = static_cast<std::size_t>(id);
        settle(id, t);
        if (!net_.nodes[i].alive)
            return;
        if (net_.nodes[i].radio_state == RadioState::Idle)
            airtime_credit_[i] += airtime(bits, config_.channel_rate);
        debit(id, energy::Bucket::Tx, packet_tx_energy(bits, dist, config_), t);
    }

    bool Simulation::receive(NodeId sender, NodeId receiver, std::uint64_t bits, double t)
    {
        const auto r = static_cast<std::size_t>(receiver);
        settle(receiver, t);
        const auto outcome = classify_delivery(net_.nodes[static_cast<std::size_t>(sender)], net_.nodes[r]);
        if (outcome != Delivery::Delivered)
            return false;
        airtime_credit_[r] += airtime(bits, config_.channel_rate);
        debit(receiver, energy::Bucket::Rx, packet_rx_energy(bits, config_), t);
        return net_.nodes[r].alive;
    }

    // --- round control --------------------------------------------------------------

    void Simulation::start_round(double t)
    {
        round_start_ = t;
        if (t >= config_.sim_time)
        {
            finish(t);
            return;
        }
        for (const auto &node : net_.nodes)
            settle(node.id, t);
        if (std::none_of(net_.nodes.begin(), net_.nodes.end(), [](const SensorNode &n) { return n.alive; }))
        {
            finish(t);
            return;
        }

        ++round_;
        phase_ = Phase::ClusterFormation;
        phase_end_ = t + config_.t_cf;
        const auto n = net_.nodes.size();
        for (auto &node : net_.nodes)
        {
            node.role = Role::Normal;
            node.cluster_id.reset();
        }
        std::fill(cluster_of_.begin(), cluster_of_.end(), kBroadcast);
        std::fill(attack_ch_.begin(), attack_ch_.end(), kBroadcast);
        std::fill(in_slot_.begin(), in_slot_.end(), false);
        std::fill(upload_done_.begin(), upload_done_.end(), false);
        std::fill(token_.begin(), token_.end(), std::nullopt);
        clusters_.clear();
        cluster_index_.clear();
        auth_.clear();
        buffers_.clear();
        episodes_open_.clear();
        last_legit_sync_.clear();
        attack_rngs_.clear();
        plan_.reset();

        std::vector<NodeId> heads;
        bool forced = false;
        if (options_.head_selector)
        {
            for (auto id : options_.head_selector(round_, net_))
                if (id >= 0 && static_cast<std::size_t>(id) < n && net_.nodes[static_cast<std::size_t>(id)].alive)
                    heads.push_back(id);
            std::sort(heads.begin(), heads.end());
            heads.erase(std::unique(heads.begin(), heads.end()), heads.end());
        }
        else
        {
            try
            {
                auto election = clustering::elect_cluster_heads(net_.nodes, round_, config_.ch_fraction_z, rotation_, election_rng_);
                heads = std::move(election.heads);
                forced = election.forced;
            }
            catch (const clustering::NoAliveNodes &)
            {
                --round_;
                finish(t);
                return;
            }
        }
        if (heads.empty())
        {
            --round_;
            finish(t);
            return;
        }

        for (auto id : heads)
            net_.nodes[static_cast<std::size_t>(id)].role = Role::ClusterHead;

        Rng firefly_rng(seed_, Stream::Firefly, {static_cast<std::uint64_t>(round_)});
        const auto formation = clustering::form_clusters(net_.nodes, heads, config_, firefly_rng,
                                                         [this](const SensorNode &node) { return !flagged_[static_cast<std::size_t>(node.id)]; });
        clusters_ = formation.clusters;

        nlohmann::json heads_json = nlohmann::json::array();
        for (auto id : heads)
            heads_json.push_back(id);
        if (options_.log)
            log(t, "round_start", kBroadcast, {{"round", round_}, {"heads", heads_json}, {"forced", forced}});

        for (std::size_t c = 0; c < clusters_.size(); ++c)
        {
            const auto &cl = clusters_[c];
            cluster_index_[cl.ch_id] = c;
            episodes_open_[cl.ch_id] = Episode{true, t};
            for (auto m : cl.member_ids)
            {
                cluster_of_[static_cast<std::size_t>(m)] = cl.ch_id;
                net_.nodes[static_cast<std::size_t>(m)].cluster_id = cl.ch_id;
                vetted_[static_cast<std::size_t>(m)] = true;
            }
            nlohmann::json members = nlohmann::json::array();
            for (auto m : cl.member_ids)
                members.push_back(m);
            if (options_.log)
                log(t, "cluster", cl.ch_id, {{"members", members}});
        }

        // Attackers target the cluster they joined; flagged ones latch onto the nearest reachable CH.
        for (const auto &node : net_.nodes)
        {
            const auto i = static_cast<std::size_t>(node.id);
            if (!node.is_attacker || !node.alive || node.role == Role::ClusterHead)
                continue;
            NodeId target = cluster_of_[i];
            if (target == kBroadcast && flagged_[i])
            {
                double best = kNever;
                for (auto h : heads)
                {
                    const auto &ch = net_.nodes[static_cast<std::size_t>(h)];
                    const double d = distance(node.position, ch.position);
                    if (clustering::in_range(node, ch) && d < best)
                    {
                        best = d;
                        target = h;
                    }
                }
            }
            if (target == kBroadcast)
                continue;
            attack_ch_[i] = target;
            attack_rngs_.emplace(node.id, Rng(seed_, Stream::Attack, {static_cast<std::uint64_t>(round_), i}));
            if (config_.attack_target == AttackTarget::Broadcast)
            {
                attack_radius_[i] = node.tx_range;
            }
            else
            {
                const auto &ch = net_.nodes[static_cast<std::size_t>(target)];
                double r = distance(node.position, ch.position);
                for (auto m : clusters_[cluster_index_.at(target)].member_ids)
                    r = std::max(r, distance(node.position, net_.nodes[static_cast<std::size_t>(m)].position));
                attack_radius_[i] = r;
            }
        }

        for (const auto &node : net_.nodes)
        {
            update_state(node.id, t);
            predict_death(node.id);
        }

        // Advertisement, join and TDMA schedule exchanges.
        const auto control = static_cast<std::uint32_t>(config_.control_packet_size);
        for (const auto &cl : clusters_)
        {
            Packet advert;
            advert.kind = PacketKind::Sync;
            advert.src = advert.transmitter = cl.ch_id;
            advert.dst = kBroadcast;
            advert.size = control;
            advert.timestamp = t + 0.1 * config_.t_cf;
            schedule(advert.timestamp, EventKind::PacketDelivery, cl.ch_id, advert);

            for (auto m : cl.member_ids)
            {
                Packet join;
                join.kind = PacketKind::Ack;
                join.src = join.transmitter = m;
                join.dst = cl.ch_id;
                join.size = control;
                join.timestamp = t + 0.4 * config_.t_cf;
                schedule(join.timestamp, EventKind::PacketDelivery, m, join);
            }

            Packet tdma;
            tdma.kind = PacketKind::TdmaSchedule;
            tdma.src = tdma.transmitter = cl.ch_id;
            tdma.dst = kBroadcast;
            tdma.size = control + static_cast<std::uint32_t>(4 * cl.tdma_order.size());
            tdma.timestamp = t + 0.7 * config_.t_cf;
            schedule(tdma.timestamp, EventKind::PacketDelivery, cl.ch_id, tdma);
        }

        schedule(t + config_.t_cf, EventKind::RoundPhaseChange, kBroadcast, PhasePayload{Phase::DataCollection});
    }

    void Simulation::start_data_collection(double t)
    {
        phase_ = Phase::DataCollection;
        phase_end_ = t + config_.t_dc;
        const double packet_bits = 8.0 * static_cast<double>(config_.packet_size);
        const double member_bits = config_.t_dc * config_.data_rate_ds;
        const auto packets = static_cast<std::int64_t>(std::ceil(member_bits / packet_bits - 1e-12));

        for (const auto &cl : clusters_)
        {
            auth_.emplace(cl.ch_id, security::ChAuthState(cl.ch_id, cl.member_ids));
            buffers_[cl.ch_id].capacity_bits = static_cast<double>(cl.member_ids.size()) * member_bits;
            if (cl.tdma_order.empty())
                continue;
            const double slot = config_.t_dc / static_cast<double>(cl.tdma_order.size());
            for (std::size_t k = 0; k < cl.tdma_order.size(); ++k)
            {
                const NodeId m = cl.tdma_order[k];
                const auto i = static_cast<std::size_t>(m);
                slot_start_[i] = t + static_cast<double>(k) * slot;
                slot_end_[i] = t + static_cast<double>(k + 1) * slot;
                schedule(slot_start_[i], EventKind::DutyCycleToggle, m, TogglePayload{ToggleKind::SlotStart});
                schedule(slot_end_[i], EventKind::DutyCycleToggle, m, TogglePayload{ToggleKind::SlotEnd});
                if (net_.nodes[i].is_attacker)
                    continue;
                for (std::int64_t j = 0; j < packets; ++j)
                {
                    const double bits = std::min(packet_bits, member_bits - static_cast<double>(j) * packet_bits);
                    Packet p;
                    p.kind = PacketKind::Data;
                    p.src = p.transmitter = m;
                    p.dst = cl.ch_id;
                    p.size = static_cast<std::uint32_t>(std::ceil(bits / 8.0));
                    p.timestamp = slot_start_[i] + static_cast<double>(j) * slot / static_cast<double>(packets);
                    schedule(p.timestamp, EventKind::PacketDelivery, m, std::move(p));
                }
            }
        }

        emit_attacks(t, next_listen_start_);
        for (const auto &node : net_.nodes)
        {
            update_state(node.id, t);
            predict_death(node.id);
        }
        schedule(t + config_.t_dc, EventKind::RoundPhaseChange, kBroadcast, PhasePayload{Phase::DataRelay});
    }

    void Simulation::start_data_relay(double t)
    {
        phase_ = Phase::DataRelay;
        std::vector<sink::ChLoad> loads;
        for (const auto &cl : clusters_)
        {
            const auto i = static_cast<std::size_t>(cl.ch_id);
            settle(cl.ch_id, t);
            const auto &ch = net_.nodes[i];
            const double aggregated = config_.aggregation_xi * buffers_[cl.ch_id].raw_bits;
            if (!ch.alive || aggregated + carry_[i].bits <= 0.0)
            {
                upload_done_[i] = true;
                continue;
            }
            loads.push_back({cl.ch_id, ch.position, ch.tx_range, static_cast<std::int64_t>(cl.member_ids.size()),
                             config_.ch_rate, carry_[i].bits});
        }

        double end = t;
        if (!loads.empty())
        {
            try
            {
                plan_ = sink::plan_sink_tour(loads, config_, net_.sink.position);
            }
            catch (const sink::Infeasible &e)
            {
                if (options_.log)
                    log(t, "plan_infeasible", kBroadcast, {{"reason", e.what()}});
                for (const auto &load : loads)
                {
                    const auto i = static_cast<std::size_t>(load.ch_id);
                    auto &buffer = buffers_[load.ch_id];
                    carry_[i].bits += config_.aggregation_xi * buffer.raw_bits;
                    for (const auto &[origin, count] : buffer.legit)
                        carry_[i].legit[origin] += count;
                    buffer = ChBuffer{};
                    upload_done_[i] = true;
                }
            }
            catch (const sink::ZeroRate &e)
            {
                throw std::runtime_error(e.what());
            }
        }

        if (plan_)
        {
            Vec2 here = net_.sink.position;
            for (std::size_t s = 0; s < plan_->stops.size(); ++s)
            {
                const auto &stop = plan_->stops[s];
                if (config_.sink_speed > 0.0)
                    end += distance(here, stop.point) / config_.sink_speed;
                here = stop.point;
                for (const auto &served : stop.served_chs)
                {
                    schedule(end, EventKind::SinkArrival, served.ch_id, SinkPayload{s});
                    end += static_cast<double>(served.slots) * config_.slot_time_T;
                }
            }
            nlohmann::json stops = nlohmann::json::array();
            for (const auto &stop : plan_->stops)
            {
                nlohmann::json served = nlohmann::json::array();
                for (const auto &sv : stop.served_chs)
                    served.push_back({sv.ch_id, sv.slots});
                stops.push_back({{"x", stop.point.x}, {"y", stop.point.y}, {"dwell_slots", stop.dwell_slots}, {"served", served}});
            }
            if (options_.log)
                log(t, "sink_plan", net_.sink.id,
                {{"stops", stops}, {"total_time", plan_->total_time}, {"t_dr_max", plan_->t_dr_max}, {"travel_time", plan_->travel_time}});
        }

        phase_end_ = end;
        for (const auto &node : net_.nodes)
        {
            update_state(node.id, t);
            predict_death(node.id);
        }
        schedule(end, EventKind::RoundPhaseChange, kBroadcast, PhasePayload{Phase::RoundEnd});
    }

    void Simulation::end_round(double t)
    {
        phase_ = Phase::RoundEnd;
        for (const auto &node : net_.nodes)
            settle(node.id, t);
        for (auto &[ch, ep] : episodes_open_)
            if (ep.open)
                close_episode(ch, t, "round_end");
        ++rounds_completed_;
        if (options_.log)
            log(t, "round_end", kBroadcast, {{"round", round_}});
        start_round(t);
    }

    void Simulation::finish(double t)
    {
        if (finished_)
            return;
        clock_ = std::max(clock_, t);
        for (const auto &node : net_.nodes)
            settle(node.id, clock_);
        for (auto &[ch, ep] : episodes_open_)
            if (ep.open)
                close_episode(ch, clock_, "end");
        finished_ = true;
        queue_.clear();
        if (options_.log)
            log(clock_, "run_end", kBroadcast, {{"clock", clock_}, {"rounds", rounds_completed_}});
    }

    // --- events ---------------------------------------------------------------------

    void Simulation::on_toggle(const Event &e, ToggleKind what)
    {
        const double t = e.time;
        switch (what)
        {
        case ToggleKind::ListenStart:
        {
            listen_now_ = true;
            ++listen_index_;
            next_listen_start_ = static_cast<double>(listen_index_) * config_.duty_period();
            schedule(t + config_.listen_period, EventKind::DutyCycleToggle, kBroadcast, TogglePayload{ToggleKind::ListenEnd});
            schedule(next_listen_start_, EventKind::DutyCycleToggle, kBroadcast, TogglePayload{ToggleKind::ListenStart});
            for (const auto &node : net_.nodes)
                update_state(node.id, t);
            if (phase_ != Phase::DataCollection && phase_ != Phase::DataRelay)
                break;

            if (config_.defense_enabled)
                for (auto &[ch, st] : auth_)
                    if (st.mode == security::ChMode::AuthMode && net_.nodes[static_cast<std::size_t>(ch)].alive)
                        issue_tokens_for(ch, t);

            // Members keep the schedule alive with one sync per listen window.
            for (const auto &cl : clusters_)
            {
                for (auto m : cl.member_ids)
                {
                    const auto &node = net_.nodes[static_cast<std::size_t>(m)];
                    if (!node.alive || node.is_attacker || flagged_[static_cast<std::size_t>(m)])
                        continue;
                    Packet p;
                    p.kind = PacketKind::Sync;
                    p.src = p.transmitter = m;
                    p.dst = cl.ch_id;
                    p.size = static_cast<std::uint32_t>(config_.control_packet_size);
                    p.timestamp = t + 0.25 * config_.listen_period;
                    schedule(p.timestamp, EventKind::PacketDelivery, m, std::move(p));
                }
            }
            emit_attacks(t, next_listen_start_);
            break;
        }
        case ToggleKind::ListenEnd:
            listen_now_ = false;
            for (const auto &node : net_.nodes)
                update_state(node.id, t);
            break;
        case ToggleKind::SlotStart:
        case ToggleKind::SlotEnd:
            if (e.round != round_)
                break;
            in_slot_[static_cast<std::size_t>(e.node)] = what == ToggleKind::SlotStart;
            update_state(e.node, t);
            break;
        case ToggleKind::AwakeExpiry:
        {
            const auto i = static_cast<std::size_t>(e.node);
            expiry_pending_[i] = kNever;
            if (awake_until_[i] > t)
            {
                expiry_pending_[i] = awake_until_[i];
                schedule(awake_until_[i], EventKind::DutyCycleToggle, e.node, TogglePayload{ToggleKind::AwakeExpiry});
            }
            update_state(e.node, t);
            break;
        }
        }
    }

    std::vector<NodeId> Simulation::cluster_receivers(NodeId ch, NodeId except) const
    {
        std::vector<NodeId> out;
        if (ch != except)
            out.push_back(ch);
        if (auto it = cluster_index_.find(ch); it != cluster_index_.end())
            for (auto m : clusters_[it->second].member_ids)
                if (m != except)
                    out.push_back(m);
        return out;
    }

    void Simulation::on_packet(const Event &e, Packet &pkt)
    {
        const double t = e.time;
        const NodeId sender = pkt.transmitter;
        const auto si = static_cast<std::size_t>(sender);
        settle(sender, t);
        if (!net_.nodes[si].alive)
            return;
        const auto &snode = net_.nodes[si];

        if (snode.is_attacker && !pkt.legit && phase_ != Phase::DataCollection && phase_ != Phase::DataRelay)
            return;

        // Whom the transmission is aimed at, and how far the radio has to reach.
        std::vector<NodeId> receivers;
        double radius = 0.0;
        const bool hostile_sync = snode.is_attacker && !pkt.legit && pkt.kind == PacketKind::Sync;
        if (hostile_sync && config_.attack_target == AttackTarget::OwnCluster)
        {
            // Addressed to the CH, but every awake radio in the cluster hears it.
            receivers = cluster_receivers(attack_ch_[si], sender);
            radius = attack_radius_[si];
        }
        else if (pkt.dst != kBroadcast && !hostile_sync)
        {
            receivers.push_back(pkt.dst);
            radius = distance(snode.position, net_.nodes[static_cast<std::size_t>(pkt.dst)].position);
        }
        else if (pkt.kind == PacketKind::TdmaSchedule || pkt.kind == PacketKind::SyncAuth)
        {
            receivers = cluster_receivers(sender, sender);
            for (auto r : receivers)
                radius = std::max(radius, distance(snode.position, net_.nodes[static_cast<std::size_t>(r)].position));
        }
        else
        {
            for (const auto &node : net_.nodes)
                if (node.id != sender)
                    receivers.push_back(node.id);
            radius = snode.tx_range;
        }

        if (pkt.kind == PacketKind::Sync && !pkt.token && pkt.src == sender && phase_ != Phase::ClusterFormation)
            pkt.token = token_[si];

        if (pkt.kind == PacketKind::Data && pkt.legit)
        {
            debit(sender, energy::Bucket::Sensing, config_.sensing_energy, t);
            if (!net_.nodes[si].alive)
                return;
            ++sent_[si];
            if (options_.log)
                log(t, "data_sent", sender, {{"ch", pkt.dst}, {"bits", pkt.bits()}});
        }

        transmit(sender, pkt.bits(), radius, t);
        std::vector<NodeId> got;
        for (auto r : receivers)
            if (receive(sender, r, pkt.bits(), t))
                got.push_back(r);

        switch (pkt.kind)
        {
        case PacketKind::Data:
        {
            const bool reached = std::find(got.begin(), got.end(), pkt.dst) != got.end();
            if (reached)
                handle_data(pkt, t);
            else if (pkt.legit)
                note_loss(pkt.dst, t, "undelivered");
            break;
        }
        case PacketKind::Sync:
        {
            if (phase_ == Phase::ClusterFormation)
                break;
            if (pkt.legit && pkt.src == sender && pkt.dst != kBroadcast)
                last_legit_sync_[pkt.dst] = pkt;

            // Each CH that heard the sync vets it; members follow their own CH's verdict.
            std::map<NodeId, bool> verdict;
            for (auto r : got)
                if (net_.nodes[static_cast<std::size_t>(r)].role == Role::ClusterHead && auth_.count(r))
                {
                    if (!config_.defense_enabled)
                    {
                        verdict[r] = true;
                        continue;
                    }
                    Packet copy = pkt;
                    verdict[r] = false;
                    handle_sync(copy, r, t, verdict[r]);
                }
            if (pkt.intent != SyncIntent::StayAwake)
                break;
            for (auto r : got)
            {
                const auto ri = static_cast<std::size_t>(r);
                if (net_.nodes[ri].role == Role::ClusterHead)
                    continue;
                bool adopt = !config_.defense_enabled;
                if (auto it = verdict.find(cluster_of_[ri]); it != verdict.end())
                    adopt = adopt || it->second;
                if (adopt)
                    extend_awake(r, t + config_.listen_period);
            }
            break;
        }
        case PacketKind::SyncAuth:
            break;
        default:
            break;
        }
    }

    void Simulation::handle_sync(const Packet &pkt, NodeId ch, double t, bool &accepted)
    {
        accepted = false;
        auto &st = auth_.at(ch);
        if (!net_.nodes[static_cast<std::size_t>(ch)].alive)
            return;
        if (flagged_[static_cast<std::size_t>(pkt.src)] && st.is_member(pkt.src))
            return;
        if (st.mode == security::ChMode::AuthMode)
        {
            if (!st.is_member(pkt.src))
                return;
            const auto verdict = security::authenticate_member(st, pkt);
            if (verdict == security::TokenVerdict::Valid)
                accepted = true;
            else
                flag_node(pkt.src, ch, t);
            return;
        }
        const auto verdict = security::check_sync_packet(st, pkt, t, config_);
        switch (verdict)
        {
        case security::SyncVerdict::Accept:
            accepted = true;
            break;
        case security::SyncVerdict::Reject:
            break;
        case security::SyncVerdict::EnterAuthMode:
            if (options_.log)
                log(t, "auth_mode", ch, {{"trigger", pkt.src}});
            issue_tokens_for(ch, t);
            break;
        }
    }

    void Simulation::issue_tokens_for(NodeId ch, double t)
    {
        auto &st = auth_.at(ch);
        const auto tokens = security::issue_tokens(st, token_rng_);
        Packet p;
        p.kind = PacketKind::SyncAuth;
        p.src = p.transmitter = ch;
        p.dst = kBroadcast;
        p.size = static_cast<std::uint32_t>(config_.control_packet_size + 8 * static_cast<std::int64_t>(tokens.size()));
        p.timestamp = t;

        const auto receivers = cluster_receivers(ch, ch);
        double radius = 0.0;
        for (auto r : receivers)
            radius = std::max(radius, distance(net_.nodes[static_cast<std::size_t>(ch)].position,
                                               net_.nodes[static_cast<std::size_t>(r)].position));
        transmit(ch, p.bits(), radius, t);
        for (const auto &[member, token] : tokens)
            if (receive(ch, member, p.bits(), t))
                token_[static_cast<std::size_t>(member)] = token;
    }

    void Simulation::flag_node(NodeId id, NodeId by_ch, double t)
    {
        const auto i = static_cast<std::size_t>(id);
        if (flagged_[i])
            return;
        flagged_[i] = true;
        rotation_.exclude(id);
        if (options_.log)
            log(t, "flag", id, {{"by", by_ch}});
    }

    void Simulation::handle_data(const Packet &pkt, double t)
    {
        auto it = buffers_.find(pkt.dst);
        if (it == buffers_.end() || phase_ != Phase::DataCollection)
        {
            if (pkt.legit)
                note_loss(pkt.dst, t, "no_buffer");
            return;
        }
        auto &buffer = it->second;
        const auto si = static_cast<std::size_t>(pkt.src);
        if (config_.defense_enabled)
        {
            const auto &st = auth_.at(pkt.dst);
            const bool in_own_slot = cluster_of_[si] == pkt.dst && t >= slot_start_[si] && t < slot_end_[si];
            if (!st.is_member(pkt.src) || flagged_[si] || !in_own_slot)
            {
                if (pkt.legit)
                    note_loss(pkt.dst, t, "rejected");
                return;
            }
        }
        const auto bits = static_cast<double>(pkt.bits());
        if (buffer.raw_bits + bits > buffer.capacity_bits)
        {
            if (pkt.legit)
                note_loss(pkt.dst, t, "overflow");
            return;
        }
        buffer.raw_bits += bits;
        if (pkt.legit)
            ++buffer.legit[pkt.src];
    }

    void Simulation::emit_attacks(double from, double to)
    {
        if (to <= from)
            return;
        for (auto &[id, rng] : attack_rngs_)
        {
            const auto i = static_cast<std::size_t>(id);
            const auto &node = net_.nodes[i];
            if (!node.alive || attack_ch_[i] == kBroadcast)
                continue;
            attack::EmitContext ctx;
            ctx.cluster_head = attack_ch_[i];
            ctx.node_count = static_cast<std::int64_t>(net_.nodes.size());
            ctx.control_size = static_cast<std::uint32_t>(config_.control_packet_size);
            ctx.data_size = static_cast<std::uint32_t>(config_.packet_size);
            if (auto it = last_legit_sync_.find(attack_ch_[i]); it != last_legit_sync_.end())
                ctx.last_sleep_sync = it->second;
            for (const auto &profile : profiles_)
                for (auto &p : attack::attacker_emit(profile, node, from, to - from, ctx, rng))
                    schedule(p.timestamp, EventKind::PacketDelivery, id, std::move(p));
        }
    }

    void Simulation::note_loss(NodeId ch, double t, std::string_view reason)
    {
        if (auto it = episodes_open_.find(ch); it != episodes_open_.end() && it->second.open)
            close_episode(ch, t, reason);
    }

    void Simulation::close_episode(NodeId ch, double t, std::string_view reason)
    {
        auto &ep = episodes_open_.at(ch);
        if (!ep.open)
            return;
        ep.open = false;
        episodes_.push_back(t - ep.start);
        if (options_.log)
            log(t, "episode", ch, {{"start", ep.start}, {"end", t}, {"reason", reason}});
    }

    namespace
    {
        /// Engine-side channel between a CH and the sink for the interlock exchange.
        class SinkChannel final : public security::InterlockChannel
        {
        public:
            using Send = std::function<bool(const Packet &)>;
            SinkChannel(Send send, double rate) : send_(std::move(send)), rate_(rate) {}

            std::optional<Packet> carry(const Packet &pkt) override
            {
                if (!send_(pkt))
                    return std::nullopt;
                Packet out = pkt;
                out.timestamp = pkt.timestamp + static_cast<double>(pkt.bits()) / rate_;
                return out;
            }

        private:
            Send send_;
            double rate_;
        };
    }

    void Simulation::on_upload(const Event &e)
    {
        const double t = e.time;
        const NodeId ch = e.node;
        const auto ci = static_cast<std::size_t>(ch);
        const auto &stop = plan_->stops[std::get<SinkPayload>(e.payload).stop];
        net_.sink.position = stop.point;

        settle(ch, t);
        auto &buffer = buffers_[ch];
        auto &carry = carry_[ci];
        std::map<NodeId, std::int64_t> origins = carry.legit;
        for (const auto &[o, c] : buffer.legit)
            origins[o] += c;
        const double bits = config_.aggregation_xi * buffer.raw_bits + carry.bits;
        buffer = ChBuffer{};
        carry = Carry{};
        upload_done_[ci] = true;

        std::int64_t legit_packets = 0;
        for (const auto &[o, c] : origins)
            legit_packets += c;

        if (!net_.nodes[ci].alive)
        {
            update_state(ch, t);
            return;
        }

        const auto &chn = net_.nodes[ci];
        const double d = distance(chn.position, stop.point);
        SinkChannel channel(
            [&](const Packet &p)
            {
                if (p.transmitter == ch || p.src == ch)
                {
                    transmit(ch, p.bits(), d, t);
                    return net_.nodes[ci].alive && d <= net_.nodes[ci].tx_range;
                }
                settle(ch, t);
                if (!net_.nodes[ci].alive || net_.nodes[ci].radio_state == RadioState::Sleep)
                    return false;
                airtime_credit_[ci] += airtime(p.bits(), config_.channel_rate);
                debit(ch, energy::Bucket::Rx, packet_rx_energy(p.bits(), config_), t);
                return net_.nodes[ci].alive;
            },
            config_.ch_rate);

        const auto &f = keys_.registered_f.at(ch);
        const auto &v = keys_.v();
        const auto h = security::commitment(f, v);

        Packet commit;
        commit.kind = PacketKind::Commitment;
        commit.src = commit.transmitter = ch;
        commit.dst = net_.sink.id;
        commit.payload = security::to_bytes(h);
        commit.size = static_cast<std::uint32_t>(config_.control_packet_size) + static_cast<std::uint32_t>(commit.payload.size());
        commit.timestamp = t;
        const auto committed = channel.carry(commit);

        bool accepted = false;
        std::string reason = "commitment_lost";
        if (committed)
        {
            const auto h_received = security::from_bytes(committed->payload);
            const auto session = security::random_below(v, session_rng_);
            const auto material = security::seal_key_material(f, session, keys_.rsa);
            const security::InterlockParty ch_party{ch, security::pairwise_key(f)};
            const security::InterlockParty sink_party{net_.sink.id, security::pairwise_key(keys_.registered_f.at(ch))};
            const auto result = security::interlock_exchange(
                ch_party, sink_party, material, cipher_, channel,
                [&](std::span<const std::uint8_t> m)
                {
                    const auto opened = security::open_key_material(m, keys_);
                    return opened && security::commitment(opened->f, v) == h_received;
                },
                committed->timestamp, config_.interlock_timeout);

            if (result.verified())
            {
                const auto opened = security::open_key_material(result.recovered, keys_);
                const Bytes sink_session = security::to_bytes(opened->session_key);
                const Bytes ch_session = security::to_bytes(session);

                nlohmann::json summary{{"ch", ch}, {"round", round_}, {"bits", bits}, {"packets", legit_packets}};
                const auto text = summary.dump();
                auto report = security::build_report(ch, f, v, Bytes(text.begin(), text.end()), ch_session, cipher_);
                report.commitment = h_received;

                const auto data_bits = static_cast<std::uint64_t>(std::ceil(bits)) + 8u * report.envelope.size();
                transmit(ch, data_bits, d, t);
                if (net_.nodes[ci].alive)
                    accepted = security::sink_verify(report, keys_, sink_session, cipher_) == security::SinkVerdict::Accepted;
                reason = accepted ? "" : "verify_failed";
            }
            else
            {
                reason = std::string(security::to_string(result.error));
            }
        }

        if (accepted)
        {
            ++sink_accepted_;
            nlohmann::json list = nlohmann::json::array();
            for (const auto &[o, c] : origins)
            {
                received_[static_cast<std::size_t>(o)] += c;
                list.push_back({o, c});
            }
            if (options_.log)
                log(t, "sink_accept", ch, {{"origins", list}, {"bits", bits}});
        }
        else
        {
            ++sink_rejected_;
            if (options_.log)
                log(t, "sink_reject", ch, {{"reason", reason}});
            if (legit_packets > 0)
                note_loss(ch, t, "sink_reject");
        }
        update_state(ch, t);
    }

    RunResult run_simulation(const NetworkConfig &config, std::uint64_t seed, EventLog *log)
    {
        SimulationOptions options;
        options.log = log;
        Simulation sim(config, seed, std::move(options));
        return sim.run();
    }
}
