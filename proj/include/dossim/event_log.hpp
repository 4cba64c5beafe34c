#pragma once

#include "dossim/types.hpp"

#include <json.hpp>

#include <iosfwd>
#include <string>
#include <vector>

namespace dossim
{
    /// One line of the structured event log: {"time", "kind", "node", "detail"}.
    struct LogRecord
    {
        double time = 0.0;
        std::string kind;
        NodeId node = kBroadcast;
        nlohmann::json detail = nlohmann::json::object();

        friend bool operator==(const LogRecord &, const LogRecord &) = default;
    };

    nlohmann::json to_json(const LogRecord &record);
    LogRecord record_from_json(const nlohmann::json &j);

    class EventLog
    {
    public:
        virtual ~EventLog() = default;
        virtual void write(LogRecord record) = 0;
    };

    /// Keeps every record in memory.
    class MemoryLog final : public EventLog
    {
    public:
        void write(LogRecord record) override { records_.push_back(std::move(record)); }
        const std::vector<LogRecord> &records() const noexcept { return records_; }

    private:
        std::vector<LogRecord> records_;
    };

    /// Newline-delimited JSON, one record per line, doubles written round-trip exact.
    class NdjsonLog final : public EventLog
    {
    public:
        explicit NdjsonLog(std::ostream &out) : out_(out) {}
        void write(LogRecord record) override;

    private:
        std::ostream &out_;
    };

    /// Throws std::runtime_error naming the offending line on malformed input.
    std::vector<LogRecord> parse_event_log(std::istream &in);
}
