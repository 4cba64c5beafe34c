#include "dossim/event_log.hpp"

#include <istream>
#include <ostream>
#include <stdexcept>

namespace dossim
{
    nlohmann::json to_json(const LogRecord &record)
    {
        return nlohmann::json{{"time", record.time}, {"kind", record.kind}, {"node", record.node}, {"detail", record.detail}};
    }

    LogRecord record_from_json(const nlohmann::json &j)
    {
        LogRecord r;
        r.time = j.at("time").get<double>();
        r.kind = j.at("kind").get<std::string>();
        r.node = j.at("node").get<NodeId>();
        r.detail = j.value("detail", nlohmann::json::object());
        return r;
    }

    void NdjsonLog::write(LogRecord record)
    {
        out_ << to_json(record).dump() << '\n';
    }

    std::vector<LogRecord> parse_event_log(std::istream &in)
    {
        std::vector<LogRecord> out;
        std::string line;
        std::size_t line_no = 0;
        while (std::getline(in, line))
        {
            ++line_no;
            if (line.empty())
                continue;
            try
            {
                out.push_back(record_from_json(nlohmann::json::parse(line)));
            }
            catch (const nlohmann::json::exception &e)
            {
                throw std::runtime_error("event log line " + std::to_string(line_no) + ": " + e.what());
            }
        }
        return out;
    }
}
