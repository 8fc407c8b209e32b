#pragma once

#include <string>
#include <vector>

#include <json.hpp>

namespace emc {

/// One persisted result. Records are appended to a JSONL file, one JSON
/// object per line, and are self-describing via the `schema` field.
struct ResultRecord {
    std::string config_digest;
    std::string subcommand;
    std::string timestamp;  // ISO 8601 UTC
    std::string toolkit_version;
    nlohmann::json payload;

    nlohmann::json to_json() const;
    static ResultRecord from_json(const nlohmann::json& j);
};

std::string utc_timestamp();

void append_record(const std::string& path, const ResultRecord& record);
std::vector<ResultRecord> read_records(const std::string& path);

enum class PlotKind { RadialProfile, SweepHeatmap, Convergence };

/// Writes plain-text columns plus a minimal SVG for the given records.
/// All records must share one config digest; file names embed digest and
/// kind. Returns the written paths.
std::vector<std::string> emit_plotdata(const std::vector<ResultRecord>& records, PlotKind kind,
                                       const std::string& out_dir);

}  // namespace emc
