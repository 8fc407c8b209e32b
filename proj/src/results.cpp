#include "emc/results.hpp"

#include <algorithm>
#include <cmath>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "emc/errors.hpp"

namespace emc {

namespace {

using nlohmann::json;

constexpr const char* kSchemaTag = "emc.result.v1";

const char* kind_slug(PlotKind kind) {
    switch (kind) {
        case PlotKind::RadialProfile: return "radial-profile";
        case PlotKind::SweepHeatmap: return "sweep-heatmap";
        case PlotKind::Convergence: return "convergence";
    }
    return "unknown";
}

/// Pulls (x, y) rows out of the record payloads for the line-plot kinds.
std::vector<std::pair<double, double>> line_rows(const std::vector<ResultRecord>& records,
                                                 PlotKind kind) {
    std::vector<std::pair<double, double>> rows;
    for (const ResultRecord& rec : records) {
        if (kind == PlotKind::RadialProfile) {
            if (!rec.payload.contains("profile")) continue;
            for (const json& row : rec.payload.at("profile")) {
                rows.emplace_back(row.at("r").get<double>(), row.at("mean").get<double>());
            }
        } else {
            if (!rec.payload.contains("trace")) continue;
            std::size_t it = 0;
            for (const json& row : rec.payload.at("trace")) {
                rows.emplace_back(static_cast<double>(++it),
                                  row.at("sup_change").get<double>());
            }
        }
    }
    if (rows.empty()) throw InputError("emit_plotdata: no plottable rows in the records");
    std::sort(rows.begin(), rows.end());
    return rows;
}

std::string polyline_svg(const std::vector<std::pair<double, double>>& rows) {
    double xmin = rows.front().first, xmax = rows.back().first;
    double ymin = rows.front().second, ymax = rows.front().second;
    for (const auto& [x, y] : rows) {
        ymin = std::min(ymin, y);
        ymax = std::max(ymax, y);
    }
    const double xspan = xmax > xmin ? xmax - xmin : 1.0;
    const double yspan = ymax > ymin ? ymax - ymin : 1.0;
    const double w = 640.0, h = 400.0, pad = 40.0;
    std::ostringstream svg;
    svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << w << "\" height=\"" << h
        << "\">\n<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n<polyline fill=\"none\" "
           "stroke=\"black\" points=\"";
    for (const auto& [x, y] : rows) {
        const double px = pad + (x - xmin) / xspan * (w - 2 * pad);
        const double py = h - pad - (y - ymin) / yspan * (h - 2 * pad);
        svg << px << "," << py << " ";
    }
    svg << "\"/>\n</svg>\n";
    return svg.str();
}

}  // namespace

json ResultRecord::to_json() const {
    return json{{"schema", kSchemaTag},
                {"config_digest", config_digest},
                {"subcommand", subcommand},
                {"timestamp", timestamp},
                {"toolkit_version", toolkit_version},
                {"payload", payload}};
}

ResultRecord ResultRecord::from_json(const json& j) {
    ResultRecord rec;
    rec.config_digest = j.at("config_digest").get<std::string>();
    rec.subcommand = j.at("subcommand").get<std::string>();
    rec.timestamp = j.at("timestamp").get<std::string>();
    rec.toolkit_version = j.at("toolkit_version").get<std::string>();
    rec.payload = j.at("payload");
    return rec;
}

std::string utc_timestamp() {
    const std::time_t now = std::time(nullptr);
    std::tm tm{};
    gmtime_r(&now, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

void append_record(const std::string& path, const ResultRecord& record) {
    const std::filesystem::path p(path);
    if (p.has_parent_path()) std::filesystem::create_directories(p.parent_path());
    std::ofstream out(path, std::ios::app);
    if (!out) throw ConfigError("results: cannot open '" + path + "' for append");
    out << record.to_json().dump() << "\n";
}

std::vector<ResultRecord> read_records(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw InputError("results: cannot open '" + path + "'");
    std::vector<ResultRecord> records;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        records.push_back(ResultRecord::from_json(json::parse(line)));
    }
    return records;
}

std::vector<std::string> emit_plotdata(const std::vector<ResultRecord>& records, PlotKind kind,
                                       const std::string& out_dir) {
    if (records.empty()) throw InputError("emit_plotdata: empty record list");
    const std::string digest = records.front().config_digest;
    for (const ResultRecord& rec : records) {
        if (rec.config_digest != digest) {
            throw InputError("emit_plotdata: records mix config digests");
        }
    }
    std::filesystem::create_directories(out_dir);
    const std::string stem = out_dir + "/" + digest + "-" + kind_slug(kind);
    const std::string txt_path = stem + ".txt";
    const std::string svg_path = stem + ".svg";
    std::ofstream txt(txt_path);
    std::ofstream svg(svg_path);
    txt.precision(12);

    if (kind == PlotKind::SweepHeatmap) {
        struct Cell {
            double x, y, z;
        };
        std::vector<Cell> cells;
        for (const ResultRecord& rec : records) {
            if (!rec.payload.contains("rows")) continue;
            for (const json& row : rec.payload.at("rows")) {
                cells.push_back({row.at("t_outer").get<double>(), row.at("delta").get<double>(),
                                 row.at("feasible").get<bool>() ? 1.0 : 0.0});
            }
        }
        if (cells.empty()) throw InputError("emit_plotdata: no sweep rows in the records");
        txt << "# t_outer delta feasible\n";
        for (const Cell& c : cells) txt << c.x << " " << c.y << " " << c.z << "\n";
        double xmin = cells[0].x, xmax = cells[0].x, ymin = cells[0].y, ymax = cells[0].y;
        for (const Cell& c : cells) {
            xmin = std::min(xmin, c.x);
            xmax = std::max(xmax, c.x);
            ymin = std::min(ymin, c.y);
            ymax = std::max(ymax, c.y);
        }
        const double w = 640.0, h = 400.0, pad = 40.0, box = 12.0;
        const double xspan = xmax > xmin ? xmax - xmin : 1.0;
        const double yspan = ymax > ymin ? ymax - ymin : 1.0;
        svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << w << "\" height=\"" << h
            << "\">\n<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
        for (const Cell& c : cells) {
            const double px = pad + (c.x - xmin) / xspan * (w - 2 * pad) - box / 2;
            const double py = h - pad - (c.y - ymin) / yspan * (h - 2 * pad) - box / 2;
            svg << "<rect x=\"" << px << "\" y=\"" << py << "\" width=\"" << box
                << "\" height=\"" << box << "\" fill=\""
                << (c.z > 0.5 ? "forestgreen" : "firebrick") << "\"/>\n";
        }
        svg << "</svg>\n";
    } else {
        const auto rows = line_rows(records, kind);
        txt << (kind == PlotKind::RadialProfile ? "# r mean\n" : "# iteration sup_change\n");
        for (const auto& [x, y] : rows) txt << x << " " << y << "\n";
        svg << polyline_svg(rows);
    }
    return {txt_path, svg_path};
}

}  // namespace emc
