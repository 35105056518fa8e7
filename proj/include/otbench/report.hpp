#pragma once

// Benchmark reports: per-fold metric rows plus a mean +- population-std
// aggregate, serialised as JSON (full precision) or CSV (3 decimals).

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "otbench/error.hpp"
#include "otbench/metrics.hpp"

namespace otbench {

using ordered_json = nlohmann::ordered_json;

inline constexpr const char* kCodeVersion = "0.1.0";
inline constexpr int kReportFormatVersion = 1;

enum class ReportFormat { json, csv };

inline ReportFormat parse_report_format(const std::string& s)
{
    if (s == "json") return ReportFormat::json;
    if (s == "csv") return ReportFormat::csv;
    throw ValidationError("unknown report format '" + s + "' (expected json|csv)");
}

struct BenchmarkReport {
    ordered_json config = ordered_json::object();
    std::vector<std::string> metric_names;
    std::vector<FoldSummary> folds;  ///< fold indices are 1-based
    std::vector<std::pair<std::string, MeanStd>> aggregate;
    ordered_json metadata = ordered_json::object();

    /// Recomputes the aggregate row from the fold rows.
    void finalize()
    {
        detail::require(!folds.empty(), "report: no folds");
        aggregate.clear();
        for (const auto& name : metric_names) {
            std::vector<double> vals;
            vals.reserve(folds.size());
            for (const auto& f : folds) vals.push_back(f.get(name));
            aggregate.emplace_back(name, aggregate_folds(vals));
        }
    }

    const MeanStd& aggregate_of(const std::string& name) const
    {
        for (const auto& [k, v] : aggregate)
            if (k == name) return v;
        throw ValidationError("report: no aggregate for '" + name + "'");
    }

    ordered_json to_json() const
    {
        ordered_json j;
        j["format"] = "otbench-report";
        j["version"] = kReportFormatVersion;
        j["config"] = config;
        j["metrics"] = metric_names;
        auto rows = ordered_json::array();
        for (const auto& f : folds) {
            ordered_json row;
            row["fold"] = f.fold;
            for (const auto& [k, v] : f.metrics) row[k] = v;
            rows.push_back(row);
        }
        j["folds"] = rows;
        ordered_json agg = ordered_json::object();
        for (const auto& [k, v] : aggregate) agg[k] = {{"mean", v.mean}, {"std", v.std}};
        j["aggregate"] = agg;
        j["metadata"] = metadata;
        return j;
    }

    static BenchmarkReport from_json(const ordered_json& j)
    {
        detail::require(j.value("format", "") == "otbench-report", "report: not an otbench report");
        detail::require(j.value("version", 0) == kReportFormatVersion, "report: unsupported version");
        BenchmarkReport r;
        r.config = j.at("config");
        r.metric_names = j.at("metrics").get<std::vector<std::string>>();
        for (const auto& row : j.at("folds")) {
            FoldSummary f;
            f.fold = row.at("fold").get<std::size_t>();
            for (const auto& name : r.metric_names) f.set(name, row.at(name).get<double>());
            r.folds.push_back(std::move(f));
        }
        r.metadata = j.value("metadata", ordered_json::object());
        r.finalize();
        return r;
    }
};

inline std::string fixed3(double v)
{
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.3f", v);
    return buf;
}

/// One block per metric: k fold rows then an `avg` row carrying the std.
inline std::string render_csv(const BenchmarkReport& r)
{
    std::ostringstream out;
    out << "metric,fold,value,std\n";
    for (const auto& name : r.metric_names) {
        for (const auto& f : r.folds) out << name << ',' << f.fold << ',' << fixed3(f.get(name)) << ",\n";
        const MeanStd& a = r.aggregate_of(name);
        out << name << ",avg," << fixed3(a.mean) << ',' << fixed3(a.std) << '\n';
    }
    return out.str();
}

inline std::string render_report(const BenchmarkReport& r, ReportFormat fmt)
{
    if (fmt == ReportFormat::csv) return render_csv(r);
    return r.to_json().dump(2) + "\n";
}

inline void emit_report(const BenchmarkReport& r, ReportFormat fmt, const std::filesystem::path& path)
{
    const std::string text = render_report(r, fmt);
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write report: " + path.string());
    out << text;
    if (!out) throw std::runtime_error("error writing report: " + path.string());
}

}  // namespace otbench
