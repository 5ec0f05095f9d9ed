#ifndef SKROCK_IO_HPP
#define SKROCK_IO_HPP

#include <charconv>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <istream>
#include <limits>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <system_error>
#include <utility>
#include <vector>

#include "skrock/experiments.hpp"
#include "skrock/integrators.hpp"
#include "skrock/verify.hpp"

namespace skrock {

/// Raised for unreadable or unwritable files; the message names the path.
class IoError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// ---------------------------------------------------------------------------
// Scalars

/// Shortest decimal string that parses back to the same double.
inline std::string format_double(double v) {
    char buf[32];
    const auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

inline double parse_double(std::string_view s) {
    if (s == "nan" || s == "-nan") return std::numeric_limits<double>::quiet_NaN();
    if (s == "inf") return std::numeric_limits<double>::infinity();
    if (s == "-inf") return -std::numeric_limits<double>::infinity();
    double v = 0.0;
    const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
    if (res.ec != std::errc{} || res.ptr != s.data() + s.size())
        throw std::invalid_argument("not a number: '" + std::string(s) + "'");
    return v;
}

template <class Int>
Int parse_int(std::string_view s) {
    Int v{};
    const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
    if (res.ec != std::errc{} || res.ptr != s.data() + s.size())
        throw std::invalid_argument("not an integer: '" + std::string(s) + "'");
    return v;
}

// ---------------------------------------------------------------------------
// Generic CSV documents

/// Ordered key/value pairs echoed as "# key = value" lines.
using Metadata = std::vector<std::pair<std::string, std::string>>;

/// Replaces the value of `key` if present, appends it otherwise.
inline void set_meta(Metadata& meta, std::string key, std::string value) {
    for (auto& [k, v] : meta)
        if (k == key) {
            v = std::move(value);
            return;
        }
    meta.emplace_back(std::move(key), std::move(value));
}

struct CsvSection {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;
};

/// Comment metadata followed by one or more sections separated by blank
/// lines, each starting with its header row.
struct CsvDocument {
    Metadata meta;
    std::vector<CsvSection> sections;

    std::optional<std::string> get(std::string_view key) const {
        for (const auto& [k, v] : meta)
            if (k == key) return v;
        return std::nullopt;
    }
};

namespace detail {

inline std::string quote_field(std::string_view f) {
    if (f.find_first_of(",\"\n") == std::string_view::npos) return std::string(f);
    std::string out = "\"";
    for (char c : f) {
        if (c == '"') out += '"';
        out += c;
    }
    return out + '"';
}

inline std::vector<std::string> split_fields(std::string_view line) {
    std::vector<std::string> out;
    std::string cur;
    bool quoted = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        const char c = line[i];
        if (quoted) {
            if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
                cur += '"';
                ++i;
            } else if (c == '"') {
                quoted = false;
            } else {
                cur += c;
            }
        } else if (c == '"') {
            quoted = true;
        } else if (c == ',') {
            out.push_back(std::move(cur));
            cur.clear();
        } else {
            cur += c;
        }
    }
    out.push_back(std::move(cur));
    return out;
}

inline std::string trim(std::string_view s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string_view::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return std::string(s.substr(b, e - b + 1));
}

}  // namespace detail

inline std::string to_string(const CsvDocument& doc) {
    std::ostringstream os;
    for (const auto& [k, v] : doc.meta) os << "# " << k << " = " << v << '\n';
    for (std::size_t s = 0; s < doc.sections.size(); ++s) {
        if (s > 0) os << '\n';
        const auto& sec = doc.sections[s];
        auto write_row = [&](const std::vector<std::string>& row) {
            for (std::size_t i = 0; i < row.size(); ++i)
                os << (i ? "," : "") << detail::quote_field(row[i]);
            os << '\n';
        };
        write_row(sec.header);
        for (const auto& row : sec.rows) write_row(row);
    }
    return os.str();
}

inline CsvDocument parse_csv(std::istream& in) {
    CsvDocument doc;
    std::string line;
    bool need_header = true;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (!line.empty() && line[0] == '#') {
            const auto body = std::string_view(line).substr(1);
            const auto eq = body.find('=');
            if (eq == std::string_view::npos)
                doc.meta.emplace_back(detail::trim(body), "");
            else
                doc.meta.emplace_back(detail::trim(body.substr(0, eq)),
                                      detail::trim(body.substr(eq + 1)));
            continue;
        }
        if (line.empty()) {
            need_header = true;
            continue;
        }
        auto fields = detail::split_fields(line);
        if (need_header) {
            doc.sections.push_back({std::move(fields), {}});
            need_header = false;
            continue;
        }
        if (fields.size() != doc.sections.back().header.size())
            throw std::invalid_argument("csv: row has " + std::to_string(fields.size()) +
                                        " fields, header has " +
                                        std::to_string(doc.sections.back().header.size()));
        doc.sections.back().rows.push_back(std::move(fields));
    }
    return doc;
}

inline CsvDocument parse_csv(std::string_view text) {
    std::istringstream in{std::string(text)};
    return parse_csv(in);
}

/// Writes to a sibling temporary file and renames it over `path`.
inline void write_atomic(const std::filesystem::path& path, std::string_view content) {
    namespace fs = std::filesystem;
    std::error_code ec;
    if (path.has_parent_path()) {
        fs::create_directories(path.parent_path(), ec);
        if (ec) throw IoError("cannot create directory " + path.parent_path().string() + ": " +
                              ec.message());
    }
    fs::path tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw IoError("cannot open " + tmp.string() + " for writing");
        out.write(content.data(), static_cast<std::streamsize>(content.size()));
        out.flush();
        if (!out) {
            fs::remove(tmp, ec);
            throw IoError("write failed for " + tmp.string());
        }
    }
    fs::rename(tmp, path, ec);
    if (ec) {
        fs::remove(tmp, ec);
        throw IoError("cannot rename " + tmp.string() + " to " + path.string());
    }
}

inline CsvDocument read_csv(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open " + path.string() + " for reading");
    return parse_csv(in);
}

// ---------------------------------------------------------------------------
// Convergence reports

inline CsvDocument convergence_document(const ConvergenceReport& report, Metadata meta = {}) {
    CsvDocument doc;
    doc.meta = std::move(meta);
    set_meta(doc.meta, "study", report.study);
    set_meta(doc.meta, "preset", std::string(to_string(report.preset)));
    set_meta(doc.meta, "trajectories", std::to_string(report.trajectories));
    set_meta(doc.meta, "reference_aborts", std::to_string(report.reference_aborts));

    CsvSection cells;
    cells.header = {"method", "tau", "h", "rms_error", "mc_stderr", "n_samples",
                    "n_aborts", "wall_seconds", "stages"};
    for (const auto& c : report.cells) {
        cells.rows.push_back({std::string(to_string(c.method)), format_double(c.tau),
                              format_double(c.h), format_double(c.rms_error),
                              format_double(c.mc_stderr), std::to_string(c.n_samples),
                              std::to_string(c.n_aborts), format_double(c.wall_seconds),
                              std::to_string(c.stages)});
    }
    CsvSection slopes;
    slopes.header = {"method", "fitted_slope", "r2", "intercept"};
    for (const auto& row : report.slopes) {
        if (row.fit)
            slopes.rows.push_back({std::string(to_string(row.method)), format_double(row.fit->slope),
                                   format_double(row.fit->r2), format_double(row.fit->intercept)});
        else
            slopes.rows.push_back({std::string(to_string(row.method)), "", "", ""});
    }
    doc.sections = {std::move(cells), std::move(slopes)};
    return doc;
}

inline ConvergenceReport parse_convergence(const CsvDocument& doc) {
    if (doc.sections.size() != 2) throw std::invalid_argument("convergence csv: expected 2 sections");
    ConvergenceReport report;
    report.study = doc.get("study").value_or("");
    if (auto p = doc.get("preset")) report.preset = parse_preset(*p);
    if (auto t = doc.get("trajectories")) report.trajectories = parse_int<int>(*t);
    if (auto r = doc.get("reference_aborts")) report.reference_aborts = parse_int<int>(*r);
    for (const auto& row : doc.sections[0].rows) {
        ConvergenceCell c;
        c.method = parse_method(row.at(0));
        c.tau = parse_double(row.at(1));
        c.h = parse_double(row.at(2));
        c.rms_error = parse_double(row.at(3));
        c.mc_stderr = parse_double(row.at(4));
        c.n_samples = parse_int<int>(row.at(5));
        c.n_aborts = parse_int<int>(row.at(6));
        c.wall_seconds = parse_double(row.at(7));
        c.stages = parse_int<int>(row.at(8));
        report.cells.push_back(c);
    }
    for (const auto& row : doc.sections[1].rows) {
        SlopeRow s;
        s.method = parse_method(row.at(0));
        if (!row.at(1).empty())
            s.fit = LineFit{parse_double(row.at(1)), parse_double(row.at(3)), parse_double(row.at(2))};
        report.slopes.push_back(s);
    }
    return report;
}

// ---------------------------------------------------------------------------
// Condition reports

inline CsvDocument verify_document(const std::vector<ConditionReport>& reports, Metadata meta = {}) {
    CsvDocument doc;
    doc.meta = std::move(meta);
    CsvSection sec;
    sec.header = {"method",    "condition_id", "s_range", "sup_value",   "witness_s",
                  "witness_z", "pass",         "statistic", "threshold", "grid_points",
                  "comparator", "note"};
    for (const auto& r : reports) {
        sec.rows.push_back({r.family, r.condition_id,
                            std::to_string(r.s_min) + "-" + std::to_string(r.s_max),
                            format_double(r.sup_value), std::to_string(r.witness_s),
                            format_double(r.witness_z), r.pass ? "true" : "false",
                            format_double(r.statistic), format_double(r.threshold),
                            std::to_string(r.grid_points),
                            r.comparator ? format_double(*r.comparator) : "", r.note});
    }
    doc.sections = {std::move(sec)};
    return doc;
}

inline std::vector<ConditionReport> parse_verify(const CsvDocument& doc) {
    if (doc.sections.size() != 1) throw std::invalid_argument("verify csv: expected 1 section");
    std::vector<ConditionReport> out;
    for (const auto& row : doc.sections[0].rows) {
        ConditionReport r;
        r.family = row.at(0);
        r.condition_id = row.at(1);
        const auto& range = row.at(2);
        const auto dash = range.find('-');
        if (dash == std::string::npos) throw std::invalid_argument("verify csv: bad s_range");
        r.s_min = parse_int<int>(std::string_view(range).substr(0, dash));
        r.s_max = parse_int<int>(std::string_view(range).substr(dash + 1));
        r.sup_value = parse_double(row.at(3));
        r.witness_s = parse_int<int>(row.at(4));
        r.witness_z = parse_double(row.at(5));
        r.pass = row.at(6) == "true";
        r.statistic = parse_double(row.at(7));
        r.threshold = parse_double(row.at(8));
        r.grid_points = parse_int<int>(row.at(9));
        if (!row.at(10).empty()) r.comparator = parse_double(row.at(10));
        r.note = row.at(11);
        out.push_back(std::move(r));
    }
    return out;
}

// ---------------------------------------------------------------------------
// Stability curves

inline CsvDocument curve_document(const std::vector<CurvePoint>& curve, Metadata meta = {}) {
    CsvDocument doc;
    doc.meta = std::move(meta);
    CsvSection sec;
    sec.header = {"z", "A_s", "B_s_skrock", "B_s_variant", "implicit_euler"};
    for (const auto& p : curve)
        sec.rows.push_back({format_double(p.z), format_double(p.a), format_double(p.b_skrock),
                            format_double(p.b_variant), format_double(p.implicit_euler)});
    doc.sections = {std::move(sec)};
    return doc;
}

inline std::vector<CurvePoint> parse_curve(const CsvDocument& doc) {
    if (doc.sections.size() != 1) throw std::invalid_argument("curve csv: expected 1 section");
    std::vector<CurvePoint> out;
    for (const auto& row : doc.sections[0].rows)
        out.push_back({parse_double(row.at(0)), parse_double(row.at(1)), parse_double(row.at(2)),
                       parse_double(row.at(3)), parse_double(row.at(4))});
    return out;
}

// ---------------------------------------------------------------------------
// Trajectories

/// Long format: one row per (snapshot time, node).
inline CsvDocument trajectory_document(const Trajectory& traj, const std::vector<double>& nodes,
                                       Metadata meta = {}) {
    CsvDocument doc;
    doc.meta = std::move(meta);
    set_meta(doc.meta, "stages", std::to_string(traj.stages));
    set_meta(doc.meta, "steps", std::to_string(traj.steps));
    CsvSection sec;
    sec.header = {"t", "x", "u"};
    for (std::size_t k = 0; k < traj.states.size(); ++k) {
        if (traj.states[k].size() != nodes.size())
            throw std::invalid_argument("trajectory csv: state size does not match the grid");
        for (std::size_t i = 0; i < nodes.size(); ++i)
            sec.rows.push_back({format_double(traj.times[k]), format_double(nodes[i]),
                                format_double(traj.states[k][i])});
    }
    doc.sections = {std::move(sec)};
    return doc;
}

inline Trajectory parse_trajectory(const CsvDocument& doc, std::vector<double>* nodes = nullptr) {
    if (doc.sections.size() != 1) throw std::invalid_argument("trajectory csv: expected 1 section");
    Trajectory traj;
    if (auto s = doc.get("stages")) traj.stages = parse_int<int>(*s);
    if (auto n = doc.get("steps")) traj.steps = parse_int<std::int64_t>(*n);
    std::vector<double> xs;
    for (const auto& row : doc.sections[0].rows) {
        const double t = parse_double(row.at(0));
        if (traj.times.empty() || traj.times.back() != t) {
            traj.times.push_back(t);
            traj.states.emplace_back();
        }
        if (traj.states.size() == 1) xs.push_back(parse_double(row.at(1)));
        traj.states.back().push_back(parse_double(row.at(2)));
    }
    if (nodes) *nodes = std::move(xs);
    return traj;
}

/// Final states of several runs side by side: x, then one column per run.
inline CsvDocument profile_document(const std::vector<double>& nodes,
                                    const std::vector<std::string>& names,
                                    const std::vector<std::vector<double>>& profiles,
                                    Metadata meta = {}) {
    if (names.size() != profiles.size())
        throw std::invalid_argument("profile csv: names and profiles differ in count");
    CsvDocument doc;
    doc.meta = std::move(meta);
    CsvSection sec;
    sec.header = {"x"};
    sec.header.insert(sec.header.end(), names.begin(), names.end());
    for (std::size_t i = 0; i < nodes.size(); ++i) {
        std::vector<std::string> row{format_double(nodes[i])};
        for (const auto& p : profiles) {
            if (p.size() != nodes.size())
                throw std::invalid_argument("profile csv: profile size does not match the grid");
            row.push_back(format_double(p[i]));
        }
        sec.rows.push_back(std::move(row));
    }
    doc.sections = {std::move(sec)};
    return doc;
}

}  // namespace skrock

#endif
