#include "trigsim/csvio.hpp"

#include <cmath>
#include <cstdio>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "trigsim/errors.hpp"
#include "trigsim/scenario.hpp"
#include "trigsim/version.hpp"

namespace trigsim {

namespace fs = std::filesystem;
using nlohmann::json;

std::string fmt_double(double x) {
    if (std::isnan(x)) return "nan";
    if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
    return json(x).dump();
}

namespace {

std::string csv_escape(const std::string& field) {
    if (field.find_first_of(",\"\n\r") == std::string::npos) return field;
    std::string out = "\"";
    for (char ch : field) {
        if (ch == '"') out += '"';
        out += ch;
    }
    out += '"';
    return out;
}

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> fields;
    std::string cur;
    bool quoted = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        const char ch = line[i];
        if (quoted) {
            if (ch == '"') {
                if (i + 1 < line.size() && line[i + 1] == '"') {
                    cur += '"';
                    ++i;
                } else {
                    quoted = false;
                }
            } else {
                cur += ch;
            }
        } else if (ch == '"') {
            quoted = true;
        } else if (ch == ',') {
            fields.push_back(cur);
            cur.clear();
        } else {
            cur += ch;
        }
    }
    fields.push_back(cur);
    return fields;
}

double parse_double(const std::string& s, const std::string& where) {
    try {
        std::size_t used = 0;
        const double v = std::stod(s, &used);
        if (used != s.size()) throw std::invalid_argument(s);
        return v;
    } catch (const std::exception&) {
        throw ConfigError(where + ": cannot parse number '" + s + "'");
    }
}

std::string chomp(std::string line) {
    while (!line.empty() && (line.back() == '\n' || line.back() == '\r'))
        line.pop_back();
    return line;
}

}  // namespace

void write_file_atomic(const std::string& path, const std::string& content) {
    const fs::path target(path);
    if (target.has_parent_path()) {
        std::error_code ec;
        fs::create_directories(target.parent_path(), ec);
        if (ec)
            throw EngineError("cannot create directory " +
                              target.parent_path().string() + ": " + ec.message());
    }
    const fs::path tmp(path + ".tmp");
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw EngineError("cannot write " + tmp.string());
        out << content;
        out.flush();
        if (!out) throw EngineError("short write to " + tmp.string());
    }
    std::error_code ec;
    fs::rename(tmp, target, ec);
    if (ec)
        throw EngineError("cannot rename " + tmp.string() + " to " + path +
                          ": " + ec.message());
}

RunManifest make_manifest(const std::string& config_hash,
                          std::vector<std::string> outputs) {
    RunManifest m;
    m.config_hash = config_hash;
    m.engine_version = kEngineVersion;
    const std::time_t now = std::time(nullptr);
    std::tm utc{};
    gmtime_r(&now, &utc);
    char buf[48];
    std::snprintf(buf, sizeof buf, "%04d-%02d-%02dT%02d:%02d:%02dZ",
                  utc.tm_year + 1900, utc.tm_mon + 1, utc.tm_mday, utc.tm_hour,
                  utc.tm_min, utc.tm_sec);
    m.timestamp = buf;
    m.outputs = std::move(outputs);
    return m;
}

void write_manifest(const std::string& path, const RunManifest& m) {
    json j;
    j["config_hash"] = m.config_hash;
    j["engine_version"] = m.engine_version;
    j["timestamp"] = m.timestamp;
    j["outputs"] = m.outputs;
    write_file_atomic(path, j.dump(2) + "\n");
}

std::string curve_csv(const TradeOffCurve& curve) {
    std::vector<std::string> labels = {"objective", "compared"};
    for (const CurvePoint& pt : curve.points)
        if (!pt.outcomes.labels.empty()) {
            labels = pt.outcomes.labels;
            break;
        }

    std::ostringstream os;
    os << "# scenario: " << curve.scenario_id << "\n";
    os << "# indicator: " << curve.indicator_id << "\n";
    os << "# tau: " << curve.tau << "\n";
    os << "# Delta: " << curve.Delta << "\n";
    os << "theta";
    for (const std::string& lab : labels) os << "," << lab;
    os << ",status\n";
    for (const CurvePoint& pt : curve.points) {
        os << fmt_double(pt.theta);
        if (pt.ok) {
            for (double v : pt.outcomes.values) os << "," << fmt_double(v);
            os << ",ok";
        } else {
            for (std::size_t i = 0; i < labels.size(); ++i) os << ",";
            os << "," << csv_escape(pt.error.empty() ? "failed" : pt.error);
        }
        os << "\n";
    }
    return os.str();
}

TradeOffCurve read_curve_csv(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot open curve file: " + path);

    TradeOffCurve curve;
    std::vector<std::string> labels;
    std::string line;
    bool saw_header = false;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        line = chomp(line);
        if (line.empty()) continue;
        std::ostringstream at;
        at << path << ":" << lineno;
        if (line[0] == '#') {
            const std::size_t colon = line.find(':');
            if (colon == std::string::npos) continue;
            std::string key = line.substr(1, colon - 1);
            std::string value = line.substr(colon + 1);
            auto trim = [](std::string s) {
                while (!s.empty() && s.front() == ' ') s.erase(s.begin());
                while (!s.empty() && s.back() == ' ') s.pop_back();
                return s;
            };
            key = trim(key);
            value = trim(value);
            if (key == "scenario") curve.scenario_id = value;
            else if (key == "indicator") curve.indicator_id = value;
            else if (key == "tau") curve.tau = int(parse_double(value, at.str()));
            else if (key == "Delta") curve.Delta = int(parse_double(value, at.str()));
            continue;
        }
        const std::vector<std::string> fields = split_csv_line(line);
        if (!saw_header) {
            if (fields.size() < 3 || fields.front() != "theta" ||
                fields.back() != "status")
                throw ConfigError(at.str() +
                                  ": expected header theta,<labels...>,status");
            labels.assign(fields.begin() + 1, fields.end() - 1);
            saw_header = true;
            continue;
        }
        if (fields.size() != labels.size() + 2)
            throw ConfigError(at.str() + ": wrong number of columns");
        CurvePoint pt;
        pt.theta = parse_double(fields.front(), at.str());
        if (fields.back() == "ok") {
            pt.ok = true;
            pt.outcomes.labels = labels;
            for (std::size_t i = 0; i < labels.size(); ++i)
                pt.outcomes.values.push_back(
                    parse_double(fields[i + 1], at.str()));
        } else {
            pt.ok = false;
            pt.error = fields.back();
        }
        curve.points.push_back(std::move(pt));
    }
    if (!saw_header)
        throw ConfigError(path + ": no header line found");
    return curve;
}

std::string trajectory_csv(const ClosedLoopResult& res, const ModelSpec& m,
                           std::chrono::sys_days start) {
    const Trajectory& traj = res.traj;
    std::ostringstream os;
    os << "t,date";
    for (const std::string& comp : m.compartments) os << "," << comp;
    os << ",u,indicator,regime\n";
    for (std::size_t i = 0; i < traj.states.size(); ++i) {
        const int t = traj.t0 + int(i);
        os << t << "," << format_date(start + std::chrono::days(t));
        for (double v : traj.states[i]) os << "," << fmt_double(v);
        os << ",";
        if (i < traj.controls.size()) os << fmt_double(traj.controls[i]);
        os << ",";
        if (i < res.indicator_values.size())
            os << fmt_double(res.indicator_values[i]);
        os << ",";
        if (i < traj.controls.size())
            os << (res.log.applied_at(t) ? "applied" : "released");
        os << "\n";
    }
    return os.str();
}

std::string switches_csv(const SwitchLog& log, std::chrono::sys_days start) {
    std::ostringstream os;
    os << "k,t,date,regime\n";
    for (std::size_t k = 0; k < log.trigger_times.size(); ++k) {
        const int t = log.trigger_times[k];
        os << k << "," << t << "," << format_date(start + std::chrono::days(t))
           << "," << (log.applied_on_interval(k) ? "applied" : "released")
           << "\n";
    }
    return os.str();
}

std::string curve_chart_svg(const std::vector<TradeOffCurve>& curves) {
    constexpr double kW = 760, kH = 520;
    constexpr double kL = 80, kR = 20, kT = 36, kB = 56;
    static const char* kColors[] = {"#1f77b4", "#ff7f0e", "#2ca02c",
                                    "#d62728", "#9467bd", "#8c564b"};

    struct Series {
        std::string name;
        std::vector<std::pair<double, double>> pts;  // (objective, compared)
    };
    std::vector<Series> series;
    double xmin = 0, xmax = 0, ymin = 0, ymax = 0;
    bool any = false;
    bool all_positive_x = true;
    for (const TradeOffCurve& c : curves) {
        Series s;
        s.name = c.indicator_id;
        for (const CurvePoint& pt : c.points) {
            if (!pt.ok || pt.outcomes.values.size() < 2) continue;
            const double x = pt.outcomes.values.front();
            const double y = pt.outcomes.values.back();
            if (!any) {
                xmin = xmax = x;
                ymin = ymax = y;
                any = true;
            } else {
                xmin = std::min(xmin, x);
                xmax = std::max(xmax, x);
                ymin = std::min(ymin, y);
                ymax = std::max(ymax, y);
            }
            if (x <= 0) all_positive_x = false;
            s.pts.emplace_back(x, y);
        }
        series.push_back(std::move(s));
    }

    const bool log_x = any && all_positive_x && xmin > 0 && xmax / xmin > 1000.0;
    auto tx = [&](double x) { return log_x ? std::log10(x) : x; };
    double txmin = any ? tx(xmin) : 0, txmax = any ? tx(xmax) : 1;
    if (txmax <= txmin) txmax = txmin + 1;
    if (ymax <= ymin) ymax = ymin + 1;
    auto px = [&](double x) {
        return kL + (tx(x) - txmin) / (txmax - txmin) * (kW - kL - kR);
    };
    auto py = [&](double y) {
        return kH - kB - (y - ymin) / (ymax - ymin) * (kH - kT - kB);
    };
    auto tick_label = [](double v) {
        char buf[32];
        std::snprintf(buf, sizeof buf, "%.3g", v);
        return std::string(buf);
    };

    std::ostringstream os;
    os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kW
       << "\" height=\"" << kH << "\" viewBox=\"0 0 " << kW << " " << kH
       << "\">\n";
    os << "<rect width=\"" << kW << "\" height=\"" << kH
       << "\" fill=\"white\"/>\n";
    os << "<g font-family=\"sans-serif\" font-size=\"12\">\n";

    os << "<line x1=\"" << kL << "\" y1=\"" << kH - kB << "\" x2=\"" << kW - kR
       << "\" y2=\"" << kH - kB << "\" stroke=\"black\"/>\n";
    os << "<line x1=\"" << kL << "\" y1=\"" << kT << "\" x2=\"" << kL
       << "\" y2=\"" << kH - kB << "\" stroke=\"black\"/>\n";

    for (int i = 0; i <= 4; ++i) {
        const double f = i / 4.0;
        const double xv = log_x ? std::pow(10.0, txmin + f * (txmax - txmin))
                                : txmin + f * (txmax - txmin);
        const double x = kL + f * (kW - kL - kR);
        os << "<line x1=\"" << x << "\" y1=\"" << kH - kB << "\" x2=\"" << x
           << "\" y2=\"" << kH - kB + 5 << "\" stroke=\"black\"/>\n";
        os << "<text x=\"" << x << "\" y=\"" << kH - kB + 20
           << "\" text-anchor=\"middle\">" << tick_label(xv) << "</text>\n";
        const double yv = ymin + f * (ymax - ymin);
        const double y = kH - kB - f * (kH - kT - kB);
        os << "<line x1=\"" << kL - 5 << "\" y1=\"" << y << "\" x2=\"" << kL
           << "\" y2=\"" << y << "\" stroke=\"black\"/>\n";
        os << "<text x=\"" << kL - 8 << "\" y=\"" << y + 4
           << "\" text-anchor=\"end\">" << tick_label(yv) << "</text>\n";
    }
    os << "<text x=\"" << (kL + kW - kR) / 2 << "\" y=\"" << kH - 12
       << "\" text-anchor=\"middle\">objective"
       << (log_x ? " (log scale)" : "") << "</text>\n";
    os << "<text x=\"16\" y=\"" << (kT + kH - kB) / 2
       << "\" text-anchor=\"middle\" transform=\"rotate(-90 16 "
       << (kT + kH - kB) / 2 << ")\">% of days in lockdown</text>\n";

    for (std::size_t si = 0; si < series.size(); ++si) {
        const Series& s = series[si];
        const char* color = kColors[si % (sizeof kColors / sizeof *kColors)];
        if (s.pts.size() > 1) {
            os << "<polyline fill=\"none\" stroke=\"" << color
               << "\" stroke-width=\"1.5\" points=\"";
            for (const auto& [x, y] : s.pts) os << px(x) << "," << py(y) << " ";
            os << "\"/>\n";
        }
        for (const auto& [x, y] : s.pts)
            os << "<circle cx=\"" << px(x) << "\" cy=\"" << py(y)
               << "\" r=\"2.2\" fill=\"" << color << "\"/>\n";
        const double ly = kT + 16.0 * double(si);
        os << "<line x1=\"" << kW - kR - 150 << "\" y1=\"" << ly << "\" x2=\""
           << kW - kR - 130 << "\" y2=\"" << ly << "\" stroke=\"" << color
           << "\" stroke-width=\"2\"/>\n";
        os << "<text x=\"" << kW - kR - 124 << "\" y=\"" << ly + 4 << "\">"
           << s.name << "</text>\n";
    }
    os << "</g>\n</svg>\n";
    return os.str();
}

}  // namespace trigsim
