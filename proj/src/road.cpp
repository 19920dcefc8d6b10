#include "loadcast/road.hpp"

#include "loadcast/error.hpp"
#include "loadcast/rng.hpp"

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <fstream>
#include <map>
#include <numeric>
#include <sstream>

namespace loadcast {

namespace {

std::string slot_label(std::int64_t ts) {
    std::int64_t sec = ((ts % kSecondsPerDay) + kSecondsPerDay) % kSecondsPerDay;
    char buf[8];
    std::snprintf(buf, sizeof buf, "%02d:%02d", static_cast<int>(sec / 3600),
                  static_cast<int>((sec % 3600) / 60));
    return buf;
}

std::int64_t day_of(std::int64_t ts) {
    return ts >= 0 ? ts / kSecondsPerDay : -((-ts + kSecondsPerDay - 1) / kSecondsPerDay);
}

std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '"')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '"' || s.back() == '\r'))
        s.remove_suffix(1);
    return s;
}

std::vector<std::string_view> split_csv(std::string_view line) {
    std::vector<std::string_view> out;
    std::size_t start = 0;
    for (;;) {
        auto pos = line.find(',', start);
        out.push_back(trim(line.substr(start, pos == std::string_view::npos ? pos : pos - start)));
        if (pos == std::string_view::npos) break;
        start = pos + 1;
    }
    return out;
}

template <typename T>
bool parse_number(std::string_view s, T& out) {
    if (s.empty()) return false;
    if (s.front() == '+') s.remove_prefix(1);
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
    return ec == std::errc{} && ptr == s.data() + s.size();
}

void validate_days(const std::vector<RoadRecord>& records) {
    for (std::size_t i = 0; i < records.size(); ++i) {
        check_record_bounds(records[i]);
        if (i > 0 && records[i].timestamp <= records[i - 1].timestamp)
            throw MalformedRow("timestamps not strictly increasing at " +
                               format_iso8601(records[i].timestamp));
    }
    std::size_t i = 0;
    while (i < records.size()) {
        const std::int64_t day = day_of(records[i].timestamp);
        const std::int64_t midnight = day * kSecondsPerDay;
        for (std::size_t slot = 0; slot < kPointsPerDay; ++slot, ++i) {
            const std::int64_t expected = midnight + static_cast<std::int64_t>(slot) * kIntervalSeconds;
            if (i >= records.size() || records[i].timestamp != expected)
                throw GapError("missing 5-minute slot " + slot_label(expected) + " on " +
                               format_iso8601(midnight).substr(0, 10) + " (" + format_iso8601(expected) + ")");
        }
    }
}

}  // namespace

void check_record_bounds(const RoadRecord& r) {
    if (r.flow < 0)
        throw BoundsError("negative flow " + std::to_string(r.flow) + " at " + format_iso8601(r.timestamp));
    if (!std::isfinite(r.speed) || r.speed < 0.0 || r.speed > kMaxSpeedMph) {
        std::ostringstream os;
        os << "speed " << r.speed << " mph outside [0, " << kMaxSpeedMph << "] at "
           << format_iso8601(r.timestamp);
        throw BoundsError(os.str());
    }
}

RoadSeries::RoadSeries(std::vector<RoadRecord> records, std::vector<std::int64_t> imputed)
    : records_(std::move(records)), imputed_(std::move(imputed)) {
    validate_days(records_);
}

RoadSeries RoadSeries::first_days(std::size_t days) const {
    if (days > this->days())
        throw InvalidArgument("road_ingest", "requested " + std::to_string(days) + " days, series has " +
                                                 std::to_string(this->days()));
    std::vector<RoadRecord> head(records_.begin(),
                                 records_.begin() + static_cast<std::ptrdiff_t>(days * kPointsPerDay));
    std::vector<std::int64_t> imp;
    if (!head.empty())
        std::copy_if(imputed_.begin(), imputed_.end(), std::back_inserter(imp),
                     [&](std::int64_t t) { return t <= head.back().timestamp; });
    return RoadSeries(std::move(head), std::move(imp));
}

ColumnMap ColumnMap::parse(const std::string& spec) {
    ColumnMap map;
    std::stringstream ss(spec);
    std::string item;
    while (std::getline(ss, item, ',')) {
        auto eq = item.find('=');
        if (eq == std::string::npos) throw ConfigError("bad column mapping '" + item + "'");
        std::string key = item.substr(0, eq), col = item.substr(eq + 1);
        if (key == "timestamp") map.timestamp = col;
        else if (key == "flow") map.flow = col;
        else if (key == "speed") map.speed = col;
        else throw ConfigError("unknown column mapping key '" + key + "'");
    }
    return map;
}

std::optional<std::int64_t> parse_timestamp(std::string_view text) {
    text = trim(text);
    std::int64_t epoch = 0;
    if (parse_number(text, epoch)) return epoch;

    int y = 0, mo = 0, d = 0, hh = 0, mm = 0, ss = 0;
    std::string buf(text);
    int consumed = 0;
    if (std::sscanf(buf.c_str(), "%4d-%2d-%2d%n", &y, &mo, &d, &consumed) != 3 || consumed != 10)
        return std::nullopt;
    std::string_view rest = text.substr(10);
    if (!rest.empty()) {
        if (rest.front() != 'T' && rest.front() != ' ') return std::nullopt;
        rest.remove_prefix(1);
        std::string tail(rest);
        int n = 0;
        if (std::sscanf(tail.c_str(), "%2d:%2d%n", &hh, &mm, &n) != 2 || n != 5) return std::nullopt;
        rest.remove_prefix(5);
        if (!rest.empty() && rest.front() == ':') {
            tail = std::string(rest);
            if (std::sscanf(tail.c_str(), ":%2d%n", &ss, &n) != 1 || n != 3) return std::nullopt;
            rest.remove_prefix(3);
        }
    }
    std::int64_t offset = 0;
    if (rest == "Z") {
        rest = {};
    } else if (!rest.empty() && (rest.front() == '+' || rest.front() == '-')) {
        int oh = 0, om = 0, n = 0;
        std::string tail(rest.substr(1));
        if (std::sscanf(tail.c_str(), "%2d:%2d%n", &oh, &om, &n) != 2 || n != 5 || rest.size() != 6)
            return std::nullopt;
        offset = (rest.front() == '+' ? 1 : -1) * (oh * 3600 + om * 60);
        rest = {};
    }
    if (!rest.empty()) return std::nullopt;
    if (hh > 23 || mm > 59 || ss > 60) return std::nullopt;

    using namespace std::chrono;
    year_month_day ymd{year{y}, month{static_cast<unsigned>(mo)}, day{static_cast<unsigned>(d)}};
    if (!ymd.ok()) return std::nullopt;
    const std::int64_t days = sys_days(ymd).time_since_epoch().count();
    return days * kSecondsPerDay + hh * 3600 + mm * 60 + ss - offset;
}

std::string format_iso8601(std::int64_t epoch_seconds) {
    using namespace std::chrono;
    const std::int64_t day = day_of(epoch_seconds);
    const std::int64_t sec = epoch_seconds - day * kSecondsPerDay;
    year_month_day ymd{sys_days{days{day}}};
    char buf[32];
    std::snprintf(buf, sizeof buf, "%04d-%02u-%02uT%02d:%02d:%02dZ", static_cast<int>(ymd.year()),
                  static_cast<unsigned>(ymd.month()), static_cast<unsigned>(ymd.day()),
                  static_cast<int>(sec / 3600), static_cast<int>((sec % 3600) / 60),
                  static_cast<int>(sec % 60));
    return buf;
}

RoadSeries parse_road_csv(std::istream& in, const IngestOptions& options) {
    std::string line;
    if (!std::getline(in, line)) throw MalformedRow("empty input: missing header row");
    if (line.size() >= 3 && line.compare(0, 3, "\xEF\xBB\xBF") == 0) line.erase(0, 3);

    const auto header = split_csv(line);
    auto find_col = [&](const std::string& name) {
        auto it = std::find(header.begin(), header.end(), name);
        if (it == header.end()) throw MalformedRow("header lacks column '" + name + "'");
        return static_cast<std::size_t>(it - header.begin());
    };
    const std::size_t ts_col = find_col(options.columns.timestamp);
    const std::size_t flow_col = find_col(options.columns.flow);
    const std::size_t speed_col = find_col(options.columns.speed);
    const std::size_t needed = std::max({ts_col, flow_col, speed_col}) + 1;

    std::vector<RoadRecord> records;
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (trim(line).empty()) continue;
        const auto fields = split_csv(line);
        const std::string where = "line " + std::to_string(line_no);
        if (fields.size() < needed) throw MalformedRow(where + ": expected at least " + std::to_string(needed) + " fields");

        RoadRecord r;
        auto ts = parse_timestamp(fields[ts_col]);
        if (!ts) throw MalformedRow(where + ": bad timestamp '" + std::string(fields[ts_col]) + "'");
        r.timestamp = *ts;

        if (!parse_number(fields[flow_col], r.flow)) {
            double f = 0;
            if (!parse_number(fields[flow_col], f) || f != std::floor(f) || !std::isfinite(f))
                throw MalformedRow(where + ": bad flow '" + std::string(fields[flow_col]) + "'");
            r.flow = static_cast<std::int64_t>(f);
        }
        if (!parse_number(fields[speed_col], r.speed))
            throw MalformedRow(where + ": bad speed '" + std::string(fields[speed_col]) + "'");
        check_record_bounds(r);
        if (r.timestamp % kIntervalSeconds != 0)
            throw MalformedRow(where + ": timestamp " + format_iso8601(r.timestamp) + " not on a 5-minute boundary");
        records.push_back(r);
    }

    std::stable_sort(records.begin(), records.end(),
                     [](const RoadRecord& a, const RoadRecord& b) { return a.timestamp < b.timestamp; });
    for (std::size_t i = 1; i < records.size(); ++i)
        if (records[i].timestamp == records[i - 1].timestamp)
            throw MalformedRow("duplicate timestamp " + format_iso8601(records[i].timestamp));

    if (options.impute == Impute::None) return RoadSeries(std::move(records));

    // hold: each missing slot repeats the previous record of the same day;
    // a missing 00:00 takes the first present record of the day
    std::map<std::int64_t, std::vector<const RoadRecord*>> by_day;
    for (const auto& r : records) by_day[day_of(r.timestamp)].push_back(&r);
    std::vector<RoadRecord> filled;
    std::vector<std::int64_t> imputed;
    filled.reserve(by_day.size() * kPointsPerDay);
    for (const auto& [day, recs] : by_day) {
        std::size_t k = 0;
        const RoadRecord* prev = recs.front();
        for (std::size_t slot = 0; slot < kPointsPerDay; ++slot) {
            const std::int64_t ts = day * kSecondsPerDay + static_cast<std::int64_t>(slot) * kIntervalSeconds;
            if (k < recs.size() && recs[k]->timestamp == ts) {
                prev = recs[k++];
                filled.push_back(*prev);
            } else {
                filled.push_back(RoadRecord{ts, prev->flow, prev->speed});
                imputed.push_back(ts);
            }
        }
    }
    return RoadSeries(std::move(filled), std::move(imputed));
}

RoadSeries parse_road_csv(const std::string& path, const IngestOptions& options) {
    std::ifstream in(path);
    if (!in) throw InvalidArgument("road_ingest", "cannot open road CSV '" + path + "'");
    return parse_road_csv(in, options);
}

void write_road_csv(std::ostream& out, const RoadSeries& series) {
    out << "timestamp,flow,speed\n";
    char buf[64];
    for (const auto& r : series.records()) {
        auto res = std::to_chars(buf, buf + sizeof buf, r.speed);
        out << r.timestamp << ',' << r.flow << ',' << std::string_view(buf, res.ptr - buf) << '\n';
    }
}

void write_road_csv(const std::string& path, const RoadSeries& series) {
    std::ofstream out(path);
    if (!out) throw InvalidArgument("road_ingest", "cannot write '" + path + "'");
    write_road_csv(out, series);
}

RoadSeries synthesize_road_series(std::size_t days, std::uint64_t seed) {
    if (days < 1) throw InvalidArgument("road_ingest", "synthesize_road_series requires days >= 1");

    constexpr double kCapacity = 560.0;   // veh / 5 min over three lanes
    constexpr double kFreeFlow = 68.0;    // mph
    const std::int64_t start_day = *parse_timestamp("2021-03-29") / kSecondsPerDay;  // a Monday

    Rng rng(derive_seed(seed, "synth"));
    std::normal_distribution<double> gauss(0.0, 1.0);
    std::uniform_real_distribution<double> unif(0.0, 1.0);

    std::vector<RoadRecord> records;
    records.reserve(days * kPointsPerDay);
    std::int64_t calendar_day = start_day;
    double slow = 0.0;  // AR(1) log-flow deviation, persists across the day
    for (std::size_t d = 0; d < days; ++d) {
        // skip Saturday/Sunday; 1970-01-01 was a Thursday
        while (((calendar_day % 7) + 7 + 3) % 7 >= 5) ++calendar_day;

        const double day_scale = std::exp(0.06 * gauss(rng));
        const double am_shift = 0.25 * gauss(rng);
        const double pm_shift = 0.25 * gauss(rng);
        // occasional incident: a window of depressed speed and flow
        const bool incident = unif(rng) < 0.3;
        const double incident_hour = 6.0 + 14.0 * unif(rng);
        const double incident_len = 0.3 + 0.7 * unif(rng);

        double load = 0.0;  // smoothed occupancy proxy; speed follows it, not raw flow
        for (std::size_t slot = 0; slot < kPointsPerDay; ++slot) {
            const double hour = static_cast<double>(slot) * 24.0 / kPointsPerDay;
            auto bump = [](double x, double mu, double sd) { return std::exp(-0.5 * (x - mu) * (x - mu) / (sd * sd)); };
            const double daytime = 1.0 / (1.0 + std::exp(-(hour - 5.5) * 1.6)) *
                                   1.0 / (1.0 + std::exp((hour - 21.5) * 1.2));
            double profile = 18.0 + 230.0 * daytime + 220.0 * bump(hour, 7.75 + am_shift, 1.1) +
                             190.0 * bump(hour, 17.25 + pm_shift, 1.4);
            profile *= day_scale;

            slow = 0.92 * slow + 0.05 * gauss(rng);
            const double fast = 0.12 * gauss(rng);
            double flow = profile * std::exp(slow + fast);

            const bool in_incident = incident && hour >= incident_hour && hour < incident_hour + incident_len;
            if (in_incident) flow *= 0.75;
            flow = std::clamp(std::round(flow), 0.0, 600.0);

            load = slot == 0 ? flow / kCapacity : 0.7 * load + 0.3 * flow / kCapacity;
            double speed = kFreeFlow * (1.0 - 0.78 * std::pow(std::min(load, 1.0), 5.0)) + 1.5 * gauss(rng);
            if (in_incident) speed *= 0.6;
            speed = std::clamp(speed, 5.0, 75.0);
            speed = std::round(speed * 10.0) / 10.0;

            records.push_back(RoadRecord{
                calendar_day * kSecondsPerDay + static_cast<std::int64_t>(slot) * kIntervalSeconds,
                static_cast<std::int64_t>(flow), speed});
        }
        ++calendar_day;
    }
    return RoadSeries(std::move(records));
}

double pearson(std::span<const double> x, std::span<const double> y) {
    if (x.size() != y.size() || x.empty())
        throw InvalidArgument("road_ingest", "pearson: mismatched or empty inputs");
    const double n = static_cast<double>(x.size());
    const double mx = std::accumulate(x.begin(), x.end(), 0.0) / n;
    const double my = std::accumulate(y.begin(), y.end(), 0.0) / n;
    double sxy = 0, sxx = 0, syy = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double dx = x[i] - mx, dy = y[i] - my;
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if (sxx == 0.0 || syy == 0.0) throw DegenerateSeries("zero-variance variable in correlation");
    return std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
}

CorrelationMatrix correlation_report(const RoadSeries& series, std::span<const std::int64_t> calls) {
    if (series.empty()) throw InvalidArgument("road_ingest", "correlation_report on empty series");
    if (!calls.empty() && calls.size() != series.size())
        throw InvalidArgument("road_ingest", "call series not aligned with road series");

    std::vector<std::vector<double>> cols(calls.empty() ? 2 : 3);
    CorrelationMatrix m;
    m.labels = {"flow", "speed"};
    for (const auto& r : series.records()) {
        cols[0].push_back(static_cast<double>(r.flow));
        cols[1].push_back(r.speed);
    }
    if (!calls.empty()) {
        m.labels.push_back("calls");
        for (auto c : calls) cols[2].push_back(static_cast<double>(c));
    }
    for (std::size_t i = 0; i < cols.size(); ++i) {
        const auto [lo, hi] = std::minmax_element(cols[i].begin(), cols[i].end());
        if (*lo == *hi) throw DegenerateSeries("variable '" + m.labels[i] + "' has zero variance");
    }
    const std::size_t k = cols.size();
    m.values.assign(k, std::vector<double>(k, 1.0));
    for (std::size_t i = 0; i < k; ++i)
        for (std::size_t j = i + 1; j < k; ++j) m.values[i][j] = m.values[j][i] = pearson(cols[i], cols[j]);
    return m;
}

}  // namespace loadcast
