#include "sgru/data.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>
#include <string>

#include "sgru/errors.hpp"

namespace sgru {

const std::array<const char*, kFeatureCount> kFeatureNames = {
    "hour", "ghi", "temp_c", "pressure_hpa", "rh_pct", "wind_knots", "zenith_deg"};

namespace {

constexpr double kWindMsToKnots = 1.9438;
constexpr const char* kCanonicalHeader =
    "timestamp,hour,ghi,temp_c,pressure_hpa,rh_pct,wind_knots,zenith_deg";

// Howard Hinnant's civil calendar algorithms.
long long days_from_civil(int y, int m, int d) {
    y -= m <= 2;
    const long long era = (y >= 0 ? y : y - 399) / 400;
    const unsigned yoe = static_cast<unsigned>(y - era * 400);
    const unsigned doy = (153u * static_cast<unsigned>(m + (m > 2 ? -3 : 9)) + 2u) / 5u +
                         static_cast<unsigned>(d) - 1u;
    const unsigned doe = yoe * 365 + yoe / 4 - yoe / 100 + doy;
    return era * 146097 + static_cast<long long>(doe) - 719468;
}

void civil_from_days(long long z, int& y, int& m, int& d) {
    z += 719468;
    const long long era = (z >= 0 ? z : z - 146096) / 146097;
    const unsigned doe = static_cast<unsigned>(z - era * 146097);
    const unsigned yoe = (doe - doe / 1460 + doe / 36524 - doe / 146096) / 365;
    const long long yy = static_cast<long long>(yoe) + era * 400;
    const unsigned doy = doe - (365 * yoe + yoe / 4 - yoe / 100);
    const unsigned mp = (5 * doy + 2) / 153;
    d = static_cast<int>(doy - (153 * mp + 2) / 5 + 1);
    m = static_cast<int>(mp < 10 ? mp + 3 : mp - 9);
    y = static_cast<int>(yy + (m <= 2));
}

double parse_double(std::string_view tok, int line_no, const char* what) {
    double v = 0.0;
    auto [p, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
    if (ec != std::errc() || p != tok.data() + tok.size()) {
        throw ParseError("line " + std::to_string(line_no) + ": bad " + what + " value '" +
                         std::string(tok) + "'");
    }
    return v;
}

int parse_int(std::string_view tok, int line_no, const char* what) {
    int v = 0;
    auto [p, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
    if (ec != std::errc() || p != tok.data() + tok.size()) {
        throw ParseError("line " + std::to_string(line_no) + ": bad " + what + " value '" +
                         std::string(tok) + "'");
    }
    return v;
}

std::vector<std::string_view> split_ws(std::string_view line) {
    std::vector<std::string_view> out;
    std::size_t i = 0;
    while (i < line.size()) {
        while (i < line.size() && (line[i] == ' ' || line[i] == '\t' || line[i] == '\r')) ++i;
        std::size_t start = i;
        while (i < line.size() && line[i] != ' ' && line[i] != '\t' && line[i] != '\r') ++i;
        if (i > start) out.push_back(line.substr(start, i - start));
    }
    return out;
}

void append_double(std::string& out, double v) {
    char buf[64];
    auto [end, ec] = std::to_chars(buf, buf + sizeof(buf), v);
    out.append(buf, end);
}

} // namespace

bool field_missing(double value, int qc) { return qc != 0 || value <= -9999.0; }

long long serial_hour(int year, int month, int day, int hour) {
    return days_from_civil(year, month, day) * 24 + hour;
}

void civil_from_serial_hour(long long serial, int& year, int& month, int& day, int& hour) {
    long long days = serial / 24;
    long long rem = serial % 24;
    if (rem < 0) {
        rem += 24;
        days -= 1;
    }
    hour = static_cast<int>(rem);
    civil_from_days(days, year, month, day);
}

// Column positions in a 48-field SURFRAD row (0-based):
// 0 year, 1 jday, 2 month, 3 day, 4 hour, 5 min, 6 dt, 7 zen, then
// value/QC pairs: 8 dw_solar(GHI), 12 direct_n(DNI), 14 diffuse(DHI),
// 38 temp, 40 rh, 42 windspd, 46 pressure.
std::vector<SurfradRecord> parse_surfrad(std::istream& in) {
    std::string line;
    int line_no = 0;
    for (int header = 0; header < 2; ++header) {
        if (!std::getline(in, line)) {
            throw ParseError("truncated file: missing header line " + std::to_string(header + 1));
        }
        ++line_no;
    }

    std::vector<SurfradRecord> records;
    while (std::getline(in, line)) {
        ++line_no;
        auto toks = split_ws(line);
        if (toks.empty()) continue; // blank trailing line
        if (toks.size() != 48) {
            throw ParseError("line " + std::to_string(line_no) + ": expected 48 fields, got " +
                             std::to_string(toks.size()));
        }
        SurfradRecord r;
        r.year = parse_int(toks[0], line_no, "year");
        r.jday = parse_int(toks[1], line_no, "jday");
        r.month = parse_int(toks[2], line_no, "month");
        r.day = parse_int(toks[3], line_no, "day");
        r.hour = parse_int(toks[4], line_no, "hour");
        r.minute = parse_int(toks[5], line_no, "min");
        r.zenith_deg = parse_double(toks[7], line_no, "zenith");
        r.ghi = parse_double(toks[8], line_no, "ghi");
        r.ghi_qc = parse_int(toks[9], line_no, "ghi qc");
        r.dni = parse_double(toks[12], line_no, "dni");
        r.dni_qc = parse_int(toks[13], line_no, "dni qc");
        r.dhi = parse_double(toks[14], line_no, "dhi");
        r.dhi_qc = parse_int(toks[15], line_no, "dhi qc");
        r.temp_c = parse_double(toks[38], line_no, "temp");
        r.temp_qc = parse_int(toks[39], line_no, "temp qc");
        r.rh_pct = parse_double(toks[40], line_no, "rh");
        r.rh_qc = parse_int(toks[41], line_no, "rh qc");
        r.wind_ms = parse_double(toks[42], line_no, "windspd");
        r.wind_qc = parse_int(toks[43], line_no, "windspd qc");
        r.pressure_hpa = parse_double(toks[46], line_no, "pressure");
        r.pressure_qc = parse_int(toks[47], line_no, "pressure qc");
        if (r.hour < 0 || r.hour > 23 || r.minute < 0 || r.minute > 59 || r.month < 1 ||
            r.month > 12 || r.day < 1 || r.day > 31 || r.jday < 1 || r.jday > 366) {
            throw ParseError("line " + std::to_string(line_no) + ": date-time fields out of range");
        }
        records.push_back(r);
    }
    return records;
}

std::vector<SurfradRecord> parse_surfrad_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw UsageError("cannot open SURFRAD file: " + path);
    return parse_surfrad(in);
}

std::string format_surfrad_row(const SurfradRecord& rec) {
    std::string out;
    out += std::to_string(rec.year);
    for (int v : {rec.jday, rec.month, rec.day, rec.hour, rec.minute}) {
        out += ' ';
        out += std::to_string(v);
    }
    out += ' ';
    append_double(out, rec.hour + rec.minute / 60.0); // dt
    out += ' ';
    append_double(out, rec.zenith_deg);

    // value/QC pairs in file order; columns not kept are sentinels.
    struct Pair { double v; int qc; };
    const Pair sentinel{kSurfradSentinel, 1};
    const Pair pairs[20] = {
        {rec.ghi, rec.ghi_qc},  sentinel, {rec.dni, rec.dni_qc}, {rec.dhi, rec.dhi_qc},
        sentinel, sentinel, sentinel, sentinel, sentinel, sentinel,
        sentinel, sentinel, sentinel, sentinel, sentinel,
        {rec.temp_c, rec.temp_qc}, {rec.rh_pct, rec.rh_qc}, {rec.wind_ms, rec.wind_qc},
        sentinel, {rec.pressure_hpa, rec.pressure_qc}};
    for (const auto& p : pairs) {
        out += ' ';
        append_double(out, p.v);
        out += ' ';
        out += std::to_string(p.qc);
    }
    return out;
}

void write_surfrad(const std::vector<SurfradRecord>& recs, const std::string& station,
                   std::ostream& out) {
    out << station << '\n';
    out << "   0.000 0.000 0 m version 1\n";
    for (const auto& r : recs) out << format_surfrad_row(r) << '\n';
}

TimeSeriesTable optimize(const std::vector<SurfradRecord>& records) {
    if (records.empty()) throw UsageError("optimize: no records");

    std::vector<SurfradRecord> sorted = records;
    std::stable_sort(sorted.begin(), sorted.end(), [](const SurfradRecord& a, const SurfradRecord& b) {
        long long sa = (days_from_civil(a.year, 1, 1) + a.jday - 1) * 24 + a.hour;
        long long sb = (days_from_civil(b.year, 1, 1) + b.jday - 1) * 24 + b.hour;
        if (sa != sb) return sa < sb;
        return a.minute < b.minute;
    });

    // Per-hour accumulation: sums and counts of valid samples per feature.
    struct HourAcc {
        double sum[kFeatureCount] = {0};
        int count[kFeatureCount] = {0};
    };
    std::map<long long, HourAcc> hours;
    for (const auto& r : sorted) {
        long long key = (days_from_civil(r.year, 1, 1) + r.jday - 1) * 24 + r.hour;
        HourAcc& acc = hours[key];
        auto take = [&](int feat, double v, int qc) {
            if (!field_missing(v, qc)) {
                acc.sum[feat] += v;
                acc.count[feat] += 1;
            }
        };
        take(kFeatGhi, r.ghi, r.ghi_qc);
        take(kFeatTemp, r.temp_c, r.temp_qc);
        take(kFeatPressure, r.pressure_hpa, r.pressure_qc);
        take(kFeatRh, r.rh_pct, r.rh_qc);
        take(kFeatWind, r.wind_ms, r.wind_qc);
        take(kFeatZenith, r.zenith_deg, r.zenith_deg <= -9999.0 ? 1 : 0);
    }

    const long long first = hours.begin()->first;
    const long long last = hours.rbegin()->first;
    const long long span = last - first + 1;

    TimeSeriesTable table;
    std::array<double, kFeatureCount> carry{};
    bool have_carry[kFeatureCount] = {false};
    long long filled = 0;

    for (long long key = first; key <= last; ++key) {
        auto it = hours.find(key);
        std::array<double, kFeatureCount> value{};
        bool present[kFeatureCount] = {false};
        if (it != hours.end()) {
            for (int f = kFeatGhi; f < kFeatureCount; ++f) {
                if (it->second.count[f] > 0) {
                    value[f] = it->second.sum[f] / it->second.count[f];
                    present[f] = true;
                }
            }
        }
        bool any_fill = false;
        bool row_complete = true;
        for (int f = kFeatGhi; f < kFeatureCount; ++f) {
            if (present[f]) {
                carry[f] = value[f];
                have_carry[f] = true;
            } else if (have_carry[f]) {
                value[f] = carry[f]; // previous-valid-hour carry-forward
                any_fill = true;
            } else {
                row_complete = false; // leading hour with no history: drop
            }
        }
        if (any_fill || !row_complete) ++filled;
        if (!row_complete) continue;

        TableRow row;
        civil_from_days(key / 24, row.year, row.month, row.day);
        row.hour = static_cast<int>(key % 24);
        row.f[kFeatHour] = row.hour;
        row.f[kFeatGhi] = std::max(0.0, value[kFeatGhi]);
        row.f[kFeatTemp] = value[kFeatTemp];
        row.f[kFeatPressure] = value[kFeatPressure];
        row.f[kFeatRh] = value[kFeatRh];
        row.f[kFeatWind] = value[kFeatWind] * kWindMsToKnots;
        row.f[kFeatZenith] = value[kFeatZenith];
        table.rows.push_back(row);
    }

    if (filled * 4 > span) {
        throw DataQualityError("optimize: " + std::to_string(filled) + " of " +
                               std::to_string(span) + " hours missing or filled (limit 25%)");
    }
    return table;
}

double Scaler::transform1(double v, int feature) const {
    const double range = maxs[feature] - mins[feature];
    if (range <= 0.0) return 0.0; // constant feature convention
    return (v - mins[feature]) / range;
}

double Scaler::inverse1(double v, int feature) const {
    return mins[feature] + v * (maxs[feature] - mins[feature]);
}

Scaler fit_scaler(const TimeSeriesTable& table, double train_fraction) {
    if (train_fraction <= 0.0 || train_fraction > 1.0) {
        throw UsageError("fit_scaler: train_fraction must be in (0, 1]");
    }
    const int n = static_cast<int>(table.rows.size() * train_fraction);
    if (n < 1) throw UsageError("fit_scaler: empty training slice");
    Scaler s;
    for (int f = 0; f < kFeatureCount; ++f) {
        s.mins[f] = table.rows[0].f[f];
        s.maxs[f] = table.rows[0].f[f];
    }
    for (int i = 1; i < n; ++i) {
        for (int f = 0; f < kFeatureCount; ++f) {
            s.mins[f] = std::min(s.mins[f], table.rows[i].f[f]);
            s.maxs[f] = std::max(s.maxs[f], table.rows[i].f[f]);
        }
    }
    return s;
}

std::pair<TimeSeriesTable, TimeSeriesTable> chrono_split(const TimeSeriesTable& table,
                                                         double train_fraction, int window_len) {
    if (train_fraction <= 0.0 || train_fraction >= 1.0) {
        throw UsageError("chrono_split: train_fraction must be in (0, 1)");
    }
    if (window_len < 1) throw UsageError("chrono_split: window_len must be >= 1");
    const int n = static_cast<int>(table.rows.size());
    const int boundary = static_cast<int>(n * train_fraction); // first test target row
    const int train_rows = boundary - window_len;
    if (train_rows < window_len + 1) {
        throw UsageError("chrono_split: table too short for the requested split (" +
                         std::to_string(n) + " rows, window " + std::to_string(window_len) + ")");
    }
    TimeSeriesTable train{table.region, table.month_label, {}};
    TimeSeriesTable test{table.region, table.month_label, {}};
    train.rows.assign(table.rows.begin(), table.rows.begin() + train_rows);
    test.rows.assign(table.rows.begin() + train_rows, table.rows.end());
    return {std::move(train), std::move(test)};
}

WindowedDataset make_windows(const TimeSeriesTable& table, const Scaler& scaler, int window_len,
                             int horizon, bool cyclic_hour) {
    if (window_len < 1 || horizon < 1) {
        throw UsageError("make_windows: window_len and horizon must be >= 1");
    }
    const int rows = static_cast<int>(table.rows.size());
    const int count = rows - window_len - (horizon - 1);
    if (count < 1) {
        throw UsageError("make_windows: table has " + std::to_string(rows) +
                         " rows, need more than " + std::to_string(window_len + horizon - 1));
    }

    WindowedDataset ds;
    ds.window_len = window_len;
    ds.feature_dim = cyclic_hour ? kFeatureCount + 1 : kFeatureCount;
    ds.ghi_col = cyclic_hour ? kFeatGhi + 1 : kFeatGhi;
    ds.scaler = scaler;
    ds.inputs.reserve(count);
    ds.targets.reserve(count);

    constexpr double kTwoPi = 6.283185307179586476925286766559;
    for (int i = 0; i < count; ++i) {
        Matrix w(window_len, ds.feature_dim);
        for (int t = 0; t < window_len; ++t) {
            const TableRow& row = table.rows[i + t];
            int col = 0;
            if (cyclic_hour) {
                w(t, col++) = std::sin(kTwoPi * row.hour / 24.0);
                w(t, col++) = std::cos(kTwoPi * row.hour / 24.0);
            } else {
                w(t, col++) = scaler.transform1(row.f[kFeatHour], kFeatHour);
            }
            for (int f = kFeatGhi; f < kFeatureCount; ++f) {
                w(t, col++) = scaler.transform1(row.f[f], f);
            }
        }
        const TableRow& target_row = table.rows[i + window_len + horizon - 1];
        ds.inputs.push_back(std::move(w));
        ds.targets.push_back(scaler.transform1(target_row.f[kFeatGhi], kFeatGhi));
        ds.target_hours.push_back(target_row.hour);
    }
    return ds;
}

void write_canonical_csv(const TimeSeriesTable& table, std::ostream& out) {
    out << kCanonicalHeader << '\n';
    char ts[32];
    for (const auto& r : table.rows) {
        std::snprintf(ts, sizeof(ts), "%04d-%02d-%02dT%02d:00:00Z", r.year, r.month, r.day, r.hour);
        std::string line(ts);
        line += ',';
        line += std::to_string(r.hour);
        for (int f = kFeatGhi; f < kFeatureCount; ++f) {
            line += ',';
            append_double(line, r.f[f]);
        }
        out << line << '\n';
    }
}

void write_canonical_csv_file(const TimeSeriesTable& table, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw UsageError("cannot open for writing: " + path);
    write_canonical_csv(table, out);
    if (!out) throw UsageError("write failed: " + path);
}

TimeSeriesTable read_canonical_csv(std::istream& in) {
    std::string line;
    if (!std::getline(in, line)) throw ParseError("canonical csv: empty file");
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line != kCanonicalHeader) {
        throw ParseError("canonical csv: unexpected header '" + line + "'");
    }
    TimeSeriesTable table;
    int line_no = 1;
    long long prev_serial = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        std::vector<std::string_view> fields;
        std::string_view sv(line);
        std::size_t start = 0;
        for (std::size_t i = 0; i <= sv.size(); ++i) {
            if (i == sv.size() || sv[i] == ',') {
                fields.push_back(sv.substr(start, i - start));
                start = i + 1;
            }
        }
        if (fields.size() != 8) {
            throw ParseError("line " + std::to_string(line_no) + ": expected 8 columns, got " +
                             std::to_string(fields.size()));
        }
        TableRow row;
        int ty, tm, td, th;
        if (std::sscanf(std::string(fields[0]).c_str(), "%4d-%2d-%2dT%2d:00:00Z", &ty, &tm, &td,
                        &th) != 4) {
            throw ParseError("line " + std::to_string(line_no) + ": bad timestamp '" +
                             std::string(fields[0]) + "'");
        }
        row.year = ty;
        row.month = tm;
        row.day = td;
        row.hour = th;
        const int hour_col = parse_int(fields[1], line_no, "hour");
        if (hour_col != th) {
            throw ParseError("line " + std::to_string(line_no) +
                             ": hour column disagrees with timestamp");
        }
        row.f[kFeatHour] = hour_col;
        for (int f = kFeatGhi; f < kFeatureCount; ++f) {
            row.f[f] = parse_double(fields[1 + f], line_no, kFeatureNames[f]);
        }
        const long long serial = serial_hour(ty, tm, td, th);
        if (!table.rows.empty() && serial != prev_serial + 1) {
            throw ParseError("line " + std::to_string(line_no) +
                             ": timestamps must advance by exactly one hour");
        }
        prev_serial = serial;
        table.rows.push_back(row);
    }
    return table;
}

TimeSeriesTable read_canonical_csv_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw UsageError("cannot open dataset: " + path);
    return read_canonical_csv(in);
}

} // namespace sgru
