#pragma once

#include <array>
#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

#include "sgru/matrix.hpp"

namespace sgru {

// One row of a SURFRAD daily file, keeping the fields the pipeline uses.
// Sentinel readings (-9999.9) are preserved as stored but reported missing.
struct SurfradRecord {
    int year = 0;
    int jday = 0; // day of year
    int month = 0;
    int day = 0;
    int hour = 0;   // 0..23
    int minute = 0; // 0..59
    double zenith_deg = 0.0;
    double ghi = 0.0, dni = 0.0, dhi = 0.0;
    int ghi_qc = 0, dni_qc = 0, dhi_qc = 0;
    double temp_c = 0.0;
    int temp_qc = 0;
    double rh_pct = 0.0;
    int rh_qc = 0;
    double wind_ms = 0.0;
    int wind_qc = 0;
    double pressure_hpa = 0.0;
    int pressure_qc = 0;

    bool operator==(const SurfradRecord&) const = default;
};

inline constexpr double kSurfradSentinel = -9999.9;

// Missing when flagged bad or at the sentinel value.
bool field_missing(double value, int qc);

// Parses a SURFRAD daily data file: station-name line, lat/lon/elevation
// line, then whitespace-separated rows of 48 fields (8 date-time fields
// followed by value/QC pairs). No row is silently dropped: every data row
// yields a record or a ParseError naming the line.
std::vector<SurfradRecord> parse_surfrad(std::istream& in);
std::vector<SurfradRecord> parse_surfrad_file(const std::string& path);

// Serializes a record back to the 48-field row layout (columns the record
// does not keep are written as sentinels). Reparsing gives identical records.
std::string format_surfrad_row(const SurfradRecord& rec);
// Full file: two header lines plus one row per record.
void write_surfrad(const std::vector<SurfradRecord>& recs, const std::string& station,
                   std::ostream& out);

// Feature order of every table row and window column.
enum Feature : int {
    kFeatHour = 0,
    kFeatGhi = 1,
    kFeatTemp = 2,
    kFeatPressure = 3,
    kFeatRh = 4,
    kFeatWind = 5,
    kFeatZenith = 6,
};
inline constexpr int kFeatureCount = 7;
extern const std::array<const char*, kFeatureCount> kFeatureNames;

struct TableRow {
    int year = 0, month = 0, day = 0, hour = 0;
    std::array<double, kFeatureCount> f{};

    bool operator==(const TableRow&) const = default;
};

// Hourly feature rows for one (region, month) series. Timestamps are
// strictly increasing at hourly cadence with no gaps.
struct TimeSeriesTable {
    std::string region;
    std::string month_label;
    std::vector<TableRow> rows;
};

// Serial hour index used for cadence checks (days since civil epoch * 24 + hour).
long long serial_hour(int year, int month, int day, int hour);
void civil_from_serial_hour(long long serial, int& year, int& month, int& day, int& hour);

// Hourly aggregation of raw records: mean of valid sub-hourly samples per
// hour and field, DNI/DHI dropped, negative GHI clipped to 0, wind converted
// m/s -> knots, gaps and invalid fields carried forward from the previous
// valid hour (leading rows without a complete set of features are dropped).
// Throws DataQualityError when more than 25% of the spanned hours needed
// filling.
TimeSeriesTable optimize(const std::vector<SurfradRecord>& records);

// Min-max feature scaler fitted on training rows only.
struct Scaler {
    std::array<double, kFeatureCount> mins{};
    std::array<double, kFeatureCount> maxs{};

    double transform1(double v, int feature) const;
    double inverse1(double v, int feature) const;
    double ghi_range() const { return maxs[kFeatGhi] - mins[kFeatGhi]; }

    bool operator==(const Scaler&) const = default;
};

// Fits on the first floor(train_fraction * rows) rows of the table.
Scaler fit_scaler(const TimeSeriesTable& table, double train_fraction = 1.0);

// Chronological split. The first test target sits at row floor(train_fraction
// * rows); the window_len rows before it become test context, so no training
// window touches any test row:
//   train = rows[0 : floor(f*N) - window_len)
//   test  = rows[floor(f*N) - window_len : N)
std::pair<TimeSeriesTable, TimeSeriesTable> chrono_split(const TimeSeriesTable& table,
                                                         double train_fraction = 0.8,
                                                         int window_len = 24);

// Supervised sliding-window pairs: window of normalized feature rows ->
// next-step normalized GHI.
struct WindowedDataset {
    int window_len = 0;
    int feature_dim = 0;
    int ghi_col = kFeatGhi;         // GHI column inside a window matrix
    std::vector<Matrix> inputs;     // each (window_len, feature_dim)
    std::vector<double> targets;    // normalized GHI at window end + horizon
    std::vector<int> target_hours;  // hour-of-day of each target, for plots
    Scaler scaler;

    int size() const { return static_cast<int>(inputs.size()); }
};

// N = rows - window_len - (horizon - 1) windows; target i is row
// i + window_len + horizon - 1's GHI. With cyclic_hour the hour feature is
// replaced by a sin/cos pair (feature_dim becomes 8).
WindowedDataset make_windows(const TimeSeriesTable& table, const Scaler& scaler, int window_len,
                             int horizon = 1, bool cyclic_hour = false);

// Canonical CSV: timestamp,hour,ghi,temp_c,pressure_hpa,rh_pct,wind_knots,zenith_deg
void write_canonical_csv(const TimeSeriesTable& table, std::ostream& out);
void write_canonical_csv_file(const TimeSeriesTable& table, const std::string& path);
TimeSeriesTable read_canonical_csv(std::istream& in);
TimeSeriesTable read_canonical_csv_file(const std::string& path);

} // namespace sgru
