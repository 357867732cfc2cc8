#include "sgru/synth.hpp"

#include <algorithm>
#include <cmath>

#include "sgru/errors.hpp"
#include "sgru/random.hpp"

namespace sgru {

namespace {

constexpr double kPi = 3.14159265358979323846264338328;

double daylight(double hour, double dawn_shift = 6.0) {
    return std::max(0.0, std::sin(kPi * (hour - dawn_shift) / 12.0));
}

} // namespace

TimeSeriesTable synth_dataset(const SynthConfig& cfg) {
    if (cfg.days < 2) throw UsageError("synth_dataset: days must be >= 2");
    if (cfg.amplitude <= 0.0) throw UsageError("synth_dataset: amplitude must be positive");

    RandomSource rng(cfg.seed);
    const double rho_slow = std::exp(-1.0 / std::max(1.0, cfg.cloud_tau_hours));
    const double rho_fast = std::exp(-1.0 / std::max(1.0, cfg.cloud_tau_fast));
    const double rho_press = std::exp(-1.0 / 48.0);
    double cloud_slow = 0.0; // stationary N(0,1) AR(1) components
    double cloud_fast = 0.0;
    double press_state = 0.0;

    const long long start = serial_hour(cfg.start_year, cfg.start_month, cfg.start_day, 0);
    TimeSeriesTable table;
    table.rows.reserve(static_cast<std::size_t>(cfg.days) * 24);

    for (int d = 0; d < cfg.days; ++d) {
        for (int h = 0; h < 24; ++h) {
            // Fixed draw order per hour keeps the stream stable across configs.
            const double xi_slow = rng.gaussian();
            const double xi_fast = rng.gaussian();
            const double g_ghi = rng.gaussian();
            const double g_temp = rng.gaussian();
            const double xi_press = rng.gaussian();
            const double g_rh = rng.gaussian();
            const double g_wind = rng.gaussian();

            cloud_slow = rho_slow * cloud_slow + std::sqrt(1.0 - rho_slow * rho_slow) * xi_slow;
            cloud_fast = rho_fast * cloud_fast + std::sqrt(1.0 - rho_fast * rho_fast) * xi_fast;
            press_state = rho_press * press_state +
                          std::sqrt(1.0 - rho_press * rho_press) * xi_press;
            // Cloudiness in [0, 1]; heavier regimes remove more irradiance.
            const double cloudiness =
                std::clamp(0.5 + 0.30 * cloud_slow + 0.20 * cloud_fast, 0.0, 1.0);
            const double attenuation = 1.0 - cfg.cloud_strength * cloudiness;

            TableRow row;
            long long serial = start + static_cast<long long>(d) * 24 + h;
            civil_from_serial_hour(serial, row.year, row.month, row.day, row.hour);

            const int doy = static_cast<int>(
                serial / 24 - serial_hour(row.year, 1, 1, 0) / 24 + 1);
            const double season = std::sin(2.0 * kPi * doy / 365.0);
            const double amp_day = cfg.amplitude + cfg.drift_amp * season;
            const double sun = daylight(h);

            const double ghi =
                std::max(0.0, amp_day * sun * attenuation + cfg.noise_sd * g_ghi);
            const double temp = 16.0 + 6.0 * season + 8.0 * daylight(h, 8.0) -
                                5.0 * cfg.cloud_strength * cloudiness + 0.6 * g_temp;
            const double pressure = 1013.0 + 3.0 * press_state;
            const double rh = std::clamp(
                70.0 - 25.0 * daylight(h, 8.0) + 15.0 * cloudiness + 2.0 * g_rh, 5.0, 100.0);
            const double wind = std::max(0.0, 8.0 + 4.0 * daylight(h, 9.0) + 1.2 * g_wind);
            const double zenith =
                std::clamp(90.0 - (55.0 + 12.0 * season) *
                                      std::sin(kPi * (h - 6.0) / 12.0), 2.0, 178.0);

            row.f[kFeatHour] = h;
            row.f[kFeatGhi] = ghi;
            row.f[kFeatTemp] = temp;
            row.f[kFeatPressure] = pressure;
            row.f[kFeatRh] = rh;
            row.f[kFeatWind] = wind;
            row.f[kFeatZenith] = zenith;
            table.rows.push_back(row);
        }
    }
    return table;
}

} // namespace sgru
