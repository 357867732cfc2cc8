#pragma once

#include <cstdint>

#include "sgru/data.hpp"

namespace sgru {

// Synthetic hourly dataset in canonical-table form: clear-sky half-sine GHI
// with seasonal amplitude drift, a two-timescale cloud regime and Gaussian
// noise, plus correlated weather channels. Deterministic per seed.
//
// The cloud regime mixes a fast component (tau_fast) with a slow one
// (tau_slow); pinning the slow component down takes several days of
// observation, so history beyond a single day carries real signal.
struct SynthConfig {
    int days = 155;
    double amplitude = 800.0;       // clear-sky midday peak, W/m^2
    double drift_amp = 120.0;       // seasonal amplitude modulation, W/m^2
    double noise_sd = 30.0;         // additive Gaussian noise on GHI, W/m^2
    double cloud_strength = 0.4;    // fraction of GHI a heavy regime removes
    double cloud_tau_fast = 6.0;    // correlation time of the fast component
    double cloud_tau_hours = 120.0; // correlation time of the slow component
    int start_year = 2021;
    int start_month = 1;
    int start_day = 1;
    std::uint64_t seed = 0;
};

// days * 24 rows starting at the configured date, hour 0.
TimeSeriesTable synth_dataset(const SynthConfig& cfg);

} // namespace sgru
