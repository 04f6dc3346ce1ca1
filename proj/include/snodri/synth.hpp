#pragma once

#include "snodri/timeseries.hpp"

#include <cstdint>
#include <vector>

namespace snodri {

struct DroughtWinter {
    int year = 0;         // calendar year whose Jan..Apr window is depressed
    double severity = 1;  // in (0, 1]
};

struct SynthConfig {
    int n_years = 30;
    std::uint64_t seed = 0;
    std::vector<DroughtWinter> drought_winters;
    double noise_std = 1.0;
    int start_year = 1981;
    std::string basin_id = "synth-basin";
};

struct SynthResult {
    BasinTable table;   // APCP TMP DSWRF SPFH PRES UGRD VGRD SWE Q, monthly
    MonthlySeries mask; // planted severity per month, 0 outside drought windows
};

/**
 * Deterministic synthetic basin: seasonal sinusoid plus AR(1) noise per
 * meteorological variable, a snowpack recurrence (snow-fraction-weighted
 * accumulation, temperature-driven melt) for SWE, and a lagged
 * melt-plus-rain discharge. In each drought winter (January through April
 * of the flagged year) precipitation is depressed and temperature
 * elevated in proportion to severity. The generating equations live next
 * to the implementation and double as the ground truth for tests.
 */
SynthResult generate_synthetic_basin(const SynthConfig& cfg);

}  // namespace snodri
