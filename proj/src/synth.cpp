#include "snodri/synth.hpp"

#include "snodri/errors.hpp"
#include "snodri/rng.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

namespace snodri {

/*
 * Generating equations. m is the calendar month (1..12), w(m) the
 * winter-peaked weight, sev the planted severity (0 outside drought
 * windows), ns the configured noise scale, and eta a per-variable AR(1)
 * stream with unit marginal variance:
 *
 *   w(m)  = (1 + cos(2 pi (m-1)/12)) / 2          (1 in January, 0 in July)
 *   eta_t = 0.3 eta_{t-1} + sqrt(1 - 0.09) eps_t,  eps ~ N(0,1)
 *
 *   TMP   = 278.5 - 7 cos(2 pi (m-1)/12) + 1.2 sev + 1.0 ns eta
 *   APCP  = (58 + 34 w) (1 - 0.62 sev) exp(0.3 ns eta - 0.045 ns^2)
 *   DSWRF = max(0, 205 - 95 cos(2 pi (m-1)/12) + 6 sev + 18 ns eta)
 *   SPFH  = clamp(0.0052 + 0.003 (1 - w) - 0.0006 sev + 0.0005 ns eta,
 *                 1e-5, 0.03)
 *   PRES  = 87000 + 350 cos(2 pi (m-1)/12) + 120 ns eta
 *   UGRD  = 1.6 + 0.9 cos(2 pi (m-1)/12) + 0.6 ns eta
 *   VGRD  = 0.5 + 0.6 sin(2 pi (m-1)/12) + 0.6 ns eta
 *
 * Snowpack and discharge are recurrences on the variables above (the
 * generator's own phase partition, deliberately not the analysis sigmoid):
 *
 *   frac  = 1 / (1 + exp(1.3 (TMP - 273.8)))
 *   meltf = clamp(0.22 (TMP - 270.5), 0, 1)
 *   SWE_t = (SWE_{t-1} + frac APCP) (1 - meltf)
 *   melt  = (SWE_{t-1} + frac APCP) meltf
 *   rain  = (1 - frac) APCP
 *   Q_t   = 0.55 Q_{t-1} + 0.32 melt + 0.14 rain + 1.5 + 0.8 ns |eta_q|
 */

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

/// Stationary AR(1) stream with unit marginal variance.
class ArNoise {
public:
    ArNoise(std::uint64_t seed, std::string_view stream)
        : rng_(seeds::derive_stage(seed, stream)) {}

    double next() {
        if (first_) {
            first_ = false;
            state_ = rng_.normal();
        } else {
            state_ = kPhi * state_ + kInnov * rng_.normal();
        }
        return state_;
    }

private:
    static constexpr double kPhi = 0.3;
    static inline const double kInnov = std::sqrt(1.0 - kPhi * kPhi);
    Rng rng_;
    double state_ = 0.0;
    bool first_ = true;
};

}  // namespace

SynthResult generate_synthetic_basin(const SynthConfig& cfg) {
    if (cfg.n_years < 5) throw ConfigError("synthetic basin needs at least 5 years");
    if (!(cfg.noise_std >= 0.0)) throw ConfigError("noise_std must be >= 0");
    int last_year = cfg.start_year + cfg.n_years - 1;
    for (const DroughtWinter& d : cfg.drought_winters) {
        if (!(d.severity > 0.0 && d.severity <= 1.0))
            throw ConfigError("drought severity must be in (0, 1], got " +
                              std::to_string(d.severity));
        if (d.year < cfg.start_year || d.year > last_year)
            throw ConfigError("drought winter " + std::to_string(d.year) +
                              " outside the generated years " + std::to_string(cfg.start_year) +
                              ".." + std::to_string(last_year));
    }

    std::size_t n = static_cast<std::size_t>(cfg.n_years) * 12;
    MonthStamp start{cfg.start_year, 1};

    std::vector<double> severity(n, 0.0);
    for (const DroughtWinter& d : cfg.drought_winters)
        for (int m = 1; m <= 4; ++m)
            severity[static_cast<std::size_t>(MonthStamp{d.year, m}.index() - start.index())] =
                d.severity;

    ArNoise eta_tmp(cfg.seed, "TMP"), eta_apcp(cfg.seed, "APCP"), eta_dswrf(cfg.seed, "DSWRF"),
        eta_spfh(cfg.seed, "SPFH"), eta_pres(cfg.seed, "PRES"), eta_ugrd(cfg.seed, "UGRD"),
        eta_vgrd(cfg.seed, "VGRD"), eta_q(cfg.seed, "Q");

    std::vector<double> tmp(n), apcp(n), dswrf(n), spfh(n), pres(n), ugrd(n), vgrd(n), swe(n),
        q(n);
    double ns = cfg.noise_std;
    double swe_prev = 0.0;
    double q_prev = 0.0;
    for (std::size_t t = 0; t < n; ++t) {
        int m = start.plus_months(static_cast<long long>(t)).month;
        double phase = kTwoPi * (m - 1) / 12.0;
        double w = 0.5 * (1.0 + std::cos(phase));
        double sev = severity[t];

        tmp[t] = 278.5 - 7.0 * std::cos(phase) + 1.2 * sev + ns * eta_tmp.next();
        apcp[t] = (58.0 + 34.0 * w) * (1.0 - 0.62 * sev) *
                  std::exp(0.3 * ns * eta_apcp.next() - 0.045 * ns * ns);
        dswrf[t] =
            std::max(0.0, 205.0 - 95.0 * std::cos(phase) + 6.0 * sev + 18.0 * ns * eta_dswrf.next());
        spfh[t] = std::clamp(
            0.0052 + 0.003 * (1.0 - w) - 0.0006 * sev + 0.0005 * ns * eta_spfh.next(), 1e-5, 0.03);
        pres[t] = 87000.0 + 350.0 * std::cos(phase) + 120.0 * ns * eta_pres.next();
        ugrd[t] = 1.6 + 0.9 * std::cos(phase) + 0.6 * ns * eta_ugrd.next();
        vgrd[t] = 0.5 + 0.6 * std::sin(phase) + 0.6 * ns * eta_vgrd.next();

        double frac = 1.0 / (1.0 + std::exp(1.3 * (tmp[t] - 273.8)));
        double meltf = std::clamp(0.22 * (tmp[t] - 270.5), 0.0, 1.0);
        double before_melt = swe_prev + frac * apcp[t];
        double melt = meltf * before_melt;
        swe[t] = before_melt - melt;
        double rain = (1.0 - frac) * apcp[t];
        q[t] = 0.55 * q_prev + 0.32 * melt + 0.14 * rain + 1.5 + 0.8 * ns * std::abs(eta_q.next());

        swe_prev = swe[t];
        q_prev = q[t];
    }

    auto make_series = [&](const char* id, std::vector<double>&& values) {
        MonthlySeries s;
        s.variable_id = id;
        s.unit = default_unit(id);
        s.start = start;
        s.values = std::move(values);
        return s;
    };

    SynthResult out;
    out.table.set_basin_id(cfg.basin_id);
    out.table.add(make_series("APCP", std::move(apcp)));
    out.table.add(make_series("TMP", std::move(tmp)));
    out.table.add(make_series("DSWRF", std::move(dswrf)));
    out.table.add(make_series("SPFH", std::move(spfh)));
    out.table.add(make_series("PRES", std::move(pres)));
    out.table.add(make_series("UGRD", std::move(ugrd)));
    out.table.add(make_series("VGRD", std::move(vgrd)));
    out.table.add(make_series("SWE", std::move(swe)));
    out.table.add(make_series("Q", std::move(q)));
    out.mask = make_series("DROUGHT", std::move(severity));
    out.mask.unit = "1";
    return out;
}

}  // namespace snodri
