#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "pricemfg/supply.hpp"

namespace pricemfg {

// Per-agent supply series derived from demand data: Q = -demand / N with the
// time-weighted mean removed, so int Q dt = 0.
struct DemandSeries {
    std::vector<double> times;   // hours
    std::vector<double> values;  // kW per agent, mean zero

    SupplySchedule schedule(SupplySchedule::Interp interp = SupplySchedule::Interp::Cubic) const {
        return SupplySchedule(times, values, interp);
    }
};

struct CalibrationResult {
    double c_hat = 0.0;       // [$ kW^-2 h^-1], projected to >= 0
    double theta_hat = 0.0;   // [$ kW^-1 h^-1]
    double rms_error = 0.0;
    std::vector<double> residuals;
    bool c_projected = false;  // OLS slope was negative and got clamped
};

// Parse a two-column CSV "time_hours,value" (comma or semicolon, header row
// required) into a demand series scaled by the agent count.
DemandSeries ingest_demand(std::istream& in, double agent_count);
DemandSeries ingest_demand_file(const std::string& path, double agent_count);
DemandSeries ingest_demand_samples(std::vector<double> times, std::vector<double> demand,
                                   double agent_count);

// Ordinary least squares for the affine law w = Theta - c Q:
//   c_hat = -cov(Q, theta) / var(Q),  theta_hat = mean(theta) + c_hat mean(Q).
// Series on different nodes are aligned by interpolating the shorter one
// onto the longer grid.
CalibrationResult calibrate(const std::vector<double>& times_q, const std::vector<double>& q,
                            const std::vector<double>& times_ref, const std::vector<double>& ref);

struct PriceForecast {
    std::vector<double> times;
    std::vector<double> price;      // theta_hat - c_hat Q
    double peak_to_peak = 0.0;
};

PriceForecast price_forecast(const CalibrationResult& fit, const std::vector<double>& times,
                             const std::vector<double>& q);

}  // namespace pricemfg
