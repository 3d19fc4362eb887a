#pragma once

#include <functional>
#include <string>
#include <vector>

#include "pricemfg/grid.hpp"

namespace pricemfg {

// Production curve Q(t) [kW per agent] built from (time, value) samples.
//
// Interpolation is either piecewise linear or a monotonicity-preserving cubic
// (Fritsch-Carlson). The cubic keeps dQ/dt defined everywhere, which the
// price ODE needs. K(t) = int_t^T Q(s) ds is the exact antiderivative of the
// interpolant, so K(T) = 0 holds structurally.
class SupplySchedule {
public:
    enum class Interp { Linear, Cubic };

    SupplySchedule(std::vector<double> times, std::vector<double> values,
                   Interp interp = Interp::Cubic);

    static SupplySchedule from_function(const std::function<double(double)>& Q, double T,
                                        int n_samples, Interp interp = Interp::Cubic);
    static SupplySchedule constant(double value, double T);

    double value(double t) const;
    double derivative(double t) const;

    // K(t) = int_t^T Q(s) ds of the interpolant.
    double K(double t) const;
    // int_0^t Q(s) ds.
    double integral_from_start(double t) const;
    // int_a^b Q(s)^2 ds (exact for the interpolant; 5-point Gauss per interval).
    double integral_of_square(double a, double b) const;

    double t_begin() const { return times_.front(); }
    double t_end() const { return times_.back(); }
    bool covers(double T) const { return times_.front() <= 1e-12 && times_.back() >= T - 1e-12; }

    // Same schedule shifted so that int Q dt = 0 over its span.
    SupplySchedule with_zero_mean() const;
    double time_mean() const;

    const std::vector<double>& sample_times() const { return times_; }
    const std::vector<double>& sample_values() const { return values_; }
    Interp interpolation() const { return interp_; }

    std::function<double(double)> as_function() const {
        return [*this](double t) { return value(t); };
    }

private:
    std::vector<double> times_;
    std::vector<double> values_;
    std::vector<double> slopes_;   // Hermite node derivatives (cubic) or unused
    std::vector<double> cum_int_;  // int_0^{t_j} Q
    Interp interp_;

    int interval(double t) const;
    void build();
};

}  // namespace pricemfg
