#include "pricemfg/supply.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace pricemfg {

namespace {

// 5-point Gauss-Legendre on [-1, 1]; exact up to degree 9.
constexpr double kGaussX[5] = {-0.9061798459386640, -0.5384693101056831, 0.0,
                               0.5384693101056831, 0.9061798459386640};
constexpr double kGaussW[5] = {0.2369268850561891, 0.4786286704993665, 0.5688888888888889,
                               0.4786286704993665, 0.2369268850561891};

}  // namespace

SupplySchedule::SupplySchedule(std::vector<double> times, std::vector<double> values, Interp interp)
    : times_(std::move(times)), values_(std::move(values)), interp_(interp) {
    if (times_.size() != values_.size())
        throw std::invalid_argument("SupplySchedule: times/values size mismatch");
    if (times_.size() < 2) throw std::invalid_argument("SupplySchedule: need at least 2 samples");
    for (size_t j = 0; j < times_.size(); ++j) {
        if (!std::isfinite(times_[j]) || !std::isfinite(values_[j]))
            throw std::invalid_argument("SupplySchedule: non-finite sample");
        if (j > 0 && !(times_[j] > times_[j - 1]))
            throw std::invalid_argument("SupplySchedule: times must be strictly increasing");
    }
    build();
}

SupplySchedule SupplySchedule::from_function(const std::function<double(double)>& Q, double T,
                                             int n_samples, Interp interp) {
    if (n_samples < 2) throw std::invalid_argument("SupplySchedule: n_samples must be >= 2");
    std::vector<double> ts(n_samples), vs(n_samples);
    for (int j = 0; j < n_samples; ++j) {
        ts[j] = T * j / (n_samples - 1);
        vs[j] = Q(ts[j]);
    }
    return SupplySchedule(std::move(ts), std::move(vs), interp);
}

SupplySchedule SupplySchedule::constant(double value, double T) {
    return SupplySchedule({0.0, T}, {value, value}, Interp::Linear);
}

void SupplySchedule::build() {
    const size_t n = times_.size();
    slopes_.assign(n, 0.0);
    if (interp_ == Interp::Cubic) {
        // Fritsch-Carlson derivatives: never overshoot the data.
        std::vector<double> h(n - 1), s(n - 1);
        for (size_t j = 0; j + 1 < n; ++j) {
            h[j] = times_[j + 1] - times_[j];
            s[j] = (values_[j + 1] - values_[j]) / h[j];
        }
        if (n == 2) {
            slopes_[0] = slopes_[1] = s[0];
        } else {
            for (size_t j = 1; j + 1 < n; ++j) {
                if (s[j - 1] * s[j] <= 0.0) {
                    slopes_[j] = 0.0;
                } else {
                    const double w1 = 2.0 * h[j] + h[j - 1];
                    const double w2 = h[j] + 2.0 * h[j - 1];
                    slopes_[j] = (w1 + w2) / (w1 / s[j - 1] + w2 / s[j]);
                }
            }
            auto end_slope = [](double h0, double h1, double s0, double s1) {
                double d = ((2.0 * h0 + h1) * s0 - h0 * s1) / (h0 + h1);
                if (d * s0 <= 0.0) d = 0.0;
                else if (s0 * s1 <= 0.0 && std::abs(d) > 3.0 * std::abs(s0)) d = 3.0 * s0;
                return d;
            };
            slopes_[0] = end_slope(h[0], h[1], s[0], s[1]);
            slopes_[n - 1] = end_slope(h[n - 2], h[n - 3], s[n - 2], s[n - 3]);
        }
    }
    // Exact cumulative integral of the interpolant at the sample nodes.
    cum_int_.assign(n, 0.0);
    for (size_t j = 0; j + 1 < n; ++j) {
        const double h = times_[j + 1] - times_[j];
        double seg = 0.5 * h * (values_[j] + values_[j + 1]);
        if (interp_ == Interp::Cubic) seg += h * h * (slopes_[j] - slopes_[j + 1]) / 12.0;
        cum_int_[j + 1] = cum_int_[j] + seg;
    }
}

int SupplySchedule::interval(double t) const {
    const auto it = std::upper_bound(times_.begin(), times_.end(), t);
    int j = (int)(it - times_.begin()) - 1;
    return std::clamp(j, 0, (int)times_.size() - 2);
}

double SupplySchedule::value(double t) const {
    t = std::clamp(t, times_.front(), times_.back());
    const int j = interval(t);
    const double h = times_[j + 1] - times_[j];
    const double u = (t - times_[j]) / h;
    if (interp_ == Interp::Linear) return (1.0 - u) * values_[j] + u * values_[j + 1];
    const double u2 = u * u, u3 = u2 * u;
    return (2 * u3 - 3 * u2 + 1) * values_[j] + (u3 - 2 * u2 + u) * h * slopes_[j] +
           (-2 * u3 + 3 * u2) * values_[j + 1] + (u3 - u2) * h * slopes_[j + 1];
}

double SupplySchedule::derivative(double t) const {
    t = std::clamp(t, times_.front(), times_.back());
    const int j = interval(t);
    const double h = times_[j + 1] - times_[j];
    if (interp_ == Interp::Linear) return (values_[j + 1] - values_[j]) / h;
    const double u = (t - times_[j]) / h;
    const double u2 = u * u;
    return ((6 * u2 - 6 * u) * values_[j] + (3 * u2 - 4 * u + 1) * h * slopes_[j] +
            (-6 * u2 + 6 * u) * values_[j + 1] + (3 * u2 - 2 * u) * h * slopes_[j + 1]) /
           h;
}

double SupplySchedule::integral_from_start(double t) const {
    t = std::clamp(t, times_.front(), times_.back());
    const int j = interval(t);
    const double h = times_[j + 1] - times_[j];
    const double u = (t - times_[j]) / h;
    double part;
    if (interp_ == Interp::Linear) {
        part = h * (u * values_[j] + 0.5 * u * u * (values_[j + 1] - values_[j]));
    } else {
        const double u2 = u * u, u3 = u2 * u, u4 = u2 * u2;
        part = h * ((0.5 * u4 - u3 + u) * values_[j] + (0.25 * u4 - 2.0 * u3 / 3.0 + 0.5 * u2) * h * slopes_[j] +
                    (-0.5 * u4 + u3) * values_[j + 1] + (0.25 * u4 - u3 / 3.0) * h * slopes_[j + 1]);
    }
    return cum_int_[j] + part;
}

double SupplySchedule::K(double t) const {
    return cum_int_.back() - integral_from_start(t);
}

double SupplySchedule::integral_of_square(double a, double b) const {
    if (b < a) return -integral_of_square(b, a);
    double acc = 0.0;
    const int ja = interval(a), jb = interval(b);
    for (int j = ja; j <= jb; ++j) {
        const double lo = std::max(a, times_[j]);
        const double hi = std::min(b, times_[j + 1]);
        if (hi <= lo) continue;
        const double mid = 0.5 * (lo + hi), half = 0.5 * (hi - lo);
        for (int g = 0; g < 5; ++g) {
            const double q = value(mid + half * kGaussX[g]);
            acc += kGaussW[g] * half * q * q;
        }
    }
    return acc;
}

double SupplySchedule::time_mean() const {
    return cum_int_.back() / (times_.back() - times_.front());
}

SupplySchedule SupplySchedule::with_zero_mean() const {
    const double mean = time_mean();
    std::vector<double> shifted(values_);
    for (double& v : shifted) v -= mean;
    return SupplySchedule(times_, std::move(shifted), interp_);
}

}  // namespace pricemfg
