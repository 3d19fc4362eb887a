#include "pricemfg/calibration.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

#include "pricemfg/errors.hpp"

namespace pricemfg {

namespace {

double trapezoid_mean(const std::vector<double>& t, const std::vector<double>& v) {
    double acc = 0.0;
    for (size_t j = 0; j + 1 < t.size(); ++j)
        acc += 0.5 * (v[j] + v[j + 1]) * (t[j + 1] - t[j]);
    return acc / (t.back() - t.front());
}

std::vector<double> interp_onto(const std::vector<double>& ts, const std::vector<double>& vs,
                                const std::vector<double>& target) {
    std::vector<double> out(target.size());
    for (size_t j = 0; j < target.size(); ++j) {
        double t = std::clamp(target[j], ts.front(), ts.back());
        auto it = std::upper_bound(ts.begin(), ts.end(), t);
        int i = std::clamp((int)(it - ts.begin()) - 1, 0, (int)ts.size() - 2);
        const double a = (t - ts[i]) / (ts[i + 1] - ts[i]);
        out[j] = (1.0 - a) * vs[i] + a * vs[i + 1];
    }
    return out;
}

}  // namespace

DemandSeries ingest_demand_samples(std::vector<double> times, std::vector<double> demand,
                                   double agent_count) {
    if (times.size() != demand.size())
        throw ConfigError("ingest_demand: times/values size mismatch");
    if (times.size() < 2) throw ConfigError("ingest_demand: need at least 2 samples");
    if (!(agent_count >= 1.0)) throw ConfigError("ingest_demand: agent count must be >= 1");
    for (size_t j = 0; j < times.size(); ++j) {
        if (!std::isfinite(times[j]) || !std::isfinite(demand[j]))
            throw ConfigError("ingest_demand: NaN or Inf in sample " + std::to_string(j));
        if (j > 0 && !(times[j] > times[j - 1]))
            throw ConfigError("ingest_demand: timestamps must be strictly increasing");
    }
    DemandSeries s;
    s.times = std::move(times);
    s.values.resize(demand.size());
    for (size_t j = 0; j < demand.size(); ++j) s.values[j] = -demand[j] / agent_count;
    const double mean = trapezoid_mean(s.times, s.values);
    for (double& v : s.values) v -= mean;
    return s;
}

DemandSeries ingest_demand(std::istream& in, double agent_count) {
    std::string line;
    if (!std::getline(in, line)) throw ConfigError("ingest_demand: empty file");
    const char sep = line.find(';') != std::string::npos ? ';' : ',';

    std::vector<double> times, demand;
    size_t lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        std::stringstream ss(line);
        std::string a, b;
        if (!std::getline(ss, a, sep) || !std::getline(ss, b, sep))
            throw ConfigError("ingest_demand: bad row at line " + std::to_string(lineno));
        try {
            times.push_back(std::stod(a));
            demand.push_back(std::stod(b));
        } catch (const std::exception&) {
            throw ConfigError("ingest_demand: unparsable number at line " + std::to_string(lineno));
        }
    }
    if (times.empty()) throw ConfigError("ingest_demand: no data rows");
    return ingest_demand_samples(std::move(times), std::move(demand), agent_count);
}

DemandSeries ingest_demand_file(const std::string& path, double agent_count) {
    std::ifstream f(path);
    if (!f) throw ConfigError("ingest_demand: cannot open " + path);
    return ingest_demand(f, agent_count);
}

CalibrationResult calibrate(const std::vector<double>& times_q, const std::vector<double>& q,
                            const std::vector<double>& times_ref, const std::vector<double>& ref) {
    if (times_q.size() != q.size() || times_ref.size() != ref.size())
        throw ConfigError("calibrate: series size mismatch");
    if (q.size() < 2 || ref.size() < 2) throw ConfigError("calibrate: need at least 2 samples");

    // Align on the longer grid (unweighted OLS on its native nodes).
    std::vector<double> qq, rr;
    if (q.size() >= ref.size()) {
        qq = q;
        rr = interp_onto(times_ref, ref, times_q);
    } else {
        qq = interp_onto(times_q, q, times_ref);
        rr = ref;
    }

    const size_t n = qq.size();
    double mq = 0.0, mr = 0.0;
    for (size_t j = 0; j < n; ++j) {
        mq += qq[j];
        mr += rr[j];
    }
    mq /= n;
    mr /= n;
    double cov = 0.0, var = 0.0;
    for (size_t j = 0; j < n; ++j) {
        cov += (qq[j] - mq) * (rr[j] - mr);
        var += (qq[j] - mq) * (qq[j] - mq);
    }
    if (var == 0.0) throw ConfigError("calibrate: var(Q) = 0, c is unidentifiable");

    CalibrationResult out;
    out.c_hat = -cov / var;
    if (out.c_hat < 0.0) {
        out.c_hat = 0.0;
        out.c_projected = true;
    }
    out.theta_hat = mr + out.c_hat * mq;
    out.residuals.resize(n);
    double se = 0.0;
    for (size_t j = 0; j < n; ++j) {
        out.residuals[j] = rr[j] - (out.theta_hat - out.c_hat * qq[j]);
        se += out.residuals[j] * out.residuals[j];
    }
    out.rms_error = std::sqrt(se / n);
    return out;
}

PriceForecast price_forecast(const CalibrationResult& fit, const std::vector<double>& times,
                             const std::vector<double>& q) {
    PriceForecast out;
    out.times = times;
    out.price.resize(q.size());
    double lo = std::numeric_limits<double>::infinity(), hi = -lo;
    for (size_t j = 0; j < q.size(); ++j) {
        out.price[j] = fit.theta_hat - fit.c_hat * q[j];
        lo = std::min(lo, out.price[j]);
        hi = std::max(hi, out.price[j]);
    }
    out.peak_to_peak = hi - lo;
    return out;
}

}  // namespace pricemfg
