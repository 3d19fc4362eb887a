#include "pricemfg/volterra.hpp"

#include <cmath>
#include <stdexcept>

namespace pricemfg {

std::vector<double> volterra_solve_trapezoid(const std::function<double(double)>& kernel,
                                             const std::vector<double>& f, double dt) {
    const int n = (int)f.size();
    if (n == 0) return {};
    std::vector<double> k(n);
    for (int j = 0; j < n; ++j) k[j] = kernel(j * dt);
    std::vector<double> w(n);
    w[0] = f[0];
    for (int j = 1; j < n; ++j) {
        double conv = 0.5 * k[j] * w[0];
        for (int i = 1; i < j; ++i) conv += k[j - i] * w[i];
        // trapezoid weight 1/2 on the i = j endpoint stays implicit: move it
        // to the left-hand side.
        w[j] = (f[j] - dt * conv) / (1.0 + 0.5 * dt * k[0]);
    }
    return w;
}

std::vector<double> volterra_residual(const std::function<double(double)>& kernel,
                                      const std::vector<double>& w, const std::vector<double>& f,
                                      double dt) {
    const int n = (int)w.size();
    std::vector<double> k(n), r(n);
    for (int j = 0; j < n; ++j) k[j] = kernel(j * dt);
    for (int j = 0; j < n; ++j) {
        double conv = 0.0;
        if (j > 0) {
            conv = 0.5 * (k[j] * w[0] + k[0] * w[j]);
            for (int i = 1; i < j; ++i) conv += k[j - i] * w[i];
            conv *= dt;
        }
        r[j] = w[j] + conv - f[j];
    }
    return r;
}

double ForcingTerm::value(double t) const {
    switch (kind) {
        case Kind::Poly: return coeff * std::pow(t, power);
        case Kind::Exp: return coeff * std::exp(rate * t);
        case Kind::Sin: return coeff * std::sin(rate * t);
        case Kind::Cos: return coeff * std::cos(rate * t);
    }
    return 0.0;
}

double ForcingTerm::double_integral(double t) const {
    switch (kind) {
        case Kind::Poly: {
            if (power < 0 || power > 4)
                throw std::invalid_argument("ForcingTerm: poly power must be in [0, 4]");
            return coeff * std::pow(t, power + 2) / ((power + 1) * (power + 2));
        }
        case Kind::Exp: {
            const double a = rate;
            if (a == 0.0) return coeff * 0.5 * t * t;
            return coeff * (std::exp(a * t) - 1.0 - a * t) / (a * a);
        }
        case Kind::Sin: {
            const double b = rate;
            if (b == 0.0) return 0.0;
            return coeff * (b * t - std::sin(b * t)) / (b * b);
        }
        case Kind::Cos: {
            const double b = rate;
            if (b == 0.0) return coeff * 0.5 * t * t;
            return coeff * (1.0 - std::cos(b * t)) / (b * b);
        }
    }
    return 0.0;
}

std::vector<double> volterra_laplace_closed_form(double omega, const std::vector<ForcingTerm>& f,
                                                 const std::vector<double>& times) {
    std::vector<double> out(times.size(), 0.0);
    for (size_t j = 0; j < times.size(); ++j) {
        const double t = times[j];
        double val = 0.0, dint = 0.0;
        for (const auto& term : f) {
            val += term.value(t);
            dint += term.double_integral(t);
        }
        out[j] = val - omega * omega * dint;
    }
    return out;
}

}  // namespace pricemfg
