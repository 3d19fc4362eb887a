#pragma once

#include <functional>
#include <vector>

namespace pricemfg {

// Solves the second-kind Volterra equation
//   w(t) + int_0^t k(t - s) w(s) ds = f(t)
// on the uniform grid t_j = j*dt by trapezoidal product integration; O(dt^2).
std::vector<double> volterra_solve_trapezoid(const std::function<double(double)>& kernel,
                                             const std::vector<double>& f, double dt);

// Residual of a candidate solution in the same equation, by trapezoid.
std::vector<double> volterra_residual(const std::function<double(double)>& kernel,
                                      const std::vector<double>& w, const std::vector<double>& f,
                                      double dt);

// One additive term of a forcing function with a rational Laplace transform.
struct ForcingTerm {
    enum class Kind { Poly, Exp, Sin, Cos };
    Kind kind = Kind::Poly;
    double coeff = 0.0;
    double rate = 0.0;  // exponent rate a or angular frequency b
    int power = 0;      // t^power, Poly only (0..4)

    double value(double t) const;
    // int_0^t (t - s) term(s) ds, in closed form.
    double double_integral(double t) const;
};

// Laplace-transform route for the kernel k(t) = omega * sinh(omega t):
// 1 + L{k} = s^2 / (s^2 - omega^2), so L{w} = L{f} (1 - omega^2 / s^2) and
//   w(t) = f(t) - omega^2 int_0^t (t - s) f(s) ds,
// evaluated exactly per forcing term.
std::vector<double> volterra_laplace_closed_form(double omega, const std::vector<ForcingTerm>& f,
                                                 const std::vector<double>& times);

}  // namespace pricemfg
