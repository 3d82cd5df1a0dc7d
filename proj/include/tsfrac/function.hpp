#pragma once

#include <cmath>
#include <functional>
#include <limits>
#include <stdexcept>
#include <utility>

namespace tsfrac {

/// A function on [a,b] with optional exact derivatives. When a derivative is
/// absent, central finite differences are used (one-sided at the endpoints);
/// evaluation never reads outside [a,b].
class SmoothFunction {
  public:
    using Fn = std::function<double(double)>;

    SmoothFunction(Fn value, double a, double b, Fn derivative = nullptr,
                   Fn second_derivative = nullptr)
        : value_(std::move(value)), d1_(std::move(derivative)), d2_(std::move(second_derivative)),
          a_(a), b_(b) {
        if (!(a < b)) throw std::domain_error("SmoothFunction: need a < b");
        h_fd_ = std::cbrt(std::numeric_limits<double>::epsilon()) * (b - a);
    }

    double a() const { return a_; }
    double b() const { return b_; }
    bool exact_derivative() const { return static_cast<bool>(d1_); }
    bool exact_second_derivative() const { return static_cast<bool>(d2_); }
    double fd_step() const { return h_fd_; }

    double operator()(double x) const { return value_(x); }

    double derivative(double x) const {
        if (d1_) return d1_(x);
        const double h = h_fd_;
        if (x - h < a_) return (value_(x + h) - value_(x)) / h;
        if (x + h > b_) return (value_(x) - value_(x - h)) / h;
        return (value_(x + h) - value_(x - h)) / (2.0 * h);
    }

    double second_derivative(double x) const {
        if (d2_) return d2_(x);
        if (d1_) {
            const double h = h_fd_;
            if (x - h < a_) return (d1_(x + h) - d1_(x)) / h;
            if (x + h > b_) return (d1_(x) - d1_(x - h)) / h;
            return (d1_(x + h) - d1_(x - h)) / (2.0 * h);
        }
        // eps^{1/4}-scaled step balances truncation and roundoff for the
        // plain second difference
        const double h = std::pow(std::numeric_limits<double>::epsilon(), 0.25) * (b_ - a_);
        double c = x;
        if (c - h < a_) c = a_ + h;
        if (c + h > b_) c = b_ - h;
        return (value_(c + h) - 2.0 * value_(c) + value_(c - h)) / (h * h);
    }

  private:
    Fn value_, d1_, d2_;
    double a_, b_, h_fd_;
};

/// Drift gamma and diffusion coefficient alpha of the second-order part
/// gamma f' + alpha f''. Null callables mean identically zero.
struct DiffusionCoefficients {
    std::function<double(double)> gamma;
    std::function<double(double)> alpha;

    static DiffusionCoefficients none() { return {}; }

    bool gamma_zero() const { return !gamma; }
    bool alpha_zero() const { return !alpha; }
    bool pure_jump() const { return gamma_zero() && alpha_zero(); }

    double gamma_at(double x) const { return gamma ? gamma(x) : 0.0; }
    double alpha_at(double x) const { return alpha ? alpha(x) : 0.0; }
};

} // namespace tsfrac
