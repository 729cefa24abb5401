#include "folsim/statistics.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include <boost/math/distributions/students_t.hpp>

namespace folsim {

void RunningStats::add(double x) {
    ++n_;
    const double d = x - mean_;
    mean_ += d / double(n_);
    m2_ += d * (x - mean_);
    min_ = std::min(min_, x);
    max_ = std::max(max_, x);
}

double RunningStats::variance() const { return n_ > 1 ? m2_ / double(n_ - 1) : 0.0; }

double RunningStats::std_error() const {
    return n_ > 1 ? std::sqrt(variance() / double(n_)) : 0.0;
}

double student_t_quantile(double confidence, double dof) {
    boost::math::students_t dist(dof);
    return boost::math::quantile(dist, 0.5 + 0.5 * confidence);
}

Interval batch_means(std::span<const double> values, std::size_t batch_size, double confidence) {
    if (batch_size == 0) throw std::invalid_argument("batch size must be positive");
    Interval out;
    if (values.empty()) return out;
    double total = 0.0;
    for (double v : values) total += v;
    out.estimate = total / double(values.size());

    const std::size_t nb = values.size() / batch_size;
    out.batches = nb;
    if (nb < 2) {
        out.lo = -INFINITY;
        out.hi = INFINITY;
        return out;
    }
    RunningStats batch;
    for (std::size_t b = 0; b < nb; ++b) {
        double s = 0.0;
        for (std::size_t k = 0; k < batch_size; ++k) s += values[b * batch_size + k];
        batch.add(s / double(batch_size));
    }
    const double half = student_t_quantile(confidence, double(nb - 1)) * batch.std_error();
    out.lo = out.estimate - half;
    out.hi = out.estimate + half;
    return out;
}

Interval ratio_batch_means(std::span<const double> num, std::span<const double> den,
                           std::size_t batch_size, double confidence) {
    if (num.size() != den.size()) throw std::invalid_argument("ratio inputs differ in length");
    if (batch_size == 0) throw std::invalid_argument("batch size must be positive");
    Interval out;
    if (num.empty()) return out;
    double sn = 0.0, sd = 0.0;
    for (std::size_t i = 0; i < num.size(); ++i) {
        sn += num[i];
        sd += den[i];
    }
    out.estimate = sn / sd;
    const std::size_t nb = num.size() / batch_size;
    out.batches = nb;
    if (nb < 2) {
        out.lo = -INFINITY;
        out.hi = INFINITY;
        return out;
    }
    RunningStats batch;
    for (std::size_t b = 0; b < nb; ++b) {
        double bn = 0.0, bd = 0.0;
        for (std::size_t k = 0; k < batch_size; ++k) {
            bn += num[b * batch_size + k];
            bd += den[b * batch_size + k];
        }
        batch.add(bn / bd);
    }
    const double half = student_t_quantile(confidence, double(nb - 1)) * batch.std_error();
    out.lo = out.estimate - half;
    out.hi = out.estimate + half;
    return out;
}

Interval scaled(const Interval& a, double factor) {
    Interval out = a;
    out.estimate = a.estimate * factor;
    out.lo = (factor >= 0 ? a.lo : a.hi) * factor;
    out.hi = (factor >= 0 ? a.hi : a.lo) * factor;
    return out;
}

}  // namespace folsim
