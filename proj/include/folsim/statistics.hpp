#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace folsim {

// Welford accumulator.
class RunningStats {
public:
    void add(double x);
    std::size_t count() const { return n_; }
    double mean() const { return mean_; }
    double variance() const;  // unbiased
    double std_error() const;
    double min() const { return min_; }
    double max() const { return max_; }

private:
    std::size_t n_ = 0;
    double mean_ = 0.0, m2_ = 0.0;
    double min_ = 1e300, max_ = -1e300;
};

struct Interval {
    double estimate = 0.0;
    double lo = 0.0, hi = 0.0;
    std::size_t batches = 0;

    double half_width() const { return 0.5 * (hi - lo); }
    bool excludes(double v) const { return v < lo || v > hi; }
};

// 95% batch-means interval: consecutive groups of `batch_size` values are averaged and
// a Student t interval is formed over the group means. A trailing partial group is
// dropped from the spread but kept in the point estimate.
Interval batch_means(std::span<const double> values, std::size_t batch_size = 16,
                     double confidence = 0.95);

// Interval for sum(num) / sum(den), spread taken over per-group ratios.
Interval ratio_batch_means(std::span<const double> num, std::span<const double> den,
                           std::size_t batch_size = 16, double confidence = 0.95);

Interval scaled(const Interval& a, double factor);

// Two-sided Student t quantile for the given confidence and degrees of freedom.
double student_t_quantile(double confidence, double dof);

}  // namespace folsim
