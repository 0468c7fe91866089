#pragma once

#include <cstddef>
#include <vector>

namespace transient {

/// Ring buffer of the most recent `capacity` observations with running
/// sums of x and x^2.
class WindowState {
public:
    explicit WindowState(std::size_t capacity);

    void push(double x);
    void clear();

    /// Recomputes the running sums from the buffer (oldest to newest).
    void refresh();

    std::size_t capacity() const { return buffer_.size(); }
    std::size_t size() const { return count_ < buffer_.size() ? count_ : buffer_.size(); }
    /// Total observations pushed since construction or clear().
    std::size_t count() const { return count_; }
    bool full() const { return count_ >= buffer_.size(); }

    double sum() const { return sum_; }
    double sum_sq() const { return sum_sq_; }
    /// Largest running sum of x^2 since the last refresh; bounds the
    /// accumulated rounding error of sum() and sum_sq().
    double sum_sq_peak() const { return peak_sum_sq_; }
    double mean() const { return sum_ / static_cast<double>(size()); }

    /// k-th most recent observation, k = 0 being the newest.
    double recent(std::size_t k) const {
        const std::size_t cap = buffer_.size();
        return buffer_[(head_ + cap - 1 - k) % cap];
    }

    /// Copies the buffer in chronological order into `out`.
    void chronological(std::vector<double>& out) const;

private:
    static constexpr std::size_t kRefreshInterval = 4096;

    std::vector<double> buffer_;
    std::size_t head_ = 0;     // slot that receives the next observation
    std::size_t count_ = 0;
    std::size_t since_refresh_ = 0;
    double sum_ = 0.0;
    double sum_sq_ = 0.0;
    double peak_sum_sq_ = 0.0;
};

} // namespace transient
