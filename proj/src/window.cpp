#include "transient/window.hpp"

#include <stdexcept>

namespace transient {

WindowState::WindowState(std::size_t capacity) : buffer_(capacity, 0.0) {
    if (capacity == 0) throw std::invalid_argument("window capacity must be positive");
}

void WindowState::push(double x) {
    const std::size_t cap = buffer_.size();
    if (count_ >= cap) {
        const double old = buffer_[head_];
        sum_ -= old;
        sum_sq_ -= old * old;
    }
    buffer_[head_] = x;
    sum_ += x;
    sum_sq_ += x * x;
    if (sum_sq_ > peak_sum_sq_) peak_sum_sq_ = sum_sq_;
    head_ = (head_ + 1) % cap;
    ++count_;
    if (++since_refresh_ >= kRefreshInterval) refresh();
}

void WindowState::clear() {
    head_ = 0;
    count_ = 0;
    since_refresh_ = 0;
    sum_ = 0.0;
    sum_sq_ = 0.0;
    peak_sum_sq_ = 0.0;
}

void WindowState::refresh() {
    double s = 0.0;
    double s2 = 0.0;
    const std::size_t n = size();
    for (std::size_t k = n; k-- > 0;) {
        const double x = recent(k);
        s += x;
        s2 += x * x;
    }
    sum_ = s;
    sum_sq_ = s2;
    peak_sum_sq_ = s2;
    since_refresh_ = 0;
}

void WindowState::chronological(std::vector<double>& out) const {
    const std::size_t n = size();
    out.resize(n);
    for (std::size_t i = 0; i < n; ++i) out[i] = recent(n - 1 - i);
}

} // namespace transient
