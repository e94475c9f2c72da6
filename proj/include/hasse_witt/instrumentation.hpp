#pragma once

// Process-wide counters for transforms and tracked live bytes. The
// remainder trees report the limb storage of the trees and carried state
// they hold; peak_bytes is the high-water mark since the last reset.

#include <atomic>
#include <cstddef>
#include <cstdint>

namespace hw {

struct Counters {
    std::atomic<std::uint64_t> forward_transforms{0};
    std::atomic<std::uint64_t> inverse_transforms{0};
    std::atomic<std::uint64_t> fft_products{0};
    std::atomic<std::int64_t> live_bytes{0};
    std::atomic<std::int64_t> peak_bytes{0};

    void reset() {
        forward_transforms = 0;
        inverse_transforms = 0;
        fft_products = 0;
        live_bytes = 0;
        peak_bytes = 0;
    }

    void acquire(std::size_t bytes) {
        const std::int64_t now = live_bytes.fetch_add(static_cast<std::int64_t>(bytes)) + static_cast<std::int64_t>(bytes);
        std::int64_t peak = peak_bytes.load();
        while (now > peak && !peak_bytes.compare_exchange_weak(peak, now)) {
        }
    }
    void release(std::size_t bytes) { live_bytes.fetch_sub(static_cast<std::int64_t>(bytes)); }
};

inline Counters& counters() {
    static Counters c;
    return c;
}

/// Accounts a fixed number of bytes as live for the lifetime of the guard.
class TrackedBytes {
public:
    TrackedBytes() = default;
    explicit TrackedBytes(std::size_t bytes) : bytes_(bytes) { counters().acquire(bytes_); }
    TrackedBytes(const TrackedBytes&) = delete;
    TrackedBytes& operator=(const TrackedBytes&) = delete;
    TrackedBytes(TrackedBytes&& o) noexcept : bytes_(o.bytes_) { o.bytes_ = 0; }
    TrackedBytes& operator=(TrackedBytes&& o) noexcept {
        if (this != &o) {
            reset();
            bytes_ = o.bytes_;
            o.bytes_ = 0;
        }
        return *this;
    }
    ~TrackedBytes() { reset(); }

    void reset(std::size_t bytes = 0) {
        if (bytes_) counters().release(bytes_);
        bytes_ = bytes;
        if (bytes_) counters().acquire(bytes_);
    }
    std::size_t bytes() const { return bytes_; }

private:
    std::size_t bytes_ = 0;
};

}  // namespace hw
