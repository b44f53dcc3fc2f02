#pragma once

#include <atomic>
#include <chrono>
#include <cstdint>

namespace semcast {

/// Timestamps: 64-bit microseconds on a monotonic (or simulated) timebase.
using Micros = std::chrono::microseconds;
/// Latency figures that are halved or averaged are carried as fractional ms.
using Millis = std::chrono::duration<double, std::milli>;

inline double to_ms(Micros us) { return std::chrono::duration_cast<Millis>(us).count(); }

class Clock {
 public:
  virtual ~Clock() = default;
  virtual Micros now() const = 0;
};

class SteadyClock final : public Clock {
 public:
  Micros now() const override {
    return std::chrono::duration_cast<Micros>(
        std::chrono::steady_clock::now().time_since_epoch());
  }
};

/// Simulated time. Benchmarks run on this clock so reports are reproducible.
class ManualClock final : public Clock {
 public:
  explicit ManualClock(Micros start = Micros{0}) : now_(start.count()) {}

  Micros now() const override { return Micros{now_.load()}; }
  void set(Micros t) { now_.store(t.count()); }
  void advance(Micros d) { now_.fetch_add(d.count()); }

 private:
  std::atomic<std::int64_t> now_;
};

/// A node whose local clock runs at a fixed offset from a reference clock.
class OffsetClock final : public Clock {
 public:
  OffsetClock(const Clock& reference, Micros offset) : reference_(reference), offset_(offset) {}
  Micros now() const override { return reference_.now() + offset_; }

 private:
  const Clock& reference_;
  Micros offset_;
};

}  // namespace semcast
