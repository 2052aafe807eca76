#pragma once

#include <cstdint>
#include <numeric>
#include <optional>
#include <string>
#include <vector>

#include "tca/process_tree.hpp"

namespace tca {

/// Epoch base for synthetic timestamps.
inline constexpr int64_t kEpochBase = 1761675797;

/// Exact rational seconds, so emit schedules are identical on every
/// platform and run.
struct Rational {
  int64_t num = 0;
  int64_t den = 1;

  static Rational of(int64_t n, int64_t d = 1);

  Rational normalized() const;
  Rational operator+(const Rational& o) const;
  Rational operator-(const Rational& o) const;
  Rational operator*(int64_t k) const;
  bool operator==(const Rational& o) const { return num == o.num && den == o.den; }
  bool operator<(const Rational& o) const;
  bool operator<=(const Rational& o) const { return *this < o || *this == o; }

  double to_double() const { return static_cast<double>(num) / static_cast<double>(den); }
  int64_t floor() const;
  std::string to_string() const;  // "n" or "n/d"

  /// Parses "n" or "n/d"; nullopt on anything else or d == 0.
  static std::optional<Rational> parse(const std::string& text);
};

/// Deterministic description of an adversarial spawn workload.
struct WorkloadSpec {
  uint32_t max_depth = 0;
  /// Fan-out per generation; generation g uses fan_out[min(g, size-1)].
  /// A single entry means uniform fan-out.
  std::vector<uint32_t> fan_out = {1};
  uint64_t arg_bytes_per_event = 0;
  Rational events_per_second = Rational::of(1000);
  /// Anything past this many events makes the spec infeasible. Mirrors the
  /// ~32K process ceiling typical hosts tolerate.
  uint64_t total_process_cap = 32768;
  uint64_t seed = 0;
  bool terminal_payload = false;

  uint32_t fan_out_at(uint32_t generation) const {
    if (fan_out.empty()) return 1;
    size_t i = std::min<size_t>(generation, fan_out.size() - 1);
    return fan_out[i];
  }
};

struct TimedEvent {
  Rational emit_time;
  ProcessEvent event;
};

/// Ordered spawn observations; emit times non-decreasing, parents always
/// before children.
struct WorkloadStream {
  std::vector<TimedEvent> events;

  size_t size() const { return events.size(); }
};

struct GenerateResult {
  std::optional<WorkloadStream> stream;
  /// Set when the spec's geometric growth would exceed total_process_cap
  /// before reaching max_depth.
  std::optional<std::string> cap_exceeded;

  bool ok() const { return stream.has_value(); }
};

/// Synthesizes the spawn stream: one event per process, breadth-first, ids
/// sequential from 0, spaced 1/events_per_second apart. Byte-identical for
/// a fixed seed.
GenerateResult generate(const WorkloadSpec& spec);

/// The exact tree a perfect pipeline would report for this stream.
ProcessTree ground_truth(const WorkloadStream& stream);

/// Seeded printable-ASCII padding used for arg strings.
std::string deterministic_arg_string(uint64_t seed, uint64_t event_id, uint64_t length);

}  // namespace tca
