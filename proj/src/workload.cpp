#include "tca/workload.hpp"

#include <charconv>
#include <stdexcept>

namespace tca {

namespace {

uint64_t splitmix64(uint64_t& state) {
  state += 0x9E3779B97F4A7C15ULL;
  uint64_t z = state;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

int64_t gcd64(int64_t a, int64_t b) {
  while (b != 0) {
    int64_t t = a % b;
    a = b;
    b = t;
  }
  return a < 0 ? -a : a;
}

}  // namespace

Rational Rational::of(int64_t n, int64_t d) {
  if (d == 0) throw std::invalid_argument("zero denominator");
  return Rational{n, d}.normalized();
}

Rational Rational::normalized() const {
  int64_t n = num, d = den;
  if (d < 0) {
    n = -n;
    d = -d;
  }
  int64_t g = gcd64(n == 0 ? 1 : n, d);
  return Rational{n / g, d / g};
}

Rational Rational::operator+(const Rational& o) const {
  return Rational{num * o.den + o.num * den, den * o.den}.normalized();
}

Rational Rational::operator-(const Rational& o) const {
  return Rational{num * o.den - o.num * den, den * o.den}.normalized();
}

Rational Rational::operator*(int64_t k) const { return Rational{num * k, den}.normalized(); }

bool Rational::operator<(const Rational& o) const {
  // denominators normalized positive
  return static_cast<__int128>(num) * o.den < static_cast<__int128>(o.num) * den;
}

int64_t Rational::floor() const {
  int64_t q = num / den;
  if (num % den != 0 && num < 0) --q;
  return q;
}

std::string Rational::to_string() const {
  if (den == 1) return std::to_string(num);
  return std::to_string(num) + "/" + std::to_string(den);
}

std::optional<Rational> Rational::parse(const std::string& text) {
  size_t slash = text.find('/');
  auto parse_int = [](std::string_view s, int64_t& out) {
    if (s.empty()) return false;
    auto res = std::from_chars(s.data(), s.data() + s.size(), out);
    return res.ec == std::errc{} && res.ptr == s.data() + s.size();
  };
  int64_t n = 0, d = 1;
  if (slash == std::string::npos) {
    if (!parse_int(text, n)) return std::nullopt;
  } else {
    if (!parse_int(std::string_view(text).substr(0, slash), n)) return std::nullopt;
    if (!parse_int(std::string_view(text).substr(slash + 1), d)) return std::nullopt;
    if (d == 0) return std::nullopt;
  }
  return Rational::of(n, d);
}

std::string deterministic_arg_string(uint64_t seed, uint64_t event_id, uint64_t length) {
  std::string s;
  s.reserve(length);
  uint64_t state = seed ^ (event_id * 0xD1B54A32D192ED03ULL);
  uint64_t word = 0;
  int available = 0;
  while (s.size() < length) {
    if (available == 0) {
      word = splitmix64(state);
      available = 8;
    }
    // printable ASCII 0x21..0x7E
    s.push_back(static_cast<char>(0x21 + (word & 0xFF) % 94));
    word >>= 8;
    --available;
  }
  return s;
}

GenerateResult generate(const WorkloadSpec& spec) {
  if (spec.events_per_second.num <= 0) {
    return {std::nullopt, "events_per_second must be positive"};
  }
  for (uint32_t f : spec.fan_out) {
    if (f < 1) return {std::nullopt, "fan_out entries must be >= 1"};
  }

  // Feasibility first: the full geometric sum must fit under the cap.
  auto cap_error = [&]() {
    return GenerateResult{std::nullopt,
                          "cap exceeded: workload would spawn more than " +
                              std::to_string(spec.total_process_cap) +
                              " processes before depth " + std::to_string(spec.max_depth)};
  };
  uint64_t total = 0;
  uint64_t level = 1;
  for (uint32_t g = 0; g <= spec.max_depth; ++g) {
    if (total + level > spec.total_process_cap) return cap_error();
    total += level;
    if (g < spec.max_depth) {
      uint64_t f = spec.fan_out_at(g);
      if (f > 1 && level > spec.total_process_cap / f) return cap_error();
      level *= f;
    }
  }

  WorkloadStream stream;
  stream.events.reserve(total);
  Rational interval = Rational::of(spec.events_per_second.den, spec.events_per_second.num);

  // Breadth-first emission: ids sequential from 0 in generation order, so
  // every parent is emitted before its children.
  uint64_t next_id = 0;
  std::vector<uint64_t> current_level;
  auto emit_event = [&](uint32_t g, std::optional<uint64_t> parent,
                        std::vector<uint64_t>& next_level) {
    ProcessEvent e;
    e.event_id = next_id;
    e.parent_id = parent;
    e.generation = g;
    Rational emit = interval * static_cast<int64_t>(next_id);
    e.timestamp = kEpochBase + emit.floor();
    if (spec.arg_bytes_per_event > 0) {
      e.args.push_back(deterministic_arg_string(spec.seed, e.event_id, spec.arg_bytes_per_event));
    }
    e.is_terminal_payload = spec.terminal_payload && g == spec.max_depth;
    next_level.push_back(next_id);
    stream.events.push_back({emit, std::move(e)});
    ++next_id;
  };
  for (uint32_t g = 0; g <= spec.max_depth; ++g) {
    std::vector<uint64_t> next_level;
    if (g == 0) {
      emit_event(0, std::nullopt, next_level);
    } else {
      uint32_t copies = spec.fan_out_at(g - 1);
      for (uint64_t parent : current_level) {
        for (uint32_t c = 0; c < copies; ++c) emit_event(g, parent, next_level);
      }
    }
    current_level = std::move(next_level);
  }
  return {std::move(stream), std::nullopt};
}

ProcessTree ground_truth(const WorkloadStream& stream) {
  std::vector<ProcessEvent> events;
  events.reserve(stream.events.size());
  for (const auto& te : stream.events) events.push_back(te.event);
  auto tree = ProcessTree::build(std::move(events));
  if (!tree.has_value()) throw std::logic_error("generated stream violated tree invariants");
  return *tree;
}

}  // namespace tca
