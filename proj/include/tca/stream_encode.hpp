#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "tca/codec.hpp"
#include "tca/doc_value.hpp"

namespace tca {

/// One step of a depth-first document traversal. Container opens carry the
/// child (or entry) count so length-prefixed encodings can emit headers
/// without buffering the subtree.
struct DocEvent {
  enum class Kind : uint8_t {
    Null,
    Bool,
    Int,
    Float,
    Str,
    Bytes,
    Key,
    ArrayOpen,
    ArrayClose,
    MapOpen,
    MapClose,
  };

  Kind kind = Kind::Null;
  bool b = false;
  int64_t i = 0;
  double f = 0.0;
  std::string s;               // Str and Key payload
  std::vector<uint8_t> raw;    // Bytes payload
  uint32_t count = 0;          // ArrayOpen: elements, MapOpen: entries

  static DocEvent null() { return {}; }
  static DocEvent boolean(bool v) { DocEvent e; e.kind = Kind::Bool; e.b = v; return e; }
  static DocEvent integer(int64_t v) { DocEvent e; e.kind = Kind::Int; e.i = v; return e; }
  static DocEvent real(double v) { DocEvent e; e.kind = Kind::Float; e.f = v; return e; }
  static DocEvent str(std::string v) { DocEvent e; e.kind = Kind::Str; e.s = std::move(v); return e; }
  static DocEvent bytes(std::vector<uint8_t> v) { DocEvent e; e.kind = Kind::Bytes; e.raw = std::move(v); return e; }
  static DocEvent key(std::string k) { DocEvent e; e.kind = Kind::Key; e.s = std::move(k); return e; }
  static DocEvent array_open(uint32_t n) { DocEvent e; e.kind = Kind::ArrayOpen; e.count = n; return e; }
  static DocEvent array_close() { DocEvent e; e.kind = Kind::ArrayClose; return e; }
  static DocEvent map_open(uint32_t n) { DocEvent e; e.kind = Kind::MapOpen; e.count = n; return e; }
  static DocEvent map_close() { DocEvent e; e.kind = Kind::MapClose; return e; }
};

/// Pull-based event producer: returns nullopt when the traversal is done.
using DocEventSource = std::function<std::optional<DocEvent>()>;

/// Byte consumer; returning false aborts the encode with SinkError.
using ByteSink = std::function<bool(const uint8_t* data, size_t size)>;

/// Iterative depth-first walker over a materialized DocValue, yielding the
/// event sequence encode_stream consumes.
class DocValueEvents {
 public:
  /// The document must outlive the walker.
  explicit DocValueEvents(const DocValue& doc);
  explicit DocValueEvents(DocValue&&) = delete;
  std::optional<DocEvent> next();

  /// Adapter so a walker can be handed to encode_stream directly.
  DocEventSource as_source() {
    return [this]() { return next(); };
  }

 private:
  struct Frame {
    const DocValue* node;
    size_t index = 0;       // next child / entry
    bool key_emitted = false;
  };
  const DocValue* pending_;  // root not yet emitted
  std::vector<Frame> stack_;
};

struct StreamOutcome {
  enum class Status : uint8_t { Ok, Failed, SinkError };

  Status status = Status::Ok;
  std::optional<FailReason> reason;  // set when Failed
  uint64_t bytes_emitted = 0;        // handed to the sink
  uint64_t peak_buffer_bytes = 0;    // never exceeds the window

  bool ok() const { return status == Status::Ok; }
};

/// Incremental encoder with bounded buffering.
///
/// Output is byte-identical to encode() for documents within limits. The
/// internal buffer never grows past window_bytes regardless of document
/// size. Limit breaches behave like FailHard: nothing is emitted past the
/// point of failure and the reason matches what the batch encoder would
/// return for the same document.
StreamOutcome encode_stream(DocEventSource source, EncodingKind kind,
                            const SerializerLimits& limits, ByteSink sink,
                            uint64_t window_bytes = 64 * 1024);

}  // namespace tca
