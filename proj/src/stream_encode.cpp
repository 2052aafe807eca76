#include "tca/stream_encode.hpp"

#include <algorithm>

#include "emit.hpp"

namespace tca {

namespace {

DocEvent scalar_event(const DocValue& v) {
  switch (v.kind()) {
    case DocValue::Kind::Null: return DocEvent::null();
    case DocValue::Kind::Bool: return DocEvent::boolean(v.as_bool());
    case DocValue::Kind::Int: return DocEvent::integer(v.as_int());
    case DocValue::Kind::Float: return DocEvent::real(v.as_float());
    case DocValue::Kind::Str: return DocEvent::str(v.as_str());
    case DocValue::Kind::Bytes: return DocEvent::bytes(v.as_bytes());
    default: throw std::logic_error("not a scalar");
  }
}

DocEvent open_event(const DocValue& v) {
  if (v.kind() == DocValue::Kind::Array) {
    return DocEvent::array_open(static_cast<uint32_t>(v.as_array().size()));
  }
  return DocEvent::map_open(static_cast<uint32_t>(v.as_map().size()));
}

}  // namespace

DocValueEvents::DocValueEvents(const DocValue& doc) : pending_(&doc) {}

std::optional<DocEvent> DocValueEvents::next() {
  if (pending_ != nullptr) {
    const DocValue* node = pending_;
    pending_ = nullptr;
    if (node->is_scalar()) return scalar_event(*node);
    stack_.push_back({node});
    return open_event(*node);
  }
  if (stack_.empty()) return std::nullopt;

  Frame& frame = stack_.back();
  if (frame.node->kind() == DocValue::Kind::Array) {
    const auto& items = frame.node->as_array();
    if (frame.index == items.size()) {
      stack_.pop_back();
      return DocEvent::array_close();
    }
    const DocValue& child = items[frame.index];
    ++frame.index;
    if (child.is_scalar()) return scalar_event(child);
    stack_.push_back({&child});
    return open_event(child);
  }

  const auto& entries = frame.node->as_map();
  if (frame.index == entries.size()) {
    stack_.pop_back();
    return DocEvent::map_close();
  }
  const auto& entry = entries[frame.index];
  if (!frame.key_emitted) {
    frame.key_emitted = true;
    return DocEvent::key(entry.key);
  }
  frame.key_emitted = false;
  ++frame.index;
  if (entry.value.is_scalar()) return scalar_event(entry.value);
  stack_.push_back({&entry.value});
  return open_event(entry.value);
}

namespace {

// Windowed output: counts every byte the encoding would produce, buffers at
// most window bytes, and goes silent once a limit breach is detected.
struct WindowedOut {
  ByteSink& sink;
  uint64_t window;
  uint64_t max_bytes;

  std::vector<uint8_t> buffer;
  uint64_t total = 0;
  uint64_t emitted = 0;
  uint64_t peak = 0;
  bool size_breached = false;
  bool sink_failed = false;

  void operator()(const uint8_t* data, size_t n) {
    total += n;
    if (size_breached || sink_failed) return;
    if (total > max_bytes) {
      size_breached = true;
      buffer.clear();
      return;
    }
    while (n > 0) {
      size_t space = static_cast<size_t>(window) - buffer.size();
      size_t take = std::min(space, n);
      buffer.insert(buffer.end(), data, data + take);
      data += take;
      n -= take;
      peak = std::max<uint64_t>(peak, buffer.size());
      if (buffer.size() == window && !flush()) return;
    }
  }

  bool flush() {
    if (buffer.empty()) return true;
    peak = std::max<uint64_t>(peak, buffer.size());
    if (!sink(buffer.data(), buffer.size())) {
      sink_failed = true;
      buffer.clear();
      return false;
    }
    emitted += buffer.size();
    buffer.clear();
    return true;
  }
};

}  // namespace

StreamOutcome encode_stream(DocEventSource source, EncodingKind kind,
                            const SerializerLimits& limits, ByteSink sink,
                            uint64_t window_bytes) {
  if (!limits.valid()) throw std::invalid_argument("invalid serializer limits");
  WindowedOut out{sink, std::max<uint64_t>(window_bytes, 16), limits.max_bytes, {}};
  out.buffer.reserve(static_cast<size_t>(std::min<uint64_t>(out.window, 1 << 16)));

  detail::TextEmitter<WindowedOut> text(out);
  detail::BinaryEmitter<WindowedOut> binary(out);

  uint64_t depth = 0;
  bool depth_breached = false;

  while (auto event = source()) {
    using K = DocEvent::Kind;
    if (event->kind == K::ArrayOpen || event->kind == K::MapOpen) {
      if (depth + 1 > limits.max_depth) {
        depth_breached = true;
        break;  // batch reports depth first, so no need to scan further
      }
      ++depth;
    } else if (event->kind == K::ArrayClose || event->kind == K::MapClose) {
      if (depth == 0) throw std::logic_error("unbalanced container close");
      --depth;
    }
    // After a size breach keep consuming events without emitting: a depth
    // breach later in the stream must win, matching the batch reason.
    if (kind == EncodingKind::Text) {
      text.on_event(*event);
    } else {
      binary.on_event(*event);
    }
    if (out.sink_failed) break;
  }

  StreamOutcome result;
  result.peak_buffer_bytes = out.peak;
  if (depth_breached) {
    result.status = StreamOutcome::Status::Failed;
    result.reason = limits.depth_reason();
  } else if (out.size_breached) {
    result.status = StreamOutcome::Status::Failed;
    result.reason = FailReason::SizeExceeded;
  } else if (out.sink_failed) {
    result.status = StreamOutcome::Status::SinkError;
  } else {
    out.flush();
    if (out.sink_failed) {
      result.status = StreamOutcome::Status::SinkError;
    }
  }
  result.bytes_emitted = out.emitted;
  return result;
}

}  // namespace tca
