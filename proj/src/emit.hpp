// Internal token emitters shared by the batch encoder, the streaming
// encoder and measure_size. One writer per encoding keeps the three
// frontends byte-identical.
#pragma once

#include <charconv>
#include <cmath>
#include <cstring>
#include <stdexcept>
#include <string_view>

#include "tca/stream_encode.hpp"

namespace tca::detail {

inline constexpr char kHexDigits[] = "0123456789abcdef";

// Length of a valid UTF-8 sequence starting at p (2..4), or 0 when the
// bytes do not form one. ASCII is handled by callers.
inline size_t utf8_seq_len(const uint8_t* p, size_t n) {
  if (n == 0) return 0;
  uint8_t c = p[0];
  auto cont = [&](size_t i) { return i < n && (p[i] & 0xC0) == 0x80; };
  if (c >= 0xC2 && c <= 0xDF) return cont(1) ? 2 : 0;
  if (c == 0xE0) return (1 < n && p[1] >= 0xA0 && p[1] <= 0xBF && cont(2)) ? 3 : 0;
  if (c >= 0xE1 && c <= 0xEC) return (cont(1) && cont(2)) ? 3 : 0;
  if (c == 0xED) return (1 < n && p[1] >= 0x80 && p[1] <= 0x9F && cont(2)) ? 3 : 0;
  if (c >= 0xEE && c <= 0xEF) return (cont(1) && cont(2)) ? 3 : 0;
  if (c == 0xF0) return (1 < n && p[1] >= 0x90 && p[1] <= 0xBF && cont(2) && cont(3)) ? 4 : 0;
  if (c >= 0xF1 && c <= 0xF3) return (cont(1) && cont(2) && cont(3)) ? 4 : 0;
  if (c == 0xF4) return (1 < n && p[1] >= 0x80 && p[1] <= 0x8F && cont(2) && cont(3)) ? 4 : 0;
  return 0;
}

// Out is callable as out(const uint8_t*, size_t).
template <class Out>
void emit_escaped_string(std::string_view s, Out&& out) {
  const uint8_t* data = reinterpret_cast<const uint8_t*>(s.data());
  size_t n = s.size();
  size_t run_start = 0;
  size_t i = 0;
  auto flush_run = [&](size_t end) {
    if (end > run_start) out(data + run_start, end - run_start);
  };
  auto escape2 = [&](char c) {
    uint8_t buf[2] = {'\\', static_cast<uint8_t>(c)};
    out(buf, 2);
  };
  while (i < n) {
    uint8_t c = data[i];
    if (c == '"' || c == '\\') {
      flush_run(i);
      escape2(static_cast<char>(c));
      run_start = ++i;
    } else if (c == '\b' || c == '\f' || c == '\n' || c == '\r' || c == '\t') {
      flush_run(i);
      escape2(c == '\b' ? 'b' : c == '\f' ? 'f' : c == '\n' ? 'n' : c == '\r' ? 'r' : 't');
      run_start = ++i;
    } else if (c < 0x20) {
      flush_run(i);
      uint8_t buf[6] = {'\\', 'u', '0', '0',
                        static_cast<uint8_t>(kHexDigits[c >> 4]),
                        static_cast<uint8_t>(kHexDigits[c & 0xF])};
      out(buf, 6);
      run_start = ++i;
    } else if (c < 0x80) {
      ++i;
    } else {
      size_t len = utf8_seq_len(data + i, n - i);
      if (len == 0) {
        flush_run(i);
        uint8_t buf[4] = {'\\', 'x',
                          static_cast<uint8_t>(kHexDigits[c >> 4]),
                          static_cast<uint8_t>(kHexDigits[c & 0xF])};
        out(buf, 4);
        run_start = ++i;
      } else {
        i += len;
      }
    }
  }
  flush_run(n);
}

template <class Out>
void emit_int(int64_t v, Out&& out) {
  char buf[24];
  auto res = std::to_chars(buf, buf + sizeof(buf), v);
  out(reinterpret_cast<const uint8_t*>(buf), static_cast<size_t>(res.ptr - buf));
}

template <class Out>
void emit_float(double v, Out&& out) {
  auto lit = [&](std::string_view s) {
    out(reinterpret_cast<const uint8_t*>(s.data()), s.size());
  };
  if (std::isnan(v)) {
    lit("NaN");
    return;
  }
  if (std::isinf(v)) {
    lit(v < 0 ? "-Infinity" : "Infinity");
    return;
  }
  char buf[40];
  auto res = std::to_chars(buf, buf + sizeof(buf), v);
  size_t len = static_cast<size_t>(res.ptr - buf);
  bool marked = false;
  for (size_t i = 0; i < len; ++i) {
    if (buf[i] == '.' || buf[i] == 'e' || buf[i] == 'E') {
      marked = true;
      break;
    }
  }
  if (!marked) {
    buf[len++] = '.';
    buf[len++] = '0';  // keep floats distinguishable from ints
  }
  out(reinterpret_cast<const uint8_t*>(buf), len);
}

// JSON-style text writer. Separators are derived from a container stack, so
// it can be fed one event at a time.
template <class Out>
class TextEmitter {
 public:
  explicit TextEmitter(Out& out) : out_(out) {}

  void on_event(const DocEvent& e) {
    using K = DocEvent::Kind;
    switch (e.kind) {
      case K::Key: {
        separator();
        put1('"');
        emit_escaped_string(e.s, out_);
        put1('"');
        put1(':');
        after_key_ = true;
        return;
      }
      case K::ArrayClose:
        put1(']');
        stack_.pop_back();
        value_done();
        return;
      case K::MapClose:
        put1('}');
        stack_.pop_back();
        value_done();
        return;
      default:
        break;
    }
    value_separator();
    switch (e.kind) {
      case K::Null: lit("null"); break;
      case K::Bool: lit(e.b ? "true" : "false"); break;
      case K::Int: emit_int(e.i, out_); break;
      case K::Float: emit_float(e.f, out_); break;
      case K::Str:
        put1('"');
        emit_escaped_string(e.s, out_);
        put1('"');
        break;
      case K::Bytes: {
        put1('b');
        put1('"');
        for (uint8_t byte : e.raw) {
          uint8_t hex[2] = {static_cast<uint8_t>(kHexDigits[byte >> 4]),
                            static_cast<uint8_t>(kHexDigits[byte & 0xF])};
          out_(hex, 2);
        }
        put1('"');
        break;
      }
      case K::ArrayOpen:
        put1('[');
        stack_.push_back({false, 0});
        return;
      case K::MapOpen:
        put1('{');
        stack_.push_back({true, 0});
        return;
      default:
        throw std::logic_error("unexpected event");
    }
    value_done();
  }

 private:
  struct Frame {
    bool is_map;
    uint64_t emitted;
  };

  void lit(std::string_view s) { out_(reinterpret_cast<const uint8_t*>(s.data()), s.size()); }
  void put1(char c) {
    uint8_t b = static_cast<uint8_t>(c);
    out_(&b, 1);
  }
  void separator() {
    if (!stack_.empty() && stack_.back().emitted > 0) put1(',');
  }
  // Array elements separate themselves; map values follow an emitted key.
  void value_separator() {
    if (after_key_) {
      after_key_ = false;
      return;
    }
    if (!stack_.empty() && !stack_.back().is_map) separator();
  }
  void value_done() {
    if (!stack_.empty()) ++stack_.back().emitted;
  }

  Out& out_;
  std::vector<Frame> stack_;
  bool after_key_ = false;
};

// Tagged length-prefixed binary writer.
//   0x00 Null | 0x01 Bool u8 | 0x02 Int i64le | 0x03 Float f64le
//   0x04 Str u32le+bytes | 0x05 Bytes u32le+bytes
//   0x06 Array u32le count | 0x07 Map u32le count, entries as u32le key+value
template <class Out>
class BinaryEmitter {
 public:
  explicit BinaryEmitter(Out& out) : out_(out) {}

  void on_event(const DocEvent& e) {
    using K = DocEvent::Kind;
    switch (e.kind) {
      case K::Null: tag(0x00); break;
      case K::Bool: tag(0x01); put_u8(e.b ? 1 : 0); break;
      case K::Int: tag(0x02); put_u64(static_cast<uint64_t>(e.i)); break;
      case K::Float: {
        tag(0x03);
        uint64_t bits;
        std::memcpy(&bits, &e.f, 8);
        put_u64(bits);
        break;
      }
      case K::Str:
        tag(0x04);
        put_u32(static_cast<uint32_t>(e.s.size()));
        out_(reinterpret_cast<const uint8_t*>(e.s.data()), e.s.size());
        break;
      case K::Bytes:
        tag(0x05);
        put_u32(static_cast<uint32_t>(e.raw.size()));
        out_(e.raw.data(), e.raw.size());
        break;
      case K::Key:
        put_u32(static_cast<uint32_t>(e.s.size()));
        out_(reinterpret_cast<const uint8_t*>(e.s.data()), e.s.size());
        break;
      case K::ArrayOpen: tag(0x06); put_u32(e.count); break;
      case K::MapOpen: tag(0x07); put_u32(e.count); break;
      case K::ArrayClose:
      case K::MapClose:
        break;  // containers are count-delimited
    }
  }

 private:
  void tag(uint8_t t) { out_(&t, 1); }
  void put_u8(uint8_t v) { out_(&v, 1); }
  void put_u32(uint32_t v) {
    uint8_t buf[4];
    for (int i = 0; i < 4; ++i) buf[i] = static_cast<uint8_t>(v >> (8 * i));
    out_(buf, 4);
  }
  void put_u64(uint64_t v) {
    uint8_t buf[8];
    for (int i = 0; i < 8; ++i) buf[i] = static_cast<uint8_t>(v >> (8 * i));
    out_(buf, 8);
  }

  Out& out_;
};

// Drives a full document through an emitter.
template <class Out>
void emit_doc(const DocValue& doc, EncodingKind kind, Out& out) {
  DocValueEvents events(doc);
  if (kind == EncodingKind::Text) {
    TextEmitter<Out> emitter(out);
    while (auto e = events.next()) emitter.on_event(*e);
  } else {
    BinaryEmitter<Out> emitter(out);
    while (auto e = events.next()) emitter.on_event(*e);
  }
}

}  // namespace tca::detail
