// serialize.hpp - deterministic number formatting plus thin CSV/JSON helpers
// shared by the library's writers.
#pragma once

#include <complex>
#include <string>
#include <string_view>

#include <rapidjson/stringbuffer.h>
#include <rapidjson/writer.h>

namespace coamp {

/// 17 significant digits, lowercase e-notation, independent of locale:
/// 1.7320508075688772e+00. Non-finite values render as inf, -inf, nan.
std::string format_double(double value);

/// JSON writer that emits doubles through format_double(). Non-finite
/// doubles become null.
class JsonWriter {
 public:
  JsonWriter() : writer_(buffer_) {}

  JsonWriter& begin_object() { writer_.StartObject(); return *this; }
  JsonWriter& end_object() { writer_.EndObject(); return *this; }
  JsonWriter& begin_array() { writer_.StartArray(); return *this; }
  JsonWriter& end_array() { writer_.EndArray(); return *this; }

  JsonWriter& key(std::string_view k) {
    writer_.Key(k.data(), static_cast<rapidjson::SizeType>(k.size()));
    return *this;
  }
  JsonWriter& value(double v);
  JsonWriter& value(std::complex<double> v);  // [re, im]
  JsonWriter& value(long long v) { writer_.Int64(v); return *this; }
  JsonWriter& value(int v) { writer_.Int(v); return *this; }
  JsonWriter& value(std::size_t v) { writer_.Uint64(v); return *this; }
  JsonWriter& value(bool v) { writer_.Bool(v); return *this; }
  JsonWriter& value(std::string_view v) {
    writer_.String(v.data(), static_cast<rapidjson::SizeType>(v.size()));
    return *this;
  }
  JsonWriter& value(const char* v) { return value(std::string_view(v)); }
  JsonWriter& null() { writer_.Null(); return *this; }

  template <class T>
  JsonWriter& field(std::string_view k, const T& v) {
    key(k);
    return value(v);
  }

  std::string str() const { return std::string(buffer_.GetString(), buffer_.GetSize()); }

 private:
  rapidjson::StringBuffer buffer_;
  rapidjson::Writer<rapidjson::StringBuffer> writer_;
};

}  // namespace coamp
