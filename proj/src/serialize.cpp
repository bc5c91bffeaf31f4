// serialize.cpp
#include "coamp/serialize.hpp"

#include <array>
#include <charconv>
#include <cmath>

namespace coamp {

std::string format_double(double value) {
  std::array<char, 64> buf{};
  const auto result = std::to_chars(buf.data(), buf.data() + buf.size(), value,
                                    std::chars_format::scientific, 16);
  return std::string(buf.data(), result.ptr);
}

JsonWriter& JsonWriter::value(double v) {
  if (!std::isfinite(v)) {
    writer_.Null();
    return *this;
  }
  const std::string text = format_double(v);
  writer_.RawValue(text.data(), text.size(), rapidjson::kNumberType);
  return *this;
}

JsonWriter& JsonWriter::value(std::complex<double> v) {
  writer_.StartArray();
  value(v.real());
  value(v.imag());
  writer_.EndArray();
  return *this;
}

}  // namespace coamp
