#pragma once

#include "spsolve/io.hpp"

#include <memory>
#include <sstream>
#include <string>
#include <variant>
#include <vector>

namespace spsolve {

// Insertion-ordered JSON emitter with 17-significant-digit floats, so equal
// inputs produce byte-identical reports.
class JsonValue {
public:
  JsonValue() : data_(nullptr) {}
  JsonValue(bool b) : data_(b) {}
  JsonValue(int v) : data_(static_cast<long long>(v)) {}
  JsonValue(long v) : data_(static_cast<long long>(v)) {}
  JsonValue(long long v) : data_(v) {}
  JsonValue(double v) : data_(v) {}
  JsonValue(const char* s) : data_(std::string(s)) {}
  JsonValue(std::string s) : data_(std::move(s)) {}
  JsonValue(std::vector<JsonValue> arr) : data_(std::move(arr)) {}

  static JsonValue array(const Vector& v) {
    std::vector<JsonValue> arr;
    arr.reserve(static_cast<std::size_t>(v.size()));
    for (Index i = 0; i < v.size(); ++i) arr.emplace_back(v[i]);
    return JsonValue(std::move(arr));
  }

  static JsonValue object() {
    JsonValue v;
    v.data_ = Object{};
    return v;
  }

  JsonValue& set(const std::string& key, JsonValue value) {
    auto& obj = std::get<Object>(data_);
    obj.emplace_back(key, std::make_shared<JsonValue>(std::move(value)));
    return *this;
  }

  std::string dump(int indent = 0) const {
    std::ostringstream os;
    write(os, indent, 0);
    os << "\n";
    return os.str();
  }

private:
  using Object = std::vector<std::pair<std::string, std::shared_ptr<JsonValue>>>;
  std::variant<std::nullptr_t, bool, long long, double, std::string,
               std::vector<JsonValue>, Object>
      data_;

  static void write_string(std::ostream& os, const std::string& s) {
    os << '"';
    for (char c : s) {
      switch (c) {
        case '"': os << "\\\""; break;
        case '\\': os << "\\\\"; break;
        case '\n': os << "\\n"; break;
        case '\t': os << "\\t"; break;
        case '\r': os << "\\r"; break;
        default: os << c;
      }
    }
    os << '"';
  }

  void write(std::ostream& os, int indent, int depth) const {
    const std::string pad(static_cast<std::size_t>(indent * (depth + 1)), ' ');
    const std::string close_pad(static_cast<std::size_t>(indent * depth), ' ');
    const char* nl = indent > 0 ? "\n" : "";
    if (std::holds_alternative<std::nullptr_t>(data_)) {
      os << "null";
    } else if (std::holds_alternative<bool>(data_)) {
      os << (std::get<bool>(data_) ? "true" : "false");
    } else if (std::holds_alternative<long long>(data_)) {
      os << std::get<long long>(data_);
    } else if (std::holds_alternative<double>(data_)) {
      os << format_double(std::get<double>(data_));
    } else if (std::holds_alternative<std::string>(data_)) {
      write_string(os, std::get<std::string>(data_));
    } else if (std::holds_alternative<std::vector<JsonValue>>(data_)) {
      const auto& arr = std::get<std::vector<JsonValue>>(data_);
      os << "[";
      for (std::size_t i = 0; i < arr.size(); ++i) {
        if (i) os << ",";
        if (indent) os << nl << pad;
        arr[i].write(os, indent, depth + 1);
      }
      if (indent && !arr.empty()) os << nl << close_pad;
      os << "]";
    } else {
      const auto& obj = std::get<Object>(data_);
      os << "{";
      for (std::size_t i = 0; i < obj.size(); ++i) {
        if (i) os << ",";
        if (indent) os << nl << pad;
        write_string(os, obj[i].first);
        os << (indent ? ": " : ":");
        obj[i].second->write(os, indent, depth + 1);
      }
      if (indent && !obj.empty()) os << nl << close_pad;
      os << "}";
    }
  }
};

}  // namespace spsolve
