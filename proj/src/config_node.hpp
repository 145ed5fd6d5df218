#pragma once

// Reads a JSON object while recording the resolved value of every key (defaults included)
// and rejecting keys nobody asked for.

#include <cstdint>
#include <set>
#include <string>
#include <vector>

#include <json.hpp>

#include "circlelab/errors.hpp"

namespace circlelab::detail {

class Node {
 public:
  using json = nlohmann::json;

  Node(const json& src, json& resolved, std::string path)
      : src_(&src), res_(&resolved), path_(std::move(path)) {
    if (!src_->is_null() && !src_->is_object()) throw ConfigError(where(), "expected an object");
    if (!res_->is_object()) *res_ = json::object();
  }

  const std::string& path() const { return path_; }
  std::string where(const std::string& key = "") const {
    return key.empty() ? (path_.empty() ? "/" : path_) : path_ + "/" + key;
  }
  bool has(const std::string& key) const { return src_->is_object() && src_->contains(key); }

  template <class T>
  T get(const std::string& key, const T& def) {
    seen_.insert(key);
    if (!has(key)) {
      (*res_)[key] = def;
      return def;
    }
    T v = convert<T>(src_->at(key), where(key));
    (*res_)[key] = v;
    return v;
  }

  template <class T>
  T require(const std::string& key) {
    seen_.insert(key);
    if (!has(key)) throw ConfigError(where(key), "required key is missing");
    T v = convert<T>(src_->at(key), where(key));
    (*res_)[key] = v;
    return v;
  }

  /// Number, or one of the named constants "golden" ((sqrt 5 - 1)/2) and "silver" (sqrt 2 - 1).
  double angle(const std::string& key, bool required, double def = 0.0);
  static double angle_value(const json& v, const std::string& where);
  /// Non-empty array of angles.
  std::vector<double> angles(const std::string& key);

  Node child(const std::string& key) {
    seen_.insert(key);
    static const json null_json;
    const json& sub = has(key) ? src_->at(key) : null_json;
    return Node(sub, (*res_)[key], where(key));
  }

  /// Array of objects; absent arrays are an error when required.
  std::vector<Node> objects(const std::string& key, bool required) {
    seen_.insert(key);
    std::vector<Node> out;
    if (!has(key)) {
      if (required) throw ConfigError(where(key), "required key is missing");
      (*res_)[key] = json::array();
      return out;
    }
    const json& arr = src_->at(key);
    if (!arr.is_array()) throw ConfigError(where(key), "expected an array");
    if (required && arr.empty()) throw ConfigError(where(key), "array must not be empty");
    json& r = (*res_)[key];
    r = json::array();
    for (std::size_t i = 0; i < arr.size(); ++i) r.push_back(json::object());
    for (std::size_t i = 0; i < arr.size(); ++i)
      out.emplace_back(arr[i], r[i], where(key) + "/" + std::to_string(i));
    return out;
  }

  /// Throws ConfigError for the first key that was never read.
  void done() const {
    if (!src_->is_object()) return;
    for (const auto& [k, v] : src_->items())
      if (!seen_.count(k)) throw ConfigError(where(k), "unknown key");
  }

  json& resolved() { return *res_; }

 private:
  template <class T>
  static T convert(const json& v, const std::string& where) {
    if constexpr (std::is_same_v<T, bool>) {
      if (!v.is_boolean()) throw ConfigError(where, "expected true or false");
      return v.get<bool>();
    } else if constexpr (std::is_same_v<T, std::string>) {
      if (!v.is_string()) throw ConfigError(where, "expected a string");
      return v.get<std::string>();
    } else if constexpr (std::is_same_v<T, double>) {
      if (!v.is_number()) throw ConfigError(where, "expected a number");
      return v.get<double>();
    } else if constexpr (std::is_same_v<T, std::uint64_t>) {
      if (!v.is_number_unsigned() && !(v.is_number_integer() && v.get<long long>() >= 0))
        throw ConfigError(where, "expected a non-negative integer");
      return v.get<std::uint64_t>();
    } else if constexpr (std::is_integral_v<T>) {
      if (!v.is_number_integer()) throw ConfigError(where, "expected an integer");
      return v.get<T>();
    } else if constexpr (std::is_same_v<T, std::vector<double>>) {
      if (!v.is_array()) throw ConfigError(where, "expected an array of numbers");
      std::vector<double> out;
      for (std::size_t i = 0; i < v.size(); ++i) out.push_back(convert<double>(v[i], where + "/" + std::to_string(i)));
      return out;
    } else {
      static_assert(sizeof(T) == 0, "unsupported config type");
    }
  }

  const json* src_;
  json* res_;
  std::string path_;
  std::set<std::string> seen_;
};

}  // namespace circlelab::detail
