#pragma once

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <string>
#include <utility>
#include <vector>

namespace andlab {

// Minimal JSON document builder with deterministic output: object keys keep
// insertion order and every floating-point value prints with 17 significant
// digits, so identical runs produce byte-identical files. Parsing is left to
// a full JSON library; this type only writes.
class JsonValue {
  public:
    enum class Kind { null, boolean, integer, real, string, array, object };

    JsonValue() = default;
    JsonValue(bool b) : kind_(Kind::boolean), bool_(b) {}
    JsonValue(int v) : kind_(Kind::integer), int_(v) {}
    JsonValue(long long v) : kind_(Kind::integer), int_(v) {}
    JsonValue(std::uint64_t v)
        : kind_(Kind::integer), int_(static_cast<long long>(v)), unsigned_(true) {}
    JsonValue(double v) : kind_(Kind::real), real_(v) {}
    JsonValue(const char* s) : kind_(Kind::string), str_(s) {}
    JsonValue(std::string s) : kind_(Kind::string), str_(std::move(s)) {}

    static JsonValue array() {
        JsonValue v;
        v.kind_ = Kind::array;
        return v;
    }
    static JsonValue object() {
        JsonValue v;
        v.kind_ = Kind::object;
        return v;
    }

    Kind kind() const { return kind_; }

    JsonValue& push(JsonValue v) {
        items_.push_back(std::move(v));
        return *this;
    }

    JsonValue& set(const std::string& key, JsonValue v) {
        for (auto& kv : members_)
            if (kv.first == key) {
                kv.second = std::move(v);
                return *this;
            }
        members_.emplace_back(key, std::move(v));
        return *this;
    }

    std::string dump() const {
        std::string out;
        write(out);
        return out;
    }

  private:
    static void escape_to(const std::string& s, std::string& out) {
        out += '"';
        for (char c : s) {
            switch (c) {
                case '"': out += "\\\""; break;
                case '\\': out += "\\\\"; break;
                case '\n': out += "\\n"; break;
                case '\t': out += "\\t"; break;
                case '\r': out += "\\r"; break;
                default:
                    if (static_cast<unsigned char>(c) < 0x20) {
                        char buf[8];
                        std::snprintf(buf, sizeof buf, "\\u%04x", c);
                        out += buf;
                    } else {
                        out += c;
                    }
            }
        }
        out += '"';
    }

    void write(std::string& out) const {
        char buf[40];
        switch (kind_) {
            case Kind::null: out += "null"; return;
            case Kind::boolean: out += bool_ ? "true" : "false"; return;
            case Kind::integer:
                if (unsigned_)
                    std::snprintf(buf, sizeof buf, "%llu",
                                  static_cast<unsigned long long>(int_));
                else
                    std::snprintf(buf, sizeof buf, "%lld", int_);
                out += buf;
                return;
            case Kind::real:
                if (!std::isfinite(real_)) {  // JSON has no inf/nan
                    out += "null";
                    return;
                }
                std::snprintf(buf, sizeof buf, "%.17g", real_);
                out += buf;
                return;
            case Kind::string: escape_to(str_, out); return;
            case Kind::array: {
                out += '[';
                for (std::size_t i = 0; i < items_.size(); ++i) {
                    if (i) out += ',';
                    items_[i].write(out);
                }
                out += ']';
                return;
            }
            case Kind::object: {
                out += '{';
                for (std::size_t i = 0; i < members_.size(); ++i) {
                    if (i) out += ',';
                    escape_to(members_[i].first, out);
                    out += ':';
                    members_[i].second.write(out);
                }
                out += '}';
                return;
            }
        }
    }

    Kind kind_ = Kind::null;
    bool bool_ = false;
    long long int_ = 0;
    bool unsigned_ = false;
    double real_ = 0.0;
    std::string str_;
    std::vector<JsonValue> items_;
    std::vector<std::pair<std::string, JsonValue>> members_;
};

inline JsonValue json_of(const std::vector<double>& v) {
    JsonValue a = JsonValue::array();
    for (double x : v) a.push(x);
    return a;
}

inline JsonValue json_of(const std::vector<long long>& v) {
    JsonValue a = JsonValue::array();
    for (long long x : v) a.push(x);
    return a;
}

inline JsonValue json_of(const std::vector<int>& v) {
    JsonValue a = JsonValue::array();
    for (int x : v) a.push(x);
    return a;
}

// FNV-1a, 64 bit; stable fingerprint for configs and records.
inline std::uint64_t fnv1a(const std::string& s) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : s) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

inline std::string hex64(std::uint64_t v) {
    char buf[20];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
    return buf;
}

}  // namespace andlab
