#pragma once

// JSON configuration documents. Every object is checked against the keys
// its reader understands; anything else is rejected with its full path
// (for example "geometry.split.theta") so typos never pass silently.

#include <filesystem>
#include <initializer_list>
#include <optional>
#include <string>

#include <json.hpp>

#include "memphase/flow.hpp"
#include "memphase/recovery.hpp"

namespace memphase::config {

using Json = nlohmann::json;

/// Parses JSON text; syntax errors become ConfigError with line and column.
Json parse(const std::string& text, const std::string& source = "config");
/// Reads and parses a file (IoError when unreadable).
Json load(const std::filesystem::path& path);

/// Throws ConfigError naming `path.key` for the first key of `object` not in
/// `allowed`. Also rejects non-objects.
void require_keys(const Json& object, const std::string& path,
                  std::initializer_list<const char*> allowed);

double number(const Json& object, const std::string& path, const char* key);
double number_or(const Json& object, const std::string& path, const char* key, double fallback);
long long integer_or(const Json& object, const std::string& path, const char* key, long long fallback);
bool boolean_or(const Json& object, const std::string& path, const char* key, bool fallback);
Point point(const Json& value, const std::string& path, int min_size, int max_size, int* size = nullptr);

struct Globals {
  std::optional<unsigned> threads;  // empty: leave the current setting
  std::optional<std::size_t> memory_cap_points;
  std::optional<std::filesystem::path> output_dir;
};

Globals globals(const Json& doc);
/// Applies thread count and memory cap process-wide.
void apply(const Globals& g);

PhaseSplit split(const Json& value, const std::string& path);
Geometry geometry(const Json& value, const std::string& path);
Modulus modulus(const Json& value, const std::string& path);
Box box(const Json& value, const std::string& path);
DoubleWell potential(const Json& value, const std::string& path);

/// Sweep document: geometry, potential, modulus, epsilons, q, box.
RecoveryConfig sweep_config(const Json& doc);
/// Single-epsilon document (recover, slice, mfpair): as sweep with
/// "epsilon" instead of "epsilons". Extra top-level keys may be allowed.
RecoveryConfig single_config(const Json& doc, std::initializer_list<const char*> extra = {});
FlowConfig flow_config(const Json& doc);

/// Serialization of configuration pieces for reports.
Json to_json(const Geometry& g);
Json to_json(const SharpLimits& s);

}  // namespace memphase::config
