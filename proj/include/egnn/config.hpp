#pragma once

// Plain-text `key = value` configuration files. `#` starts a comment; blank
// lines are ignored. Recognized keys:
//   lambda1 lambda2 K mode gamma beta tolerance
//   lr weight_decay dropout epochs patience seed hidden

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <string>
#include <string_view>

#include "egnn/emp.hpp"
#include "egnn/trainer.hpp"

namespace egnn {

struct KeyValueConfig {
  struct Entry {
    std::string value;
    std::size_t line = 0;
  };
  std::string source;
  std::map<std::string, Entry, std::less<>> entries;

  bool has(std::string_view key) const { return entries.find(key) != entries.end(); }
};

/// Throws InputError (with source:line) for malformed lines, unknown or
/// repeated keys.
KeyValueConfig parse_key_values(std::istream& in, std::string_view source_name);
KeyValueConfig read_key_values(const std::filesystem::path& path);

/// Propagation settings; missing keys take `base` values. Stepsizes default
/// to 1/(1+lambda2) and (1+lambda2)/2 unless given.
EmpConfig emp_config_from(const KeyValueConfig& kv, double lambda1 = 0.0, double lambda2 = 0.0,
                          std::size_t iterations = 10, Penalty mode = Penalty::L21);
TrainConfig train_config_from(const KeyValueConfig& kv, TrainConfig base = {});

}  // namespace egnn
