#include "egnn/config.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <fstream>
#include <optional>

#include "egnn/error.hpp"

namespace egnn {

namespace {

constexpr std::array<std::string_view, 14> kKnownKeys = {"lambda1", "lambda2",      "K",       "mode",   "gamma",
                                                         "beta",    "tolerance",    "lr",      "weight_decay",
                                                         "dropout", "epochs",       "patience", "seed",  "hidden"};

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  return s.substr(first, s.find_last_not_of(" \t\r") - first + 1);
}

std::string where(const KeyValueConfig& kv, std::string_view key) {
  return kv.source + ":" + std::to_string(kv.entries.find(key)->second.line);
}

std::optional<double> get_real(const KeyValueConfig& kv, std::string_view key) {
  const auto it = kv.entries.find(key);
  if (it == kv.entries.end()) return std::nullopt;
  const std::string& s = it->second.value;
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || ptr != s.data() + s.size())
    throw InputError(where(kv, key) + ": '" + std::string(key) + "' expects a number, got '" + s + "'");
  return v;
}

template <class T>
std::optional<T> get_count(const KeyValueConfig& kv, std::string_view key) {
  const auto it = kv.entries.find(key);
  if (it == kv.entries.end()) return std::nullopt;
  const std::string& s = it->second.value;
  T v{};
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || ptr != s.data() + s.size())
    throw InputError(where(kv, key) + ": '" + std::string(key) + "' expects a non-negative integer, got '" + s + "'");
  return v;
}

std::optional<Penalty> get_mode(const KeyValueConfig& kv) {
  const auto it = kv.entries.find("mode");
  if (it == kv.entries.end()) return std::nullopt;
  try {
    return parse_penalty(it->second.value);
  } catch (const InputError& e) {
    throw InputError(where(kv, "mode") + ": " + e.what());
  }
}

}  // namespace

KeyValueConfig parse_key_values(std::istream& in, std::string_view source_name) {
  KeyValueConfig kv;
  kv.source = std::string(source_name);
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    std::string_view content = line;
    if (const auto hash = content.find('#'); hash != std::string_view::npos) content = content.substr(0, hash);
    content = trim(content);
    if (content.empty()) continue;
    const auto eq = content.find('=');
    const std::string prefix = kv.source + ":" + std::to_string(line_no) + ": ";
    if (eq == std::string_view::npos) throw InputError(prefix + "expected 'key = value'");
    const std::string_view key = trim(content.substr(0, eq));
    const std::string_view value = trim(content.substr(eq + 1));
    if (key.empty() || value.empty()) throw InputError(prefix + "expected 'key = value'");
    if (std::find(kKnownKeys.begin(), kKnownKeys.end(), key) == kKnownKeys.end())
      throw InputError(prefix + "unknown key '" + std::string(key) + "'");
    if (kv.has(key)) throw InputError(prefix + "key '" + std::string(key) + "' given twice");
    kv.entries.emplace(std::string(key), KeyValueConfig::Entry{std::string(value), line_no});
  }
  return kv;
}

KeyValueConfig read_key_values(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open config '" + path.string() + "'");
  return parse_key_values(in, path.string());
}

EmpConfig emp_config_from(const KeyValueConfig& kv, double lambda1, double lambda2, std::size_t iterations,
                          Penalty mode) {
  lambda1 = get_real(kv, "lambda1").value_or(lambda1);
  lambda2 = get_real(kv, "lambda2").value_or(lambda2);
  iterations = get_count<std::size_t>(kv, "K").value_or(iterations);
  mode = get_mode(kv).value_or(mode);
  const auto gamma = get_real(kv, "gamma");
  const auto beta = get_real(kv, "beta");
  EmpConfig cfg;
  try {
    if (gamma || beta) {
      const Stepsizes d = default_stepsizes(lambda2);
      cfg = EmpConfig::with_stepsizes(lambda1, lambda2, gamma.value_or(d.gamma), beta.value_or(d.beta), iterations,
                                      mode);
    } else {
      cfg = EmpConfig::make(lambda1, lambda2, iterations, mode);
    }
    cfg.tolerance = get_real(kv, "tolerance");
    cfg.validate();
  } catch (const InputError& e) {
    throw InputError(kv.source + ": " + e.what());
  }
  return cfg;
}

TrainConfig train_config_from(const KeyValueConfig& kv, TrainConfig base) {
  base.lambda1 = get_real(kv, "lambda1").value_or(base.lambda1);
  base.lambda2 = get_real(kv, "lambda2").value_or(base.lambda2);
  base.K = get_count<std::size_t>(kv, "K").value_or(base.K);
  base.mode = get_mode(kv).value_or(base.mode);
  if (auto g = get_real(kv, "gamma")) base.gamma = g;
  if (auto b = get_real(kv, "beta")) base.beta = b;
  base.lr = get_real(kv, "lr").value_or(base.lr);
  base.weight_decay = get_real(kv, "weight_decay").value_or(base.weight_decay);
  base.dropout = get_real(kv, "dropout").value_or(base.dropout);
  base.epochs = get_count<std::size_t>(kv, "epochs").value_or(base.epochs);
  base.patience = get_count<std::size_t>(kv, "patience").value_or(base.patience);
  base.seed = get_count<std::uint64_t>(kv, "seed").value_or(base.seed);
  base.hidden = get_count<std::size_t>(kv, "hidden").value_or(base.hidden);
  try {
    base.validate();
  } catch (const InputError& e) {
    throw InputError(kv.source + ": " + e.what());
  }
  return base;
}

}  // namespace egnn
