#pragma once

#include "coneflow/continuation.hpp"
#include "coneflow/errors.hpp"
#include "coneflow/flow.hpp"

#include <cstddef>
#include <string>
#include <vector>

namespace coneflow {

struct ContinuationConfig {
    std::vector<double> epsList{0.25, 0.125, 0.0625, 0.03125, 0.015625, 0.0078125, 0.00390625};
    ContinuationSettings settings;

    bool operator==(const ContinuationConfig&) const = default;
};

struct Config {
    FlowConfig flow;
    ContinuationConfig continuation;

    bool operator==(const Config&) const = default;
};

// Parse error with the offending source line (0 when the error concerns the
// file as a whole) and key (empty for structural errors).
class ConfigError : public ParameterError {
public:
    ConfigError(const std::string& source, std::size_t line, const std::string& key,
                const std::string& message);
    std::size_t line() const { return line_; }
    const std::string& key() const { return key_; }

private:
    std::size_t line_;
    std::string key_;
};

Config parse_config_text(const std::string& text, const std::string& source = "<config>");
Config parse_config(const std::string& path);

// Canonical text: every key in a fixed order, reals with 17 significant digits.
std::string emit_config(const Config& config);

// SHA-256 of the canonical text, lowercase hex.
std::string config_hash(const Config& config);

std::string sha256_hex(const std::string& data);

// Named configurations used by the test suites and shipped under configs/:
// "kahler-einstein", "smooth-soliton", "conical".
Config preset(const std::string& name);
const std::vector<std::string>& preset_names();

} // namespace coneflow
