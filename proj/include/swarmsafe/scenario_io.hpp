#pragma once

#include "swarmsafe/model.hpp"

#include <filesystem>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace swarmsafe {

/// Unreadable file, malformed TOML, wrong value type or unknown key.
class ParseError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// `key=value` with a dotted key (array elements by index, e.g.
/// agents.0.mass) and a TOML value.
struct Override {
  std::string key;
  std::string value;
};

Override parse_override(std::string_view text);

/// Parses a scenario document. Overrides are applied to the document
/// before it is interpreted. Does not validate; see validate().
Scenario parse_scenario(std::string_view toml_text, const std::vector<Override>& overrides = {},
                        std::string_view source = "<string>");

Scenario load_scenario(const std::filesystem::path& path, const std::vector<Override>& overrides = {});

}  // namespace swarmsafe
