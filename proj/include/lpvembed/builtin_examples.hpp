#pragma once

#include "lpvembed/model.hpp"

#include <string>
#include <string_view>
#include <vector>

namespace lpvembed {

/// Names accepted by example_model.
std::vector<std::string> example_names();

/// Throws UnknownExample for names not in example_names().
NlfrModel example_model(std::string_view name);

}  // namespace lpvembed
