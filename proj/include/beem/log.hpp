#pragma once

#include <functional>
#include <string_view>

namespace beem {

using WarningSink = std::function<void(std::string_view)>;

// Default sink writes "warning: <msg>" to stderr.
void warn(std::string_view message);
WarningSink set_warning_sink(WarningSink sink);

}  // namespace beem
