// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <optional>
#include <string>
#include <string_view>

namespace eventclone::graph::detail {

std::string base64_encode(std::string_view bytes);
/// Returns nothing on malformed input.
std::optional<std::string> base64_decode(std::string_view text);

}  // namespace eventclone::graph::detail
