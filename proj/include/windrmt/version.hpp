// SPDX-License-Identifier: MIT

#pragma once

namespace windrmt {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace windrmt
