#pragma once

#include <string_view>

namespace pmn {

/// Which input a superpixel map, prototype set or memory bank belongs to.
enum class Stream { rgb, flow };

constexpr std::string_view stream_name(Stream s) { return s == Stream::rgb ? "rgb" : "flow"; }

}  // namespace pmn
