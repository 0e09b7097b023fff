#pragma once

#include <span>
#include <string>
#include <string_view>

namespace msl {

std::string sha256_hex(std::string_view bytes);
std::string sha256_hex(std::span<const double> values);
std::string sha256_file(const std::string& path);

}  // namespace msl
