#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

namespace edascope {

// The four EDA block types plus the fallback for blocks with no evidence.
enum class EdaType { Preparation = 0, Modeling = 1, Evaluation = 2, Visualization = 3, Unknown = 4 };

inline constexpr std::array<EdaType, 4> kEdaTypes = {EdaType::Preparation, EdaType::Modeling,
                                                     EdaType::Evaluation, EdaType::Visualization};

std::string_view eda_type_name(EdaType type);
std::optional<EdaType> eda_type_from_name(std::string_view name);

using TokenId = std::uint32_t;

}  // namespace edascope
