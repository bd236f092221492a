#include "edascope/types.hpp"

namespace edascope {

std::string_view eda_type_name(EdaType type) {
    switch (type) {
        case EdaType::Preparation: return "preparation";
        case EdaType::Modeling: return "modeling";
        case EdaType::Evaluation: return "evaluation";
        case EdaType::Visualization: return "visualization";
        case EdaType::Unknown: return "unknown";
    }
    return "unknown";
}

std::optional<EdaType> eda_type_from_name(std::string_view name) {
    for (auto t : {EdaType::Preparation, EdaType::Modeling, EdaType::Evaluation, EdaType::Visualization,
                   EdaType::Unknown}) {
        if (eda_type_name(t) == name) return t;
    }
    return std::nullopt;
}

}  // namespace edascope
