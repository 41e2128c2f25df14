#include "ptmchain/types.hpp"

namespace ptmchain {

std::string to_string(Registry r) {
    switch (r) {
        case Registry::HuggingFace: return "huggingface";
        case Registry::PyTorchHub: return "pytorch_hub";
    }
    return "huggingface";
}

std::optional<Registry> registry_from_string(const std::string& s) {
    if (s == "huggingface") return Registry::HuggingFace;
    if (s == "pytorch_hub") return Registry::PyTorchHub;
    return std::nullopt;
}

std::string to_string(MatchStrength s) {
    switch (s) {
        case MatchStrength::Exact: return "exact";
        case MatchStrength::CaseInsensitive: return "case_insensitive";
    }
    return "exact";
}

std::optional<MatchStrength> match_strength_from_string(const std::string& s) {
    if (s == "exact") return MatchStrength::Exact;
    if (s == "case_insensitive") return MatchStrength::CaseInsensitive;
    return std::nullopt;
}

}  // namespace ptmchain
