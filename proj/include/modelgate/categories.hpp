#pragma once

#include <string>

#include "modelgate/errors.hpp"

namespace modelgate {

// Deployment outcome categories, strictest first. REJECT and APPROVE can
// never be deactivated; the middle two may be, in which case conditions
// that would have selected them escalate to the nearest stricter active
// category.
enum class Category { REJECT, CLINICAL_REVIEW, CONDITIONAL_APPROVAL, APPROVE };

// Evaluation slots: P1..P3 are the gate checks in dominance order (P4 is
// the implicit all-clear), A1..A3 the independent surveillance channel.
enum class Priority { P1, P2, P3, P4, A1, A2, A3 };

inline const char* category_name(Category c) {
    switch (c) {
        case Category::REJECT: return "REJECT";
        case Category::CLINICAL_REVIEW: return "CLINICAL_REVIEW";
        case Category::CONDITIONAL_APPROVAL: return "CONDITIONAL_APPROVAL";
        case Category::APPROVE: return "APPROVE";
    }
    return "REJECT";
}

inline Category category_from_name(const std::string& name) {
    if (name == "REJECT") return Category::REJECT;
    if (name == "CLINICAL_REVIEW") return Category::CLINICAL_REVIEW;
    if (name == "CONDITIONAL_APPROVAL") return Category::CONDITIONAL_APPROVAL;
    if (name == "APPROVE") return Category::APPROVE;
    raise(ErrorKind::ConfigError, "unknown category: " + name);
}

inline const char* priority_name(Priority p) {
    switch (p) {
        case Priority::P1: return "P1";
        case Priority::P2: return "P2";
        case Priority::P3: return "P3";
        case Priority::P4: return "P4";
        case Priority::A1: return "A1";
        case Priority::A2: return "A2";
        case Priority::A3: return "A3";
    }
    return "P1";
}

// The category each gate priority selects when it fires.
inline Category category_for_priority(Priority p) {
    switch (p) {
        case Priority::P1: return Category::REJECT;
        case Priority::P2: return Category::CLINICAL_REVIEW;
        case Priority::P3: return Category::CONDITIONAL_APPROVAL;
        default: return Category::APPROVE;
    }
}

} // namespace modelgate
