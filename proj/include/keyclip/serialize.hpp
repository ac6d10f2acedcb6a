#pragma once

// JSON wire formats for plans and selections.
//
// Plan keys are emitted in a fixed order with `scale` at six decimals, so
// identical plans always serialize to identical bytes.

#include <string>
#include <string_view>

#include "keyclip/baselines.hpp"
#include "keyclip/types.hpp"

namespace keyclip {

std::string plan_to_json(const ClipPlan& plan);
ClipPlan plan_from_json(std::string_view text);

std::string selection_to_json(std::string_view method, const FrameSelection& selection);
/// Returns the selection; `method` receives the stored method name if non-null.
FrameSelection selection_from_json(std::string_view text, std::string* method = nullptr);

/// Shortest decimal text that round-trips the double.
std::string format_real(double v);

}  // namespace keyclip
