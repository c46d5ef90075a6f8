#pragma once

#include <string>
#include <string_view>

namespace zhopf {

/// Which equilibrium carries the zero-Hopf point.
///   I:   the origin
///   II:  the point (0, 0, 0, Δ) on the line of equilibria (b = 0)
///   III: the symmetric pair p± (the line point in the limit b → 0)
enum class Case { I, II, III };

std::string_view to_string(Case c);
/// Accepts "i", "ii", "iii" (any case). Throws ValidationError otherwise.
Case parse_case(std::string_view text);

}  // namespace zhopf
