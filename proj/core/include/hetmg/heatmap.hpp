#pragma once

#include <string>

#include "hetmg/phaselab.hpp"

namespace hetmg {

/// SVG heat map of one column over the (lambda1, impact1) grid: one rect of
/// class "cell" per grid point, linear colour scale between the column's
/// minimum and maximum, a colour bar and axis labels. Non-ergodic cells are
/// hatched.
///
/// Throws EmptyTable, UnknownColumn or NonRectangularGrid.
std::string render_heatmap(const Table& table, const std::string& column);

}  // namespace hetmg
