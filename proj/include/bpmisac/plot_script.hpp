#pragma once

#include <string>

namespace bpmisac {

/// Writes a matplotlib script next to a result CSV. `figure_kind` is one of
/// ber, tradeoff, doa, convergence, apep, design. Throws ConfigError when the
/// CSV lacks a column the figure needs.
void emit_plot_script(const std::string& csv_path, const std::string& figure_kind,
                      const std::string& script_path);

/// The script text itself.
std::string plot_script_text(const std::string& csv_path, const std::string& figure_kind);

}  // namespace bpmisac
