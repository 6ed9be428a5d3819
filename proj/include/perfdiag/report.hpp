#pragma once

#include <iosfwd>
#include <string>

#include <json.hpp>

#include "perfdiag/pipeline.hpp"

namespace perfdiag {

// Machine-readable report document. Embeds the effective config and all
// seeds, enough to reproduce the run.
nlohmann::json report_to_json(const DiagnosisReport& report);

// Human-readable table rendered from the machine document.
void render_report_table(const nlohmann::json& report, std::ostream& sink);

} // namespace perfdiag
