#pragma once

#include "cmsrom/pipeline.hpp"

#include <string>

namespace cmsrom {

/// Deterministic serializations of a run report. Timings go to their own
/// file so the main artifacts are byte-identical across repeated runs.
std::string report_to_json(const RunReport& report);
std::string report_to_csv(const RunReport& report);
std::string curves_to_csv(const RunReport& report);
std::string timings_to_csv(const RunReport& report);

struct EmittedFiles {
    std::string report_path;
    std::string curves_path;
    std::string timings_path;
};

/// format is "csv" or "json"; curves and timings are always CSV.
EmittedFiles emit_report(const RunReport& report, const std::string& out_dir,
                         const std::string& format);

} // namespace cmsrom
