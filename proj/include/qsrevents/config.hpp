#pragma once

#include <cstdint>
#include <string>

namespace qsrev {

// Extraction thresholds and conventions. Defaults work unseen; every value
// can be overridden from a key=value file or command-line flags.
struct PipelineConfig {
  double theta = 0.05;        // QTC motion-significance factor
  double beta = 0.08726646259971647;  // QTC angle deadzone, 5 degrees
  double v_min = 0.01;        // m/s; moving/static threshold
  double bin_width = 0.05;    // m per qualitative distance bin
  int bin_count = 40;         // distance bins before clamping
  double rate_hz = 24.0;      // resampling target
  // fixed conventions, kept in the file so runs are self-describing
  std::string north_axis = "+y";
  std::string sector_edge = "ccw-closed";
};

PipelineConfig parse_config(const std::string& text);
PipelineConfig load_config(const std::string& path);
std::string config_to_text(const PipelineConfig& cfg);

// FNV-1a over the canonical text; names feature files back to their settings.
std::uint64_t config_hash(const PipelineConfig& cfg);

}  // namespace qsrev
