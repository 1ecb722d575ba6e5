#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "qsrevents/config.hpp"
#include "qsrevents/preprocess.hpp"

namespace qsrev {

enum class FeatureKind {
  Raw3D,
  Quant3D,
  Quant2D,
  Qual3D,
  Qual2D,
  EventQual3D,
  EventQual2D,
};

const char* to_string(FeatureKind k);
FeatureKind feature_kind_from(const std::string& name);
const std::vector<FeatureKind>& all_feature_kinds();
bool is_event_kind(FeatureKind k);

struct FeatureMatrix {
  FeatureKind kind = FeatureKind::Raw3D;
  int rows = 0;
  int cols = 0;
  std::vector<double> values;        // row-major
  std::vector<std::string> legend;   // one entry per column

  double at(int r, int c) const { return values[size_t(r) * cols + c]; }
  double& at(int r, int c) { return values[size_t(r) * cols + c]; }
};

FeatureMatrix extract(FeatureKind kind, const Segment& seg,
                      const PipelineConfig& cfg);

// Factor-plane trajectories for a whole session, using the same pooled-PCA
// plane convention as the 2D feature kinds. One trace per factor member.
struct EmbeddedTrace {
  std::string point;
  std::vector<Vec2> pts;  // one per frame
};
struct EmbeddedFactor {
  std::string factor;
  std::vector<EmbeddedTrace> traces;
};
std::vector<EmbeddedFactor> embed_session(const Session& s);

std::string feature_matrix_to_csv(const FeatureMatrix& m,
                                  std::uint64_t cfg_hash);
void save_feature_csv(const FeatureMatrix& m, std::uint64_t cfg_hash,
                      const std::string& path);

}  // namespace qsrev
