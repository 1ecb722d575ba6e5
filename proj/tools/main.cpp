#include <CLI11.hpp>
#include <json.hpp>

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "qsrevents/config.hpp"
#include "qsrevents/error.hpp"
#include "qsrevents/features.hpp"
#include "qsrevents/labels.hpp"
#include "qsrevents/preprocess.hpp"
#include "qsrevents/rng.hpp"
#include "qsrevents/session.hpp"
#include "qsrevents/sim.hpp"
#include "qsrevents/svgplot.hpp"
#include "qsrevents/train.hpp"

namespace fs = std::filesystem;
using ordered_json = nlohmann::ordered_json;
using namespace qsrev;

namespace {

constexpr const char* kVersion = "0.1.0";

struct Stopwatch {
  std::chrono::steady_clock::time_point start =
      std::chrono::steady_clock::now();
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() -
                                         start)
        .count();
  }
};

void write_file(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot open for writing: " + path.string());
  out << text;
  if (!out) throw DataError("write failed: " + path.string());
}

// ---- configuration: flags > config file > built-in defaults ----

struct ConfigFlags {
  std::string path;  // --config, else QSREV_CONFIG, else defaults
  double theta = -1.0, beta = -1.0, v_min = -1.0, bin_width = -1.0,
         rate_hz = -1.0;
  int bin_count = -1;
};

void add_config_flags(CLI::App* cmd, ConfigFlags& cf) {
  cmd->add_option("--config", cf.path,
                  "pipeline config file (default: $QSREV_CONFIG)");
  cmd->add_option("--rate", cf.rate_hz, "resampling rate in Hz");
  cmd->add_option("--theta", cf.theta, "QTC motion-significance factor");
  cmd->add_option("--beta", cf.beta, "QTC angle deadzone in radians");
  cmd->add_option("--vmin", cf.v_min, "moving/static speed threshold");
  cmd->add_option("--bin-width", cf.bin_width, "qualitative distance bin, m");
  cmd->add_option("--bin-count", cf.bin_count, "distance bins before clamp");
}

PipelineConfig resolve_config(const ConfigFlags& cf) {
  PipelineConfig cfg;
  std::string path = cf.path;
  if (path.empty()) {
    const char* env = std::getenv("QSREV_CONFIG");
    if (env != nullptr && *env != '\0') path = env;
  }
  if (!path.empty()) cfg = load_config(path);
  if (cf.theta >= 0.0) cfg.theta = cf.theta;
  if (cf.beta >= 0.0) cfg.beta = cf.beta;
  if (cf.v_min >= 0.0) cfg.v_min = cf.v_min;
  if (cf.bin_width >= 0.0) cfg.bin_width = cf.bin_width;
  if (cf.bin_count >= 0) cfg.bin_count = cf.bin_count;
  if (cf.rate_hz >= 0.0) cfg.rate_hz = cf.rate_hz;
  return cfg;
}

// ---- run manifests: one per command invocation, next to the outputs ----

ordered_json manifest_base(const std::string& command,
                           const PipelineConfig& cfg, std::uint64_t seed) {
  char hash[32];
  std::snprintf(hash, sizeof hash, "%016llx",
                static_cast<unsigned long long>(config_hash(cfg)));
  ordered_json man;
  man["tool"] = "qsrevents";
  man["version"] = kVersion;
  man["command"] = command;
  man["seed"] = seed;
  man["config_hash"] = hash;
  man["config"] = config_to_text(cfg);
  return man;
}

void write_manifest(ordered_json man, const std::vector<std::string>& inputs,
                    const std::vector<std::string>& outputs,
                    const Stopwatch& sw, const fs::path& path) {
  man["inputs"] = inputs;
  man["outputs"] = outputs;
  man["wall_s"] = sw.seconds();
  write_file(path, man.dump(2) + "\n");
}

// manifest path for a command whose main output is a single file
fs::path manifest_for_file(const fs::path& out) {
  fs::path p = out;
  p.replace_extension(".manifest.json");
  return p;
}

// ---- corpus directory helpers ----

bool is_manifest_name(const fs::path& p) {
  const std::string name = p.filename().string();
  return name == "manifest.json" ||
         (name.size() > 14 &&
          name.compare(name.size() - 14, 14, ".manifest.json") == 0);
}

std::vector<fs::path> session_files(const fs::path& dir) {
  if (!fs::is_directory(dir))
    throw DataError("not a directory: " + dir.string());
  std::vector<fs::path> files;
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (!entry.is_regular_file()) continue;
    const fs::path& p = entry.path();
    if (p.extension() == ".json" && !is_manifest_name(p)) files.push_back(p);
  }
  std::sort(files.begin(), files.end());
  if (files.empty())
    throw DataError("no session files in " + dir.string());
  return files;
}

std::vector<Session> load_sessions(const fs::path& dir,
                                   std::vector<std::string>* inputs) {
  std::vector<Session> out;
  for (const fs::path& p : session_files(dir)) {
    out.push_back(load_session(p.string()));
    if (inputs) inputs->push_back(p.string());
  }
  return out;
}

void ensure_out_dir(const fs::path& dir, bool force) {
  if (fs::exists(dir)) {
    if (!fs::is_directory(dir))
      throw DataError("output path exists and is not a directory: " +
                      dir.string());
    if (!force && !fs::is_empty(dir))
      throw DataError("output directory not empty (use --force): " +
                      dir.string());
  } else {
    fs::create_directories(dir);
  }
}

std::vector<FeatureKind> parse_kinds(const std::string& arg) {
  if (arg == "all") return all_feature_kinds();
  std::vector<FeatureKind> kinds;
  std::string rest = arg;
  while (!rest.empty()) {
    const size_t comma = rest.find(',');
    kinds.push_back(feature_kind_from(rest.substr(0, comma)));
    rest = comma == std::string::npos ? "" : rest.substr(comma + 1);
  }
  if (kinds.empty()) throw InvalidInput("no feature kinds given");
  return kinds;
}

// "lr=0.1,0.5;hidden=200;epochs=50" -> cross product of grid entries.
// Unlisted settings keep their defaults.
std::vector<Hyperparameters> parse_grid(const std::string& arg) {
  std::vector<double> lrs, hiddens, epochs, layers;
  std::string rest = arg;
  while (!rest.empty()) {
    const size_t semi = rest.find(';');
    std::string item = rest.substr(0, semi);
    rest = semi == std::string::npos ? "" : rest.substr(semi + 1);
    const size_t eq = item.find('=');
    if (eq == std::string::npos)
      throw InvalidInput("grid item needs key=v1,v2,...: " + item);
    const std::string key = item.substr(0, eq);
    std::vector<double>* dest = nullptr;
    if (key == "lr") dest = &lrs;
    else if (key == "hidden") dest = &hiddens;
    else if (key == "epochs") dest = &epochs;
    else if (key == "layers") dest = &layers;
    else
      throw InvalidInput("unknown grid key '" + key +
                         "' (valid: lr, hidden, epochs, layers)");
    std::string vals = item.substr(eq + 1);
    while (!vals.empty()) {
      const size_t comma = vals.find(',');
      try {
        dest->push_back(std::stod(vals.substr(0, comma)));
      } catch (const std::exception&) {
        throw InvalidInput("bad grid value in: " + item);
      }
      vals = comma == std::string::npos ? "" : vals.substr(comma + 1);
    }
  }
  if (lrs.empty()) lrs.push_back(Hyperparameters{}.learning_rate);
  if (hiddens.empty()) hiddens.push_back(Hyperparameters{}.hidden);
  if (epochs.empty()) epochs.push_back(Hyperparameters{}.epochs);
  if (layers.empty()) layers.push_back(Hyperparameters{}.lstm_layers);

  std::vector<Hyperparameters> grid;
  for (double lr : lrs)
    for (double hidden : hiddens)
      for (double ep : epochs)
        for (double ly : layers) {
          Hyperparameters hp;
          hp.learning_rate = lr;
          hp.hidden = static_cast<int>(hidden);
          hp.epochs = static_cast<int>(ep);
          hp.lstm_layers = static_cast<int>(ly);
          grid.push_back(hp);
        }
  return grid;
}

std::string fmt(const char* pattern, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, pattern, v);
  return buf;
}

// ---- generate ----

struct GenerateArgs {
  int n = 30;
  std::uint64_t seed = 1;
  std::string out;
  bool force = false;
  double sigma = CorpusMix{}.sigma;
  double dropout = CorpusMix{}.dropout;
};

int cmd_generate(const GenerateArgs& a) {
  Stopwatch sw;
  ensure_out_dir(a.out, a.force);
  CorpusMix mix;
  mix.sigma = a.sigma;
  mix.dropout = a.dropout;
  const std::vector<SyntheticSession> corpus = make_corpus(a.n, mix, a.seed);

  std::vector<std::string> outputs;
  for (const SyntheticSession& ss : corpus) {
    const fs::path sess = fs::path(a.out) / (ss.session.id + ".json");
    const fs::path scen = fs::path(a.out) / (ss.session.id + ".scenario.txt");
    save_session(ss.session, sess.string());
    write_file(scen, scenario_to_text(ss.spec));
    outputs.push_back(sess.string());
    outputs.push_back(scen.string());
  }
  write_manifest(manifest_base("generate", PipelineConfig{}, a.seed), {},
                 outputs, sw, fs::path(a.out) / "manifest.json");
  std::printf("wrote %d sessions to %s\n", a.n, a.out.c_str());
  return 0;
}

// ---- extract ----

struct ExtractArgs {
  std::string kind = "all";
  std::string in;
  std::string out;
  bool force = false;
  ConfigFlags cf;
};

int cmd_extract(const ExtractArgs& a) {
  Stopwatch sw;
  const PipelineConfig cfg = resolve_config(a.cf);
  const std::vector<FeatureKind> kinds = parse_kinds(a.kind);
  ensure_out_dir(a.out, a.force);

  std::vector<std::string> inputs;
  std::vector<Session> sessions;
  if (fs::is_directory(a.in)) {
    sessions = load_sessions(a.in, &inputs);
  } else {
    sessions.push_back(load_session(a.in));
    inputs.push_back(a.in);
  }

  std::vector<std::string> outputs;
  const std::uint64_t hash = config_hash(cfg);
  for (const Session& s : sessions) {
    const Session prepped = resample(interpolate_gaps(s), cfg.rate_hz);
    const std::vector<Segment> segs = slice(prepped);
    for (size_t k = 0; k < segs.size(); ++k)
      for (FeatureKind kind : kinds) {
        char name[160];
        std::snprintf(name, sizeof name, "%s_seg%02zu_%s.csv", s.id.c_str(),
                      k, to_string(kind));
        const fs::path out = fs::path(a.out) / name;
        save_feature_csv(extract(kind, segs[k], cfg), hash, out.string());
        outputs.push_back(out.string());
      }
  }
  write_manifest(manifest_base("extract", cfg, 0), inputs, outputs, sw,
                 fs::path(a.out) / "manifest.json");
  std::printf("wrote %zu feature files to %s\n", outputs.size(),
              a.out.c_str());
  return 0;
}

// ---- shared hyperparameter flags ----

void add_hp_flags(CLI::App* cmd, Hyperparameters& hp) {
  cmd->add_option("--epochs", hp.epochs, "training epochs (0 = default)");
  cmd->add_option("--lr", hp.learning_rate, "initial learning rate");
  cmd->add_option("--hidden", hp.hidden, "hidden units");
  cmd->add_option("--layers", hp.lstm_layers, "LSTM layers");
  cmd->add_option("--keep", hp.dropout_keep, "dropout keep probability");
  cmd->add_option("--decay", hp.decay, "per-epoch learning-rate decay");
  cmd->add_option("--batch", hp.batch_size, "minibatch size");
  cmd->add_option("--clip", hp.clip_norm, "global gradient-norm clip");
  cmd->add_option("--proj-dim", hp.proj_dim, "LSTM input projection width");
}

// ---- train ----

struct TrainArgs {
  std::string in;
  std::string kind = "2D-Qual";
  std::string out;
  std::string report;
  Hyperparameters hp;
  ConfigFlags cf;
};

int cmd_train(const TrainArgs& a) {
  Stopwatch sw;
  const PipelineConfig cfg = resolve_config(a.cf);
  const FeatureKind kind = feature_kind_from(a.kind);

  std::vector<std::string> inputs;
  const std::vector<Session> sessions = load_sessions(a.in, &inputs);
  const Dataset data = extract_dataset(sessions, kind, cfg);

  TrainReport report;
  const TrainedModel model = train(data, a.hp, model_kind_for(kind), &report);
  save_model(model, a.out);
  std::vector<std::string> outputs{a.out};
  if (!a.report.empty()) {
    write_file(a.report, train_report_to_csv(report));
    outputs.push_back(a.report);
  }
  write_manifest(manifest_base("train", cfg, a.hp.seed), inputs, outputs, sw,
                 manifest_for_file(a.out));

  const Metrics m = evaluate(model, data);
  std::printf("trained %s on %d examples; final loss %.6f\n",
              to_string(kind), m.count, report.rows.back().mean_loss);
  std::printf("training-set all-slot precision %.3f\n", m.all_slot);
  std::printf("model saved to %s\n", a.out.c_str());
  return 0;
}

// ---- eval ----

struct EvalArgs {
  std::string model;
  std::string in;
  std::string out;  // optional metrics json
  ConfigFlags cf;
};

int cmd_eval(const EvalArgs& a) {
  Stopwatch sw;
  const PipelineConfig cfg = resolve_config(a.cf);
  const TrainedModel model = load_model(a.model);
  const FeatureKind kind =
      model.kind == ModelKind::Mlp ? model.mlp.feature : model.lstm.feature;

  std::vector<std::string> inputs{a.model};
  const std::vector<Session> sessions = load_sessions(a.in, &inputs);
  const Metrics m = evaluate(model, extract_dataset(sessions, kind, cfg));

  std::printf("kind %s, %d examples\n", to_string(kind), m.count);
  std::printf("%-12s %.4f\n", "all-slot", m.all_slot);
  for (int s = 0; s < kNumSlots; ++s)
    std::printf("%-12s %.4f\n", kSlotNames[s], m.per_slot[s]);

  if (!a.out.empty()) {
    ordered_json j;
    j["kind"] = to_string(kind);
    j["count"] = m.count;
    j["all_slot"] = m.all_slot;
    for (int s = 0; s < kNumSlots; ++s) j[kSlotNames[s]] = m.per_slot[s];
    write_file(a.out, j.dump(2) + "\n");
    write_manifest(manifest_base("eval", cfg, 0), inputs, {a.out}, sw,
                   manifest_for_file(a.out));
  }
  return 0;
}

// ---- xval ----

struct XvalArgs {
  std::string in;
  std::string kinds = "all";
  std::string grid = "lr=0.1,0.5;hidden=200";
  std::uint64_t seed = 1;
  int threads = 1;
  int epochs = -1;  // override every grid entry when >= 0
  std::string out;
  bool force = false;
  ConfigFlags cf;
};

int cmd_xval(const XvalArgs& a) {
  Stopwatch sw;
  const PipelineConfig cfg = resolve_config(a.cf);
  const std::vector<FeatureKind> kinds = parse_kinds(a.kinds);
  std::vector<Hyperparameters> grid = parse_grid(a.grid);
  if (a.epochs >= 0)
    for (Hyperparameters& hp : grid) hp.epochs = a.epochs;
  if (!a.out.empty()) ensure_out_dir(a.out, a.force);

  std::vector<std::string> inputs;
  const std::vector<Session> sessions = load_sessions(a.in, &inputs);

  std::vector<XvalResult> results;
  for (FeatureKind kind : kinds) {
    const Dataset data = extract_dataset(sessions, kind, cfg);
    results.push_back(cross_validate(data, kind, grid, a.seed, a.threads));
    const XvalResult& r = results.back();
    std::printf("%-14s mean %.1f%% sd %.1f (lr=%g hidden=%d)\n",
                to_string(kind), 100.0 * r.mean, 100.0 * r.sd,
                r.best.learning_rate, r.best.hidden);
    std::fflush(stdout);
  }

  // Table: mean +- sd per kind
  std::printf("\n%-16s %10s %8s\n", "kind", "precision", "sd");
  size_t best = 0;
  for (size_t i = 0; i < results.size(); ++i) {
    std::printf("%-16s %9.1f%% %7.1f%%\n", to_string(results[i].kind),
                100.0 * results[i].mean, 100.0 * results[i].sd);
    if (results[i].mean > results[best].mean) best = i;
  }

  const XvalResult& top = results[best];
  std::printf("\nper-slot breakdown, best kind (%s):\n", to_string(top.kind));
  std::printf("%-16s %9.1f%%\n", "all-slot", 100.0 * top.mean);
  for (int s = 0; s < kNumSlots; ++s)
    std::printf("%-16s %9.1f%%\n", kSlotNames[s],
                100.0 * top.per_slot_mean[s]);

  if (!a.out.empty()) {
    std::string csv = "kind,mean,sd,best_lr,best_hidden";
    for (size_t f = 0; f < results[0].fold_precision.size(); ++f)
      csv += ",fold" + std::to_string(f);
    csv += "\n";
    for (const XvalResult& r : results) {
      csv += std::string(to_string(r.kind)) + "," + fmt("%.17g", r.mean) +
             "," + fmt("%.17g", r.sd) + "," +
             fmt("%.17g", r.best.learning_rate) + "," +
             std::to_string(r.best.hidden);
      for (double f : r.fold_precision) csv += "," + fmt("%.17g", f);
      csv += "\n";
    }
    std::string slots = "slot,precision\n";
    slots += "all," + fmt("%.17g", top.mean) + "\n";
    for (int s = 0; s < kNumSlots; ++s)
      slots += std::string(kSlotNames[s]) + "," +
               fmt("%.17g", top.per_slot_mean[s]) + "\n";

    const fs::path report = fs::path(a.out) / "xval.csv";
    const fs::path per_slot = fs::path(a.out) / "per_slot.csv";
    write_file(report, csv);
    write_file(per_slot, slots);
    write_manifest(manifest_base("xval", cfg, a.seed), inputs,
                   {report.string(), per_slot.string()}, sw,
                   fs::path(a.out) / "manifest.json");
  }
  return 0;
}

// ---- gradcheck ----

struct GradcheckArgs {
  std::string model = "mlp";  // mlp | lstm | lstm2 | checkpoint path
  std::uint64_t seed = 1;
  int samples = 200;
  bool corrupt = false;
};

FeatureMatrix random_features(Rng& rng, int rows, int dim, FeatureKind kind) {
  FeatureMatrix m;
  m.kind = kind;
  m.rows = rows;
  m.cols = dim;
  m.values.resize(static_cast<size_t>(rows) * dim);
  for (double& v : m.values) v = rng.gaussian();
  m.legend.resize(dim, "x");
  return m;
}

LabelTuple random_label(Rng& rng) {
  LabelTuple t;
  do {
    t.subject = static_cast<int>(rng.below(kEntityVocab.size()));
    t.verb = static_cast<int>(rng.below(kVerbVocab.size() - 1));
    t.object = static_cast<int>(rng.below(kEntityVocab.size()));
    t.preposition = static_cast<int>(rng.below(kPrepVocab.size()));
    t.locative = t.preposition == kPrepNone
                     ? kEntityNone
                     : static_cast<int>(rng.below(kEntityVocab.size() - 1));
  } while (!satisfies_hard_constraints(t));
  return t;
}

int cmd_gradcheck(const GradcheckArgs& a) {
  Rng rng(derive_seed(a.seed, 5));
  TrainedModel model;
  int dim = 20;
  if (a.model == "mlp" || a.model == "lstm" || a.model == "lstm2") {
    Hyperparameters hp;
    hp.hidden = 12;
    hp.proj_dim = 10;
    hp.lstm_layers = a.model == "lstm2" ? 2 : 1;
    hp.dropout_keep = 1.0;
    hp.seed = a.seed;
    model.hp = hp;
    if (a.model == "mlp") {
      model.kind = ModelKind::Mlp;
      model.mlp = make_mlp(FeatureKind::EventQual3D, dim, hp);
      Rng init(a.seed);
      init_params(model.mlp, init);
    } else {
      model.kind = ModelKind::Lstm;
      model.lstm = make_lstm(FeatureKind::Qual2D, dim, hp);
      Rng init(a.seed);
      init_params(model.lstm, init);
    }
  } else {
    model = load_model(a.model);
    dim = model.kind == ModelKind::Mlp ? model.mlp.input_dim
                                       : model.lstm.input_dim;
  }

  const int rows = model.kind == ModelKind::Mlp ? 1 : kSegmentFrames;
  const FeatureKind feat =
      model.kind == ModelKind::Mlp ? model.mlp.feature : model.lstm.feature;
  Dataset data;
  const int n = model.kind == ModelKind::Mlp ? 6 : 3;
  for (int i = 0; i < n; ++i)
    data.push_back({"g" + std::to_string(i),
                    random_features(rng, rows, dim, feat), random_label(rng)});

  const GradCheckResult res =
      grad_check(model, data, a.samples, a.seed, a.corrupt ? 1e-3 : 0.0);
  std::printf("sampled coordinates: %d\n", res.checked);
  std::printf("passed: %d\n", res.passed);
  std::printf("worst relative error: %.3g%s%s\n", res.worst_rel,
              res.worst_param.empty() ? "" : " at ",
              res.worst_param.c_str());
  if (res.ok()) {
    std::printf("gradient check passed\n");
    return 0;
  }
  std::printf("gradient check FAILED\n");
  return 3;
}

// ---- plot ----

struct PlotArgs {
  std::string session;
  std::string factor = "O1";
  std::string out;
};

int cmd_plot(const PlotArgs& a) {
  Stopwatch sw;
  const Session s = interpolate_gaps(load_session(a.session));
  const std::vector<EmbeddedFactor> factors = embed_session(s);

  const EmbeddedFactor* chosen = nullptr;
  std::string valid;
  for (const EmbeddedFactor& f : factors) {
    if (f.factor == a.factor) chosen = &f;
    if (!valid.empty()) valid += ", ";
    valid += f.factor;
  }
  if (chosen == nullptr)
    throw InvalidInput("unknown factor model '" + a.factor +
                       "' (valid: " + valid + ")");

  PlotPanel absolute;
  absolute.title = s.id + ": " + chosen->factor + " embedded trajectories";
  for (const EmbeddedTrace& tr : chosen->traces)
    absolute.traces.push_back({tr.point, tr.pts});

  // same traces with the per-frame member mean removed: relative motion
  PlotPanel relative;
  relative.title = chosen->factor + " relative to centroid";
  const size_t frames = chosen->traces.empty() ? 0 : chosen->traces[0].pts.size();
  std::vector<Vec2> centroid(frames);
  for (const EmbeddedTrace& tr : chosen->traces)
    for (size_t f = 0; f < frames; ++f)
      centroid[f] = centroid[f] + tr.pts[f] * (1.0 / chosen->traces.size());
  for (const EmbeddedTrace& tr : chosen->traces) {
    PlotTrace out{tr.point, {}};
    for (size_t f = 0; f < frames; ++f)
      out.pts.push_back(tr.pts[f] - centroid[f]);
    relative.traces.push_back(std::move(out));
  }

  write_file(a.out, render_panels({absolute, relative}));
  write_manifest(manifest_base("plot", PipelineConfig{}, 0),
                 {a.session}, {a.out}, sw, manifest_for_file(a.out));
  std::printf("wrote %s\n", a.out.c_str());
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"qualitative spatial event classification toolkit"};
  app.set_version_flag("--version", std::string("qsrevents ") + kVersion);
  app.require_subcommand(1);

  GenerateArgs gen;
  CLI::App* c_gen =
      app.add_subcommand("generate", "write a synthetic labeled corpus");
  c_gen->add_option("--n", gen.n, "number of sessions")->capture_default_str();
  c_gen->add_option("--seed", gen.seed, "master seed")->capture_default_str();
  c_gen->add_option("--out", gen.out, "output directory")->required();
  c_gen->add_flag("--force", gen.force, "allow a non-empty output directory");
  c_gen->add_option("--sigma", gen.sigma, "capture noise, m")
      ->capture_default_str();
  c_gen->add_option("--dropout", gen.dropout, "tracking dropout probability")
      ->capture_default_str();

  ExtractArgs ext;
  CLI::App* c_ext =
      app.add_subcommand("extract", "extract feature CSVs from sessions");
  c_ext->add_option("--kind", ext.kind, "feature kind name or 'all'")
      ->capture_default_str();
  c_ext->add_option("--in", ext.in, "session file or corpus directory")
      ->required();
  c_ext->add_option("--out", ext.out, "output directory")->required();
  c_ext->add_flag("--force", ext.force, "allow a non-empty output directory");
  add_config_flags(c_ext, ext.cf);

  TrainArgs tr;
  CLI::App* c_tr = app.add_subcommand("train", "train one model");
  c_tr->add_option("--in", tr.in, "corpus directory")->required();
  c_tr->add_option("--kind", tr.kind, "feature kind")->capture_default_str();
  c_tr->add_option("--out", tr.out, "model checkpoint path")->required();
  c_tr->add_option("--report", tr.report, "write per-epoch loss CSV here");
  c_tr->add_option("--seed", tr.hp.seed, "training seed")
      ->capture_default_str();
  add_hp_flags(c_tr, tr.hp);
  add_config_flags(c_tr, tr.cf);

  EvalArgs ev;
  CLI::App* c_ev =
      app.add_subcommand("eval", "evaluate a checkpoint on a corpus");
  c_ev->add_option("--model", ev.model, "model checkpoint")->required();
  c_ev->add_option("--in", ev.in, "corpus directory")->required();
  c_ev->add_option("--out", ev.out, "optional metrics JSON path");
  add_config_flags(c_ev, ev.cf);

  XvalArgs xv;
  CLI::App* c_xv = app.add_subcommand(
      "xval", "cross-validated grid search over feature kinds");
  c_xv->add_option("--in", xv.in, "corpus directory")->required();
  c_xv->add_option("--kinds", xv.kinds, "comma list of kinds or 'all'")
      ->capture_default_str();
  c_xv->add_option("--grid", xv.grid, "grid spec, e.g. lr=0.1,0.5;hidden=200")
      ->capture_default_str();
  c_xv->add_option("--seed", xv.seed, "master seed")->capture_default_str();
  c_xv->add_option("--threads", xv.threads, "worker threads")
      ->capture_default_str();
  c_xv->add_option("--epochs", xv.epochs,
                   "override training epochs for every grid entry");
  c_xv->add_option("--out", xv.out, "directory for CSV reports");
  c_xv->add_flag("--force", xv.force, "allow a non-empty output directory");
  add_config_flags(c_xv, xv.cf);

  GradcheckArgs gc;
  CLI::App* c_gc = app.add_subcommand(
      "gradcheck", "finite-difference check of analytic gradients");
  c_gc->add_option("--model", gc.model, "mlp | lstm | lstm2 | checkpoint path")
      ->capture_default_str();
  c_gc->add_option("--seed", gc.seed, "seed")->capture_default_str();
  c_gc->add_option("--samples", gc.samples, "coordinates to sample")
      ->capture_default_str();
  c_gc->add_flag("--corrupt", gc.corrupt,
                 "negative control: bias the analytic gradients");

  PlotArgs pl;
  CLI::App* c_pl =
      app.add_subcommand("plot", "embedded trajectory plot of one session");
  c_pl->add_option("--session", pl.session, "session JSON path")->required();
  c_pl->add_option("--factor-model", pl.factor,
                   "rig | O1 | O2 | O1O2 | RO1 | RO2")
      ->capture_default_str();
  c_pl->add_option("--out", pl.out, "output SVG path")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 1;
  }

  try {
    if (c_gen->parsed()) return cmd_generate(gen);
    if (c_ext->parsed()) return cmd_extract(ext);
    if (c_tr->parsed()) return cmd_train(tr);
    if (c_ev->parsed()) return cmd_eval(ev);
    if (c_xv->parsed()) return cmd_xval(xv);
    if (c_gc->parsed()) return cmd_gradcheck(gc);
    if (c_pl->parsed()) return cmd_plot(pl);
  } catch (const InvalidInput& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  } catch (const DataError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  }
  return 1;
}
