#include "c2b/cli.hpp"

#include <CLI11.hpp>

#include <cstdio>
#include <fstream>
#include <iostream>
#include <memory>
#include <sstream>

#include "c2b/augment.hpp"
#include "c2b/checkpoint.hpp"
#include "c2b/corpus.hpp"
#include "c2b/error.hpp"
#include "c2b/evaluate.hpp"
#include "c2b/gradcheck.hpp"
#include "c2b/llm_client.hpp"
#include "c2b/render.hpp"
#include "c2b/split.hpp"
#include "c2b/synthetic.hpp"
#include "c2b/t2s.hpp"
#include "c2b/tfidf.hpp"
#include "c2b/tokenize.hpp"
#include "c2b/trainer.hpp"
#include "c2b/volume_io.hpp"

namespace c2b {

namespace fs = std::filesystem;

namespace {

// Provenance timestamp for the mock client, so reruns are byte-identical.
constexpr char kMockTimestamp[] = "1970-01-01T00:00:00Z";

struct ClientOptions {
  std::string kind = "mock";
  std::string base_url = HttpLlmConfig{}.base_url;
  std::string model = HttpLlmConfig{}.model;
  int timeout_s = 60;

  void add_to(CLI::App* app) {
    app->add_option("--client", kind, "Language model client")->check(CLI::IsMember({"mock", "http"}));
    app->add_option("--base-url", base_url, "Chat-completions base URL (http client)");
    app->add_option("--model", model, "Model name (http client)");
    app->add_option("--timeout", timeout_s, "Request timeout in seconds (http client)")->check(CLI::PositiveNumber);
  }

  std::unique_ptr<LlmClient> make() const {
    if (kind == "mock") return std::make_unique<MockLlmClient>();
    auto cfg = http_config_from_env();
    cfg.base_url = base_url;
    cfg.model = model;
    cfg.timeout = std::chrono::seconds(timeout_s);
    return std::make_unique<HttpLlmClient>(cfg);
  }
};

std::string format_double(double v, int precision = 6) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*g", precision, v);
  return buf;
}

void write_text(const fs::path& path, const std::string& text) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream f(path, std::ios::binary);
  if (!f) throw IoError("cannot write " + path.string());
  f << text;
  if (!f) throw IoError("write failed: " + path.string());
}

/// File name of a study's target: the id with every byte outside
/// [A-Za-z0-9._-] percent-encoded.
std::string target_file_name(const std::string& id) {
  static const char hex[] = "0123456789ABCDEF";
  std::string out;
  for (unsigned char c : id) {
    if (std::isalnum(c) || c == '.' || c == '-' || c == '_') {
      out += static_cast<char>(c);
    } else {
      out += '%';
      out += hex[c >> 4];
      out += hex[c & 15];
    }
  }
  return out + ".c2bvol";
}

BrainVolume load_volume(const fs::path& path) {
  const auto ext = path.extension().string();
  if (ext == ".nii") return import_nifti(path);
  return load_native(path);
}

void save_volume(const BrainVolume& v, const fs::path& path) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  if (path.extension() == ".nii") {
    export_nifti(v, path);
  } else {
    save_native(v, path);
  }
}

Corpus load_corpus(const fs::path& path, std::ostream& err) {
  auto result = ingest_jsonl(path);
  for (const auto& d : result.rejected) {
    err << path.string() << ":" << d.line << ": " << d.field << ": " << d.message << "\n";
  }
  if (!result.rejected.empty()) throw FormatError("corpus", std::to_string(result.rejected.size()) + " malformed line(s)");
  return std::move(result.corpus);
}

/// Records of `corpus` restricted to a split partition (all records when no
/// split is given), in corpus order.
std::vector<const StudyRecord*> select_records(const Corpus& corpus, const std::string& split_path,
                                               const std::string& partition) {
  std::vector<const StudyRecord*> out;
  if (split_path.empty()) {
    for (const auto& r : corpus.records()) out.push_back(&r);
    return out;
  }
  const auto split = load_split(split_path);
  const auto part = parse_partition(partition);
  for (const auto& r : corpus.records()) {
    auto it = split.assignment.find(r.id);
    if (it != split.assignment.end() && it->second == part) out.push_back(&r);
  }
  return out;
}

struct LoadedTargets {
  std::vector<const StudyRecord*> records;
  std::vector<BrainVolume> volumes;
};

/// Targets for the records with peaks; records without peaks are skipped
/// with a note on `err`.
LoadedTargets load_targets(const std::vector<const StudyRecord*>& records, const fs::path& dir, std::ostream& err) {
  LoadedTargets out;
  std::size_t skipped = 0;
  for (const auto* r : records) {
    if (!r->has_peaks()) {
      ++skipped;
      continue;
    }
    out.records.push_back(r);
    out.volumes.push_back(load_native(dir / target_file_name(r->id)));
  }
  if (skipped > 0) err << "skipped " << skipped << " record(s) without peaks\n";
  return out;
}

std::vector<double> parse_fractions(const std::string& text) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    std::size_t used = 0;
    double pct = 0.0;
    try {
      pct = std::stod(item, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used == 0 || used != item.size() || !(pct > 0.0 && pct <= 100.0)) {
      throw CLI::ValidationError("--fractions", "expected percentages in (0, 100], got '" + item + "'");
    }
    out.push_back(pct / 100.0);
  }
  if (out.empty()) throw CLI::ValidationError("--fractions", "empty list");
  return out;
}

struct CommandContext {
  std::ostream& out;
  std::ostream& err;
};

// ---------------------------------------------------------------- commands

struct IngestArgs {
  std::string input, out, split_out, index_out;
  double train = 0.6, val = 0.2, test = 0.2;
  std::uint64_t seed = 0;
};

void run_ingest(const IngestArgs& a, CommandContext& ctx) {
  auto result = ingest_jsonl(a.input);
  for (const auto& d : result.rejected) {
    ctx.err << a.input << ":" << d.line << ": " << d.field << ": " << d.message << "\n";
  }
  const SplitRatios ratios{a.train, a.val, a.test};
  ratios.validate();
  write_jsonl(result.corpus, a.out);
  ctx.out << "records " << result.corpus.size() << "\n"
          << "rejected " << result.rejected.size() << "\n"
          << "without_peaks " << result.records_without_peaks << "\n";
  if (!a.split_out.empty() || !a.index_out.empty()) {
    const auto split = split_corpus(result.corpus, ratios, a.seed);
    if (!a.split_out.empty()) {
      save_split(split, a.split_out);
      ctx.out << "train " << split.count(Partition::kTrain) << "\n"
              << "val " << split.count(Partition::kVal) << "\n"
              << "test " << split.count(Partition::kTest) << "\n";
    }
    if (!a.index_out.empty()) {
      const auto ids = split.ids(Partition::kTrain);
      TfIdfIndex::build_from_titles(result.corpus, &ids).save(a.index_out);
    }
  }
}

struct SynthCorpusArgs {
  std::string out;
  SyntheticCorpusConfig config;
};

void run_synth_corpus(const SynthCorpusArgs& a, CommandContext& ctx) {
  const auto synth = make_synthetic_corpus(a.config);
  write_jsonl(synth.corpus, a.out);
  ctx.out << "records " << synth.corpus.size() << "\n";
}

struct IndexArgs {
  std::string corpus, split, partition = "train", out;
};

void run_index(const IndexArgs& a, CommandContext& ctx) {
  const auto corpus = load_corpus(a.corpus, ctx.err);
  const auto records = select_records(corpus, a.split, a.partition);
  std::vector<std::string> ids;
  for (const auto* r : records) ids.push_back(r->id);
  const auto index = TfIdfIndex::build_from_titles(corpus, &ids);
  index.save(a.out);
  ctx.out << "documents " << index.document_count() << "\n"
          << "vocabulary " << index.vocabulary_size() << "\n";
}

struct SynthTargetsArgs {
  std::string corpus, out;
  double fwhm = 9.0;
};

void run_synth_targets(const SynthTargetsArgs& a, CommandContext& ctx) {
  const auto corpus = load_corpus(a.corpus, ctx.err);
  fs::create_directories(a.out);
  const GridSpec grid;
  std::size_t written = 0;
  for (const auto& r : corpus.records()) {
    if (!r.has_peaks()) continue;
    save_native(synthesize_target(grid, r.coordinates, a.fwhm), fs::path(a.out) / target_file_name(r.id));
    ++written;
  }
  ctx.out << "targets " << written << "\n";
  if (written < corpus.size()) ctx.err << "skipped " << corpus.size() - written << " record(s) without peaks\n";
}

struct AugmentArgs {
  std::string corpus, cache, out;
  int retries = 2;
  ClientOptions client;
};

void run_augment(const AugmentArgs& a, CommandContext& ctx) {
  const auto corpus = load_corpus(a.corpus, ctx.err);
  auto client = a.client.make();
  AugCache cache = a.cache.empty() ? AugCache() : AugCache(a.cache);
  AugmentOptions options;
  options.max_retries = a.retries;
  if (a.client.kind == "mock") options.clock = [] { return std::string(kMockTimestamp); };
  std::vector<AugmentedStudy> studies;
  for (const auto& r : corpus.records()) studies.push_back(augment_study(*client, cache, r, options));
  save_augmented(studies, a.out);
  ctx.out << "augmented " << studies.size() << "\n";
}

struct TrainArgs {
  std::string corpus, targets, split, partition = "train", augmented, latents, out, resume;
  TrainConfig config;
};

void run_train(const TrainArgs& a, CommandContext& ctx) {
  a.config.validate();
  const auto corpus = load_corpus(a.corpus, ctx.err);
  const auto data = load_targets(select_records(corpus, a.split, a.partition), a.targets, ctx.err);

  std::vector<AugmentedStudy> augmented;
  std::unordered_map<std::string, const AugmentedStudy*> aug_of;
  if (!a.augmented.empty()) {
    augmented = load_augmented(a.augmented);
    for (const auto& s : augmented) aug_of[s.study_id] = &s;
  }
  std::unordered_map<std::string, std::vector<float>> latents;
  if (!a.latents.empty()) latents = load_external_latents(a.latents, GeneratorShape{}.latent_dim);

  std::vector<TrainingSample> samples;
  for (std::size_t i = 0; i < data.records.size(); ++i) {
    TrainingSample s;
    s.record = data.records[i];
    s.target = data.volumes[i].data;
    if (auto it = aug_of.find(s.record->id); it != aug_of.end()) s.augmented = it->second;
    if (!a.latents.empty()) {
      auto it = latents.find(s.record->id);
      if (it == latents.end()) throw InvalidArgument("no external vector for study " + s.record->id);
      s.external_latent = it->second;
    }
    samples.push_back(s);
  }

  TrainHooks hooks;
  hooks.on_epoch = [&ctx](int epoch, double loss) {
    ctx.err << "epoch " << epoch << " loss " << format_double(loss) << "\n";
  };
  TrainResult result;
  if (!a.resume.empty()) {
    result = train_from(load_checkpoint(a.resume), a.config, samples, hooks);
  } else {
    result = train(a.config, GridSpec{}, samples, GeneratorShape{}, hooks);
  }
  save_checkpoint(result.checkpoint, a.out);
  ctx.out << "samples " << samples.size() << "\n"
          << "steps " << result.step_loss.size() << "\n"
          << "final_loss " << format_double(result.step_loss.empty() ? 0.0 : result.step_loss.back()) << "\n";
}

std::vector<float> latent_for(const Checkpoint& ckpt, const std::string& text, const std::string& latents_path,
                              const std::string& id) {
  if (ckpt.params.encoder_kind == EncoderKind::kExternalVectors) {
    if (latents_path.empty() || id.empty()) {
      throw InvalidArgument("external-vector checkpoint: pass --latents and --id");
    }
    auto latents = load_external_latents(latents_path, ckpt.params.shape.latent_dim);
    auto it = latents.find(id);
    if (it == latents.end()) throw InvalidArgument("no external vector for id " + id);
    return it->second;
  }
  const auto tokens = tokenize(text);
  return encode(ckpt.params, std::span<const std::string>(tokens));
}

struct PredictArgs {
  std::string checkpoint, text, out, latents, id;
};

void run_predict(const PredictArgs& a, CommandContext& ctx) {
  const auto ckpt = load_checkpoint(a.checkpoint);
  const auto latent = latent_for(ckpt, a.text, a.latents, a.id);
  save_volume(generate(ckpt.params, ckpt.grid, latent), a.out);
  ctx.out << a.out << "\n";
}

struct QueryArgs {
  std::string checkpoint, text, index, out;
  bool t2s = true;
  T2SConfig t2s_config;
  ClientOptions client;
};

void run_query(QueryArgs a, CommandContext& ctx) {
  const auto ckpt = load_checkpoint(a.checkpoint);
  if (ckpt.params.encoder_kind == EncoderKind::kExternalVectors) {
    throw InvalidArgument("query needs a checkpoint trained with the text encoder");
  }
  std::string semantic = a.text;
  if (a.t2s) {
    if (a.index.empty()) throw CLI::RequiredError("--index");
    const auto index = TfIdfIndex::load(a.index);
    auto client = a.client.make();
    a.t2s_config.client = client.get();
    try {
      const auto q = refine_query(index, a.t2s_config, a.text);
      ctx.out << transcript_json(q).dump(2) << "\n";
      semantic = q.best().candidate;
    } catch (const T2SError& e) {
      ctx.out << transcript_json(e.partial()).dump(2) << "\n";
      if (!e.partial().retrieved_ids.empty()) throw;
      ctx.err << "no similar sample found; using the query as written\n";
    }
  }
  const auto tokens = tokenize(semantic);
  save_volume(generate(ckpt.params, ckpt.grid, encode(ckpt.params, std::span<const std::string>(tokens))), a.out);
  ctx.out << a.out << "\n";
}

struct EvaluateArgs {
  std::string checkpoint, corpus, targets, split, partition = "test", index, latents, fractions, environment = "standard",
                                                                                                      label = "model",
                                                                                                      out;
  double mask_rate = 0.3;
  std::uint64_t mask_seed = 0;
  bool chat = false;
  bool table = false;
  int threads = 1;
  T2SConfig t2s_config;
  ClientOptions client;
};

void run_evaluate(EvaluateArgs a, CommandContext& ctx) {
  EvalConfig config;
  if (!a.fractions.empty()) config.retention = parse_fractions(a.fractions);
  config.environment = a.environment == "standard" ? QueryEnvironment::kStandard : QueryEnvironment::kNonStandard;
  config.mask_rate = a.mask_rate;
  config.mask_seed = a.mask_seed;
  config.model_label = a.label;
  config.threads = a.threads;

  const auto ckpt = load_checkpoint(a.checkpoint);
  const auto corpus = load_corpus(a.corpus, ctx.err);
  const auto data = load_targets(select_records(corpus, a.split, a.partition), a.targets, ctx.err);

  std::unordered_map<std::string, std::vector<float>> latents;
  if (!a.latents.empty()) latents = load_external_latents(a.latents, ckpt.params.shape.latent_dim);
  std::vector<EvalSample> samples;
  for (std::size_t i = 0; i < data.records.size(); ++i) {
    EvalSample s{data.records[i], data.volumes[i].data, {}};
    if (!a.latents.empty()) {
      auto it = latents.find(s.record->id);
      if (it == latents.end()) throw InvalidArgument("no external vector for study " + s.record->id);
      s.external_latent = it->second;
    }
    samples.push_back(s);
  }

  std::optional<TfIdfIndex> index;
  std::unique_ptr<LlmClient> client;
  if (a.chat) {
    if (!a.index.empty()) {
      index = TfIdfIndex::load(a.index);
    } else {
      // Retrieval draws on the training titles.
      std::vector<std::string> ids;
      for (const auto* r : select_records(corpus, a.split, "train")) ids.push_back(r->id);
      index = TfIdfIndex::build_from_titles(corpus, &ids);
    }
    client = a.client.make();
    a.t2s_config.client = client.get();
    config.t2s = &a.t2s_config;
    config.index = &*index;
  }

  const auto report = evaluate_model(ckpt, samples, config);
  if (!a.out.empty()) write_text(a.out, report_json(report).dump(2) + "\n");
  if (a.table || a.out.empty()) ctx.out << format_report(report);
  if (report.t2s_fallbacks > 0) {
    ctx.err << report.t2s_fallbacks << " quer(ies) had no similar sample; evaluated unrefined\n";
  }
}

struct RenderArgs {
  std::string volume, out;
  char axis = 'z';
};

void run_render(const RenderArgs& a, CommandContext& ctx) {
  const auto paths = render_slices(load_volume(a.volume), parse_slice_axis(a.axis), a.out);
  ctx.out << "slices " << paths.size() << "\n";
}

struct GradcheckArgs {
  GradCheckConfig config;
  std::string precision = "64";
  double tolerance = -1.0;
};

int run_gradcheck(GradcheckArgs a, CommandContext& ctx) {
  a.config.precision = a.precision == "32" ? Precision::kFloat32 : Precision::kFloat64;
  const double tol = a.tolerance > 0.0 ? a.tolerance : (a.precision == "32" ? 1e-3 : 1e-6);
  const auto r = gradient_check(a.config);
  ctx.out << "parameters " << r.parameter_count << "\n"
          << "checked " << r.checked << "\n"
          << "skipped_kinks " << r.skipped_kinks << "\n"
          << "max_rel_error " << format_double(r.max_rel_error, 3) << "\n"
          << "worst " << r.worst_block << "[" << r.worst_index << "] analytic " << format_double(r.worst_analytic, 9)
          << " numeric " << format_double(r.worst_numeric, 9) << "\n"
          << "tolerance " << format_double(tol, 3) << "\n";
  if (r.max_rel_error < tol) return kExitOk;
  ctx.err << "gradient check failed: " << format_double(r.max_rel_error, 3) << " >= " << format_double(tol, 3) << "\n";
  return kExitRuntime;
}

void add_t2s_options(CLI::App* app, T2SConfig& c) {
  app->add_option("--retrieve-k", c.retrieve_k, "Similar samples retrieved")->check(CLI::PositiveNumber);
  app->add_option("--iterations", c.iterations, "Refinement rounds")->check(CLI::NonNegativeNumber);
  app->add_option("--keywords", c.keyword_count, "Keywords extracted from the query");
}

}  // namespace

int dispatch(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Coordinate-to-brain: text to activation maps", "c2b"};
  app.set_config("--config", "", "Read flags from a key = value file");
  app.require_subcommand(1, 1);

  IngestArgs ingest;
  auto* s_ingest = app.add_subcommand("ingest", "Validate a JSONL corpus, optionally split and index it");
  s_ingest->add_option("--input", ingest.input, "Raw JSONL corpus")->required()->check(CLI::ExistingFile);
  s_ingest->add_option("--out", ingest.out, "Cleaned corpus JSONL")->required();
  s_ingest->add_option("--split-out", ingest.split_out, "Write a train/val/test assignment");
  s_ingest->add_option("--index-out", ingest.index_out, "Write a TF-IDF index over the training titles");
  s_ingest->add_option("--train", ingest.train, "Train ratio");
  s_ingest->add_option("--val", ingest.val, "Validation ratio");
  s_ingest->add_option("--test", ingest.test, "Test ratio");
  s_ingest->add_option("--seed", ingest.seed, "Split seed");

  SynthCorpusArgs synth;
  auto* s_synth = app.add_subcommand("synth-corpus", "Generate a synthetic corpus");
  s_synth->add_option("--out", synth.out, "Corpus JSONL")->required();
  s_synth->add_option("--studies", synth.config.studies, "Number of studies")->check(CLI::PositiveNumber);
  s_synth->add_option("--concepts", synth.config.concepts, "Concepts (1..8)")->check(CLI::Range(1, 8));
  s_synth->add_option("--seed", synth.config.seed, "Seed");
  s_synth->add_option("--jitter", synth.config.jitter_mm, "Peak jitter in mm")->check(CLI::NonNegativeNumber);
  s_synth->add_option("--max-peaks", synth.config.max_peaks_per_region, "Peaks per region (1..max)")
      ->check(CLI::PositiveNumber);

  IndexArgs idx;
  auto* s_index = app.add_subcommand("index", "Build a TF-IDF index over study titles");
  s_index->add_option("--corpus", idx.corpus, "Corpus JSONL")->required()->check(CLI::ExistingFile);
  s_index->add_option("--split", idx.split, "Split assignment")->check(CLI::ExistingFile);
  s_index->add_option("--partition", idx.partition, "Partition to index")->check(CLI::IsMember({"train", "val", "test"}));
  s_index->add_option("--out", idx.out, "Index file")->required();

  SynthTargetsArgs targets;
  auto* s_targets = app.add_subcommand("synth-targets", "Rasterize peak coordinates into target volumes");
  s_targets->add_option("--corpus", targets.corpus, "Corpus JSONL")->required()->check(CLI::ExistingFile);
  s_targets->add_option("--out", targets.out, "Output directory")->required();
  s_targets->add_option("--fwhm", targets.fwhm, "Gaussian FWHM in mm")->check(CLI::PositiveNumber);

  AugmentArgs aug;
  auto* s_aug = app.add_subcommand("augment", "Generate text variants for every study");
  s_aug->add_option("--corpus", aug.corpus, "Corpus JSONL")->required()->check(CLI::ExistingFile);
  s_aug->add_option("--out", aug.out, "Augmented JSONL")->required();
  s_aug->add_option("--cache", aug.cache, "Completion cache JSONL");
  s_aug->add_option("--retries", aug.retries, "Extra attempts per variant")->check(CLI::NonNegativeNumber);
  aug.client.add_to(s_aug);

  TrainArgs tr;
  auto* s_train = app.add_subcommand("train", "Train the text-to-volume generator");
  s_train->add_option("--corpus", tr.corpus, "Corpus JSONL")->required()->check(CLI::ExistingFile);
  s_train->add_option("--targets", tr.targets, "Target directory")->required()->check(CLI::ExistingDirectory);
  s_train->add_option("--split", tr.split, "Split assignment")->check(CLI::ExistingFile);
  s_train->add_option("--partition", tr.partition, "Partition to train on")->check(CLI::IsMember({"train", "val", "test"}));
  s_train->add_option("--augmented", tr.augmented, "Augmented JSONL")->check(CLI::ExistingFile);
  s_train->add_option("--latents", tr.latents, "External text vectors JSONL (external-vector encoder)")
      ->check(CLI::ExistingFile);
  s_train->add_option("--resume", tr.resume, "Continue from a checkpoint")->check(CLI::ExistingFile);
  s_train->add_option("--out", tr.out, "Checkpoint path")->required();
  s_train->add_option("--epochs", tr.config.epochs, "Epochs")->check(CLI::NonNegativeNumber);
  s_train->add_option("--batch-size", tr.config.batch_size, "Batch size")->check(CLI::PositiveNumber);
  s_train->add_option("--lr-encoder", tr.config.optim.lr_encoder, "Encoder learning rate")->check(CLI::NonNegativeNumber);
  s_train->add_option("--lr-generator", tr.config.optim.lr_generator, "Generator learning rate")
      ->check(CLI::NonNegativeNumber);
  s_train->add_option("--weight-decay", tr.config.optim.weight_decay, "AdamW weight decay")->check(CLI::NonNegativeNumber);
  s_train->add_option("--hash-buckets", tr.config.encoder.hash_buckets, "Hashing encoder buckets")
      ->check(CLI::PositiveNumber);
  s_train->add_option("--seed", tr.config.seed, "Seed");
  s_train->add_option("--threads", tr.config.threads, "Worker threads")->check(CLI::PositiveNumber);

  PredictArgs pred;
  auto* s_pred = app.add_subcommand("predict", "Generate a volume from text");
  s_pred->add_option("--checkpoint", pred.checkpoint, "Checkpoint")->required()->check(CLI::ExistingFile);
  s_pred->add_option("--text", pred.text, "Query text")->required();
  s_pred->add_option("--out", pred.out, "Volume path (.c2bvol or .nii)")->required();
  s_pred->add_option("--latents", pred.latents, "External text vectors JSONL")->check(CLI::ExistingFile);
  s_pred->add_option("--id", pred.id, "Id of the external vector to use");

  QueryArgs q;
  auto* s_query = app.add_subcommand("query", "Refine a query, then generate its volume");
  s_query->add_option("--checkpoint", q.checkpoint, "Checkpoint")->required()->check(CLI::ExistingFile);
  s_query->add_option("--text", q.text, "Query text")->required();
  s_query->add_option("--index", q.index, "TF-IDF index of the training titles")->check(CLI::ExistingFile);
  s_query->add_option("--out", q.out, "Volume path (.c2bvol or .nii)")->required();
  s_query->add_flag("--t2s,!--no-t2s", q.t2s, "Refine the query before generating");
  add_t2s_options(s_query, q.t2s_config);
  q.client.add_to(s_query);

  EvaluateArgs ev;
  auto* s_eval = app.add_subcommand("evaluate", "AUC, Dice and IoU over a retention sweep");
  s_eval->add_option("--checkpoint", ev.checkpoint, "Checkpoint")->required()->check(CLI::ExistingFile);
  s_eval->add_option("--corpus", ev.corpus, "Corpus JSONL")->required()->check(CLI::ExistingFile);
  s_eval->add_option("--targets", ev.targets, "Target directory")->required()->check(CLI::ExistingDirectory);
  s_eval->add_option("--split", ev.split, "Split assignment")->check(CLI::ExistingFile);
  s_eval->add_option("--partition", ev.partition, "Partition to evaluate")->check(CLI::IsMember({"train", "val", "test"}));
  s_eval->add_option("--index", ev.index, "TF-IDF index for refinement")->check(CLI::ExistingFile);
  s_eval->add_option("--latents", ev.latents, "External text vectors JSONL")->check(CLI::ExistingFile);
  s_eval->add_option("--fractions", ev.fractions, "Retention percentages, e.g. 100,90,...,10");
  s_eval->add_option("--environment", ev.environment, "Query environment")
      ->check(CLI::IsMember({"standard", "non-standard"}));
  s_eval->add_option("--mask-rate", ev.mask_rate, "Token mask probability (non-standard)")->check(CLI::Range(0.0, 1.0));
  s_eval->add_option("--mask-seed", ev.mask_seed, "Mask seed");
  s_eval->add_flag("--chat,!--no-chat", ev.chat, "Also evaluate refined queries");
  s_eval->add_option("--label", ev.label, "Row-name prefix");
  s_eval->add_option("--out", ev.out, "Report JSON");
  s_eval->add_flag("--table", ev.table, "Print the table even when --out is given");
  s_eval->add_option("--threads", ev.threads, "Worker threads")->check(CLI::PositiveNumber);
  add_t2s_options(s_eval, ev.t2s_config);
  ev.client.add_to(s_eval);

  RenderArgs ren;
  auto* s_render = app.add_subcommand("render", "Write PGM slices of a volume");
  s_render->add_option("--volume", ren.volume, "Volume (.c2bvol or .nii)")->required()->check(CLI::ExistingFile);
  s_render->add_option("--axis", ren.axis, "Slice axis")->check(CLI::IsMember({'x', 'y', 'z'}));
  s_render->add_option("--out", ren.out, "Output directory")->required();

  GradcheckArgs gc;
  auto* s_grad = app.add_subcommand("gradcheck", "Compare analytic and finite-difference gradients");
  s_grad->add_option("--precision", gc.precision, "Analytic gradient precision")->check(CLI::IsMember({"32", "64"}));
  s_grad->add_option("--params", gc.config.parameters, "Parameters compared")->check(CLI::PositiveNumber);
  s_grad->add_option("--step", gc.config.step, "Finite-difference step")->check(CLI::PositiveNumber);
  s_grad->add_option("--seed", gc.config.seed, "Seed");
  s_grad->add_option("--tolerance", gc.tolerance, "Pass threshold (default 1e-6 for 64-bit, 1e-3 for 32-bit)")
      ->check(CLI::PositiveNumber);

  try {
    app.parse(argc, argv);
    if (!ev.fractions.empty()) parse_fractions(ev.fractions);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "c2b: " << e.what() << "\n";
    const auto subs = app.get_subcommands();
    err << (subs.empty() ? app.help() : subs.front()->help());
    return kExitUsage;
  }

  CommandContext ctx{out, err};
  try {
    if (*s_ingest) run_ingest(ingest, ctx);
    if (*s_synth) run_synth_corpus(synth, ctx);
    if (*s_index) run_index(idx, ctx);
    if (*s_targets) run_synth_targets(targets, ctx);
    if (*s_aug) run_augment(aug, ctx);
    if (*s_train) run_train(tr, ctx);
    if (*s_pred) run_predict(pred, ctx);
    if (*s_query) run_query(q, ctx);
    if (*s_eval) run_evaluate(ev, ctx);
    if (*s_render) run_render(ren, ctx);
    if (*s_grad) return run_gradcheck(gc, ctx);
  } catch (const CLI::ParseError& e) {
    err << "c2b: " << e.what() << "\n" << app.get_subcommands().front()->help();
    return kExitUsage;
  } catch (const std::exception& e) {
    err << "c2b: error: " << e.what() << "\n";
    return kExitRuntime;
  }
  return kExitOk;
}

}  // namespace c2b
