#include <chrono>
#include <cstdio>
#include <ctime>

#include <json.hpp>

#include "c2b/augment.hpp"
#include "c2b/binary_io.hpp"
#include "c2b/error.hpp"
#include "c2b/prompt_format.hpp"
#include "c2b/random.hpp"

namespace c2b {

using nlohmann::json;

namespace {

constexpr char kAugPreamble[] =
    "You are a neuroscience literature assistant. From the title of a published neuroimaging study, "
    "write the requested text so that it describes the same research.";

}  // namespace

std::string_view aug_instruction(AugVariantKind kind) {
  switch (kind) {
    case AugVariantKind::kTitleSynMajor:
      return "Write a new title that is synonymous with the original title but uses significantly different wording.";
    case AugVariantKind::kTitleSynMinor:
      return "Write a new title that is synonymous with the original title and differs from it only minimally.";
    case AugVariantKind::kAbstract:
      return "Write a potential abstract for the study.";
    case AugVariantKind::kExperimentDesign:
      return "Write a potential description of the experimental design of the study.";
    case AugVariantKind::kKeywords:
      return "List potential keywords for the study, separated by semicolons.";
  }
  return "";
}

std::string build_aug_prompt(const StudyRecord& study, AugVariantKind kind) {
  if (study.title.empty()) throw InvalidArgument("cannot augment study '" + study.id + "': empty title");
  namespace ps = prompt_sections;
  return PromptBuilder(kAugPreamble)
      .section(ps::kInstruction, aug_instruction(kind))
      .section(ps::kVariant, to_string(kind))
      .section(ps::kTitle, study.title)
      .section(ps::kOutput, "Reply with the requested text only.")
      .str();
}

std::string prompt_hash(std::string_view prompt) {
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(fnv1a64(prompt)));
  return buf;
}

std::string utc_timestamp() {
  const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

AugmentError::AugmentError(std::string study_id, AugVariantKind kind, const std::string& cause)
    : LlmError("augmentation of '" + study_id + "' failed at " + std::string(to_string(kind)) + ": " + cause),
      study_id_(std::move(study_id)),
      kind_(kind) {}

AugmentedStudy augment_study(LlmClient& client, AugCache& cache, const StudyRecord& study,
                             const AugmentOptions& options) {
  AugmentedStudy out;
  out.study_id = study.id;
  out.client_id = client.identifier();
  const auto now = options.clock ? options.clock : utc_timestamp;

  for (auto kind : kAugVariantKinds) {
    const std::string prompt = build_aug_prompt(study, kind);
    const std::string hash = prompt_hash(prompt);
    if (auto hit = cache.get(study.id, kind, hash)) {
      out.variants.emplace(kind, hit->completion);
      if (out.timestamp.empty() || hit->timestamp < out.timestamp) out.timestamp = hit->timestamp;
      continue;
    }

    CompletionRequest request = options.request_template;
    request.prompt = prompt;
    std::string completion;
    std::string last_error;
    bool ok = false;
    for (int attempt = 0; attempt <= options.max_retries && !ok; ++attempt) {
      try {
        completion = client.complete(request);
        ok = true;
      } catch (const LlmError& e) {
        last_error = e.what();
      }
    }
    if (!ok) throw AugmentError(study.id, kind, last_error);
    if (completion.empty()) throw AugmentError(study.id, kind, "empty completion");

    const std::string stamp = now();
    cache.put({study.id, kind, hash, completion, out.client_id, stamp});
    out.variants.emplace(kind, std::move(completion));
    if (out.timestamp.empty() || stamp < out.timestamp) out.timestamp = stamp;
  }
  return out;
}

std::string augmented_to_jsonl(const std::vector<AugmentedStudy>& studies) {
  std::string out;
  for (const auto& s : studies) {
    json variants = json::object();
    for (const auto& [kind, text] : s.variants) variants[std::string(to_string(kind))] = text;
    json obj = {{"study_id", s.study_id}, {"variants", variants}, {"client", s.client_id}, {"timestamp", s.timestamp}};
    out += obj.dump();
    out += '\n';
  }
  return out;
}

std::vector<AugmentedStudy> augmented_from_jsonl(const std::string& text) {
  std::vector<AugmentedStudy> out;
  std::size_t pos = 0;
  std::size_t line_no = 0;
  while (pos < text.size()) {
    auto nl = text.find('\n', pos);
    if (nl == std::string::npos) nl = text.size();
    const std::string line = text.substr(pos, nl - pos);
    pos = nl + 1;
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      const json obj = json::parse(line);
      AugmentedStudy s;
      s.study_id = obj.at("study_id").get<std::string>();
      for (const auto& [name, value] : obj.at("variants").items()) {
        s.variants.emplace(parse_aug_variant(name), value.get<std::string>());
      }
      if (s.variants.size() != kAugVariantKinds.size()) throw InvalidArgument("expected five variants");
      for (const auto& [kind, v] : s.variants) {
        if (v.empty()) throw InvalidArgument("empty variant " + std::string(to_string(kind)));
      }
      s.client_id = obj.value("client", "");
      s.timestamp = obj.value("timestamp", "");
      out.push_back(std::move(s));
    } catch (const std::exception& e) {
      throw FormatError("augmented line " + std::to_string(line_no), e.what());
    }
  }
  return out;
}

void save_augmented(const std::vector<AugmentedStudy>& studies, const std::filesystem::path& path) {
  const std::string text = augmented_to_jsonl(studies);
  write_file_bytes(path, std::span(reinterpret_cast<const std::uint8_t*>(text.data()), text.size()));
}

std::vector<AugmentedStudy> load_augmented(const std::filesystem::path& path) {
  return augmented_from_jsonl(read_file_text(path));
}

}  // namespace c2b
