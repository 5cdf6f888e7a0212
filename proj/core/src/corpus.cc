// Copyright 2026 The evalign Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "evalign/corpus.h"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>
#include <unordered_map>

#include "evalign/error.h"
#include "evalign/text.h"
#include "json.hpp"

namespace evalign {

using json = nlohmann::json;

namespace {

std::string Where(std::string_view source, std::size_t line) {
  return std::string(source) + ":" + std::to_string(line);
}

// Calls fn(parsed object, line number) for each nonblank line.
template <typename Fn>
void ForEachJsonLine(std::string_view text, std::string_view source, Fn&& fn) {
  std::size_t line_no = 0;
  std::size_t start = 0;
  while (start < text.size()) {
    std::size_t end = text.find('\n', start);
    if (end == std::string_view::npos) end = text.size();
    ++line_no;
    const std::string_view line = Trim(text.substr(start, end - start));
    start = end + 1;
    if (line.empty()) continue;
    json row;
    try {
      row = json::parse(line);
    } catch (const json::parse_error& e) {
      throw Error(ErrorKind::kParse, Where(source, line_no) + ": " + e.what());
    }
    if (!row.is_object()) {
      throw Error(ErrorKind::kParse,
                  Where(source, line_no) + ": expected a JSON object");
    }
    fn(row, line_no);
  }
}

std::string IdString(const json& v) {
  if (v.is_string()) return v.get<std::string>();
  if (v.is_number_integer()) return std::to_string(v.get<long long>());
  if (v.is_number_unsigned()) return std::to_string(v.get<unsigned long long>());
  return {};
}

std::string RequireString(const json& row, const char* key,
                          std::string_view source, std::size_t line) {
  auto it = row.find(key);
  if (it == row.end() || !it->is_string()) {
    throw Error(ErrorKind::kParse, Where(source, line) + ": missing string field '" +
                                       key + "'");
  }
  return it->get<std::string>();
}

std::vector<std::string> RequireStringList(const json& row, const char* key,
                                           std::string_view source,
                                           std::size_t line) {
  auto it = row.find(key);
  if (it == row.end() || !it->is_array()) {
    throw Error(ErrorKind::kParse,
                Where(source, line) + ": missing list field '" + key + "'");
  }
  std::vector<std::string> out;
  for (const auto& v : *it) {
    if (!v.is_string()) {
      throw Error(ErrorKind::kParse, Where(source, line) + ": field '" + key +
                                         "' must hold strings");
    }
    out.push_back(v.get<std::string>());
  }
  return out;
}

ImageRef ImageFrom(const json& row, std::string_view source, std::size_t line) {
  ImageRef image;
  if (auto it = row.find("image_id"); it != row.end()) image.id = IdString(*it);
  if (auto it = row.find("image"); it != row.end() && it->is_string()) {
    image.uri = it->get<std::string>();
  }
  if (image.id.empty()) image.id = image.uri;
  if (image.id.empty()) {
    throw Error(ErrorKind::kParse,
                Where(source, line) + ": missing 'image_id' or 'image'");
  }
  if (image.uri.empty()) image.uri = image.id;
  return image;
}

json ImageJson(const ImageRef& image) {
  return json{{"image_id", image.id}, {"image", image.uri}};
}

template <typename Record, typename Fn>
std::string LinesOf(std::span<const Record> records, Fn&& to_json) {
  std::string out;
  for (const auto& r : records) {
    out += to_json(r).dump();
    out += '\n';
  }
  return out;
}

std::uint64_t SplitMix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

// Picks `count` items from `pool` without replacement (partial Fisher-Yates).
std::vector<std::size_t> Pick(std::vector<std::size_t> pool, std::size_t count,
                              SplitRng& rng) {
  for (std::size_t i = 0; i < count; ++i) {
    std::swap(pool[i], pool[i + rng.Below(pool.size() - i)]);
  }
  pool.resize(count);
  return pool;
}

}  // namespace

// ---------------------------------------------------------------------------

std::string_view ItmLabelName(ItmLabel label) {
  return label == ItmLabel::kPositive ? "positive" : "negative";
}

std::string_view NegativeKindName(NegativeKind kind) {
  switch (kind) {
    case NegativeKind::kHnAtom: return "HN-Atom";
    case NegativeKind::kHnComp: return "HN-Comp";
    case NegativeKind::kHnAtomComp: return "HN-Atom+Comp";
    case NegativeKind::kReplaceObject: return "replace_obj";
    case NegativeKind::kReplaceAttribute: return "replace_att";
    case NegativeKind::kReplaceRelation: return "replace_rel";
    case NegativeKind::kSwapObject: return "swap_obj";
    case NegativeKind::kSwapAttribute: return "swap_att";
    case NegativeKind::kAddObject: return "add_obj";
    case NegativeKind::kAddAttribute: return "add_att";
  }
  return "";
}

std::optional<NegativeKind> ParseNegativeKind(std::string_view name) {
  for (int k = 0; k <= static_cast<int>(NegativeKind::kAddAttribute); ++k) {
    const auto kind = static_cast<NegativeKind>(k);
    if (NegativeKindName(kind) == name) return kind;
  }
  return std::nullopt;
}

std::string_view InstructionTypeName(InstructionType type) {
  switch (type) {
    case InstructionType::kDetailedDescription: return "detailed_description";
    case InstructionType::kComplexQuestion: return "complex_question";
    case InstructionType::kConversation: return "conversation";
  }
  return "";
}

std::optional<InstructionType> ParseInstructionType(std::string_view name) {
  if (name == "detailed_description" || name == "detail") {
    return InstructionType::kDetailedDescription;
  }
  if (name == "complex_question" || name == "complex") {
    return InstructionType::kComplexQuestion;
  }
  if (name == "conversation" || name == "conv") {
    return InstructionType::kConversation;
  }
  return std::nullopt;
}

// ---------------------------------------------------------------------------
// File helpers.

std::string ReadTextFile(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::kIo, "cannot open '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void WriteTextFile(const std::string& path, std::string_view contents) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorKind::kIo, "cannot write '" + path + "'");
  out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
  if (!out) throw Error(ErrorKind::kIo, "short write to '" + path + "'");
}

// ---------------------------------------------------------------------------
// Captions.

std::vector<CaptionRecord> ParseCocoCaptions(std::string_view captions_json,
                                             std::string_view instances_json,
                                             const ObjectVocabulary& vocab) {
  json captions_doc;
  json instances_doc;
  try {
    captions_doc = json::parse(captions_json);
    instances_doc = json::parse(instances_json);
  } catch (const json::parse_error& e) {
    throw Error(ErrorKind::kParse, std::string("COCO document: ") + e.what());
  }
  if (!captions_doc.is_object() || !captions_doc.contains("images") ||
      !captions_doc["images"].is_array()) {
    throw Error(ErrorKind::kParse, "COCO document: missing 'images' array");
  }

  std::vector<CaptionRecord> records;
  std::unordered_map<std::string, std::size_t> by_id;
  const auto& images = captions_doc["images"];
  for (std::size_t i = 0; i < images.size(); ++i) {
    const auto& img = images[i];
    const std::string id = img.is_object() && img.contains("id")
                               ? IdString(img["id"])
                               : std::string();
    if (id.empty()) {
      throw Error(ErrorKind::kParse,
                  "COCO document: images[" + std::to_string(i) + "] has no id");
    }
    CaptionRecord rec;
    rec.image.id = id;
    rec.image.uri = img.value("file_name", img.value("coco_url", id));
    by_id.emplace(id, records.size());
    records.push_back(std::move(rec));
  }

  std::unordered_map<std::string, std::string> category_names;
  if (auto it = instances_doc.find("categories"); it != instances_doc.end()) {
    for (std::size_t i = 0; i < it->size(); ++i) {
      const auto& cat = (*it)[i];
      if (!cat.is_object() || !cat.contains("id") || !cat.contains("name") ||
          !cat["name"].is_string()) {
        throw Error(ErrorKind::kParse, "COCO document: categories[" +
                                           std::to_string(i) + "] is malformed");
      }
      category_names[IdString(cat["id"])] = cat["name"].get<std::string>();
    }
  }

  auto lookup_image = [&](const json& ann, const std::string& where) -> CaptionRecord& {
    const std::string id = ann.contains("image_id") ? IdString(ann["image_id"]) : "";
    auto it = by_id.find(id);
    if (it == by_id.end()) {
      throw Error(ErrorKind::kParse,
                  "COCO document: " + where + " refers to unknown image '" + id + "'");
    }
    return records[it->second];
  };

  auto scan = [&](const json& doc, bool take_captions) {
    auto it = doc.find("annotations");
    if (it == doc.end()) return;
    if (!it->is_array()) {
      throw Error(ErrorKind::kParse, "COCO document: 'annotations' is not an array");
    }
    for (std::size_t i = 0; i < it->size(); ++i) {
      const auto& ann = (*it)[i];
      const std::string where = "annotations[" + std::to_string(i) + "]";
      if (!ann.is_object()) {
        throw Error(ErrorKind::kParse, "COCO document: " + where + " is not an object");
      }
      if (ann.contains("caption")) {
        if (!take_captions) continue;
        if (!ann["caption"].is_string()) {
          throw Error(ErrorKind::kParse, "COCO document: " + where + " caption is not a string");
        }
        lookup_image(ann, where).references.push_back(ann["caption"].get<std::string>());
      } else if (ann.contains("category_id")) {
        auto& rec = lookup_image(ann, where);
        const std::string cat_id = IdString(ann["category_id"]);
        auto name = category_names.find(cat_id);
        if (name == category_names.end()) {
          throw Error(ErrorKind::kParse,
                      "COCO document: " + where + " has unknown category id " + cat_id);
        }
        auto canonical = vocab.Canonicalize(name->second);
        if (!canonical) {
          throw Error(ErrorKind::kVocabulary, "COCO category '" + name->second +
                                                  "' is not in the object vocabulary");
        }
        rec.gt_objects.insert(*canonical);
      } else {
        throw Error(ErrorKind::kParse, "COCO document: " + where +
                                           " has neither 'caption' nor 'category_id'");
      }
    }
  };
  scan(captions_doc, /*take_captions=*/true);
  if (instances_json.data() != captions_json.data() ||
      instances_json.size() != captions_json.size()) {
    scan(instances_doc, /*take_captions=*/false);
  }

  for (const auto& rec : records) {
    if (rec.references.empty()) {
      throw Error(ErrorKind::kParse,
                  "COCO document: image '" + rec.image.id + "' has no captions");
    }
  }
  return records;
}

std::vector<CaptionRecord> LoadCocoCaptions(const std::string& captions_path,
                                            const std::string& instances_path,
                                            const ObjectVocabulary& vocab) {
  const std::string captions = ReadTextFile(captions_path);
  if (instances_path.empty() || instances_path == captions_path) {
    return ParseCocoCaptions(captions, captions, vocab);
  }
  return ParseCocoCaptions(captions, ReadTextFile(instances_path), vocab);
}

std::vector<CaptionRecord> ParseCaptions(std::string_view jsonl,
                                         const ObjectVocabulary& vocab,
                                         std::string_view source) {
  std::vector<CaptionRecord> records;
  ForEachJsonLine(jsonl, source, [&](const json& row, std::size_t line) {
    CaptionRecord rec;
    rec.image = ImageFrom(row, source, line);
    rec.references = RequireStringList(row, "references", source, line);
    if (rec.references.empty()) {
      throw Error(ErrorKind::kParse, Where(source, line) + ": no reference captions");
    }
    if (row.contains("objects")) {
      for (const auto& obj : RequireStringList(row, "objects", source, line)) {
        auto canonical = vocab.Canonicalize(obj);
        if (!canonical) {
          throw Error(ErrorKind::kVocabulary, Where(source, line) + ": object '" +
                                                  obj + "' is not in the vocabulary");
        }
        rec.gt_objects.insert(*canonical);
      }
    }
    records.push_back(std::move(rec));
  });
  return records;
}

std::vector<CaptionRecord> LoadCaptions(const std::string& path,
                                        const ObjectVocabulary& vocab) {
  return ParseCaptions(ReadTextFile(path), vocab, path);
}

std::string ToJsonl(std::span<const CaptionRecord> records) {
  return LinesOf(records, [](const CaptionRecord& r) {
    json j = ImageJson(r.image);
    j["references"] = r.references;
    j["objects"] = r.gt_objects;
    return j;
  });
}

// ---------------------------------------------------------------------------
// VQA / abstention.

std::vector<VqaRecord> ParseVqa(std::string_view jsonl,
                                std::string_view abstention_keyword,
                                std::string_view source) {
  const std::string keyword = NormalizeAnswer(abstention_keyword);
  std::vector<VqaRecord> records;
  ForEachJsonLine(jsonl, source, [&](const json& row, std::size_t line) {
    VqaRecord rec;
    rec.image = ImageFrom(row, source, line);
    rec.question = RequireString(row, "question", source, line);
    rec.answer = RequireString(row, "answer", source, line);
    const bool is_keyword = NormalizeAnswer(rec.answer) == keyword;
    if (auto it = row.find("absurd"); it != row.end()) {
      if (!it->is_boolean()) {
        throw Error(ErrorKind::kParse, Where(source, line) + ": 'absurd' must be boolean");
      }
      rec.absurd = it->get<bool>();
      if (rec.absurd != is_keyword) {
        throw Error(ErrorKind::kConsistency,
                    Where(source, line) + ": absurd=" + (rec.absurd ? "true" : "false") +
                        " but answer '" + rec.answer + "'");
      }
    } else {
      rec.absurd = is_keyword;
    }
    if (auto it = row.find("qtype"); it != row.end() && it->is_string()) {
      rec.qtype = it->get<std::string>();
    }
    records.push_back(std::move(rec));
  });
  return records;
}

std::vector<VqaRecord> LoadVqa(const std::string& path,
                               std::string_view abstention_keyword) {
  return ParseVqa(ReadTextFile(path), abstention_keyword, path);
}

std::string ToJsonl(std::span<const VqaRecord> records) {
  return LinesOf(records, [](const VqaRecord& r) {
    json j = ImageJson(r.image);
    j["question"] = r.question;
    j["answer"] = r.answer;
    j["absurd"] = r.absurd;
    if (r.qtype) j["qtype"] = *r.qtype;
    return j;
  });
}

// ---------------------------------------------------------------------------
// Image-text matching.

std::vector<ItmRecord> ParseItm(std::string_view jsonl, std::string_view source) {
  std::vector<ItmRecord> records;
  ForEachJsonLine(jsonl, source, [&](const json& row, std::size_t line) {
    ItmRecord rec;
    rec.image = ImageFrom(row, source, line);
    rec.caption = RequireString(row, "caption", source, line);
    const std::string label = RequireString(row, "label", source, line);
    if (label == "positive") {
      rec.label = ItmLabel::kPositive;
    } else if (label == "negative") {
      rec.label = ItmLabel::kNegative;
    } else {
      throw Error(ErrorKind::kCategory, Where(source, line) + ": unknown label '" +
                                            label + "'");
    }
    auto kind_it = row.find("negative_kind");
    const bool has_kind = kind_it != row.end() && !kind_it->is_null();
    if (has_kind) {
      if (!kind_it->is_string()) {
        throw Error(ErrorKind::kParse,
                    Where(source, line) + ": 'negative_kind' must be a string");
      }
      auto kind = ParseNegativeKind(kind_it->get<std::string>());
      if (!kind) {
        throw Error(ErrorKind::kCategory, Where(source, line) +
                                              ": unknown negative kind '" +
                                              kind_it->get<std::string>() + "'");
      }
      rec.negative_kind = kind;
    }
    if (has_kind != (rec.label == ItmLabel::kNegative)) {
      throw Error(ErrorKind::kConsistency,
                  Where(source, line) +
                      ": negative_kind must be present exactly for negative captions");
    }
    records.push_back(std::move(rec));
  });
  return records;
}

std::vector<ItmRecord> LoadItm(const std::string& path) {
  return ParseItm(ReadTextFile(path), path);
}

std::string ToJsonl(std::span<const ItmRecord> records) {
  return LinesOf(records, [](const ItmRecord& r) {
    json j = ImageJson(r.image);
    j["caption"] = r.caption;
    j["label"] = ItmLabelName(r.label);
    if (r.negative_kind) j["negative_kind"] = NegativeKindName(*r.negative_kind);
    return j;
  });
}

// ---------------------------------------------------------------------------
// Explanations.

std::vector<ExplainRecord> ParseExplanations(std::string_view jsonl,
                                             std::string_view source) {
  std::vector<ExplainRecord> records;
  ForEachJsonLine(jsonl, source, [&](const json& row, std::size_t line) {
    ExplainRecord rec;
    rec.image = ImageFrom(row, source, line);
    rec.question = RequireString(row, "question", source, line);
    rec.answer = RequireString(row, "answer", source, line);
    rec.explanations = RequireStringList(row, "explanations", source, line);
    if (rec.explanations.empty()) {
      throw Error(ErrorKind::kConsistency, Where(source, line) + ": no explanations");
    }
    if (auto it = row.find("negative_explanation"); it != row.end() && it->is_string()) {
      rec.negative_explanation = it->get<std::string>();
    }
    records.push_back(std::move(rec));
  });
  return records;
}

std::vector<ExplainRecord> LoadExplanations(const std::string& path) {
  return ParseExplanations(ReadTextFile(path), path);
}

std::string ToJsonl(std::span<const ExplainRecord> records) {
  return LinesOf(records, [](const ExplainRecord& r) {
    json j = ImageJson(r.image);
    j["question"] = r.question;
    j["answer"] = r.answer;
    j["explanations"] = r.explanations;
    if (r.negative_explanation) j["negative_explanation"] = *r.negative_explanation;
    return j;
  });
}

// ---------------------------------------------------------------------------
// Instructions.

std::vector<InstructionRecord> ParseInstructions(std::string_view jsonl,
                                                 std::string_view source) {
  std::vector<InstructionRecord> records;
  ForEachJsonLine(jsonl, source, [&](const json& row, std::size_t line) {
    InstructionRecord rec;
    rec.image = ImageFrom(row, source, line);
    rec.instruction = RequireString(row, "instruction", source, line);
    rec.gt_response = RequireString(row, "gt_response", source, line);
    const std::string itype = RequireString(row, "itype", source, line);
    auto parsed = ParseInstructionType(itype);
    if (!parsed) {
      throw Error(ErrorKind::kCategory, Where(source, line) +
                                            ": unknown instruction type '" + itype + "'");
    }
    rec.itype = *parsed;
    records.push_back(std::move(rec));
  });
  return records;
}

std::vector<InstructionRecord> LoadInstructions(const std::string& path) {
  return ParseInstructions(ReadTextFile(path), path);
}

std::string ToJsonl(std::span<const InstructionRecord> records) {
  return LinesOf(records, [](const InstructionRecord& r) {
    json j = ImageJson(r.image);
    j["instruction"] = r.instruction;
    j["gt_response"] = r.gt_response;
    j["itype"] = InstructionTypeName(r.itype);
    return j;
  });
}

// ---------------------------------------------------------------------------
// Sampling.

BalancePolicy BalancePolicy::Even(const std::vector<std::string>& labels) {
  BalancePolicy policy;
  policy.kind = Kind::kByLabel;
  for (const auto& l : labels) {
    policy.targets[l] = 1.0 / static_cast<double>(labels.size());
  }
  return policy;
}

SplitRng SplitRng::Derive(std::uint64_t seed, std::uint64_t stream,
                          std::uint64_t ordinal) {
  return SplitRng(SplitMix64(seed ^ SplitMix64(stream ^ SplitMix64(ordinal))));
}

std::size_t SplitRng::Below(std::size_t bound) {
  const std::uint64_t n = bound;
  const std::uint64_t limit = UINT64_MAX - (UINT64_MAX % n);
  std::uint64_t x;
  do {
    x = engine_();
  } while (x >= limit);
  return static_cast<std::size_t>(x % n);
}

std::vector<std::size_t> Apportion(std::size_t total,
                                   const std::vector<double>& weights) {
  double sum = 0.0;
  for (double w : weights) sum += w;
  std::vector<std::size_t> counts(weights.size(), 0);
  if (weights.empty() || sum <= 0.0) return counts;
  std::vector<std::pair<double, std::size_t>> remainders;
  std::size_t assigned = 0;
  for (std::size_t i = 0; i < weights.size(); ++i) {
    const double exact = static_cast<double>(total) * weights[i] / sum;
    counts[i] = static_cast<std::size_t>(std::floor(exact + 1e-9));
    assigned += counts[i];
    remainders.emplace_back(exact - static_cast<double>(counts[i]), i);
  }
  std::stable_sort(remainders.begin(), remainders.end(),
                   [](const auto& a, const auto& b) { return a.first > b.first; });
  for (std::size_t k = 0; assigned < total && k < remainders.size(); ++k, ++assigned) {
    ++counts[remainders[k].second];
  }
  return counts;
}

namespace {

void CheckTargets(const BalancePolicy& policy) {
  if (policy.targets.empty()) {
    throw Error(ErrorKind::kInvalidArgument, "by-label balancing needs targets");
  }
  double sum = 0.0;
  for (const auto& [label, t] : policy.targets) {
    if (t < 0.0) {
      throw Error(ErrorKind::kInvalidArgument, "negative target for '" + label + "'");
    }
    sum += t;
  }
  if (std::abs(sum - 1.0) > 1e-9) {
    throw Error(ErrorKind::kInvalidArgument, "balance targets must sum to 1");
  }
}

}  // namespace

SampledSplit SampleSplit(std::string_view dataset,
                         std::span<const std::string> labels,
                         std::size_t n_queries, std::uint64_t seed,
                         const BalancePolicy& policy) {
  const std::size_t n = labels.size();
  if (n_queries >= n) {
    throw Error(ErrorKind::kSize, "n_queries (" + std::to_string(n_queries) +
                                      ") must be smaller than the record count (" +
                                      std::to_string(n) + ")");
  }
  SampledSplit split;
  split.dataset = std::string(dataset);
  split.seed = seed;
  SplitRng rng(seed);

  auto ids = [&](const std::vector<std::size_t>& indices) {
    std::vector<RecordId> out;
    out.reserve(indices.size());
    for (std::size_t i : indices) out.push_back({split.dataset, i});
    return out;
  };

  if (policy.kind == BalancePolicy::Kind::kNatural) {
    std::vector<std::size_t> order(n);
    for (std::size_t i = 0; i < n; ++i) order[i] = i;
    rng.Shuffle(order);
    split.queries = ids({order.begin(), order.begin() + static_cast<long>(n_queries)});
    split.demo_pool = ids({order.begin() + static_cast<long>(n_queries), order.end()});
    return split;
  }

  CheckTargets(policy);
  std::map<std::string, std::vector<std::size_t>> groups;
  for (std::size_t i = 0; i < n; ++i) groups[labels[i]].push_back(i);
  for (auto& [label, members] : groups) rng.Shuffle(members);

  // Queries keep the corpus label proportions.
  std::vector<double> sizes;
  for (const auto& [label, members] : groups) {
    sizes.push_back(static_cast<double>(members.size()));
  }
  const auto query_counts = Apportion(n_queries, sizes);
  std::vector<std::size_t> queries;
  std::map<std::string, std::vector<std::size_t>> remaining;
  std::size_t g = 0;
  for (auto& [label, members] : groups) {
    const std::size_t take = std::min(query_counts[g++], members.size());
    queries.insert(queries.end(), members.begin(), members.begin() + static_cast<long>(take));
    remaining[label].assign(members.begin() + static_cast<long>(take), members.end());
  }
  rng.Shuffle(queries);

  std::vector<double> weights;
  std::vector<std::size_t> available;
  std::size_t total_available = 0;
  for (const auto& [label, t] : policy.targets) {
    weights.push_back(t);
    const std::size_t avail = remaining.count(label) ? remaining[label].size() : 0;
    available.push_back(avail);
    total_available += avail;
    if (t > 0.0 && avail == 0) {
      throw Error(ErrorKind::kBalance, "no records left for label '" + label + "'");
    }
  }

  auto feasible = [&](const std::vector<std::size_t>& counts) {
    for (std::size_t i = 0; i < counts.size(); ++i) {
      if (counts[i] > available[i]) return false;
    }
    return true;
  };

  std::size_t pool_size;
  std::vector<std::size_t> counts;
  if (policy.pool_size) {
    pool_size = *policy.pool_size;
    counts = Apportion(pool_size, weights);
    if (!feasible(counts)) {
      throw Error(ErrorKind::kBalance, "cannot fill a balanced pool of " +
                                           std::to_string(pool_size));
    }
  } else {
    pool_size = total_available;
    for (std::size_t i = 0; i < weights.size(); ++i) {
      if (weights[i] > 0.0) {
        pool_size = std::min(pool_size, static_cast<std::size_t>(std::floor(
                                            static_cast<double>(available[i]) / weights[i] + 1e-9)));
      }
    }
    counts = Apportion(pool_size, weights);
    while (pool_size > 0 && !feasible(counts)) counts = Apportion(--pool_size, weights);
    if (pool_size == 0) throw Error(ErrorKind::kBalance, "balanced pool is empty");
  }

  std::vector<std::size_t> pool;
  std::size_t k = 0;
  for (const auto& [label, t] : policy.targets) {
    const auto& members = remaining[label];
    pool.insert(pool.end(), members.begin(), members.begin() + static_cast<long>(counts[k++]));
  }
  rng.Shuffle(pool);
  split.queries = ids(queries);
  split.demo_pool = ids(pool);
  return split;
}

std::vector<std::size_t> DrawDemonstrations(std::span<const std::size_t> candidates,
                                            std::span<const std::string> labels,
                                            std::size_t n,
                                            const BalancePolicy& policy,
                                            SplitRng& rng) {
  if (n > candidates.size()) {
    throw Error(ErrorKind::kSize, "cannot draw " + std::to_string(n) +
                                      " demonstrations from " +
                                      std::to_string(candidates.size()));
  }
  if (policy.kind == BalancePolicy::Kind::kNatural) {
    return Pick({candidates.begin(), candidates.end()}, n, rng);
  }
  CheckTargets(policy);
  std::vector<double> weights;
  for (const auto& [label, t] : policy.targets) weights.push_back(t);
  const auto counts = Apportion(n, weights);

  std::vector<std::size_t> out;
  std::size_t k = 0;
  for (const auto& [label, t] : policy.targets) {
    std::vector<std::size_t> group;
    for (std::size_t c : candidates) {
      if (labels[c] == label) group.push_back(c);
    }
    const std::size_t want = counts[k++];
    if (want > group.size()) {
      throw Error(ErrorKind::kBalance, "need " + std::to_string(want) + " '" + label +
                                           "' demonstrations, have " +
                                           std::to_string(group.size()));
    }
    auto picked = Pick(std::move(group), want, rng);
    out.insert(out.end(), picked.begin(), picked.end());
  }
  rng.Shuffle(out);
  return out;
}

std::string BalanceLabel(const CaptionRecord&) { return "all"; }
std::string BalanceLabel(const VqaRecord& r) { return r.absurd ? "absurd" : "relevant"; }
std::string BalanceLabel(const ItmRecord& r) { return std::string(ItmLabelName(r.label)); }
std::string BalanceLabel(const ExplainRecord&) { return "all"; }
std::string BalanceLabel(const InstructionRecord& r) {
  return std::string(InstructionTypeName(r.itype));
}

}  // namespace evalign
