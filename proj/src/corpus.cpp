#include "nesum/corpus.hpp"

#include <algorithm>
#include <cstdio>
#include <unordered_set>

#include <json.hpp>

#include "nesum/rng.hpp"
#include "nesum/utf8.hpp"

namespace nesum {

using nlohmann::json;

// ---------------------------------------------------------------------------
// Entity types
// ---------------------------------------------------------------------------

namespace {
constexpr char kTypeCodes[kEntityTypeCount] = {'A', 'G', 'C', 'M', 'R', 'P', 'T'};
constexpr std::string_view kTypeNames[kEntityTypeCount] = {
    "Numbers in addresses", "Geographical names", "Institutions",
    "Media names",          "Artifact names",     "Personal names",
    "Time expressions",
};
}  // namespace

char entity_type_code(EntityType t) { return kTypeCodes[static_cast<int>(t)]; }

EntityType entity_type_from_code(char c) {
  for (int i = 0; i < kEntityTypeCount; ++i)
    if (kTypeCodes[i] == c) return static_cast<EntityType>(i);
  throw DataError(std::string("unknown entity type code '") + c + "'");
}

std::string_view entity_type_name(EntityType t) {
  return kTypeNames[static_cast<int>(t)];
}

IobTag parse_iob_tag(std::string_view s) {
  if (s == "O") return IobTag::outside();
  if (s.size() == 3 && s[1] == '-' && (s[0] == 'B' || s[0] == 'I')) {
    EntityType t = entity_type_from_code(s[2]);
    return s[0] == 'B' ? IobTag::begin(t) : IobTag::inside(t);
  }
  throw DataError("unknown IOB2 tag string '" + std::string(s) + "'");
}

std::string to_string(const IobTag& tag) {
  switch (tag.kind) {
    case IobTag::Kind::O:
      return "O";
    case IobTag::Kind::B:
      return std::string("B-") + entity_type_code(tag.type);
    case IobTag::Kind::I:
      return std::string("I-") + entity_type_code(tag.type);
  }
  return "O";
}

std::size_t repair_iob2(std::vector<IobTag>& tags) {
  std::size_t repairs = 0;
  for (std::size_t i = 0; i < tags.size(); ++i) {
    if (tags[i].kind != IobTag::Kind::I) continue;
    bool ok = i > 0 && tags[i - 1].is_entity() && tags[i - 1].type == tags[i].type;
    if (!ok) {
      tags[i].kind = IobTag::Kind::B;
      ++repairs;
    }
  }
  return repairs;
}

bool is_iob2_wellformed(const std::vector<IobTag>& tags) {
  auto copy = tags;
  return repair_iob2(copy) == 0;
}

std::vector<EntitySpan> decode_entity_spans(const std::vector<IobTag>& tags) {
  std::vector<EntitySpan> spans;
  for (std::size_t i = 0; i < tags.size(); ++i) {
    if (tags[i].kind != IobTag::Kind::B) continue;
    std::size_t end = i + 1;
    while (end < tags.size() && tags[end].kind == IobTag::Kind::I &&
           tags[end].type == tags[i].type)
      ++end;
    spans.push_back({i, end, tags[i].type});
  }
  return spans;
}

std::vector<IobTag> encode_entity_spans(std::size_t length,
                                        const std::vector<EntitySpan>& spans) {
  std::vector<IobTag> tags(length, IobTag::outside());
  for (const auto& sp : spans) {
    tags[sp.begin] = IobTag::begin(sp.type);
    for (std::size_t i = sp.begin + 1; i < sp.end; ++i)
      tags[i] = IobTag::inside(sp.type);
  }
  return tags;
}

// ---------------------------------------------------------------------------
// Documents
// ---------------------------------------------------------------------------

std::string_view to_string(Split s) {
  switch (s) {
    case Split::train:
      return "train";
    case Split::dev:
      return "dev";
    case Split::test:
      return "test";
    case Split::oodtest:
      return "oodtest";
  }
  return "train";
}

std::optional<Split> parse_split(std::string_view s) {
  if (s == "train") return Split::train;
  if (s == "dev") return Split::dev;
  if (s == "test") return Split::test;
  if (s == "oodtest") return Split::oodtest;
  return std::nullopt;
}

std::string_view to_string(Field f) {
  switch (f) {
    case Field::text:
      return "text";
    case Field::headline:
      return "headline";
    case Field::abstract:
      return "abstract";
  }
  return "text";
}

std::optional<Field> parse_field(std::string_view s) {
  if (s == "text") return Field::text;
  if (s == "headline") return Field::headline;
  if (s == "abstract") return Field::abstract;
  return std::nullopt;
}

const std::string& Document::field(Field f) const {
  switch (f) {
    case Field::headline:
      return headline;
    case Field::abstract:
      return abstract;
    case Field::text:
    default:
      return text;
  }
}

std::string make_doc_id(std::string_view url) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx",
                static_cast<unsigned long long>(fnv1a64(url)));
  return buf;
}

// ---------------------------------------------------------------------------
// Tokenizer
// ---------------------------------------------------------------------------

namespace {

bool is_detachable(char32_t cp) {
  switch (cp) {
    case U'.':
    case U',':
    case U'!':
    case U'?':
    case U';':
    case U':':
    case U'"':
    case U'\'':
    case U'(':
    case U')':
    case 0x00AB:  // «
    case 0x00BB:  // »
    case 0x201E:  // „
    case 0x201C:  // “
    case 0x2013:  // –
    case 0x2014:  // —
      return true;
    default:
      return false;
  }
}

void emit_chunk(const std::vector<char32_t>& cps, std::size_t begin,
                std::size_t end, std::vector<std::string>& out) {
  std::size_t lo = begin, hi = end;
  std::vector<char32_t> one(1);
  while (lo < hi && is_detachable(cps[lo])) {
    one[0] = cps[lo++];
    out.push_back(utf8::encode(one));
  }
  std::vector<std::string> trailing;
  while (hi > lo && is_detachable(cps[hi - 1])) {
    one[0] = cps[--hi];
    trailing.push_back(utf8::encode(one));
  }
  if (lo < hi)
    out.push_back(utf8::encode({cps.begin() + lo, cps.begin() + hi}));
  out.insert(out.end(), trailing.rbegin(), trailing.rend());
}

}  // namespace

std::vector<std::string> tokenize(std::string_view text) {
  std::vector<std::string> out;
  const auto cps = utf8::decode(text);
  std::size_t i = 0;
  while (i < cps.size()) {
    while (i < cps.size() && utf8::is_space(cps[i])) ++i;
    std::size_t begin = i;
    while (i < cps.size() && !utf8::is_space(cps[i])) ++i;
    if (i > begin) emit_chunk(cps, begin, i, out);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Sentence splitting
// ---------------------------------------------------------------------------

const std::vector<std::string>& sentence_abbreviations() {
  static const std::vector<std::string> abbrevs = {
      "č",    "čp",   "tzv",  "tj",   "tzn",  "r",    "s",    "str",
      "mj",   "např", "popř", "resp", "př",   "cca",  "sv",   "ul",
      "nám",  "okr",  "hod",  "min",  "atd",  "apod", "aj",   "srov",
      "p",    "pí",   "ing",  "mgr",  "bc",   "judr", "mudr", "phdr",
      "doc",  "prof", "gen",  "plk",  "kpt",  "roč",  "st",   "stol",
  };
  return abbrevs;
}

namespace {

bool is_terminator(const std::string& tok) {
  return tok == "." || tok == "!" || tok == "?";
}

bool is_opening_quote(char32_t cp) {
  return cp == 0x201E /* „ */ || cp == 0x00AB /* « */ || cp == U'"' ||
         cp == 0x201A /* ‚ */;
}

bool suppressing_abbreviation(const std::string& before) {
  if (before.empty()) return false;
  const auto cps = utf8::decode(before);
  if (cps.size() == 1 && utf8::is_upper(cps[0])) return true;  // initials
  const std::string low = utf8::lower(before);
  const auto& abbrevs = sentence_abbreviations();
  return std::find(abbrevs.begin(), abbrevs.end(), low) != abbrevs.end();
}

}  // namespace

std::vector<TokenRange> split_sentences(const std::vector<std::string>& tokens) {
  std::vector<TokenRange> bounds;
  if (tokens.empty()) return bounds;
  std::size_t start = 0;
  for (std::size_t i = 0; i + 1 < tokens.size(); ++i) {
    if (!is_terminator(tokens[i])) continue;
    char32_t next = utf8::first_codepoint(tokens[i + 1]);
    if (!utf8::is_upper(next) && !is_opening_quote(next)) continue;
    if (i > start && suppressing_abbreviation(tokens[i - 1])) continue;
    bounds.push_back({start, i + 1});
    start = i + 1;
  }
  bounds.push_back({start, tokens.size()});
  return bounds;
}

// ---------------------------------------------------------------------------
// Annotations
// ---------------------------------------------------------------------------

AnnotatedText attach_annotations(const std::vector<std::string>& doc_tokens,
                                 const AnnotationRecord& record,
                                 std::size_t* repairs) {
  if (record.tokens.size() != doc_tokens.size())
    throw DataError("annotation for doc " + record.doc_id + " has " +
                    std::to_string(record.tokens.size()) + " tokens, document has " +
                    std::to_string(doc_tokens.size()));
  for (std::size_t i = 0; i < doc_tokens.size(); ++i)
    if (record.tokens[i] != doc_tokens[i])
      throw DataError("annotation for doc " + record.doc_id +
                      " diverges at token " + std::to_string(i) + ": '" +
                      record.tokens[i] + "' vs '" + doc_tokens[i] + "'");
  if (record.tags.size() != doc_tokens.size())
    throw DataError("annotation for doc " + record.doc_id + " has " +
                    std::to_string(record.tags.size()) + " tags for " +
                    std::to_string(doc_tokens.size()) + " tokens");

  AnnotatedText out;
  out.tokens = doc_tokens;
  out.sentence_bounds = split_sentences(doc_tokens);
  out.tags.reserve(record.tags.size());
  for (const auto& s : record.tags) out.tags.push_back(parse_iob_tag(s));
  std::size_t n = repair_iob2(out.tags);
  if (repairs) *repairs = n;
  return out;
}

std::size_t entity_token_count(const AnnotatedText& a, TokenRange range) {
  if (range.end < range.begin || range.end > a.tags.size())
    throw ArgumentError("token range out of bounds");
  std::size_t count = 0;
  for (std::size_t i = range.begin; i < range.end; ++i)
    if (a.tags[i].is_entity()) ++count;
  return count;
}

void EntityStats::add(const AnnotatedText& a) {
  bool any = false;
  for (std::size_t i = 0; i < a.tags.size(); ++i) {
    if (a.tags[i].is_entity()) any = true;
    if (a.tags[i].kind == IobTag::Kind::B) {
      ++counts[static_cast<int>(a.tags[i].type)];
      ++total;
    }
  }
  if (!any) ++docs_without_entity;
  ++docs_total;
}

void EntityStats::merge(const EntityStats& other) {
  for (int i = 0; i < kEntityTypeCount; ++i) counts[i] += other.counts[i];
  total += other.total;
  docs_without_entity += other.docs_without_entity;
  docs_total += other.docs_total;
}

// ---------------------------------------------------------------------------
// JSONL corpus
// ---------------------------------------------------------------------------

namespace {

std::string trimmed(const std::string& s) {
  std::size_t b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  std::size_t e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

}  // namespace

CorpusReader::CorpusReader(const std::string& path, std::optional<Split> filter)
    : in_(path), filter_(filter) {
  if (!in_) throw IoError("cannot open corpus file: " + path);
}

std::optional<Document> CorpusReader::next() {
  std::string line;
  while (std::getline(in_, line)) {
    ++line_no_;
    if (trimmed(line).empty()) continue;
    json j;
    try {
      j = json::parse(line);
    } catch (const json::parse_error& e) {
      line_errors_.push_back("line " + std::to_string(line_no_) + ": " + e.what());
      ++skipped_;
      continue;
    }
    if (!j.is_object() || !j.contains("headline") || !j.contains("abstract") ||
        !j.contains("text") || !j.contains("url") ||
        !j["headline"].is_string() || !j["abstract"].is_string() ||
        !j["text"].is_string() || !j["url"].is_string()) {
      ++skipped_;
      continue;
    }
    Document d;
    d.headline = j["headline"].get<std::string>();
    d.abstract = j["abstract"].get<std::string>();
    d.text = j["text"].get<std::string>();
    d.url = j["url"].get<std::string>();
    d.doc_id = make_doc_id(d.url);
    if (j.contains("split")) {
      if (!j["split"].is_string()) {
        ++skipped_;
        continue;
      }
      auto sp = parse_split(j["split"].get<std::string>());
      if (!sp) {
        ++skipped_;
        continue;
      }
      d.split = *sp;
    }
    if (trimmed(d.headline).empty() || trimmed(d.text).empty()) {
      ++skipped_;
      continue;
    }
    if (filter_ && d.split != *filter_) continue;
    return d;
  }
  return std::nullopt;
}

std::vector<Document> load_corpus(const std::string& path,
                                  std::optional<Split> split_filter) {
  CorpusReader reader(path, split_filter);
  std::vector<Document> docs;
  while (auto d = reader.next()) docs.push_back(std::move(*d));
  return docs;
}

std::map<AnnotationKey, AnnotationRecord> load_annotations(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open annotation file: " + path);
  std::map<AnnotationKey, AnnotationRecord> out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (trimmed(line).empty()) continue;
    json j;
    try {
      j = json::parse(line);
    } catch (const json::parse_error& e) {
      throw DataError("annotation file line " + std::to_string(line_no) + ": " +
                      e.what());
    }
    AnnotationRecord rec;
    try {
      rec.doc_id = j.at("doc_id").get<std::string>();
      auto field = parse_field(j.at("field").get<std::string>());
      if (!field)
        throw DataError("annotation file line " + std::to_string(line_no) +
                        ": unknown field");
      rec.field = *field;
      rec.tokens = j.at("tokens").get<std::vector<std::string>>();
      rec.tags = j.at("tags").get<std::vector<std::string>>();
    } catch (const json::exception& e) {
      throw DataError("annotation file line " + std::to_string(line_no) + ": " +
                      e.what());
    }
    out[{rec.doc_id, rec.field}] = std::move(rec);
  }
  return out;
}

std::string annotation_to_json(const AnnotationRecord& rec) {
  json j;
  j["doc_id"] = rec.doc_id;
  j["field"] = std::string(to_string(rec.field));
  j["tokens"] = rec.tokens;
  j["tags"] = rec.tags;
  return j.dump();
}

}  // namespace nesum
