#pragma once

#include <array>
#include <cstdint>
#include <fstream>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "nesum/errors.hpp"

namespace nesum {

// ---------------------------------------------------------------------------
// Entity types and IOB2 tags
// ---------------------------------------------------------------------------

/// The seven CNEC-derived coarse entity types. Integer codes are stable and
/// part of the file formats (see entity_type_code).
enum class EntityType : int {
  NumbersInAddresses = 0,
  GeographicalNames = 1,
  Institutions = 2,
  MediaNames = 3,
  ArtifactNames = 4,
  PersonalNames = 5,
  TimeExpressions = 6,
};

inline constexpr int kEntityTypeCount = 7;

/// Single-character codes used in annotation files and gazetteers:
/// A, G, C, M, R, P, T (in enum order). Institutions is C and artifacts R
/// so no code collides with the bare I and O of the IOB alphabet.
char entity_type_code(EntityType t);
EntityType entity_type_from_code(char c);  // throws DataError on unknown code
std::string_view entity_type_name(EntityType t);

struct IobTag {
  enum class Kind { O, B, I };
  Kind kind = Kind::O;
  EntityType type = EntityType::NumbersInAddresses;  // meaningful only for B/I

  bool is_entity() const { return kind != Kind::O; }

  static IobTag outside() { return {}; }
  static IobTag begin(EntityType t) { return {Kind::B, t}; }
  static IobTag inside(EntityType t) { return {Kind::I, t}; }

  friend bool operator==(const IobTag&, const IobTag&) = default;
};

/// Parses "O", "B-<code>", "I-<code>". Throws DataError on anything else.
IobTag parse_iob_tag(std::string_view s);
std::string to_string(const IobTag& tag);

/// Repairs IOB2 violations in place: an I that follows O, start of sequence,
/// or a different entity type becomes a B of its own type. Returns the number
/// of repaired positions.
std::size_t repair_iob2(std::vector<IobTag>& tags);

/// True when the sequence needs no repairs.
bool is_iob2_wellformed(const std::vector<IobTag>& tags);

struct EntitySpan {
  std::size_t begin = 0;
  std::size_t end = 0;  // half-open
  EntityType type = EntityType::NumbersInAddresses;

  friend bool operator==(const EntitySpan&, const EntitySpan&) = default;
};

/// Decodes a well-formed IOB2 sequence into entity spans (one per B tag).
std::vector<EntitySpan> decode_entity_spans(const std::vector<IobTag>& tags);

/// Inverse of decode_entity_spans over `length` tokens.
std::vector<IobTag> encode_entity_spans(std::size_t length,
                                        const std::vector<EntitySpan>& spans);

// ---------------------------------------------------------------------------
// Documents
// ---------------------------------------------------------------------------

enum class Split { train, dev, test, oodtest };

std::string_view to_string(Split s);
std::optional<Split> parse_split(std::string_view s);

enum class Field { text, headline, abstract };

std::string_view to_string(Field f);
std::optional<Field> parse_field(std::string_view s);

struct Document {
  std::string doc_id;  // hex fnv1a64 of url
  std::string headline;
  std::string abstract;  // may be empty
  std::string text;
  Split split = Split::train;
  std::string url;

  const std::string& field(Field f) const;
};

/// Stable document id: 16 hex digits of fnv1a64(url).
std::string make_doc_id(std::string_view url);

// ---------------------------------------------------------------------------
// Tokenization and sentence splitting
// ---------------------------------------------------------------------------

/// Rule-based tokenizer: splits on Unicode whitespace, then repeatedly
/// detaches leading and trailing punctuation from each chunk as single-char
/// tokens. The detachable set is exactly . , ! ? ; : " ' ( ) « » „ “ – —
/// Characters inside a chunk are never touched, so numbers ("3,76") and
/// hyphenated words survive whole, and the concatenation of the tokens equals
/// the input with whitespace removed.
std::vector<std::string> tokenize(std::string_view text);

struct TokenRange {
  std::size_t begin = 0;
  std::size_t end = 0;  // half-open

  std::size_t size() const { return end - begin; }
  friend bool operator==(const TokenRange&, const TokenRange&) = default;
};

/// Sentence boundaries over a token sequence. A boundary falls after a token
/// in {".", "!", "?"} whose successor starts with an uppercase letter or an
/// opening quote („ « " ‚), unless the token before the terminator is a known
/// Czech abbreviation or a single uppercase initial. Ranges partition
/// [0, tokens.size()).
std::vector<TokenRange> split_sentences(const std::vector<std::string>& tokens);

/// The fixed abbreviation list consulted by split_sentences (lowercase, sans
/// trailing period). Exposed for documentation and tests.
const std::vector<std::string>& sentence_abbreviations();

// ---------------------------------------------------------------------------
// Annotated text
// ---------------------------------------------------------------------------

struct AnnotatedText {
  std::vector<std::string> tokens;
  std::vector<TokenRange> sentence_bounds;
  std::vector<IobTag> tags;
};

/// One line of an annotation JSONL file.
struct AnnotationRecord {
  std::string doc_id;
  Field field = Field::text;
  std::vector<std::string> tokens;
  std::vector<std::string> tags;
};

/// Aligns an annotation record onto tokens produced by tokenize().
/// Token counts and strings must match positionally; malformed IOB2 is
/// repaired (I -> B) and the repair count reported through `repairs` when
/// non-null. Throws DataError on misalignment.
AnnotatedText attach_annotations(const std::vector<std::string>& doc_tokens,
                                 const AnnotationRecord& record,
                                 std::size_t* repairs = nullptr);

/// Number of B/I-tagged tokens inside `range`. Throws ArgumentError when the
/// range exceeds the text.
std::size_t entity_token_count(const AnnotatedText& a, TokenRange range);

// ---------------------------------------------------------------------------
// Corpus statistics
// ---------------------------------------------------------------------------

/// Entity-span statistics over a document collection. Entities are counted
/// per B tag (one per span); docs_without_entity counts documents whose tag
/// sequence holds no entity token at all.
struct EntityStats {
  std::array<std::uint64_t, kEntityTypeCount> counts{};
  std::uint64_t total = 0;
  std::uint64_t docs_without_entity = 0;
  std::uint64_t docs_total = 0;

  void add(const AnnotatedText& a);
  void merge(const EntityStats& other);
};

// ---------------------------------------------------------------------------
// Corpus and annotation files (JSON Lines)
// ---------------------------------------------------------------------------

/// Streaming JSONL corpus reader. Each line is one document object with keys
/// headline, abstract, text, url and an optional split. Documents failing
/// validation are skipped and counted; malformed JSON lines are recorded with
/// their line number. Memory use is independent of corpus size.
class CorpusReader {
 public:
  explicit CorpusReader(const std::string& path,
                        std::optional<Split> split_filter = std::nullopt);

  /// Next valid document, or nullopt at end of file.
  std::optional<Document> next();

  std::size_t skipped() const { return skipped_; }
  const std::vector<std::string>& line_errors() const { return line_errors_; }

 private:
  std::ifstream in_;
  std::optional<Split> filter_;
  std::size_t line_no_ = 0;
  std::size_t skipped_ = 0;
  std::vector<std::string> line_errors_;
};

/// Convenience: reads a whole corpus into memory (fixtures, tests).
std::vector<Document> load_corpus(const std::string& path,
                                  std::optional<Split> split_filter = std::nullopt);

/// Key for annotation lookup.
struct AnnotationKey {
  std::string doc_id;
  Field field;

  friend auto operator<=>(const AnnotationKey&, const AnnotationKey&) = default;
};

/// Loads an annotation JSONL file into a map keyed by (doc_id, field).
std::map<AnnotationKey, AnnotationRecord> load_annotations(const std::string& path);

/// Serializes one annotation record as a single JSON line (no newline).
std::string annotation_to_json(const AnnotationRecord& rec);

}  // namespace nesum
