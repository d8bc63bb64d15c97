#ifndef PBEVAL_PABULIB_HPP
#define PBEVAL_PABULIB_HPP

#include "pbeval/model.hpp"

#include <filesystem>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

namespace pbeval {

// Fatal problem in a .pb file; `line` is 1-based, 0 when not line-specific.
struct ParseError : std::runtime_error {
  ParseError(int line_, const std::string& message)
      : std::runtime_error(line_ > 0 ? "line " + std::to_string(line_) + ": " + message : message),
        line(line_) {}
  int line;
};

enum class ParseMode { strict, lenient };

struct Diagnostic {
  int line = 0;
  std::string message;
};

// Raw sectioned view of a .pb file: one META, one PROJECTS, one VOTES
// section in that order, fields split on ';'.
struct PbRow {
  std::vector<std::string> fields;
  int line = 0;
};

struct PbSection {
  std::vector<std::string> header;
  std::vector<PbRow> rows;
  int line = 0;
};

struct PbDocument {
  std::vector<PbRow> meta;  // key/value rows, no header
  PbSection projects;
  PbSection votes;
};

PbDocument parse_document(std::string_view text);

struct ParseResult {
  Instance instance;
  Profile profile;
  std::vector<Diagnostic> diagnostics;  // non-fatal issues (lenient drops etc.)
};

ParseResult parse_pb(std::string_view text, ParseMode mode = ParseMode::strict);
ParseResult parse_pb_file(const std::filesystem::path& path, ParseMode mode = ParseMode::strict);

// Emits a document that parses back to an equal Instance/Profile. Canonical
// columns first, passthrough columns in their original order, '\n' line ends.
std::string serialize_pb(const Instance& instance, const Profile& profile);
void write_pb_file(const std::filesystem::path& path, const Instance& instance,
                   const Profile& profile);

struct ElectionSummary {
  std::string id;  // file stem
  bool ok = false;
  std::string error;              // set when !ok
  long long num_projects = 0;
  long long num_votes = 0;
  Money budget;
  Money total_cost;               // sum of proposed project costs
  Rational mean_cost;             // minor units
  VoteType vote_type = VoteType::approval;
};

ElectionSummary summarize(std::string id, const Instance& instance, const Profile& profile);

struct CorpusScan {
  std::vector<ElectionSummary> summaries;  // parseable files, in id order
  std::vector<ElectionSummary> failures;   // unparseable files, in id order
};

// Scans every *.pb file in the directory. Files are parsed with `jobs`
// worker threads; results are merged in file-id order, so the scan is
// deterministic regardless of scheduling.
CorpusScan scan_corpus(const std::filesystem::path& directory, int jobs = 1);

// FNV-1a over the concatenated bytes of the corpus files in id order; pins
// the corpus content a report was computed from.
std::string corpus_content_hash(const std::filesystem::path& directory);

}  // namespace pbeval

#endif
