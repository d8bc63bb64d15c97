#include "pbeval/pabulib.hpp"

#include <algorithm>
#include <atomic>
#include <fstream>
#include <map>
#include <sstream>
#include <thread>
#include <unordered_map>
#include <unordered_set>

namespace pbeval {

namespace {

std::vector<std::string> split(std::string_view line, char sep) {
  std::vector<std::string> fields;
  size_t start = 0;
  while (true) {
    size_t pos = line.find(sep, start);
    if (pos == std::string_view::npos) {
      fields.emplace_back(line.substr(start));
      break;
    }
    fields.emplace_back(line.substr(start, pos - start));
    start = pos + 1;
  }
  return fields;
}

std::vector<std::string> split_list(std::string_view value) {
  if (value.empty()) return {};
  return split(value, ',');
}

std::string join(const std::vector<std::string>& parts, char sep) {
  std::string out;
  for (size_t i = 0; i < parts.size(); ++i) {
    if (i > 0) out.push_back(sep);
    out += parts[i];
  }
  return out;
}

}  // namespace

PbDocument parse_document(std::string_view text) {
  // Tolerate and strip a UTF-8 byte-order mark; corpus files mix both.
  if (text.size() >= 3 && text.substr(0, 3) == "\xEF\xBB\xBF") text.remove_prefix(3);

  PbDocument doc;
  enum class Section { none, meta, projects, votes };
  Section current = Section::none;
  PbSection* table = nullptr;
  bool seen_meta = false, seen_projects = false, seen_votes = false;
  bool want_header = false;

  int line_no = 0;
  size_t start = 0;
  while (start <= text.size()) {
    size_t end = text.find('\n', start);
    std::string_view line = text.substr(start, end == std::string_view::npos ? text.size() - start
                                                                             : end - start);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    ++line_no;
    bool last = end == std::string_view::npos;
    start = last ? text.size() + 1 : end + 1;
    if (line.empty()) {
      if (last) break;
      continue;
    }

    if (line == "META" || line == "PROJECTS" || line == "VOTES") {
      if (line == "META") {
        if (seen_meta) throw ParseError(line_no, "duplicate META section");
        if (current != Section::none) throw ParseError(line_no, "META must be the first section");
        seen_meta = true;
        current = Section::meta;
      } else if (line == "PROJECTS") {
        if (seen_projects) throw ParseError(line_no, "duplicate PROJECTS section");
        if (current != Section::meta) throw ParseError(line_no, "PROJECTS must follow META");
        seen_projects = true;
        current = Section::projects;
        table = &doc.projects;
        table->line = line_no;
        want_header = true;
      } else {
        if (seen_votes) throw ParseError(line_no, "duplicate VOTES section");
        if (current != Section::projects) throw ParseError(line_no, "VOTES must follow PROJECTS");
        seen_votes = true;
        current = Section::votes;
        table = &doc.votes;
        table->line = line_no;
        want_header = true;
      }
      continue;
    }

    auto fields = split(line, ';');
    switch (current) {
      case Section::none:
        throw ParseError(line_no, "content before META section");
      case Section::meta: {
        // Some exports carry a literal "key;value" header row; skip it.
        if (doc.meta.empty() && fields.size() == 2 && fields[0] == "key" && fields[1] == "value") {
          break;
        }
        if (fields.size() < 2) throw ParseError(line_no, "META row is not key;value");
        PbRow row;
        row.line = line_no;
        row.fields.push_back(fields[0]);
        // A ';' inside a META value is not a field separator: re-join the rest.
        row.fields.push_back(join(std::vector<std::string>(fields.begin() + 1, fields.end()), ';'));
        doc.meta.push_back(std::move(row));
        break;
      }
      case Section::projects:
      case Section::votes: {
        if (want_header) {
          table->header = std::move(fields);
          want_header = false;
          break;
        }
        if (fields.size() != table->header.size()) {
          throw ParseError(line_no, "row has " + std::to_string(fields.size()) +
                                        " fields, header has " +
                                        std::to_string(table->header.size()));
        }
        table->rows.push_back({std::move(fields), line_no});
        break;
      }
    }
    if (last) break;
  }

  if (!seen_meta) throw ParseError(0, "missing META section");
  if (!seen_projects) throw ParseError(0, "missing PROJECTS section");
  if (!seen_votes) throw ParseError(0, "missing VOTES section");
  if (doc.projects.header.empty()) throw ParseError(doc.projects.line, "PROJECTS section has no header row");
  if (doc.votes.header.empty()) throw ParseError(doc.votes.line, "VOTES section has no header row");
  return doc;
}

namespace {

int column_of(const PbSection& section, std::string_view name) {
  for (size_t i = 0; i < section.header.size(); ++i) {
    if (section.header[i] == name) return static_cast<int>(i);
  }
  return -1;
}

Money parse_money(const std::string& text, int line) {
  try {
    return Money::from_major(parse_decimal(text));
  } catch (const std::invalid_argument&) {
    throw ParseError(line, "unparseable number '" + text + "'");
  }
}

long long parse_count(const std::string& text, int line) {
  try {
    return parse_integer(text);
  } catch (const std::invalid_argument&) {
    throw ParseError(line, "unparseable number '" + text + "'");
  }
}

}  // namespace

ParseResult parse_pb(std::string_view text, ParseMode mode) {
  PbDocument doc = parse_document(text);
  ParseResult result;
  Instance& instance = result.instance;

  bool have_budget = false, have_vote_type = false;
  int meta_line = 0;
  for (const auto& row : doc.meta) {
    const std::string& key = row.fields[0];
    const std::string& value = row.fields[1];
    instance.meta.emplace_back(key, value);
    if (key == "budget") {
      instance.budget = parse_money(value, row.line);
      have_budget = true;
    } else if (key == "vote_type") {
      auto vt = vote_type_from_string(value);
      if (!vt) throw ParseError(row.line, "unknown vote_type '" + value + "'");
      instance.vote_type = *vt;
      have_vote_type = true;
    } else if (key == "min_length") {
      instance.ballot_rules.min_projects = parse_count(value, row.line);
    } else if (key == "max_length") {
      instance.ballot_rules.max_projects = parse_count(value, row.line);
    } else if (key == "max_sum_points") {
      instance.ballot_rules.total_points = parse_count(value, row.line);
    } else if (key == "max_points" || key == "max_points_per_project") {
      instance.ballot_rules.max_points_per_project = parse_count(value, row.line);
    }
    meta_line = row.line;
  }
  if (!have_budget) throw ParseError(meta_line, "META is missing the budget key");
  if (!have_vote_type) throw ParseError(meta_line, "META is missing the vote_type key");
  if (instance.budget.is_zero()) throw ParseError(meta_line, "budget must be positive");

  const PbSection& projects = doc.projects;
  int col_id = column_of(projects, "project_id");
  int col_cost = column_of(projects, "cost");
  int col_name = column_of(projects, "name");
  int col_category = column_of(projects, "category");
  int col_district = column_of(projects, "district");
  if (col_id < 0) throw ParseError(projects.line, "PROJECTS header is missing project_id");
  if (col_cost < 0) throw ParseError(projects.line, "PROJECTS header is missing cost");

  std::unordered_set<std::string> project_ids;
  for (const auto& row : projects.rows) {
    Project p;
    p.id = row.fields[col_id];
    if (p.id.empty()) throw ParseError(row.line, "empty project_id");
    if (!project_ids.insert(p.id).second) {
      throw ParseError(row.line, "duplicate project id '" + p.id + "'");
    }
    p.cost = parse_money(row.fields[col_cost], row.line);
    if (col_name >= 0) p.name = row.fields[col_name];
    if (col_category >= 0) p.categories = split_list(row.fields[col_category]);
    if (col_district >= 0 && !row.fields[col_district].empty()) {
      p.district = row.fields[col_district];
    }
    for (size_t i = 0; i < row.fields.size(); ++i) {
      int ci = static_cast<int>(i);
      if (ci == col_id || ci == col_cost || ci == col_name || ci == col_category ||
          ci == col_district) {
        continue;
      }
      p.extra.emplace_back(projects.header[i], row.fields[i]);
    }
    instance.projects.push_back(std::move(p));
  }
  instance.reindex();

  const PbSection& votes = doc.votes;
  int col_voter = column_of(votes, "voter_id");
  int col_vote = column_of(votes, "vote");
  int col_points = column_of(votes, "points");
  if (col_voter < 0) throw ParseError(votes.line, "VOTES header is missing voter_id");
  if (col_vote < 0) throw ParseError(votes.line, "VOTES header is missing vote");

  for (const auto& row : votes.rows) {
    Ballot ballot;
    ballot.voter_id = row.fields[col_voter];
    if (ballot.voter_id.empty()) throw ParseError(row.line, "empty voter_id");
    auto vote_ids = split_list(row.fields[col_vote]);
    std::vector<std::string> point_fields;
    if (col_points >= 0) point_fields = split_list(row.fields[col_points]);

    if (col_points >= 0 && !point_fields.empty() && point_fields.size() != vote_ids.size()) {
      std::string message = "vote lists " + std::to_string(vote_ids.size()) +
                            " projects but points lists " + std::to_string(point_fields.size());
      if (mode == ParseMode::strict) throw ParseError(row.line, message);
      result.diagnostics.push_back({row.line, message + "; ballot dropped"});
      continue;
    }

    bool bad = false;
    for (size_t i = 0; i < vote_ids.size(); ++i) {
      BallotEntry entry;
      entry.project_id = vote_ids[i];
      if (point_fields.empty()) {
        entry.points = 1;  // approval and rank-only ballots carry one point per listed project
      } else {
        try {
          entry.points = parse_integer(point_fields[i]);
        } catch (const std::invalid_argument&) {
          if (mode == ParseMode::strict) {
            throw ParseError(row.line, "unparseable points value '" + point_fields[i] + "'");
          }
          result.diagnostics.push_back(
              {row.line, "unparseable points value '" + point_fields[i] + "'; ballot dropped"});
          bad = true;
          break;
        }
      }
      ballot.entries.push_back(std::move(entry));
    }
    if (bad) continue;

    for (size_t i = 0; i < row.fields.size(); ++i) {
      int ci = static_cast<int>(i);
      if (ci == col_voter || ci == col_vote || ci == col_points) continue;
      ballot.voter_meta.emplace_back(votes.header[i], row.fields[i]);
    }
    result.profile.ballots.push_back(std::move(ballot));
  }

  return result;
}

ParseResult parse_pb_file(const std::filesystem::path& path, ParseMode mode) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open '" + path.string() + "'");
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return parse_pb(buffer.str(), mode);
}

namespace {

void check_token(const std::string& token, const char* what) {
  if (token.find(';') != std::string::npos || token.find(',') != std::string::npos ||
      token.find('\n') != std::string::npos || token.find('\r') != std::string::npos) {
    throw std::invalid_argument(std::string(what) + " '" + token + "' contains ';', ',' or a line break");
  }
}

void check_field(const std::string& field, const char* what) {
  if (field.find(';') != std::string::npos || field.find('\n') != std::string::npos ||
      field.find('\r') != std::string::npos) {
    throw std::invalid_argument(std::string(what) + " '" + field + "' contains ';' or a line break");
  }
}

}  // namespace

std::string serialize_pb(const Instance& instance, const Profile& profile) {
  std::string out;
  out += "META\nkey;value\n";
  for (const auto& [key, value] : instance.meta) {
    check_field(key, "META key");
    if (value.find('\n') != std::string::npos || value.find('\r') != std::string::npos) {
      throw std::invalid_argument("META value for '" + key + "' contains a line break");
    }
    out += key;
    out += ';';
    out += value;
    out += '\n';
  }

  bool any_name = false, any_category = false, any_district = false;
  std::vector<std::string> extra_cols;
  for (const auto& p : instance.projects) {
    any_name = any_name || !p.name.empty();
    any_category = any_category || !p.categories.empty();
    any_district = any_district || p.district.has_value();
    for (const auto& [k, v] : p.extra) {
      if (std::find(extra_cols.begin(), extra_cols.end(), k) == extra_cols.end()) {
        extra_cols.push_back(k);
      }
    }
  }

  out += "PROJECTS\n";
  std::vector<std::string> header = {"project_id", "cost"};
  if (any_name) header.push_back("name");
  if (any_category) header.push_back("category");
  if (any_district) header.push_back("district");
  for (const auto& k : extra_cols) header.push_back(k);
  out += join(header, ';');
  out += '\n';
  for (const auto& p : instance.projects) {
    check_token(p.id, "project id");
    std::vector<std::string> fields = {p.id, format_decimal(p.cost.major_units())};
    if (any_name) {
      check_field(p.name, "project name");
      fields.push_back(p.name);
    }
    if (any_category) {
      for (const auto& tag : p.categories) check_token(tag, "category tag");
      fields.push_back(join(p.categories, ','));
    }
    if (any_district) {
      std::string d = p.district.value_or("");
      check_field(d, "district");
      fields.push_back(d);
    }
    for (const auto& col : extra_cols) {
      std::string value;
      for (const auto& [k, v] : p.extra) {
        if (k == col) {
          value = v;
          break;
        }
      }
      check_field(value, "project field");
      fields.push_back(value);
    }
    out += join(fields, ';');
    out += '\n';
  }

  // Point values are implicit for approval ballots (one per listed project)
  // and meaningless for rank-only ballots, so the column is emitted only for
  // point-bearing vote types.
  bool emit_points =
      instance.vote_type == VoteType::cumulative || instance.vote_type == VoteType::scoring;
  std::vector<std::string> vote_extra_cols;
  for (const auto& b : profile.ballots) {
    for (const auto& [k, v] : b.voter_meta) {
      if (std::find(vote_extra_cols.begin(), vote_extra_cols.end(), k) == vote_extra_cols.end()) {
        vote_extra_cols.push_back(k);
      }
    }
  }

  out += "VOTES\n";
  std::vector<std::string> vheader = {"voter_id", "vote"};
  if (emit_points) vheader.push_back("points");
  for (const auto& k : vote_extra_cols) vheader.push_back(k);
  out += join(vheader, ';');
  out += '\n';
  for (const auto& b : profile.ballots) {
    check_token(b.voter_id, "voter id");
    std::vector<std::string> ids;
    std::vector<std::string> points;
    for (const auto& e : b.entries) {
      check_token(e.project_id, "project id");
      ids.push_back(e.project_id);
      points.push_back(std::to_string(e.points));
    }
    std::vector<std::string> fields = {b.voter_id, join(ids, ',')};
    if (emit_points) fields.push_back(join(points, ','));
    for (const auto& col : vote_extra_cols) {
      std::string value;
      for (const auto& [k, v] : b.voter_meta) {
        if (k == col) {
          value = v;
          break;
        }
      }
      check_field(value, "vote field");
      fields.push_back(value);
    }
    out += join(fields, ';');
    out += '\n';
  }
  return out;
}

void write_pb_file(const std::filesystem::path& path, const Instance& instance,
                   const Profile& profile) {
  std::string text = serialize_pb(instance, profile);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write '" + path.string() + "'");
  out << text;
}

ElectionSummary summarize(std::string id, const Instance& instance, const Profile& profile) {
  ElectionSummary s;
  s.id = std::move(id);
  s.ok = true;
  s.num_projects = static_cast<long long>(instance.projects.size());
  s.num_votes = static_cast<long long>(profile.ballots.size());
  s.budget = instance.budget;
  s.total_cost = instance.total_project_cost();
  s.mean_cost = instance.projects.empty()
                    ? Rational(0)
                    : s.total_cost.value() / Rational(instance.projects.size());
  s.vote_type = instance.vote_type;
  return s;
}

CorpusScan scan_corpus(const std::filesystem::path& directory, int jobs) {
  std::vector<std::filesystem::path> files;
  for (const auto& entry : std::filesystem::directory_iterator(directory)) {
    if (entry.is_regular_file() && entry.path().extension() == ".pb") {
      files.push_back(entry.path());
    }
  }
  std::sort(files.begin(), files.end());

  std::vector<ElectionSummary> results(files.size());
  auto worker = [&](std::atomic<size_t>& next) {
    for (size_t i = next.fetch_add(1); i < files.size(); i = next.fetch_add(1)) {
      std::string id = files[i].stem().string();
      try {
        ParseResult parsed = parse_pb_file(files[i], ParseMode::lenient);
        results[i] = summarize(id, parsed.instance, parsed.profile);
      } catch (const std::exception& e) {
        results[i].id = id;
        results[i].ok = false;
        results[i].error = e.what();
      }
    }
  };

  jobs = std::max(1, jobs);
  std::atomic<size_t> next{0};
  if (jobs == 1 || files.size() < 2) {
    worker(next);
  } else {
    std::vector<std::thread> pool;
    int n = std::min<size_t>(jobs, files.size());
    pool.reserve(n);
    for (int t = 0; t < n; ++t) pool.emplace_back([&] { worker(next); });
    for (auto& t : pool) t.join();
  }

  CorpusScan scan;
  for (auto& r : results) {
    if (r.ok) {
      scan.summaries.push_back(std::move(r));
    } else {
      scan.failures.push_back(std::move(r));
    }
  }
  return scan;
}

std::string corpus_content_hash(const std::filesystem::path& directory) {
  std::vector<std::filesystem::path> files;
  for (const auto& entry : std::filesystem::directory_iterator(directory)) {
    if (entry.is_regular_file() && entry.path().extension() == ".pb") {
      files.push_back(entry.path());
    }
  }
  std::sort(files.begin(), files.end());
  unsigned long long hash = 1469598103934665603ULL;  // FNV-1a 64-bit
  auto feed = [&hash](const char* data, size_t n) {
    for (size_t i = 0; i < n; ++i) {
      hash ^= static_cast<unsigned char>(data[i]);
      hash *= 1099511628211ULL;
    }
  };
  for (const auto& f : files) {
    std::string name = f.filename().string();
    feed(name.data(), name.size());
    std::ifstream in(f, std::ios::binary);
    char buffer[8192];
    while (in.read(buffer, sizeof buffer) || in.gcount() > 0) {
      feed(buffer, static_cast<size_t>(in.gcount()));
    }
  }
  char hex[17];
  snprintf(hex, sizeof hex, "%016llx", hash);
  return std::string(hex);
}

}  // namespace pbeval
