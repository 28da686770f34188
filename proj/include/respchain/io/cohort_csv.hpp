#pragma once

// Cohort files: a header `participant_id,group,responses` followed by one row
// per participant. Responses are a digit string ("3243232443244333") when the
// scale has at most 9 states and semicolon-separated integers otherwise.

#include <algorithm>
#include <cctype>
#include <charconv>
#include <fstream>
#include <iterator>
#include <optional>
#include <set>
#include <span>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "respchain/error.hpp"
#include "respchain/state_space.hpp"

namespace respchain::io {

enum class LoadMode { strict, lenient };

struct CohortDataset {
  std::vector<ResponseSequence> sequences;
  StateSpace state_space{5};
  std::string source;
  std::set<std::string> group_labels;
  std::vector<std::string> warnings;

  std::vector<const ResponseSequence *> in_group(std::string_view group) const;
};

namespace detail {

inline std::string_view trim(std::string_view s) {
  const auto ws = " \t\r";
  const auto b = s.find_first_not_of(ws);
  if (b == std::string_view::npos)
    return {};
  return s.substr(b, s.find_last_not_of(ws) - b + 1);
}

inline std::string lower(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return out;
}

inline std::vector<std::string_view> split(std::string_view s, char sep) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  for (;;) {
    const auto pos = s.find(sep, start);
    out.push_back(s.substr(start, pos - start));
    if (pos == std::string_view::npos)
      return out;
    start = pos + 1;
  }
}

inline std::string where(const std::string &source, std::size_t line,
                         std::size_t column) {
  return source + ":" + std::to_string(line) + ":" + std::to_string(column);
}

// Parses the responses field. Reports the 1-based column of the first bad
// response within the field through `bad_column`.
inline std::vector<State> parse_responses(std::string_view field, std::size_t k,
                                          std::size_t &bad_column,
                                          std::string &problem) {
  std::vector<State> out;
  bad_column = 0;
  if (k <= 9 && field.find(';') == std::string_view::npos) {
    for (std::size_t i = 0; i < field.size(); ++i) {
      const char c = field[i];
      if (c < '0' || c > '9') {
        bad_column = i + 1;
        problem = "non-digit '" + std::string(1, c) + "'";
        return {};
      }
      out.push_back(c - '0');
    }
    return out;
  }
  std::size_t offset = 0;
  for (auto tok : split(field, ';')) {
    const auto t = trim(tok);
    int v = 0;
    const auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
    if (t.empty() || ec != std::errc() || ptr != t.data() + t.size()) {
      bad_column = offset + 1;
      problem = "not an integer: '" + std::string(t) + "'";
      return {};
    }
    out.push_back(v);
    offset += tok.size() + 1;
  }
  return out;
}

} // namespace detail

inline std::vector<const ResponseSequence *>
CohortDataset::in_group(std::string_view group) const {
  std::vector<const ResponseSequence *> out;
  const auto want = detail::lower(group);
  for (const auto &s : sequences)
    if (s.group && detail::lower(*s.group) == want)
      out.push_back(&s);
  return out;
}

/// Parses cohort text. `source` names the input in error messages.
inline CohortDataset parse_cohort(std::string_view text, const StateSpace &space,
                                  LoadMode mode = LoadMode::strict,
                                  std::string source = "<input>") {
  CohortDataset ds;
  ds.state_space = space;
  ds.source = source;

  std::vector<std::string_view> lines = detail::split(text, '\n');
  std::size_t line_no = 0;
  bool header_seen = false;
  std::set<std::string> ids;

  for (auto raw : lines) {
    ++line_no;
    const auto line = detail::trim(raw);
    if (line.empty())
      continue;
    auto fields = detail::split(line, ',');
    for (auto &f : fields)
      f = detail::trim(f);

    if (!header_seen) {
      if (fields.size() != 3 || fields[0] != "participant_id" ||
          fields[1] != "group" || fields[2] != "responses")
        throw ValidationError(detail::where(source, line_no, 1) +
                              ": missing header 'participant_id,group,responses'");
      header_seen = true;
      continue;
    }

    if (fields.size() != 3)
      throw ValidationError(detail::where(source, line_no, 1) + ": expected 3 fields, got " +
                            std::to_string(fields.size()));
    const std::string id(fields[0]);
    if (id.empty())
      throw ValidationError(detail::where(source, line_no, 1) + ": empty participant_id");
    if (!ids.insert(id).second)
      throw ValidationError(detail::where(source, line_no, 1) +
                            ": duplicate participant_id '" + id + "'");

    // Column numbers are 1-based character offsets into the raw line.
    const std::size_t resp_col =
        static_cast<std::size_t>(fields[2].data() - raw.data()) + 1;
    std::size_t bad = 0;
    std::string problem;
    auto states = detail::parse_responses(fields[2], space.size(), bad, problem);
    if (bad == 0 && states.empty()) {
      bad = 1;
      problem = "no responses";
    }
    if (bad == 0) {
      std::size_t offset = 0;
      const bool digits = space.size() <= 9 && fields[2].find(';') == std::string_view::npos;
      const auto toks = digits ? std::vector<std::string_view>{} : detail::split(fields[2], ';');
      for (std::size_t i = 0; i < states.size(); ++i) {
        if (!space.contains(states[i])) {
          bad = digits ? i + 1 : offset + 1;
          problem = "state " + std::to_string(states[i]) + " outside 1.." +
                    std::to_string(space.size());
          break;
        }
        if (!digits)
          offset += toks[i].size() + 1;
      }
      if (bad != 0 && mode == LoadMode::lenient) {
        ds.warnings.push_back(detail::where(source, line_no, resp_col + bad - 1) + ": " +
                              problem + "; row '" + id + "' skipped");
        continue;
      }
    }
    if (bad != 0)
      throw ValidationError(detail::where(source, line_no, resp_col + bad - 1) + ": " +
                            problem + " (participant '" + id + "')");

    ResponseSequence seq;
    seq.participant_id = id;
    if (!fields[1].empty()) {
      seq.group = std::string(fields[1]);
      ds.group_labels.insert(*seq.group);
    }
    seq.states = std::move(states);
    ds.sequences.push_back(std::move(seq));
  }

  if (!header_seen)
    throw ValidationError(source + ": empty file");
  if (ds.sequences.empty() && ds.warnings.empty())
    throw ValidationError(source + ": no data rows");
  return ds;
}

inline CohortDataset load_cohort(const std::string &path, const StateSpace &space,
                                 LoadMode mode = LoadMode::strict) {
  std::ifstream in(path, std::ios::binary);
  if (!in)
    throw IoError("cannot open '" + path + "'");
  const std::string text((std::istreambuf_iterator<char>(in)),
                         std::istreambuf_iterator<char>());
  if (in.bad())
    throw IoError("error reading '" + path + "'");
  return parse_cohort(text, space, mode, path);
}

inline std::string format_responses(const ResponseSequence &seq, std::size_t k) {
  std::string out;
  for (std::size_t i = 0; i < seq.states.size(); ++i) {
    if (k <= 9) {
      out.push_back(static_cast<char>('0' + seq.states[i]));
    } else {
      if (i)
        out.push_back(';');
      out += std::to_string(seq.states[i]);
    }
  }
  return out;
}

inline std::string cohort_to_csv(std::span<const ResponseSequence> sequences,
                                 const StateSpace &space) {
  std::ostringstream os;
  os << "participant_id,group,responses\n";
  for (const auto &s : sequences) {
    if (s.participant_id.find(',') != std::string::npos ||
        (s.group && s.group->find(',') != std::string::npos))
      throw ValidationError("participant '" + s.participant_id +
                            "': ids and groups may not contain commas");
    validate_states(s, space);
    os << s.participant_id << ',' << s.group.value_or("") << ','
       << format_responses(s, space.size()) << '\n';
  }
  return os.str();
}

inline void write_text_file(const std::string &path, const std::string &text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out)
    throw IoError("cannot write '" + path + "'");
  out << text;
  out.flush();
  if (!out)
    throw IoError("error writing '" + path + "'");
}

} // namespace respchain::io
