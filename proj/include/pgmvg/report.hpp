// Copyright 2026 The pgmvg Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef PGMVG_REPORT_HPP
#define PGMVG_REPORT_HPP

#include <span>
#include <sstream>
#include <string>

#include "pgmvg/assess.hpp"
#include "pgmvg/core_types.hpp"
#include "pgmvg/graph.hpp"
#include "pgmvg/io_formats.hpp"
#include "pgmvg/progressive.hpp"

namespace pgmvg {

inline constexpr const char* kHistoryColumns =
    "k\tnodes\tnew_nodes\tclasses\tmerges\trejected_edges";

/// History TSV: the effective config as `# key = value` lines, then one row
/// per iteration.
inline std::string format_history(const RunConfig& config,
                                  std::span<const IterationRecord> history) {
  std::string out = format_config(config, "# ");
  out += kHistoryColumns;
  out += '\n';
  for (const auto& r : history) {
    out += std::to_string(r.k) + '\t' + std::to_string(r.nodes) + '\t' +
           std::to_string(r.new_nodes) + '\t' + std::to_string(r.classes) + '\t' +
           std::to_string(r.merges) + '\t' + std::to_string(r.rejected_edges) + '\n';
  }
  return out;
}

/// Parses the rows written by format_history; comment lines are skipped.
inline std::vector<IterationRecord> parse_history(const std::string& text) {
  std::vector<IterationRecord> rows;
  for (const auto& line : detail::split_lines(text)) {
    if (line.empty() || line[0] == '#' || line == kHistoryColumns) continue;
    std::istringstream is(line);
    IterationRecord r;
    if (!(is >> r.k >> r.nodes >> r.new_nodes >> r.classes >> r.merges >> r.rejected_edges)) {
      throw Error(ErrorCode::kShapeMismatch, "bad history row: " + line);
    }
    rows.push_back(r);
  }
  return rows;
}

/// Edge list of one iteration, preceded by a `# k = <k>` marker line.
inline std::string format_graph_dump(int k, const SpeakerGraph& g) {
  std::string out = "# k = " + std::to_string(k) + "\n";
  for (const Edge& e : g.edges()) {
    out += std::to_string(e.a) + '\t' + std::to_string(e.b) + '\n';
  }
  return out;
}

inline constexpr const char* kFitColumns =
    "k\tclass_a\tclass_b\tsize_a\tsize_b\tmodel\tmu1\tmu2\tsigma1\tsigma2\tw1\tmodel_verdict"
    "\tmodel_case\tverdict\tcase";

/// One TSV row per model of an assessment.
inline std::string format_fit_record(const FitRecord& rec) {
  std::ostringstream os;
  os.precision(6);
  os << std::fixed;
  const MergeDecision& final_decision = rec.assessment.decision;
  for (std::size_t n = 0; n < rec.assessment.per_model.size(); ++n) {
    const MergeDecision& d = rec.assessment.per_model[n];
    os << rec.k << '\t' << rec.class_a << '\t' << rec.class_b << '\t' << rec.size_a << '\t'
       << rec.size_b << '\t' << n << '\t' << d.fit.mu1 << '\t' << d.fit.mu2 << '\t'
       << d.fit.sigma1 << '\t' << d.fit.sigma2 << '\t' << d.fit.w1 << '\t'
       << verdict_name(d.verdict) << '\t' << case_name(d.case_tag) << '\t'
       << verdict_name(final_decision.verdict) << '\t' << case_name(final_decision.case_tag)
       << '\n';
  }
  return os.str();
}

}  // namespace pgmvg

#endif  // PGMVG_REPORT_HPP
