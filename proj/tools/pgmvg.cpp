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

// pgmvg: command-line front end.
//
//   pgmvg synth   --spec world.cfg --out-prefix world/
//   pgmvg cluster --emb m1.pgmv --emb m2.pgmv --ids utts.ids --out labels.tsv
//   pgmvg eval    --pred labels.tsv --truth truth.tsv
//   pgmvg convert --in emb.txt --out emb.pgmv [--ids-out utts.ids]
//
// Exit codes: 0 success, 1 usage error, 2 data error, 3 runtime error.

#include <cstdio>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <unordered_map>
#include <vector>

#include "CLI11.hpp"
#include "pgmvg/pgmvg.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitData = 2;
constexpr int kExitRuntime = 3;

struct ClusterArgs {
  std::vector<std::string> emb;
  std::string ids;
  std::string config;
  std::string out;
  std::string history;
  std::string dump_graph;
  std::string dump_fits;
  std::size_t threads = 1;
  bool skip_adaptation = false;
  std::map<std::string, std::string> overrides;  // config field -> raw value
};

std::string flag_name(const std::string& field) {
  std::string s = field;
  for (char& c : s) {
    if (c == '_') c = '-';
  }
  return "--" + s;
}

int run_cluster(const ClusterArgs& args) {
  pgmvg::RunConfig config;
  if (!args.config.empty()) config = pgmvg::read_config(args.config);
  for (const auto& [field, value] : args.overrides) {
    pgmvg::set_config_value(config, field, value);
  }
  const pgmvg::ValidatedConfig valid = pgmvg::validate_config(config);

  std::vector<pgmvg::EmbeddingMatrix> models;
  for (std::size_t n = 0; n < args.emb.size(); ++n) {
    models.push_back(pgmvg::read_embeddings(args.emb[n], static_cast<int>(n)));
    if (models.back().rows() != models.front().rows()) {
      throw pgmvg::Error(pgmvg::ErrorCode::kShapeMismatch,
                         args.emb[n] + " has " + std::to_string(models.back().rows()) +
                             " rows, " + args.emb[0] + " has " +
                             std::to_string(models.front().rows()));
    }
  }
  const pgmvg::UtteranceSet ids = pgmvg::read_ids(args.ids, models.front().rows());

  std::string graph_dump;
  std::string fit_dump;
  pgmvg::RunOptions opts;
  opts.threads = args.threads;
  opts.skip_adaptation = args.skip_adaptation;
  if (!args.dump_graph.empty()) {
    opts.graph_sink = [&graph_dump](int k, const pgmvg::SpeakerGraph& g) {
      graph_dump += pgmvg::format_graph_dump(k, g);
    };
  }
  if (!args.dump_fits.empty()) {
    fit_dump = std::string(pgmvg::kFitColumns) + "\n";
    opts.fit_sink = [&fit_dump](const pgmvg::FitRecord& rec) {
      fit_dump += pgmvg::format_fit_record(rec);
    };
  }

  const pgmvg::RunResult result = pgmvg::run_pgmvg(models, ids, valid, opts);

  pgmvg::write_labels(args.out, ids, result.labels);
  if (!args.history.empty()) {
    pgmvg::detail::write_file(args.history,
                              pgmvg::format_history(config, result.state.history));
  }
  if (!args.dump_graph.empty()) pgmvg::detail::write_file(args.dump_graph, graph_dump);
  if (!args.dump_fits.empty()) pgmvg::detail::write_file(args.dump_fits, fit_dump);

  const double coverage = static_cast<double>(result.labels.labeled_count()) /
                          static_cast<double>(result.labels.size());
  std::printf("classes\t%d\ncoverage\t%.6f\n", result.labels.num_classes, coverage);
  return kExitOk;
}

int run_synth(const std::string& spec_path, const std::string& prefix) {
  pgmvg::SynthSpec spec;
  if (!spec_path.empty()) {
    spec = pgmvg::parse_synth_spec(pgmvg::detail::read_file(spec_path), spec_path);
  }
  const pgmvg::SynthWorld world = pgmvg::generate(spec);
  for (const auto& p : pgmvg::write_world(world, prefix)) {
    std::printf("wrote\t%s\n", p.string().c_str());
  }
  return kExitOk;
}

int run_eval(const std::string& pred_path, const std::string& truth_path) {
  const pgmvg::LabelFile pred = pgmvg::read_labels(pred_path);
  const pgmvg::LabelFile truth = pgmvg::read_labels(truth_path);
  if (pred.ids.size() != truth.ids.size()) {
    throw pgmvg::Error(pgmvg::ErrorCode::kCountMismatch,
                       std::to_string(pred.ids.size()) + " predictions for " +
                           std::to_string(truth.ids.size()) + " truth labels");
  }
  std::unordered_map<std::string, int> truth_by_id;
  for (std::size_t i = 0; i < truth.ids.size(); ++i) {
    truth_by_id.emplace(truth.ids.ids[i], truth.labels[i]);
  }
  std::vector<int> aligned;
  aligned.reserve(pred.ids.size());
  for (const auto& id : pred.ids.ids) {
    const auto it = truth_by_id.find(id);
    if (it == truth_by_id.end()) {
      throw pgmvg::Error(pgmvg::ErrorCode::kCountMismatch, "no truth label for " + id);
    }
    aligned.push_back(it->second);
  }
  std::cout << pgmvg::format_report(pgmvg::cluster_report(pred.labels, aligned));
  return kExitOk;
}

// Text rows are whitespace-separated reals, optionally preceded by an id.
int run_convert(const std::string& in_path, const std::string& out_path,
                const std::string& ids_out) {
  const std::string bytes = pgmvg::detail::read_file(in_path);
  if (bytes.rfind("PGMV", 0) == 0) {
    const pgmvg::EmbeddingMatrix m = pgmvg::decode_embeddings(bytes);
    std::ostringstream os;
    os.precision(9);
    for (std::size_t i = 0; i < m.rows(); ++i) {
      const auto r = m.row(i);
      for (std::size_t d = 0; d < r.size(); ++d) os << (d ? " " : "") << r[d];
      os << '\n';
    }
    pgmvg::detail::write_file(out_path, os.str());
    return kExitOk;
  }
  std::vector<std::string> ids;
  std::vector<double> data;
  std::size_t dim = 0;
  std::size_t rows = 0;
  const auto lines = pgmvg::detail::split_lines(bytes);
  for (std::size_t ln = 0; ln < lines.size(); ++ln) {
    std::istringstream is(lines[ln]);
    std::vector<std::string> tokens;
    for (std::string t; is >> t;) tokens.push_back(t);
    if (tokens.empty()) continue;
    std::size_t first = 0;
    double probe = 0.0;
    const auto [ptr, ec] =
        std::from_chars(tokens[0].data(), tokens[0].data() + tokens[0].size(), probe);
    if (ec != std::errc() || ptr != tokens[0].data() + tokens[0].size()) {
      ids.push_back(tokens[0]);
      first = 1;
    }
    const std::size_t row_dim = tokens.size() - first;
    if (rows == 0) dim = row_dim;
    if (row_dim != dim) {
      throw pgmvg::Error(pgmvg::ErrorCode::kShapeMismatch,
                         in_path + " line " + std::to_string(ln + 1) + ": " +
                             std::to_string(row_dim) + " values, expected " +
                             std::to_string(dim));
    }
    for (std::size_t t = first; t < tokens.size(); ++t) {
      data.push_back(pgmvg::detail::parse_number<double>(
          in_path + " line " + std::to_string(ln + 1), tokens[t]));
    }
    ++rows;
  }
  if (!ids.empty() && ids.size() != rows) {
    throw pgmvg::Error(pgmvg::ErrorCode::kShapeMismatch,
                       in_path + ": some rows have ids and some do not");
  }
  pgmvg::write_embeddings(out_path, pgmvg::EmbeddingMatrix(0, rows, dim, std::move(data)));
  if (!ids_out.empty()) {
    if (ids.empty()) {
      throw pgmvg::Error(pgmvg::ErrorCode::kShapeMismatch, in_path + " has no ids");
    }
    pgmvg::write_ids(ids_out, pgmvg::UtteranceSet(std::move(ids)));
  }
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Progressive multi-model graph clustering of speaker embeddings"};
  app.require_subcommand(1);

  std::string synth_spec, synth_prefix;
  auto* synth = app.add_subcommand("synth", "Generate a synthetic multi-model world");
  synth->add_option("--spec", synth_spec, "World spec file (key = value)");
  synth->add_option("--out-prefix", synth_prefix, "Output directory or stem")->required();

  ClusterArgs cargs;
  std::map<std::string, std::string> raw_overrides;
  auto* cluster = app.add_subcommand("cluster", "Assign pseudo-labels to utterances");
  cluster->add_option("--emb", cargs.emb, "Per-model .pgmv file (repeat per model)")
      ->required();
  cluster->add_option("--ids", cargs.ids, "Utterance id sidecar")->required();
  cluster->add_option("--config", cargs.config, "Run config (key = value)");
  cluster->add_option("--out", cargs.out, "Output labels TSV")->required();
  cluster->add_option("--history", cargs.history, "Per-iteration history TSV");
  cluster->add_option("--threads", cargs.threads, "Worker threads")
      ->check(CLI::PositiveNumber);
  cluster->add_flag("--skip-adaptation", cargs.skip_adaptation,
                    "Do not subtract the domain mean");
  cluster->add_option("--dump-graph", cargs.dump_graph, "Edge list per iteration");
  cluster->add_option("--dump-fits", cargs.dump_fits, "Assessment fits TSV");
  for (const auto& field : pgmvg::config_fields()) {
    cluster->add_option(flag_name(field.name), raw_overrides[field.name],
                        "Override config field " + field.name);
  }

  std::string pred_path, truth_path;
  auto* eval = app.add_subcommand("eval", "Score labels against ground truth");
  eval->add_option("--pred", pred_path, "Predicted labels TSV")->required();
  eval->add_option("--truth", truth_path, "Ground-truth labels TSV")->required();

  std::string conv_in, conv_out, conv_ids;
  auto* convert = app.add_subcommand("convert", "Convert between text and .pgmv");
  convert->add_option("--in", conv_in, "Input (text rows or .pgmv)")->required();
  convert->add_option("--out", conv_out, "Output path")->required();
  convert->add_option("--ids-out", conv_ids, "Write the ids column to this sidecar");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  }

  try {
    if (*synth) return run_synth(synth_spec, synth_prefix);
    if (*cluster) {
      for (const auto& field : pgmvg::config_fields()) {
        if (cluster->count(flag_name(field.name)) > 0) {
          cargs.overrides[field.name] = raw_overrides[field.name];
        }
      }
      return run_cluster(cargs);
    }
    if (*eval) return run_eval(pred_path, truth_path);
    if (*convert) return run_convert(conv_in, conv_out, conv_ids);
  } catch (const pgmvg::Error& e) {
    std::cerr << "pgmvg: " << e.what() << "\n";
    switch (e.kind()) {
      case pgmvg::ErrorKind::kUsage: return kExitUsage;
      case pgmvg::ErrorKind::kData: return kExitData;
      case pgmvg::ErrorKind::kRuntime: return kExitRuntime;
    }
  } catch (const std::exception& e) {
    std::cerr << "pgmvg: " << e.what() << "\n";
    return kExitRuntime;
  }
  return kExitUsage;
}
