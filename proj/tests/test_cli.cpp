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

// Drives the pgmvg binary end to end and checks exit codes and outputs.

#include <gtest/gtest.h>
#include <sys/wait.h>

#include <cstdlib>

#include "test_support.hpp"

namespace pgmvg {
namespace {

struct CliResult {
  int code = -1;
  std::string out;
};

CliResult run_cli(const std::string& args, const testing::TempDir& dir) {
  const auto out_path = dir / "stdout.txt";
  const std::string cmd = std::string(PGMVG_CLI_PATH) + " " + args + " >" +
                          out_path.string() + " 2>" + (dir / "stderr.txt").string();
  const int status = std::system(cmd.c_str());
  CliResult r;
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  r.out = testing::slurp(out_path);
  return r;
}

class Cli : public ::testing::Test {
 protected:
  void SetUp() override {
    testing::spit(dir_ / "world.cfg",
                  "num_speakers = 8\nutts_per_speaker = 25\ndim = 32\nseed = 3\n");
    ASSERT_EQ(run("synth --spec " + p("world.cfg") + " --out-prefix " + p("w/")).code, 0);
  }

  std::string p(const std::string& leaf) const { return (dir_ / leaf).string(); }
  CliResult run(const std::string& args) const { return run_cli(args, dir_); }
  std::string embs() const {
    return "--emb " + p("w/model1.pgmv") + " --emb " + p("w/model2.pgmv") + " --emb " +
           p("w/model3.pgmv");
  }

  testing::TempDir dir_;
};

TEST_F(Cli, HappyPathAndEval) {
  const CliResult c = run("cluster " + embs() + " --ids " + p("w/utts.ids") + " --out " +
                          p("labels.tsv") + " --history " + p("hist.tsv") + " --k-max 30");
  ASSERT_EQ(c.code, 0);
  EXPECT_EQ(c.out.rfind("classes\t", 0), 0u);
  const LabelFile labels = read_labels(dir_ / "labels.tsv");
  EXPECT_EQ(labels.ids.size(), 200u);
  EXPECT_FALSE(parse_history(testing::slurp(dir_ / "hist.tsv")).empty());
  EXPECT_NE(testing::slurp(dir_ / "hist.tsv").find("# k_max = 30"), std::string::npos);

  const CliResult e = run("eval --pred " + p("labels.tsv") + " --truth " + p("w/truth.tsv"));
  ASSERT_EQ(e.code, 0);
  EXPECT_NE(e.out.find("pairwise_f\t"), std::string::npos);
  EXPECT_NE(e.out.find("nmi\t"), std::string::npos);
}

TEST_F(Cli, ByteIdenticalReruns) {
  const std::string base = "cluster " + embs() + " --ids " + p("w/utts.ids") + " --k-max 30";
  ASSERT_EQ(run(base + " --out " + p("a.tsv") + " --history " + p("ha.tsv")).code, 0);
  ASSERT_EQ(run(base + " --out " + p("b.tsv") + " --history " + p("hb.tsv")).code, 0);
  ASSERT_EQ(run(base + " --threads 4 --out " + p("c.tsv") + " --history " + p("hc.tsv")).code, 0);
  EXPECT_EQ(testing::slurp(dir_ / "a.tsv"), testing::slurp(dir_ / "b.tsv"));
  EXPECT_EQ(testing::slurp(dir_ / "a.tsv"), testing::slurp(dir_ / "c.tsv"));
  EXPECT_EQ(testing::slurp(dir_ / "ha.tsv"), testing::slurp(dir_ / "hc.tsv"));
}

TEST_F(Cli, ConfigFileAndOverride) {
  testing::spit(dir_ / "run.cfg", "# test\nk_max = 20\nmin_cluster_size = 12\n");
  ASSERT_EQ(run("cluster " + embs() + " --ids " + p("w/utts.ids") + " --config " +
                p("run.cfg") + " --k-max 25 --out " + p("l.tsv") + " --history " + p("h.tsv"))
                .code,
            0);
  const std::string h = testing::slurp(dir_ / "h.tsv");
  EXPECT_NE(h.find("# k_max = 25"), std::string::npos);
  EXPECT_NE(h.find("# min_cluster_size = 12"), std::string::npos);
}

TEST_F(Cli, UsageErrors) {
  EXPECT_EQ(run("cluster " + embs() + " --out " + p("l.tsv")).code, 1);
  EXPECT_EQ(run("cluster " + embs() + " --ids " + p("w/utts.ids") + " --out " + p("l.tsv") +
                " --no-such-flag")
                .code,
            1);
  EXPECT_EQ(run("").code, 1);
  EXPECT_EQ(run("cluster " + embs() + " --ids " + p("w/utts.ids") + " --out " + p("l.tsv") +
                " --th-high 2.0")
                .code,
            1);
  testing::spit(dir_ / "bad.cfg", "nonsense_key = 3\n");
  EXPECT_EQ(run("cluster " + embs() + " --ids " + p("w/utts.ids") + " --config " +
                p("bad.cfg") + " --out " + p("l.tsv"))
                .code,
            1);
}

TEST_F(Cli, DataErrors) {
  std::string bytes = testing::slurp(dir_ / "w/model1.pgmv");
  testing::spit(dir_ / "short.pgmv", bytes.substr(0, bytes.size() - 7));
  testing::spit(dir_ / "magic.pgmv", "XXXX" + bytes.substr(4));
  for (const char* f : {"short.pgmv", "magic.pgmv"}) {
    EXPECT_EQ(run("cluster --emb " + p(f) + " --ids " + p("w/utts.ids") + " --out " +
                  p("l.tsv"))
                  .code,
              2)
        << f;
  }
  testing::spit(dir_ / "few.ids", "a\nb\n");
  EXPECT_EQ(run("cluster " + embs() + " --ids " + p("few.ids") + " --out " + p("l.tsv")).code, 2);
  EXPECT_EQ(run("cluster --emb " + p("missing.pgmv") + " --ids " + p("w/utts.ids") +
                " --out " + p("l.tsv"))
                .code,
            2);
}

TEST_F(Cli, ConvertRoundTrip) {
  testing::spit(dir_ / "emb.txt", "u1 1 0 0\nu2 0 1 0\nu3 0.5 0.5 0\n");
  ASSERT_EQ(run("convert --in " + p("emb.txt") + " --out " + p("emb.pgmv") + " --ids-out " +
                p("emb.ids"))
                .code,
            0);
  const EmbeddingMatrix m = read_embeddings(dir_ / "emb.pgmv");
  EXPECT_EQ(m.rows(), 3u);
  EXPECT_EQ(m.dim(), 3u);
  EXPECT_EQ(m.row(2)[0], 0.5);
  EXPECT_EQ(read_ids(dir_ / "emb.ids", 3).ids, (std::vector<std::string>{"u1", "u2", "u3"}));
  ASSERT_EQ(run("convert --in " + p("emb.pgmv") + " --out " + p("back.txt")).code, 0);
  EXPECT_EQ(testing::slurp(dir_ / "back.txt"), "1 0 0\n0 1 0\n0.5 0.5 0\n");
}

}  // namespace
}  // namespace pgmvg
