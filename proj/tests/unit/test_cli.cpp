#include <gtest/gtest.h>

#include "json.hpp"
#include "oracles/report_check.hpp"
#include "support/run.hpp"

using nlohmann::json;
using support::run_cli;

namespace {

// A sweep small enough for a unit test.
const std::string kSmall = "--set plan.synthetic_counts=[0,20] --set plan.n_seeds=2 ";

}  // namespace

TEST(Cli, GenCorpusWritesFiles) {
    auto dir = support::fresh_dir("cli_corpus");
    auto r = run_cli("gen-corpus --out-dir " + dir.string());
    ASSERT_EQ(r.exit_code, 0);
    EXPECT_TRUE(std::filesystem::exists(dir / "train.csv"));
    EXPECT_TRUE(std::filesystem::exists(dir / "test.csv"));
    EXPECT_TRUE(std::filesystem::exists(dir / "schema.json"));
    auto train = support::slurp(dir / "train.csv");
    EXPECT_EQ(std::count(train.begin(), train.end(), '\n'), 21);
}

TEST(Cli, GenerateWithMocks) {
    auto dir = support::fresh_dir("cli_generate");
    auto good = run_cli("generate --out " + (dir / "syn.csv").string());
    ASSERT_EQ(good.exit_code, 0);
    auto j = json::parse(good.out);
    EXPECT_EQ(j["reports"].size(), 1u);
    EXPECT_EQ(j["reports"][0]["verdict"], "pass");
    EXPECT_FALSE(j.contains("transcript"));
    EXPECT_TRUE(std::filesystem::exists(dir / "syn.csv"));

    auto bad = run_cli("--backend mock-bad --set gate.max_rounds=1 generate --transcript");
    EXPECT_EQ(bad.exit_code, 4);
    auto jb = json::parse(bad.out);
    EXPECT_EQ(jb["reports"][0]["verdict"], "fail_quality");
    EXPECT_TRUE(jb.contains("transcript"));

    // The synthetic CSV re-gates as a pass.
    auto regate = run_cli("gate --input " + (dir / "syn.csv").string());
    EXPECT_EQ(regate.exit_code, 0);
    EXPECT_EQ(json::parse(regate.out)["verdict"], "pass");
}

TEST(Cli, TrainThenEvaluate) {
    auto dir = support::fresh_dir("cli_train");
    auto t = run_cli("train --model-out " + (dir / "model.json").string());
    ASSERT_EQ(t.exit_code, 0);
    auto tj = json::parse(t.out);
    EXPECT_LT(tj["final_loss"].get<double>(), tj["initial_loss"].get<double>());
    auto e = run_cli("evaluate --model " + (dir / "model.json").string());
    ASSERT_EQ(e.exit_code, 0);
    auto ej = json::parse(e.out);
    EXPECT_EQ(ej["n"], 200);
    EXPECT_EQ(ej["tp"].get<int>() + ej["fp"].get<int>() + ej["fn"].get<int>() + ej["tn"].get<int>(), 200);
}

TEST(Cli, SweepReportRoundTrip) {
    auto dir = support::fresh_dir("cli_sweep");
    auto s = run_cli(kSmall + "sweep --out " + (dir / "r.json").string() + " --csv " + (dir / "g.csv").string());
    ASSERT_EQ(s.exit_code, 0);
    EXPECT_NE(s.out.find("abs(pp)"), std::string::npos);
    auto report = json::parse(support::slurp(dir / "r.json"));
    auto problems = oracle::check_report(report);
    EXPECT_TRUE(problems.empty()) << problems.front();
    EXPECT_EQ(report["grid"].size(), 2u + 2u + 4u);

    auto again = run_cli("report --in " + (dir / "r.json").string() + " --csv " + (dir / "g2.csv").string());
    EXPECT_EQ(again.exit_code, 0);
    EXPECT_EQ(again.out, s.out);
    EXPECT_EQ(support::slurp(dir / "g.csv"), support::slurp(dir / "g2.csv"));
}

TEST(Cli, ExitCodes) {
    EXPECT_EQ(run_cli("").exit_code, 1);
    EXPECT_EQ(run_cli("frobnicate").exit_code, 1);
    EXPECT_EQ(run_cli("--set gate.nope=1 sweep").exit_code, 1);
    EXPECT_EQ(run_cli("--backend telepathy sweep").exit_code, 1);
    EXPECT_EQ(run_cli("--set corpus.train_path=/nonexistent/train.csv --set corpus.test_path=/nonexistent/test.csv "
                      "sweep")
                  .exit_code,
              2);
    auto dir = support::fresh_dir("cli_exit");
    std::ofstream(dir / "broken.json") << "{";
    EXPECT_EQ(run_cli("report --in " + (dir / "broken.json").string()).exit_code, 2);
    ::unsetenv("SYNTHLOOP_API_KEY");
    EXPECT_EQ(run_cli("--backend http --set 'plan.regimes=[\"synthetic_only\"]' " + kSmall + "sweep").exit_code, 3);
    EXPECT_EQ(run_cli("--backend http generate").exit_code, 3);
    EXPECT_EQ(run_cli("--backend mock-bad --set gate.max_rounds=1 --set 'plan.regimes=[\"synthetic_only\"]' " + kSmall +
                      "sweep")
                  .exit_code,
              4);
}

TEST(Cli, SeedChangesGrid) {
    auto a = run_cli(kSmall + "--seed 1 sweep");
    auto b = run_cli(kSmall + "--seed 2 sweep");
    ASSERT_EQ(a.exit_code, 0);
    EXPECT_NE(a.out, b.out);
}
