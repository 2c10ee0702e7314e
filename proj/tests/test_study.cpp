#include <gtest/gtest.h>

#include <sstream>

#include "netkernel/study.hpp"

using namespace netkernel;

namespace {

StudyConfig tiny() {
  StudyConfig c;
  GeneratedNetwork g;
  g.params.n = 2;
  g.params.root_length = 20.0;
  g.params.detour_max = 2.0;
  g.seed = 1;
  c.network = g;
  c.n_sites = 5;
  c.times_per_site = 3;
  c.truth = {0.9, 15.0, 0.2, 0.1};
  c.n_replicates = 3;
  c.seed = 21;
  return c;
}

std::string csv(const ExperimentReport& r) {
  std::ostringstream out;
  write_replicates_csv(out, r);
  write_summary_csv(out, r);
  return out.str();
}

}  // namespace

TEST(Winner, TieBreaksTowardEarlierModel) {
  bool tie = false;
  EXPECT_EQ(pick_winner({-10.0, -9.0, -11.0}, &tie), 1u);
  EXPECT_FALSE(tie);
  EXPECT_EQ(pick_winner({-9.0 - 5e-10, -9.0, -11.0}, &tie), 0u);
  EXPECT_TRUE(tie);
}

TEST(Summary, ProportionsAndErrors) {
  std::vector<ReplicateRow> rows(2);
  for (std::size_t r = 0; r < 2; ++r) {
    rows[r].replicate = r;
    rows[r].winner = r;
    rows[r].fits = {{ModelFamily::T, {}}, {ModelFamily::C1, {}}};
  }
  rows[0].fits[0].result.estimates = {1.0, 10.0, 0.1};
  rows[1].fits[0].result.estimates = {0.5, 14.0, 0.3};
  const ExperimentReport rep = summarize(rows, {ModelFamily::T, ModelFamily::C1}, {0.9, 12.0, 0.2, 0.1});
  EXPECT_DOUBLE_EQ(rep.of(ModelFamily::T).win_proportion + rep.of(ModelFamily::C1).win_proportion, 1.0);
  EXPECT_DOUBLE_EQ(rep.of(ModelFamily::T).c_S.mae, 2.0);
  EXPECT_DOUBLE_EQ(rep.of(ModelFamily::T).c_S.rmse, 2.0);
  EXPECT_NEAR(rep.of(ModelFamily::T).sigma2.mae, 0.25, 1e-15);
  EXPECT_NEAR(rep.of(ModelFamily::T).sigma2.rmse, std::sqrt((0.01 + 0.16) / 2), 1e-15);
}

TEST(SimStudy, DeterministicAndThreadIndependent) {
  const StudyConfig c = tiny();
  const ExperimentReport a = run_sim_study(c, 1);
  const ExperimentReport b = run_sim_study(c, 2);
  EXPECT_EQ(csv(a), csv(b));
  double total = 0.0;
  for (const ModelSummary& s : a.summary) {
    total += s.win_proportion;
    for (const ErrorSummary& e : {s.sigma2, s.c_S, s.c_T}) EXPECT_LE(e.mae, e.rmse * (1 + 1e-15));
  }
  EXPECT_DOUBLE_EQ(total, 1.0);
}

TEST(SimStudy, FixTimesChangesDesignOnly) {
  StudyConfig c = tiny();
  c.fix_times = true;
  const ExperimentReport a = run_sim_study(c, 1);
  EXPECT_EQ(a.replicates.size(), 3u);
  c.fix_times = false;
  EXPECT_NE(csv(a), csv(run_sim_study(c, 1)));
}

TEST(SimStudy, RequiresCoordinatesForC1) {
  StudyConfig c = tiny();
  c.network = NetworkFile{"/nonexistent/network.json"};
  EXPECT_THROW(run_sim_study(c, 1), Error);
}
