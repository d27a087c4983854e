#include <gtest/gtest.h>

#include <sstream>

#include "arlab/errors.hpp"
#include "arlab/report_io.hpp"

using namespace arlab;
using nlohmann::json;

namespace {

ExpansionReport small_report() {
  ExperimentConfig cfg;
  cfg.n_list = {150};
  cfg.gamma_list = {0.0, 1.0};
  cfg.replications = 12;
  return run_experiment(cfg, 1);
}

}  // namespace

TEST(Report, JsonRoundTrip) {
  const auto report = small_report();
  const json doc = report_to_json(report, json{{"a", 1}}, json{{"b", 2}});
  const auto back = report_from_json(json::parse(doc.dump()));
  EXPECT_EQ(back, report);
  EXPECT_EQ(report_to_json(back, json{{"a", 1}}, json{{"b", 2}}).dump(2), doc.dump(2));
  EXPECT_EQ(doc.at("config").at("raw").at("a"), 1);
}

TEST(Report, DeterministicPartDropsRuntime) {
  auto a = small_report();
  auto b = a;
  b.runtime_seconds += 5.0;
  b.threads = 8;
  const json ja = report_to_json(a, {}, {});
  const json jb = report_to_json(b, {}, {});
  EXPECT_NE(ja, jb);
  EXPECT_EQ(deterministic_part(ja).dump(), deterministic_part(jb).dump());
  EXPECT_FALSE(deterministic_part(ja).contains("runtime"));
}

TEST(Report, MalformedDocumentThrows) { EXPECT_THROW(report_from_json(json{{"cells", 1}}), InvalidInput); }

TEST(SummaryCsv, HeaderAndRows) {
  const auto report = small_report();
  std::ostringstream os;
  write_summary_csv(report, os);
  std::istringstream is(os.str());
  std::string line;
  std::getline(is, line);
  EXPECT_EQ(line, "n,gamma,x,mean_R,sd_R,p_exceed_0.1,p_exceed_0.25,p_exceed_0.5,n_invalid");
  int rows = 0;
  while (std::getline(is, line)) ++rows;
  EXPECT_EQ(rows, 10);
}

TEST(SummaryCsv, EmptySweepGivesHeaderOnly) {
  ExperimentConfig cfg;
  cfg.gamma_list = {};
  const auto report = run_experiment(cfg, 1);
  std::ostringstream os;
  write_summary_csv(report, os);
  EXPECT_EQ(os.str(), "n,gamma,x,mean_R,sd_R,p_exceed_0.1,p_exceed_0.25,p_exceed_0.5,n_invalid\n");
  std::ostringstream svg;
  write_remainder_svg(report, svg);
  EXPECT_NE(svg.str().find("</svg>"), std::string::npos);
}

TEST(SummaryCsv, SixSignificantDigits) {
  ExpansionReport r;
  r.thresholds = {0.1};
  CellSummary c;
  c.n = 100;
  c.gamma = 1.0;
  c.x = -0.5;
  c.mean = 0.123456789;
  c.sd = 12345.6789;
  c.p_exceed = {0.25};
  r.cells.push_back(c);
  std::ostringstream os;
  write_summary_csv(r, os);
  EXPECT_EQ(os.str(), "n,gamma,x,mean_R,sd_R,p_exceed_0.1,n_invalid\n100,1,-0.5,0.123457,12345.7,0.25,0\n");
}

TEST(PowerCsv, QuotesFieldsWithCommas) {
  PowerRow row;
  row.label = "wide";
  row.n = 500;
  row.h = "null";
  row.pi = "uniform(-1,1)";
  row.replications = 10;
  row.rejections = 1;
  row.rate = 0.1;
  std::ostringstream os;
  write_power_csv(std::vector<PowerRow>{row}, os);
  EXPECT_NE(os.str().find("\"uniform(-1,1)\""), std::string::npos);
  std::ostringstream svg;
  write_power_svg(std::vector<PowerRow>{row}, 0.05, svg);
  EXPECT_NE(svg.str().find("wide"), std::string::npos);
}

TEST(InputCsv, HeaderAndValues) {
  std::istringstream in("residual\n1.5\n-2\n\n3e-1\r\n");
  EXPECT_EQ(read_csv_column(in, "y"), (std::vector<double>{1.5, -2.0, 0.3}));
  std::istringstream bad("1\nabc\n");
  EXPECT_THROW(read_csv_column(bad, "y"), InvalidInput);
  std::istringstream two("1,2\n");
  EXPECT_THROW(read_csv_column(two, "y"), InvalidInput);
}

TEST(InputCsv, NamedColumnOfWiderFile) {
  std::istringstream in("t,v,y,eps\n0,1,2.5,\n1,1,-3,0.5\n");
  EXPECT_EQ(read_csv_column(in, "y"), (std::vector<double>{2.5, -3.0}));
  std::istringstream eps("t,eps\n0,\n");
  EXPECT_THROW(read_csv_column(eps, "eps"), InvalidInput);
  std::istringstream missing("t,v\n0,1\n");
  EXPECT_THROW(read_csv_column(missing, "y"), InvalidInput);
  std::istringstream ragged("t,y\n0,1,2\n");
  EXPECT_THROW(read_csv_column(ragged, "y"), InvalidInput);
}

TEST(TestReportJson, Fields) {
  TestReport r;
  r.n = 100;
  r.df = 2;
  r.statistic = 1.5;
  const json j = to_json(r);
  EXPECT_EQ(j.at("n"), 100);
  EXPECT_EQ(j.at("df"), 2);
  EXPECT_TRUE(j.at("null_weights").empty());
  EXPECT_DOUBLE_EQ(j.at("statistic").get<double>(), 1.5);
}
