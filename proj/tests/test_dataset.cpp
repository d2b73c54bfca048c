#include <gtest/gtest.h>

#include <sstream>

#include "qfan/dataset.hpp"
#include "qfan/error.hpp"
#include "qfan/synthetic.hpp"

using namespace std::chrono;
using qfan::DataError;

namespace {

qfan::IngestResult ingest(const std::string& text) {
  std::istringstream in(text);
  return qfan::read_dataset(in, qfan::ColumnMap{});
}

std::string error_of(const std::string& text) {
  try {
    ingest(text);
  } catch (const DataError& e) {
    return e.what();
  }
  return "";
}

const std::string kHeader = "ZONEID,TIMESTAMP,TARGETVAR,U10,V10,U100,V100\n";

}  // namespace

TEST(Timestamps, GefcomAndIsoForms) {
  const auto want = sys_days{2012y / January / 1} + hours{1};
  EXPECT_EQ(qfan::parse_timestamp("20120101 1:00"), want);
  EXPECT_EQ(qfan::parse_timestamp("20120101 01:00"), want);
  EXPECT_EQ(qfan::parse_timestamp("2012-01-01T01:00"), want);
  EXPECT_EQ(qfan::parse_timestamp("2012-01-01 01:00:00"), want);
  EXPECT_EQ(qfan::parse_timestamp("2012-01-01T01:00Z"), want);
  EXPECT_FALSE(qfan::parse_timestamp("2012-02-30T01:00"));
  EXPECT_FALSE(qfan::parse_timestamp("20120101 25:00"));
  EXPECT_FALSE(qfan::parse_timestamp("yesterday"));
  EXPECT_EQ(qfan::format_timestamp(want), "2012-01-01T01:00Z");
}

TEST(Months, ParseAndFormat) {
  const auto m = qfan::parse_month("2013-06");
  ASSERT_TRUE(m);
  EXPECT_EQ(*m, 2013y / June);
  EXPECT_EQ(qfan::format_month(*m), "2013-06");
  EXPECT_FALSE(qfan::parse_month("2013-13"));
  EXPECT_FALSE(qfan::parse_month("June"));
}

TEST(Ingest, GefcomLayoutWithDefaultColumns) {
  const auto r = ingest(kHeader +
                        "1,20120101 1:00,0.0,2.12,-2.51,2.87,-3.87\n"
                        "2,20120101 1:00,0.25,1.0,1.0,1.5,1.5\n"
                        "1,20120101 2:00,0.05,2.18,-2.49,2.96,-3.86\n"
                        "10,20120101 1:00,,1,1,1,1\n");
  ASSERT_EQ(r.dataset.zones.size(), 3u);
  EXPECT_EQ(r.dataset.zones[0].zone, "1");
  EXPECT_EQ(r.dataset.zones[1].zone, "2");
  EXPECT_EQ(r.dataset.zones[2].zone, "10");
  EXPECT_EQ(r.dataset.record_count(), 4u);
  EXPECT_EQ(r.missing_power, 1u);
  const auto& z1 = r.dataset.zones[0].records;
  ASSERT_EQ(z1.size(), 2u);
  EXPECT_DOUBLE_EQ(z1[1].u100, 2.96);
  EXPECT_EQ(z1[1].power, 0.05);
  EXPECT_FALSE(r.dataset.zones[2].records[0].power);
  EXPECT_TRUE(r.gaps.empty());
}

TEST(Ingest, CustomColumnMapAndColumnOrder) {
  std::istringstream in("when,site,u,v,uu,vv,p\n2013-01-01T00:00,A,1,2,3,4,0.5\n");
  qfan::ColumnMap cm{"when", "site", "p", "u", "v", "uu", "vv"};
  const auto r = qfan::read_dataset(in, cm);
  ASSERT_EQ(r.dataset.zones.size(), 1u);
  EXPECT_EQ(r.dataset.zones[0].records[0].v100, 4.0);
  EXPECT_EQ(r.dataset.zones[0].records[0].power, 0.5);
}

TEST(Ingest, EmptyFileHasNoRecords) {
  EXPECT_EQ(error_of(""), "no records");
  EXPECT_EQ(error_of(kHeader), "no records");
}

TEST(Ingest, DuplicatedTimestampIsNamed) {
  const auto msg = error_of(kHeader +
                            "1,20120101 1:00,0.1,1,1,1,1\n"
                            "1,20120101 2:00,0.1,1,1,1,1\n"
                            "1,20120101 2:00,0.2,1,1,1,1\n");
  EXPECT_NE(msg.find("duplicated timestamp 2012-01-01T02:00Z"), std::string::npos) << msg;
}

TEST(Ingest, BadRowsReportLineNumbers) {
  EXPECT_NE(error_of(kHeader + "1,20120101 1:00,0.1,1,1,1,1\n1,garbage,0.1,1,1,1,1\n").find("line 3"),
            std::string::npos);
  EXPECT_NE(error_of(kHeader + "1,20120101 1:00,0.1,1,1,1\n").find("line 2"), std::string::npos);
  const auto missing_wind = error_of(kHeader + "1,20120101 1:00,0.1,,1,1,1\n");
  EXPECT_NE(missing_wind.find("U10"), std::string::npos) << missing_wind;
  EXPECT_NE(missing_wind.find("2012-01-01T01:00Z"), std::string::npos) << missing_wind;
  EXPECT_NE(error_of(kHeader + "1,20120101 1:00,1.5,1,1,1,1\n").find("outside"), std::string::npos);
}

TEST(Ingest, MissingColumnIsNamed) {
  EXPECT_NE(error_of("ZONEID,TIMESTAMP,TARGETVAR,U10,V10,U100\n").find("V100"), std::string::npos);
}

TEST(Ingest, NonHourlySpacingIsReportedNotFatal) {
  const auto r = ingest(kHeader +
                        "1,20120101 1:00,0.1,1,1,1,1\n"
                        "1,20120101 4:00,0.1,1,1,1,1\n"
                        "1,20120101 3:00,0.1,1,1,1,1\n"
                        "1,20120101 5:00,0.1,1,1,1,1\n");
  ASSERT_EQ(r.gaps.size(), 1u);
  EXPECT_EQ(r.gaps[0].missing_hours, 1);
  EXPECT_EQ(r.gaps[0].after, sys_days{2012y / January / 1} + hours{1});
  EXPECT_EQ(r.dataset.zones[0].records[1].timestamp, sys_days{2012y / January / 1} + hours{3});
}

TEST(Ingest, WriteThenReadRoundTrips) {
  qfan::SyntheticOptions opt;
  opt.seed = 4;
  opt.zones = {"1", "2"};
  opt.hours = 50;
  const auto data = qfan::make_synthetic_dataset(opt);
  std::ostringstream out;
  qfan::write_dataset(out, data);
  const auto back = ingest(out.str());
  ASSERT_EQ(back.dataset.zones.size(), 2u);
  for (std::size_t z = 0; z < 2; ++z) {
    const auto& a = data.zones[z].records;
    const auto& b = back.dataset.zones[z].records;
    ASSERT_EQ(a.size(), b.size());
    for (std::size_t i = 0; i < a.size(); ++i) {
      EXPECT_EQ(a[i].timestamp, b[i].timestamp);
      EXPECT_EQ(a[i].u10, b[i].u10);
      EXPECT_EQ(a[i].v100, b[i].v100);
      EXPECT_EQ(a[i].power, b[i].power);
    }
  }
}

TEST(Synthetic, DeterministicAndWithinUnitInterval) {
  qfan::SyntheticOptions opt;
  opt.seed = 9;
  opt.hours = 300;
  const auto a = qfan::make_synthetic_dataset(opt);
  const auto b = qfan::make_synthetic_dataset(opt);
  ASSERT_EQ(a.zones[0].records.size(), 300u);
  for (std::size_t i = 0; i < 300; ++i) {
    EXPECT_EQ(a.zones[0].records[i].power, b.zones[0].records[i].power);
    EXPECT_GE(*a.zones[0].records[i].power, 0.0);
    EXPECT_LE(*a.zones[0].records[i].power, 1.0);
    EXPECT_EQ(a.zones[0].records[i].u100, 1.3 * a.zones[0].records[i].u10);
  }
  opt.seed = 10;
  EXPECT_NE(qfan::make_synthetic_dataset(opt).zones[0].records[5].power, a.zones[0].records[5].power);
}

TEST(Synthetic, TrueQuantilesHaveNominalCoverage) {
  qfan::SyntheticOptions opt;
  opt.seed = 11;
  opt.hours = 20000;
  const auto data = qfan::make_synthetic_dataset(opt);
  for (double tau : {0.1, 0.5, 0.9}) {
    std::size_t below = 0;
    for (std::size_t t = 0; t < opt.hours; ++t) {
      const auto& r = data.zones[0].records[t];
      below += *r.power <= qfan::synthetic_quantile(r.u10, t, tau) ? 1 : 0;
    }
    EXPECT_NEAR(static_cast<double>(below) / static_cast<double>(opt.hours), tau, 0.01);
  }
}
