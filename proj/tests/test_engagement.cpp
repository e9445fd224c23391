#include <doctest.h>

#include <algorithm>
#include <sstream>

#include "adq/engagement/csv.h"
#include "adq/engagement/engagement.h"
#include "adq/error.h"
#include "helpers.h"

using namespace adq;
using namespace adq::engagement;
using testing::Gen;

namespace {

const char* kHeader = "ad_id,user_id,event,dwell_seconds,timestamp\n";

EngagementRecord impression(const std::string& ad, const std::string& user) {
  return {ad, user, Event::impression, 0.0, 0.0};
}

EngagementRecord click(const std::string& ad, const std::string& user, double dwell) {
  return {ad, user, Event::click, dwell, 1.0};
}

AdStats stats_row(const std::string& ad, long n, long lc, long ulc, double lcr) {
  AdStats s;
  s.ad_id = ad;
  s.impressions = n;
  s.long_clicks = lc;
  s.unique_users = n;
  s.unique_long_click_users = ulc;
  s.lcr = lcr;
  s.rlcr = lcr;
  return s;
}

std::vector<EngagementRecord> parse(const std::string& text) {
  std::istringstream in(text);
  return parse_event_log(in);
}

}  // namespace

TEST_SUITE("engagement") {

TEST_CASE("csv helpers") {
  CHECK(csv::split_line("a,\"b,c\",\"d\"\"e\"", 1) == std::vector<std::string>{"a", "b,c", "d\"e"});
  CHECK(csv::escape("x,y") == "\"x,y\"");
  CHECK(csv::escape("plain") == "plain");
  Gen g(31);
  for (int i = 0; i < 200; ++i) {
    const double v = g.normal() * std::pow(10.0, g.integer(-8, 8));
    CHECK(csv::parse_double(csv::format_double(v), 1, 1) == v);
  }
  CHECK_THROWS_AS(csv::parse_double("1.5x", 3, 4), ParseError);
  CHECK_THROWS_AS(csv::split_line("\"open", 2), ParseError);
}

TEST_CASE("event log parsing") {
  CHECK(parse(kHeader).empty());
  const auto one = parse(std::string(kHeader) + "ad1,u1,impression,,12.5\n");
  REQUIRE(one.size() == 1);
  CHECK(one[0].event == Event::impression);
  CHECK(one[0].dwell_seconds == 0.0);
  CHECK(one[0].timestamp == 12.5);
  try {
    parse(std::string(kHeader) + "ad1,u1,impression,0,1\nad1,u2,hover,0,2\n");
    FAIL("expected a parse error");
  } catch (const ParseError& e) {
    CHECK(e.line() == 3);
    CHECK(e.column() == 3);
  }
  try {
    parse(std::string(kHeader) + "ad1,u1,click,abc,1\n");
    FAIL("expected a parse error");
  } catch (const ParseError& e) {
    CHECK(e.line() == 2);
    CHECK(e.column() == 4);
  }
  try {
    parse(std::string(kHeader) + "ad1,u1,click\n");
    FAIL("expected a parse error");
  } catch (const ParseError& e) {
    CHECK(e.line() == 2);
    CHECK(e.column() == 4);
  }
  CHECK_THROWS_AS(parse("ad_id,user_id,event,dwell_seconds\n"), ParseError);
}

TEST_CASE("rates at the filter boundary") {
  std::vector<EngagementRecord> r;
  for (int i = 0; i < 500; ++i) r.push_back(impression("ad", "u" + std::to_string(i)));
  r.push_back(click("ad", "u1", 6.0));
  r.push_back(click("ad", "u2", 30.0));
  const auto s = compute_stats(r);
  REQUIRE(s.ads.size() == 1);
  CHECK(s.ads[0].lcr == 0.004);
  CHECK(filter_ads(s.ads, Metric::lcr).size() == 1);
  CHECK(filter_ads(s.ads, Metric::rlcr).size() == 1);
}

TEST_CASE("long clicks versus long-click users") {
  std::vector<EngagementRecord> r;
  for (int i = 0; i < 10; ++i) r.push_back(impression("ad", "u" + std::to_string(i)));
  for (int i = 0; i < 3; ++i) r.push_back(click("ad", "u0", 10.0));
  const auto s = compute_stats(r).ads.at(0);
  CHECK(s.lcr == doctest::Approx(0.3).epsilon(1e-15));
  CHECK(s.rlcr == doctest::Approx(0.1).epsilon(1e-15));
}

TEST_CASE("dwell equal to the threshold is not a long click") {
  const auto s = compute_stats({impression("ad", "u"), click("ad", "u", 5.0)}).ads.at(0);
  CHECK(s.long_clicks == 0);
  CHECK_THROWS_AS(compute_stats({}, 0.0), ParameterError);
}

TEST_CASE("inconsistent and impression-free ads") {
  const auto s = compute_stats({impression("a", "u1"), click("a", "u2", 9.0), click("b", "u3", 9.0)});
  REQUIRE(s.ads.size() == 1);
  CHECK(s.omitted_without_impressions == 1);
  REQUIRE(s.issues.size() == 2);
  CHECK(s.issues[0].ad_id == "a");
  CHECK(s.issues[0].user_id == "u2");
  CHECK(s.ads[0].long_clicks == 1);
}

TEST_CASE("filter") {
  CHECK(filter_ads({stats_row("a", 499, 5, 5, 0.01)}, Metric::lcr).empty());
  CHECK(filter_ads({stats_row("a", 500, 2, 2, 0.004)}, Metric::lcr).size() == 1);
  CHECK(filter_ads({stats_row("a", 500, 2, 1, 0.004)}, Metric::rlcr).empty());
}

TEST_CASE("percentile labeling") {
  std::vector<AdStats> ads;
  for (int i = 0; i < 10; ++i) ads.push_back(stats_row("ad" + std::to_string(i), 600, 3, 3, 0.01 * i));
  auto labels = percentile_label(ads, Metric::lcr);
  CHECK(labels.size() == 6);
  CHECK(std::count_if(labels.begin(), labels.end(), [](const auto& l) { return l.label == 1; }) == 3);
  for (const auto& l : labels) {
    const int i = l.ad_id.back() - '0';
    CHECK(l.label == (i >= 7 ? 1 : 0));
    CHECK((i >= 7 || i <= 2));
  }
  CHECK(percentile_label(ads, Metric::lcr, 50, 50).size() == 10);
  CHECK(percentile_label(ads, Metric::lcr, 10, 10).size() == 2);
  const std::vector<AdStats> two = {stats_row("x", 600, 3, 3, 0.1), stats_row("y", 600, 3, 3, 0.2)};
  CHECK_THROWS_AS(percentile_label(two, Metric::lcr, 70, 30), DataError);
  CHECK(percentile_label(two, Metric::lcr, 50, 50).size() == 2);
  CHECK_THROWS_AS(percentile_label(two, Metric::lcr, 60, 50), ParameterError);
}

TEST_CASE("ties are broken by ad id") {
  std::vector<AdStats> ads;
  for (const char* id : {"d", "b", "a", "c"}) ads.push_back(stats_row(id, 600, 3, 3, 0.05));
  const auto labels = percentile_label(ads, Metric::lcr, 50, 50);
  REQUIRE(labels.size() == 4);
  CHECK(labels[0].label == 1);
  CHECK(labels[1].label == 1);
  CHECK(labels[2].label == 0);
  CHECK(labels[3].label == 0);
}

TEST_CASE("stats are invariant to record order") {
  Gen g(32);
  std::vector<EngagementRecord> r;
  for (int i = 0; i < 2000; ++i) {
    const std::string ad = "ad" + std::to_string(g.integer(0, 9));
    const std::string user = "u" + std::to_string(g.integer(0, 80));
    r.push_back(g.uniform() < 0.8 ? impression(ad, user) : click(ad, user, g.uniform(0.0, 12.0)));
  }
  std::ostringstream base;
  write_stats_csv(base, compute_stats(r).ads);
  for (int trial = 0; trial < 10; ++trial) {
    for (std::size_t i = r.size() - 1; i > 0; --i) std::swap(r[i], r[static_cast<std::size_t>(g.integer(0, static_cast<int>(i)))]);
    std::ostringstream out;
    write_stats_csv(out, compute_stats(r).ads);
    CHECK(out.str() == base.str());
  }
}

TEST_CASE("labels are disjoint and permutation invariant") {
  Gen g(33);
  for (int trial = 0; trial < 100; ++trial) {
    std::vector<AdStats> ads;
    const int n = g.integer(4, 60);
    for (int i = 0; i < n; ++i) ads.push_back(stats_row("ad" + std::to_string(i), 600, 3, 3, g.integer(0, 5) * 0.01));
    const double top = g.integer(0, 50), bottom = g.integer(0, 50);
    std::ostringstream a, b;
    const auto la = percentile_label(ads, Metric::lcr, top, bottom);
    write_labels_csv(a, la);
    std::reverse(ads.begin(), ads.end());
    write_labels_csv(b, percentile_label(ads, Metric::lcr, top, bottom));
    CHECK(a.str() == b.str());
    CHECK(la.size() <= static_cast<std::size_t>(n));
    for (std::size_t i = 1; i < la.size(); ++i) CHECK(la[i - 1].ad_id < la[i].ad_id);
  }
}

TEST_CASE("label csv round trip") {
  std::vector<QualityLabel> labels = {{"a,1", 1, Metric::rlcr, 0.125}, {"b", 0, Metric::lcr, 1e-7}};
  std::ostringstream out;
  write_labels_csv(out, labels);
  std::istringstream in(out.str());
  const auto back = read_labels_csv(in);
  REQUIRE(back.size() == 2);
  CHECK(back[0].ad_id == "a,1");
  CHECK(back[0].metric == Metric::rlcr);
  CHECK(back[1].metric_value == 1e-7);
  std::istringstream bad("ad_id,label,metric,metric_value\nx,2,LCR,0\n");
  CHECK_THROWS_AS(read_labels_csv(bad), ParseError);
  CHECK(parse_metric("r-lcr") == Metric::rlcr);
  CHECK_THROWS_AS(parse_metric("ctr"), ParameterError);
}

}  // TEST_SUITE
