#include "adq/engagement/engagement.h"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <map>
#include <set>

#include "adq/engagement/csv.h"
#include "adq/error.h"

namespace adq::engagement {

namespace {

const std::vector<std::string> kLogHeader = {"ad_id", "user_id", "event", "dwell_seconds",
                                             "timestamp"};
const std::vector<std::string> kLabelHeader = {"ad_id", "label", "metric", "metric_value"};

void expect_header(const std::string& line, const std::vector<std::string>& want) {
  const auto got = csv::split_line(line, 1);
  for (std::size_t i = 0; i < want.size(); ++i) {
    if (i >= got.size()) throw ParseError(1, i + 1, "missing column '" + want[i] + "'");
    if (got[i] != want[i]) {
      throw ParseError(1, i + 1, "expected column '" + want[i] + "', found '" + got[i] + "'");
    }
  }
  if (got.size() > want.size()) throw ParseError(1, want.size() + 1, "unexpected extra column");
}

std::ifstream open_or_throw(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open " + path.string());
  return in;
}

long ceil_count(std::size_t n, double pct) {
  return static_cast<long>(std::ceil(static_cast<double>(n) * pct / 100.0 - 1e-9));
}

}  // namespace

std::string_view metric_name(Metric m) { return m == Metric::lcr ? "LCR" : "R-LCR"; }

Metric parse_metric(std::string_view text) {
  std::string up(text);
  for (char& c : up) c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
  if (up == "LCR") return Metric::lcr;
  if (up == "R-LCR" || up == "RLCR") return Metric::rlcr;
  throw ParameterError("unknown metric '" + std::string(text) + "' (expected LCR or R-LCR)");
}

double metric_value(const AdStats& s, Metric m) { return m == Metric::lcr ? s.lcr : s.rlcr; }

std::vector<EngagementRecord> parse_event_log(std::istream& in) {
  std::string line;
  if (!csv::read_line(in, line)) throw ParseError(1, 1, "missing header");
  expect_header(line, kLogHeader);
  std::vector<EngagementRecord> out;
  std::size_t line_no = 1;
  while (csv::read_line(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    const auto f = csv::split_line(line, line_no);
    if (f.size() < kLogHeader.size()) {
      throw ParseError(line_no, f.size() + 1, "missing column '" + kLogHeader[f.size()] + "'");
    }
    if (f.size() > kLogHeader.size()) throw ParseError(line_no, kLogHeader.size() + 1, "extra column");
    EngagementRecord r;
    r.ad_id = f[0];
    r.user_id = f[1];
    if (r.ad_id.empty()) throw ParseError(line_no, 1, "empty ad_id");
    if (f[2] == "impression") {
      r.event = Event::impression;
    } else if (f[2] == "click") {
      r.event = Event::click;
    } else {
      throw ParseError(line_no, 3, "unknown event '" + f[2] + "'");
    }
    r.dwell_seconds = f[3].empty() ? 0.0 : csv::parse_double(f[3], line_no, 4);
    if (r.dwell_seconds < 0.0) throw ParseError(line_no, 4, "negative dwell_seconds");
    r.timestamp = csv::parse_double(f[4], line_no, 5);
    out.push_back(std::move(r));
  }
  return out;
}

std::vector<EngagementRecord> parse_event_log(const std::filesystem::path& path) {
  auto in = open_or_throw(path);
  return parse_event_log(in);
}

StatsResult compute_stats(const std::vector<EngagementRecord>& records, double dwell_threshold) {
  if (!(dwell_threshold > 0.0)) throw ParameterError("dwell threshold must be positive");
  struct Acc {
    long impressions = 0;
    long long_clicks = 0;
    std::set<std::string> exposed;
    std::set<std::string> long_clickers;
  };
  std::map<std::string, Acc> by_ad;
  for (const auto& r : records) {
    Acc& a = by_ad[r.ad_id];
    if (r.event == Event::impression) {
      ++a.impressions;
      a.exposed.insert(r.user_id);
    } else if (r.dwell_seconds > dwell_threshold) {
      ++a.long_clicks;
      a.long_clickers.insert(r.user_id);
    }
  }
  StatsResult res;
  for (const auto& [ad, a] : by_ad) {
    for (const auto& u : a.long_clickers) {
      if (!a.exposed.contains(u)) res.issues.push_back({ad, u});
    }
    if (a.impressions == 0) {
      ++res.omitted_without_impressions;
      continue;
    }
    AdStats s;
    s.ad_id = ad;
    s.impressions = a.impressions;
    s.long_clicks = a.long_clicks;
    s.unique_users = static_cast<long>(a.exposed.size());
    s.unique_long_click_users = static_cast<long>(a.long_clickers.size());
    s.lcr = static_cast<double>(s.long_clicks) / static_cast<double>(s.impressions);
    s.rlcr = static_cast<double>(s.unique_long_click_users) / static_cast<double>(s.unique_users);
    res.ads.push_back(std::move(s));
  }
  return res;
}

std::vector<AdStats> filter_ads(const std::vector<AdStats>& stats, Metric metric) {
  std::vector<AdStats> out;
  for (const auto& s : stats) {
    const long count = metric == Metric::lcr ? s.long_clicks : s.unique_long_click_users;
    if (s.impressions >= kMinImpressions && count >= kMinLongClicks) out.push_back(s);
  }
  return out;
}

std::vector<QualityLabel> percentile_label(const std::vector<AdStats>& stats, Metric metric,
                                           double top_pct, double bottom_pct) {
  if (!(top_pct >= 0.0 && bottom_pct >= 0.0 && top_pct + bottom_pct <= 100.0 + 1e-9)) {
    throw ParameterError("percentiles must be non-negative and sum to at most 100");
  }
  std::vector<const AdStats*> order;
  for (const auto& s : stats) order.push_back(&s);
  std::sort(order.begin(), order.end(), [metric](const AdStats* a, const AdStats* b) {
    const double va = metric_value(*a, metric);
    const double vb = metric_value(*b, metric);
    if (va != vb) return va > vb;
    return a->ad_id < b->ad_id;
  });
  for (std::size_t i = 1; i < order.size(); ++i) {
    if (order[i]->ad_id == order[i - 1]->ad_id) {
      throw DataError("duplicate ad_id '" + order[i]->ad_id + "'");
    }
  }
  const long n = static_cast<long>(order.size());
  const long good = ceil_count(order.size(), top_pct);
  const long bad = ceil_count(order.size(), bottom_pct);
  if (good + bad > n) {
    throw DataError("good and bad sets overlap: " + std::to_string(good) + " + " +
                    std::to_string(bad) + " > " + std::to_string(n) + " ads");
  }
  std::vector<QualityLabel> out;
  for (long i = 0; i < n; ++i) {
    const int label = i < good ? 1 : (i >= n - bad ? 0 : -1);
    if (label < 0) continue;
    const AdStats& s = *order[static_cast<std::size_t>(i)];
    out.push_back({s.ad_id, label, metric, metric_value(s, metric)});
  }
  std::sort(out.begin(), out.end(),
            [](const QualityLabel& a, const QualityLabel& b) { return a.ad_id < b.ad_id; });
  return out;
}

void write_stats_csv(std::ostream& out, const std::vector<AdStats>& stats) {
  csv::write_row(out, {"ad_id", "impressions", "long_clicks", "unique_users",
                       "unique_long_click_users", "lcr", "rlcr"});
  for (const auto& s : stats) {
    csv::write_row(out, {s.ad_id, std::to_string(s.impressions), std::to_string(s.long_clicks),
                         std::to_string(s.unique_users), std::to_string(s.unique_long_click_users),
                         csv::format_double(s.lcr), csv::format_double(s.rlcr)});
  }
}

void write_labels_csv(std::ostream& out, const std::vector<QualityLabel>& labels) {
  csv::write_row(out, kLabelHeader);
  for (const auto& l : labels) {
    csv::write_row(out, {l.ad_id, std::to_string(l.label), std::string(metric_name(l.metric)),
                         csv::format_double(l.metric_value)});
  }
}

std::vector<QualityLabel> read_labels_csv(std::istream& in) {
  std::string line;
  if (!csv::read_line(in, line)) throw ParseError(1, 1, "missing header");
  expect_header(line, kLabelHeader);
  std::vector<QualityLabel> out;
  std::size_t line_no = 1;
  while (csv::read_line(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    const auto f = csv::split_line(line, line_no);
    if (f.size() != kLabelHeader.size()) {
      throw ParseError(line_no, std::min(f.size(), kLabelHeader.size()) + 1, "expected 4 columns");
    }
    QualityLabel l;
    l.ad_id = f[0];
    if (f[1] == "1") {
      l.label = 1;
    } else if (f[1] == "0") {
      l.label = 0;
    } else {
      throw ParseError(line_no, 2, "label must be 0 or 1");
    }
    try {
      l.metric = parse_metric(f[2]);
    } catch (const ParameterError& e) {
      throw ParseError(line_no, 3, e.what());
    }
    l.metric_value = csv::parse_double(f[3], line_no, 4);
    out.push_back(std::move(l));
  }
  return out;
}

std::vector<QualityLabel> read_labels_csv(const std::filesystem::path& path) {
  auto in = open_or_throw(path);
  return read_labels_csv(in);
}

}  // namespace adq::engagement
