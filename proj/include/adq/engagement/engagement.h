#pragma once

#include <filesystem>
#include <istream>
#include <ostream>
#include <string>
#include <string_view>
#include <vector>

namespace adq::engagement {

enum class Event { impression, click };

struct EngagementRecord {
  std::string ad_id;
  std::string user_id;
  Event event = Event::impression;
  double dwell_seconds = 0.0;
  double timestamp = 0.0;
};

struct AdStats {
  std::string ad_id;
  long impressions = 0;
  long long_clicks = 0;
  long unique_users = 0;
  long unique_long_click_users = 0;
  double lcr = 0.0;
  double rlcr = 0.0;
};

/// A long click whose user has no impression of that ad.
struct ConsistencyIssue {
  std::string ad_id;
  std::string user_id;
};

struct StatsResult {
  std::vector<AdStats> ads;  ///< sorted by ad_id
  std::size_t omitted_without_impressions = 0;
  std::vector<ConsistencyIssue> issues;  ///< sorted by (ad_id, user_id)
};

enum class Metric { lcr, rlcr };

struct QualityLabel {
  std::string ad_id;
  int label = 0;  ///< 1 good, 0 bad
  Metric metric = Metric::lcr;
  double metric_value = 0.0;
};

inline constexpr double kDwellThreshold = 5.0;
inline constexpr long kMinImpressions = 500;
inline constexpr long kMinLongClicks = 2;
inline constexpr double kDefaultPercentile = 30.0;

std::string_view metric_name(Metric m);
/// Accepts "LCR" / "R-LCR" (case-insensitive). Throws ParameterError otherwise.
Metric parse_metric(std::string_view text);
double metric_value(const AdStats& s, Metric m);

/// Header must be ad_id,user_id,event,dwell_seconds,timestamp. Throws ParseError.
std::vector<EngagementRecord> parse_event_log(std::istream& in);
std::vector<EngagementRecord> parse_event_log(const std::filesystem::path& path);

/// Long click: click with dwell strictly greater than the threshold.
StatsResult compute_stats(const std::vector<EngagementRecord>& records,
                          double dwell_threshold = kDwellThreshold);

/// Keeps ads with >= 500 impressions and >= 2 long clicks (LCR) or long-click users (R-LCR).
std::vector<AdStats> filter_ads(const std::vector<AdStats>& stats, Metric metric);

/// Descending by metric, ties by ad_id. Top ceil(n*top/100) good, bottom ceil(n*bottom/100) bad.
/// Output is sorted by ad_id. Throws DataError if the two sets would overlap.
std::vector<QualityLabel> percentile_label(const std::vector<AdStats>& stats, Metric metric,
                                           double top_pct = kDefaultPercentile,
                                           double bottom_pct = kDefaultPercentile);

void write_stats_csv(std::ostream& out, const std::vector<AdStats>& stats);
void write_labels_csv(std::ostream& out, const std::vector<QualityLabel>& labels);
std::vector<QualityLabel> read_labels_csv(std::istream& in);
std::vector<QualityLabel> read_labels_csv(const std::filesystem::path& path);

}  // namespace adq::engagement
