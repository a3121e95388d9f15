#pragma once

#include <filesystem>
#include <span>
#include <string>
#include <vector>

namespace nscop {

/// One asset's ticks: (seconds since session open, natural log-price).
/// Immutable once constructed; the constructor enforces strictly increasing
/// finite times, finite prices and at least two ticks.
class TickSeries {
 public:
  TickSeries(std::vector<double> times, std::vector<double> log_prices,
             std::string asset_id = {});

  /// Builds from raw positive prices; the prices are kept verbatim so that
  /// re-serialising a loaded file reproduces the same doubles.
  static TickSeries from_prices(std::vector<double> times, std::vector<double> prices,
                                std::string asset_id = {});

  std::span<const double> times() const noexcept { return times_; }
  std::span<const double> log_prices() const noexcept { return log_prices_; }
  std::span<const double> prices() const noexcept { return prices_; }
  const std::string& asset_id() const noexcept { return asset_id_; }
  std::size_t size() const noexcept { return times_.size(); }

  double front_time() const noexcept { return times_.front(); }
  double back_time() const noexcept { return times_.back(); }

 private:
  std::vector<double> times_;
  std::vector<double> log_prices_;
  std::vector<double> prices_;
  std::string asset_id_;
};

/// Log-returns over consecutive interarrivals of a TickSeries.
struct ReturnSeries {
  std::vector<double> interval_starts;
  std::vector<double> interval_ends;
  std::vector<double> returns;

  std::size_t size() const noexcept { return returns.size(); }
};

/// Reads a `time,price` CSV. Lines starting with '#' are metadata and skipped;
/// CRLF line endings are accepted. Rows must already be in strictly
/// increasing time order.
TickSeries load_ticks(const std::filesystem::path& path, std::string asset_id = {});

/// Writes `time,price` with 17 significant digits so load_ticks round-trips.
/// `header_comments` lines are emitted first, each prefixed with "# ".
void write_ticks(const std::filesystem::path& path, const TickSeries& series,
                 const std::vector<std::string>& header_comments = {});

ReturnSeries to_returns(const TickSeries& series);

}  // namespace nscop
