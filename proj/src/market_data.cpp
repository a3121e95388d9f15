#include "nscop/market_data.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <sstream>

#include "nscop/errors.hpp"

namespace nscop {

namespace {

void check_times(const std::vector<double>& times) {
  for (std::size_t i = 0; i < times.size(); ++i) {
    if (!std::isfinite(times[i])) {
      fail(ErrorKind::MalformedInput, "non-finite time at index " + std::to_string(i));
    }
    if (i > 0 && !(times[i] > times[i - 1])) {
      fail(ErrorKind::MalformedInput,
           (times[i] == times[i - 1] ? "duplicate time at index " : "non-monotone time at index ") +
               std::to_string(i));
    }
  }
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

bool parse_double(std::string_view s, double& out) {
  s = trim(s);
  if (s.empty()) return false;
  if (s.front() == '+') s.remove_prefix(1);
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
  return ec == std::errc() && ptr == s.data() + s.size();
}

}  // namespace

TickSeries::TickSeries(std::vector<double> times, std::vector<double> log_prices,
                       std::string asset_id)
    : times_(std::move(times)), log_prices_(std::move(log_prices)), asset_id_(std::move(asset_id)) {
  if (times_.size() != log_prices_.size()) {
    fail(ErrorKind::MalformedInput, "times and log_prices differ in length");
  }
  if (times_.size() < 2) {
    fail(ErrorKind::InsufficientData, "a tick series needs at least two ticks");
  }
  check_times(times_);
  prices_.reserve(log_prices_.size());
  for (std::size_t i = 0; i < log_prices_.size(); ++i) {
    if (!std::isfinite(log_prices_[i])) {
      fail(ErrorKind::MalformedInput, "non-finite log-price at index " + std::to_string(i));
    }
    prices_.push_back(std::exp(log_prices_[i]));
  }
}

TickSeries TickSeries::from_prices(std::vector<double> times, std::vector<double> prices,
                                   std::string asset_id) {
  std::vector<double> logs;
  logs.reserve(prices.size());
  for (std::size_t i = 0; i < prices.size(); ++i) {
    if (!(prices[i] > 0.0) || !std::isfinite(prices[i])) {
      fail(ErrorKind::MalformedInput, "non-positive price at index " + std::to_string(i));
    }
    logs.push_back(std::log(prices[i]));
  }
  TickSeries out(std::move(times), std::move(logs), std::move(asset_id));
  out.prices_ = std::move(prices);
  return out;
}

TickSeries load_ticks(const std::filesystem::path& path, std::string asset_id) {
  std::ifstream in(path);
  if (!in) fail(ErrorKind::MalformedInput, "cannot open " + path.string());

  std::vector<double> times;
  std::vector<double> prices;
  std::string line;
  bool header_seen = false;
  std::size_t row = 0;  // 1-based data row index, as reported in errors
  while (std::getline(in, line)) {
    std::string_view view = trim(line);
    if (view.empty() || view.front() == '#') continue;
    if (!header_seen) {
      if (view != "time,price") {
        fail(ErrorKind::MalformedInput, "expected header 'time,price' in " + path.string());
      }
      header_seen = true;
      continue;
    }
    ++row;
    auto comma = view.find(',');
    double t = 0.0;
    double p = 0.0;
    if (comma == std::string_view::npos || !parse_double(view.substr(0, comma), t) ||
        !parse_double(view.substr(comma + 1), p)) {
      fail(ErrorKind::MalformedInput, "unparseable row " + std::to_string(row));
    }
    if (!std::isfinite(t)) fail(ErrorKind::MalformedInput, "non-finite time at row " + std::to_string(row));
    if (!(p > 0.0) || !std::isfinite(p)) {
      fail(ErrorKind::MalformedInput, "non-positive price at row " + std::to_string(row));
    }
    if (!times.empty() && t == times.back()) {
      fail(ErrorKind::MalformedInput, "duplicate time at row " + std::to_string(row));
    }
    if (!times.empty() && t < times.back()) {
      fail(ErrorKind::MalformedInput, "non-monotone time at row " + std::to_string(row));
    }
    times.push_back(t);
    prices.push_back(p);
  }
  if (!header_seen) fail(ErrorKind::MalformedInput, "missing header in " + path.string());
  return TickSeries::from_prices(std::move(times), std::move(prices), std::move(asset_id));
}

void write_ticks(const std::filesystem::path& path, const TickSeries& series,
                 const std::vector<std::string>& header_comments) {
  std::ofstream out(path);
  if (!out) fail(ErrorKind::MalformedInput, "cannot write " + path.string());
  for (const auto& c : header_comments) out << "# " << c << '\n';
  out << "time,price\n" << std::setprecision(17);
  auto t = series.times();
  auto p = series.prices();
  for (std::size_t i = 0; i < t.size(); ++i) out << t[i] << ',' << p[i] << '\n';
}

ReturnSeries to_returns(const TickSeries& series) {
  if (series.size() < 2) fail(ErrorKind::InsufficientData, "need at least two ticks for a return");
  auto t = series.times();
  auto x = series.log_prices();
  ReturnSeries r;
  r.interval_starts.assign(t.begin(), t.end() - 1);
  r.interval_ends.assign(t.begin() + 1, t.end());
  r.returns.reserve(t.size() - 1);
  for (std::size_t k = 0; k + 1 < x.size(); ++k) r.returns.push_back(x[k + 1] - x[k]);
  return r;
}

}  // namespace nscop
