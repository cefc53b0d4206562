/*
 * Copyright 2026 The NAGO Authors.
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include "nago/space_analytics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>

#include "nago/error.hpp"
#include "nago/generator.hpp"
#include "nago/parallel.hpp"
#include "nago/proxy_model.hpp"
#include "nago/random.hpp"
#include "nago/search_domain.hpp"

namespace nago {

using nlohmann::json;

void CardinalityParams::validate() const {
  if (n_o_max < 3 || n_c_max < 1 || n_s_max < 3 || m < 1) {
    throw ParameterError("cardinality needs n_o_max >= 3, n_c_max >= 1, n_s_max >= 3 and m >= 1");
  }
}

namespace {

BigInt pow2(long exponent) {
  BigInt one = 1;
  return one << exponent;
}

long phi(long n) { return n * (n + 1) / 2; }

std::string format_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.10g", v);
  return buf;
}

double mean_of(std::span<const double> v) {
  return v.empty() ? 0.0 : std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

double pstdev(std::span<const double> v) {
  if (v.size() < 2) return 0.0;
  const double m = mean_of(v);
  double acc = 0.0;
  for (double x : v) acc += (x - m) * (x - m);
  return std::sqrt(acc / static_cast<double>(v.size()));
}

// Linear interpolation between order statistics.
double quantile(std::vector<double> sorted, double q) {
  const double pos = q * static_cast<double>(sorted.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const auto hi = std::min(lo + 1, sorted.size() - 1);
  return sorted[lo] + (pos - static_cast<double>(lo)) * (sorted[hi] - sorted[lo]);
}

}  // namespace

BigInt hnag_cardinality(const CardinalityParams& p) {
  p.validate();
  BigInt top = 0;
  for (long n = 3; n <= p.n_o_max; ++n) top += pow2(phi(n));
  BigInt mid = 0;
  for (long n = 1; n <= p.n_c_max; ++n) mid += pow2(phi(n));
  BigInt bottom = 0;
  for (long n = 3; n <= p.n_s_max; ++n) {
    BigInt ops = boost::multiprecision::pow(BigInt(p.m), static_cast<unsigned>(n));
    bottom += pow2(phi(n)) * ops;
  }
  return top * mid * bottom;
}

BigInt darts_cardinality() { return boost::multiprecision::pow(BigInt(8), 14); }

std::string scientific(const BigInt& value, int significant_digits) {
  if (significant_digits < 1) throw ParameterError("scientific: need at least one significant digit");
  const bool negative = value < 0;
  std::string digits = (negative ? BigInt(-value) : value).str();
  if (digits == "0") return "0e0";
  int exponent = static_cast<int>(digits.size()) - 1;
  std::string head = digits.substr(0, std::min<std::size_t>(digits.size(), significant_digits));
  head.resize(static_cast<std::size_t>(significant_digits), '0');
  if (digits.size() > static_cast<std::size_t>(significant_digits) && digits[significant_digits] >= '5') {
    int i = significant_digits - 1;
    while (i >= 0 && head[i] == '9') head[i--] = '0';
    if (i >= 0) {
      ++head[i];
    } else {
      head.insert(head.begin(), '1');
      head.pop_back();
      ++exponent;
    }
  }
  std::string out = negative ? "-" : "";
  out += head[0];
  if (significant_digits > 1) out += "." + head.substr(1);
  return out + "e" + std::to_string(exponent);
}

std::int64_t possible_connections(int n) { return static_cast<std::int64_t>(n) * (n - 1) / 2; }

int freedman_diaconis_bins(std::span<const double> values) {
  if (values.size() < 2) return 1;
  std::vector<double> sorted(values.begin(), values.end());
  std::sort(sorted.begin(), sorted.end());
  const double range = sorted.back() - sorted.front();
  if (!(range > 0.0)) return 1;
  const double iqr = quantile(sorted, 0.75) - quantile(sorted, 0.25);
  const double n = static_cast<double>(sorted.size());
  if (!(iqr > 0.0)) return static_cast<int>(std::ceil(std::log2(n))) + 1;
  const double width = 2.0 * iqr / std::cbrt(n);
  return std::clamp(static_cast<int>(std::ceil(range / width)), 1, 10000);
}

Histogram make_histogram(std::span<const double> values, int bins) {
  if (values.empty()) throw InsufficientDataError("histogram needs at least one value");
  for (double v : values) {
    if (!std::isfinite(v)) throw ParameterError("histogram values must be finite");
  }
  if (bins <= 0) bins = freedman_diaconis_bins(values);
  const auto [lo_it, hi_it] = std::minmax_element(values.begin(), values.end());
  double lo = *lo_it;
  double hi = *hi_it;
  if (!(hi > lo)) {
    lo -= 0.5;
    hi += 0.5;
    bins = 1;
  }
  Histogram h;
  h.counts.assign(static_cast<std::size_t>(bins), 0);
  h.edges.resize(static_cast<std::size_t>(bins) + 1);
  for (int i = 0; i <= bins; ++i) h.edges[i] = lo + (hi - lo) * i / bins;
  h.edges.back() = hi;
  for (double v : values) {
    auto idx = static_cast<int>(std::floor((v - lo) / (hi - lo) * bins));
    ++h.counts[static_cast<std::size_t>(std::clamp(idx, 0, bins - 1))];
  }
  return h;
}

std::string histogram_csv(const Histogram& h) {
  std::string out = "bin_lo,bin_hi,count\n";
  for (std::size_t i = 0; i < h.counts.size(); ++i) {
    out += format_double(h.edges[i]) + "," + format_double(h.edges[i + 1]) + "," + std::to_string(h.counts[i]) + "\n";
  }
  return out;
}

SpaceKind space_kind_from_string(const std::string& name) {
  if (name == "hnag") return SpaceKind::Hnag;
  if (name == "rnag") return SpaceKind::Rnag;
  throw ParameterError("unknown space '" + name + "' (expected hnag or rnag)");
}

std::string to_string(SpaceKind kind) { return kind == SpaceKind::Hnag ? "hnag" : "rnag"; }

namespace {

json draw_theta(const SearchDomain& domain, RandomStream rng) {
  const auto unit = domain.sample_unit(rng);
  return domain.theta_json(domain.to_native(unit));
}

ArchitectureSample sample_architecture(const json& theta, std::uint64_t seed, const SpaceSampleOptions& options) {
  SampleOptions so;
  so.cost = options.cost;
  const ArchitectureIR ir = options.space == SpaceKind::Hnag
                                ? sample_hnag(hnag_theta_from_json(theta), seed, options.param_budget, so)
                                : sample_rnag(rnag_theta_from_json(theta), seed, options.param_budget, so);
  ArchitectureSample s;
  s.theta = theta;
  s.seed = seed;
  s.cost = price(ir, options.memory, options.cost);
  s.compute_nodes = ir.compute_node_count();
  s.mean_path_length = mean_path_length(ir);
  return s;
}

SearchDomain domain_for(SpaceKind kind) { return kind == SpaceKind::Hnag ? SearchDomain::hnag() : SearchDomain::rnag(); }

}  // namespace

std::vector<ArchitectureSample> sample_space(int count, std::uint64_t seed, const SpaceSampleOptions& options) {
  if (count < 1) throw ParameterError("sample count must be at least 1");
  const SearchDomain domain = domain_for(options.space);
  const RandomStream root(seed);
  std::vector<ArchitectureSample> out(static_cast<std::size_t>(count));
  parallel_for(out.size(), options.threads, [&](std::size_t i) {
    const json theta = draw_theta(domain, root.split({i, 0}));
    out[i] = sample_architecture(theta, root.derive_seed({i, 1, 0}), options);
  });
  return out;
}

MemoryHistogram memory_histogram(int sample_count, std::uint64_t seed, const SpaceSampleOptions& options, int bins) {
  MemoryHistogram result;
  result.samples = sample_space(sample_count, seed, options);
  std::vector<double> memory;
  memory.reserve(result.samples.size());
  for (const auto& s : result.samples) memory.push_back(s.cost.memory_mb);
  result.histogram = make_histogram(memory, bins);
  return result;
}

std::vector<double> average_ranks(std::span<const double> values) {
  std::vector<std::size_t> order(values.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });
  std::vector<double> ranks(values.size());
  std::size_t i = 0;
  while (i < order.size()) {
    std::size_t j = i;
    while (j + 1 < order.size() && values[order[j + 1]] == values[order[i]]) ++j;
    const double rank = (static_cast<double>(i) + static_cast<double>(j)) / 2.0 + 1.0;
    for (std::size_t t = i; t <= j; ++t) ranks[order[t]] = rank;
    i = j + 1;
  }
  return ranks;
}

double rank_correlation(std::span<const std::pair<double, double>> pairs) {
  if (pairs.size() < 2) throw InsufficientDataError("rank correlation needs at least two pairs");
  std::vector<double> a;
  std::vector<double> b;
  a.reserve(pairs.size());
  b.reserve(pairs.size());
  for (const auto& [x, y] : pairs) {
    if (!std::isfinite(x) || !std::isfinite(y)) throw ParameterError("rank correlation input must be finite");
    a.push_back(x);
    b.push_back(y);
  }
  const auto ra = average_ranks(a);
  const auto rb = average_ranks(b);
  const double ma = mean_of(ra);
  const double mb = mean_of(rb);
  double sab = 0.0;
  double saa = 0.0;
  double sbb = 0.0;
  for (std::size_t i = 0; i < ra.size(); ++i) {
    sab += (ra[i] - ma) * (rb[i] - mb);
    saa += (ra[i] - ma) * (ra[i] - ma);
    sbb += (rb[i] - mb) * (rb[i] - mb);
  }
  if (saa == 0.0 || sbb == 0.0) return 0.0;
  return std::clamp(sab / std::sqrt(saa * sbb), -1.0, 1.0);
}

std::vector<StudyRow> sample_study(int theta_count, int draws_per_theta, std::uint64_t seed,
                                   const SpaceSampleOptions& options) {
  if (theta_count < 1) throw ParameterError("study needs at least one generator vector");
  if (draws_per_theta < 1) throw ParameterError("study needs at least one architecture draw per generator vector");
  const SearchDomain domain = domain_for(options.space);
  const RandomStream root(seed);
  const auto thetas = static_cast<std::size_t>(theta_count);
  const auto draws = static_cast<std::size_t>(draws_per_theta);
  std::vector<json> theta_docs(thetas);
  for (std::size_t i = 0; i < thetas; ++i) theta_docs[i] = draw_theta(domain, root.split({i, 0}));

  std::vector<ArchitectureSample> cells(thetas * draws);
  parallel_for(cells.size(), options.threads, [&](std::size_t c) {
    const std::size_t i = c / draws;
    const std::size_t j = c % draws;
    cells[c] = sample_architecture(theta_docs[i], root.derive_seed({i, 1, j}), options);
  });

  std::vector<StudyRow> rows(thetas);
  for (std::size_t i = 0; i < thetas; ++i) {
    std::vector<double> err;
    std::vector<double> mem;
    std::vector<double> time;
    for (std::size_t j = 0; j < draws; ++j) {
      const auto& s = cells[i * draws + j];
      err.push_back(proxy_error_full_budget({std::log10(std::max<double>(1.0, static_cast<double>(s.cost.flops))),
                                             s.mean_path_length, s.compute_nodes}));
      mem.push_back(s.cost.memory_mb);
      time.push_back(s.cost.time_proxy);
    }
    auto& row = rows[i];
    row.theta_index = i;
    row.theta = theta_docs[i];
    row.draws = draws_per_theta;
    row.mean_error = mean_of(err);
    row.std_error = pstdev(err);
    row.mean_memory_mb = mean_of(mem);
    row.std_memory_mb = pstdev(mem);
    row.mean_time_proxy = mean_of(time);
    row.std_time_proxy = pstdev(time);
  }
  return rows;
}

std::string study_csv(std::span<const StudyRow> rows) {
  std::string out =
      "theta_index,draws,mean_error,std_error,mean_memory_mb,std_memory_mb,mean_time_proxy,std_time_proxy,theta\n";
  for (const auto& r : rows) {
    std::string theta = r.theta.dump();
    std::string quoted = "\"";
    for (char ch : theta) quoted += ch == '"' ? std::string("\"\"") : std::string(1, ch);
    quoted += "\"";
    out += std::to_string(r.theta_index) + "," + std::to_string(r.draws) + "," + format_double(r.mean_error) + "," +
           format_double(r.std_error) + "," + format_double(r.mean_memory_mb) + "," + format_double(r.std_memory_mb) +
           "," + format_double(r.mean_time_proxy) + "," + format_double(r.std_time_proxy) + "," + quoted + "\n";
  }
  return out;
}

}  // namespace nago
