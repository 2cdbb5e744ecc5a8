// cada/analysis.cc

// Copyright 2026 CADA-GAN Authors

// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0
//
// THIS CODE IS PROVIDED *AS IS* BASIS, WITHOUT WARRANTIES OR CONDITIONS OF ANY
// KIND, EITHER EXPRESS OR IMPLIED, INCLUDING WITHOUT LIMITATION ANY IMPLIED
// WARRANTIES OR CONDITIONS OF TITLE, FITNESS FOR A PARTICULAR PURPOSE,
// MERCHANTABLITY OR NON-INFRINGEMENT.
// See the Apache 2 License for the specific language governing permissions and
// limitations under the License.

#include "cada/analysis.h"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <numeric>
#include <sstream>

#include <json.hpp>

#include "cada/common.h"
#include "cada/rng.h"
#include "cada/trainer.h"

namespace cada {

namespace {

std::vector<std::array<double, 2>> PcaProject(const std::vector<Tensor>& embeddings) {
  int64_t n = int64_t(embeddings.size());
  int64_t d = embeddings[0].size();
  Eigen::MatrixXd x(n, d);
  for (int64_t i = 0; i < n; ++i) {
    CADA_CHECK(embeddings[size_t(i)].size() == d, "project_2d: embedding dimension mismatch");
    for (int64_t j = 0; j < d; ++j) x(i, j) = embeddings[size_t(i)][j];
  }
  Eigen::RowVectorXd mean = x.colwise().mean();
  x.rowwise() -= mean;
  Eigen::MatrixXd cov = (x.transpose() * x) / double(std::max<int64_t>(1, n - 1));
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(cov);
  CADA_CHECK(es.info() == Eigen::Success, "project_2d: eigendecomposition failed");

  // Eigenvalues ascend; take the top one or two axes.
  std::vector<std::array<double, 2>> out(size_t(n), {0.0, 0.0});
  int n_axes = d >= 2 ? 2 : 1;
  for (int a = 0; a < n_axes; ++a) {
    Eigen::VectorXd axis = es.eigenvectors().col(d - 1 - a);
    // Sign convention: the largest-magnitude component is positive.
    int64_t arg = 0;
    for (int64_t j = 1; j < d; ++j)
      if (std::fabs(axis(j)) > std::fabs(axis(arg))) arg = j;
    if (axis(arg) < 0) axis = -axis;
    Eigen::VectorXd proj = x * axis;
    for (int64_t i = 0; i < n; ++i) out[size_t(i)][size_t(a)] = proj(i);
  }
  return out;
}

// Neighbor-graph layout: seeded force-directed refinement starting from the
// PCA view. Attraction along kNN edges, mild all-pairs repulsion.
std::vector<std::array<double, 2>> UmapLikeProject(const std::vector<Tensor>& embeddings,
                                                   uint64_t seed) {
  auto coords = PcaProject(embeddings);
  int64_t n = int64_t(embeddings.size());
  int64_t k = std::min<int64_t>(10, n - 1);

  // kNN edges in the original space.
  std::vector<std::vector<int64_t>> nbrs(static_cast<size_t>(n));
  for (int64_t i = 0; i < n; ++i) {
    std::vector<std::pair<double, int64_t>> dist;
    for (int64_t j = 0; j < n; ++j) {
      if (i == j) continue;
      double d2 = 0;
      for (int64_t t = 0; t < embeddings[size_t(i)].size(); ++t) {
        double d = embeddings[size_t(i)][t] - embeddings[size_t(j)][t];
        d2 += d * d;
      }
      dist.emplace_back(d2, j);
    }
    std::partial_sort(dist.begin(), dist.begin() + k, dist.end());
    for (int64_t t = 0; t < k; ++t) nbrs[size_t(i)].push_back(dist[size_t(t)].second);
  }

  Rng rng = Rng::Keyed(seed, 0x07a1);
  for (int iter = 0; iter < 200; ++iter) {
    double lr = 0.1 * (1.0 - double(iter) / 200.0);
    for (int64_t i = 0; i < n; ++i) {
      for (int64_t j : nbrs[size_t(i)]) {
        double dx = coords[size_t(j)][0] - coords[size_t(i)][0];
        double dy = coords[size_t(j)][1] - coords[size_t(i)][1];
        coords[size_t(i)][0] += lr * 0.1 * dx;
        coords[size_t(i)][1] += lr * 0.1 * dy;
      }
      int64_t j = int64_t(rng.NextBelow(uint64_t(n)));
      if (j != i) {
        double dx = coords[size_t(j)][0] - coords[size_t(i)][0];
        double dy = coords[size_t(j)][1] - coords[size_t(i)][1];
        double d2 = dx * dx + dy * dy + 1e-3;
        coords[size_t(i)][0] -= lr * 0.05 * dx / d2;
        coords[size_t(i)][1] -= lr * 0.05 * dy / d2;
      }
    }
  }
  return coords;
}

std::vector<double> AverageRanks(const std::vector<double>& v) {
  int64_t n = int64_t(v.size());
  std::vector<int64_t> order(static_cast<size_t>(n));
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](int64_t a, int64_t b) { return v[size_t(a)] < v[size_t(b)]; });
  std::vector<double> ranks(static_cast<size_t>(n));
  int64_t i = 0;
  while (i < n) {
    int64_t j = i;
    while (j + 1 < n && v[size_t(order[size_t(j + 1)])] == v[size_t(order[size_t(i)])]) ++j;
    double avg = 0.5 * double(i + j) + 1.0;  // 1-based average rank of the tie run
    for (int64_t t = i; t <= j; ++t) ranks[size_t(order[size_t(t)])] = avg;
    i = j + 1;
  }
  return ranks;
}

double Pearson(const std::vector<double>& x, const std::vector<double>& y) {
  int64_t n = int64_t(x.size());
  double mx = 0, my = 0;
  for (int64_t i = 0; i < n; ++i) {
    mx += x[size_t(i)];
    my += y[size_t(i)];
  }
  mx /= double(n);
  my /= double(n);
  double vx = 0, vy = 0, cov = 0;
  for (int64_t i = 0; i < n; ++i) {
    double dx = x[size_t(i)] - mx, dy = y[size_t(i)] - my;
    vx += dx * dx;
    vy += dy * dy;
    cov += dx * dy;
  }
  if (vx <= 0 || vy <= 0) return 0.0;
  return cov / std::sqrt(vx * vy);
}

std::string FormatG(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.6g", v);
  return buf;
}

const char* kPalette[] = {"#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd",
                          "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22", "#17becf"};

}  // namespace

std::vector<std::array<double, 2>> Project2D(const std::vector<Tensor>& embeddings,
                                             ProjectionMethod method, uint64_t seed) {
  CADA_CHECK(embeddings.size() >= 3, "project_2d needs at least 3 embeddings, got "
                                         << embeddings.size());
  if (method == ProjectionMethod::kPca) return PcaProject(embeddings);
  return UmapLikeProject(embeddings, seed);
}

double Silhouette(const std::vector<std::array<double, 2>>& points,
                  const std::vector<int>& labels) {
  CADA_CHECK(points.size() == labels.size() && !points.empty(), "silhouette: size mismatch");
  std::map<int, std::vector<size_t>> clusters;
  for (size_t i = 0; i < labels.size(); ++i) clusters[labels[i]].push_back(i);
  CADA_CHECK(clusters.size() >= 2, "silhouette needs at least 2 clusters");

  auto dist = [&](size_t a, size_t b2) {
    double dx = points[a][0] - points[b2][0], dy = points[a][1] - points[b2][1];
    return std::sqrt(dx * dx + dy * dy);
  };

  double total = 0;
  for (size_t i = 0; i < points.size(); ++i) {
    const auto& own = clusters[labels[i]];
    if (own.size() < 2) continue;  // singleton: s = 0 contribution
    double a = 0;
    for (size_t j : own)
      if (j != i) a += dist(i, j);
    a /= double(own.size() - 1);
    double b = 1e300;
    for (const auto& [lab, members] : clusters) {
      if (lab == labels[i]) continue;
      double m = 0;
      for (size_t j : members) m += dist(i, j);
      b = std::min(b, m / double(members.size()));
    }
    total += (b - a) / std::max(a, b);
  }
  return total / double(points.size());
}

double SpearmanCorr(const std::vector<double>& x, const std::vector<double>& y) {
  CADA_CHECK(x.size() == y.size() && x.size() >= 2, "spearman needs >= 2 aligned samples");
  return Pearson(AverageRanks(x), AverageRanks(y));
}

DistanceCurve ComputeDistanceCurve(const std::string& metrics_csv_path) {
  std::ifstream in(metrics_csv_path);
  if (!in) throw IoError("cannot open metrics csv: " + metrics_csv_path);
  std::string header;
  std::getline(in, header);
  std::vector<std::string> cols;
  {
    std::stringstream ss(header);
    std::string c;
    while (std::getline(ss, c, ',')) cols.push_back(c);
  }
  auto col_of = [&](const std::string& name) {
    auto it = std::find(cols.begin(), cols.end(), name);
    CADA_CHECK(it != cols.end(), "metrics csv " << metrics_csv_path << " is missing column '"
                                                << name << "'");
    return size_t(it - cols.begin());
  };
  size_t c_epoch = col_of("epoch");
  size_t c_loss = col_of("val_loss");
  size_t c_dist = col_of("mean_pairwise_distance");

  DistanceCurve out;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<double> vals;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) vals.push_back(std::stod(cell));
    CADA_CHECK(vals.size() == cols.size(), "metrics csv row has wrong arity: " << line);
    out.epochs.push_back(vals[c_epoch]);
    out.val_loss.push_back(vals[c_loss]);
    out.distance.push_back(vals[c_dist]);
  }
  CADA_CHECK(out.epochs.size() >= 2, "distance_curve needs >= 2 epochs, got " << out.epochs.size());
  out.corr_epoch_loss = SpearmanCorr(out.epochs, out.val_loss);
  out.corr_epoch_distance = SpearmanCorr(out.epochs, out.distance);
  return out;
}

void WriteEmbeddingsCsv(const std::string& path, const std::vector<EmbeddingPoint>& points) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw IoError("cannot write embeddings csv: " + path);
  out << "utt_id,channel,x,y\n";
  char buf[128];
  for (const auto& p : points) {
    std::snprintf(buf, sizeof(buf), ",%.17g,%.17g\n", p.x, p.y);
    out << p.utt_id << "," << p.label << buf;
  }
}

std::vector<EmbeddingPoint> ReadEmbeddingsCsv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open embeddings csv: " + path);
  std::string line;
  std::getline(in, line);
  CADA_CHECK(line == "utt_id,channel,x,y", "unexpected embeddings csv header: " << line);
  std::vector<EmbeddingPoint> out;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::stringstream ss(line);
    EmbeddingPoint p;
    std::string x, y;
    CADA_CHECK(std::getline(ss, p.utt_id, ',') && std::getline(ss, p.label, ',') &&
                   std::getline(ss, x, ',') && std::getline(ss, y, ','),
               "bad embeddings csv row: " << line);
    p.x = std::stod(x);
    p.y = std::stod(y);
    out.push_back(std::move(p));
  }
  return out;
}

namespace {

struct Bounds {
  double xmin = 0, xmax = 1, ymin = 0, ymax = 1;
  void Grow(double x, double y) {
    xmin = std::min(xmin, x);
    xmax = std::max(xmax, x);
    ymin = std::min(ymin, y);
    ymax = std::max(ymax, y);
  }
};

constexpr int kW = 640, kH = 480, kMargin = 48;

double MapX(const Bounds& b, double x) {
  double span = b.xmax - b.xmin;
  if (span <= 0) span = 1;
  return kMargin + (x - b.xmin) / span * (kW - 2 * kMargin);
}
double MapY(const Bounds& b, double y) {
  double span = b.ymax - b.ymin;
  if (span <= 0) span = 1;
  return kH - kMargin - (y - b.ymin) / span * (kH - 2 * kMargin);
}

}  // namespace

void WriteScatterSvg(const std::string& path, const std::vector<EmbeddingPoint>& points,
                     const std::string& title) {
  Bounds b;
  if (!points.empty()) {
    b = {points[0].x, points[0].x, points[0].y, points[0].y};
    for (const auto& p : points) b.Grow(p.x, p.y);
  }
  std::map<std::string, int> color_of;
  for (const auto& p : points)
    color_of.emplace(p.label, int(color_of.size()));

  std::ofstream out(path, std::ios::trunc);
  if (!out) throw IoError("cannot write svg: " + path);
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kW << "\" height=\"" << kH
      << "\">\n<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n"
      << "<text x=\"16\" y=\"24\" font-family=\"sans-serif\" font-size=\"14\">" << title
      << "</text>\n";
  for (const auto& p : points) {
    const char* color = kPalette[size_t(color_of[p.label]) % 10];
    out << "<circle cx=\"" << FormatG(MapX(b, p.x)) << "\" cy=\"" << FormatG(MapY(b, p.y))
        << "\" r=\"3\" fill=\"" << color << "\" fill-opacity=\"0.75\"/>\n";
  }
  int row = 0;
  for (const auto& [label, idx] : color_of) {
    out << "<circle cx=\"" << kW - 150 << "\" cy=\"" << 40 + row * 18 << "\" r=\"4\" fill=\""
        << kPalette[size_t(idx) % 10] << "\"/>\n<text x=\"" << kW - 140 << "\" y=\""
        << 44 + row * 18 << "\" font-family=\"sans-serif\" font-size=\"12\">" << label
        << "</text>\n";
    ++row;
  }
  out << "</svg>\n";
}

void WriteLinesSvg(const std::string& path, const std::vector<double>& xs,
                   const std::vector<std::pair<std::string, std::vector<double>>>& series,
                   const std::string& title) {
  CADA_CHECK(!xs.empty() && !series.empty(), "lines plot needs data");
  Bounds b{xs.front(), xs.front(), series[0].second.front(), series[0].second.front()};
  for (const auto& [name, ys] : series) {
    CADA_CHECK(ys.size() == xs.size(), "series '" << name << "' length mismatch");
    for (size_t i = 0; i < xs.size(); ++i) b.Grow(xs[i], ys[i]);
  }
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw IoError("cannot write svg: " + path);
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kW << "\" height=\"" << kH
      << "\">\n<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n"
      << "<text x=\"16\" y=\"24\" font-family=\"sans-serif\" font-size=\"14\">" << title
      << "</text>\n";
  for (size_t s = 0; s < series.size(); ++s) {
    out << "<polyline fill=\"none\" stroke=\"" << kPalette[s % 10] << "\" stroke-width=\"1.5\" points=\"";
    for (size_t i = 0; i < xs.size(); ++i) {
      if (i) out << " ";
      out << FormatG(MapX(b, xs[i])) << "," << FormatG(MapY(b, series[s].second[i]));
    }
    out << "\"/>\n<text x=\"" << kW - 150 << "\" y=\"" << 40 + s * 18
        << "\" font-family=\"sans-serif\" font-size=\"12\" fill=\"" << kPalette[s % 10] << "\">"
        << series[s].first << "</text>\n";
  }
  out << "</svg>\n";
}

std::string EmitReport(const std::string& run_dir) {
  namespace fs = std::filesystem;
  std::string enc_csv = (fs::path(run_dir) / "encoder_metrics.csv").string();
  std::string emb_csv = (fs::path(run_dir) / "embeddings.csv").string();
  std::string gan_csv = (fs::path(run_dir) / "metrics.csv").string();
  if (!fs::exists(enc_csv)) throw IoError("report: missing input " + enc_csv);
  if (!fs::exists(emb_csv)) throw IoError("report: missing input " + emb_csv);

  std::string report_dir = (fs::path(run_dir) / "report").string();
  std::error_code ec;
  fs::create_directories(report_dir, ec);
  if (ec) throw IoError("cannot create report dir: " + ec.message());

  DistanceCurve curve = ComputeDistanceCurve(enc_csv);
  std::vector<EmbeddingPoint> points = ReadEmbeddingsCsv(emb_csv);

  std::vector<int> labels;
  {
    std::map<std::string, int> label_ids;
    for (const auto& p : points) label_ids.emplace(p.label, int(label_ids.size()));
    for (const auto& p : points) labels.push_back(label_ids[p.label]);
  }
  std::vector<std::array<double, 2>> coords;
  for (const auto& p : points) coords.push_back({p.x, p.y});
  double silhouette = points.empty() ? 0.0 : Silhouette(coords, labels);

  WriteScatterSvg((fs::path(report_dir) / "projection.svg").string(), points,
                  "Channel embeddings (2D projection)");
  WriteLinesSvg((fs::path(report_dir) / "distance_curve.svg").string(), curve.epochs,
                {{"val_loss", curve.val_loss}, {"pairwise_distance", curve.distance}},
                "Encoder validation loss vs pairwise embedding distance");

  nlohmann::json summary;
  summary["encoder"]["corr_epoch_val_loss"] = curve.corr_epoch_loss;
  summary["encoder"]["corr_epoch_distance"] = curve.corr_epoch_distance;
  summary["encoder"]["epochs"] = curve.epochs.size();
  summary["embeddings"]["count"] = points.size();
  summary["embeddings"]["silhouette"] = silhouette;

  if (fs::exists(gan_csv)) {
    std::vector<LossBreakdown> rows = ReadGanMetricsCsv(gan_csv);
    if (!rows.empty()) {
      std::vector<double> steps, total, ch;
      for (size_t i = 0; i < rows.size(); ++i) {
        steps.push_back(double(i + 1));
        total.push_back(rows[i].total);
        ch.push_back(rows[i].ch);
      }
      WriteLinesSvg((fs::path(report_dir) / "loss_curves.svg").string(), steps,
                    {{"total", total}, {"channel_recon", ch}}, "Training losses");
      summary["train"]["steps"] = rows.size();
      summary["train"]["final_total"] = rows.back().total;
      summary["train"]["final_ch"] = rows.back().ch;
    }
  }

  std::ofstream out((fs::path(report_dir) / "summary.json").string(), std::ios::trunc);
  if (!out) throw IoError("cannot write report summary");
  out << summary.dump(2) << "\n";
  return report_dir;
}

}  // namespace cada
