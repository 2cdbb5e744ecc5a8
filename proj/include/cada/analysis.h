// cada/analysis.h

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

#ifndef CADA_ANALYSIS_H_
#define CADA_ANALYSIS_H_

#include <array>
#include <string>
#include <vector>

#include "cada/tensor.h"

namespace cada {

enum class ProjectionMethod { kPca, kUmapLike };

// 2D layout of embeddings. PCA is deterministic (up to per-axis sign, fixed
// by convention here) and anchors the tests; the neighbor-graph layout is a
// seeded force-directed refinement of the PCA view for nicer plots.
std::vector<std::array<double, 2>> Project2D(const std::vector<Tensor>& embeddings,
                                             ProjectionMethod method, uint64_t seed = 1);

// Mean silhouette over points, Euclidean metric, labels as clusters.
double Silhouette(const std::vector<std::array<double, 2>>& points,
                  const std::vector<int>& labels);

// Spearman rank correlation with average ranks on ties.
double SpearmanCorr(const std::vector<double>& x, const std::vector<double>& y);

struct DistanceCurve {
  std::vector<double> epochs, val_loss, distance;
  double corr_epoch_loss = 0;      // Spearman(epoch, val_loss)
  double corr_epoch_distance = 0;  // Spearman(epoch, pairwise distance)
};

// Reads an encoder pretraining metrics CSV (epoch,val_loss,val_acc,
// mean_pairwise_distance) and aligns the two diagnostic curves.
DistanceCurve ComputeDistanceCurve(const std::string& metrics_csv_path);

struct EmbeddingPoint {
  std::string utt_id;
  std::string label;
  double x = 0, y = 0;
};

void WriteEmbeddingsCsv(const std::string& path, const std::vector<EmbeddingPoint>& points);
std::vector<EmbeddingPoint> ReadEmbeddingsCsv(const std::string& path);

// Deterministic SVG plots (fixed canvas, fixed float formatting).
void WriteScatterSvg(const std::string& path, const std::vector<EmbeddingPoint>& points,
                     const std::string& title);
void WriteLinesSvg(const std::string& path, const std::vector<double>& xs,
                   const std::vector<std::pair<std::string, std::vector<double>>>& series,
                   const std::string& title);

// Renders a run directory into report/: projection + curve SVGs and a JSON
// metrics summary. Expects encoder_metrics.csv and embeddings.csv; uses
// metrics.csv (GAN training) when present. Reruns are byte-identical.
std::string EmitReport(const std::string& run_dir);

}  // namespace cada

#endif  // CADA_ANALYSIS_H_
