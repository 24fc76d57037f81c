#pragma once

#include <functional>
#include <string>
#include <vector>

#include "dcc/datasynth.hpp"
#include "dcc/model.hpp"

namespace dcc {

struct EvalResult {
  std::vector<double> cmc;  // length = gallery size, nondecreasing
  double rank1 = 0, rank5 = 0, rank10 = 0, rank20 = 0;
  double map = 0;
  int trials = 0;
};

// Rank of the best-scoring true match per query under descending similarity,
// ties broken by ascending gallery index; curve[k] = fraction with rank <=
// k+1. Throws ProtocolError for a query with no gallery match.
std::vector<double> cmc(const RowMat& similarity,
                        const std::vector<int>& query_labels,
                        const std::vector<int>& gallery_labels);

// Mean over queries of average precision of the full ranked list.
double map_score(const RowMat& similarity, const std::vector<int>& query_labels,
                 const std::vector<int>& gallery_labels);

// Similarity callback: score(probe_item, gallery_item) -> double.
using PairScorer =
    std::function<double(const DatasetItem&, const DatasetItem&)>;

// Single-shot protocol: per trial, sample one gallery exemplar per identity
// from the gallery set (camera views disjoint from each probe's own view are
// required per identity), score all probe x exemplar pairs, average the CMC
// curves and mAP over trials.
EvalResult evaluate(const PairScorer& score, const Dataset& probes,
                    const Dataset& gallery, int trials, std::uint64_t seed);

// Fill rank1/5/10/20 from the curve (clamped to its length).
void fill_ranks(EvalResult& r);

std::string format_report(const EvalResult& r);
void write_result_json(const EvalResult& r, const std::string& path);

}  // namespace dcc
