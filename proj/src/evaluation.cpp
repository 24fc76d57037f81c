#include "dcc/evaluation.hpp"

#include <algorithm>
#include <fstream>
#include <map>
#include <numeric>
#include <sstream>

#include <nlohmann/json.hpp>

#include "dcc/errors.hpp"

namespace dcc {

namespace {
// Gallery order for one query: descending similarity, ties by ascending index.
std::vector<int> ranking(const RowMat& sim, int q) {
  std::vector<int> order(static_cast<std::size_t>(sim.cols()));
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
    if (sim(q, a) != sim(q, b)) return sim(q, a) > sim(q, b);
    return a < b;
  });
  return order;
}

void check_protocol(const RowMat& sim, const std::vector<int>& ql,
                    const std::vector<int>& gl) {
  if (sim.rows() != static_cast<Eigen::Index>(ql.size()) ||
      sim.cols() != static_cast<Eigen::Index>(gl.size()))
    throw ShapeError("similarity matrix is " + std::to_string(sim.rows()) +
                     "x" + std::to_string(sim.cols()) + ", labels are " +
                     std::to_string(ql.size()) + "/" +
                     std::to_string(gl.size()));
  for (std::size_t q = 0; q < ql.size(); ++q)
    if (std::find(gl.begin(), gl.end(), ql[q]) == gl.end())
      throw ProtocolError("query " + std::to_string(q) + " (identity " +
                          std::to_string(ql[q]) + ") has no gallery match");
}
}  // namespace

std::vector<double> cmc(const RowMat& sim, const std::vector<int>& ql,
                        const std::vector<int>& gl) {
  check_protocol(sim, ql, gl);
  std::vector<double> curve(gl.size(), 0.0);
  for (std::size_t q = 0; q < ql.size(); ++q) {
    auto order = ranking(sim, static_cast<int>(q));
    for (std::size_t pos = 0; pos < order.size(); ++pos) {
      if (gl[static_cast<std::size_t>(order[pos])] == ql[q]) {
        for (std::size_t k = pos; k < curve.size(); ++k) curve[k] += 1.0;
        break;
      }
    }
  }
  for (double& v : curve) v /= static_cast<double>(ql.size());
  return curve;
}

double map_score(const RowMat& sim, const std::vector<int>& ql,
                 const std::vector<int>& gl) {
  check_protocol(sim, ql, gl);
  double total = 0.0;
  for (std::size_t q = 0; q < ql.size(); ++q) {
    auto order = ranking(sim, static_cast<int>(q));
    int hits = 0;
    double ap = 0.0;
    for (std::size_t pos = 0; pos < order.size(); ++pos) {
      if (gl[static_cast<std::size_t>(order[pos])] == ql[q]) {
        ++hits;
        ap += static_cast<double>(hits) / static_cast<double>(pos + 1);
      }
    }
    total += ap / hits;
  }
  return total / static_cast<double>(ql.size());
}

EvalResult evaluate(const PairScorer& score, const Dataset& probes,
                    const Dataset& gallery, int trials, std::uint64_t seed) {
  if (trials < 1) throw ContractError("evaluate: trials must be >= 1");
  std::map<int, std::vector<const DatasetItem*>> by_id;
  for (const auto& it : gallery.items) by_id[it.identity].push_back(&it);
  {
    std::string missing;
    for (const auto& p : probes.items)
      if (!by_id.count(p.identity))
        missing += (missing.empty() ? "" : ", ") + std::to_string(p.identity);
    if (!missing.empty())
      throw ProtocolError("identities with no gallery image: " + missing);
  }
  std::mt19937_64 rng(seed);
  std::vector<int> ids;
  for (const auto& [id, items] : by_id) ids.push_back(id);

  EvalResult avg;
  avg.trials = trials;
  avg.cmc.assign(ids.size(), 0.0);
  double map_sum = 0.0;
  for (int trial = 0; trial < trials; ++trial) {
    // one exemplar per identity, single-shot
    std::vector<const DatasetItem*> exemplars;
    std::vector<int> gl;
    for (int id : ids) {
      const auto& pool = by_id[id];
      exemplars.push_back(pool[rng() % pool.size()]);
      gl.push_back(id);
    }
    RowMat sim(probes.items.size(), exemplars.size());
    std::vector<int> ql;
    for (std::size_t q = 0; q < probes.items.size(); ++q) {
      ql.push_back(probes.items[q].identity);
      for (std::size_t g = 0; g < exemplars.size(); ++g)
        sim(static_cast<Eigen::Index>(q), static_cast<Eigen::Index>(g)) =
            score(probes.items[q], *exemplars[g]);
    }
    auto curve = cmc(sim, ql, gl);
    for (std::size_t k = 0; k < curve.size(); ++k) avg.cmc[k] += curve[k];
    map_sum += map_score(sim, ql, gl);
  }
  for (double& v : avg.cmc) v /= trials;
  avg.map = map_sum / trials;
  fill_ranks(avg);
  return avg;
}

void fill_ranks(EvalResult& r) {
  auto at = [&](std::size_t k) {
    if (r.cmc.empty()) return 0.0;
    return r.cmc[std::min(k, r.cmc.size() - 1)];
  };
  r.rank1 = at(0);
  r.rank5 = at(4);
  r.rank10 = at(9);
  r.rank20 = at(19);
}

std::string format_report(const EvalResult& r) {
  std::ostringstream os;
  os << "Method | R=1 | R=5 | R=10 | R=20 | mAP\n";
  os << "DCC";
  auto pct = [](double v) {
    std::ostringstream s;
    s.setf(std::ios::fixed);
    s.precision(1);
    s << 100.0 * v;
    return s.str();
  };
  os << " | " << pct(r.rank1) << " | " << pct(r.rank5) << " | " << pct(r.rank10)
     << " | " << pct(r.rank20) << " | " << pct(r.map) << "\n";
  os << "(" << r.trials << " trials averaged, gallery size " << r.cmc.size()
     << ")\n";
  return os.str();
}

void write_result_json(const EvalResult& r, const std::string& path) {
  nlohmann::json j;
  j["cmc"] = r.cmc;
  j["rank1"] = r.rank1;
  j["rank5"] = r.rank5;
  j["rank10"] = r.rank10;
  j["rank20"] = r.rank20;
  j["mAP"] = r.map;
  j["trials"] = r.trials;
  std::ofstream out(path);
  if (!out) throw FormatError("cannot open for write: " + path);
  out << j.dump(2) << "\n";
}

}  // namespace dcc
