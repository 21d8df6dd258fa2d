// Clustering agreement metrics: contingency tables and Normalised Mutual
// Information with the geometric-mean normalization.
#pragma once

#include <cmath>
#include <vector>

#include "spuds/common.hpp"
#include "spuds/dataset.hpp"
#include "spuds/graph.hpp"

namespace spuds {

struct ContingencyTable {
  std::vector<std::vector<long long>> counts;  // rows: first labeling, cols: second
  std::vector<long long> row_totals;
  std::vector<long long> col_totals;
  long long total = 0;

  // True when the two labelings induce the same partition of the indices,
  // i.e. every row and every column has exactly one nonzero cell.
  bool identical_as_sets() const {
    for (const auto& row : counts) {
      int nz = 0;
      for (long long v : row)
        if (v > 0) ++nz;
      if (nz != 1) return false;
    }
    for (std::size_t j = 0; j < col_totals.size(); ++j) {
      int nz = 0;
      for (const auto& row : counts)
        if (row[j] > 0) ++nz;
      if (nz != 1) return false;
    }
    return true;
  }
};

// Label values are densified by first appearance, so arbitrary non-contiguous
// ids are fine.
inline ContingencyTable contingency(const std::vector<int>& a, const std::vector<int>& b) {
  if (a.size() != b.size()) throw LengthMismatch("labelings differ in length");
  if (a.empty()) throw EmptyData("labelings are empty");

  const auto densify = [](const std::vector<int>& v, std::vector<int>& out) {
    std::vector<int> order;
    out.resize(v.size());
    for (std::size_t i = 0; i < v.size(); ++i) {
      int id = -1;
      for (std::size_t k = 0; k < order.size(); ++k)
        if (order[k] == v[i]) id = static_cast<int>(k);
      if (id < 0) {
        id = static_cast<int>(order.size());
        order.push_back(v[i]);
      }
      out[i] = id;
    }
    return static_cast<int>(order.size());
  };

  std::vector<int> da, db;
  const int ka = densify(a, da);
  const int kb = densify(b, db);

  ContingencyTable t;
  t.counts.assign(static_cast<std::size_t>(ka),
                  std::vector<long long>(static_cast<std::size_t>(kb), 0));
  t.row_totals.assign(static_cast<std::size_t>(ka), 0);
  t.col_totals.assign(static_cast<std::size_t>(kb), 0);
  t.total = static_cast<long long>(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    ++t.counts[static_cast<std::size_t>(da[i])][static_cast<std::size_t>(db[i])];
    ++t.row_totals[static_cast<std::size_t>(da[i])];
    ++t.col_totals[static_cast<std::size_t>(db[i])];
  }
  return t;
}

// NMI = I(a;b) / sqrt(H(a) H(b)) in natural logs, with 0 log 0 = 0. When
// either marginal entropy is zero the ratio is undefined; the value is 1 for
// identical partitions and 0 otherwise.
inline double nmi(const std::vector<int>& pred, const std::vector<int>& truth) {
  const ContingencyTable t = contingency(pred, truth);
  const double n = static_cast<double>(t.total);

  const auto entropy = [&](const std::vector<long long>& totals) {
    double h = 0.0;
    for (long long v : totals) {
      if (v == 0) continue;
      const double p = static_cast<double>(v) / n;
      h -= p * std::log(p);
    }
    return h;
  };
  const double ha = entropy(t.row_totals);
  const double hb = entropy(t.col_totals);
  if (ha == 0.0 || hb == 0.0) return t.identical_as_sets() ? 1.0 : 0.0;

  double mi = 0.0;
  for (std::size_t i = 0; i < t.counts.size(); ++i) {
    for (std::size_t j = 0; j < t.counts[i].size(); ++j) {
      const long long v = t.counts[i][j];
      if (v == 0) continue;
      const double p = static_cast<double>(v) / n;
      mi += p * std::log(n * static_cast<double>(v) /
                         (static_cast<double>(t.row_totals[i]) *
                          static_cast<double>(t.col_totals[j])));
    }
  }
  return mi / std::sqrt(ha * hb);
}

inline double nmi(const Partition& pred, const LabelVector& truth) {
  return nmi(pred.assignment, truth.labels);
}

inline double nmi(const LabelVector& pred, const LabelVector& truth) {
  return nmi(pred.labels, truth.labels);
}

inline double nmi(const Partition& pred, const Partition& truth) {
  return nmi(pred.assignment, truth.assignment);
}

}  // namespace spuds
