// SPDX-License-Identifier: Apache-2.0
#include <algorithm>
#include <cmath>
#include <numeric>

#include "lp_internal.hpp"

namespace atfm::lp_detail {

namespace {
constexpr double kPivotTol = 1e-11;
constexpr double kDropTol = 1e-13;
}  // namespace

void BasisFactor::factorize(const AugmentedView& view, const std::vector<int>& basic_vars) {
  m_ = static_cast<int>(basic_vars.size());
  pivot_row_.assign(m_, -1);
  position_of_.assign(m_, -1);
  diag_.assign(m_, 0.0);
  lower_.assign(m_, {});
  upper_.assign(m_, {});
  etas_.clear();
  work_.assign(m_, 0.0);
  if (m_ == 0) return;

  // Columns processed in ascending nonzero count; logical columns are unit
  // vectors and eliminate first, which keeps fill near zero on the mostly
  // singleton bases that assignment structures produce.
  std::vector<int> order(m_);
  std::iota(order.begin(), order.end(), 0);
  std::vector<int> nnz(m_, 0);
  for (int pos = 0; pos < m_; ++pos) {
    int count = 0;
    view.for_entries(basic_vars[pos], [&](int, double) { ++count; });
    nnz[pos] = count;
  }
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) { return nnz[a] < nnz[b]; });

  std::vector<int> step_of_row(m_, -1);
  std::vector<double>& x = work_;
  std::vector<int> row_stamp(m_, -1);
  std::vector<int> step_stamp(m_, -1);
  std::vector<int> touched, reach, stack;

  auto scatter = [&](int r, double v, int epoch) {
    if (row_stamp[r] != epoch) {
      row_stamp[r] = epoch;
      x[r] = v;
      touched.push_back(r);
    } else {
      x[r] += v;
    }
  };

  for (int step = 0; step < m_; ++step) {
    const int epoch = step;
    int pos = order[step];

    touched.clear();
    view.for_entries(basic_vars[pos], [&](int r, double v) { scatter(r, v, epoch); });

    // Symbolic phase: every elimination step whose pivot row the column
    // reaches, directly or through fill. Dependency edges run from lower to
    // higher step index, so ascending step order is a topological order.
    reach.clear();
    for (int r : touched) {
      int s0 = step_of_row[r];
      if (s0 < 0 || step_stamp[s0] == epoch) continue;
      step_stamp[s0] = epoch;
      stack.assign(1, s0);
      while (!stack.empty()) {
        int s = stack.back();
        stack.pop_back();
        reach.push_back(s);
        for (const Entry& e : lower_[s]) {
          int child = step_of_row[e.index];
          if (child >= 0 && step_stamp[child] != epoch) {
            step_stamp[child] = epoch;
            stack.push_back(child);
          }
        }
      }
    }
    std::sort(reach.begin(), reach.end());

    for (int s : reach) {
      int prow = pivot_row_[s];
      if (row_stamp[prow] != epoch) continue;
      double t = x[prow];
      if (t == 0.0) continue;
      for (const Entry& e : lower_[s]) scatter(e.index, -e.value * t, epoch);
    }

    // U column from pivoted rows; choose the largest remaining entry as the
    // pivot of this step.
    upper_[step].clear();
    int best_row = -1;
    double best_abs = 0.0;
    for (int r : touched) {
      double v = x[r];
      if (step_of_row[r] >= 0) {
        if (std::abs(v) > kDropTol) upper_[step].push_back({step_of_row[r], v});
      } else if (std::abs(v) > best_abs) {
        best_abs = std::abs(v);
        best_row = r;
      }
    }
    if (best_row < 0 || best_abs < kPivotTol) throw ModelError("singular LP basis");

    double pivot = x[best_row];
    diag_[step] = pivot;
    pivot_row_[step] = best_row;
    position_of_[step] = pos;
    lower_[step].clear();
    for (int r : touched) {
      if (step_of_row[r] >= 0 || r == best_row) continue;
      double v = x[r];
      if (std::abs(v) > kDropTol) lower_[step].push_back({r, v / pivot});
    }
    std::sort(lower_[step].begin(), lower_[step].end(),
              [](const Entry& a, const Entry& b) { return a.index < b.index; });
    std::sort(upper_[step].begin(), upper_[step].end(),
              [](const Entry& a, const Entry& b) { return a.index < b.index; });
    step_of_row[best_row] = step;
  }
  work_.assign(m_, 0.0);
}

void BasisFactor::ftran(std::vector<double>& x) const {
  // L pass over rows, U backward pass over steps, eta file, then the
  // step-space solution lands on basis positions.
  for (int s = 0; s < m_; ++s) {
    double t = x[pivot_row_[s]];
    if (t == 0.0) continue;
    for (const Entry& e : lower_[s]) x[e.index] -= e.value * t;
  }
  std::vector<double>& y = work_;
  for (int s = 0; s < m_; ++s) y[s] = x[pivot_row_[s]];
  for (int s = m_ - 1; s >= 0; --s) {
    double v = y[s] / diag_[s];
    y[s] = v;
    if (v == 0.0) continue;
    for (const Entry& e : upper_[s]) y[e.index] -= e.value * v;
  }
  for (int s = 0; s < m_; ++s) x[position_of_[s]] = y[s];

  for (const Eta& eta : etas_) {
    double t = x[eta.position] / eta.pivot;
    if (t != 0.0) {
      for (const Entry& e : eta.entries) x[e.index] -= e.value * t;
    }
    x[eta.position] = t;
  }
}

void BasisFactor::btran(std::vector<double>& x) const {
  for (auto it = etas_.rbegin(); it != etas_.rend(); ++it) {
    double acc = x[it->position];
    for (const Entry& e : it->entries) acc -= e.value * x[e.index];
    x[it->position] = acc / it->pivot;
  }

  std::vector<double>& z = work_;
  for (int s = 0; s < m_; ++s) z[s] = x[position_of_[s]];
  for (int s = 0; s < m_; ++s) {
    double acc = z[s];
    for (const Entry& e : upper_[s]) acc -= e.value * z[e.index];
    z[s] = acc / diag_[s];
  }
  std::fill(x.begin(), x.end(), 0.0);
  for (int s = m_ - 1; s >= 0; --s) {
    double acc = z[s];
    for (const Entry& e : lower_[s]) acc -= e.value * x[e.index];
    x[pivot_row_[s]] = acc;
  }
}

void BasisFactor::push_eta(const std::vector<double>& w, int position) {
  Eta eta;
  eta.position = position;
  eta.pivot = w[position];
  for (int i = 0; i < m_; ++i) {
    if (i == position) continue;
    if (std::abs(w[i]) > kDropTol) eta.entries.push_back({i, w[i]});
  }
  etas_.push_back(std::move(eta));
}

}  // namespace atfm::lp_detail
