#pragma once

#include <functional>
#include <vector>

namespace gfstop::multiperiod {

/// An L-period inference problem under history-independent (constant)
/// cutoff vectors. gamma(i, j) is the dogmatic reversal coefficient of
/// period i on period j (1-based, j < i); all entries >= 0.
class MultiPeriodSpec {
 public:
  MultiPeriodSpec(int L, std::vector<double> gamma_lower_triangle,
                  std::vector<double> mu_true, double sd,
                  std::vector<double> cutoffs);

  /// gamma_{i,j} = alpha * delta^(i-j-1).
  static MultiPeriodSpec alpha_delta(int L, double alpha, double delta,
                                     std::vector<double> mu_true, double sd,
                                     std::vector<double> cutoffs);

  /// History-dependent continuation regions are out of scope: the needed
  /// conditional expectations have no closed form and the path-counting
  /// representation requires rectangular regions. Always throws.
  static MultiPeriodSpec with_history_dependent_cutoffs(
      int L, std::vector<double> gamma_lower_triangle,
      std::vector<double> mu_true, double sd,
      std::vector<std::function<double(const std::vector<double>&)>> rules);

  int periods() const { return L_; }
  double gamma(int i, int j) const;  // 1 <= j < i <= L
  double mu_true(int i) const { return mu_true_[i - 1]; }
  double sd() const { return sd_; }
  double cutoff(int i) const { return cutoffs_[i - 1]; }  // 1 <= i <= L-1

 private:
  int L_;
  std::vector<double> gamma_;  // row-major lower triangle
  std::vector<double> mu_true_;
  double sd_;
  std::vector<double> cutoffs_;
};

/// Sum of path weights over all descending paths from period i to period j,
/// by the dynamic-programming recursion
/// S[i->j] = -gamma_{i,j} + sum_k (-gamma_{i,k}) S[k->j].
double path_weight_sum(const MultiPeriodSpec& spec, int i, int j);

enum class Method { iterative, paths };

/// Pseudo-true fundamentals (mu_1*, ..., mu_L*); the two methods agree to
/// floating-point roundoff.
std::vector<double> pseudo_true_L(const MultiPeriodSpec& spec, Method method);

enum class AlphaDeltaVerdict { all_pessimistic, optimism_possible, boundary };

/// Sign classification of the path-weight sums for the alpha-delta family:
/// every sum negative (pessimism at all cutoff vectors), some sum positive
/// (over-optimism possible), or the uncharacterized delta == alpha boundary.
AlphaDeltaVerdict alpha_delta_classify(double alpha, double delta, int L);

}  // namespace gfstop::multiperiod
