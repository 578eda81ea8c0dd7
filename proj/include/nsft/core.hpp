#pragma once

#include <algorithm>
#include <array>
#include <cstdint>
#include <cstdlib>
#include <string>
#include <vector>

#include "nsft/errors.hpp"

namespace nsft {

// 1-based rank indices of one core-tensor element. Only elements on the
// snowflake support are representable in a SnowflakeCore.
struct CoreIndex {
  int p = 0;  // user-mode rank index
  int q = 0;  // service-mode rank index
  int r = 0;  // time-mode rank index

  bool operator==(const CoreIndex&) const = default;
  auto operator<=>(const CoreIndex&) const = default;
};

// The six off-diagonal arm families: exactly one of the three indices is
// displaced from the group's diagonal position, by -f or +f. Enumerator
// order matches the term order of the prediction rule.
enum class ArmFamily : int {
  user_minus = 0,     // (r-f, r, r)
  service_minus = 1,  // (r, r-f, r)
  time_minus = 2,     // (r, r, r-f)
  user_plus = 3,      // (r+f, r, r)
  service_plus = 4,   // (r, r+f, r)
  time_plus = 5,      // (r, r, r+f)
};

inline CoreIndex arm_index(ArmFamily fam, int group, int offset) {
  switch (fam) {
    case ArmFamily::user_minus: return {group - offset, group, group};
    case ArmFamily::service_minus: return {group, group - offset, group};
    case ArmFamily::time_minus: return {group, group, group - offset};
    case ArmFamily::user_plus: return {group + offset, group, group};
    case ArmFamily::service_plus: return {group, group + offset, group};
    case ArmFamily::time_plus: return {group, group, group + offset};
  }
  std::abort();
}

/// Enumerates the snowflake support S(R, F) in canonical order: for each
/// group r = 1..R, the diagonal element (r, r, r), then for each offset
/// f = 1..F the six arm families in ArmFamily order, skipping arms whose
/// displaced index would leave 1..R. Every element appears exactly once.
inline std::vector<CoreIndex> snowflake_support(int rank, int arm_width) {
  if (rank < 1) throw config_error("rank must be >= 1");
  if (arm_width < 0) throw config_error("arm width must be >= 0");
  std::vector<CoreIndex> support;
  for (int r = 1; r <= rank; ++r) {
    support.push_back({r, r, r});
    for (int f = 1; f <= arm_width; ++f) {
      if (r - f >= 1) {
        support.push_back(arm_index(ArmFamily::user_minus, r, f));
        support.push_back(arm_index(ArmFamily::service_minus, r, f));
        support.push_back(arm_index(ArmFamily::time_minus, r, f));
      }
      if (r + f <= rank) {
        support.push_back(arm_index(ArmFamily::user_plus, r, f));
        support.push_back(arm_index(ArmFamily::service_plus, r, f));
        support.push_back(arm_index(ArmFamily::time_plus, r, f));
      }
    }
  }
  return support;
}

/// Structured core tensor with non-zeros only on the superdiagonal and on
/// arms displacing a single index by at most `arm_width` positions. Storage
/// is a diagonal array plus six group-by-offset arm arrays, so every element
/// is O(1) addressable.
class SnowflakeCore {
 public:
  SnowflakeCore(int rank, int arm_width)
      : rank_(rank), arm_width_(arm_width), diag_(static_cast<std::size_t>(rank), 0.0) {
    if (rank < 1) throw config_error("rank must be >= 1");
    if (arm_width < 0) throw config_error("arm width must be >= 0");
    for (auto& a : arms_)
      a.assign(static_cast<std::size_t>(rank) * static_cast<std::size_t>(arm_width), 0.0);
  }

  int rank() const { return rank_; }
  int arm_width() const { return arm_width_; }

  // Widths of the valid arm range for a group: lower arms reach down to
  // index 1, upper arms up to index R.
  int lower_width(int group) const { return std::min(arm_width_, group - 1); }
  int upper_width(int group) const { return std::min(arm_width_, rank_ - group); }

  double diagonal(int group) const { return diag_[static_cast<std::size_t>(group - 1)]; }
  double& diagonal(int group) { return diag_[static_cast<std::size_t>(group - 1)]; }

  // Arm element for (family, group r, offset f); caller must keep f within
  // lower_width/upper_width for the family's direction.
  double arm(ArmFamily fam, int group, int offset) const {
    return arms_[static_cast<std::size_t>(fam)][arm_slot(group, offset)];
  }
  double& arm(ArmFamily fam, int group, int offset) {
    return arms_[static_cast<std::size_t>(fam)][arm_slot(group, offset)];
  }

  std::size_t support_size() const {
    std::size_t n = static_cast<std::size_t>(rank_);
    for (int r = 1; r <= rank_; ++r)
      n += 3 * static_cast<std::size_t>(lower_width(r) + upper_width(r));
    return n;
  }

  bool in_support(CoreIndex idx) const {
    bool diag = false;
    ArmFamily fam{};
    int group = 0, offset = 0;
    return classify(idx, diag, fam, group, offset);
  }

  // O(1) read of an arbitrary support element; throws for indices off the
  // support or outside 1..R.
  double value(CoreIndex idx) const {
    bool diag = false;
    ArmFamily fam{};
    int group = 0, offset = 0;
    if (!classify(idx, diag, fam, group, offset))
      throw range_error("core index (" + std::to_string(idx.p) + ", " +
                        std::to_string(idx.q) + ", " + std::to_string(idx.r) +
                        ") is not on the snowflake support");
    return diag ? diagonal(group) : arm(fam, group, offset);
  }

  double& value(CoreIndex idx) {
    bool diag = false;
    ArmFamily fam{};
    int group = 0, offset = 0;
    if (!classify(idx, diag, fam, group, offset))
      throw range_error("core index (" + std::to_string(idx.p) + ", " +
                        std::to_string(idx.q) + ", " + std::to_string(idx.r) +
                        ") is not on the snowflake support");
    return diag ? diagonal(group) : arm(fam, group, offset);
  }

  /// Visits every support element in canonical order (same order as
  /// snowflake_support) as fn(CoreIndex, double&) / fn(CoreIndex, double).
  template <class Fn>
  void for_each(Fn&& fn) {
    for (int r = 1; r <= rank_; ++r) {
      fn(CoreIndex{r, r, r}, diagonal(r));
      for (int f = 1; f <= arm_width_; ++f) {
        if (r - f >= 1) {
          fn(arm_index(ArmFamily::user_minus, r, f), arm(ArmFamily::user_minus, r, f));
          fn(arm_index(ArmFamily::service_minus, r, f), arm(ArmFamily::service_minus, r, f));
          fn(arm_index(ArmFamily::time_minus, r, f), arm(ArmFamily::time_minus, r, f));
        }
        if (r + f <= rank_) {
          fn(arm_index(ArmFamily::user_plus, r, f), arm(ArmFamily::user_plus, r, f));
          fn(arm_index(ArmFamily::service_plus, r, f), arm(ArmFamily::service_plus, r, f));
          fn(arm_index(ArmFamily::time_plus, r, f), arm(ArmFamily::time_plus, r, f));
        }
      }
    }
  }

  template <class Fn>
  void for_each(Fn&& fn) const {
    const_cast<SnowflakeCore*>(this)->for_each(
        [&](CoreIndex idx, double& v) { fn(idx, static_cast<double>(v)); });
  }

 private:
  std::size_t arm_slot(int group, int offset) const {
    return static_cast<std::size_t>(group - 1) * static_cast<std::size_t>(arm_width_) +
           static_cast<std::size_t>(offset - 1);
  }

  // Decomposes an index into (diagonal | family, group, offset). Returns
  // false for indices outside 1..R or off the support. A support element is
  // either fully diagonal or has exactly two equal indices whose common
  // value is the group; the odd index sits within arm_width of it.
  bool classify(CoreIndex idx, bool& diag, ArmFamily& fam, int& group,
                int& offset) const {
    if (idx.p < 1 || idx.p > rank_ || idx.q < 1 || idx.q > rank_ || idx.r < 1 ||
        idx.r > rank_)
      return false;
    if (idx.p == idx.q && idx.q == idx.r) {
      diag = true;
      group = idx.p;
      return true;
    }
    diag = false;
    int odd = 0;
    if (idx.q == idx.r) {  // user mode displaced
      group = idx.q;
      odd = idx.p;
      fam = odd < group ? ArmFamily::user_minus : ArmFamily::user_plus;
    } else if (idx.p == idx.r) {  // service mode displaced
      group = idx.p;
      odd = idx.q;
      fam = odd < group ? ArmFamily::service_minus : ArmFamily::service_plus;
    } else if (idx.p == idx.q) {  // time mode displaced
      group = idx.p;
      odd = idx.r;
      fam = odd < group ? ArmFamily::time_minus : ArmFamily::time_plus;
    } else {
      return false;
    }
    offset = odd < group ? group - odd : odd - group;
    return offset <= arm_width_;
  }

  int rank_;
  int arm_width_;
  std::vector<double> diag_;
  std::array<std::vector<double>, 6> arms_;
};

}  // namespace nsft
