#pragma once

#include <cstddef>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace cellspace {

enum class Errc {
  invalid_argument,
  parse_error,
  duplicate_label,
  empty_cell,
  missing_root,
  overlap,
  not_a_base,
  not_disjoint,
  empty_subset,
  duplicate_leaf_label,
  bad_alphabet_size,
  bad_proportion,
  not_decreasing,
  depth_mismatch,
  invalid_weight,
  invalid_metric,
  overlapping_cells,
  not_probability,
  zero_diameter_internal_cell,
  isolated_point,
  point_set_mismatch,
  grid_too_coarse,
};

constexpr std::string_view to_string(Errc code) {
  switch (code) {
    case Errc::invalid_argument: return "InvalidArgument";
    case Errc::parse_error: return "ParseError";
    case Errc::duplicate_label: return "DuplicateLabel";
    case Errc::empty_cell: return "EmptyCell";
    case Errc::missing_root: return "MissingRoot";
    case Errc::overlap: return "Overlap";
    case Errc::not_a_base: return "NotABase";
    case Errc::not_disjoint: return "NotDisjoint";
    case Errc::empty_subset: return "EmptySubset";
    case Errc::duplicate_leaf_label: return "DuplicateLeafLabel";
    case Errc::bad_alphabet_size: return "BadAlphabetSize";
    case Errc::bad_proportion: return "BadProportion";
    case Errc::not_decreasing: return "NotDecreasing";
    case Errc::depth_mismatch: return "DepthMismatch";
    case Errc::invalid_weight: return "InvalidWeight";
    case Errc::invalid_metric: return "InvalidMetric";
    case Errc::overlapping_cells: return "OverlappingCells";
    case Errc::not_probability: return "NotProbability";
    case Errc::zero_diameter_internal_cell: return "ZeroDiameterInternalCell";
    case Errc::isolated_point: return "IsolatedPoint";
    case Errc::point_set_mismatch: return "PointSetMismatch";
    case Errc::grid_too_coarse: return "GridTooCoarse";
  }
  return "Unknown";
}

/// Every library failure is reported through this exception. `witness()` holds
/// the indices (points or cells, depending on the code) that exhibit the
/// violation, e.g. for `Errc::overlap` a point in both sets, a point only in
/// the first, and a point only in the second.
class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& message, std::vector<std::size_t> witness = {})
      : std::runtime_error(std::string(to_string(code)) + ": " + message),
        code_(code),
        witness_(std::move(witness)) {}

  [[nodiscard]] Errc code() const noexcept { return code_; }
  [[nodiscard]] std::span<const std::size_t> witness() const noexcept { return witness_; }

 private:
  Errc code_;
  std::vector<std::size_t> witness_;
};

}  // namespace cellspace
