#pragma once

#include <map>
#include <optional>
#include <string>
#include <tuple>
#include <vector>

#include "wordmask/common.hpp"
#include "wordmask/io.hpp"

namespace wordmask {

// One report cell address: condition is the speech variant under test
// (e.g. "wave" or "codes"), mask_type/position name the grid point.
// Unmasked baselines use mask_type = "none", position = "-".
struct CellKey {
  std::string condition;
  std::string mask_type;
  std::string position;

  bool operator<(const CellKey& o) const {
    return std::tie(condition, mask_type, position) <
           std::tie(o.condition, o.mask_type, o.position);
  }
};

struct WerCellStats {
  double mean_wer_pct = 0.0;
  std::size_t n = 0;
  std::size_t excluded = 0;
};

struct EerCellStats {
  double eer_pct = 0.0;
  std::size_t n_trials = 0;
};

// Per-pair inputs: (wer, filtered) per scored utterance.
using WerCells = std::map<CellKey, std::vector<std::pair<double, bool>>>;

inline std::map<CellKey, std::optional<WerCellStats>> report_wer(
    const WerCells& cells) {
  std::map<CellKey, std::optional<WerCellStats>> out;
  for (const auto& [key, pairs] : cells) {
    WerCellStats st;
    double sum = 0.0;
    for (const auto& [w, filtered] : pairs) {
      if (filtered) {
        ++st.excluded;
        continue;
      }
      sum += w;
      ++st.n;
    }
    if (st.n == 0) {
      out[key] = std::nullopt;  // empty cell is missing, never zero
    } else {
      st.mean_wer_pct = 100.0 * sum / st.n;
      out[key] = st;
    }
  }
  return out;
}

namespace detail {

inline std::string cell_text(const std::optional<WerCellStats>& st) {
  if (!st) return "n/a";
  return format_double(st->mean_wer_pct, 2);
}

}  // namespace detail

// Table-1 shape: one row per condition, unmasked column then one column
// per mask type (mean over positions).
inline std::string render_wer_table_csv(
    const std::map<CellKey, std::optional<WerCellStats>>& cells,
    const std::vector<std::string>& conditions,
    const std::vector<std::string>& types,
    const std::vector<std::string>& positions) {
  std::string csv = "condition,unmasked";
  for (const auto& t : types) csv += "," + t;
  csv += ",excluded\n";
  for (const auto& cond : conditions) {
    csv += cond;
    auto base = cells.find({cond, "none", "-"});
    csv += "," + (base != cells.end() ? detail::cell_text(base->second)
                                      : std::string("n/a"));
    std::size_t excluded = 0;
    if (base != cells.end() && base->second) excluded += base->second->excluded;
    for (const auto& t : types) {
      // mean over positions, weighted by per-cell pair counts
      double sum = 0.0;
      std::size_t n = 0;
      for (const auto& p : positions) {
        auto it = cells.find({cond, t, p});
        if (it == cells.end() || !it->second) continue;
        sum += it->second->mean_wer_pct * it->second->n;
        n += it->second->n;
        excluded += it->second->excluded;
      }
      csv += "," + (n ? format_double(sum / n, 2) : std::string("n/a"));
    }
    csv += "," + std::to_string(excluded) + "\n";
  }
  return csv;
}

// Full per-cell breakdown (one row per grid cell).
inline std::string render_wer_cells_csv(
    const std::map<CellKey, std::optional<WerCellStats>>& cells) {
  std::string csv = "condition,mask_type,position,mean_wer_pct,n,excluded\n";
  for (const auto& [key, st] : cells) {
    csv += key.condition + "," + key.mask_type + "," + key.position + ",";
    if (st) {
      csv += format_double(st->mean_wer_pct, 4) + "," +
             std::to_string(st->n) + "," + std::to_string(st->excluded);
    } else {
      csv += "n/a,0,0";
    }
    csv += "\n";
  }
  return csv;
}

// Table-2 shape: one row per condition, a "none" column then the 3x3
// position-by-type grid.
inline std::string render_eer_table_csv(
    const std::map<CellKey, std::optional<EerCellStats>>& cells,
    const std::vector<std::string>& conditions,
    const std::vector<std::string>& types,
    const std::vector<std::string>& positions) {
  std::string csv = "condition,none";
  for (const auto& p : positions)
    for (const auto& t : types) csv += "," + p + "_" + t;
  csv += "\n";
  for (const auto& cond : conditions) {
    csv += cond;
    auto base = cells.find({cond, "none", "-"});
    csv += ",";
    csv += (base != cells.end() && base->second)
               ? format_double(base->second->eer_pct, 2)
               : std::string("n/a");
    for (const auto& p : positions) {
      for (const auto& t : types) {
        auto it = cells.find({cond, t, p});
        csv += ",";
        csv += (it != cells.end() && it->second)
                   ? format_double(it->second->eer_pct, 2)
                   : std::string("n/a");
      }
    }
    csv += "\n";
  }
  return csv;
}

}  // namespace wordmask
