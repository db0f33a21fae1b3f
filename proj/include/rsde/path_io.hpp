#pragma once

#include <cstdio>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "rsde/rough_path.hpp"

namespace rsde {

namespace detail {

inline std::string fmt_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

}  // namespace detail

/// Columnar text format: one row per cell with the cell end time, the d
/// increment columns and the d*d second-level columns (row-major). The
/// header carries d, alpha, the cell count and the start time, so a file
/// reconstructs the path exactly (17 significant digits round-trip).
inline void write_rough_path(std::ostream& os, const RoughPath& rp) {
  os << "# rsde-roughpath v1\n";
  os << "# d=" << rp.dim() << " alpha=" << detail::fmt_double(rp.alpha())
     << " cells=" << rp.n_cells() << " t0=" << detail::fmt_double(rp.grid()[0]) << "\n";
  for (std::size_t k = 0; k < rp.n_cells(); ++k) {
    os << detail::fmt_double(rp.grid()[k + 1]);
    for (double v : rp.inc(k)) os << ' ' << detail::fmt_double(v);
    for (double v : rp.second(k)) os << ' ' << detail::fmt_double(v);
    os << '\n';
  }
}

inline RoughPath read_rough_path(std::istream& is) {
  std::string line;
  if (!std::getline(is, line) || line.rfind("# rsde-roughpath v1", 0) != 0)
    throw std::invalid_argument("read_rough_path: missing format header");
  if (!std::getline(is, line))
    throw std::invalid_argument("read_rough_path: missing metadata line");
  std::size_t d = 0, cells = 0;
  double alpha = 0.0, t0 = 0.0;
  if (std::sscanf(line.c_str(), "# d=%zu alpha=%lg cells=%zu t0=%lg", &d, &alpha, &cells,
                  &t0) != 4)
    throw std::invalid_argument("read_rough_path: malformed metadata line");
  std::vector<double> pts(cells + 1);
  pts[0] = t0;
  std::vector<double> inc(cells * d), xx(cells * d * d);
  for (std::size_t k = 0; k < cells; ++k) {
    if (!std::getline(is, line))
      throw std::invalid_argument("read_rough_path: truncated at row " + std::to_string(k));
    std::istringstream row(line);
    if (!(row >> pts[k + 1]))
      throw std::invalid_argument("read_rough_path: bad time in row " + std::to_string(k));
    for (std::size_t a = 0; a < d; ++a)
      if (!(row >> inc[k * d + a]))
        throw std::invalid_argument("read_rough_path: bad increment in row " +
                                    std::to_string(k));
    for (std::size_t a = 0; a < d * d; ++a)
      if (!(row >> xx[k * d * d + a]))
        throw std::invalid_argument("read_rough_path: bad second level in row " +
                                    std::to_string(k));
  }
  return RoughPath(TimeGrid(std::move(pts)), d, alpha, std::move(inc), std::move(xx));
}

}  // namespace rsde
