#include "pspin/io.hpp"

#include <cstdio>
#include <fstream>
#include <stdexcept>

namespace pspin::io {

std::string format_double(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

void write_trajectory_csv(std::ostream& os, const Trajectory& traj) {
  os << "t,X,Y,Z,czz,m\n";
  for (Eigen::Index k = 0; k < traj.size(); ++k) {
    os << format_double(traj.times(k)) << ',' << format_double(traj.points(0, k)) << ','
       << format_double(traj.points(1, k)) << ',' << format_double(traj.points(2, k)) << ','
       << format_double(traj.czz(k)) << ',' << format_double(traj.outcomes(k)) << '\n';
  }
}

void write_similarity_csv(std::ostream& os, const SimilarityGrid& grid) {
  os << "theta,phi,S\n";
  for (const auto& c : grid.cells) {
    os << format_double(c.theta) << ',' << format_double(c.phi) << ',' << format_double(c.S) << '\n';
  }
}

void write_dpt_csv(std::ostream& os, const DptScan& scan) {
  os << "s,Z_inf,Czz_inf\n";
  for (Eigen::Index i = 0; i < scan.s.size(); ++i) {
    os << format_double(scan.s(i)) << ',' << format_double(scan.z_inf(i)) << ',' << format_double(scan.czz_inf(i))
       << '\n';
  }
}

void write_histogram_csv(std::ostream& os, const Histogram& hist) {
  os << "bin_lo,bin_hi,count\n";
  for (Eigen::Index b = 0; b < hist.bins(); ++b) {
    os << format_double(hist.edges(b)) << ',' << format_double(hist.edges(b + 1)) << ','
       << static_cast<std::int64_t>(hist.counts(b)) << '\n';
  }
}

void write_heatmap_csv(std::ostream& os, std::span<const double> s_grid, std::span<const std::int64_t> n_grid,
                       const Eigen::MatrixXd& s_bar) {
  if (s_bar.rows() != static_cast<Eigen::Index>(s_grid.size()) ||
      s_bar.cols() != static_cast<Eigen::Index>(n_grid.size())) {
    throw std::invalid_argument("write_heatmap_csv: matrix shape does not match the grids");
  }
  os << "s,N,S_bar\n";
  for (std::size_t i = 0; i < s_grid.size(); ++i) {
    for (std::size_t j = 0; j < n_grid.size(); ++j) {
      os << format_double(s_grid[i]) << ',' << n_grid[j] << ','
         << format_double(s_bar(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j))) << '\n';
    }
  }
}

std::ofstream open_output(const std::filesystem::path& path) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream os(path);
  if (!os) throw std::runtime_error("cannot open " + path.string() + " for writing");
  return os;
}

}  // namespace pspin::io
