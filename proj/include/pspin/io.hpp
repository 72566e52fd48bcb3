// CSV writers for the artifact schemas. Numbers are printed with %.17g so
// a file read back reproduces the doubles bit for bit.
#pragma once

#include "pspin/analysis.hpp"
#include "pspin/model.hpp"

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <ostream>
#include <span>
#include <string>

namespace pspin::io {

std::string format_double(double x);

/// t,X,Y,Z,czz,m
void write_trajectory_csv(std::ostream& os, const Trajectory& traj);
/// theta,phi,S
void write_similarity_csv(std::ostream& os, const SimilarityGrid& grid);
/// s,Z_inf,Czz_inf
void write_dpt_csv(std::ostream& os, const DptScan& scan);
/// bin_lo,bin_hi,count
void write_histogram_csv(std::ostream& os, const Histogram& hist);
/// s,N,S_bar
void write_heatmap_csv(std::ostream& os, std::span<const double> s_grid, std::span<const std::int64_t> n_grid,
                       const Eigen::MatrixXd& s_bar);

/// Opens `path` for writing, creating parent directories. Throws on failure.
std::ofstream open_output(const std::filesystem::path& path);

}  // namespace pspin::io
