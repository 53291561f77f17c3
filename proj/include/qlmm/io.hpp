#pragma once

#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "qlmm/convergence.hpp"

namespace qlmm {

std::string format_double(double v);

// CSV with a one-line header. Rows are flushed on close.
class CsvWriter {
 public:
  CsvWriter(const std::filesystem::path& path, const std::vector<std::string>& header);
  CsvWriter& operator<<(double v);
  CsvWriter& operator<<(long v);
  CsvWriter& operator<<(int v) { return *this << static_cast<long>(v); }
  CsvWriter& operator<<(const std::string& v);
  void end_row();

 private:
  std::ofstream out_;
  std::filesystem::path path_;
  bool first_ = true;
};

// case,degree,N,mode,component,L1,Linf,order,seconds. With timing off the
// seconds column is written as 0 so reruns are byte-identical.
void write_errors_csv(const std::filesystem::path& path, const std::vector<ErrorRow>& rows, bool timing);

// Solution at the 21 sample points of every element.
void write_snapshot_csv(const std::filesystem::path& path, const Discretization& disc, const SolverState& s);
void write_mesh_csv(const std::filesystem::path& path, const SimplicialMesh& mesh);

// Per-step diagnostics, streamed.
class DiagnosticsWriter {
 public:
  explicit DiagnosticsWriter(const std::filesystem::path& path);
  void write(long step, const StepDiagnostics& d);

 private:
  CsvWriter csv_;
};

// 1D vertex trajectories: one row per vertex per step.
class TrajectoryWriter {
 public:
  explicit TrajectoryWriter(const std::filesystem::path& path);
  void write(long step, double t, const SimplicialMesh& mesh);

 private:
  CsvWriter csv_;
};

void write_error_json(const std::filesystem::path& path, const std::string& kind, const std::string& message);

}  // namespace qlmm
