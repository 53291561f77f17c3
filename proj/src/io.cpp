#include "qlmm/io.hpp"

#include <cstdio>
#include <nlohmann/json.hpp>

#include "qlmm/error.hpp"

namespace qlmm {

std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

CsvWriter::CsvWriter(const std::filesystem::path& path, const std::vector<std::string>& header)
    : out_(path), path_(path) {
  if (!out_) fail(ErrorKind::Io, "cannot open " + path.string() + " for writing");
  for (const auto& h : header) *this << h;
  end_row();
}

CsvWriter& CsvWriter::operator<<(double v) { return *this << format_double(v); }

CsvWriter& CsvWriter::operator<<(long v) { return *this << std::to_string(v); }

CsvWriter& CsvWriter::operator<<(const std::string& v) {
  if (!first_) out_ << ',';
  out_ << v;
  first_ = false;
  return *this;
}

void CsvWriter::end_row() {
  out_ << '\n';
  first_ = true;
  if (!out_) fail(ErrorKind::Io, "write to " + path_.string() + " failed");
}

void write_errors_csv(const std::filesystem::path& path, const std::vector<ErrorRow>& rows, bool timing) {
  CsvWriter csv(path, {"case", "degree", "N", "mode", "component", "L1", "Linf", "order", "seconds"});
  for (const auto& r : rows) {
    csv << r.case_name << r.degree << r.n << r.mode << r.component << r.l1 << r.linf
        << (r.order ? format_double(*r.order) : std::string()) << (timing ? r.seconds : 0.0);
    csv.end_row();
  }
}

void write_snapshot_csv(const std::filesystem::path& path, const Discretization& disc, const SolverState& s) {
  const int dim = disc.dim;
  std::vector<std::string> header{"t", "elem", "x"};
  if (dim == 2) header.push_back("y");
  header.insert(header.end(), {"eta", "m"});
  if (dim == 2) header.push_back("w");
  header.insert(header.end(), {"b", "h"});
  CsvWriter csv(path, header);
  const int ns = static_cast<int>(disc.sample_points.size());
  for (int k = 0; k < s.mesh.num_elements(); ++k) {
    const AffineMap map = s.mesh.affine_map(k);
    for (int q = 0; q < ns; ++q) {
      const double* phi = &disc.sample_phi[q * disc.nb];
      const Vec2 x = map.to_physical(disc.sample_points[q]);
      const auto v = evaluate(s.u, k, phi);
      const double b = evaluate(s.b, k, 0, phi);
      csv << s.t << k << x.x;
      if (dim == 2) csv << x.y;
      csv << v[0] << v[1];
      if (dim == 2) csv << v[2];
      csv << b << v[0] - b;
      csv.end_row();
    }
  }
}

void write_mesh_csv(const std::filesystem::path& path, const SimplicialMesh& mesh) {
  CsvWriter csv(path, {"elem", "vertex", "x", "y"});
  for (int k = 0; k < mesh.num_elements(); ++k) {
    const auto& e = mesh.topology().elements[k];
    for (int i = 0; i <= mesh.dim(); ++i) {
      const Vec2 x = mesh.vertex(e[i]);
      csv << k << e[i] << x.x << x.y;
      csv.end_row();
    }
  }
}

DiagnosticsWriter::DiagnosticsWriter(const std::filesystem::path& path)
    : csv_(path, {"step", "t", "dt", "min_h", "mass", "total_area", "tvb_count", "pp_count", "dt_shrinks",
                  "gcl_error", "min_stage_area", "energy_start", "energy_end", "max_displacement",
                  "mover_substeps", "mover_retries"}) {}

void DiagnosticsWriter::write(long step, const StepDiagnostics& d) {
  csv_ << step << d.t << d.dt << d.min_h << d.mass << d.total_area << d.tvb_count << d.pp_count
       << d.dt_shrinks << d.gcl_error << d.min_stage_area << d.mover.energy_start << d.mover.energy_end
       << d.mover.max_displacement << d.mover.substeps << d.mover.retries;
  csv_.end_row();
}

TrajectoryWriter::TrajectoryWriter(const std::filesystem::path& path)
    : csv_(path, {"step", "t", "vertex", "x"}) {}

void TrajectoryWriter::write(long step, double t, const SimplicialMesh& mesh) {
  for (int i = 0; i < mesh.num_vertices(); ++i) {
    csv_ << step << t << i << mesh.vertex(i).x;
    csv_.end_row();
  }
}

void write_error_json(const std::filesystem::path& path, const std::string& kind, const std::string& message) {
  const nlohmann::json j{{"status", "error"}, {"kind", kind}, {"message", message}};
  std::ofstream out(path);
  if (!out) fail(ErrorKind::Io, "cannot open " + path.string() + " for writing");
  out << j.dump(2) << '\n';
}

}  // namespace qlmm
