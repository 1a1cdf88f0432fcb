#include "cpn/output.hpp"

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>

#include "cpn/errors.hpp"

namespace cpn {

std::string format_g17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

std::uint64_t fnv1a64(std::string_view bytes) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (const char c : bytes) {
    h ^= static_cast<unsigned char>(c);
    h *= 0x100000001b3ull;
  }
  return h;
}

OutputWriter::OutputWriter(std::string dir) : dir_(std::move(dir)) {
  std::error_code ec;
  std::filesystem::create_directories(dir_, ec);
  if (ec)
    throw InputError("output: cannot create directory " + dir_ + ": " +
                     ec.message());
}

void OutputWriter::write_text(const std::string& name,
                              const std::string& content) {
  const std::string path = dir_ + "/" + name;
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw InputError("output: cannot open " + path);
  out.write(content.data(),
            static_cast<std::streamsize>(content.size()));
  out.flush();
  if (!out) throw InputError("output: short write to " + path);
  entries_.push_back({name, fnv1a64(content), content.size()});
}

namespace {

void append_row(std::string& csv, std::size_t n, std::size_t reps,
                double path_sq, double path_se, double w2_sq, double w2_se) {
  csv += std::to_string(n);
  csv += ',';
  csv += std::to_string(reps);
  csv += ',';
  csv += format_g17(path_sq);
  csv += ',';
  csv += format_g17(path_se);
  csv += ',';
  csv += format_g17(w2_sq);
  csv += ',';
  csv += format_g17(w2_se);
  csv += '\n';
}

constexpr const char* kStudyHeader =
    "n,replications,path_err_sq,path_err_se,w2_err_sq,w2_err_se\n";

}  // namespace

std::string study_csv(const ConvergenceStudy& study) {
  std::string csv = kStudyHeader;
  for (const StudyRow& row : study.rows)
    append_row(csv, row.n, row.replications, row.path_err_sq, row.path_err_se,
               row.w2_err_sq, row.w2_err_se);
  return csv;
}

std::string coupling_csv(const CouplingResult& result, std::size_t n,
                         std::size_t replications) {
  std::string csv = kStudyHeader;
  append_row(csv, n, replications, result.path_err_sq, result.path_err_se,
             result.w2_err_sq, result.w2_err_se);
  return csv;
}

std::string trajectory_csv(std::span<const TrajectorySet> runs,
                           std::size_t max_particles) {
  std::string csv = "replication,particle,time,coord_index,value,is_jump\n";
  for (std::size_t r = 0; r < runs.size(); ++r) {
    const TrajectorySet& run = runs[r];
    const std::size_t limit = std::min(run.population, max_particles);
    for (std::size_t i = 0; i < limit; ++i)
      for (std::size_t g = 0; g < run.grid.size(); ++g) {
        const auto x = run.state(g, i);
        for (std::size_t c = 0; c < x.size(); ++c) {
          csv += std::to_string(r);
          csv += ',';
          csv += std::to_string(i);
          csv += ',';
          csv += format_g17(run.grid[g]);
          csv += ',';
          csv += std::to_string(c);
          csv += ',';
          csv += format_g17(x[c]);
          csv += ',';
          csv += run.is_jump[g] ? '1' : '0';
          csv += '\n';
        }
      }
  }
  return csv;
}

std::string regime_csv(std::span<const RegimeTrajectory> runs) {
  std::string csv = "replication,time,regime_state\n";
  for (std::size_t r = 0; r < runs.size(); ++r) {
    const RegimeTrajectory& run = runs[r];
    csv += std::to_string(r);
    csv += ",0,";
    csv += std::to_string(run.regime_state.empty() ? 0
                                                   : run.regime_state[0] + 1);
    csv += '\n';
    for (const auto& [time, state] : run.switches) {
      csv += std::to_string(r);
      csv += ',';
      csv += format_g17(time);
      csv += ',';
      csv += std::to_string(state + 1);
      csv += '\n';
    }
  }
  return csv;
}

}  // namespace cpn
