#pragma once

#include "coneflow/diagnostics.hpp"
#include "coneflow/flow.hpp"

#include <iosfwd>
#include <string>
#include <vector>

namespace coneflow {

// 17 significant digits, enough to read back the identical double.
std::string format_real(double v);

void write_records_csv(std::ostream& out, const std::vector<DiagnosticsRecord>& records);
// one flat JSON object per line; non-finite values are written as null
void write_records_jsonl(std::ostream& out, const std::vector<DiagnosticsRecord>& records);
std::vector<DiagnosticsRecord> read_records_csv(std::istream& in);

// Long format, header t,node,s,phi,increment. The increment column holds
// phi[node+1] - phi[node] (0 on the last node); the phi column at the middle
// node is the stored anchor, so the file reproduces the potential bit for bit.
void write_trajectory_csv(std::ostream& out, const std::vector<FlowState>& trajectory,
                          const Profile& s);
// Reads the snapshots back and recomputes phidot from the problem.
std::vector<FlowState> read_trajectory_csv(std::istream& in, const FlowProblem& problem);

// Writes a file, creating parent directories.
void write_file(const std::string& path, const std::string& content);
std::string read_file(const std::string& path);

} // namespace coneflow
