#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "nscop/pairing.hpp"

namespace nscop {

/// Paired CSV: `t1,x,t2,y,overlap,config`, overlap/config empty on the first
/// row. '#' lines carry metadata (scheme, delta, raw tick counts).
void write_paired_csv(std::ostream& out, const PairedSeries& p);
PairedSeries load_paired_csv(const std::filesystem::path& path);

/// Entry point of the `nscop` tool. Exit codes: 0 success, 1 domain error,
/// 2 usage error; failures print a JSON error object to `err`.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);
int run(int argc, char** argv);

}  // namespace nscop
