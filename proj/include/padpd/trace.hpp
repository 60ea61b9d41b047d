#pragma once

#include <string>
#include <vector>

#include "padpd/solver.hpp"

namespace padpd {

inline constexpr const char* kTraceCsvHeader = "k,error,primal_residual,dual_norm,objective";

// %.17g per value: doubles round-trip exactly, so identical runs give
// byte-identical traces.
std::string format_trace_csv(const std::vector<IterationRecord>& records);

void write_trace_csv(const std::string& path, const std::vector<IterationRecord>& records);

}  // namespace padpd
