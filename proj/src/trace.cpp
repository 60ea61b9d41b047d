#include "padpd/trace.hpp"

#include <cstdio>
#include <fstream>

#include "padpd/errors.hpp"

namespace padpd {

std::string format_trace_csv(const std::vector<IterationRecord>& records) {
    std::string out(kTraceCsvHeader);
    out += '\n';
    char line[256];
    for (const auto& rec : records) {
        std::snprintf(line, sizeof(line), "%zu,%.17g,%.17g,%.17g,%.17g\n", rec.k, rec.error,
                      rec.primal_residual, rec.dual_norm, rec.objective);
        out += line;
    }
    return out;
}

void write_trace_csv(const std::string& path, const std::vector<IterationRecord>& records) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("trace: cannot open " + path + " for writing");
    out << format_trace_csv(records);
    out.flush();
    if (!out) throw Error("trace: failed writing " + path);
}

}  // namespace padpd
