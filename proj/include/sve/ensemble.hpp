#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace sve {

// Immutable sample container: values is a row-major n_paths x times.size()
// matrix (path-major so one path's trajectory is contiguous).
struct PathEnsemble {
    std::vector<double> times;
    std::vector<double> values;
    std::int64_t n_paths = 0;
    std::uint64_t seed = 0;
    std::string scheme_id;
    std::string model_id;
    std::string kernel_id;

    int n_times() const { return static_cast<int>(times.size()); }
    double at(std::int64_t path, int time_index) const {
        return values[static_cast<size_t>(path) * times.size() + time_index];
    }
};

// Binary columnar persistence: magic "SVEE", u32 version, u64 n_paths,
// u64 n_times, u64 seed, times, then the row-major value matrix, all
// little-endian 64-bit floats. String metadata goes to a "<path>.meta" text
// sidecar (key=value lines).
void save_ensemble(const PathEnsemble& ensemble, const std::string& path);
PathEnsemble load_ensemble(const std::string& path);

// Plain-text export for small ensembles: header "t_<time>..." columns, one
// row per path.
void write_ensemble_csv(const PathEnsemble& ensemble, const std::string& path);

}  // namespace sve
