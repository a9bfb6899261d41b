#include "sve/ensemble.hpp"

#include <cstdio>
#include <cstring>
#include <fstream>
#include <sstream>

#include "sve/errors.hpp"
#include "sve/io.hpp"

namespace sve {
namespace {

constexpr char kMagic[4] = {'S', 'V', 'E', 'E'};
constexpr std::uint32_t kVersion = 1;

// The on-disk format is little-endian; this writer targets little-endian
// hosts and stores raw IEEE-754 doubles.
template <typename T>
void put(std::ofstream& out, T v) {
    out.write(reinterpret_cast<const char*>(&v), sizeof(v));
}

template <typename T>
T get(std::ifstream& in) {
    T v{};
    in.read(reinterpret_cast<char*>(&v), sizeof(v));
    return v;
}

std::string meta_path(const std::string& path) { return path + ".meta"; }

}  // namespace

void save_ensemble(const PathEnsemble& ensemble, const std::string& path) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("save_ensemble: cannot open " + path);
    out.write(kMagic, 4);
    put<std::uint32_t>(out, kVersion);
    put<std::uint64_t>(out, static_cast<std::uint64_t>(ensemble.n_paths));
    put<std::uint64_t>(out, static_cast<std::uint64_t>(ensemble.times.size()));
    put<std::uint64_t>(out, ensemble.seed);
    out.write(reinterpret_cast<const char*>(ensemble.times.data()),
              static_cast<std::streamsize>(ensemble.times.size() * sizeof(double)));
    out.write(reinterpret_cast<const char*>(ensemble.values.data()),
              static_cast<std::streamsize>(ensemble.values.size() * sizeof(double)));
    if (!out) throw Error("save_ensemble: write failed for " + path);
    out.close();

    std::ofstream meta(meta_path(path), std::ios::binary | std::ios::trunc);
    if (!meta) throw Error("save_ensemble: cannot open " + meta_path(path));
    meta << "format=SVEE\n"
         << "version=" << kVersion << "\n"
         << "n_paths=" << ensemble.n_paths << "\n"
         << "n_times=" << ensemble.times.size() << "\n"
         << "seed=" << ensemble.seed << "\n"
         << "scheme_id=" << ensemble.scheme_id << "\n"
         << "model_id=" << ensemble.model_id << "\n"
         << "kernel_id=" << ensemble.kernel_id << "\n";
}

PathEnsemble load_ensemble(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("load_ensemble: cannot open " + path);
    char magic[4];
    in.read(magic, 4);
    if (!in || std::memcmp(magic, kMagic, 4) != 0) {
        throw Error("load_ensemble: bad magic in " + path);
    }
    const auto version = get<std::uint32_t>(in);
    if (version != kVersion) {
        std::ostringstream msg;
        msg << "load_ensemble: unsupported version " << version << " in " << path;
        throw Error(msg.str());
    }
    PathEnsemble e;
    e.n_paths = static_cast<std::int64_t>(get<std::uint64_t>(in));
    const auto n_times = get<std::uint64_t>(in);
    e.seed = get<std::uint64_t>(in);
    e.times.resize(n_times);
    in.read(reinterpret_cast<char*>(e.times.data()),
            static_cast<std::streamsize>(n_times * sizeof(double)));
    e.values.resize(static_cast<size_t>(e.n_paths) * n_times);
    in.read(reinterpret_cast<char*>(e.values.data()),
            static_cast<std::streamsize>(e.values.size() * sizeof(double)));
    if (!in) throw Error("load_ensemble: truncated file " + path);

    std::ifstream meta(meta_path(path));
    if (meta) {
        std::string line;
        while (std::getline(meta, line)) {
            const auto eq = line.find('=');
            if (eq == std::string::npos) continue;
            const std::string key = line.substr(0, eq);
            const std::string value = line.substr(eq + 1);
            if (key == "scheme_id") e.scheme_id = value;
            if (key == "model_id") e.model_id = value;
            if (key == "kernel_id") e.kernel_id = value;
        }
    }
    return e;
}

void write_ensemble_csv(const PathEnsemble& ensemble, const std::string& path) {
    CsvWriter csv(path);
    std::vector<std::string> header;
    header.reserve(ensemble.times.size() + 1);
    header.push_back("path");
    for (double t : ensemble.times) header.push_back("t_" + fmt_g17(t));
    csv.row(header);
    for (std::int64_t p = 0; p < ensemble.n_paths; ++p) {
        std::vector<std::string> row;
        row.reserve(ensemble.times.size() + 1);
        row.push_back(std::to_string(p));
        for (int k = 0; k < ensemble.n_times(); ++k) {
            row.push_back(fmt_g17(ensemble.at(p, k)));
        }
        csv.row(row);
    }
}

}  // namespace sve
