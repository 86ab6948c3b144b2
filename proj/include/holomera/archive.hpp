#pragma once

// Tensor archive: a directory with manifest.json plus one little-endian
// float64 binary file per tensor. Round-trips bit-exactly; used for MERA
// states, Wilson chains and NRG output alike.

#include <filesystem>
#include <fstream>
#include <map>
#include <string>
#include <vector>

#include <json.hpp>

#include "holomera/tensor.hpp"

namespace holomera {

struct TensorArchive {
    std::map<std::string, DenseTensor> tensors;   // ordered: manifest is reproducible
    nlohmann::json meta = nlohmann::json::object();

    void put(const std::string& name, DenseTensor t) { tensors[name] = std::move(t); }

    const DenseTensor& get(const std::string& name) const {
        auto it = tensors.find(name);
        detail::require(it != tensors.end(), "archive: missing tensor '" + name + "'");
        return it->second;
    }
    bool has(const std::string& name) const { return tensors.count(name) != 0; }
};

namespace archive_detail {

inline void write_doubles(const std::filesystem::path& p, const std::vector<double>& v) {
    std::ofstream f(p, std::ios::binary);
    detail::require(f.good(), "archive: cannot open " + p.string() + " for writing");
    static_assert(sizeof(double) == 8);
    f.write(reinterpret_cast<const char*>(v.data()),
            static_cast<std::streamsize>(v.size() * sizeof(double)));
    detail::require(f.good(), "archive: write failed for " + p.string());
}

inline std::vector<double> read_doubles(const std::filesystem::path& p, size_t count) {
    std::ifstream f(p, std::ios::binary);
    detail::require(f.good(), "archive: cannot open " + p.string());
    std::vector<double> v(count);
    f.read(reinterpret_cast<char*>(v.data()), static_cast<std::streamsize>(count * sizeof(double)));
    detail::require(f.gcount() == static_cast<std::streamsize>(count * sizeof(double)),
                    "archive: short read from " + p.string());
    return v;
}

}  // namespace archive_detail

inline void save_archive(const TensorArchive& a, const std::filesystem::path& dir) {
    std::filesystem::create_directories(dir);
    nlohmann::json manifest;
    manifest["format_version"] = 1;
    manifest["layout"] = "row-major";
    manifest["endianness"] = "little";
    manifest["meta"] = a.meta;
    auto& list = manifest["tensors"] = nlohmann::json::array();
    for (const auto& [name, t] : a.tensors) {
        std::string file = name + ".f64";
        list.push_back({{"name", name}, {"dims", t.dims()}, {"file", file}});
        archive_detail::write_doubles(dir / file, t.raw());
    }
    std::ofstream f(dir / "manifest.json");
    detail::require(f.good(), "archive: cannot write manifest in " + dir.string());
    f << manifest.dump(2) << "\n";
}

inline TensorArchive load_archive(const std::filesystem::path& dir) {
    std::ifstream f(dir / "manifest.json");
    detail::require(f.good(), "archive: missing manifest.json in " + dir.string());
    nlohmann::json manifest = nlohmann::json::parse(f);
    detail::require(manifest.at("format_version").get<int>() == 1, "archive: unknown format version");
    detail::require(manifest.at("layout").get<std::string>() == "row-major", "archive: unknown layout");

    TensorArchive a;
    if (manifest.contains("meta")) a.meta = manifest["meta"];
    for (const auto& entry : manifest.at("tensors")) {
        std::vector<index_t> dims = entry.at("dims").get<std::vector<index_t>>();
        index_t n = 1;
        for (index_t d : dims) n *= d;
        std::vector<double> data =
            archive_detail::read_doubles(dir / entry.at("file").get<std::string>(), static_cast<size_t>(n));
        a.tensors[entry.at("name").get<std::string>()] = DenseTensor(dims, std::move(data));
    }
    return a;
}

}  // namespace holomera
