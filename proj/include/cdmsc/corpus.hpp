#pragma once

#include <algorithm>
#include <array>
#include <cctype>
#include <charconv>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "cdmsc/common.hpp"
#include "cdmsc/rng.hpp"
#include "cdmsc/wav.hpp"

namespace cdmsc::corpus {

struct SpeciesId {
    int id = 0;
    auto operator<=>(const SpeciesId&) const = default;
};

struct DomainId {
    int id = 0;
    auto operator<=>(const DomainId&) const = default;
};

// Default label table; ids are 1-based column positions.
struct LabelTable {
    std::vector<std::string> species_names = {
        "Ae.aeg", "Ae.alb", "Cx.qui", "An.gam", "An.ara",
        "An.dir", "Cx.pip", "An.min", "An.ste"};
    std::vector<std::string> domain_names = {"D1", "D2", "D3", "D4", "D5"};

    int num_species() const { return static_cast<int>(species_names.size()); }
    int num_domains() const { return static_cast<int>(domain_names.size()); }

    const std::string& species_name(SpeciesId s) const {
        return species_names.at(static_cast<std::size_t>(s.id - 1));
    }
    const std::string& domain_name(DomainId d) const {
        return domain_names.at(static_cast<std::size_t>(d.id - 1));
    }
};

// (species, domain, clip_index) identifies a clip within a manifest.
struct ClipKey {
    int species = 0;
    int domain = 0;
    std::uint32_t clip_index = 0;
    auto operator<=>(const ClipKey&) const = default;
};

struct ClipRecord {
    std::string path;  // relative to the manifest root
    SpeciesId species;
    DomainId domain;
    std::uint32_t clip_index = 0;
    double duration_s = 0.0;
    std::uint64_t num_samples = 0;

    ClipKey key() const { return {species.id, domain.id, clip_index}; }
};

using Cell = std::pair<int, int>;  // (species id, domain id)

struct Manifest {
    std::vector<ClipRecord> records;
    std::filesystem::path root;

    std::filesystem::path full_path(const ClipRecord& r) const { return root / r.path; }

    std::map<Cell, std::size_t> cell_counts() const {
        std::map<Cell, std::size_t> counts;
        for (const auto& r : records) ++counts[{r.species.id, r.domain.id}];
        return counts;
    }
};

enum class Role { train, validation, test };

inline const char* role_name(Role r) {
    switch (r) {
        case Role::train: return "train";
        case Role::validation: return "validation";
        case Role::test: return "test";
    }
    return "?";
}

inline std::optional<Role> parse_role(std::string_view s) {
    if (s == "train") return Role::train;
    if (s == "validation") return Role::validation;
    if (s == "test") return Role::test;
    return std::nullopt;
}

struct SplitAssignment {
    std::map<ClipKey, Role> roles;
    std::uint64_t seed = 0;
    double val_fraction = 0.0;
};

struct SeenUnseenMap {
    std::set<Cell> seen_cells;

    bool is_unseen(const ClipRecord& r) const {
        return seen_cells.count({r.species.id, r.domain.id}) == 0;
    }
};

struct ParsedName {
    SpeciesId species;
    DomainId domain;
    std::uint32_t clip_index = 0;
};

namespace detail {

inline bool take_int(std::string_view& s, long long& out) {
    std::size_t n = 0;
    while (n < s.size() && std::isdigit(static_cast<unsigned char>(s[n]))) ++n;
    if (n == 0) return false;
    auto res = std::from_chars(s.data(), s.data() + n, out);
    if (res.ec != std::errc{}) return false;
    s.remove_prefix(n);
    return true;
}

inline bool take_prefix(std::string_view& s, std::string_view p) {
    if (s.substr(0, p.size()) != p) return false;
    s.remove_prefix(p.size());
    return true;
}

}  // namespace detail

// Filenames follow S_<speciesID>_D_<domainID>_<clipIndex>, optionally with an
// audio extension.
inline ParsedName parse_clip_name(std::string_view name, int max_species = 9,
                                  int max_domain = 5) {
    std::string_view s = name;
    // strip one extension like ".wav"
    if (auto dot = s.rfind('.'); dot != std::string_view::npos) {
        std::string_view ext = s.substr(dot + 1);
        bool alnum = !ext.empty();
        for (char c : ext)
            if (!std::isalnum(static_cast<unsigned char>(c))) alnum = false;
        if (alnum) s = s.substr(0, dot);
    }
    long long species = 0, domain = 0, index = 0;
    bool ok = detail::take_prefix(s, "S_") && detail::take_int(s, species) &&
              detail::take_prefix(s, "_D_") && detail::take_int(s, domain) &&
              detail::take_prefix(s, "_") && detail::take_int(s, index) && s.empty();
    if (!ok) throw MalformedName(std::string(name));
    if (species < 1 || species > max_species)
        throw OutOfRangeId("species " + std::to_string(species) + " in " + std::string(name));
    if (domain < 1 || domain > max_domain)
        throw OutOfRangeId("domain " + std::to_string(domain) + " in " + std::string(name));
    return {SpeciesId{static_cast<int>(species)}, DomainId{static_cast<int>(domain)},
            static_cast<std::uint32_t>(index)};
}

inline std::string format_clip_name(SpeciesId species, DomainId domain,
                                    std::uint32_t clip_index) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "S_%d_D_%d_%06u.wav", species.id, domain.id,
                  clip_index);
    return buf;
}

struct ScanReport {
    std::vector<std::string> skipped;     // unparseable names
    std::vector<std::string> duplicates;  // repeated (species, domain, index)
};

// One record per parseable WAV file under root, sorted by
// (species, domain, clip_index). Unparseable files are reported and skipped.
inline Manifest scan_corpus(const std::filesystem::path& root,
                            ScanReport* report = nullptr, int max_species = 9,
                            int max_domain = 5) {
    namespace fs = std::filesystem;
    if (!fs::is_directory(root)) throw IoFailure("not a directory: " + root.string());

    std::vector<fs::path> files;
    for (const auto& entry : fs::recursive_directory_iterator(root)) {
        if (!entry.is_regular_file()) continue;
        std::string ext = entry.path().extension().string();
        std::transform(ext.begin(), ext.end(), ext.begin(),
                       [](unsigned char c) { return std::tolower(c); });
        if (ext == ".wav") files.push_back(entry.path());
    }
    std::sort(files.begin(), files.end());

    Manifest manifest;
    manifest.root = root;
    for (const auto& path : files) {
        ParsedName parsed;
        try {
            parsed = parse_clip_name(path.filename().string(), max_species, max_domain);
        } catch (const Error&) {
            if (report) report->skipped.push_back(path.string());
            continue;
        }
        wav::Info info = wav::probe(path);
        ClipRecord rec;
        rec.path = fs::relative(path, root).string();
        rec.species = parsed.species;
        rec.domain = parsed.domain;
        rec.clip_index = parsed.clip_index;
        rec.num_samples = info.num_samples;
        rec.duration_s = static_cast<double>(info.num_samples) /
                         static_cast<double>(info.sample_rate);
        manifest.records.push_back(std::move(rec));
    }
    std::stable_sort(manifest.records.begin(), manifest.records.end(),
                     [](const ClipRecord& a, const ClipRecord& b) {
                         if (a.key() != b.key()) return a.key() < b.key();
                         return a.path < b.path;
                     });
    // keep the first of any identity collision
    std::vector<ClipRecord> unique;
    unique.reserve(manifest.records.size());
    for (auto& r : manifest.records) {
        if (!unique.empty() && unique.back().key() == r.key()) {
            if (report) report->duplicates.push_back((root / r.path).string());
            continue;
        }
        unique.push_back(std::move(r));
    }
    manifest.records = std::move(unique);
    if (manifest.records.empty())
        throw EmptyCorpus("no parseable clips under " + root.string());
    return manifest;
}

// Per species, round(fraction * n) clips drawn without replacement go to
// validation; the remainder to train. Identical seeds give identical maps.
inline SplitAssignment stratified_validation_split(const Manifest& trainval,
                                                   double fraction,
                                                   std::uint64_t seed) {
    if (trainval.records.empty()) throw EmptySplit("empty trainval manifest");
    if (!(fraction > 0.0 && fraction < 1.0))
        throw DegenerateSplit("fraction must lie in (0, 1)");

    std::map<int, std::vector<const ClipRecord*>> by_species;
    for (const auto& r : trainval.records) by_species[r.species.id].push_back(&r);

    SplitAssignment split;
    split.seed = seed;
    split.val_fraction = fraction;
    for (auto& [species, clips] : by_species) {
        const std::size_t n = clips.size();
        auto k = static_cast<std::size_t>(
            std::floor(fraction * static_cast<double>(n) + 0.5));
        if (k > n) k = n;
        if (n >= 2 && n - k == 0)
            throw DegenerateSplit("species " + std::to_string(species) +
                                  " would keep no training clips");
        Rng rng = Rng::keyed(seed, "validation-split", static_cast<std::uint64_t>(species));
        std::vector<std::size_t> order(n);
        for (std::size_t i = 0; i < n; ++i) order[i] = i;
        // partial Fisher-Yates: the first k entries are the validation draw
        for (std::size_t i = 0; i < k; ++i) {
            std::size_t j = i + static_cast<std::size_t>(rng.uniform_index(n - i));
            std::swap(order[i], order[j]);
        }
        for (std::size_t i = 0; i < n; ++i)
            split.roles[clips[order[i]]->key()] =
                i < k ? Role::validation : Role::train;
    }
    return split;
}

// A test clip is unseen iff its (species, domain) cell never occurs in the
// trainval pool.
inline SeenUnseenMap derive_seen_unseen(const Manifest& trainval) {
    SeenUnseenMap map;
    for (const auto& r : trainval.records)
        map.seen_cells.insert({r.species.id, r.domain.id});
    return map;
}

// --- CSV interchange ---------------------------------------------------------

inline void write_manifest_csv(const Manifest& m, const std::filesystem::path& path) {
    atomic_write_file(path, [&](std::ostream& out) {
        out << "path,species,domain,clip_index,duration_s,num_samples\n";
        for (const auto& r : m.records)
            out << r.path << ',' << r.species.id << ',' << r.domain.id << ','
                << r.clip_index << ',' << format_fixed(r.duration_s) << ','
                << r.num_samples << '\n';
    });
}

namespace detail {
inline std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> fields;
    std::string field;
    std::stringstream ss(line);
    while (std::getline(ss, field, ',')) fields.push_back(field);
    if (!line.empty() && line.back() == ',') fields.emplace_back();
    return fields;
}
}  // namespace detail

inline Manifest read_manifest_csv(const std::filesystem::path& path,
                                  const std::filesystem::path& root) {
    std::ifstream in(path);
    if (!in) throw IoFailure("cannot open " + path.string());
    Manifest m;
    m.root = root;
    std::string line;
    if (!std::getline(in, line)) throw IoFailure("empty manifest " + path.string());
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        auto f = detail::split_csv_line(line);
        if (f.size() != 6) throw IoFailure("bad manifest row: " + line);
        ClipRecord r;
        r.path = f[0];
        r.species.id = std::stoi(f[1]);
        r.domain.id = std::stoi(f[2]);
        r.clip_index = static_cast<std::uint32_t>(std::stoul(f[3]));
        r.duration_s = std::stod(f[4]);
        r.num_samples = std::stoull(f[5]);
        m.records.push_back(std::move(r));
    }
    return m;
}

// path,role rows; covers trainval (train/validation) plus test records.
inline void write_split_csv(const Manifest& trainval, const SplitAssignment& split,
                            const Manifest& test, const std::filesystem::path& path) {
    atomic_write_file(path, [&](std::ostream& out) {
        out << "path,role\n";
        for (const auto& r : trainval.records) {
            auto it = split.roles.find(r.key());
            if (it == split.roles.end())
                throw EmptySplit("no role for " + r.path);
            out << r.path << ',' << role_name(it->second) << '\n';
        }
        for (const auto& r : test.records) out << r.path << ",test\n";
    });
}

inline std::map<std::string, Role> read_split_csv(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoFailure("cannot open " + path.string());
    std::map<std::string, Role> roles;
    std::string line;
    if (!std::getline(in, line)) throw IoFailure("empty split file " + path.string());
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        auto f = detail::split_csv_line(line);
        if (f.size() != 2) throw IoFailure("bad split row: " + line);
        auto role = parse_role(f[1]);
        if (!role) throw IoFailure("unknown role in row: " + line);
        roles[f[0]] = *role;
    }
    return roles;
}

}  // namespace cdmsc::corpus
