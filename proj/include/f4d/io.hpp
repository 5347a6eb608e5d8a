#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include "f4d/nets.hpp"
#include "f4d/patching.hpp"
#include "f4d/volume.hpp"

namespace f4d::io {

// ---- F4D volume container ----------------------------------------------------
// Layout (little-endian):
//   char[4] "F4DV" | u32 version | u32 kind | u32 nx,ny,nz,nt,ncomp
//   | f32 spacing_mm | f32 dt_ms | u32 flags | payload
// Float payloads are binary32 in index order (t,z,y,x,component), component
// fastest; masks are one byte per voxel. For complex volumes ncomp=2
// (re, im) and flags bit 0 marks k-space.

enum class F4dKind : std::uint32_t {
    Velocity = 0,
    Magnitude = 1,
    Mask = 2,
    Complex = 3,
    PatchSet = 4,
};

void write_velocity(const std::filesystem::path& p, const VelocityVolume& v);
VelocityVolume read_velocity(const std::filesystem::path& p);

void write_magnitude(const std::filesystem::path& p, const MagnitudeVolume& m,
                     double spacing_mm = 0.0);
MagnitudeVolume read_magnitude(const std::filesystem::path& p);

void write_mask(const std::filesystem::path& p, const FluidMask& m,
                double spacing_mm = 0.0);
FluidMask read_mask(const std::filesystem::path& p);

void write_complex(const std::filesystem::path& p, const ComplexVolume& c);
ComplexVolume read_complex(const std::filesystem::path& p);

/// Patch archive: the container header is followed by a manifest
/// (count, hr edge, lr edge, extraction seed) and the concatenated records.
struct PatchSet {
    std::vector<PatchPair> patches;
    double hr_spacing_mm = 0.0;
    double dt_ms = 0.0;
    std::uint64_t seed = 0;
};

void write_patches(const std::filesystem::path& p, const PatchSet& ps);
PatchSet read_patches(const std::filesystem::path& p);

// ---- F4DW checkpoint ----------------------------------------------------------
// char[4] "F4DW" | u32 version | u32 n_entries
// | per entry: u32 name_len, name bytes, u32 ndim, u32 dims[ndim], u32 dtype (0=f32)
// | raw binary32 data per entry, in manifest order.

void save_checkpoint(const std::filesystem::path& p, const net::ParamSet& params);
net::ParamSet load_checkpoint(const std::filesystem::path& p);

// ---- key=value config ----------------------------------------------------------

/// Flat key=value text with '#' comments. Later assignments override earlier
/// ones; parse errors carry line numbers.
class Config {
public:
    static Config parse_file(const std::filesystem::path& p);
    static Config parse_string(const std::string& text, const std::string& origin);

    bool has(const std::string& key) const;
    std::string get_str(const std::string& key) const; ///< throws when missing
    std::string get_str(const std::string& key, const std::string& fallback) const;
    double get_double(const std::string& key) const;
    double get_double(const std::string& key, double fallback) const;
    int get_int(const std::string& key) const;
    int get_int(const std::string& key, int fallback) const;
    std::uint64_t get_u64(const std::string& key, std::uint64_t fallback) const;
    bool get_bool(const std::string& key, bool fallback) const;
    std::vector<double> get_list(const std::string& key) const;

    void set(const std::string& key, const std::string& value);
    const std::vector<std::pair<std::string, std::string>>& entries() const {
        return items_;
    }

private:
    double parse_double(const std::string& key, const std::string& raw) const;
    std::vector<std::pair<std::string, std::string>> items_;
    std::string origin_;
};

// ---- misc -----------------------------------------------------------------------

/// Full-precision decimal formatting ("%.17g"): parsing the text recovers the
/// double exactly, and equal doubles always produce equal text.
std::string fmt_g17(double x);

std::string read_text_file(const std::filesystem::path& p);
void write_text_file(const std::filesystem::path& p, const std::string& content);

/// Plain (P2) portable graymap, 16-bit levels, scaled to the slice maximum
/// (recorded in a header comment).
void write_pgm(const std::filesystem::path& p, int width, int height,
               const std::vector<double>& values);

/// Run manifest: command, config, seeds, paths, artifact version, timestamp.
void write_manifest(const std::filesystem::path& out_dir, const std::string& command,
                    const Config& cfg,
                    const std::vector<std::pair<std::string, std::string>>& io_paths);

} // namespace f4d::io
