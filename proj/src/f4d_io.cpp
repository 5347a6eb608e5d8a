#include "f4d/io.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>

namespace f4d::io {

namespace {

constexpr std::uint32_t kVersion = 1;

struct Writer {
    std::ofstream os;
    explicit Writer(const std::filesystem::path& p)
        : os(p, std::ios::binary | std::ios::trunc) {
        if (!os) throw ValidationError("cannot open '" + p.string() + "' for writing");
    }
    void bytes(const void* p, std::size_t n) {
        os.write(static_cast<const char*>(p), static_cast<std::streamsize>(n));
    }
    void u32(std::uint32_t v) { bytes(&v, 4); }
    void u64(std::uint64_t v) { bytes(&v, 8); }
    void f32(float v) { bytes(&v, 4); }
    void f32s(const float* p, std::size_t n) { bytes(p, 4 * n); }
    void check(const std::filesystem::path& p) {
        os.flush();
        if (!os) throw ValidationError("write failed for '" + p.string() + "'");
    }
};

struct Reader {
    std::ifstream is;
    std::filesystem::path path;
    explicit Reader(const std::filesystem::path& p) : is(p, std::ios::binary), path(p) {
        if (!is) throw ValidationError("cannot open '" + p.string() + "'");
    }
    void bytes(void* p, std::size_t n) {
        is.read(static_cast<char*>(p), static_cast<std::streamsize>(n));
        if (is.gcount() != static_cast<std::streamsize>(n))
            throw ValidationError("truncated file '" + path.string() + "'");
    }
    std::uint32_t u32() { std::uint32_t v; bytes(&v, 4); return v; }
    std::uint64_t u64() { std::uint64_t v; bytes(&v, 8); return v; }
    float f32() { float v; bytes(&v, 4); return v; }
    void f32s(float* p, std::size_t n) { bytes(p, 4 * n); }
};

void write_header(Writer& w, F4dKind kind, Dims3 d, int nt, int ncomp,
                  double spacing, double dt, std::uint32_t flags) {
    w.bytes("F4DV", 4);
    w.u32(kVersion);
    w.u32(static_cast<std::uint32_t>(kind));
    w.u32(static_cast<std::uint32_t>(d.nx));
    w.u32(static_cast<std::uint32_t>(d.ny));
    w.u32(static_cast<std::uint32_t>(d.nz));
    w.u32(static_cast<std::uint32_t>(nt));
    w.u32(static_cast<std::uint32_t>(ncomp));
    w.f32(static_cast<float>(spacing));
    w.f32(static_cast<float>(dt));
    w.u32(flags);
}

struct Header {
    F4dKind kind;
    Dims3 dims;
    int nt, ncomp;
    float spacing, dt;
    std::uint32_t flags;
};

Header read_header(Reader& r, F4dKind expected) {
    char magic[4];
    r.bytes(magic, 4);
    if (std::memcmp(magic, "F4DV", 4) != 0)
        throw ValidationError("'" + r.path.string() + "' is not an F4D container");
    const std::uint32_t version = r.u32();
    if (version != kVersion)
        throw ValidationError("'" + r.path.string() + "': unsupported version " +
                              std::to_string(version));
    Header h;
    h.kind = static_cast<F4dKind>(r.u32());
    h.dims.nx = static_cast<int>(r.u32());
    h.dims.ny = static_cast<int>(r.u32());
    h.dims.nz = static_cast<int>(r.u32());
    h.nt = static_cast<int>(r.u32());
    h.ncomp = static_cast<int>(r.u32());
    h.spacing = r.f32();
    h.dt = r.f32();
    h.flags = r.u32();
    if (h.kind != expected)
        throw ValidationError("'" + r.path.string() + "': wrong container kind");
    return h;
}

} // namespace

void write_velocity(const std::filesystem::path& p, const VelocityVolume& v) {
    Writer w(p);
    write_header(w, F4dKind::Velocity, v.dims, v.nt, 3, v.spacing_mm, v.dt_ms, 0);
    w.f32s(v.data.data(), v.data.size());
    w.check(p);
}

VelocityVolume read_velocity(const std::filesystem::path& p) {
    Reader r(p);
    const Header h = read_header(r, F4dKind::Velocity);
    if (h.ncomp != 3)
        throw ValidationError("'" + p.string() + "': velocity needs ncomp=3");
    VelocityVolume v = VelocityVolume::zeros(h.dims, h.nt, h.spacing, h.dt);
    r.f32s(v.data.data(), v.data.size());
    v.validate();
    return v;
}

void write_magnitude(const std::filesystem::path& p, const MagnitudeVolume& m,
                     double spacing_mm) {
    Writer w(p);
    write_header(w, F4dKind::Magnitude, m.dims, 1, 1, spacing_mm, 0.0, 0);
    w.f32s(m.data.data(), m.data.size());
    w.check(p);
}

MagnitudeVolume read_magnitude(const std::filesystem::path& p) {
    Reader r(p);
    const Header h = read_header(r, F4dKind::Magnitude);
    MagnitudeVolume m = MagnitudeVolume::filled(h.dims, 0.0f);
    r.f32s(m.data.data(), m.data.size());
    m.validate();
    return m;
}

void write_mask(const std::filesystem::path& p, const FluidMask& m, double spacing_mm) {
    Writer w(p);
    write_header(w, F4dKind::Mask, m.dims, 1, 1, spacing_mm, 0.0, 0);
    w.bytes(m.data.data(), m.data.size());
    w.check(p);
}

FluidMask read_mask(const std::filesystem::path& p) {
    Reader r(p);
    const Header h = read_header(r, F4dKind::Mask);
    FluidMask m = FluidMask::filled(h.dims, false);
    r.bytes(m.data.data(), m.data.size());
    for (auto b : m.data)
        if (b > 1) throw ValidationError("'" + p.string() + "': mask bytes must be 0/1");
    return m;
}

void write_complex(const std::filesystem::path& p, const ComplexVolume& c) {
    Writer w(p);
    const std::uint32_t flags = c.space == ComplexSpace::KSpace ? 1u : 0u;
    write_header(w, F4dKind::Complex, c.dims, 1, 2, 0.0, 0.0, flags);
    for (const auto& z : c.data) {
        w.f32(static_cast<float>(z.real()));
        w.f32(static_cast<float>(z.imag()));
    }
    w.check(p);
}

ComplexVolume read_complex(const std::filesystem::path& p) {
    Reader r(p);
    const Header h = read_header(r, F4dKind::Complex);
    ComplexVolume c = ComplexVolume::zeros(
        h.dims, (h.flags & 1u) ? ComplexSpace::KSpace : ComplexSpace::Image);
    for (auto& z : c.data) {
        const float re = r.f32();
        const float im = r.f32();
        z = {static_cast<double>(re), static_cast<double>(im)};
    }
    return c;
}

void write_patches(const std::filesystem::path& p, const PatchSet& ps) {
    Writer w(p);
    write_header(w, F4dKind::PatchSet, {kPatchHr, kPatchHr, kPatchHr},
                 static_cast<int>(ps.patches.size()), 3, ps.hr_spacing_mm, ps.dt_ms, 0);
    w.u32(static_cast<std::uint32_t>(ps.patches.size()));
    w.u32(kPatchHr);
    w.u32(kPatchLr);
    w.u64(ps.seed);
    for (const PatchPair& pp : ps.patches) {
        w.u32(static_cast<std::uint32_t>(pp.timestep));
        w.u32(static_cast<std::uint32_t>(pp.origin[0]));
        w.u32(static_cast<std::uint32_t>(pp.origin[1]));
        w.u32(static_cast<std::uint32_t>(pp.origin[2]));
        w.f32s(pp.x_hr.data(), pp.x_hr.size());
        w.f32s(pp.x_lr.data(), pp.x_lr.size());
        w.bytes(pp.labels_hr.data(), pp.labels_hr.size());
    }
    w.check(p);
}

PatchSet read_patches(const std::filesystem::path& p) {
    Reader r(p);
    const Header h = read_header(r, F4dKind::PatchSet);
    PatchSet ps;
    ps.hr_spacing_mm = h.spacing;
    ps.dt_ms = h.dt;
    const std::uint32_t count = r.u32();
    const std::uint32_t hr_n = r.u32();
    const std::uint32_t lr_n = r.u32();
    ps.seed = r.u64();
    if (hr_n != kPatchHr || lr_n != kPatchLr)
        throw ValidationError("'" + p.string() + "': unexpected patch sizes");
    const std::size_t hr_len = static_cast<std::size_t>(kPatchHr) * kPatchHr * kPatchHr;
    const std::size_t lr_len = static_cast<std::size_t>(kPatchLr) * kPatchLr * kPatchLr;
    ps.patches.resize(count);
    for (auto& pp : ps.patches) {
        pp.timestep = static_cast<int>(r.u32());
        pp.origin[0] = static_cast<int>(r.u32());
        pp.origin[1] = static_cast<int>(r.u32());
        pp.origin[2] = static_cast<int>(r.u32());
        pp.x_hr.resize(hr_len * 3);
        r.f32s(pp.x_hr.data(), pp.x_hr.size());
        pp.x_lr.resize(lr_len * 3);
        r.f32s(pp.x_lr.data(), pp.x_lr.size());
        pp.labels_hr.resize(hr_len);
        r.bytes(pp.labels_hr.data(), pp.labels_hr.size());
    }
    return ps;
}

void save_checkpoint(const std::filesystem::path& p, const net::ParamSet& params) {
    Writer w(p);
    w.bytes("F4DW", 4);
    w.u32(kVersion);
    w.u32(static_cast<std::uint32_t>(params.size()));
    for (const auto& [name, t] : params.entries()) {
        w.u32(static_cast<std::uint32_t>(name.size()));
        w.bytes(name.data(), name.size());
        w.u32(static_cast<std::uint32_t>(t.shape.size()));
        for (int d : t.shape) w.u32(static_cast<std::uint32_t>(d));
        w.u32(0); // dtype: binary32
    }
    for (const auto& [name, t] : params.entries())
        for (double x : t.v) w.f32(static_cast<float>(x));
    w.check(p);
}

net::ParamSet load_checkpoint(const std::filesystem::path& p) {
    Reader r(p);
    char magic[4];
    r.bytes(magic, 4);
    if (std::memcmp(magic, "F4DW", 4) != 0)
        throw ValidationError("'" + p.string() + "' is not an F4DW checkpoint");
    if (r.u32() != kVersion)
        throw ValidationError("'" + p.string() + "': unsupported checkpoint version");
    const std::uint32_t n = r.u32();
    net::ParamSet params;
    for (std::uint32_t i = 0; i < n; ++i) {
        const std::uint32_t len = r.u32();
        std::string name(len, '\0');
        r.bytes(name.data(), len);
        const std::uint32_t ndim = r.u32();
        std::vector<int> shape(ndim);
        for (auto& d : shape) d = static_cast<int>(r.u32());
        const std::uint32_t dtype = r.u32();
        if (dtype != 0)
            throw ValidationError("'" + p.string() + "': unsupported dtype");
        params.add(name, ad::Tensor::zeros(shape));
    }
    for (auto& [name, t] : params.entries())
        for (double& x : t.v) x = static_cast<double>(r.f32());
    return params;
}

// ---- config ---------------------------------------------------------------------

namespace {
std::string trim(const std::string& s) {
    std::size_t a = s.find_first_not_of(" \t\r\n");
    if (a == std::string::npos) return "";
    std::size_t b = s.find_last_not_of(" \t\r\n");
    return s.substr(a, b - a + 1);
}
} // namespace

Config Config::parse_string(const std::string& text, const std::string& origin) {
    Config cfg;
    cfg.origin_ = origin;
    std::size_t pos = 0;
    int line_no = 0;
    while (pos <= text.size()) {
        const std::size_t eol = text.find('\n', pos);
        std::string line = text.substr(
            pos, eol == std::string::npos ? std::string::npos : eol - pos);
        ++line_no;
        pos = eol == std::string::npos ? text.size() + 1 : eol + 1;

        const std::size_t hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        line = trim(line);
        if (line.empty()) continue;
        const std::size_t eq = line.find('=');
        if (eq == std::string::npos)
            throw ValidationError(origin + ":" + std::to_string(line_no) +
                                  ": expected key=value");
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        if (key.empty())
            throw ValidationError(origin + ":" + std::to_string(line_no) +
                                  ": empty key");
        cfg.set(key, value);
    }
    return cfg;
}

Config Config::parse_file(const std::filesystem::path& p) {
    return parse_string(read_text_file(p), p.string());
}

void Config::set(const std::string& key, const std::string& value) {
    for (auto& [k, v] : items_) {
        if (k == key) {
            v = value;
            return;
        }
    }
    items_.emplace_back(key, value);
}

bool Config::has(const std::string& key) const {
    for (const auto& [k, v] : items_)
        if (k == key) return true;
    return false;
}

std::string Config::get_str(const std::string& key) const {
    for (const auto& [k, v] : items_)
        if (k == key) return v;
    throw ValidationError(origin_ + ": missing required key '" + key + "'");
}

std::string Config::get_str(const std::string& key, const std::string& fallback) const {
    return has(key) ? get_str(key) : fallback;
}

double Config::parse_double(const std::string& key, const std::string& raw) const {
    try {
        std::size_t used = 0;
        const double v = std::stod(raw, &used);
        if (used != raw.size()) throw std::invalid_argument(raw);
        return v;
    } catch (const std::exception&) {
        throw ValidationError(origin_ + ": key '" + key + "' has non-numeric value '" +
                              raw + "'");
    }
}

double Config::get_double(const std::string& key) const {
    return parse_double(key, get_str(key));
}

double Config::get_double(const std::string& key, double fallback) const {
    return has(key) ? get_double(key) : fallback;
}

int Config::get_int(const std::string& key) const {
    const double v = get_double(key);
    const int i = static_cast<int>(v);
    if (static_cast<double>(i) != v)
        throw ValidationError(origin_ + ": key '" + key + "' must be an integer");
    return i;
}

int Config::get_int(const std::string& key, int fallback) const {
    return has(key) ? get_int(key) : fallback;
}

std::uint64_t Config::get_u64(const std::string& key, std::uint64_t fallback) const {
    if (!has(key)) return fallback;
    const std::string raw = get_str(key);
    try {
        std::size_t used = 0;
        const std::uint64_t v = std::stoull(raw, &used);
        if (used != raw.size()) throw std::invalid_argument(raw);
        return v;
    } catch (const std::exception&) {
        throw ValidationError(origin_ + ": key '" + key +
                              "' must be a non-negative integer");
    }
}

bool Config::get_bool(const std::string& key, bool fallback) const {
    if (!has(key)) return fallback;
    const std::string v = get_str(key);
    if (v == "1" || v == "true" || v == "yes" || v == "on") return true;
    if (v == "0" || v == "false" || v == "no" || v == "off") return false;
    throw ValidationError(origin_ + ": key '" + key + "' must be a boolean");
}

std::vector<double> Config::get_list(const std::string& key) const {
    const std::string raw = get_str(key);
    std::vector<double> out;
    std::size_t pos = 0;
    while (pos <= raw.size()) {
        std::size_t comma = raw.find(',', pos);
        if (comma == std::string::npos) comma = raw.size();
        const std::string item = trim(raw.substr(pos, comma - pos));
        if (!item.empty()) out.push_back(parse_double(key, item));
        pos = comma + 1;
    }
    if (out.empty())
        throw ValidationError(origin_ + ": key '" + key + "' must be a number list");
    return out;
}

// ---- misc -----------------------------------------------------------------------

std::string fmt_g17(double x) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", x);
    return buf;
}

std::string read_text_file(const std::filesystem::path& p) {
    std::ifstream is(p, std::ios::binary);
    if (!is) throw ValidationError("cannot open '" + p.string() + "'");
    return std::string(std::istreambuf_iterator<char>(is),
                       std::istreambuf_iterator<char>());
}

void write_text_file(const std::filesystem::path& p, const std::string& content) {
    std::ofstream os(p, std::ios::binary | std::ios::trunc);
    if (!os) throw ValidationError("cannot open '" + p.string() + "' for writing");
    os << content;
    os.flush();
    if (!os) throw ValidationError("write failed for '" + p.string() + "'");
}

void write_pgm(const std::filesystem::path& p, int width, int height,
               const std::vector<double>& values) {
    if (values.size() != static_cast<std::size_t>(width) * height)
        throw ValidationError("write_pgm: value count does not match dimensions");
    double vmax = 0.0;
    for (double v : values) {
        if (!std::isfinite(v) || v < 0.0)
            throw ValidationError("write_pgm: values must be finite and >= 0");
        vmax = std::max(vmax, v);
    }
    std::string out = "P2\n# scale_max = " + fmt_g17(vmax) + "\n" +
                      std::to_string(width) + " " + std::to_string(height) +
                      "\n65535\n";
    for (int y = 0; y < height; ++y) {
        for (int x = 0; x < width; ++x) {
            const double v = values[static_cast<std::size_t>(y) * width + x];
            const int level =
                vmax > 0.0 ? static_cast<int>(std::lround(v / vmax * 65535.0)) : 0;
            out += std::to_string(level);
            out += x + 1 == width ? '\n' : ' ';
        }
    }
    write_text_file(p, out);
}

void write_manifest(const std::filesystem::path& out_dir, const std::string& command,
                    const Config& cfg,
                    const std::vector<std::pair<std::string, std::string>>& io_paths) {
    const auto now = std::chrono::system_clock::now();
    const std::time_t tt = std::chrono::system_clock::to_time_t(now);
    char stamp[32];
    std::strftime(stamp, sizeof(stamp), "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&tt));

    std::string text;
    text += "command = " + command + "\n";
    text += "artifact_version = 1\n";
    text += "timestamp_utc = " + std::string(stamp) + "\n";
    for (const auto& [k, v] : io_paths) text += k + " = " + v + "\n";
    text += "[config]\n";
    for (const auto& [k, v] : cfg.entries()) text += k + " = " + v + "\n";
    write_text_file(out_dir / "manifest.txt", text);
}

} // namespace f4d::io
