#include "salnet/dataset_io.hpp"

#include <algorithm>
#include <bit>
#include <cctype>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <sstream>

#include "salnet/error.hpp"

namespace fs = std::filesystem;

namespace salnet {

namespace {

void write_u32le(std::ostream& os, uint32_t v) {
    unsigned char b[4] = {static_cast<unsigned char>(v & 0xff),
                          static_cast<unsigned char>((v >> 8) & 0xff),
                          static_cast<unsigned char>((v >> 16) & 0xff),
                          static_cast<unsigned char>((v >> 24) & 0xff)};
    os.write(reinterpret_cast<const char*>(b), 4);
}

uint32_t read_u32le(std::istream& is) {
    unsigned char b[4];
    is.read(reinterpret_cast<char*>(b), 4);
    if (!is) throw FormatError("truncated header");
    return static_cast<uint32_t>(b[0]) | (static_cast<uint32_t>(b[1]) << 8) |
           (static_cast<uint32_t>(b[2]) << 16) | (static_cast<uint32_t>(b[3]) << 24);
}

// PNM header token reader; skips whitespace and '#' comment lines.
int read_pnm_int(std::istream& is, const fs::path& file) {
    int ch;
    while ((ch = is.get()) != EOF) {
        if (ch == '#') {
            while ((ch = is.get()) != EOF && ch != '\n') {}
        } else if (!std::isspace(ch)) {
            break;
        }
    }
    if (ch == EOF) throw FormatError("truncated PNM header in " + file.string());
    int value = 0;
    bool any = false;
    while (ch != EOF && std::isdigit(ch)) {
        value = value * 10 + (ch - '0');
        any = true;
        ch = is.get();
    }
    if (!any) throw FormatError("malformed PNM header in " + file.string());
    return value;
}

// Trailing integer in a filename stem, e.g. "frame_0012" -> 12. Returns -1
// when the stem carries no digits.
long trailing_number(const std::string& stem) {
    int end = static_cast<int>(stem.size());
    int begin = end;
    while (begin > 0 && std::isdigit(static_cast<unsigned char>(stem[begin - 1]))) --begin;
    if (begin == end) return -1;
    return std::stol(stem.substr(begin, end - begin));
}

std::vector<std::string> split_csv_row(const std::string& line) {
    std::vector<std::string> out;
    std::string field;
    std::istringstream ss(line);
    while (std::getline(ss, field, ',')) out.push_back(field);
    if (!line.empty() && line.back() == ',') out.emplace_back();
    return out;
}

int parse_int_field(const std::string& s, long row, const fs::path& file) {
    size_t pos = 0;
    int v;
    try {
        v = std::stoi(s, &pos);
    } catch (const std::exception&) {
        throw InputError("malformed row " + std::to_string(row) + " in " + file.string() +
                         ": not an integer: '" + s + "'");
    }
    if (pos != s.size())
        throw InputError("malformed row " + std::to_string(row) + " in " + file.string() +
                         ": not an integer: '" + s + "'");
    return v;
}

} // namespace

std::vector<std::pair<int, int>> FixationLog::points_for(const std::string& video_id,
                                                         int frame) const {
    std::vector<std::pair<int, int>> out;
    for (const auto& r : records)
        if (r.video_id == video_id && r.frame == frame) out.emplace_back(r.x, r.y);
    return out;
}

PlaneStack load_pnm(const fs::path& file) {
    std::ifstream is(file, std::ios::binary);
    if (!is) throw InputError("cannot open " + file.string());
    char m0 = static_cast<char>(is.get());
    char m1 = static_cast<char>(is.get());
    if (m0 != 'P' || (m1 != '5' && m1 != '6'))
        throw FormatError("unsupported image format in " + file.string() +
                          " (expected binary PPM/PGM)");
    bool gray = (m1 == '5');
    int w = read_pnm_int(is, file);
    int h = read_pnm_int(is, file);
    int maxval = read_pnm_int(is, file);
    if (w <= 0 || h <= 0) throw FormatError("bad dimensions in " + file.string());
    if (maxval != 255) throw FormatError("unsupported maxval in " + file.string());
    size_t n = static_cast<size_t>(w) * h * (gray ? 1 : 3);
    std::vector<unsigned char> buf(n);
    is.read(reinterpret_cast<char*>(buf.data()), static_cast<std::streamsize>(n));
    if (static_cast<size_t>(is.gcount()) != n)
        throw FormatError("truncated pixel data in " + file.string());

    PlaneStack out(w, h, 3);
    const float scale = 1.0f / 255.0f;
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            size_t base = (static_cast<size_t>(y) * w + x) * (gray ? 1 : 3);
            for (int c = 0; c < 3; ++c)
                out.at(x, y, c) = static_cast<float>(buf[gray ? base : base + c]) * scale;
        }
    }
    return out;
}

void save_ppm(const PlaneStack& rgb, const fs::path& file) {
    if (rgb.channels() != 3) throw InputError("save_ppm expects 3 channels");
    std::ofstream os(file, std::ios::binary);
    if (!os) throw InputError("cannot write " + file.string());
    os << "P6\n" << rgb.width() << " " << rgb.height() << "\n255\n";
    std::vector<unsigned char> buf(rgb.size());
    for (size_t i = 0; i < rgb.size(); ++i) {
        float v = std::clamp(rgb.data()[i], 0.0f, 1.0f);
        buf[i] = static_cast<unsigned char>(v * 255.0f + 0.5f);
    }
    os.write(reinterpret_cast<const char*>(buf.data()), static_cast<std::streamsize>(buf.size()));
    if (!os) throw InputError("write failed: " + file.string());
}

FrameSequence load_frame_sequence(const fs::path& directory, const std::string& video_id) {
    if (!fs::is_directory(directory))
        throw InputError("missing frame directory " + directory.string());

    std::vector<std::pair<long, fs::path>> files;
    for (const auto& e : fs::directory_iterator(directory)) {
        if (!e.is_regular_file()) continue;
        auto ext = e.path().extension().string();
        if (ext != ".ppm" && ext != ".pgm") continue;
        files.emplace_back(trailing_number(e.path().stem().string()), e.path());
    }
    if (files.empty()) throw InputError("no frames found in " + directory.string());
    std::sort(files.begin(), files.end(), [](const auto& a, const auto& b) {
        if (a.first != b.first) return a.first < b.first;
        return a.second.filename().string() < b.second.filename().string();
    });

    FrameSequence seq;
    seq.video_id = video_id.empty() ? directory.filename().string() : video_id;
    for (const auto& [num, path] : files) {
        PlaneStack frame = load_pnm(path);
        if (seq.frames.empty()) {
            seq.width = frame.width();
            seq.height = frame.height();
        } else if (frame.width() != seq.width || frame.height() != seq.height) {
            throw InputError("inconsistent frame dimensions at " + path.string());
        }
        seq.frames.push_back(std::move(frame));
    }
    return seq;
}

FixationLog load_fixations(const fs::path& file, int width, int height) {
    std::ifstream is(file);
    if (!is) throw InputError("cannot open " + file.string());
    std::string line;
    if (!std::getline(is, line)) throw InputError("empty fixation file " + file.string());
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line != "video_id,frame,x,y,subject")
        throw InputError("bad fixation header in " + file.string());

    FixationLog log;
    long row = 1;
    while (std::getline(is, line)) {
        ++row;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        auto f = split_csv_row(line);
        if (f.size() != 5)
            throw InputError("malformed row " + std::to_string(row) + " in " + file.string());
        FixationRecord r;
        r.video_id = f[0];
        r.frame = parse_int_field(f[1], row, file);
        r.x = parse_int_field(f[2], row, file);
        r.y = parse_int_field(f[3], row, file);
        r.subject = f[4];
        if (r.frame < 0)
            throw InputError("negative frame index at row " + std::to_string(row) + " in " +
                             file.string());
        if (r.x < 0 || r.x >= width || r.y < 0 || r.y >= height)
            throw InputError("coordinate out of bounds at row " + std::to_string(row) + " in " +
                             file.string());
        log.records.push_back(std::move(r));
    }
    return log;
}

DatasetManifest load_manifest(const fs::path& file) {
    std::ifstream is(file);
    if (!is) throw InputError("cannot open manifest " + file.string());
    fs::path base = file.has_parent_path() ? file.parent_path() : fs::path(".");

    DatasetManifest manifest;
    std::string line;
    long row = 0;
    while (std::getline(is, line)) {
        ++row;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty() || line[0] == '#') continue;
        std::vector<std::string> f;
        std::string field;
        std::istringstream ss(line);
        while (std::getline(ss, field, '\t')) f.push_back(field);
        if (f.size() != 5)
            throw InputError("malformed manifest line " + std::to_string(row) + " in " +
                             file.string());
        ManifestEntry e;
        e.video_id = f[0];
        e.frame_dir = fs::path(f[1]).is_absolute() ? fs::path(f[1]) : base / f[1];
        e.fixation_file = fs::path(f[2]).is_absolute() ? fs::path(f[2]) : base / f[2];
        e.width = parse_int_field(f[3], row, file);
        e.height = parse_int_field(f[4], row, file);
        if (e.width <= 0 || e.height <= 0)
            throw InputError("bad dimensions at manifest line " + std::to_string(row));
        for (const auto& prev : manifest.entries)
            if (prev.video_id == e.video_id)
                throw InputError("duplicate video_id '" + e.video_id + "' in manifest");
        if (!fs::exists(e.frame_dir))
            throw InputError("manifest references missing frame dir " + e.frame_dir.string());
        if (!fs::exists(e.fixation_file))
            throw InputError("manifest references missing fixation file " +
                             e.fixation_file.string());
        manifest.entries.push_back(std::move(e));
    }
    return manifest;
}

void write_plane_stack(const PlaneStack& stack, const fs::path& file) {
    std::ofstream os(file, std::ios::binary);
    if (!os) throw InputError("cannot write " + file.string());
    os.write("FMAP", 4);
    write_u32le(os, static_cast<uint32_t>(stack.width()));
    write_u32le(os, static_cast<uint32_t>(stack.height()));
    write_u32le(os, static_cast<uint32_t>(stack.channels()));
    for (size_t i = 0; i < stack.size(); ++i)
        write_u32le(os, std::bit_cast<uint32_t>(stack.data()[i]));
    if (!os) throw InputError("write failed: " + file.string());
}

PlaneStack read_plane_stack(const fs::path& file) {
    std::ifstream is(file, std::ios::binary);
    if (!is) throw InputError("cannot open " + file.string());
    char magic[4];
    is.read(magic, 4);
    if (!is || std::memcmp(magic, "FMAP", 4) != 0)
        throw FormatError("bad magic in " + file.string());
    uint32_t w = read_u32le(is);
    uint32_t h = read_u32le(is);
    uint32_t c = read_u32le(is);
    if (w == 0 || h == 0 || c == 0 || static_cast<uint64_t>(w) * h * c > (1ull << 31))
        throw FormatError("implausible dimensions in " + file.string());
    PlaneStack out(static_cast<int>(w), static_cast<int>(h), static_cast<int>(c));
    for (size_t i = 0; i < out.size(); ++i) {
        unsigned char b[4];
        is.read(reinterpret_cast<char*>(b), 4);
        if (!is) throw FormatError("truncated payload in " + file.string());
        uint32_t v = static_cast<uint32_t>(b[0]) | (static_cast<uint32_t>(b[1]) << 8) |
                     (static_cast<uint32_t>(b[2]) << 16) | (static_cast<uint32_t>(b[3]) << 24);
        out.data()[i] = std::bit_cast<float>(v);
    }
    return out;
}

void write_pgm(const Image<double>& map01, const fs::path& file) {
    if (map01.channels() != 1) throw InputError("write_pgm expects 1 channel");
    std::ofstream os(file, std::ios::binary);
    if (!os) throw InputError("cannot write " + file.string());
    os << "P5\n" << map01.width() << " " << map01.height() << "\n255\n";
    std::vector<unsigned char> buf(map01.size());
    for (size_t i = 0; i < map01.size(); ++i) {
        double v = std::clamp(map01.data()[i], 0.0, 1.0);
        buf[i] = static_cast<unsigned char>(v * 255.0 + 0.5);
    }
    os.write(reinterpret_cast<const char*>(buf.data()), static_cast<std::streamsize>(buf.size()));
    if (!os) throw InputError("write failed: " + file.string());
}

Image<double> read_pgm(const fs::path& file) {
    PlaneStack rgb = load_pnm(file); // P5 replicates gray into 3 equal channels
    Image<double> out(rgb.width(), rgb.height(), 1);
    for (int y = 0; y < rgb.height(); ++y)
        for (int x = 0; x < rgb.width(); ++x)
            out.at(x, y) = rgb.at(x, y, 0);
    return out;
}

Image<double> load_map_file(const fs::path& file) {
    auto ext = file.extension().string();
    if (ext == ".pgm" || ext == ".ppm") return read_pgm(file);
    PlaneStack s = read_plane_stack(file);
    Image<double> out(s.width(), s.height(), 1);
    for (int y = 0; y < s.height(); ++y)
        for (int x = 0; x < s.width(); ++x)
            out.at(x, y) = s.at(x, y, 0);
    return out;
}

} // namespace salnet
