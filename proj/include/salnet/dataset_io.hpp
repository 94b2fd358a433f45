#ifndef SALNET_DATASET_IO_HPP
#define SALNET_DATASET_IO_HPP

#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include "salnet/image.hpp"

namespace salnet {

struct FrameSequence {
    std::string video_id;
    int width = 0;
    int height = 0;
    std::vector<PlaneStack> frames; // H x W x 3, RGB in [0,1]
    int frame_count() const { return static_cast<int>(frames.size()); }
};

struct FixationRecord {
    std::string video_id;
    int frame = 0; // 0-based
    int x = 0;
    int y = 0;
    std::string subject;
};

struct FixationLog {
    std::vector<FixationRecord> records;
    // Gaze points of one frame, in file order.
    std::vector<std::pair<int, int>> points_for(const std::string& video_id, int frame) const;
};

struct ManifestEntry {
    std::string video_id;
    std::filesystem::path frame_dir;
    std::filesystem::path fixation_file;
    int width = 0;
    int height = 0;
};

enum class Split { train, test };

struct DatasetManifest {
    std::vector<ManifestEntry> entries;
    Split split = Split::train;
};

// Frames are lossless still images, one file per frame: binary PPM (P6) or
// PGM (P5, replicated to RGB), maxval 255. Files are ordered by the trailing
// integer in their stem, so frame_2.ppm sorts before frame_10.ppm.
FrameSequence load_frame_sequence(const std::filesystem::path& directory,
                                  const std::string& video_id = "");

PlaneStack load_pnm(const std::filesystem::path& file);
void save_ppm(const PlaneStack& rgb, const std::filesystem::path& file);

// CSV with exact header video_id,frame,x,y,subject. Coordinates are checked
// against the frame size; violations report the 1-based file row.
FixationLog load_fixations(const std::filesystem::path& file, int width, int height);

// One entry per line: video_id<TAB>frame_dir<TAB>fixation_csv<TAB>W<TAB>H.
// Relative paths resolve against the manifest's directory. '#' lines skipped.
DatasetManifest load_manifest(const std::filesystem::path& file);

// FMAP: magic "FMAP", then width/height/channels as little-endian uint32,
// then row-major float32 data, channels interleaved last. Round trips are
// bit-exact.
void write_plane_stack(const PlaneStack& stack, const std::filesystem::path& file);
PlaneStack read_plane_stack(const std::filesystem::path& file);

// 8-bit grayscale PGM (P5) of a [0,1] map, for eyeballing and for ingesting
// reference-model maps.
void write_pgm(const Image<double>& map01, const std::filesystem::path& file);
Image<double> read_pgm(const std::filesystem::path& file);

// Saliency or fixation map from either supported on-disk form. FMAP input is
// reduced to its first channel.
Image<double> load_map_file(const std::filesystem::path& file);

} // namespace salnet

#endif
