#include <algorithm>

#include "salnet/contrast_features.hpp"
#include "salnet/error.hpp"
#include "salnet/pipeline.hpp"

namespace salnet {

ChannelConfig channel_config_from_name(const std::string& name) {
    std::string n = name;
    std::transform(n.begin(), n.end(), n.begin(),
                   [](unsigned char c) { return std::tolower(c); });
    ChannelConfig c;
    c.name = n;
    if (n == "3k") {
        c.use_rgb = true;
    } else if (n == "4k") {
        c.use_rgb = c.use_motion = true;
    } else if (n == "8k") {
        c.use_contrasts = c.use_motion = true;
    } else if (n == "rgb8k") {
        c.use_rgb = c.use_contrasts = c.use_motion = true;
    } else if (n == "hsv8k") {
        c.use_hsv = c.use_contrasts = c.use_motion = true;
    } else {
        throw InputError("unknown channel configuration '" + name + "'");
    }
    c.channel_count = (c.use_rgb ? 3 : 0) + (c.use_hsv ? 3 : 0) + (c.use_contrasts ? 7 : 0) +
                      (c.use_motion ? 1 : 0);
    return c;
}

PlaneStack compose_features(const ChannelConfig& config, const FrameSequence& seq,
                            int frame_index, const FlowParams& flow) {
    if (frame_index < 0 || frame_index >= seq.frame_count())
        throw InputError("compose_features: frame index out of range");
    const PlaneStack& frame = seq.frames[frame_index];
    PlaneStack out(seq.width, seq.height, config.channel_count);
    int base = 0;

    if (config.use_rgb) {
        for (int y = 0; y < seq.height; ++y)
            for (int x = 0; x < seq.width; ++x)
                for (int c = 0; c < 3; ++c) out.at(x, y, base + c) = frame.at(x, y, c);
        base += 3;
    }
    if (config.use_hsv) {
        Image<double> hsv = rgb_to_hsv_channels(frame);
        for (int y = 0; y < seq.height; ++y)
            for (int x = 0; x < seq.width; ++x)
                for (int c = 0; c < 3; ++c)
                    out.at(x, y, base + c) = static_cast<float>(hsv.at(x, y, c));
        base += 3;
    }
    if (config.use_contrasts) {
        ContrastStack cs = contrast_descriptors(rgb_to_hsi(frame));
        for (int y = 0; y < seq.height; ++y)
            for (int x = 0; x < seq.width; ++x)
                for (int c = 0; c < 7; ++c)
                    out.at(x, y, base + c) = static_cast<float>(cs.v.at(x, y, c));
        base += 7;
    }
    if (config.use_motion) {
        if (frame_index == 0) {
            for (int y = 0; y < seq.height; ++y)
                for (int x = 0; x < seq.width; ++x) out.at(x, y, base) = 0.0f;
        } else {
            Image<double> res =
                residual_motion_channel(seq.frames[frame_index - 1], frame, flow);
            for (int y = 0; y < seq.height; ++y)
                for (int x = 0; x < seq.width; ++x)
                    out.at(x, y, base) = static_cast<float>(res.at(x, y));
        }
        base += 1;
    }
    return out;
}

} // namespace salnet
