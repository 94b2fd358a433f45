#include "salnet/model_io.hpp"

#include <bit>
#include <cstring>
#include <fstream>

#include "salnet/error.hpp"

namespace fs = std::filesystem;

namespace salnet::cnn {

namespace {

constexpr uint32_t kVersion = 1;

uint64_t fnv1a(const std::string& bytes) {
    uint64_t h = 14695981039346656037ull;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 1099511628211ull;
    }
    return h;
}

struct Writer {
    std::string buf;
    void u8(uint8_t v) { buf.push_back(static_cast<char>(v)); }
    void u32(uint32_t v) {
        for (int i = 0; i < 4; ++i) buf.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
    }
    void u64(uint64_t v) {
        for (int i = 0; i < 8; ++i) buf.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
    }
    void i32(int32_t v) { u32(static_cast<uint32_t>(v)); }
    void i64(int64_t v) { u64(static_cast<uint64_t>(v)); }
    void f64(double v) { u64(std::bit_cast<uint64_t>(v)); }
    void str(const std::string& s) {
        u32(static_cast<uint32_t>(s.size()));
        buf.append(s);
    }
    void f64_block(const std::vector<double>& v) {
        u64(v.size());
        for (double d : v) f64(d);
    }
};

struct Reader {
    const std::string& buf;
    size_t pos = 0;
    void need(size_t n) const {
        if (pos + n > buf.size()) throw FormatError("truncated checkpoint");
    }
    uint8_t u8() {
        need(1);
        return static_cast<uint8_t>(buf[pos++]);
    }
    uint32_t u32() {
        need(4);
        uint32_t v = 0;
        for (int i = 0; i < 4; ++i) v |= static_cast<uint32_t>(static_cast<unsigned char>(buf[pos++])) << (8 * i);
        return v;
    }
    uint64_t u64() {
        need(8);
        uint64_t v = 0;
        for (int i = 0; i < 8; ++i) v |= static_cast<uint64_t>(static_cast<unsigned char>(buf[pos++])) << (8 * i);
        return v;
    }
    int32_t i32() { return static_cast<int32_t>(u32()); }
    int64_t i64() { return static_cast<int64_t>(u64()); }
    double f64() { return std::bit_cast<double>(u64()); }
    std::string str() {
        uint32_t n = u32();
        need(n);
        std::string s = buf.substr(pos, n);
        pos += n;
        return s;
    }
    std::vector<double> f64_block() {
        uint64_t n = u64();
        if (n > (1ull << 32)) throw FormatError("implausible block size in checkpoint");
        need(n * 8);
        std::vector<double> v(n);
        for (auto& d : v) d = f64();
        return v;
    }
};

} // namespace

void save_model(const NetworkModel& model, const fs::path& file, const SolverState* state) {
    Writer w;
    w.buf.append("SNET");
    w.u32(kVersion);
    w.i32(model.input_shape.h);
    w.i32(model.input_shape.w);
    w.i32(model.input_shape.c);
    w.str(model.channel_config);
    w.f64_block(model.input_mean);
    w.u32(static_cast<uint32_t>(model.layers.size()));
    for (const auto& l : model.layers) {
        w.u8(static_cast<uint8_t>(l.spec.kind));
        w.i32(l.spec.kh);
        w.i32(l.spec.kw);
        w.i32(l.spec.stride);
        w.i32(l.spec.out_channels);
        w.i32(l.spec.lrn_n);
        w.f64(l.spec.lrn_alpha);
        w.f64(l.spec.lrn_beta);
    }
    for (const auto& l : model.layers) {
        w.f64_block(l.weights);
        w.f64_block(l.bias);
    }
    w.u8(state && state->initialized ? 1 : 0);
    if (state && state->initialized) {
        w.i64(state->iteration);
        w.i32(state->epoch);
        w.u64(state->cursor);
        w.u64(state->order.size());
        for (uint32_t o : state->order) w.u32(o);
        w.u32(static_cast<uint32_t>(state->velocity_w.size()));
        for (size_t i = 0; i < state->velocity_w.size(); ++i) {
            w.f64_block(state->velocity_w[i]);
            w.f64_block(state->velocity_b[i]);
        }
        w.str(state->rng_state);
    }
    w.u64(fnv1a(w.buf));

    std::ofstream os(file, std::ios::binary);
    if (!os) throw InputError("cannot write " + file.string());
    os.write(w.buf.data(), static_cast<std::streamsize>(w.buf.size()));
    if (!os) throw InputError("write failed: " + file.string());
}

LoadedModel load_model(const fs::path& file) {
    std::ifstream is(file, std::ios::binary);
    if (!is) throw InputError("cannot open " + file.string());
    std::string buf((std::istreambuf_iterator<char>(is)), std::istreambuf_iterator<char>());
    if (buf.size() < 12 || buf.compare(0, 4, "SNET") != 0)
        throw FormatError("bad magic in " + file.string());
    {
        Reader tail{buf, buf.size() - 8};
        uint64_t stored = tail.u64();
        if (fnv1a(buf.substr(0, buf.size() - 8)) != stored)
            throw FormatError("checksum failure in " + file.string());
    }
    Reader r{buf, 4};
    uint32_t version = r.u32();
    if (version != kVersion)
        throw FormatError("unsupported checkpoint version " + std::to_string(version));

    Shape3 input;
    input.h = r.i32();
    input.w = r.i32();
    input.c = r.i32();
    std::string channel_config = r.str();
    std::vector<double> input_mean = r.f64_block();
    uint32_t n_layers = r.u32();
    std::vector<LayerSpec> specs;
    for (uint32_t i = 0; i < n_layers; ++i) {
        LayerSpec s;
        s.kind = static_cast<LayerKind>(r.u8());
        s.kh = r.i32();
        s.kw = r.i32();
        s.stride = r.i32();
        s.out_channels = r.i32();
        s.lrn_n = r.i32();
        s.lrn_alpha = r.f64();
        s.lrn_beta = r.f64();
        specs.push_back(s);
    }

    // Rebuild through the normal constructor so every shape is revalidated,
    // then overwrite the parameters.
    LoadedModel out{build_network(input, specs, 0), std::nullopt};
    out.model.channel_config = channel_config;
    out.model.input_mean = std::move(input_mean);
    for (auto& l : out.model.layers) {
        auto weights = r.f64_block();
        auto bias = r.f64_block();
        if (weights.size() != l.weights.size() || bias.size() != l.bias.size())
            throw FormatError("parameter block size mismatch in " + file.string());
        l.weights = std::move(weights);
        l.bias = std::move(bias);
    }

    if (r.u8() == 1) {
        SolverState st;
        st.initialized = true;
        st.iteration = r.i64();
        st.epoch = r.i32();
        st.cursor = r.u64();
        uint64_t n_order = r.u64();
        if (n_order > (1ull << 32)) throw FormatError("implausible order size");
        st.order.resize(n_order);
        for (auto& o : st.order) o = r.u32();
        uint32_t nv = r.u32();
        st.velocity_w.resize(nv);
        st.velocity_b.resize(nv);
        for (uint32_t i = 0; i < nv; ++i) {
            st.velocity_w[i] = r.f64_block();
            st.velocity_b[i] = r.f64_block();
        }
        st.rng_state = r.str();
        out.state = std::move(st);
    }
    return out;
}

} // namespace salnet::cnn
