#pragma once

#include <array>
#include <cstring>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>

#include "isl/ising.hpp"

namespace isl {

// CSV: optional leading '#' comment lines, then one row of ±1 per sample.
inline void write_samples_csv(std::ostream& out, const SampleMatrix& s, const std::string& comment = {}) {
    out << "# sampler=" << sampler_name(s.sampler) << " seed=" << s.seed << " n=" << s.n << " d=" << s.d << '\n';
    if (!comment.empty()) out << "# " << comment << '\n';
    std::string line;
    for (std::size_t r = 0; r < s.n; ++r) {
        line.clear();
        for (int c = 0; c < s.d; ++c) {
            if (c) line += ',';
            line += s(r, c) > 0 ? "1" : "-1";
        }
        line += '\n';
        out << line;
    }
}

inline SampleMatrix read_samples_csv(std::istream& in) {
    SampleMatrix s;
    std::string line;
    std::vector<std::int8_t> vals;
    int d = -1;
    std::size_t n = 0;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        if (line[0] == '#') {
            auto pos = line.find("seed=");
            if (pos != std::string::npos) s.seed = std::stoull(line.substr(pos + 5));
            for (Sampler t : {Sampler::exact_enum, Sampler::gibbs, Sampler::curie_weiss_cond_iid, Sampler::sign_of_gaussian})
                if (line.find("sampler=" + sampler_name(t)) != std::string::npos) s.sampler = t;
            continue;
        }
        std::istringstream ls(line);
        std::string tok;
        int count = 0;
        while (std::getline(ls, tok, ',')) {
            int v = std::stoi(tok);
            if (v != 1 && v != -1) throw BadInputs("sample entries must be +1 or -1");
            vals.push_back(static_cast<std::int8_t>(v));
            ++count;
        }
        if (d < 0) d = count;
        if (count != d) throw BadInputs("ragged sample row " + std::to_string(n + 1));
        ++n;
    }
    s.n = n;
    s.d = std::max(d, 0);
    s.spins = std::move(vals);
    return s;
}

// Binary: magic "ISLS", u32 version, u64 n, u64 d, u64 seed, u8 sampler, then
// row-major bits (1 ⇔ +1), LSB-first within each byte, rows padded to bytes.
inline constexpr std::array<char, 4> kSampleMagic{'I', 'S', 'L', 'S'};

namespace detail {
template <class T>
void put_le(std::ostream& out, T v) {
    for (std::size_t b = 0; b < sizeof(T); ++b) out.put(static_cast<char>((static_cast<std::uint64_t>(v) >> (8 * b)) & 0xff));
}
template <class T>
T get_le(std::istream& in) {
    std::uint64_t v = 0;
    for (std::size_t b = 0; b < sizeof(T); ++b) {
        int c = in.get();
        if (c == EOF) throw BadInputs("truncated sample file header");
        v |= static_cast<std::uint64_t>(static_cast<unsigned char>(c)) << (8 * b);
    }
    return static_cast<T>(v);
}
}  // namespace detail

inline void write_samples_binary(std::ostream& out, const SampleMatrix& s) {
    out.write(kSampleMagic.data(), 4);
    detail::put_le<std::uint32_t>(out, 1);
    detail::put_le<std::uint64_t>(out, s.n);
    detail::put_le<std::uint64_t>(out, static_cast<std::uint64_t>(s.d));
    detail::put_le<std::uint64_t>(out, s.seed);
    detail::put_le<std::uint8_t>(out, static_cast<std::uint8_t>(s.sampler));
    const std::size_t row_bytes = (static_cast<std::size_t>(s.d) + 7) / 8;
    std::vector<char> buf(row_bytes);
    for (std::size_t r = 0; r < s.n; ++r) {
        std::fill(buf.begin(), buf.end(), 0);
        for (int c = 0; c < s.d; ++c)
            if (s(r, c) > 0) buf[c / 8] = static_cast<char>(buf[c / 8] | (1 << (c % 8)));
        out.write(buf.data(), static_cast<std::streamsize>(row_bytes));
    }
}

inline SampleMatrix read_samples_binary(std::istream& in) {
    std::array<char, 4> magic{};
    in.read(magic.data(), 4);
    if (!in || magic != kSampleMagic) throw BadInputs("not an ISLS sample file");
    auto version = detail::get_le<std::uint32_t>(in);
    if (version != 1) throw BadInputs("unsupported sample file version " + std::to_string(version));
    auto n = detail::get_le<std::uint64_t>(in);
    auto d = detail::get_le<std::uint64_t>(in);
    auto seed = detail::get_le<std::uint64_t>(in);
    auto tag = detail::get_le<std::uint8_t>(in);
    if (tag > 3) throw BadInputs("unknown sampler tag");
    SampleMatrix s(n, static_cast<int>(d), seed, static_cast<Sampler>(tag));
    const std::size_t row_bytes = (d + 7) / 8;
    std::vector<char> buf(row_bytes);
    for (std::size_t r = 0; r < n; ++r) {
        in.read(buf.data(), static_cast<std::streamsize>(row_bytes));
        if (!in) throw BadInputs("truncated sample payload");
        for (std::size_t c = 0; c < d; ++c) s(r, static_cast<int>(c)) = (buf[c / 8] >> (c % 8)) & 1 ? 1 : -1;
    }
    return s;
}

inline bool is_binary_path(const std::string& path) {
    return path.size() >= 4 && (path.substr(path.size() - 4) == ".bin" || path.substr(path.size() - 4) == ".isl");
}

inline void save_samples(const std::string& path, const SampleMatrix& s, const std::string& comment = {}) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw BadInputs("cannot write " + path);
    if (is_binary_path(path))
        write_samples_binary(out, s);
    else
        write_samples_csv(out, s, comment);
}

inline SampleMatrix load_samples(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw BadInputs("cannot open " + path);
    return is_binary_path(path) ? read_samples_binary(in) : read_samples_csv(in);
}

}  // namespace isl
