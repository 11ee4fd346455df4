#pragma once

#include <cstdint>
#include <cstring>
#include <fstream>
#include <istream>
#include <ostream>
#include <string>

#include "steinquad/errors.hpp"
#include "steinquad/steinnet/network.hpp"

namespace steinquad {

// Weight file format: magic "BSN1", little-endian, header
// {d, h, l, activation tag, m tag, boundary flag} + the m constant,
// optional boundary box, then theta as 64-bit floats in flattening order
// (theta0 first, body layer by layer).

namespace detail {

template <class T>
void write_pod(std::ostream& os, const T& v) {
    os.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <class T>
T read_pod(std::istream& is) {
    T v;
    is.read(reinterpret_cast<char*>(&v), sizeof(T));
    if (!is) throw CorruptPayload("weight payload truncated");
    return v;
}

}  // namespace detail

inline void save_network(const SteinNetwork& net, std::ostream& os) {
    os.write("BSN1", 4);
    detail::write_pod<std::int32_t>(os, net.arch.in_dim);
    detail::write_pod<std::int32_t>(os, net.arch.hidden_width);
    detail::write_pod<std::int32_t>(os, net.arch.hidden_layers);
    detail::write_pod<std::int32_t>(os, static_cast<std::int32_t>(net.arch.activation));
    detail::write_pod<std::int32_t>(os, static_cast<std::int32_t>(net.m.kind));
    detail::write_pod<std::int32_t>(os, net.boundary ? 1 : 0);
    detail::write_pod<double>(os, net.m.c);
    if (net.boundary) {
        for (int k = 0; k < net.arch.in_dim; ++k)
            detail::write_pod<double>(os, net.boundary->lower[k]);
        for (int k = 0; k < net.arch.in_dim; ++k)
            detail::write_pod<double>(os, net.boundary->upper[k]);
    }
    detail::write_pod<std::int64_t>(os, static_cast<std::int64_t>(net.theta.size()));
    os.write(reinterpret_cast<const char*>(net.theta.data()),
             static_cast<std::streamsize>(net.theta.size() * sizeof(double)));
}

inline SteinNetwork load_network(std::istream& is) {
    char magic[4];
    is.read(magic, 4);
    if (!is || std::memcmp(magic, "BSN1", 4) != 0)
        throw VersionMismatch("not a BSN1 weight file");
    SteinNetwork net;
    net.arch.in_dim = detail::read_pod<std::int32_t>(is);
    net.arch.hidden_width = detail::read_pod<std::int32_t>(is);
    net.arch.hidden_layers = detail::read_pod<std::int32_t>(is);
    const auto act_tag = detail::read_pod<std::int32_t>(is);
    if (act_tag < 0 || act_tag > 4) throw CorruptPayload("bad activation tag");
    net.arch.activation = static_cast<Activation>(act_tag);
    const auto m_tag = detail::read_pod<std::int32_t>(is);
    if (m_tag < 0 || m_tag > 5) throw CorruptPayload("bad m tag");
    net.m.kind = static_cast<MKind>(m_tag);
    const bool has_boundary = detail::read_pod<std::int32_t>(is) != 0;
    net.m.c = detail::read_pod<double>(is);
    if (net.arch.in_dim < 1 || net.arch.hidden_width < 1 || net.arch.hidden_layers < 0)
        throw CorruptPayload("bad architecture header");
    if (has_boundary) {
        BoundaryBox box;
        box.lower.resize(net.arch.in_dim);
        box.upper.resize(net.arch.in_dim);
        for (int k = 0; k < net.arch.in_dim; ++k) box.lower[k] = detail::read_pod<double>(is);
        for (int k = 0; k < net.arch.in_dim; ++k) box.upper[k] = detail::read_pod<double>(is);
        net.boundary = std::move(box);
    }
    const auto q = detail::read_pod<std::int64_t>(is);
    if (q != net.arch.theta_size()) throw CorruptPayload("theta size does not match header");
    net.theta.resize(q);
    is.read(reinterpret_cast<char*>(net.theta.data()),
            static_cast<std::streamsize>(q * sizeof(double)));
    if (!is) throw CorruptPayload("weight payload truncated");
    return net;
}

inline void save_network_file(const SteinNetwork& net, const std::string& path) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw ConfigError("cannot open weight file for writing: " + path);
    save_network(net, os);
}

inline SteinNetwork load_network_file(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw ConfigError("cannot open weight file: " + path);
    return load_network(is);
}

}  // namespace steinquad
