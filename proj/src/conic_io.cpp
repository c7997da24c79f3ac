/*
 Copyright 2026 The tscvx Authors

 Licensed under the Apache License, Version 2.0 (the "License");
 you may not use this file except in compliance with the License.
 You may obtain a copy of the License at

      https://www.apache.org/licenses/LICENSE-2.0

 Unless required by applicable law or agreed to in writing, software
 distributed under the License is distributed on an "AS IS" BASIS,
 WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 See the License for the specific language governing permissions and
 limitations under the License.
*/

#include <algorithm>
#include <bit>
#include <cstdint>
#include <cstdio>
#include <cstring>
#include <istream>
#include <ostream>
#include <string>

#include "tscvx/conic.hpp"
#include "tscvx/errors.hpp"

namespace tscvx {

namespace {

using SpMat = Eigen::SparseMatrix<double>;

char cone_letter(ConeKind k) {
    switch (k) {
        case ConeKind::Zero: return 'Z';
        case ConeKind::NonNeg: return 'L';
        case ConeKind::SOC: return 'Q';
    }
    return '?';
}

ConeKind cone_from_letter(const std::string& s) {
    if (s == "Z") return ConeKind::Zero;
    if (s == "L") return ConeKind::NonNeg;
    if (s == "Q") return ConeKind::SOC;
    throw FormatError("unknown cone tag '" + s + "'");
}

std::string fmt17(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

void expect(std::istream& is, const std::string& word) {
    std::string got;
    if (!(is >> got) || got != word) {
        throw FormatError("expected '" + word + "' but found '" + got + "'");
    }
}

template <typename T>
void put(std::ostream& os, T v) {
    unsigned char bytes[sizeof(T)];
    std::memcpy(bytes, &v, sizeof(T));
    if constexpr (std::endian::native == std::endian::big) std::reverse(bytes, bytes + sizeof(T));
    os.write(reinterpret_cast<const char*>(bytes), sizeof(T));
}

template <typename T>
T get(std::istream& is) {
    unsigned char bytes[sizeof(T)];
    if (!is.read(reinterpret_cast<char*>(bytes), sizeof(T))) throw FormatError("truncated binary program");
    if constexpr (std::endian::native == std::endian::big) std::reverse(bytes, bytes + sizeof(T));
    T v;
    std::memcpy(&v, bytes, sizeof(T));
    return v;
}

}  // namespace

void write_text(std::ostream& os, const ConeProgram& prog) {
    os << "CONEPROGRAM 1\n";
    os << prog.n_vars() << ' ' << prog.n_rows() << ' ' << prog.G.nonZeros() << '\n';
    os << "cones " << prog.cones.size() << '\n';
    for (const auto& k : prog.cones) os << cone_letter(k.kind) << ' ' << k.dim << '\n';
    os << "c\n";
    for (int i = 0; i < prog.n_vars(); ++i) os << fmt17(prog.c(i)) << '\n';
    os << "h\n";
    for (int i = 0; i < prog.n_rows(); ++i) os << fmt17(prog.h(i)) << '\n';
    os << "G\n";
    for (int k = 0; k < prog.G.outerSize(); ++k) {
        for (SpMat::InnerIterator it(prog.G, k); it; ++it) {
            os << it.row() << ' ' << it.col() << ' ' << fmt17(it.value()) << '\n';
        }
    }
}

ConeProgram read_text(std::istream& is) {
    expect(is, "CONEPROGRAM");
    int version = 0;
    if (!(is >> version) || version != 1) throw FormatError("unsupported CONEPROGRAM version");
    long n = 0, m = 0, nnz = 0;
    if (!(is >> n >> m >> nnz) || n < 0 || m < 0 || nnz < 0) throw FormatError("bad dimension line");
    expect(is, "cones");
    long nc = 0;
    if (!(is >> nc) || nc < 0) throw FormatError("bad cone count");
    ConeProgram prog;
    for (long k = 0; k < nc; ++k) {
        std::string tag;
        int dim = 0;
        if (!(is >> tag >> dim)) throw FormatError("truncated cone list");
        prog.cones.push_back({cone_from_letter(tag), dim});
    }
    expect(is, "c");
    prog.c.resize(n);
    for (long i = 0; i < n; ++i) {
        if (!(is >> prog.c(i))) throw FormatError("truncated c vector");
    }
    expect(is, "h");
    prog.h.resize(m);
    for (long i = 0; i < m; ++i) {
        if (!(is >> prog.h(i))) throw FormatError("truncated h vector");
    }
    expect(is, "G");
    std::vector<Eigen::Triplet<double>> t;
    t.reserve(nnz);
    for (long k = 0; k < nnz; ++k) {
        long r = 0, c = 0;
        double v = 0.0;
        if (!(is >> r >> c >> v)) throw FormatError("truncated G triplets");
        if (r < 0 || r >= m || c < 0 || c >= n) throw FormatError("G triplet out of range");
        t.emplace_back(r, c, v);
    }
    prog.G.resize(m, n);
    prog.G.setFromTriplets(t.begin(), t.end());
    return prog;
}

void write_binary(std::ostream& os, const ConeProgram& prog) {
    os.write("CPRB", 4);
    put<std::uint32_t>(os, 1);
    put<std::uint32_t>(os, static_cast<std::uint32_t>(prog.n_vars()));
    put<std::uint32_t>(os, static_cast<std::uint32_t>(prog.n_rows()));
    put<std::uint32_t>(os, static_cast<std::uint32_t>(prog.G.nonZeros()));
    put<std::uint32_t>(os, static_cast<std::uint32_t>(prog.cones.size()));
    for (const auto& k : prog.cones) {
        put<std::uint8_t>(os, static_cast<std::uint8_t>(k.kind));
        put<std::uint32_t>(os, static_cast<std::uint32_t>(k.dim));
    }
    for (int i = 0; i < prog.n_vars(); ++i) put<double>(os, prog.c(i));
    for (int i = 0; i < prog.n_rows(); ++i) put<double>(os, prog.h(i));
    for (int k = 0; k < prog.G.outerSize(); ++k) {
        for (SpMat::InnerIterator it(prog.G, k); it; ++it) {
            put<std::uint32_t>(os, static_cast<std::uint32_t>(it.row()));
            put<std::uint32_t>(os, static_cast<std::uint32_t>(it.col()));
            put<double>(os, it.value());
        }
    }
}

ConeProgram read_binary(std::istream& is) {
    char magic[4];
    if (!is.read(magic, 4) || std::memcmp(magic, "CPRB", 4) != 0) throw FormatError("bad binary program magic");
    if (get<std::uint32_t>(is) != 1) throw FormatError("unsupported binary program version");
    const auto n = get<std::uint32_t>(is);
    const auto m = get<std::uint32_t>(is);
    const auto nnz = get<std::uint32_t>(is);
    const auto nc = get<std::uint32_t>(is);
    ConeProgram prog;
    for (std::uint32_t k = 0; k < nc; ++k) {
        const auto kind = get<std::uint8_t>(is);
        if (kind > 2) throw FormatError("bad cone kind in binary program");
        prog.cones.push_back({static_cast<ConeKind>(kind), static_cast<int>(get<std::uint32_t>(is))});
    }
    prog.c.resize(n);
    for (std::uint32_t i = 0; i < n; ++i) prog.c(i) = get<double>(is);
    prog.h.resize(m);
    for (std::uint32_t i = 0; i < m; ++i) prog.h(i) = get<double>(is);
    std::vector<Eigen::Triplet<double>> t;
    t.reserve(nnz);
    for (std::uint32_t k = 0; k < nnz; ++k) {
        const auto r = get<std::uint32_t>(is);
        const auto c = get<std::uint32_t>(is);
        const double v = get<double>(is);
        if (r >= m || c >= n) throw FormatError("G triplet out of range");
        t.emplace_back(r, c, v);
    }
    prog.G.resize(m, n);
    prog.G.setFromTriplets(t.begin(), t.end());
    return prog;
}

}  // namespace tscvx
