#pragma once

#include <array>
#include <cstdio>
#include <cstring>
#include <memory>
#include <vector>

#include "acspec/common.hpp"

namespace acspec {

// Flat periodic grid on a torus of dimension dim ∈ {2,3}. Indexing is
// row-major (last axis fastest) and wraps periodically on every axis.
class TorusGrid {
public:
    TorusGrid(int dim, std::array<double, 3> lengths, std::array<std::size_t, 3> resolution)
        : dim_(dim), lengths_(lengths), res_(resolution) {
        check(dim == 2 || dim == 3, "InvalidGrid", "dim must be 2 or 3");
        total_ = 1;
        for (int a = 0; a < dim_; ++a) {
            check(lengths_[a] > 0.0, "InvalidGrid", "period lengths must be positive");
            check(res_[a] >= 8, "InvalidGrid", "resolution must be >= 8 per axis");
            spacing_[a] = lengths_[a] / double(res_[a]);
            total_ *= res_[a];
        }
        for (int a = dim_; a < 3; ++a) {
            lengths_[a] = 0.0;
            res_[a] = 1;
            spacing_[a] = 0.0;
        }
        strides_[dim_ - 1] = 1;
        for (int a = dim_ - 2; a >= 0; --a) strides_[a] = strides_[a + 1] * res_[a + 1];
        cell_volume_ = 1.0;
        for (int a = 0; a < dim_; ++a) cell_volume_ *= spacing_[a];
    }

    int dim() const { return dim_; }
    std::size_t nodes() const { return total_; }
    double length(int a) const { return lengths_[a]; }
    std::size_t res(int a) const { return res_[a]; }
    double spacing(int a) const { return spacing_[a]; }
    std::size_t stride(int a) const { return strides_[a]; }
    double cell_volume() const { return cell_volume_; }

    std::size_t index(std::size_t i0, std::size_t i1, std::size_t i2 = 0) const {
        return i0 * strides_[0] + i1 * strides_[1] + i2 * strides_[2];
    }
    std::array<std::size_t, 3> coords(std::size_t idx) const {
        std::array<std::size_t, 3> c{0, 0, 0};
        for (int a = 0; a < dim_; ++a) {
            c[a] = (idx / strides_[a]) % res_[a];
        }
        return c;
    }
    // Node position; components beyond dim() are zero.
    std::array<double, 3> position(std::size_t idx) const {
        auto c = coords(idx);
        return {c[0] * spacing_[0], c[1] * spacing_[1], c[2] * spacing_[2]};
    }
    std::size_t wrap(long i, int a) const {
        long n = long(res_[a]);
        long r = i % n;
        return std::size_t(r < 0 ? r + n : r);
    }
    // Shortest periodic displacement from a to b along axis `axis`.
    double periodic_delta(double a, double b, int axis) const {
        double L = lengths_[axis];
        double d = b - a;
        d -= L * std::round(d / L);
        return d;
    }
    double periodic_distance2(const std::array<double, 3>& p, const std::array<double, 3>& q) const {
        double s = 0.0;
        for (int a = 0; a < dim_; ++a) {
            double d = periodic_delta(p[a], q[a], a);
            s += d * d;
        }
        return s;
    }

    bool same_shape(const TorusGrid& o) const {
        if (dim_ != o.dim_) return false;
        for (int a = 0; a < dim_; ++a)
            if (res_[a] != o.res_[a] || lengths_[a] != o.lengths_[a]) return false;
        return true;
    }

private:
    int dim_;
    std::array<double, 3> lengths_;
    std::array<std::size_t, 3> res_;
    std::array<double, 3> spacing_{};
    std::array<std::size_t, 3> strides_{1, 1, 1};
    std::size_t total_ = 0;
    double cell_volume_ = 0.0;
};

using GridPtr = std::shared_ptr<const TorusGrid>;

inline GridPtr build_torus_grid(int dim, std::array<double, 3> lengths,
                                std::array<std::size_t, 3> resolution) {
    return std::make_shared<const TorusGrid>(dim, lengths, resolution);
}

struct ScalarField {
    GridPtr grid;
    std::vector<double> values;

    ScalarField() = default;
    explicit ScalarField(GridPtr g, double fill = 0.0)
        : grid(std::move(g)), values(grid->nodes(), fill) {}

    double& operator[](std::size_t i) { return values[i]; }
    double operator[](std::size_t i) const { return values[i]; }
    std::size_t size() const { return values.size(); }

    void check_finite(const char* what = "field") const {
        for (double v : values)
            if (!std::isfinite(v)) fail("NonFinite", std::string(what) + " contains NaN/Inf");
    }
};

// Fill from a callable of node position.
template <typename F>
ScalarField sample_field(const GridPtr& g, F&& f) {
    ScalarField u(g);
    for (std::size_t i = 0; i < g->nodes(); ++i) {
        auto p = g->position(i);
        u[i] = f(p);
    }
    return u;
}

struct VectorField {
    GridPtr grid;
    std::array<std::vector<double>, 3> comp;

    VectorField() = default;
    explicit VectorField(GridPtr g) : grid(std::move(g)) {
        for (int a = 0; a < grid->dim(); ++a) comp[a].assign(grid->nodes(), 0.0);
    }
    double& at(int a, std::size_t i) { return comp[a][i]; }
    double at(int a, std::size_t i) const { return comp[a][i]; }
};

// Symmetric tensor field; components packed as (0,0),(0,1),(1,1) for dim 2 and
// (0,0),(0,1),(0,2),(1,1),(1,2),(2,2) for dim 3.
struct SymTensorField {
    GridPtr grid;
    std::vector<std::vector<double>> comp;

    SymTensorField() = default;
    explicit SymTensorField(GridPtr g) : grid(std::move(g)) {
        int d = grid->dim();
        comp.assign(std::size_t(d * (d + 1) / 2), {});
        for (auto& c : comp) c.assign(grid->nodes(), 0.0);
    }
    static int pack(int d, int a, int b) {
        if (a > b) std::swap(a, b);
        if (d == 2) return a == 0 ? b : 2;
        static constexpr int map3[3][3] = {{0, 1, 2}, {1, 3, 4}, {2, 4, 5}};
        return map3[a][b];
    }
    double at(int a, int b, std::size_t i) const { return comp[pack(grid->dim(), a, b)][i]; }
    double& at(int a, int b, std::size_t i) { return comp[pack(grid->dim(), a, b)][i]; }
};

struct RegionMask {
    GridPtr grid;
    std::vector<std::uint8_t> inside;
    std::string label;

    RegionMask() = default;
    RegionMask(GridPtr g, std::string lab, bool fill = false)
        : grid(std::move(g)), inside(grid->nodes(), fill ? 1 : 0), label(std::move(lab)) {}

    bool operator[](std::size_t i) const { return inside[i] != 0; }
    std::size_t count() const {
        std::size_t n = 0;
        for (auto v : inside) n += v != 0;
        return n;
    }
    RegionMask complement(const std::string& lab) const {
        RegionMask m(grid, lab);
        for (std::size_t i = 0; i < inside.size(); ++i) m.inside[i] = inside[i] ? 0 : 1;
        return m;
    }
    bool subset_of(const RegionMask& o) const {
        for (std::size_t i = 0; i < inside.size(); ++i)
            if (inside[i] && !o.inside[i]) return false;
        return true;
    }
    bool disjoint_from(const RegionMask& o) const {
        for (std::size_t i = 0; i < inside.size(); ++i)
            if (inside[i] && o.inside[i]) return false;
        return true;
    }
};

inline RegionMask full_mask(const GridPtr& g, const std::string& label = "full") {
    return RegionMask(g, label, true);
}

// Axis-aligned periodic box [lo, hi) per axis (wrapping boxes allowed: lo > hi).
inline RegionMask box_mask(const GridPtr& g, const std::string& label,
                           std::array<double, 3> lo, std::array<double, 3> hi) {
    RegionMask m(g, label);
    for (std::size_t i = 0; i < g->nodes(); ++i) {
        auto p = g->position(i);
        bool in = true;
        for (int a = 0; a < g->dim(); ++a) {
            double L = g->length(a);
            double x = std::fmod(p[a] - lo[a] + 2 * L, L);
            double w = std::fmod(hi[a] - lo[a] + 2 * L, L);
            if (w == 0.0) w = L;  // degenerate spec means the full period
            if (x >= w) in = false;
        }
        m.inside[i] = in ? 1 : 0;
    }
    return m;
}

inline RegionMask ball_mask(const GridPtr& g, const std::string& label,
                            std::array<double, 3> center, double radius) {
    RegionMask m(g, label);
    double r2 = radius * radius;
    for (std::size_t i = 0; i < g->nodes(); ++i)
        m.inside[i] = g->periodic_distance2(g->position(i), center) <= r2 ? 1 : 0;
    return m;
}

// ---------------------------------------------------------------------------
// ACFD binary dump: magic "ACFD", version u32 = 1, dim u8, per-axis u64
// counts, then f64 values little-endian row-major.

namespace detail {
template <typename T>
void put_le(std::FILE* f, T v) {
    unsigned char b[sizeof(T)];
    std::memcpy(b, &v, sizeof(T));
    // assumes little-endian host (x86/arm64); asserted in write_acfd
    std::fwrite(b, 1, sizeof(T), f);
}
template <typename T>
T get_le(std::FILE* f) {
    unsigned char b[sizeof(T)];
    if (std::fread(b, 1, sizeof(T), f) != sizeof(T)) fail("IO", "truncated ACFD file");
    T v;
    std::memcpy(&v, b, sizeof(T));
    return v;
}
inline bool host_is_little_endian() {
    std::uint16_t x = 1;
    unsigned char b;
    std::memcpy(&b, &x, 1);
    return b == 1;
}
}  // namespace detail

inline void write_acfd(const std::string& path, const ScalarField& u) {
    check(detail::host_is_little_endian(), "IO", "ACFD writer requires little-endian host");
    std::FILE* f = std::fopen(path.c_str(), "wb");
    check(f != nullptr, "IO", "cannot open " + path + " for writing");
    std::fwrite("ACFD", 1, 4, f);
    detail::put_le<std::uint32_t>(f, 1u);
    unsigned char dim = (unsigned char)u.grid->dim();
    std::fwrite(&dim, 1, 1, f);
    for (int a = 0; a < u.grid->dim(); ++a) detail::put_le<std::uint64_t>(f, u.grid->res(a));
    for (double v : u.values) detail::put_le<double>(f, v);
    std::fclose(f);
}

struct AcfdData {
    int dim = 0;
    std::array<std::uint64_t, 3> counts{1, 1, 1};
    std::vector<double> values;
};

inline AcfdData read_acfd(const std::string& path) {
    check(detail::host_is_little_endian(), "IO", "ACFD reader requires little-endian host");
    std::FILE* f = std::fopen(path.c_str(), "rb");
    check(f != nullptr, "IO", "cannot open " + path);
    char magic[4];
    if (std::fread(magic, 1, 4, f) != 4 || std::memcmp(magic, "ACFD", 4) != 0)
        fail("IO", "bad ACFD magic in " + path);
    auto version = detail::get_le<std::uint32_t>(f);
    check(version == 1, "IO", "unsupported ACFD version");
    unsigned char dim;
    if (std::fread(&dim, 1, 1, f) != 1) fail("IO", "truncated ACFD header");
    check(dim == 2 || dim == 3, "IO", "bad ACFD dim");
    AcfdData d;
    d.dim = dim;
    std::size_t total = 1;
    for (int a = 0; a < dim; ++a) {
        d.counts[a] = detail::get_le<std::uint64_t>(f);
        total *= d.counts[a];
    }
    d.values.resize(total);
    for (std::size_t i = 0; i < total; ++i) d.values[i] = detail::get_le<double>(f);
    std::fclose(f);
    return d;
}

}  // namespace acspec
