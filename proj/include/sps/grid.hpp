#pragma once

#include <atomic>
#include <cmath>
#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <vector>

#include "sps/error.hpp"
#include "sps/geometry.hpp"

namespace sps {

/// Uniform lattice over the bounding box of a domain. Only nodes strictly
/// inside the domain carry unknowns; every other lattice node is a
/// homogeneous Dirichlet ghost. Immutable once built.
class Grid {
public:
    static constexpr int32_t ghost = -1;

    const DomainSpec& domain() const { return domain_; }
    double spacing() const { return h_; }
    double cell_volume() const { return h_ * h_ * h_; }
    const std::array<int, 3>& dims() const { return dims_; }
    const Point& origin() const { return origin_; }
    std::size_t interior_count() const { return nodes_.size(); }
    std::uint64_t id() const { return id_; }

    const std::array<int, 3>& lattice_index(std::size_t node) const { return nodes_[node]; }

    Point lattice_point(int i, int j, int k) const {
        return {origin_[0] + i * h_, origin_[1] + j * h_, origin_[2] + k * h_};
    }

    Point coordinate(std::size_t node) const {
        const auto& ijk = nodes_[node];
        return lattice_point(ijk[0], ijk[1], ijk[2]);
    }

    /// Interior index of lattice node (i,j,k), or nullopt for ghosts and
    /// indices off the lattice.
    std::optional<std::size_t> interior_at(int i, int j, int k) const {
        if (i < 0 || j < 0 || k < 0 || i >= dims_[0] || j >= dims_[1] || k >= dims_[2]) return std::nullopt;
        const int32_t idx = index_[flat(i, j, k)];
        if (idx == ghost) return std::nullopt;
        return static_cast<std::size_t>(idx);
    }

    /// Nearest lattice node to x (may be a ghost).
    std::array<int, 3> nearest_lattice(const Point& x) const {
        std::array<int, 3> ijk{};
        for (int a = 0; a < 3; ++a)
            ijk[a] = static_cast<int>(std::lround((x[a] - origin_[a]) / h_));
        return ijk;
    }

    /// Neighbour order: -x, +x, -y, +y, -z, +z. Ghosts are `ghost`.
    const std::array<int32_t, 6>& neighbors(std::size_t node) const { return neighbors_[node]; }

    static std::shared_ptr<const Grid> build(const DomainSpec& domain, int resolution);
    static std::shared_ptr<const Grid> build_with_spacing(const DomainSpec& domain, double h);

private:
    Grid() = default;

    std::size_t flat(int i, int j, int k) const {
        return (static_cast<std::size_t>(k) * dims_[1] + j) * dims_[0] + i;
    }

    void populate();

    static std::uint64_t next_id() {
        static std::atomic<std::uint64_t> counter{1};
        return counter.fetch_add(1);
    }

    DomainSpec domain_ = DomainSpec::ball(1.0);
    double h_ = 0.0;
    std::array<int, 3> dims_{0, 0, 0};
    Point origin_{0.0, 0.0, 0.0};
    std::vector<int32_t> index_;
    std::vector<std::array<int, 3>> nodes_;
    std::vector<std::array<int32_t, 6>> neighbors_;
    std::uint64_t id_ = 0;
};

using GridPtr = std::shared_ptr<const Grid>;

inline void Grid::populate() {
    const std::size_t total = static_cast<std::size_t>(dims_[0]) * dims_[1] * dims_[2];
    index_.assign(total, ghost);
    // Nodes on the boundary up to rounding are not unknowns.
    const double eps = 1e-12 * h_;
    for (int k = 0; k < dims_[2]; ++k)
        for (int j = 0; j < dims_[1]; ++j)
            for (int i = 0; i < dims_[0]; ++i) {
                if (domain_.signed_distance(lattice_point(i, j, k)) < -eps) {
                    index_[flat(i, j, k)] = static_cast<int32_t>(nodes_.size());
                    nodes_.push_back({i, j, k});
                }
            }
    require(!nodes_.empty(), ErrorCode::empty_interior, "no lattice point falls inside the domain");

    static constexpr std::array<std::array<int, 3>, 6> offsets{
        {{-1, 0, 0}, {1, 0, 0}, {0, -1, 0}, {0, 1, 0}, {0, 0, -1}, {0, 0, 1}}};
    neighbors_.resize(nodes_.size());
    for (std::size_t n = 0; n < nodes_.size(); ++n) {
        const auto& ijk = nodes_[n];
        for (int d = 0; d < 6; ++d) {
            const auto nb = interior_at(ijk[0] + offsets[d][0], ijk[1] + offsets[d][1], ijk[2] + offsets[d][2]);
            neighbors_[n][d] = nb ? static_cast<int32_t>(*nb) : ghost;
        }
    }
    id_ = next_id();
}

inline GridPtr Grid::build(const DomainSpec& domain, int resolution) {
    require(resolution >= 8, ErrorCode::invalid_argument, "resolution must be >= 8");
    const auto [lo, hi] = domain.bounding_box();
    double extent = 0.0;
    for (int a = 0; a < 3; ++a) extent = std::max(extent, hi[a] - lo[a]);

    std::shared_ptr<Grid> g(new Grid());
    g->domain_ = domain;
    g->h_ = extent / (resolution - 1);
    for (int a = 0; a < 3; ++a) {
        const int n = static_cast<int>(std::floor((hi[a] - lo[a]) / g->h_ + 1e-9)) + 1;
        g->dims_[a] = n;
        g->origin_[a] = 0.5 * (lo[a] + hi[a]) - 0.5 * (n - 1) * g->h_;
    }
    g->populate();
    return g;
}

/// Lattice with prescribed spacing whose nodes sit at integer multiples of h,
/// so grids built this way for different domains share node positions.
inline GridPtr Grid::build_with_spacing(const DomainSpec& domain, double h) {
    require(std::isfinite(h) && h > 0.0, ErrorCode::invalid_argument, "spacing must be > 0");
    const auto [lo, hi] = domain.bounding_box();
    std::shared_ptr<Grid> g(new Grid());
    g->domain_ = domain;
    g->h_ = h;
    for (int a = 0; a < 3; ++a) {
        const long i_lo = static_cast<long>(std::floor(lo[a] / h + 1e-9));
        const long i_hi = static_cast<long>(std::ceil(hi[a] / h - 1e-9));
        g->dims_[a] = static_cast<int>(i_hi - i_lo + 1);
        g->origin_[a] = static_cast<double>(i_lo) * h;
    }
    g->populate();
    return g;
}

inline GridPtr build_grid(const DomainSpec& domain, int resolution) { return Grid::build(domain, resolution); }

// ---------------------------------------------------------------------------

/// Nodal values on the interior nodes of one grid. Exterior values are zero
/// implicitly.
class ScalarField {
public:
    explicit ScalarField(GridPtr grid) : grid_(std::move(grid)), values_(grid_->interior_count(), 0.0) {}

    ScalarField(GridPtr grid, std::vector<double> values) : grid_(std::move(grid)), values_(std::move(values)) {
        require(values_.size() == grid_->interior_count(), ErrorCode::invalid_argument,
                "field size does not match interior node count");
    }

    const Grid& grid() const { return *grid_; }
    const GridPtr& grid_ptr() const { return grid_; }
    std::size_t size() const { return values_.size(); }

    std::span<const double> values() const { return values_; }
    std::span<double> values() { return values_; }

    double operator[](std::size_t i) const { return values_[i]; }
    double& operator[](std::size_t i) { return values_[i]; }

    bool same_grid(const ScalarField& other) const { return grid_->id() == other.grid_->id(); }

    bool all_finite() const {
        for (double v : values_)
            if (!std::isfinite(v)) return false;
        return true;
    }

    ScalarField& operator+=(const ScalarField& o) {
        check_grid(o);
        for (std::size_t i = 0; i < values_.size(); ++i) values_[i] += o.values_[i];
        return *this;
    }

    ScalarField& operator-=(const ScalarField& o) {
        check_grid(o);
        for (std::size_t i = 0; i < values_.size(); ++i) values_[i] -= o.values_[i];
        return *this;
    }

    ScalarField& operator*=(double s) {
        for (double& v : values_) v *= s;
        return *this;
    }

    /// this += s * o
    ScalarField& axpy(double s, const ScalarField& o) {
        check_grid(o);
        for (std::size_t i = 0; i < values_.size(); ++i) values_[i] += s * o.values_[i];
        return *this;
    }

    void check_grid(const ScalarField& o) const {
        require(same_grid(o), ErrorCode::grid_mismatch, "fields live on different grids");
    }

    friend ScalarField operator+(ScalarField a, const ScalarField& b) { return a += b; }
    friend ScalarField operator-(ScalarField a, const ScalarField& b) { return a -= b; }
    friend ScalarField operator*(double s, ScalarField a) { return a *= s; }

private:
    GridPtr grid_;
    std::vector<double> values_;
};

/// Plain sum of products (no quadrature weight), in node order.
inline double dot(const ScalarField& a, const ScalarField& b) {
    a.check_grid(b);
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

/// Lumped L2 inner product h^3 sum a_i b_i.
inline double inner(const ScalarField& a, const ScalarField& b) { return a.grid().cell_volume() * dot(a, b); }

inline double max_value(const ScalarField& u) {
    double m = -std::numeric_limits<double>::infinity();
    for (double v : u.values()) m = std::max(m, v);
    return m;
}

inline double min_value(const ScalarField& u) {
    double m = std::numeric_limits<double>::infinity();
    for (double v : u.values()) m = std::min(m, v);
    return m;
}

inline ScalarField positive_part(ScalarField u) {
    for (double& v : u.values()) v = std::max(v, 0.0);
    return u;
}

inline ScalarField make_field(const GridPtr& grid, auto&& fn) {
    ScalarField f(grid);
    for (std::size_t n = 0; n < grid->interior_count(); ++n) f[n] = fn(grid->coordinate(n));
    return f;
}

namespace detail {

/// out = (-Delta_h + shift) in, over raw interior-node arrays.
inline void apply_shifted_laplacian(const Grid& grid, std::span<const double> in, std::span<double> out, double shift) {
    const double inv_h2 = 1.0 / (grid.spacing() * grid.spacing());
    const double diag = 6.0 * inv_h2 + shift;
    const std::size_t n = grid.interior_count();
    for (std::size_t i = 0; i < n; ++i) {
        const auto& nb = grid.neighbors(i);
        double off = 0.0;
        for (int d = 0; d < 6; ++d)
            if (nb[d] != Grid::ghost) off += in[static_cast<std::size_t>(nb[d])];
        out[i] = diag * in[i] - inv_h2 * off;
    }
}

inline double pow_abs(double v, double q) {
    const double a = std::abs(v);
    if (a < 1e-300) return 0.0;
    if (q == 2.0) return a * a;
    return std::pow(a, q);
}

} // namespace detail

/// 7-point -Delta_h with homogeneous Dirichlet ghosts. Serial loop, so the
/// result is bitwise reproducible.
inline ScalarField apply_laplacian(const ScalarField& u) {
    ScalarField out(u.grid_ptr());
    detail::apply_shifted_laplacian(u.grid(), u.values(), out.values(), 0.0);
    return out;
}

/// h^3 sum |u_i|^q
inline double integrate_power(const ScalarField& u, double q) {
    require(q >= 1.0, ErrorCode::invalid_argument, "integrate_power requires q >= 1");
    double s = 0.0;
    for (double v : u.values()) s += detail::pow_abs(v, q);
    return u.grid().cell_volume() * s;
}

struct H1Norm {
    double dirichlet = 0.0;
    double mass = 0.0;
    double total = 0.0;
};

inline H1Norm h1_norm_sq(const ScalarField& u) {
    H1Norm n;
    n.dirichlet = inner(apply_laplacian(u), u);
    n.mass = integrate_power(u, 2.0);
    n.total = n.dirichlet + n.mass;
    return n;
}

inline double l2_norm(const ScalarField& u) { return std::sqrt(integrate_power(u, 2.0)); }

} // namespace sps
