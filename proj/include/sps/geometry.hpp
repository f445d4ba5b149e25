#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include "sps/error.hpp"

namespace sps {

using Point = std::array<double, 3>;

inline Point operator+(const Point& a, const Point& b) { return {a[0] + b[0], a[1] + b[1], a[2] + b[2]}; }
inline Point operator-(const Point& a, const Point& b) { return {a[0] - b[0], a[1] - b[1], a[2] - b[2]}; }
inline Point operator*(double s, const Point& a) { return {s * a[0], s * a[1], s * a[2]}; }
inline double norm(const Point& a) { return std::sqrt(a[0] * a[0] + a[1] * a[1] + a[2] * a[2]); }
inline double distance(const Point& a, const Point& b) { return norm(a - b); }

enum class DomainKind { ball, box, shell, ball_union };

struct BallPiece {
    Point center{0.0, 0.0, 0.0};
    double radius = 1.0;
};

enum class Membership { inside, on_boundary, outside };

/// Bounded domain in R^3. Balls, boxes and shells are centred at the origin;
/// a ball union carries its own centres.
class DomainSpec {
public:
    static DomainSpec ball(double radius) {
        DomainSpec d(DomainKind::ball);
        d.radius_ = radius;
        d.validate();
        return d;
    }

    static DomainSpec box(const Point& half_widths) {
        DomainSpec d(DomainKind::box);
        d.half_widths_ = half_widths;
        d.validate();
        return d;
    }

    static DomainSpec shell(double inner, double outer) {
        DomainSpec d(DomainKind::shell);
        d.inner_ = inner;
        d.outer_ = outer;
        d.validate();
        return d;
    }

    static DomainSpec ball_union(std::vector<BallPiece> pieces) {
        DomainSpec d(DomainKind::ball_union);
        d.pieces_ = std::move(pieces);
        d.validate();
        return d;
    }

    DomainKind kind() const { return kind_; }
    double radius() const { return radius_; }
    const Point& half_widths() const { return half_widths_; }
    double inner_radius() const { return inner_; }
    double outer_radius() const { return outer_; }
    const std::vector<BallPiece>& pieces() const { return pieces_; }

    /// Negative inside, positive outside. Exact for ball, box and shell. For a
    /// union the outside value is exact; the inside value is the depth inside
    /// the deepest single ball, which is exact for disjoint pieces and a lower
    /// bound on the true depth otherwise.
    double signed_distance(const Point& x) const {
        switch (kind_) {
            case DomainKind::ball:
                return norm(x) - radius_;
            case DomainKind::box: {
                Point q{};
                for (int k = 0; k < 3; ++k) q[k] = std::abs(x[k]) - half_widths_[k];
                const double inside = std::min(std::max({q[0], q[1], q[2]}), 0.0);
                const Point qp{std::max(q[0], 0.0), std::max(q[1], 0.0), std::max(q[2], 0.0)};
                return norm(qp) + inside;
            }
            case DomainKind::shell: {
                const double r = norm(x);
                return std::max(r - outer_, inner_ - r);
            }
            case DomainKind::ball_union: {
                double best = std::numeric_limits<double>::infinity();
                for (const auto& b : pieces_) best = std::min(best, distance(x, b.center) - b.radius);
                return best;
            }
        }
        return std::numeric_limits<double>::infinity();
    }

    bool contains(const Point& x) const { return signed_distance(x) < 0.0; }

    /// Three-way membership with a boundary band of half-width `band`.
    Membership classify(const Point& x, double band) const {
        const double sd = signed_distance(x);
        if (std::abs(sd) <= band) return Membership::on_boundary;
        return sd < 0.0 ? Membership::inside : Membership::outside;
    }

    /// d(x, Omega); zero for points of Omega.
    double distance_to_domain(const Point& x) const { return std::max(signed_distance(x), 0.0); }

    /// d(x, boundary) for x in Omega, zero otherwise.
    double depth(const Point& x) const { return std::max(-signed_distance(x), 0.0); }

    std::array<Point, 2> bounding_box() const {
        switch (kind_) {
            case DomainKind::ball:
                return {Point{-radius_, -radius_, -radius_}, Point{radius_, radius_, radius_}};
            case DomainKind::box:
                return {Point{-half_widths_[0], -half_widths_[1], -half_widths_[2]}, half_widths_};
            case DomainKind::shell:
                return {Point{-outer_, -outer_, -outer_}, Point{outer_, outer_, outer_}};
            case DomainKind::ball_union: {
                Point lo{std::numeric_limits<double>::infinity(), std::numeric_limits<double>::infinity(),
                         std::numeric_limits<double>::infinity()};
                Point hi{-lo[0], -lo[1], -lo[2]};
                for (const auto& b : pieces_) {
                    for (int k = 0; k < 3; ++k) {
                        lo[k] = std::min(lo[k], b.center[k] - b.radius);
                        hi[k] = std::max(hi[k], b.center[k] + b.radius);
                    }
                }
                return {lo, hi};
            }
        }
        return {};
    }

    /// Radius of the largest ball contained in the domain.
    double inradius() const {
        switch (kind_) {
            case DomainKind::ball: return radius_;
            case DomainKind::box: return std::min({half_widths_[0], half_widths_[1], half_widths_[2]});
            case DomainKind::shell: return 0.5 * (outer_ - inner_);
            case DomainKind::ball_union: {
                double best = 0.0;
                for (const auto& b : pieces_) best = std::max(best, b.radius);
                return best;
            }
        }
        return 0.0;
    }

    /// A point realising the inradius; used to centre default initial data.
    Point deepest_point() const {
        switch (kind_) {
            case DomainKind::ball:
            case DomainKind::box: return {0.0, 0.0, 0.0};
            case DomainKind::shell: return {0.5 * (inner_ + outer_), 0.0, 0.0};
            case DomainKind::ball_union: {
                const auto it = std::max_element(pieces_.begin(), pieces_.end(),
                                                 [](const BallPiece& a, const BallPiece& b) { return a.radius < b.radius; });
                return it->center;
            }
        }
        return {0.0, 0.0, 0.0};
    }

    /// Ljusternik-Schnirelmann category of the closure, supplied as metadata.
    /// A disjoint union of k balls has category k.
    int category() const {
        switch (kind_) {
            case DomainKind::ball:
            case DomainKind::box: return 1;
            case DomainKind::shell: return 2;
            case DomainKind::ball_union: return static_cast<int>(connected_pieces());
        }
        return 1;
    }

    std::string kind_name() const {
        switch (kind_) {
            case DomainKind::ball: return "ball";
            case DomainKind::box: return "box";
            case DomainKind::shell: return "shell";
            case DomainKind::ball_union: return "ball-union";
        }
        return "unknown";
    }

private:
    explicit DomainSpec(DomainKind kind) : kind_(kind) {}

    void validate() const {
        auto finite_positive = [](double v) { return std::isfinite(v) && v > 0.0; };
        switch (kind_) {
            case DomainKind::ball:
                require(finite_positive(radius_), ErrorCode::invalid_argument, "ball radius must be > 0");
                break;
            case DomainKind::box:
                for (double w : half_widths_)
                    require(finite_positive(w), ErrorCode::invalid_argument, "box half-widths must be > 0");
                break;
            case DomainKind::shell:
                require(std::isfinite(inner_) && std::isfinite(outer_) && inner_ > 0.0 && inner_ < outer_,
                        ErrorCode::invalid_argument, "shell requires 0 < inner < outer");
                break;
            case DomainKind::ball_union:
                require(!pieces_.empty(), ErrorCode::invalid_argument, "ball-union needs at least one ball");
                for (const auto& b : pieces_)
                    require(finite_positive(b.radius), ErrorCode::invalid_argument, "ball-union radii must be > 0");
                break;
        }
    }

    std::size_t connected_pieces() const {
        std::vector<std::size_t> parent(pieces_.size());
        for (std::size_t i = 0; i < parent.size(); ++i) parent[i] = i;
        auto find = [&](std::size_t i) {
            while (parent[i] != i) i = parent[i] = parent[parent[i]];
            return i;
        };
        for (std::size_t i = 0; i < pieces_.size(); ++i)
            for (std::size_t j = i + 1; j < pieces_.size(); ++j)
                if (distance(pieces_[i].center, pieces_[j].center) < pieces_[i].radius + pieces_[j].radius)
                    parent[find(i)] = find(j);
        std::size_t roots = 0;
        for (std::size_t i = 0; i < parent.size(); ++i) roots += find(i) == i ? 1 : 0;
        return roots;
    }

    DomainKind kind_;
    double radius_ = 0.0;
    Point half_widths_{0.0, 0.0, 0.0};
    double inner_ = 0.0;
    double outer_ = 0.0;
    std::vector<BallPiece> pieces_;
};

} // namespace sps
