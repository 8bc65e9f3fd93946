#pragma once

#include <array>
#include <cmath>
#include <stdexcept>

namespace chemostat {

struct Vec2 {
    double x = 0.0;
    double y = 0.0;
};

inline Vec2 operator+(Vec2 a, Vec2 b) { return {a.x + b.x, a.y + b.y}; }
inline Vec2 operator-(Vec2 a, Vec2 b) { return {a.x - b.x, a.y - b.y}; }
inline Vec2 operator*(double c, Vec2 v) { return {c * v.x, c * v.y}; }

// Row-major 2x2 matrix.
struct Mat2 {
    double a11 = 0.0, a12 = 0.0, a21 = 0.0, a22 = 0.0;

    static Mat2 identity() { return {1.0, 0.0, 0.0, 1.0}; }

    double trace() const { return a11 + a22; }
    double det() const { return a11 * a22 - a12 * a21; }
    Mat2 transpose() const { return {a11, a21, a12, a22}; }

    // Both eigenvalues have negative real part (stability of the linearized flow).
    bool is_hurwitz() const { return trace() < 0.0 && det() > 0.0; }
};

inline Mat2 operator+(Mat2 a, Mat2 b) {
    return {a.a11 + b.a11, a.a12 + b.a12, a.a21 + b.a21, a.a22 + b.a22};
}
inline Mat2 operator*(double c, Mat2 m) { return {c * m.a11, c * m.a12, c * m.a21, c * m.a22}; }
inline Mat2 operator*(Mat2 a, Mat2 b) {
    return {a.a11 * b.a11 + a.a12 * b.a21, a.a11 * b.a12 + a.a12 * b.a22,
            a.a21 * b.a11 + a.a22 * b.a21, a.a21 * b.a12 + a.a22 * b.a22};
}
inline Vec2 operator*(Mat2 m, Vec2 v) {
    return {m.a11 * v.x + m.a12 * v.y, m.a21 * v.x + m.a22 * v.y};
}

// Symmetric 2x2 matrix (covariance storage).
struct Sym2 {
    double xx = 0.0, xy = 0.0, yy = 0.0;

    double trace() const { return xx + yy; }
    double det() const { return xx * yy - xy * xy; }

    // Eigenvalues, descending.
    std::array<double, 2> eigenvalues() const {
        const double half_tr = 0.5 * (xx + yy);
        const double disc = std::sqrt(std::max(0.25 * (xx - yy) * (xx - yy) + xy * xy, 0.0));
        return {half_tr + disc, half_tr - disc};
    }

    // Unit eigenvector of the larger eigenvalue.
    Vec2 principal_axis() const {
        const auto ev = eigenvalues();
        // (xx - l) vx + xy vy = 0
        double vx = -xy, vy = xx - ev[0];
        double norm = std::hypot(vx, vy);
        if (norm == 0.0) return {1.0, 0.0};  // isotropic or diagonal
        if (std::abs(xy) < 1e-300 && xx >= yy) return {1.0, 0.0};
        if (std::abs(xy) < 1e-300) return {0.0, 1.0};
        return {vx / norm, vy / norm};
    }

    double correlation() const {
        const double denom = std::sqrt(xx * yy);
        if (denom <= 0.0) throw std::domain_error("correlation undefined: zero marginal variance");
        return xy / denom;
    }

    bool is_psd(double tol_scale = 1e-12) const {
        const auto ev = eigenvalues();
        return ev[1] >= -tol_scale * std::max(trace(), 0.0);
    }

    Mat2 as_mat() const { return {xx, xy, xy, yy}; }
};

inline Sym2 operator+(Sym2 a, Sym2 b) { return {a.xx + b.xx, a.xy + b.xy, a.yy + b.yy}; }
inline Sym2 operator*(double c, Sym2 s) { return {c * s.xx, c * s.xy, c * s.yy}; }

// Symmetric part of A*S + S*A^T for symmetric S.
inline Sym2 lyapunov_flow(Mat2 a, Sym2 s) {
    // (A S)_{11} = a11 sxx + a12 sxy, etc.; result = A S + (A S)^T
    const double as11 = a.a11 * s.xx + a.a12 * s.xy;
    const double as12 = a.a11 * s.xy + a.a12 * s.yy;
    const double as21 = a.a21 * s.xx + a.a22 * s.xy;
    const double as22 = a.a21 * s.xy + a.a22 * s.yy;
    return {2.0 * as11, as12 + as21, 2.0 * as22};
}

// Outer product c c^T.
inline Sym2 outer(Vec2 c) { return {c.x * c.x, c.x * c.y, c.y * c.y}; }

// Solve the 3x3 linear system M u = rhs by Gaussian elimination with partial pivoting.
inline std::array<double, 3> solve3(std::array<std::array<double, 3>, 3> m, std::array<double, 3> rhs) {
    for (int col = 0; col < 3; ++col) {
        int piv = col;
        for (int r = col + 1; r < 3; ++r)
            if (std::abs(m[r][col]) > std::abs(m[piv][col])) piv = r;
        if (m[piv][col] == 0.0) throw std::runtime_error("singular 3x3 system");
        std::swap(m[col], m[piv]);
        std::swap(rhs[col], rhs[piv]);
        for (int r = col + 1; r < 3; ++r) {
            const double f = m[r][col] / m[col][col];
            for (int c = col; c < 3; ++c) m[r][c] -= f * m[col][c];
            rhs[r] -= f * rhs[col];
        }
    }
    std::array<double, 3> u{};
    for (int r = 2; r >= 0; --r) {
        double acc = rhs[r];
        for (int c = r + 1; c < 3; ++c) acc -= m[r][c] * u[c];
        u[r] = acc / m[r][r];
    }
    return u;
}

}  // namespace chemostat
