#pragma once

#include <array>
#include <cmath>

namespace scratchsim {

/// Point or vector in R^D, D <= 3. Unused trailing components stay zero so
/// that 2-D and 3-D code share one representation.
struct Vec {
    std::array<double, 3> v{0.0, 0.0, 0.0};

    constexpr Vec() = default;
    constexpr Vec(double x, double y, double z = 0.0) : v{x, y, z} {}

    constexpr double& operator[](std::size_t i) { return v[i]; }
    constexpr double operator[](std::size_t i) const { return v[i]; }

    constexpr Vec& operator+=(const Vec& o) {
        for (std::size_t i = 0; i < 3; ++i) v[i] += o.v[i];
        return *this;
    }
    constexpr Vec& operator-=(const Vec& o) {
        for (std::size_t i = 0; i < 3; ++i) v[i] -= o.v[i];
        return *this;
    }
    constexpr Vec& operator*=(double s) {
        for (auto& x : v) x *= s;
        return *this;
    }
    friend constexpr Vec operator+(Vec a, const Vec& b) { return a += b; }
    friend constexpr Vec operator-(Vec a, const Vec& b) { return a -= b; }
    friend constexpr Vec operator*(Vec a, double s) { return a *= s; }
    friend constexpr Vec operator*(double s, Vec a) { return a *= s; }
    friend constexpr Vec operator-(Vec a) { return a *= -1.0; }
    friend constexpr bool operator==(const Vec&, const Vec&) = default;
};

constexpr double dot(const Vec& a, const Vec& b) {
    return a[0] * b[0] + a[1] * b[1] + a[2] * b[2];
}

constexpr Vec cross(const Vec& a, const Vec& b) {
    return {a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]};
}

inline double norm(const Vec& a) { return std::sqrt(dot(a, a)); }
constexpr double norm2(const Vec& a) { return dot(a, a); }

inline Vec normalized(const Vec& a) {
    const double n = norm(a);
    return n > 0.0 ? a * (1.0 / n) : a;
}

/// Symmetric 3x3 matrix stored densely; 2-D problems leave the third row and
/// column zero.
struct Mat3 {
    std::array<std::array<double, 3>, 3> m{};

    constexpr double& operator()(std::size_t i, std::size_t j) { return m[i][j]; }
    constexpr double operator()(std::size_t i, std::size_t j) const { return m[i][j]; }

    static constexpr Mat3 identity(int dim) {
        Mat3 r;
        for (int i = 0; i < dim; ++i) r.m[i][i] = 1.0;
        return r;
    }
    static constexpr Mat3 outer(const Vec& a, const Vec& b) {
        Mat3 r;
        for (std::size_t i = 0; i < 3; ++i)
            for (std::size_t j = 0; j < 3; ++j) r.m[i][j] = a[i] * b[j];
        return r;
    }
    constexpr Mat3& operator+=(const Mat3& o) {
        for (std::size_t i = 0; i < 3; ++i)
            for (std::size_t j = 0; j < 3; ++j) m[i][j] += o.m[i][j];
        return *this;
    }
    constexpr Mat3& operator*=(double s) {
        for (auto& row : m)
            for (auto& x : row) x *= s;
        return *this;
    }
    friend constexpr Mat3 operator+(Mat3 a, const Mat3& b) { return a += b; }
    friend constexpr Mat3 operator*(Mat3 a, double s) { return a *= s; }
    friend constexpr Mat3 operator*(double s, Mat3 a) { return a *= s; }
    friend constexpr Mat3 operator-(Mat3 a, const Mat3& b) { return a += b * -1.0; }
};

}  // namespace scratchsim
