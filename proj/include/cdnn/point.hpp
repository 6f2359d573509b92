#pragma once

namespace cdnn {

struct Point {
    double x = 0.0;
    double y = 0.0;

    friend bool operator==(Point, Point) = default;
};

struct Vec2 {
    double x = 0.0;
    double y = 0.0;

    friend Vec2 operator-(Vec2 a) { return {-a.x, -a.y}; }
    friend bool operator==(Vec2, Vec2) = default;
};

inline double dot(Vec2 a, Vec2 b) { return a.x * b.x + a.y * b.y; }

}  // namespace cdnn
