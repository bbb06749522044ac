#pragma once

// Shared fixture: the two-state benchmark system and its templates.

#include "polytube/template.hpp"

namespace fixture {

using polytube::Mat;
using polytube::Vec;

inline Mat sys_A() {
    Mat A(2, 2);
    A << 1.5, 1.0, 0.25, 0.75;
    return A;
}

inline Mat sys_B() {
    Mat B(2, 1);
    B << 0.0, 1.0;
    return B;
}

inline Mat sys_C() {
    Mat C(1, 2);
    C << 1.0, 0.0;
    return C;
}

inline Mat tpl_Y() {
    Mat Y(6, 2);
    Y << 1, 0,
         1, 1,
         0, 1,
        -1, 0,
        -1, -1,
         0, -1;
    return Y;
}

inline Mat tpl_G() {
    Mat G(6, 6);
    G << -1,  1, -1,  0,  0,  0,
          0, -1,  1, -1,  0,  0,
          0,  0, -1,  1, -1,  0,
          0,  0,  0, -1,  1, -1,
         -1,  0,  0,  0, -1,  1,
          1, -1,  0,  0,  0, -1;
    return G;
}

inline Mat tpl_Z() {
    Mat Z(8, 6);
    Z << 1, 0, 0, 1, 0, 0,
         0, 0, 1, 0, 0, 1,
         1, 0, 0, 0, 0, 0,
         0, 1, 0, 0, 0, 0,
         0, 0, 1, 0, 0, 0,
         0, 0, 0, 1, 0, 0,
         0, 0, 0, 0, 1, 0,
         0, 0, 0, 0, 0, 1;
    return Z;
}

inline Mat tpl_H() {
    Mat H(9, 8);
    H <<  0, -1, -1,  1,  0,  0,  0,  1,
         -1,  1,  1, -1,  0,  0,  0, -1,
          1,  0, -1,  1, -1,  0,  0,  0,
          1,  0,  1, -1,  0,  0,  0, -1,
          1,  1,  0, -1,  0,  0, -1,  0,
          0, -1,  0,  0,  1, -1,  1,  0,
         -1,  1,  0,  0, -1,  1, -1,  0,
          1,  0,  0,  0, -1,  1, -1,  0,
          1,  0,  0,  0,  0, -1,  1, -1;
    return H;
}

inline Vec wbar() {
    Vec w(6);
    w << 0.5, 1.0, 0.5, 0.5, 1.0, 0.5;
    return w;
}

inline Vec vbar() {
    Vec v(1);
    v << 2.0;
    return v;
}

/// Support parameters of the box [17,23]^2 in the Y template.
inline Vec yhat_box() {
    Vec y(6);
    y << 23, 46, 23, -17, -34, -17;
    return y;
}

inline std::shared_ptr<const polytube::TemplateFamily> family() {
    static auto fam = std::make_shared<polytube::TemplateFamily>(polytube::make_family(tpl_Y(), tpl_G()));
    return fam;
}

inline std::shared_ptr<const polytube::MetaTemplate> meta() {
    static auto m = std::make_shared<polytube::MetaTemplate>(polytube::make_meta(family(), tpl_Z(), tpl_H(), 1));
    return m;
}

// 1-D tutorial encoding: X ⊆ [-y2_, y1_] with width row (1,1).
inline std::shared_ptr<const polytube::TemplateFamily> family_1d() {
    Mat Y(2, 1);
    Y << 1, -1;
    Mat G(1, 2);
    G << -1, -1;
    static auto fam = std::make_shared<polytube::TemplateFamily>(polytube::make_family(Y, G));
    return fam;
}

inline std::shared_ptr<const polytube::MetaTemplate> meta_1d() {
    Mat Z(3, 2);
    Z << 1, 1,
         1, 0,
         0, 1;
    Mat H(2, 3);
    H << 1, -1, -1,
        -1, 0, 0;
    static auto m = std::make_shared<polytube::MetaTemplate>(polytube::make_meta(family_1d(), Z, H, 1));
    return m;
}

}  // namespace fixture
