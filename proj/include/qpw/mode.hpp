#pragma once

#include <cstdlib>
#include <vector>

namespace qpw {

// Fourier mode label nu in Z^d.  Lexicographic ordering of the underlying
// vector gives deterministic iteration everywhere a map is keyed by Mode.
using Mode = std::vector<int>;

inline int l1_norm(const Mode& nu) {
    int s = 0;
    for (int c : nu) s += std::abs(c);
    return s;
}

inline bool is_zero(const Mode& nu) {
    for (int c : nu)
        if (c != 0) return false;
    return true;
}

inline Mode negate(const Mode& nu) {
    Mode out(nu.size());
    for (size_t i = 0; i < nu.size(); ++i) out[i] = -nu[i];
    return out;
}

inline Mode add(const Mode& a, const Mode& b) {
    Mode out(a.size());
    for (size_t i = 0; i < a.size(); ++i) out[i] = a[i] + b[i];
    return out;
}

inline Mode sub(const Mode& a, const Mode& b) {
    Mode out(a.size());
    for (size_t i = 0; i < a.size(); ++i) out[i] = a[i] - b[i];
    return out;
}

}  // namespace qpw
