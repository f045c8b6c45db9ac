#include "qpw/trig.hpp"

#include <cmath>

namespace qpw {

TrigSeries TrigSeries::constant(int d, double value, bool real_flag) {
    TrigSeries s(d, real_flag);
    if (value != 0.0) s.set(Mode(d, 0), value);
    return s;
}

Complex TrigSeries::at(const Mode& nu) const {
    auto it = c_.find(nu);
    return it == c_.end() ? Complex(0.0) : it->second;
}

void TrigSeries::set(const Mode& nu, Complex v) {
    if (static_cast<int>(nu.size()) != d_)
        throw std::domain_error("TrigSeries::set: mode dimension mismatch");
    if (v == Complex(0.0))
        c_.erase(nu);
    else
        c_[nu] = v;
}

void TrigSeries::set_pair(const Mode& nu, Complex v) {
    set(nu, v);
    set(negate(nu), std::conj(v));
}

void TrigSeries::add_scaled(const TrigSeries& other, Complex factor) {
    if (other.d_ != d_)
        throw std::domain_error("TrigSeries: dimension mismatch");
    for (const auto& [nu, v] : other.c_) {
        Complex s = at(nu) + factor * v;
        set(nu, s);
    }
}

TrigSeries TrigSeries::scaled(Complex factor) const {
    TrigSeries out(d_, real_flag_);
    if (factor == Complex(0.0)) return out;
    for (const auto& [nu, v] : c_) out.c_[nu] = factor * v;
    return out;
}

double TrigSeries::max_abs() const {
    double m = 0.0;
    for (const auto& [nu, v] : c_) m = std::max(m, std::abs(v));
    return m;
}

double TrigSeries::reality_defect() const {
    double m = 0.0;
    for (const auto& [nu, v] : c_)
        m = std::max(m, std::abs(at(negate(nu)) - std::conj(v)));
    return m;
}

int TrigSeries::max_l1_mode() const {
    int m = 0;
    for (const auto& [nu, v] : c_) m = std::max(m, l1_norm(nu));
    return m;
}

double TrigSeries::prune(double cut) {
    double dropped = 0.0;
    for (auto it = c_.begin(); it != c_.end();) {
        if (std::abs(it->second) < cut) {
            dropped += std::abs(it->second);
            it = c_.erase(it);
        } else {
            ++it;
        }
    }
    return dropped;
}

Complex TrigSeries::evaluate_angle(const std::vector<double>& psi) const {
    Complex acc = 0.0;
    for (const auto& [nu, v] : c_) {
        double phase = 0.0;
        for (int i = 0; i < d_; ++i) phase += nu[i] * psi[i];
        acc += v * std::polar(1.0, phase);
    }
    return acc;
}

Complex TrigSeries::evaluate(const FrequencyVector& omega, double t) const {
    Complex acc = 0.0;
    for (const auto& [nu, v] : c_)
        acc += v * std::polar(1.0, omega.dot(nu) * t);
    return acc;
}

double TrigSeries::evaluate_real(const FrequencyVector& omega, double t,
                                 double imag_tol) const {
    Complex z = evaluate(omega, t);
    double mass = 0.0;
    for (const auto& [nu, v] : c_) mass += std::abs(v);
    if (std::abs(z.imag()) > imag_tol * std::max(1.0, mass))
        throw std::runtime_error(
            "TrigSeries::evaluate_real: imaginary residue above tolerance");
    return z.real();
}

TrigSeries TrigSeries::derivative(const FrequencyVector& omega,
                                  int order) const {
    TrigSeries out(d_, real_flag_);
    for (const auto& [nu, v] : c_) {
        Complex f = std::pow(Complex(0.0, omega.dot(nu)), order);
        if (f != Complex(0.0)) out.c_[nu] = f * v;
    }
    return out;
}

TrigSeries operator+(const TrigSeries& a, const TrigSeries& b) {
    TrigSeries out = a;
    out.add_scaled(b, 1.0);
    return out;
}

TrigSeries operator-(const TrigSeries& a, const TrigSeries& b) {
    TrigSeries out = a;
    out.add_scaled(b, -1.0);
    return out;
}

TrigSeries convolve(const TrigSeries& a, const TrigSeries& b) {
    if (a.dim() != b.dim())
        throw std::domain_error("convolve: dimension mismatch");
    TrigSeries out(a.dim(), a.real_flag() && b.real_flag());
    for (const auto& [na, va] : a.coeffs())
        for (const auto& [nb, vb] : b.coeffs()) {
            Mode nu = add(na, nb);
            out.set(nu, out.at(nu) + va * vb);
        }
    return out;
}

Nonlinearity::Nonlinearity(std::vector<double> coeffs)
    : coeffs_(std::move(coeffs)) {
    while (coeffs_.size() > 1 && coeffs_.back() == 0.0) coeffs_.pop_back();
    if (coeffs_.empty()) coeffs_.push_back(0.0);
}

double Nonlinearity::eval(double x) const {
    double acc = 0.0;
    for (size_t j = coeffs_.size(); j-- > 0;) acc = acc * x + coeffs_[j];
    return acc;
}

double Nonlinearity::deriv(double x) const {
    double acc = 0.0;
    for (size_t j = coeffs_.size(); j-- > 1;)
        acc = acc * x + coeffs_[j] * static_cast<double>(j);
    return acc;
}

}  // namespace qpw
