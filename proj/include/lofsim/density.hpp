// Copyright 2026 The lofsim Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <cmath>
#include <complex>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>

namespace lofsim {

using Complex = std::complex<double>;

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
   public:
    using std::runtime_error::runtime_error;
};

enum class Pol : unsigned char { H = 0, V = 1 };

inline const char *pol_name(Pol p) { return p == Pol::H ? "H" : "V"; }

using Matrix4c = Eigen::Matrix<Complex, 4, 4>;
using Vector4c = Eigen::Matrix<Complex, 4, 1>;

/// Two-qubit polarization state of a photon pair.
///
/// Basis order is (HH, HV, VH, VV); the first letter belongs to the first kept
/// spatial mode. Index of a basis ket is 2 * pol_first + pol_second.
class PolarizationDensityMatrix {
   public:
    PolarizationDensityMatrix() : rho_(Matrix4c::Zero()) { rho_(0, 0) = 1.0; }
    explicit PolarizationDensityMatrix(const Matrix4c &rho) : rho_(rho) {}

    static PolarizationDensityMatrix from_pure(const Vector4c &psi) {
        Vector4c n = psi / psi.norm();
        return PolarizationDensityMatrix(n * n.adjoint());
    }

    static constexpr int index(Pol first, Pol second) {
        return 2 * static_cast<int>(first) + static_cast<int>(second);
    }

    const Matrix4c &matrix() const { return rho_; }
    Complex operator()(int row, int col) const { return rho_(row, col); }

    double hermiticity_deviation() const { return (rho_ - rho_.adjoint()).cwiseAbs().maxCoeff(); }
    double trace_deviation() const { return std::abs(rho_.trace() - Complex(1.0)); }

    double min_eigenvalue() const {
        Matrix4c h = 0.5 * (rho_ + rho_.adjoint());
        Eigen::SelfAdjointEigenSolver<Matrix4c> es(h, Eigen::EigenvaluesOnly);
        return es.eigenvalues().minCoeff();
    }

    bool is_valid(double herm_tol = 1e-12, double trace_tol = 1e-12, double psd_tol = 1e-10) const {
        return hermiticity_deviation() < herm_tol && trace_deviation() < trace_tol &&
               min_eigenvalue() >= -psd_tol;
    }

   private:
    Matrix4c rho_;
};

/// The four Bell states as kets in (HH, HV, VH, VV) order.
enum class BellState { PhiPlus, PhiMinus, PsiPlus, PsiMinus };

inline Vector4c bell_vector(BellState b) {
    const double s = 1.0 / std::sqrt(2.0);
    Vector4c v = Vector4c::Zero();
    switch (b) {
        case BellState::PhiPlus: v << s, 0, 0, s; break;
        case BellState::PhiMinus: v << s, 0, 0, -s; break;
        case BellState::PsiPlus: v << 0, s, s, 0; break;
        case BellState::PsiMinus: v << 0, s, -s, 0; break;
    }
    return v;
}

inline const char *bell_name(BellState b) {
    switch (b) {
        case BellState::PhiPlus: return "phi+";
        case BellState::PhiMinus: return "phi-";
        case BellState::PsiPlus: return "psi+";
        case BellState::PsiMinus: return "psi-";
    }
    return "?";
}

inline BellState parse_bell(const std::string &name) {
    if (name == "phi+") return BellState::PhiPlus;
    if (name == "phi-") return BellState::PhiMinus;
    if (name == "psi+") return BellState::PsiPlus;
    if (name == "psi-") return BellState::PsiMinus;
    throw Error("unknown Bell state '" + name + "'");
}

}  // namespace lofsim
