#pragma once

#include <complex>

#include <Eigen/Core>

namespace polalign {

// Jones/Stokes calculus on Eigen dense types.
//
// Conventions, fixed once for the whole library:
//  * x-polarization (Jones (1,0)) maps to Stokes +S1.
//  * right-circular (1, i)/sqrt(2) maps to +S3.
//  * a linear retarder with fast axis at physical angle theta and retardance
//    delta acts on the Poincare sphere as a right-handed rotation by delta
//    about the equatorial axis (cos 2*theta, sin 2*theta, 0).
// All observables depend only on relative angles, so any consistent frame
// works; tests pin this one.

/// Complex amplitude pair (a_x, a_y); unit norm for a measurement basis.
using JonesVector = Eigen::Vector2cd;

/// Real unit 3-vector on the Poincare sphere.
using StokesVector = Eigen::Vector3d;

/// 2x2 complex unitary (Jones matrix) for channels, retarders, actuators.
using PolarizationTransform = Eigen::Matrix2cd;

using Complex = std::complex<double>;

/// Returns j scaled to unit norm. Throws std::invalid_argument on (near) zero
/// input; inputs within 1e-6 of unit norm are renormalized silently.
JonesVector normalized_jones(const JonesVector& j);

/// Stokes image of a normalized Jones vector:
/// (|ax|^2 - |ay|^2, 2 Re(ax* ay), 2 Im(ax* ay)).
StokesVector jones_to_stokes(const JonesVector& j);

/// Inverse of jones_to_stokes up to global phase. Phase convention: a_x real
/// and >= 0; the degenerate pole s = (-1, 0, 0) maps to (0, 1) exactly.
JonesVector stokes_to_jones(const StokesVector& s);

/// Unitary whose first column is j: [[ax, -ay*], [ay, ax*]].
PolarizationTransform transform_from_basis(const JonesVector& j);

/// Applies u to j and renormalizes (guards fp drift in long compositions).
JonesVector apply_transform(const PolarizationTransform& u, const JonesVector& j);

/// Interior angle between two unit Stokes vectors, in [0, pi].
/// The dot product is clamped to [-1, 1] before acos.
double angle_between(const StokesVector& a, const StokesVector& b);

/// Jones matrix of the rotation by `angle` (right-handed) about the unit
/// Stokes axis `axis`: cos(angle/2) I - i sin(angle/2) (m1 sz + m2 sx + m3 sy).
PolarizationTransform rotation_about(const StokesVector& axis, double angle);

/// max |U^dagger U - I| entrywise; zero for an exact unitary.
double unitarity_defect(const PolarizationTransform& u);

}  // namespace polalign
