#pragma once

namespace cartan {

/// Numerical policy shared by every module. The geometric identities being
/// checked are exact; these values decide when a computed residual counts as
/// zero. All of them can be overridden from a JSON tolerance file.
struct Tolerances {
  double h_fd = 1e-5;         // central-difference step for metric derivatives
  double eps_pd = 1e-10;      // smallest admissible metric eigenvalue
  double eps_frame = 1e-12;   // smallest admissible |det| of a frame
  double tol_speed = 1e-6;    // geodesic speed / transported norm drift
  double tol_curv = 1e-4;     // curvature residuals
  double tol_orth = 1e-6;     // orthogonality of holonomy linear parts
  double tol_identity = 1e-8; // an element counts as (I, 0)
  double tol_fp = 1e-4;       // fixed-point residual, relative to translation scale
  double eps_ridge = 1e-12;   // ridge added to the fixed-point normal equations
  double tol_split = 1e-6;    // invariance / orthogonality of split subspaces
  double eig_merge_gap = 1e-8;
  double tol_rank = 1e-4;     // relative singular-value threshold for translation rank
  double eps_v = 1e-6;        // V(x) != 0 hypothesis of the cone criterion
  double tol_cone = 1e-4;     // cone certificate residuals
  double rk4_step = 1e-3;     // loop-parameter step of the transport integrator
};

}  // namespace cartan
