#pragma once

#include "curvesurf/curve_graph.hpp"

namespace curvesurf {

struct ReorgParams {
  double tau_length = 0.03;     // m, prune threshold
  double smooth_lambda = 5.0;   // fidelity/smoothness ratio
  double kappa_break = 100.0;   // 1/m, corner curvature threshold
  double tau_dist = 0.02;       // m, gap bridging threshold
  double tau_cocirc = 0.35;     // rad, good-continuation threshold
  double overlap_eps = 0.005;   // m, dedup proximity
  double resample_step = 0.01;  // m
  int rounds = 3;
};

void validate(const ReorgParams& params);

/// Drops fragments with arclength < tau_length.
CurveDrawing prune_short(const CurveDrawing& drawing, double tau_length);

/// Penalized least squares with a second-difference penalty; point count is
/// preserved, endpoints stay fixed for open fragments (cyclic for closed).
CurveFragment smooth_fragment(const CurveFragment& fragment, double lambda);

/// Circumscribed-circle discrete curvature at each interior sample
/// (all samples, cyclically, for closed fragments).
std::vector<double> discrete_curvature(const CurveFragment& fragment);

/// Splits at local curvature maxima exceeding kappa_break. Split samples are
/// duplicated into both children; closed fragments open up at their corners.
/// Expects an already-smoothed fragment.
std::vector<CurveFragment> break_at_corners(const CurveFragment& fragment, double kappa_break);

/// Good-continuation measure between two point-tangent pairs: the difference
/// of chord angles plus an oriented plane-torsion penalty. Zero exactly for a
/// consistently oriented common circle or line.
double cocircularity(const Vec3& p1, const Vec3& t1, const Vec3& p2, const Vec3& t2);

/// Connects endpoint pairs across distinct fragments that are closer than
/// tau_dist and continue well; greedy best-first by ascending cocircularity,
/// each endpoint consumed at most once.
CurveDrawing bridge_gaps(const CurveDrawing& drawing, double tau_dist, double tau_cocirc);

/// Merges fragment pairs meeting at degree-2 nodes with good tangent
/// continuity; a fragment whose own ends meet smoothly becomes closed.
/// Iterates to a fixpoint.
CurveDrawing merge_at_junctions(const CurveDrawing& drawing, double tau_cocirc);

/// Removes from each fragment the samples lying within overlap_eps of a
/// strictly longer fragment (ties broken by ascending id); fragments split at
/// removal runs, sub-2-point pieces dropped.
CurveDrawing dedup_overlaps(const CurveDrawing& drawing, double overlap_eps);

/// Uniform arclength resampling at the given spacing; endpoints preserved.
CurveFragment resample(const CurveFragment& fragment, double step);

/// Full reorganization schedule: `rounds` sweeps with linearly ramped
/// thresholds; corners are broken only in the last round, pruning runs last
/// within each round.
CurveDrawing reorganize(const CurveDrawing& drawing, const ReorgParams& params);

}  // namespace curvesurf
