#include "curvesurf/reorg.hpp"

#include <Eigen/Sparse>
#include <Eigen/SparseCholesky>

#include <algorithm>
#include <cassert>
#include <map>
#include <numeric>
#include <set>

namespace curvesurf {

void validate(const ReorgParams& p) {
  if (p.tau_length <= 0 || p.smooth_lambda <= 0 || p.kappa_break <= 0 || p.tau_dist <= 0 ||
      p.tau_cocirc <= 0 || p.overlap_eps <= 0 || p.resample_step <= 0)
    throw ValidationError("reorg parameters must be positive");
  if (p.rounds < 1 || p.rounds > 8) throw ValidationError("reorg rounds must be in [1, 8]");
}

CurveDrawing prune_short(const CurveDrawing& drawing, double tau_length) {
  CurveDrawing out;
  for (const auto& f : drawing.fragments)
    if (arclength(f) >= tau_length) out.fragments.push_back(f);
  out.rebuild_nodes();
  return out;
}

CurveFragment smooth_fragment(const CurveFragment& fragment, double lambda) {
  const int n = static_cast<int>(fragment.points.size());
  if (n < 4) return fragment;

  using Sparse = Eigen::SparseMatrix<double>;
  std::vector<Eigen::Triplet<double>> trips;

  // Second-difference rows of D, then the normal-equation system
  // (I + lambda D^T D) q = p, with open endpoints eliminated as knowns.
  Eigen::MatrixXd rhs;
  Sparse system;

  if (fragment.closed) {
    system.resize(n, n);
    rhs.resize(n, 3);
    std::vector<Eigen::Triplet<double>> drows;
    for (int i = 0; i < n; ++i) {
      drows.emplace_back(i, (i + n - 1) % n, 1.0);
      drows.emplace_back(i, i, -2.0);
      drows.emplace_back(i, (i + 1) % n, 1.0);
    }
    Sparse d(n, n);
    d.setFromTriplets(drows.begin(), drows.end());
    Sparse identity(n, n);
    identity.setIdentity();
    system = identity + lambda * (Sparse(d.transpose()) * d);
    for (int i = 0; i < n; ++i) rhs.row(i) = fragment.points[i].transpose();
  } else {
    const int m = n - 2;  // free interior points
    Sparse d(n - 2, n);
    std::vector<Eigen::Triplet<double>> drows;
    for (int i = 0; i < n - 2; ++i) {
      drows.emplace_back(i, i, 1.0);
      drows.emplace_back(i, i + 1, -2.0);
      drows.emplace_back(i, i + 2, 1.0);
    }
    d.setFromTriplets(drows.begin(), drows.end());
    Sparse full = Sparse(d.transpose()) * d;  // n x n

    system.resize(m, m);
    rhs.resize(m, 3);
    std::vector<Eigen::Triplet<double>> strips;
    for (int i = 0; i < m; ++i) {
      strips.emplace_back(i, i, 1.0);  // fidelity
      rhs.row(i) = fragment.points[i + 1].transpose();
    }
    for (int col = 0; col < full.outerSize(); ++col) {
      for (Sparse::InnerIterator it(full, col); it; ++it) {
        int r = static_cast<int>(it.row()), c = col;
        if (r >= 1 && r <= n - 2 && c >= 1 && c <= n - 2) {
          strips.emplace_back(r - 1, c - 1, lambda * it.value());
        } else if (r >= 1 && r <= n - 2) {
          // Known endpoint column moves to the right-hand side.
          rhs.row(r - 1) -= lambda * it.value() * fragment.points[c].transpose();
        }
      }
    }
    system.setFromTriplets(strips.begin(), strips.end());
  }

  Eigen::SimplicialLDLT<Sparse> solver(system);
  assert(solver.info() == Eigen::Success);
  Eigen::MatrixXd solution = solver.solve(rhs);

  CurveFragment out = fragment;
  if (fragment.closed) {
    for (int i = 0; i < n; ++i) out.points[i] = solution.row(i).transpose();
  } else {
    for (int i = 1; i < n - 1; ++i) out.points[i] = solution.row(i - 1).transpose();
  }
  return out;
}

std::vector<double> discrete_curvature(const CurveFragment& fragment) {
  const auto& p = fragment.points;
  const int n = static_cast<int>(p.size());
  if (n < 3 && !fragment.closed) throw ValidationError("discrete_curvature needs >= 3 points");

  auto kappa_at = [&](int prev, int i, int next) {
    Vec3 a = p[i] - p[prev];
    Vec3 b = p[next] - p[i];
    double la = a.norm(), lb = b.norm();
    double theta = angle_between(a, b);
    double ell = 0.5 * (la + lb);
    return 2.0 * std::sin(0.5 * theta) / ell;
  };

  std::vector<double> kappa;
  if (fragment.closed) {
    kappa.resize(n);
    for (int i = 0; i < n; ++i) kappa[i] = kappa_at((i + n - 1) % n, i, (i + 1) % n);
  } else {
    kappa.resize(n - 2);
    for (int i = 1; i < n - 1; ++i) kappa[i - 1] = kappa_at(i - 1, i, i + 1);
  }
  return kappa;
}

std::vector<CurveFragment> break_at_corners(const CurveFragment& fragment, double kappa_break) {
  const int n = static_cast<int>(fragment.points.size());
  if ((!fragment.closed && n < 4) || (fragment.closed && n < 4)) return {fragment};

  std::vector<double> kappa = discrete_curvature(fragment);
  std::vector<int> cuts;  // sample indices to split at

  if (fragment.closed) {
    for (int i = 0; i < n; ++i) {
      double prev = kappa[(i + n - 1) % n], next = kappa[(i + 1) % n];
      if (kappa[i] >= kappa_break && kappa[i] > prev && kappa[i] >= next) cuts.push_back(i);
    }
  } else {
    // kappa[j] belongs to sample j+1. Samples adjacent to an endpoint never
    // split, which keeps the operation idempotent.
    for (int j = 1; j + 1 < static_cast<int>(kappa.size()); ++j) {
      if (kappa[j] >= kappa_break && kappa[j] > kappa[j - 1] && kappa[j] >= kappa[j + 1])
        cuts.push_back(j + 1);
    }
  }
  if (cuts.empty()) return {fragment};

  std::vector<CurveFragment> out;
  auto emit = [&](std::vector<Vec3> pts) {
    if (pts.size() < 2) return;
    CurveFragment child;
    child.id = fragment.id;  // caller reassigns unique ids
    child.closed = false;
    child.points = std::move(pts);
    out.push_back(std::move(child));
  };

  if (fragment.closed) {
    // Walk cyclically from cut to cut.
    for (size_t c = 0; c < cuts.size(); ++c) {
      int from = cuts[c];
      int to = cuts[(c + 1) % cuts.size()];
      std::vector<Vec3> pts;
      int i = from;
      pts.push_back(fragment.points[i]);
      while (i != to) {
        i = (i + 1) % n;
        pts.push_back(fragment.points[i]);
      }
      if (cuts.size() == 1) pts.push_back(fragment.points[from]);  // full loop, opened
      emit(std::move(pts));
    }
  } else {
    int start = 0;
    for (int cut : cuts) {
      emit({fragment.points.begin() + start, fragment.points.begin() + cut + 1});
      start = cut;
    }
    emit({fragment.points.begin() + start, fragment.points.end()});
  }
  return out;
}

double cocircularity(const Vec3& p1, const Vec3& t1, const Vec3& p2, const Vec3& t2) {
  Vec3 chord = p2 - p1;
  double gap = chord.norm();
  if (gap < kMinPointSeparation) throw ValidationError("cocircularity: coincident points");
  Vec3 u = chord / gap;

  double alpha = angle_between(t1, u);
  double beta = angle_between(t2, u);

  // Oriented plane normals: equal for a C-shaped (common circle) pair,
  // opposite for an S-shaped one.
  Vec3 n1 = u.cross(t1);
  Vec3 n2 = t2.cross(u);
  double torsion = 0.0;
  if (n1.norm() > 1e-12 && n2.norm() > 1e-12) torsion = angle_between(n1, n2);

  return std::abs(alpha - beta) + torsion;
}

namespace {

struct EndpointRef {
  int fragment_index;  // index into drawing.fragments
  bool at_end;
};

Vec3 endpoint_position(const CurveFragment& f, bool at_end) {
  return at_end ? f.points.back() : f.points.front();
}

// Travel direction continuing through a junction/gap at this endpoint.
// Ends emit their outgoing tangent; starts emit the direction into the curve
// reversed, so that a straight-through continuation gives equal vectors.
Vec3 continuation_tangent(const CurveFragment& f, bool at_end) {
  return endpoint_tangent(f, at_end);
}

std::vector<Vec3> reversed(const std::vector<Vec3>& pts) {
  return {pts.rbegin(), pts.rend()};
}

}  // namespace

CurveDrawing bridge_gaps(const CurveDrawing& drawing, double tau_dist, double tau_cocirc) {
  const auto& frags = drawing.fragments;
  std::vector<EndpointRef> eps;
  for (int i = 0; i < static_cast<int>(frags.size()); ++i) {
    if (frags[i].closed) continue;
    eps.push_back({i, false});
    eps.push_back({i, true});
  }

  struct Candidate {
    double cc;
    int a, b;  // indices into eps
  };
  std::vector<Candidate> candidates;
  for (size_t a = 0; a < eps.size(); ++a) {
    for (size_t b = a + 1; b < eps.size(); ++b) {
      if (eps[a].fragment_index == eps[b].fragment_index) continue;
      const auto& fa = frags[eps[a].fragment_index];
      const auto& fb = frags[eps[b].fragment_index];
      Vec3 pa = endpoint_position(fa, eps[a].at_end);
      Vec3 pb = endpoint_position(fb, eps[b].at_end);
      double d = (pa - pb).norm();
      if (d >= tau_dist || d <= kNodeMergeTol) continue;
      // T1 continues out of a; T2 must continue out of the gap into b,
      // which is the reverse of b's outward tangent.
      Vec3 ta = continuation_tangent(fa, eps[a].at_end);
      Vec3 tb = -continuation_tangent(fb, eps[b].at_end);
      double cc = cocircularity(pa, ta, pb, tb);
      if (cc < tau_cocirc) candidates.push_back({cc, static_cast<int>(a), static_cast<int>(b)});
    }
  }
  std::sort(candidates.begin(), candidates.end(), [&](const Candidate& x, const Candidate& y) {
    if (x.cc != y.cc) return x.cc < y.cc;
    // Stable tie-break on fragment ids.
    auto key = [&](const Candidate& c) {
      return std::tuple(frags[eps[c.a].fragment_index].id, eps[c.a].at_end,
                        frags[eps[c.b].fragment_index].id, eps[c.b].at_end);
    };
    return key(x) < key(y);
  });

  // Greedy selection, each endpoint consumed once; chains tracked through a
  // union-find so a loop-closing bridge is skipped.
  std::vector<uint8_t> consumed(eps.size(), 0);
  std::vector<int> chain(frags.size());
  std::iota(chain.begin(), chain.end(), 0);
  std::function<int(int)> root = [&](int x) {
    while (chain[x] != x) x = chain[x] = chain[chain[x]];
    return x;
  };
  struct Bridge {
    int a, b;
  };
  std::vector<Bridge> picked;
  for (const auto& c : candidates) {
    if (consumed[c.a] || consumed[c.b]) continue;
    int ra = root(eps[c.a].fragment_index);
    int rb = root(eps[c.b].fragment_index);
    if (ra == rb) continue;
    chain[ra] = rb;
    consumed[c.a] = consumed[c.b] = 1;
    picked.push_back({c.a, c.b});
  }
  if (picked.empty()) return drawing;

  // Assemble merged polylines chain by chain.
  struct Piece {
    std::vector<Vec3> pts;
    int id;
    bool alive = true;
  };
  std::vector<Piece> pieces;
  pieces.reserve(frags.size());
  for (const auto& f : frags) pieces.push_back({f.points, f.id, true});

  // Endpoint handle -> (piece index, at_end) updated as pieces merge.
  std::vector<std::pair<int, bool>> handle(eps.size());
  for (size_t i = 0; i < eps.size(); ++i) handle[i] = {eps[i].fragment_index, eps[i].at_end};

  for (const auto& br : picked) {
    auto [pa, a_end] = handle[br.a];
    auto [pb, b_end] = handle[br.b];
    Piece& A = pieces[pa];
    Piece& B = pieces[pb];

    std::vector<Vec3> merged;
    std::vector<Vec3> first = a_end ? A.pts : reversed(A.pts);
    std::vector<Vec3> second = b_end ? reversed(B.pts) : B.pts;
    merged = std::move(first);
    merged.insert(merged.end(), second.begin(), second.end());

    int keep_id = std::min(A.id, B.id);
    A.pts = std::move(merged);
    A.id = keep_id;
    B.alive = false;

    // The surviving piece's free ends: old A-other-end at the front (it was
    // reversed when a_end==false), old B-other-end at the back.
    for (size_t h = 0; h < handle.size(); ++h) {
      if (consumed[h]) continue;
      if (handle[h].first == pa) handle[h] = {pa, a_end ? handle[h].second : !handle[h].second};
      if (handle[h].first == pb) handle[h] = {pa, true};
    }
  }

  CurveDrawing out;
  for (const auto& f : frags)
    if (f.closed) out.fragments.push_back(f);
  for (auto& piece : pieces) {
    if (!piece.alive || frags[&piece - pieces.data()].closed) continue;
    CurveFragment f;
    f.id = piece.id;
    f.points = std::move(piece.pts);
    f.closed = false;
    // Bridged geometry may duplicate the junction sample.
    auto last = std::unique(f.points.begin(), f.points.end(), [](const Vec3& x, const Vec3& y) {
      return (x - y).norm() <= kMinPointSeparation;
    });
    f.points.erase(last, f.points.end());
    if (f.points.size() >= 2) out.fragments.push_back(std::move(f));
  }
  std::sort(out.fragments.begin(), out.fragments.end(),
            [](const CurveFragment& a, const CurveFragment& b) { return a.id < b.id; });
  out.rebuild_nodes();
  return out;
}

CurveDrawing merge_at_junctions(const CurveDrawing& drawing, double tau_cocirc) {
  CurveDrawing cur = drawing;
  cur.rebuild_nodes();
  bool changed = true;
  while (changed) {
    changed = false;
    for (const auto& node : cur.nodes) {
      if (node.incident.size() != 2) continue;
      const NodeIncidence& ia = node.incident[0];
      const NodeIncidence& ib = node.incident[1];

      auto frag_index = [&](int id) {
        for (size_t i = 0; i < cur.fragments.size(); ++i)
          if (cur.fragments[i].id == id) return static_cast<int>(i);
        return -1;
      };

      if (ia.fragment_id == ib.fragment_id) {
        // Both ends of one open fragment meet here: close it if smooth.
        int fi = frag_index(ia.fragment_id);
        CurveFragment& f = cur.fragments[fi];
        Vec3 t_in = continuation_tangent(f, true);
        Vec3 t_out = -continuation_tangent(f, false);
        if (angle_between(t_in, t_out) < tau_cocirc) {
          if ((f.points.front() - f.points.back()).norm() <= kNodeMergeTol)
            f.points.pop_back();  // implicit closure
          if (f.points.size() >= 3) {
            f.closed = true;
            changed = true;
          }
        }
      } else {
        int fa = frag_index(ia.fragment_id);
        int fb = frag_index(ib.fragment_id);
        const CurveFragment& A = cur.fragments[fa];
        const CurveFragment& B = cur.fragments[fb];
        Vec3 t_in = continuation_tangent(A, ia.at_end);
        Vec3 t_out = -continuation_tangent(B, ib.at_end);
        if (angle_between(t_in, t_out) >= tau_cocirc) continue;

        std::vector<Vec3> first = ia.at_end ? A.points : reversed(A.points);
        std::vector<Vec3> second = ib.at_end ? reversed(B.points) : B.points;
        if ((first.back() - second.front()).norm() <= kNodeMergeTol)
          second.erase(second.begin());
        first.insert(first.end(), second.begin(), second.end());

        CurveFragment merged;
        merged.id = std::min(A.id, B.id);
        merged.points = std::move(first);
        merged.closed = false;

        cur.fragments.erase(cur.fragments.begin() + std::max(fa, fb));
        cur.fragments.erase(cur.fragments.begin() + std::min(fa, fb));
        cur.fragments.push_back(std::move(merged));
        std::sort(cur.fragments.begin(), cur.fragments.end(),
                  [](const CurveFragment& x, const CurveFragment& y) { return x.id < y.id; });
        changed = true;
      }
      if (changed) break;  // node list is stale
    }
    if (changed) cur.rebuild_nodes();
  }
  return cur;
}

CurveDrawing dedup_overlaps(const CurveDrawing& drawing, double overlap_eps) {
  CurveDrawing cur = drawing;
  for (int pass = 0; pass < 4; ++pass) {
    // Rank: descending length, ties by ascending id.
    std::vector<int> order(cur.fragments.size());
    std::iota(order.begin(), order.end(), 0);
    std::vector<double> lengths(cur.fragments.size());
    for (size_t i = 0; i < cur.fragments.size(); ++i) lengths[i] = arclength(cur.fragments[i]);
    std::sort(order.begin(), order.end(), [&](int a, int b) {
      if (lengths[a] != lengths[b]) return lengths[a] > lengths[b];
      return cur.fragments[a].id < cur.fragments[b].id;
    });

    bool changed = false;
    std::vector<CurveFragment> result;
    std::vector<const CurveFragment*> kept;  // already-processed, higher rank
    int next_id = cur.max_fragment_id() + 1;

    for (int oi : order) {
      const CurveFragment& f = cur.fragments[oi];
      std::vector<uint8_t> masked(f.points.size(), 0);
      for (size_t s = 0; s < f.points.size(); ++s) {
        for (const CurveFragment* g : kept) {
          if (point_polyline_distance(f.points[s], g->points, g->closed) <= overlap_eps) {
            masked[s] = 1;
            break;
          }
        }
      }
      bool any = std::any_of(masked.begin(), masked.end(), [](uint8_t m) { return m != 0; });
      if (!any) {
        result.push_back(f);
        kept.push_back(&result.back());
        continue;
      }
      changed = true;
      // Split the survivor runs. A masked closed fragment opens up.
      std::vector<std::vector<Vec3>> runs;
      std::vector<Vec3> run;
      int n = static_cast<int>(f.points.size());
      int start = 0;
      if (f.closed) {
        // Rotate so index 0 is masked, making runs contiguous.
        int first_masked = 0;
        while (first_masked < n && !masked[first_masked]) ++first_masked;
        for (int k = 0; k < n; ++k) {
          int i = (first_masked + k) % n;
          if (masked[i]) {
            if (!run.empty()) runs.push_back(std::move(run));
            run.clear();
          } else {
            run.push_back(f.points[i]);
          }
        }
        if (!run.empty()) runs.push_back(std::move(run));
      } else {
        (void)start;
        for (int i = 0; i < n; ++i) {
          if (masked[i]) {
            if (!run.empty()) runs.push_back(std::move(run));
            run.clear();
          } else {
            run.push_back(f.points[i]);
          }
        }
        if (!run.empty()) runs.push_back(std::move(run));
      }
      bool first_piece = true;
      for (auto& piece : runs) {
        if (piece.size() < 2) continue;
        CurveFragment child;
        child.id = first_piece ? f.id : next_id++;
        first_piece = false;
        child.points = std::move(piece);
        child.closed = false;
        result.push_back(std::move(child));
        kept.push_back(&result.back());
      }
    }

    std::sort(result.begin(), result.end(),
              [](const CurveFragment& a, const CurveFragment& b) { return a.id < b.id; });
    cur.fragments = std::move(result);
    if (!changed) break;
  }
  cur.rebuild_nodes();
  return cur;
}

CurveFragment resample(const CurveFragment& fragment, double step) {
  double total = arclength(fragment);
  CurveFragment out;
  out.id = fragment.id;
  out.closed = fragment.closed;
  const auto& p = fragment.points;
  int n = static_cast<int>(p.size());

  auto point_at = [&](double s) {
    double acc = 0.0;
    int segs = fragment.closed ? n : n - 1;
    for (int i = 0; i < segs; ++i) {
      const Vec3& a = p[i];
      const Vec3& b = p[(i + 1) % n];
      double len = (b - a).norm();
      if (acc + len >= s || i == segs - 1) {
        double t = len > 0 ? std::clamp((s - acc) / len, 0.0, 1.0) : 0.0;
        return Vec3(a + t * (b - a));
      }
      acc += len;
    }
    return p.back();
  };

  if (fragment.closed) {
    int count = std::max(4, static_cast<int>(std::lround(total / step)));
    double spacing = total / count;
    for (int i = 0; i < count; ++i) out.points.push_back(point_at(i * spacing));
    out.points[0] = p[0];
  } else {
    int count = std::max(2, static_cast<int>(std::lround(total / step)) + 1);
    double spacing = total / (count - 1);
    out.points.push_back(p.front());
    for (int i = 1; i < count - 1; ++i) out.points.push_back(point_at(i * spacing));
    out.points.push_back(p.back());
  }
  // Guard against collapse from numerically coincident neighbors.
  auto last = std::unique(out.points.begin(), out.points.end(), [](const Vec3& x, const Vec3& y) {
    return (x - y).norm() <= kMinPointSeparation;
  });
  out.points.erase(last, out.points.end());
  if (out.points.size() < 2) return fragment;
  return out;
}

CurveDrawing reorganize(const CurveDrawing& drawing, const ReorgParams& params) {
  validate(params);
  CurveDrawing cur = drawing;
  for (int round = 1; round <= params.rounds; ++round) {
    double scale = static_cast<double>(round) / params.rounds;
    bool last = round == params.rounds;

    // Per-fragment smoothing.
    #pragma omp parallel for schedule(dynamic)
    for (int i = 0; i < static_cast<int>(cur.fragments.size()); ++i)
      cur.fragments[i] = smooth_fragment(cur.fragments[i], params.smooth_lambda * scale);

    cur.rebuild_nodes();
    cur = merge_at_junctions(cur, params.tau_cocirc * scale);
    cur = bridge_gaps(cur, params.tau_dist * scale, params.tau_cocirc * scale);
    cur = dedup_overlaps(cur, params.overlap_eps * scale);

    #pragma omp parallel for schedule(dynamic)
    for (int i = 0; i < static_cast<int>(cur.fragments.size()); ++i)
      cur.fragments[i] = resample(cur.fragments[i], params.resample_step * scale);

    if (last) {
      std::vector<CurveFragment> broken;
      int next_id = cur.max_fragment_id() + 1;
      for (const auto& f : cur.fragments) {
        auto children = break_at_corners(f, params.kappa_break);
        for (size_t c = 0; c < children.size(); ++c) {
          children[c].id = c == 0 ? f.id : next_id++;
          broken.push_back(std::move(children[c]));
        }
      }
      cur.fragments = std::move(broken);
      cur.rebuild_nodes();
    }

    cur = prune_short(cur, params.tau_length * scale);
  }
  return cur;
}

}  // namespace curvesurf
