#include "aiq/reconstruction.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <sstream>

namespace aiq {

int BlockSpec::dim() const {
  int n = 0;
  for (int d : block_dims) n += d * d;
  return n;
}

int BlockSpec::concrete_dim() const { return std::accumulate(block_dims.begin(), block_dims.end(), 0); }

std::vector<int> BlockSpec::offsets() const {
  std::vector<int> off;
  int o = 0;
  for (int d : block_dims) {
    off.push_back(o);
    o += d * d;
  }
  return off;
}

std::string BlockSpec::to_string() const {
  std::ostringstream os;
  os << "(";
  for (size_t i = 0; i < block_dims.size(); ++i) os << (i ? "," : "") << block_dims[i];
  os << ")";
  return os.str();
}

std::vector<Mat> b_blocks(const BlockSpec& s, const Vec& x) {
  std::vector<Mat> out;
  auto off = s.offsets();
  for (size_t l = 0; l < s.block_dims.size(); ++l) {
    const int d = s.block_dims[l];
    out.push_back(unvec(x.segment(off[l], d * d), d, d));
  }
  return out;
}

Vec b_from_blocks(const BlockSpec& s, const std::vector<Mat>& blocks) {
  Vec x(s.dim());
  auto off = s.offsets();
  for (size_t l = 0; l < blocks.size(); ++l) x.segment(off[l], blocks[l].size()) = vec(blocks[l]);
  return x;
}

Vec b_multiply(const BlockSpec& s, const Vec& x, const Vec& y) {
  auto bx = b_blocks(s, x), by = b_blocks(s, y);
  for (size_t l = 0; l < bx.size(); ++l) bx[l] = bx[l] * by[l];
  return b_from_blocks(s, bx);
}

Mat b_left(const BlockSpec& s, const Vec& x) {
  Mat out = Mat::Zero(s.dim(), s.dim());
  auto bx = b_blocks(s, x);
  auto off = s.offsets();
  for (size_t l = 0; l < bx.size(); ++l) {
    const int d = s.block_dims[l];
    out.block(off[l], off[l], d * d, d * d) = kron(identity(d), bx[l]);
  }
  return out;
}

Vec b_adjoint(const BlockSpec& s, const Vec& x) {
  auto bx = b_blocks(s, x);
  for (auto& m : bx) m = m.adjoint().eval();
  return b_from_blocks(s, bx);
}

Vec b_unit(const BlockSpec& s) {
  std::vector<Mat> bs;
  for (int d : s.block_dims) bs.push_back(identity(d));
  return b_from_blocks(s, bs);
}

double b_norm(const BlockSpec& s, const Vec& x) {
  double n = 0.0;
  for (const auto& m : b_blocks(s, x)) n = std::max(n, operator_norm(m));
  return n;
}

Mat b_concrete(const BlockSpec& s, const Vec& x) {
  const int n = s.concrete_dim();
  Mat out = Mat::Zero(n, n);
  int r = 0;
  for (const auto& m : b_blocks(s, x)) {
    out.block(r, r, m.rows(), m.cols()) = m;
    r += static_cast<int>(m.rows());
  }
  return out;
}

Vec b_from_concrete(const BlockSpec& s, const Mat& m) {
  std::vector<Mat> bs;
  int r = 0;
  for (int d : s.block_dims) {
    bs.push_back(m.block(r, r, d, d));
    r += d;
  }
  return b_from_blocks(s, bs);
}

std::vector<int> b_transpose_index(const BlockSpec& s) {
  std::vector<int> t(s.dim());
  auto off = s.offsets();
  for (size_t l = 0; l < s.block_dims.size(); ++l) {
    const int d = s.block_dims[l];
    for (int j = 0; j < d; ++j)
      for (int k = 0; k < d; ++k) t[off[l] + j + k * d] = off[l] + k + j * d;
  }
  return t;
}

namespace {

// X^j Z^k with X the cyclic shift and Z the clock
Mat pauli(int d, int j, int k) {
  Mat out = Mat::Zero(d, d);
  for (int c = 0; c < d; ++c) out((c + j) % d, c) = std::polar(1.0, 2 * std::numbers::pi * k * c / d);
  return out;
}

}  // namespace

Diagonal pauli_diagonal(const BlockSpec& spec, std::size_t cap) {
  if (spec.block_dims.empty()) throw Error(ErrorKind::BadSpec, "empty block spec");
  const int m = static_cast<int>(spec.block_dims.size());
  double count = m;
  for (int d : spec.block_dims) {
    if (d <= 0) throw Error(ErrorKind::BadSpec, "block dimension must be positive");
    count *= double(d) * d;
  }
  if (count > double(cap)) throw Error(ErrorKind::TermExplosion, "diagonal would have " + std::to_string(count) + " terms");
  Diagonal diag;
  diag.spec = spec;
  const double p = 1.0 / count;
  std::vector<int> idx(m, 0);  // mixed-radix counter over (j_l, k_l) pairs
  for (int a = 0; a < m; ++a) {
    std::fill(idx.begin(), idx.end(), 0);
    while (true) {
      std::vector<Mat> bs;
      for (int l = 0; l < m; ++l) {
        const int d = spec.block_dims[l];
        bs.push_back(std::polar(1.0, 2 * std::numbers::pi * a * l / m) * pauli(d, idx[l] % d, idx[l] / d));
      }
      diag.weights.push_back(p);
      diag.unitaries.push_back(b_from_blocks(spec, bs));
      int l = 0;
      while (l < m && ++idx[l] == spec.block_dims[l] * spec.block_dims[l]) idx[l++] = 0;
      if (l == m) break;
    }
  }
  return diag;
}

namespace {

Vec random_b(const BlockSpec& s, Rng& rng) { return random_gaussian(s.dim(), 1, rng).col(0); }

double basis_pair_defect(const AlmostHom& v, const EpsilonAlgebra& a) {
  const BlockSpec& s = v.spec;
  const int m = s.dim();
  auto off = s.offsets();
  std::vector<int> block(m), row(m), col(m);
  for (size_t l = 0; l < s.block_dims.size(); ++l) {
    const int d = s.block_dims[l];
    for (int j = 0; j < d; ++j)
      for (int k = 0; k < d; ++k) {
        int u = off[l] + j + k * d;
        block[u] = static_cast<int>(l), row[u] = j, col[u] = k;
      }
  }
  double worst = 0.0;
  for (int u = 0; u < m; ++u) {
    Mat prods = a.left(v.coeffs.col(u)) * v.coeffs;
    for (int w = 0; w < m; ++w) {
      Vec diff = -prods.col(w);
      if (block[u] == block[w] && col[u] == row[w]) {
        const int d = s.block_dims[block[u]];
        diff += v.coeffs.col(off[block[u]] + row[u] + col[w] * d);
      }
      worst = std::max(worst, a.norm(diff));
    }
  }
  return worst;
}

}  // namespace

HomDefects mult_defect(const AlmostHom& v, const EpsilonAlgebra& a, int samples, std::uint64_t seed) {
  HomDefects h;
  h.unit = a.norm(v.apply(b_unit(v.spec)) - a.unit);
  h.mult = basis_pair_defect(v, a);
  Rng rng(seed);
  for (int t = 0; t < samples; ++t) {
    Vec x = random_b(v.spec, rng), y = random_b(v.spec, rng);
    Vec diff = v.apply(b_multiply(v.spec, x, y)) - a.star(v.apply(x), v.apply(y));
    h.mult = std::max(h.mult, a.norm(diff) / (b_norm(v.spec, x) * b_norm(v.spec, y)));
  }
  return h;
}

void measure_hom(AlmostHom& v, const EpsilonAlgebra& a, int samples, std::uint64_t seed) {
  HomDefects h = mult_defect(v, a, samples, seed);
  v.unit_defect = h.unit;
  v.mult_defect = h.mult;
  Rng rng(seed + 1);
  double lo = std::numeric_limits<double>::infinity(), hi = 0.0;
  auto probe = [&](const Vec& x) {
    double r = a.norm(v.apply(x)) / b_norm(v.spec, x);
    lo = std::min(lo, r);
    hi = std::max(hi, r);
  };
  for (int u = 0; u < v.spec.dim(); ++u) probe(Vec::Unit(v.spec.dim(), u));
  for (int t = 0; t < samples; ++t) probe(random_b(v.spec, rng));
  v.iso_lower = lo;
  v.iso_upper = hi;
}

void symmetrize_hom(AlmostHom& v) {
  auto t = b_transpose_index(v.spec);
  Mat c = v.coeffs;
  for (int u = 0; u < v.spec.dim(); ++u) c.col(u) = 0.5 * (v.coeffs.col(u) + v.coeffs.col(t[u]).conjugate());
  v.coeffs = c;
}

AlmostHom improve_homomorphism(const AlmostHom& v, const EpsilonAlgebra& a, const Diagonal& d,
                               const ImproveOptions& opt, ImproveReport* report) {
  if (!(d.spec == v.spec)) throw Error(ErrorKind::BadSpec, "diagonal and map have different block specs");
  const BlockSpec& s = v.spec;
  const int m = s.dim();
  auto t = b_transpose_index(s);
  std::vector<Mat> f(d.unitaries.size());
  std::vector<Vec> udag(d.unitaries.size());
  for (size_t i = 0; i < d.unitaries.size(); ++i) {
    f[i] = b_left(s, d.unitaries[i]);
    udag[i] = b_adjoint(s, d.unitaries[i]);
  }
  AlmostHom cur = v;
  double def = basis_pair_defect(cur, a);
  std::vector<double> history{def};
  if (def > opt.threshold) {
    if (report) report->defects = history;
    throw Error(ErrorKind::ImproveFailed, "defect " + std::to_string(def) + " above the improvement threshold");
  }
  AlmostHom best = cur;
  double best_def = def;
  int increases = 0;
  for (int round = 0; round < opt.max_rounds && best_def > opt.floor; ++round) {
    Mat w = Mat::Zero(cur.coeffs.rows(), m);
    for (size_t i = 0; i < d.unitaries.size(); ++i) {
      Vec vu = cur.coeffs * d.unitaries[i], vud = cur.coeffs * udag[i];
      Mat g = cur.coeffs * f[i] - a.left(vu) * cur.coeffs;
      w += d.weights[i] * (a.left(vud) * g);
    }
    Mat w2(w.rows(), m);
    for (int u = 0; u < m; ++u) w2.col(u) = w.col(t[u]).conjugate();
    AlmostHom next = cur;
    next.coeffs = cur.coeffs + 0.5 * (w + w2);
    double nd = basis_pair_defect(next, a);
    history.push_back(nd);
    const bool gained = nd < (1.0 - opt.plateau) * best_def;
    if (nd < best_def) {
      best = next;
      best_def = nd;
    }
    if (!gained) {
      // fluctuations at the algebra's own defect floor count as a plateau
      if (nd <= 2.0 * history[0]) break;
      if (nd > def && ++increases >= 2) {
        if (report) report->defects = history;
        throw Error(ErrorKind::Diverged, "defect grew in two consecutive rounds");
      }
    } else {
      increases = 0;
    }
    cur = next;
    def = nd;
  }
  if (report) report->defects = history;
  best.mult_defect = best_def;
  return best;
}

AlmostHom merge(const AlmostHom& v1, const AlmostHom& v2, const EpsilonAlgebra& a) {
  auto p1 = make_projection(a, v1.apply(b_unit(v1.spec))), p2 = make_projection(a, v2.apply(b_unit(v2.spec)));
  if (p1.norm > 1e-12 && p2.norm > 1e-12 && compression(a, p1, p2).dim() > 0)
    throw Error(ErrorKind::CrossTalk, "the two corners are linked");
  AlmostHom v;
  v.spec.block_dims = v1.spec.block_dims;
  v.spec.block_dims.insert(v.spec.block_dims.end(), v2.spec.block_dims.begin(), v2.spec.block_dims.end());
  v.coeffs.resize(a.dim(), v.spec.dim());
  v.coeffs << v1.coeffs, v2.coeffs;
  return v;
}

AlmostHom extend_matrix_algebra(const AlmostHom& v, const DeltaProjection& q, const EpsilonAlgebra& a,
                                const ImproveOptions& opt) {
  if (v.spec.block_dims.size() != 1) throw Error(ErrorKind::BadSpec, "extension needs a single matrix block");
  const int n = v.spec.block_dims[0];
  auto p = make_projection(a, v.apply(b_unit(v.spec)));
  auto c_pp = compression(a, p, p), c_pq = compression(a, p, q), c_q = compression(a, q, q);
  if (c_pq.dim() != n)
    throw Error(ErrorKind::DimMismatch, "dim S_{P,Q} = " + std::to_string(c_pq.dim()) + ", expected " + std::to_string(n));
  auto hs = hilbert_structure(a, c_pq, c_q);

  // μ = h ∘ v : M_n -> B(S_{P,Q}), improved to an exact representation
  EpsilonAlgebra mn = full_matrix_algebra(n);
  AlmostHom mu;
  mu.spec = v.spec;
  mu.coeffs.resize(mn.dim(), n * n);
  for (int u = 0; u < n * n; ++u) mu.coeffs.col(u) = mn.coords_of(h_map(a, hs, hs, c_pp, c_pp.apply(v.coeffs.col(u))));
  symmetrize_hom(mu);
  try {
    mu = improve_homomorphism(mu, mn, pauli_diagonal(mu.spec), opt);
  } catch (const Error& e) {
    throw Error(ErrorKind::ImproveFailed, std::string("representation on S_{P,Q}: ") + e.what());
  }
  auto e11 = herm_eig(hermitian_part(mn.to_matrix(mu.coeffs.col(0))));
  Vec xi = e11.vectors.col(0);
  Mat u1(n, n);
  for (int j = 0; j < n; ++j) u1.col(j) = mn.to_matrix(mu.coeffs.col(j)) * xi;

  const int n1 = n + 1;
  AlmostHom out;
  out.spec.block_dims = {n1};
  out.coeffs = Mat::Zero(a.dim(), n1 * n1);
  for (int j = 0; j < n; ++j)
    for (int k = 0; k < n; ++k) out.coeffs.col(j + k * n1) = v.coeffs.col(j + k * n);
  for (int j = 0; j < n; ++j) {
    Vec xj = c_pq.image * (hs.onb * u1.col(j));
    out.coeffs.col(j + n * n1) = xj;
    out.coeffs.col(n + j * n1) = xj.conjugate();
  }
  out.coeffs.col(n + n * n1) = hs.q_tilde;
  symmetrize_hom(out);
  try {
    return improve_homomorphism(out, a, pauli_diagonal(out.spec), opt);
  } catch (const Error& e) {
    throw Error(ErrorKind::ImproveFailed, std::string("extended map: ") + e.what());
  }
}

namespace {

[[noreturn]] void stage_failed(int stage, const Error& e) {
  throw Error(ErrorKind::StageFailed,
              "stage " + std::to_string(stage) + ": " + kind_name(e.kind()) + ": " + e.what());
}

}  // namespace

Reconstruction reconstruct(const EpsilonAlgebra& a, const ReconstructOptions& opt) {
  Reconstruction out;
  // Stage 1: split until every corner is one-dimensional
  std::vector<DeltaProjection> ps;
  try {
    ps.push_back(make_projection(a, a.unit));
    std::vector<int> dims{compression(a, ps[0], ps[0]).dim()};
    for (int iter = 0; iter < 2 * a.dim(); ++iter) {
      auto it = std::max_element(dims.begin(), dims.end());
      if (*it <= 1) break;
      const size_t i = it - dims.begin();
      auto c_pp = compression(a, ps[i], ps[i]);
      Corner corner = compress_algebra(a, c_pp);
      auto pc = find_nontrivial_projection(corner.alg, opt.delta_target, opt.max_retries, opt.seed + iter);
      Vec pa = corner.embed * pc.coords;
      Vec pb = c_pp.apply(ps[i].coords) - pa;
      ps[i] = refine_projection(a, pa);
      ps.insert(ps.begin() + i + 1, refine_projection(a, pb));
      dims[i] = compression(a, ps[i], ps[i]).dim();
      dims.insert(dims.begin() + i + 1, compression(a, ps[i + 1], ps[i + 1]).dim());
      if (dims[i] == 0 || dims[i + 1] == 0) throw Error(ErrorKind::SearchExhausted, "split produced an empty corner");
    }
    if (*std::max_element(dims.begin(), dims.end()) > 1)
      throw Error(ErrorKind::SearchExhausted, "splitting did not terminate");
  } catch (const Error& e) {
    stage_failed(1, e);
  }
  for (const auto& p : ps) out.report.projection_deltas.push_back(p.delta);

  // Stage 2: one matrix block per equivalence class
  std::vector<AlmostHom> blocks;
  try {
    out.report.classes = classify_equivalence(a, ps);
    for (const auto& cls : out.report.classes) {
      AlmostHom v;
      v.spec.block_dims = {1};
      v.coeffs = ps[cls[0]].coords;
      for (size_t k = 1; k < cls.size(); ++k) v = extend_matrix_algebra(v, ps[cls[k]], a, opt.improve);
      out.report.stage_defects.push_back(basis_pair_defect(v, a));
      blocks.push_back(v);
    }
  } catch (const Error& e) {
    stage_failed(2, e);
  }

  // Stage 3: merge and polish, largest blocks first
  try {
    std::stable_sort(blocks.begin(), blocks.end(),
                     [](const AlmostHom& x, const AlmostHom& y) { return x.spec.block_dims[0] > y.spec.block_dims[0]; });
    AlmostHom v = blocks[0];
    for (size_t i = 1; i < blocks.size(); ++i) v = merge(v, blocks[i], a);
    symmetrize_hom(v);
    ImproveReport rep;
    v = improve_homomorphism(v, a, pauli_diagonal(v.spec), opt.improve, &rep);
    out.report.final_rounds = rep.defects;
    measure_hom(v, a, opt.samples, opt.seed);
    out.report.stage_defects.push_back(v.mult_defect);
    out.spec = v.spec;
    out.v = v;
  } catch (const Error& e) {
    stage_failed(3, e);
  }
  return out;
}

}  // namespace aiq
