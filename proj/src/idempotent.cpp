#include "aiq/idempotent.hpp"

namespace aiq {

std::vector<int> block_offsets(const std::vector<int>& dims) {
  std::vector<int> off(dims.size() + 1, 0);
  for (size_t i = 0; i < dims.size(); ++i) off[i + 1] = off[i] + dims[i];
  return off;
}

BlockDecomposition decompose_star_algebra(const std::vector<Mat>& basis, double struct_tol,
                                                 std::uint64_t seed) {
  if (basis.empty()) throw Error(ErrorKind::NotClosed, "empty basis");
  const int m = static_cast<int>(basis[0].rows());
  Mat stacked(static_cast<Eigen::Index>(m) * m, basis.size());
  for (size_t k = 0; k < basis.size(); ++k) stacked.col(k) = vec(basis[k]);
  Mat q = column_space(stacked, 1e-9);
  const int n = static_cast<int>(q.cols());
  auto outside = [&](const Mat& x) { return (vec(x) - q * (q.adjoint() * vec(x))).norm(); };

  std::vector<Mat> a(n);
  for (int k = 0; k < n; ++k) a[k] = unvec(q.col(k), m, m);
  double closure = outside(Mat::Identity(m, m)) / std::sqrt(double(m));
  for (int i = 0; i < n; ++i) {
    closure = std::max(closure, outside(a[i].adjoint()));
    for (int j = 0; j < n; ++j) closure = std::max(closure, outside(a[i] * a[j]));
  }
  if (closure > struct_tol)
    throw Error(ErrorKind::NotClosed, "closure residual " + std::to_string(closure));

  std::vector<Mat> h = hermitian_span_basis(a, m);
  const int nh = static_cast<int>(h.size());

  // center: coefficient vectors c with [Σ c_k h_k, h_i] = 0 for every i
  Mat comm(static_cast<Eigen::Index>(nh) * m * m, nh);
  for (int k = 0; k < nh; ++k)
    for (int i = 0; i < nh; ++i)
      comm.block(static_cast<Eigen::Index>(i) * m * m, k, m * m, 1) = vec(h[k] * h[i] - h[i] * h[k]);
  // h is orthonormal, so commutators are O(1) unless the algebra is commutative
  Mat cnull = operator_norm(comm) < 1e-10 ? Mat(Mat::Identity(nh, nh)) : null_space(comm, 1e-8);
  std::vector<Mat> central;
  for (Eigen::Index c = 0; c < cnull.cols(); ++c) {
    Mat z = Mat::Zero(m, m);
    for (int k = 0; k < nh; ++k) z += cnull(k, c) * h[k];
    central.push_back(z);
  }
  std::vector<Mat> zh = hermitian_span_basis(central, m);
  const int ncenter = static_cast<int>(zh.size());

  Rng rng(seed);
  for (int attempt = 0; attempt < 12; ++attempt) {
    RVec r = random_real(ncenter, rng);
    Mat z = Mat::Zero(m, m);
    for (int k = 0; k < ncenter; ++k) z += r(k) * zh[k];
    auto sd = herm_eig(hermitian_part(z));
    double scale = std::max(1e-300, sd.values.cwiseAbs().maxCoeff());
    std::vector<std::vector<int>> clusters{{0}};
    bool ambiguous = false;
    for (int i = 1; i < m; ++i) {
      double gap = (sd.values(i - 1) - sd.values(i)) / scale;
      if (gap > 1e-6) {
        clusters.push_back({i});
      } else {
        if (gap > 1e-9) ambiguous = true;
        clusters.back().push_back(i);
      }
    }
    if (ambiguous || static_cast<int>(clusters.size()) != ncenter) continue;

    BlockDecomposition out;
    bool ok = true;
    std::vector<std::pair<std::pair<int, int>, Mat>> blocks;
    for (const auto& cl : clusters) {
      const int rj = static_cast<int>(cl.size());
      Mat bj(m, rj);
      for (int t = 0; t < rj; ++t) bj.col(t) = sd.vectors.col(cl[t]);
      Mat comp(static_cast<Eigen::Index>(rj) * rj, nh);
      for (int k = 0; k < nh; ++k) comp.col(k) = vec(Mat(bj.adjoint() * h[k] * bj));
      const int nj = static_cast<int>(column_space(comp, 1e-8).cols());
      const int dj = static_cast<int>(std::lround(std::sqrt(double(nj))));
      if (dj * dj != nj || dj == 0 || rj % dj != 0) {
        ok = false;
        break;
      }
      const int ej = rj / dj;
      // split the central block into d_j groups of repeated eigenvalues
      RVec rx = random_real(nh, rng);
      Mat x = Mat::Zero(m, m);
      for (int k = 0; k < nh; ++k) x += rx(k) * h[k];
      Mat xj = hermitian_part(Mat(bj.adjoint() * x * bj));
      auto sx = herm_eig(xj);
      double xs = std::max(1e-300, sx.values.cwiseAbs().maxCoeff());
      for (int g = 0; g < dj && ok; ++g) {
        double spread = sx.values(g * ej) - sx.values(g * ej + ej - 1);
        if (spread > 1e-8 * xs) ok = false;
        if (g > 0 && sx.values(g * ej - 1) - sx.values(g * ej) < 1e-6 * xs) ok = false;
      }
      if (!ok) break;
      Mat gm = Mat::Zero(m, m);
      Mat gc = random_gaussian(nh, 1, rng);
      for (int k = 0; k < nh; ++k) gm += gc(k, 0) * h[k];
      Mat gj = bj.adjoint() * gm * bj;
      Mat v1 = sx.vectors.leftCols(ej);
      Mat wj(dj * ej, m);
      for (int g = 0; g < dj; ++g) {
        Mat vk = sx.vectors.middleCols(g * ej, ej);
        if (g > 0) {
          Mat t = vk.adjoint() * gj * v1;
          if (operator_norm(t) < 1e-3 * std::max(1e-300, operator_norm(gj))) {
            ok = false;
            break;
          }
          vk = vk * polar_unitary(t);
        }
        wj.middleRows(g * ej, ej) = (bj * vk).adjoint();
      }
      if (!ok) break;
      blocks.push_back({{dj, ej}, wj});
    }
    if (!ok) continue;
    std::stable_sort(blocks.begin(), blocks.end(), [](const auto& x, const auto& y) {
      if (x.first.first != y.first.first) return x.first.first > y.first.first;
      return x.first.second > y.first.second;
    });
    for (auto& b : blocks) {
      out.d.push_back(b.first.first);
      out.e.push_back(b.first.second);
      out.w.push_back(b.second);
    }
    Mat u = out.unitary();
    if (operator_norm(u * u.adjoint() - Mat::Identity(m, m)) > 1e-8) continue;
    double shape = 0.0;
    for (int k = 0; k < nh && shape <= 1e-8; ++k) {
      Mat y = u * h[k] * u.adjoint();
      auto off = block_offsets([&] {
        std::vector<int> sz;
        for (size_t j = 0; j < out.d.size(); ++j) sz.push_back(out.d[j] * out.e[j]);
        return sz;
      }());
      Mat expect = Mat::Zero(m, m);
      for (size_t j = 0; j < out.d.size(); ++j) {
        int s = off[j], len = off[j + 1] - off[j];
        Mat yj = y.block(s, s, len, len);
        Mat aj = ptrace_second(yj, out.d[j], out.e[j]) / double(out.e[j]);
        expect.block(s, s, len, len) = kron(aj, Mat(Mat::Identity(out.e[j], out.e[j])));
      }
      shape = std::max(shape, operator_norm(y - expect));
    }
    if (shape > 1e-8) continue;
    return out;
  }
  throw Error(ErrorKind::DecompositionFailed, "no clean random probe after retries");
}

Mat structure_w(const IdempotentStructure& s, const Mat& x) {
  auto off = block_offsets(s.d);
  const int m = s.carrier_dim();
  Mat out = Mat::Zero(m, m);
  for (size_t j = 0; j < s.d.size(); ++j) {
    Mat xj = x.block(off[j], off[j], s.d[j], s.d[j]);
    out += s.w[j].adjoint() * kron(xj, Mat(Mat::Identity(s.e[j], s.e[j]))) * s.w[j];
  }
  return out;
}

Mat structure_gamma(const IdempotentStructure& s, const Mat& y) {
  auto off = block_offsets(s.d);
  const int dd = s.block_total();
  Mat out = Mat::Zero(dd, dd);
  for (size_t j = 0; j < s.d.size(); ++j) {
    Mat t = s.w[j] * y * s.w[j].adjoint() * kron(Mat(Mat::Identity(s.d[j], s.d[j])), s.gamma[j]);
    out.block(off[j], off[j], s.d[j], s.d[j]) = ptrace_second(t, s.d[j], s.e[j]);
  }
  return out;
}

Channel structure_delta(const IdempotentStructure& s) {
  const int dd = s.block_total();
  auto off = block_offsets(s.d);
  return from_function(dd, s.ambient_dim(), [&](const Mat& x) {
    Mat xb = Mat::Zero(dd, dd);
    for (size_t j = 0; j < s.d.size(); ++j) xb.block(off[j], off[j], s.d[j], s.d[j]) = x.block(off[j], off[j], s.d[j], s.d[j]);
    return s.phi.apply(s.carrier * structure_w(s, xb) * s.carrier.adjoint());
  });
}

Channel structure_gamma_cm(const IdempotentStructure& s) {
  return from_function(s.ambient_dim(), s.block_total(),
                       [&](const Mat& x) { return structure_gamma(s, s.carrier.adjoint() * x * s.carrier); });
}

IdempotentStructure idempotent_structure(const Channel& ch, double struct_tol,
                                                const Tolerances& tol, std::uint64_t seed) {
  if (ch.dim_in != ch.dim_out) throw Error(ErrorKind::DimMismatch, "idempotent map must be square");
  double idem = operator_norm(ch.superop * ch.superop - ch.superop);
  if (idem > struct_tol) throw Error(ErrorKind::NotIdempotent, "‖Φ²−Φ‖ = " + std::to_string(idem));
  const int d = ch.dim_in;
  IdempotentStructure s;
  s.phi = ch;
  s.carrier = carrier(ch, tol);
  Mat img = column_space_abs(ch.superop, 0.5);
  std::vector<Mat> compressed;
  for (Eigen::Index k = 0; k < img.cols(); ++k)
    compressed.push_back(s.carrier.adjoint() * unvec(img.col(k), d, d) * s.carrier);
  auto bd = decompose_star_algebra(compressed, struct_tol, seed);
  s.d = bd.d;
  s.e = bd.e;
  s.w = bd.w;

  // γ_j from Ψ(Y) = J†Φ(JYJ†)J = w(Γ(Y)), averaged over the diagonal matrix units of L_j
  for (size_t j = 0; j < s.d.size(); ++j) {
    const int dj = s.d[j], ej = s.e[j];
    Mat g = Mat::Zero(ej, ej);
    for (int a = 0; a < ej; ++a)
      for (int b = 0; b < ej; ++b) {
        cplx acc = 0;
        for (int k = 0; k < dj; ++k) {
          Mat unit = Mat::Zero(dj * ej, dj * ej);
          unit(k * ej + a, k * ej + b) = 1.0;
          Mat y = s.w[j].adjoint() * unit * s.w[j];
          Mat psi = s.carrier.adjoint() * ch.apply(s.carrier * y * s.carrier.adjoint()) * s.carrier;
          Mat r = ptrace_second(s.w[j] * psi * s.w[j].adjoint(), dj, ej) / double(ej);
          acc += r(k, k);
        }
        g(b, a) = acc / double(dj);
      }
    s.gamma.push_back(hermitian_part(g));
  }
  Channel rebuilt = compose(structure_delta(s), structure_gamma_cm(s));
  s.residual = operator_norm(rebuilt.superop - ch.superop);
  return s;
}

std::pair<DualChannel, DualChannel> make_enc_dec(const IdempotentStructure& s,
                                                        const std::optional<Channel>& tail) {
  for (const auto& g : s.gamma) {
    Eigen::SelfAdjointEigenSolver<Mat> es(hermitian_part(g), Eigen::EigenvaluesOnly);
    if (es.eigenvalues()(0) < -1e-9 || std::abs(g.trace().real() - 1.0) > 1e-9 || !is_hermitian(g, 1e-9))
      throw Error(ErrorKind::InvalidGamma, "γ_j is not a density matrix");
  }
  const int dd = s.block_total(), h = s.ambient_dim(), m = s.carrier_dim();
  auto off = block_offsets(s.d);
  Mat jperp = complement(s.carrier);
  if (tail && (tail->dim_in != h - m || tail->dim_out != dd))
    throw Error(ErrorKind::DimMismatch, "out-of-code decoder dims");
  DualChannel enc = from_function(
      dd, h,
      [&](const Mat& rho) {
        Mat out = Mat::Zero(m, m);
        for (size_t j = 0; j < s.d.size(); ++j) {
          Mat rj = rho.block(off[j], off[j], s.d[j], s.d[j]);
          out += s.w[j].adjoint() * kron(rj, s.gamma[j]) * s.w[j];
        }
        return Mat(s.carrier * out * s.carrier.adjoint());
      },
      Picture::schrodinger);
  DualChannel dec = from_function(
      h, dd,
      [&](const Mat& rho) {
        Mat out = Mat::Zero(dd, dd);
        Mat inner = s.carrier.adjoint() * rho * s.carrier;
        for (size_t j = 0; j < s.d.size(); ++j)
          out.block(off[j], off[j], s.d[j], s.d[j]) =
              ptrace_second(s.w[j] * inner * s.w[j].adjoint(), s.d[j], s.e[j]);
        if (jperp.cols() > 0) {
          Mat sigma = jperp.adjoint() * rho * jperp;
          if (tail)
            out += tail->apply(sigma);
          else
            out(0, 0) += sigma.trace();
        }
        return out;
      },
      Picture::schrodinger);
  return {enc, dec};
}

Channel out_of_code_decoder(const IdempotentStructure& s) {
  Mat jperp = complement(s.carrier);
  const int k = static_cast<int>(jperp.cols());
  if (k == 0) throw Error(ErrorKind::DimMismatch, "carrier is the full space");
  Channel delta_star = dual(structure_delta(s));
  return from_function(
      k, s.block_total(), [&](const Mat& sigma) { return delta_star.apply(jperp * sigma * jperp.adjoint()); },
      Picture::schrodinger);
}

Channel gen_random_idempotent(const std::vector<std::pair<int, int>>& blocks, int dim, std::uint64_t seed) {
  int m = 0, dsum = 0;
  for (auto [dj, ej] : blocks) {
    if (dj <= 0 || ej <= 0) throw Error(ErrorKind::BadSpec, "block sizes must be positive");
    m += dj * ej;
    dsum += dj;
  }
  if (m > dim) throw Error(ErrorKind::BadSpec, "blocks do not fit into the ambient dimension");
  Rng rng(seed);
  Mat u = random_unitary(dim, rng);
  Mat jm = u.leftCols(m), jperp = u.rightCols(dim - m);
  Mat wu = random_unitary(m, rng);
  std::vector<Mat> w, gam;
  int row = 0;
  for (auto [dj, ej] : blocks) {
    w.push_back(wu.middleRows(row, dj * ej));
    row += dj * ej;
    gam.push_back(random_density(ej, rng));
  }
  const int k = dim - m;
  std::vector<int> fdim;
  Mat r;
  if (k > 0) {
    int f = (k + dsum - 1) / dsum + 1;
    int big = 0;
    for (auto [dj, ej] : blocks) {
      (void)ej;
      fdim.push_back(f);
      big += dj * f;
    }
    r = random_unitary(big, rng).leftCols(k);
  }
  std::vector<int> dvec;
  for (auto [dj, ej] : blocks) {
    (void)ej;
    dvec.push_back(dj);
  }
  auto off = block_offsets(dvec);
  return from_function(dim, dim, [&](const Mat& x) {
    Mat y = jm.adjoint() * x * jm;
    Mat out = Mat::Zero(m, m);
    std::vector<Mat> a;
    for (size_t j = 0; j < blocks.size(); ++j) {
      auto [dj, ej] = blocks[j];
      Mat t = w[j] * y * w[j].adjoint() * kron(Mat(Mat::Identity(dj, dj)), gam[j]);
      a.push_back(ptrace_second(t, dj, ej));
      out += w[j].adjoint() * kron(a.back(), Mat(Mat::Identity(ej, ej))) * w[j];
    }
    Mat res = jm * out * jm.adjoint();
    if (k > 0) {
      int big = static_cast<int>(r.rows());
      Mat blk = Mat::Zero(big, big);
      int o = 0;
      for (size_t j = 0; j < blocks.size(); ++j) {
        int len = blocks[j].first * fdim[j];
        blk.block(o, o, len, len) = kron(a[j], Mat(Mat::Identity(fdim[j], fdim[j])));
        o += len;
      }
      res += jperp * (r.adjoint() * blk * r) * jperp.adjoint();
    }
    (void)off;
    return res;
  });
}

}  // namespace aiq
