#include "phq/laughlin.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>
#include <stdexcept>

#include "phq/theta.hpp"

namespace phq {

std::string LaughlinConvention::tag() const {
  std::ostringstream os;
  os << "w=x" << (imag_sign < 0 ? "-" : "+") << "iy;b=" << b_char;
  return os.str();
}

std::vector<LaughlinConvention> laughlin_convention_candidates() {
  return {{-1, 0.0}, {-1, 0.5}, {+1, 0.0}, {+1, 0.5}};
}

LaughlinTorusState build_laughlin(const ManifoldBasis &basis, int l, const LaughlinConvention &conv) {
  const LatticeGeometry &g = basis.geometry();
  const int n_ph = basis.photons();
  if (g.nphi() != 2 * n_ph) {
    throw std::invalid_argument("Laughlin nu=1/2 needs Nphi = 2 * n_ph");
  }
  if (l != 0 && l != 1) {
    throw std::invalid_argument("Laughlin degeneracy index must be 0 or 1");
  }
  constexpr double pi = std::numbers::pi;
  const double lx = g.nx();
  const double ly = g.ny();
  const cplx tau(0.0, ly / lx);
  const double lb2 = 1.0 / (2.0 * pi * g.alpha());
  const double a_char = 0.5 * l + 0.25 * (g.nphi() - 2);

  LaughlinTorusState st;
  st.n_ph = n_ph;
  st.l = l;
  st.magnetic_length_sq = lb2;
  st.convention = conv;

  const auto dim = static_cast<Eigen::Index>(basis.dim());
  std::vector<cplx> logs(basis.dim());
  std::vector<bool> zero(basis.dim(), false);
  double max_re = -std::numeric_limits<double>::infinity();
  std::vector<cplx> w;
  std::vector<double> ys;
  for (std::size_t k = 0; k < basis.dim(); ++k) {
    const auto s = basis.state(k);
    w.clear();
    ys.clear();
    for (std::size_t i = 0; i < s.size(); ++i) {
      if (s[i] > 1) {
        zero[k] = true;
        break;
      }
      if (s[i] == 1) {
        const double x = g.site_x(static_cast<int>(i));
        const double y = g.site_y(static_cast<int>(i));
        w.emplace_back(x, conv.imag_sign * y);
        ys.push_back(y);
      }
    }
    if (zero[k]) {
      continue;
    }
    cplx lg = 0.0;
    cplx total = 0.0;
    for (std::size_t i = 0; i < w.size(); ++i) {
      total += w[i];
      lg -= ys[i] * ys[i] / (2.0 * lb2);
      for (std::size_t j = i + 1; j < w.size(); ++j) {
        lg += 2.0 * log_theta1(pi * (w[i] - w[j]) / lx, tau);
      }
    }
    lg += log_theta_char(a_char, conv.b_char, 2.0 * total / lx, 2.0 * tau);
    logs[k] = lg;
    max_re = std::max(max_re, lg.real());
  }
  st.amplitudes = CVec::Zero(dim);
  for (std::size_t k = 0; k < basis.dim(); ++k) {
    if (!zero[k]) {
      st.amplitudes(static_cast<Eigen::Index>(k)) = std::exp(logs[k] - max_re);
    }
  }
  const double nrm = st.amplitudes.norm();
  if (!(nrm > 0.0)) {
    throw std::domain_error("Laughlin amplitudes vanish on this basis");
  }
  st.amplitudes /= nrm;
  return st;
}

CMat build_laughlin_pair(const ManifoldBasis &basis, const LaughlinConvention &conv) {
  const CVec l0 = build_laughlin(basis, 0, conv).amplitudes;
  CVec l1 = build_laughlin(basis, 1, conv).amplitudes;
  for (int pass = 0; pass < 2; ++pass) {
    l1 -= l0 * l0.dot(l1);
  }
  const double n1 = l1.norm();
  if (!(n1 > 1e-12)) {
    throw std::domain_error("Laughlin partners are linearly dependent on this lattice");
  }
  CMat pair(l0.size(), 2);
  pair.col(0) = l0;
  pair.col(1) = l1 / n1;
  return pair;
}

EigenPairs ed_ground_manifold(const ManifoldBasis &basis, const LinkPhaseTable &links, int k, double tol,
                              unsigned seed) {
  const SparseOperator h = build_hopping_block(basis, links);
  return lowest_eigenpairs(h, k, tol, seed);
}

double subspace_overlap(const CMat &a, const CMat &b) {
  if (a.rows() != b.rows() || a.cols() != b.cols() || a.cols() == 0) {
    throw std::invalid_argument("subspace overlap needs equally sized column sets");
  }
  return (a.adjoint() * b).squaredNorm() / double(a.cols());
}

ConventionChoice select_laughlin_convention(const ManifoldBasis &basis, const LinkPhaseTable &links,
                                            unsigned seed) {
  if (basis.cap() != 1) {
    throw std::invalid_argument("Laughlin convention selection runs on the hard-core basis");
  }
  ConventionChoice out;
  out.ed = ed_ground_manifold(basis, links, 2, 1e-10, seed);
  double best = -1.0;
  for (const auto &conv : laughlin_convention_candidates()) {
    const CMat pair = build_laughlin_pair(basis, conv);
    const double ov = subspace_overlap(pair, out.ed.vectors);
    out.candidate_overlaps.push_back(ov);
    if (ov > best) {
      best = ov;
      out.convention = conv;
      out.pair = pair;
    }
  }
  out.ed_overlap = best;
  return out;
}

} // namespace phq
