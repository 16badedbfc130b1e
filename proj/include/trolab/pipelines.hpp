#pragma once

// Batch pipelines behind the CLI: compute every applicable derivation space
// for a problem file, run a named certification check, or process a whole
// corpus directory.  All randomness is seeded, all iteration orders fixed,
// and no timestamps enter the comparable section of a report.

#include <chrono>
#include <filesystem>
#include <fstream>

#include "trolab/instances.hpp"
#include "trolab/problem.hpp"
#include "trolab/report.hpp"
#include "trolab/structure_maps.hpp"

namespace trolab {

namespace detail {

class Stopwatch {
 public:
  Stopwatch() : start_(std::chrono::steady_clock::now()) {}
  double ms() const {
    return std::chrono::duration<double, std::milli>(
               std::chrono::steady_clock::now() - start_)
        .count();
  }

 private:
  std::chrono::steady_clock::time_point start_;
};

inline Json verdict(bool pass, double residual) {
  return Json{{"pass", pass}, {"residual", residual}};
}

inline void merge_verdict(Report& rep, const std::string& name, bool pass,
                          double residual) {
  rep.results["verdicts"][name] = verdict(pass, residual);
  rep.all_pass = rep.all_pass && pass;
}

/// Worst membership residual of a's ops in b and vice versa; also demands
/// equal dimensions.
inline double mutual_membership_residual(const DerivationSpace& a,
                                         const DerivationSpace& b) {
  double worst = a.dim() == b.dim() ? 0.0 : 1.0;
  for (const auto& op : a.ops)
    worst = std::max(worst, op_membership(op, b, 1e-7).residual);
  for (const auto& op : b.ops)
    worst = std::max(worst, op_membership(op, a, 1e-7).residual);
  return worst;
}

inline CMat seeded_combo(const DerivationSpace& sp, Rng& rng) {
  Eigen::Index n = sp.domain.dim();
  CMat op = CMat::Zero(n, n);
  for (const auto& b : sp.ops) op += rng.gaussian() * b;
  return op;
}

}  // namespace detail

inline const std::vector<std::string>& known_theorems() {
  static const std::vector<std::string> tags = {
      "lemma_1_4", "lemma_2_1",      "thm_2_2",          "prop_2_4",
      "lemma_3_1", "thm_3_2",        "thm_3_4_iii_1",    "prop_3_11_finite"};
  return tags;
}

inline std::vector<std::string> applicable_theorems(const BuiltProblem& b) {
  if (b.file.kind == "algebra") {
    if (b.algebra->unital) return {"lemma_3_1", "thm_3_2"};
    return {};
  }
  if (b.file.kind == "corner")
    return {"lemma_1_4", "lemma_2_1", "thm_2_2", "prop_2_4", "thm_3_4_iii_1"};
  if (b.file.kind == "tro")
    return {"lemma_2_1", "thm_2_2", "prop_2_4", "thm_3_4_iii_1"};
  return {"thm_2_2", "prop_2_4", "prop_3_11_finite"};  // direct_sum
}

// ---------------------------------------------------------------------------
// cmd_derivations
// ---------------------------------------------------------------------------

namespace detail {

inline void report_tro_spaces(Report& rep, const TRO& x, double tol) {
  DerivationSpace dtro = tro_derivation_space(x, tol);
  DerivationSpace dtriple = triple_derivation_space(x, tol);
  InnerSpace itro = inner_tro_space(x);
  InnerSpace itriple = inner_triple_space(x);
  auto& dims = rep.results["dimensions"];
  dims["tro_derivations_real"] = dtro.dim();
  dims["triple_derivations_real"] = dtriple.dim();
  dims["inner_tro_real"] = itro.space.dim();
  dims["inner_triple_real"] = itriple.space.dim();
  dims["tro_outer"] = dtro.dim() - itro.space.dim();
  double worst = 0.0;
  bool all_inner = true;
  for (const auto& op : dtro.ops) {
    auto res = is_inner(op, itro, 1e-8);
    worst = std::max(worst, res.distance);
    all_inner = all_inner && res.inner;
  }
  merge_verdict(rep, "tro_derivations_all_inner", all_inner, worst);
  rep.results["flags"]["nondegenerate"] = x.nondegenerate;
}

}  // namespace detail

inline Report run_derivations(const BuiltProblem& b,
                              const std::string& label) {
  Report rep;
  rep.input = label;
  rep.kind = b.file.kind;
  detail::Stopwatch total;
  auto& dims = rep.results["dimensions"];

  if (b.algebra) {
    const StarAlgebra& a = *b.algebra;
    DerivationSpace base = derivation_space(a);
    DerivationSpace star = star_derivation_space(a, &base);
    InnerSpace inner = inner_assoc_space(a);
    dims["algebra"] = a.dim();
    dims["center"] = center(a).dim();
    dims["derivations_complex"] = base.dim();
    dims["star_derivations_real"] = star.dim();
    dims["inner_derivations_complex"] = inner.space.dim();
    dims["outer_derivations"] = base.dim() - inner.space.dim();
    rep.results["flags"]["unital"] = a.unital;
    double worst = 0.0;
    bool all_inner = true;
    for (const auto& op : base.ops) {
      auto res = is_inner(op, inner, 1e-8);
      worst = std::max(worst, res.distance);
      all_inner = all_inner && res.inner;
    }
    detail::merge_verdict(rep, "derivations_all_inner", all_inner, worst);

    if (a.unital) {
      DerivationSpace dtriple = triple_derivation_space(a, b.tol);
      InnerSpace itriple = inner_triple_space(a);
      dims["triple_derivations_real"] = dtriple.dim();
      dims["inner_triple_real"] = itriple.space.dim();
    }

    if (b.projection) {
      const Projection& p = *b.projection;
      DerivationSpace dp = p_derivation_space(a, p, false, &base);
      DerivationSpace dps = p_derivation_space(a, p, true, &base);
      GeneratorRealization gen = generator_realization(a, &p, false, b.tol);
      GeneratorRealization gens = generator_realization(a, &p, true, b.tol);
      dims["p_derivations_complex"] = dp.dim();
      dims["p_star_derivations_real"] = dps.dim();
      dims["p_generators_complex"] = gen.space.dim();
      dims["p_star_generators_real"] = gens.space.dim();
      RestrictionReport rr = restriction_delta(a, p, b.tol, &base);
      dims["corner_tro"] = rr.x.dim();
      dims["corner_tro_derivations_real"] = rr.d_tro.dim();
      dims["restriction_image"] = rr.image_dim;
      dims["restriction_kernel_generators_real"] = rr.generator_kernel.dim();
      rep.results["flags"]["restriction_surjective"] = rr.surjective;
      detail::merge_verdict(rep, "restriction_lands_in_tro_derivations",
                            rr.restriction_residual <= 1e-7,
                            rr.restriction_residual);
      // The generator-level kernel of the restriction is the center.
      MatrixSubspace zr = orthonormalize(center(a).basis, Field::Real, 0.0,
                                         a.ambient(), a.ambient());
      bool kernel_is_center = same_span(rr.generator_kernel, zr, 1e-7);
      detail::merge_verdict(rep, "restriction_generator_kernel_is_center",
                            kernel_is_center, kernel_is_center ? 0.0 : 1.0);
    }
  }

  if (b.tro) {
    detail::report_tro_spaces(rep, *b.tro, b.tol);
    if (!b.tro->summands.empty()) {
      Json per = Json::array();
      for (const auto& s : b.tro->summands)
        per.push_back(Json{{"rows", s.rows},
                           {"cols", s.cols},
                           {"dim", s.basis_count}});
      rep.results["summands"] = per;
    }
  }

  rep.wall_ms["total"] = total.ms();
  return rep;
}

// ---------------------------------------------------------------------------
// cmd_check
// ---------------------------------------------------------------------------

namespace detail {

inline void check_lemma_1_4(Report& rep, const BuiltProblem& b) {
  const StarAlgebra& a = *b.algebra;
  const Projection& e = *b.projection;
  Eigen::Index n = a.ambient();
  Projection f = certify_idempotent(
      a, CMat(CMat::Identity(n, n) - e.matrix), 1e-7);
  MatrixSubspace c_ee = corner(e, a, e);
  MatrixSubspace c_ef = corner(e, a, f);
  MatrixSubspace c_fe = corner(f, a, e);
  MatrixSubspace c_ff = corner(f, a, f);

  DerivationSpace base = derivation_space(a);
  double tol = 1e-8;

  // (1.4.1, 1.3.2) delta(e) = 0 leaves all four corners invariant.
  DerivationSpace de = p_derivation_space(a, e, false, &base);
  double v1 = 0.0;
  for (const auto& op : de.ops)
    for (const MatrixSubspace* s : {&c_ee, &c_ef, &c_fe, &c_ff})
      for (const auto& m : s->basis) {
        CMat img = apply_op(a.carrier, op, m, 1e-7);
        v1 = std::max(v1, membership(img, *s, 1.0).residual);
      }
  merge_verdict(rep, "corners_invariant_when_delta_e_zero", v1 <= tol, v1);

  // (1.3.1 / 1.4.2) invariance of eAe forces delta(e) = 0; the unit of the
  // subalgebra S = eAe is e itself.
  auto delta_e_norm = [&](const DerivationSpace& sp) {
    double worst = 0.0;
    for (const auto& op : sp.ops)
      worst = std::max(worst, (op * e.coeffs).norm());
    return worst;
  };
  DerivationSpace ds1 = s_derivation_space(a, c_ee, 1e-8, &base);
  double v2 = delta_e_norm(ds1);
  merge_verdict(rep, "delta_e_zero_when_eAe_invariant", v2 <= tol, v2);

  // (1.4.2') invariance of (1-e)A(1-e).
  DerivationSpace ds2 = s_derivation_space(a, c_ff, 1e-8, &base);
  double v3 = delta_e_norm(ds2);
  merge_verdict(rep, "delta_e_zero_when_complement_corner_invariant",
                v3 <= tol, v3);

  // (1.3.2) delta(1_S) = 0 forces delta(S) inside 1_S A 1_S = eAe.
  double v4 = 0.0;
  for (const auto& op : de.ops)
    for (const auto& m : c_ee.basis) {
      CMat img = apply_op(a.carrier, op, m, 1e-7);
      v4 = std::max(v4, membership(img, c_ee, 1.0).residual);
    }
  merge_verdict(rep, "s_derivations_land_in_corner", v4 <= tol, v4);

  // (1.4.3) self-adjoint case needs a projection.
  if (e.hermitian) {
    DerivationSpace star = star_derivation_space(a, &base);
    auto invariance = [&](const MatrixSubspace& s) {
      CMat sigma(a.dim(), std::max<Eigen::Index>(s.dim(), 1));
      for (Eigen::Index r = 0; r < s.dim(); ++r)
        sigma.col(r) = a.coords(s.basis[r], 1e-7);
      CMat proj = CMat::Zero(a.dim(), a.dim());
      if (s.dim() > 0) {
        Eigen::HouseholderQR<CMat> qr(sigma.leftCols(s.dim()));
        CMat q = qr.householderQ() * CMat::Identity(a.dim(), s.dim());
        proj = q * q.adjoint();
      }
      CMat comp = CMat::Identity(a.dim(), a.dim()) - proj;
      return refine_real_space(
          star,
          [&, comp](const CMat& op) -> CMat {
            if (s.dim() == 0) return CMat::Zero(a.dim(), 1);
            return comp * (op * sigma.leftCols(s.dim()));
          },
          DerivationKind::SInvariant);
    };
    double v5 = delta_e_norm(invariance(c_ef));
    merge_verdict(rep, "delta_e_zero_when_offdiagonal_invariant_sa", v5 <= tol,
                  v5);
    double v6 = delta_e_norm(invariance(c_fe));
    merge_verdict(rep, "delta_e_zero_when_offdiagonal2_invariant_sa",
                  v6 <= tol, v6);
  }
}

inline void check_lemma_2_1(Report& rep, const BuiltProblem& b) {
  const TRO& x = *b.tro;
  double tol = b.tol;
  DerivationSpace dtro = tro_derivation_space(x, tol);
  LinkingAlgebra link = linking_algebra(x, b.file.options.unitize, tol);
  double worst_star = 0.0, worst_leib = 0.0, worst_ext = 0.0, worst_wd = 0.0,
         worst_solve = 0.0;
  bool bounds_hold = true;
  for (Eigen::Index s = 0; s < dtro.dim(); ++s) {
    auto ext = extend_to_linking(x, dtro.ops[s], tol, 3,
                                 0x5eed02 + static_cast<std::uint64_t>(s),
                                 &link);
    worst_star = std::max(worst_star, ext.star_residual);
    worst_leib = std::max(worst_leib, ext.leibniz_residual);
    worst_ext = std::max(worst_ext, ext.extend_residual);
    worst_wd = std::max(worst_wd, ext.welldef_residual);
    worst_solve = std::max(worst_solve, ext.solve_residual);
    for (const auto& bd : ext.bounds) bounds_hold = bounds_hold && bd.holds;
    rep.results["dimensions"]["relation_space"] = ext.relation_dim;
  }
  merge_verdict(rep, "extension_is_star_derivation",
                std::max(worst_star, worst_leib) <= 1e-9,
                std::max(worst_star, worst_leib));
  merge_verdict(rep, "extension_restricts_to_d", worst_ext <= 1e-9, worst_ext);
  merge_verdict(rep, "well_defined_on_factorizations", worst_wd <= 1e-9,
                worst_wd);
  merge_verdict(rep, "solve_consistent", worst_solve <= 1e-9, worst_solve);
  merge_verdict(rep, "norm_bound_holds", bounds_hold, bounds_hold ? 0.0 : 1.0);

  // Surjectivity of the restriction onto the corner of the linking algebra.
  Projection ecorner = certify_projection(link.algebra, link.left_corner, 1e-7);
  RestrictionReport rr = restriction_delta(link.algebra, ecorner, tol);
  merge_verdict(rep, "restriction_surjective", rr.surjective,
                rr.surjective ? 0.0 : 1.0);
  rep.results["dimensions"]["d_tro_real"] = dtro.dim();
  rep.results["dimensions"]["linking_algebra"] = link.algebra.dim();
}

inline void check_thm_2_2(Report& rep, const BuiltProblem& b) {
  const TRO& x = *b.tro;
  DerivationSpace dtro = tro_derivation_space(x, b.tol);
  SpatialContext ctx = make_spatial_context(x);
  double worst_res = 0.0, worst_skew = 0.0, worst_member = 0.0;
  for (const auto& op : dtro.ops) {
    SpatialWitness w = spatial_decompose(x, op, b.tol, &ctx);
    worst_res = std::max(worst_res, w.residual);
    worst_skew = std::max(worst_skew, w.skew_residual);
    worst_member = std::max(
        worst_member,
        std::max(membership(w.alpha, ctx.left_bicommutant, 1.0).residual,
                 membership(w.beta, ctx.right_bicommutant, 1.0).residual));
  }
  merge_verdict(rep, "spatial_reconstruction", worst_res <= 1e-9, worst_res);
  merge_verdict(rep, "witness_skew", worst_skew <= 1e-10, worst_skew);
  merge_verdict(rep, "witness_in_bicommutants", worst_member <= 1e-8,
                worst_member);
  rep.results["dimensions"]["d_tro_real"] = dtro.dim();
}

inline void check_prop_2_4(Report& rep, const BuiltProblem& b) {
  const TRO& x = *b.tro;
  DerivationSpace dtro = tro_derivation_space(x, b.tol);
  DerivationSpace dtriple = triple_derivation_space(x, b.tol);
  InnerSpace itro = inner_tro_space(x);
  InnerSpace itriple = inner_triple_space(x);

  double m1 = mutual_membership_residual(dtro, dtriple);
  merge_verdict(rep, "tro_equals_triple_derivations", m1 <= 1e-8, m1);
  double m2 = mutual_membership_residual(itro.space, itriple.space);
  merge_verdict(rep, "inner_tro_equals_inner_triple", m2 <= 1e-8, m2);
  rep.results["dimensions"]["d_tro_real"] = dtro.dim();
  rep.results["dimensions"]["d_triple_real"] = dtriple.dim();
  rep.results["dimensions"]["inner_real"] = itro.space.dim();

  // Round trips between the two inner forms.
  double worst = 0.0;
  Rng rng(0x24);
  if (!itro.alpha_basis.empty() || !itro.beta_basis.empty()) {
    CMat alpha = CMat::Zero(x.h(), x.h()), beta = CMat::Zero(x.k(), x.k());
    for (const auto& ab : itro.alpha_basis) alpha += rng.gaussian() * ab;
    for (const auto& bb : itro.beta_basis) beta += rng.gaussian() * bb;
    CMat target = left_right_operator(x.carrier, alpha, beta, 1e-7);
    auto pairs = inner_tro_to_triple(x, alpha, beta, b.tol);
    CMat recon = CMat::Zero(x.dim(), x.dim());
    for (const auto& [pa, pb] : pairs)
      recon += inner_triple_operator(x.carrier, pa, pb, 1e-7);
    worst = std::max(worst, (recon - target).norm());
    auto form = inner_triple_to_tro(x, pairs, b.tol);
    CMat lr = left_right_operator(x.carrier, form.alpha, form.beta, 1e-7);
    worst = std::max(worst, (lr - target).norm());
  }
  merge_verdict(rep, "inner_conversion_round_trip", worst <= 1e-9, worst);
}

inline void check_lemma_3_1(Report& rep, const BuiltProblem& b) {
  const StarAlgebra& m = *b.algebra;
  if (!m.unital)
    throw HypothesisError("lemma_3_1 needs a unital algebra");
  DerivationSpace dtriple = triple_derivation_space(m, b.tol);
  Rng rng(0x31);
  std::vector<double> scalars;
  double worst_fit = 0.0;
  int instances = 0;
  for (int t = 0; t < 12 && instances < 10; ++t) {
    CMat delta = seeded_combo(dtriple, rng);
    if (delta.norm() < 1e-12) continue;
    auto js = jordan_split(m, delta, b.tol);
    if (!js.scalar_defined) continue;
    scalars.push_back(js.scalar);
    worst_fit = std::max(worst_fit, js.fit_residual);
    ++instances;
  }
  merge_verdict(rep, "scalar_fit", instances > 0 && worst_fit <= 1e-9,
                worst_fit);
  double mean = 0.0, var = 0.0;
  for (double s : scalars) mean += s;
  if (!scalars.empty()) mean /= static_cast<double>(scalars.size());
  for (double s : scalars) var += (s - mean) * (s - mean);
  if (!scalars.empty()) var /= static_cast<double>(scalars.size());
  merge_verdict(rep, "scalar_constant_across_instances", var <= 1e-9, var);
  rep.results["scalars"]["fitted_scalar"] = mean;
  rep.results["scalars"]["paper_stated_scalar"] = -0.25;
  rep.results["dimensions"]["instances"] = instances;
}

inline void check_thm_3_2(Report& rep, const BuiltProblem& b) {
  const StarAlgebra& m = *b.algebra;
  if (!m.unital) throw HypothesisError("thm_3_2 needs a unital algebra");
  DerivationSpace dtriple = triple_derivation_space(m, b.tol);
  InnerSpace itriple = inner_triple_space(m);
  double mm = mutual_membership_residual(dtriple, itriple.space);
  merge_verdict(rep, "triple_derivations_equal_inner_span", mm <= 1e-8, mm);
  double worst = 0.0;
  Eigen::Index max_pairs = 0;
  for (const auto& op : dtriple.ops) {
    auto w = innerness_witness_vn(m, op, b.tol);
    worst = std::max(worst, w.residual);
    max_pairs = std::max(max_pairs,
                         static_cast<Eigen::Index>(w.pairs.size()));
  }
  merge_verdict(rep, "witness_reconstructs_basis", worst <= 1e-9, worst);
  rep.results["dimensions"]["d_triple_real"] = dtriple.dim();
  rep.results["dimensions"]["inner_triple_real"] = itriple.space.dim();
  rep.results["dimensions"]["max_witness_pairs"] = max_pairs;
}

inline void check_thm_3_4(Report& rep, const BuiltProblem& b) {
  const TRO& x = *b.tro;
  DerivationSpace dtro = tro_derivation_space(x, b.tol);
  InnerSpace itro = inner_tro_space(x);
  double worst = 0.0;
  bool all_inner = true;
  for (const auto& op : dtro.ops) {
    auto res = is_inner(op, itro, 1e-8);
    worst = std::max(worst, res.distance);
    all_inner = all_inner && res.inner;
  }
  merge_verdict(rep, "all_tro_derivations_inner",
                all_inner && dtro.dim() == itro.space.dim(), worst);
  rep.results["dimensions"]["d_tro_real"] = dtro.dim();
  rep.results["dimensions"]["inner_real"] = itro.space.dim();
  rep.results["dimensions"]["outer"] = dtro.dim() - itro.space.dim();
}

inline void check_prop_3_11(Report& rep, const BuiltProblem& b) {
  const TRO& v = *b.tro;
  if (v.summands.empty())
    throw HypothesisError("prop_3_11_finite needs a direct_sum problem");
  DerivationSpace dtro = tro_derivation_space(v, b.tol);
  double worst_block = 0.0, worst_witness = 0.0;
  bool all_inner = true;
  for (const auto& op : dtro.ops) {
    auto rep2 = fiber_restrict(v, op, b.tol);
    worst_block = std::max(worst_block, rep2.block_residual);
    all_inner = all_inner && rep2.inner_on_whole;
    for (const auto& part : rep2.parts) {
      all_inner = all_inner && part.inner;
      worst_witness = std::max(worst_witness, part.witness_residual);
    }
  }
  merge_verdict(rep, "derivations_preserve_summands", worst_block <= 1e-8,
                worst_block);
  merge_verdict(rep, "innerness_restricts_blockwise",
                all_inner && worst_witness <= 1e-8, worst_witness);
  rep.results["dimensions"]["d_tro_real"] = dtro.dim();
  rep.results["dimensions"]["summands"] =
      static_cast<Eigen::Index>(v.summands.size());
}

}  // namespace detail

inline Report run_check(const BuiltProblem& b, const std::string& theorem,
                        const std::string& label) {
  Report rep;
  rep.input = label;
  rep.kind = b.file.kind;
  rep.results["theorem"] = theorem;
  detail::Stopwatch total;

  auto requires_tro = [&]() {
    if (!b.tro) throw HypothesisError(theorem + " needs a TRO-like problem");
  };
  auto requires_algebra = [&]() {
    if (!b.algebra)
      throw HypothesisError(theorem + " needs an algebra problem");
  };

  if (theorem == "lemma_1_4") {
    requires_algebra();
    if (!b.projection)
      throw HypothesisError("lemma_1_4 needs a corner problem with a projection");
    detail::check_lemma_1_4(rep, b);
  } else if (theorem == "lemma_2_1") {
    requires_tro();
    detail::check_lemma_2_1(rep, b);
  } else if (theorem == "thm_2_2") {
    requires_tro();
    detail::check_thm_2_2(rep, b);
  } else if (theorem == "prop_2_4") {
    requires_tro();
    detail::check_prop_2_4(rep, b);
  } else if (theorem == "lemma_3_1") {
    requires_algebra();
    detail::check_lemma_3_1(rep, b);
  } else if (theorem == "thm_3_2") {
    requires_algebra();
    detail::check_thm_3_2(rep, b);
  } else if (theorem == "thm_3_4_iii_1") {
    requires_tro();
    detail::check_thm_3_4(rep, b);
  } else if (theorem == "prop_3_11_finite") {
    requires_tro();
    detail::check_prop_3_11(rep, b);
  } else {
    throw HypothesisError("unknown theorem tag '" + theorem + "'");
  }
  rep.wall_ms["total"] = total.ms();
  return rep;
}

// ---------------------------------------------------------------------------
// cmd_corpus
// ---------------------------------------------------------------------------

struct CorpusResult {
  Report aggregate;
  std::vector<Report> per_file;
  int failures = 0;
};

inline CorpusResult run_corpus(const std::filesystem::path& dir,
                               double global_tol = 1e-9) {
  if (!std::filesystem::is_directory(dir))
    throw ParseError("corpus: not a directory: " + dir.string());
  std::vector<std::filesystem::path> files;
  for (const auto& entry : std::filesystem::directory_iterator(dir))
    if (entry.is_regular_file() && entry.path().extension() == ".json")
      files.push_back(entry.path());
  std::sort(files.begin(), files.end());

  CorpusResult out;
  out.aggregate.input = dir.string();
  out.aggregate.kind = "corpus";
  detail::Stopwatch total;
  int pass_count = 0, fail_count = 0;
  Json per_file = Json::object();
  for (const auto& f : files) {
    std::string name = f.filename().string();
    Json entry = Json::object();
    try {
      std::ifstream in(f);
      Json j = Json::parse(in);
      BuiltProblem b = build_problem(parse_problem(j), global_tol);
      Report dr = run_derivations(b, name);
      bool file_pass = dr.all_pass;
      entry["derivations"] = dr.results;
      Json checks = Json::object();
      for (const auto& tag : applicable_theorems(b)) {
        Report cr = run_check(b, tag, name);
        checks[tag] = cr.results;
        checks[tag]["pass"] = cr.all_pass;
        file_pass = file_pass && cr.all_pass;
      }
      entry["checks"] = checks;
      entry["all_pass"] = file_pass;
      out.per_file.push_back(dr);
      if (file_pass)
        ++pass_count;
      else
        ++fail_count;
    } catch (const std::exception& ex) {
      entry["parse_or_build_error"] = ex.what();
      entry["all_pass"] = false;
      ++fail_count;
    }
    per_file[name] = entry;
  }
  out.aggregate.results["files"] = per_file;
  out.aggregate.results["counts"] =
      Json{{"pass", pass_count}, {"fail", fail_count},
           {"total", pass_count + fail_count}};
  out.aggregate.all_pass = fail_count == 0;
  out.failures = fail_count;
  out.aggregate.wall_ms["total"] = total.ms();
  return out;
}

}  // namespace trolab
