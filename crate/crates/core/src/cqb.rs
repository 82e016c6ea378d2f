//! Coquasi-bialgebras and preantipodes.
//!
//! A coquasi-bialgebra is a coalgebra `(H, Δ, ε)` with coalgebra morphisms
//! `m: H ⊗ H -> H`, `u: k -> H` and a convolution-invertible reassociator
//! `ω: H^{⊗3} -> k` subject to the 3-cocycle condition, quasi-associativity and
//! the normalized unitality `ω(H ⊗ u ⊗ H) = ε ⊗ ε`, `m(u ⊗ H) = id = m(H ⊗ u)`.
//! Only normalized structures are representable here.
//!
//! A preantipode is a linear endomorphism `S` with, for all `h`:
//!
//! ```text
//! Σ S(h₁)₁ h₂ ⊗ S(h₁)₂ = 1 ⊗ S(h)
//! Σ S(h₂)₁ ⊗ h₁ S(h₂)₂ = S(h) ⊗ 1
//! Σ ω(h₁ ⊗ S(h₂) ⊗ h₃)  = ε(h)
//! ```
//!
//! The axioms are linear in `S`, so existence and uniqueness are decided by one
//! exact linear solve.

use serde::de::Error as DeError;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::coalg::{check_coalgebra, convolution_inverse, Algebra, Coalgebra};
use crate::error::Error;
use crate::exactla::tensor::{
    apply_cod_slot, apply_dom_slot, contract_cod, convolve_on_power, id, permute_cod_slots,
};
use crate::exactla::{nullspace, solve_affine, Field, LinearMap, Scalar, Solution, Subspace};
use crate::report::Report;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CoquasiBialgebra {
    pub coalgebra: Coalgebra,
    /// `m: H ⊗ H -> H` (`n × n²`).
    pub mult: LinearMap,
    /// `u: k -> H` (`n × 1`).
    pub unit: LinearMap,
    /// `ω: H^{⊗3} -> k` (`1 × n³`).
    pub omega: LinearMap,
    /// Two-sided convolution inverse of `ω`, computed once and cached.
    pub omega_inv: LinearMap,
}

impl CoquasiBialgebra {
    /// Builds the structure, solving for `ω⁻¹` (fails if `ω` is not
    /// convolution invertible).
    pub fn new(
        coalgebra: Coalgebra,
        mult: LinearMap,
        unit: LinearMap,
        omega: LinearMap,
    ) -> Result<CoquasiBialgebra, Error> {
        let omega_inv = convolution_inverse(&omega, &coalgebra)?;
        CoquasiBialgebra::with_omega_inv(coalgebra, mult, unit, omega, omega_inv)
    }

    /// Builds the structure with a caller-supplied `ω⁻¹` (two-sidedness is
    /// re-verified by [`validate_coquasi`], not here).
    pub fn with_omega_inv(
        coalgebra: Coalgebra,
        mult: LinearMap,
        unit: LinearMap,
        omega: LinearMap,
        omega_inv: LinearMap,
    ) -> Result<CoquasiBialgebra, Error> {
        let n = coalgebra.dim;
        for (ctx, map, cod, dom) in [
            ("coquasi mult", &mult, n, n * n),
            ("coquasi unit", &unit, n, 1),
            ("coquasi omega", &omega, 1, n * n * n),
            ("coquasi omega_inv", &omega_inv, 1, n * n * n),
        ] {
            coalgebra.delta.same_field(map)?;
            if map.cod_dim() != cod || map.dom_dim() != dom {
                return Err(Error::DimensionMismatch {
                    context: ctx,
                    expected: cod * dom,
                    got: map.cod_dim() * map.dom_dim(),
                });
            }
        }
        Ok(CoquasiBialgebra {
            coalgebra,
            mult,
            unit,
            omega,
            omega_inv,
        })
    }

    pub fn dim(&self) -> usize {
        self.coalgebra.dim
    }

    pub fn field(&self) -> Field {
        self.coalgebra.field()
    }

    pub fn delta(&self) -> &LinearMap {
        &self.coalgebra.delta
    }

    pub fn counit(&self) -> &LinearMap {
        &self.coalgebra.counit
    }

    /// The multiplication and unit as an [`Algebra`] carrier (associativity
    /// only holds when `ω` is trivial; still what convolution needs).
    pub fn as_algebra(&self) -> Algebra {
        Algebra {
            dim: self.dim(),
            mult: self.mult.clone(),
            unit: self.unit.clone(),
        }
    }

    /// `ε ⊗ ε ⊗ ε`, the trivial reassociator.
    pub fn trivial_omega(&self) -> LinearMap {
        self.coalgebra.counit_power(3)
    }
}

/// A preantipode candidate; validity is decided by [`check_preantipode`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Preantipode {
    pub s_map: LinearMap,
}

/// Coquasi-antipode data `(s, α, β)` of a coquasi-Hopf algebra.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CoquasiHopfData {
    pub s: LinearMap,
    /// `α: H -> k` (`1 × n`).
    pub alpha: LinearMap,
    /// `β: H -> k` (`1 × n`).
    pub beta: LinearMap,
}

/// Checks every coquasi-bialgebra invariant, reporting each failure with the
/// axiom name and the first offending basis multi-index. A trivial reassociator
/// is flagged `ordinary_bialgebra`.
pub fn validate_coquasi(h: &CoquasiBialgebra) -> Report {
    let n = h.dim();
    let f = h.field();
    let eye = id(f, n);
    let delta = h.delta();
    let eps = h.counit();
    let mut report = check_coalgebra(&h.coalgebra);

    // m is a coalgebra morphism: Δ∘m = (m⊗m)∘σ23∘(Δ⊗Δ), ε∘m = ε⊗ε
    let lhs = delta.compose(&h.mult);
    let dd = delta.kron(delta).unwrap();
    let shuffled = permute_cod_slots(&dd, &[n, n, n, n], &[0, 2, 1, 3]);
    let half = apply_cod_slot(&shuffled, &[n * n, n, n], 0, &h.mult);
    let rhs = apply_cod_slot(&half, &[n, n * n], 1, &h.mult);
    if let Some(idx) = lhs.first_mismatch(&rhs, &[n, n]) {
        report.fail("mult.comultiplicative", idx);
    }
    let lhs = eps.compose(&h.mult);
    if let Some(idx) = lhs.first_mismatch(&h.coalgebra.counit_power(2), &[n, n]) {
        report.fail("mult.counital", idx);
    }

    // u is a coalgebra morphism
    let lhs = delta.compose(&h.unit);
    let rhs = h.unit.kron(&h.unit).unwrap();
    if let Some(idx) = lhs.first_mismatch(&rhs, &[1]) {
        report.fail("unit.comultiplicative", idx);
    }
    let lhs = eps.compose(&h.unit);
    if !lhs.entry(0, 0).is_one() {
        report.fail("unit.counital", vec![0]);
    }

    // normalized unitality (4'): m(u⊗H) = id = m(H⊗u), ω(H⊗u⊗H) = ε⊗ε
    let left = h.mult.compose(&h.unit.kron(&eye).unwrap());
    if let Some(idx) = left.first_mismatch(&eye, &[n]) {
        report.fail("mult.unit_left", idx);
    }
    let right = h.mult.compose(&eye.kron(&h.unit).unwrap());
    if let Some(idx) = right.first_mismatch(&eye, &[n]) {
        report.fail("mult.unit_right", idx);
    }
    let omega_u = apply_dom_slot(&h.omega, &[n, n, n], 1, &h.unit);
    if let Some(idx) = omega_u.first_mismatch(&h.coalgebra.counit_power(2), &[n, n]) {
        report.fail("omega.quasi_unitality", idx);
    }

    // ω⁻¹ really is the two-sided convolution inverse
    let one = LinearMap::row(f, vec![f.one()]);
    let unit3 = h.trivial_omega();
    let prod = convolve_on_power(&h.omega, &h.omega_inv, delta, 3, &one);
    if let Some(idx) = prod.first_mismatch(&unit3, &[n, n, n]) {
        report.fail("omega.inverse_right", idx);
    }
    let prod = convolve_on_power(&h.omega_inv, &h.omega, delta, 3, &one);
    if let Some(idx) = prod.first_mismatch(&unit3, &[n, n, n]) {
        report.fail("omega.inverse_left", idx);
    }

    // 3-cocycle: ω(C⊗C⊗m) ∗ ω(m⊗C⊗C) = (ε⊗ω) ∗ ω(C⊗m⊗C) ∗ (ω⊗ε)
    let t1 = apply_dom_slot(&h.omega, &[n, n, n], 2, &h.mult);
    let t2 = apply_dom_slot(&h.omega, &[n, n, n], 0, &h.mult);
    let lhs = convolve_on_power(&t1, &t2, delta, 4, &one);
    let t3 = eps.kron(&h.omega).unwrap();
    let t4 = apply_dom_slot(&h.omega, &[n, n, n], 1, &h.mult);
    let t5 = h.omega.kron(eps).unwrap();
    let rhs = convolve_on_power(
        &convolve_on_power(&t3, &t4, delta, 4, &one),
        &t5,
        delta,
        4,
        &one,
    );
    if let Some(idx) = lhs.first_mismatch(&rhs, &[n, n, n, n]) {
        report.fail("omega.cocycle", idx);
    }

    // quasi-associativity: m(C⊗m) ∗ ω = ω ∗ m(m⊗C)
    let m_right = apply_dom_slot(&h.mult, &[n, n], 1, &h.mult);
    let m_left = apply_dom_slot(&h.mult, &[n, n], 0, &h.mult);
    let lhs = convolve_on_power(&m_right, &h.omega, delta, 3, &eye);
    let rhs = convolve_on_power(&h.omega, &m_left, delta, 3, &eye);
    if let Some(idx) = lhs.first_mismatch(&rhs, &[n, n, n]) {
        report.fail("quasi_associativity", idx);
    }

    if h.omega == unit3 {
        report.flag("ordinary_bialgebra");
    }
    report
}

/// Verifies the three preantipode axioms exactly, per basis element.
pub fn check_preantipode(h: &CoquasiBialgebra, s: &Preantipode) -> Report {
    let n = h.dim();
    let delta = h.delta();
    let s_map = &s.s_map;
    let mut report = Report::new();
    if s_map.cod_dim() != n || s_map.dom_dim() != n {
        report.fail("preantipode.shape", vec![]);
        return report;
    }
    let delta_s = delta.compose(s_map);

    // axiom 1: Σ S(h₁)₁ h₂ ⊗ S(h₁)₂ = 1 ⊗ S(h)
    let step = apply_cod_slot(delta, &[n, n], 0, &delta_s); // (s1, s2, h2)
    let step = permute_cod_slots(&step, &[n, n, n], &[0, 2, 1]); // (s1, h2, s2)
    let lhs = apply_cod_slot(&step, &[n * n, n], 0, &h.mult);
    let rhs = h.unit.kron(s_map).unwrap();
    if let Some(idx) = lhs.first_mismatch(&rhs, &[n]) {
        report.fail("preantipode.axiom1", idx);
    }

    // axiom 2: Σ S(h₂)₁ ⊗ h₁ S(h₂)₂ = S(h) ⊗ 1
    let step = apply_cod_slot(delta, &[n, n], 1, &delta_s); // (h1, s1, s2)
    let step = permute_cod_slots(&step, &[n, n, n], &[1, 0, 2]); // (s1, h1, s2)
    let lhs = apply_cod_slot(&step, &[n, n * n], 1, &h.mult);
    let rhs = s_map.kron(&h.unit).unwrap();
    if let Some(idx) = lhs.first_mismatch(&rhs, &[n]) {
        report.fail("preantipode.axiom2", idx);
    }

    // axiom 3: Σ ω(h₁ ⊗ S(h₂) ⊗ h₃) = ε(h)
    let d3 = h.coalgebra.delta_power(3);
    let step = apply_cod_slot(&d3, &[n, n, n], 1, s_map);
    let lhs = h.omega.compose(&step);
    if let Some(idx) = lhs.first_mismatch(h.counit(), &[n]) {
        report.fail("preantipode.axiom3", idx);
    }
    report
}

/// Outcome of the preantipode linear solve.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum PreantipodeOutcome {
    Unique(Preantipode),
    /// The axioms are inconsistent: no preantipode exists.
    None,
    /// Solution space has positive dimension — this contradicts uniqueness of
    /// preantipodes and flags invalid input.
    NonUnique { nullspace_dim: usize },
}

impl PreantipodeOutcome {
    pub fn unique(self) -> Option<Preantipode> {
        match self {
            PreantipodeOutcome::Unique(p) => Some(p),
            _ => None,
        }
    }
}

/// Assembles the three axiom families as one linear system in the n² unknown
/// entries of `S` (fixed order: axiom 1, axiom 2, axiom 3, each in basis
/// order) and solves exactly.
pub fn solve_preantipode(h: &CoquasiBialgebra) -> PreantipodeOutcome {
    let (system, rhs) = preantipode_system(h);
    match solve_affine(&system, &rhs).expect("system dims are consistent") {
        Solution::Inconsistent => PreantipodeOutcome::None,
        Solution::Solved {
            particular,
            nullspace,
        } => {
            if nullspace.dim() > 0 {
                return PreantipodeOutcome::NonUnique {
                    nullspace_dim: nullspace.dim(),
                };
            }
            let n = h.dim();
            let f = h.field();
            let s_map = LinearMap::from_fn(f, n, n, |i, j| particular[i * n + j].clone());
            PreantipodeOutcome::Unique(Preantipode { s_map })
        }
    }
}

/// The stacked linear system `(A, b)` whose solutions `x = vec(S)` (row-major,
/// `x[i·n+j] = S[i][j]`) are exactly the preantipodes.
pub fn preantipode_system(h: &CoquasiBialgebra) -> (LinearMap, Vec<Scalar>) {
    let n = h.dim();
    let f = h.field();
    let delta = h.delta();
    let rows = 2 * n * n * n + n;
    let mut a = LinearMap::zero(f, rows, n * n);
    let mut b = vec![f.zero(); rows];

    // axiom 1, rows (h,p,q):
    //   Σ_b Δ[(j,b)][h] Σ_r Δ[(r,q)][i] m[p][(r,b)] - u[p]·[q=i]·[j=h] = 0
    for hh in 0..n {
        for j in 0..n {
            for bb in 0..n {
                let d1 = delta.entry(j * n + bb, hh);
                if d1.is_zero() {
                    continue;
                }
                for i in 0..n {
                    for r in 0..n {
                        for q in 0..n {
                            let d2 = delta.entry(r * n + q, i);
                            if d2.is_zero() {
                                continue;
                            }
                            let d12 = d1.mul(d2);
                            for p in 0..n {
                                let mv = h.mult.entry(p, r * n + bb);
                                if mv.is_zero() {
                                    continue;
                                }
                                let row = hh * n * n + p * n + q;
                                a.add_to(row, i * n + j, &d12.mul(mv));
                            }
                        }
                    }
                }
            }
        }
        for p in 0..n {
            let uv = h.unit.entry(p, 0);
            if uv.is_zero() {
                continue;
            }
            for q in 0..n {
                let row = hh * n * n + p * n + q;
                a.add_to(row, q * n + hh, &uv.neg());
            }
        }
    }

    // axiom 2, rows (h,p,q):
    //   Σ_a Δ[(a,j)][h] Σ_s Δ[(p,s)][i] m[q][(a,s)] - [p=i]·[j=h]·u[q] = 0
    let base2 = n * n * n;
    for hh in 0..n {
        for aa in 0..n {
            for j in 0..n {
                let d1 = delta.entry(aa * n + j, hh);
                if d1.is_zero() {
                    continue;
                }
                for i in 0..n {
                    for p in 0..n {
                        for ss in 0..n {
                            let d2 = delta.entry(p * n + ss, i);
                            if d2.is_zero() {
                                continue;
                            }
                            let d12 = d1.mul(d2);
                            for q in 0..n {
                                let mv = h.mult.entry(q, aa * n + ss);
                                if mv.is_zero() {
                                    continue;
                                }
                                let row = base2 + hh * n * n + p * n + q;
                                a.add_to(row, i * n + j, &d12.mul(mv));
                            }
                        }
                    }
                }
            }
        }
        for q in 0..n {
            let uv = h.unit.entry(q, 0);
            if uv.is_zero() {
                continue;
            }
            for p in 0..n {
                let row = base2 + hh * n * n + p * n + q;
                a.add_to(row, p * n + hh, &uv.neg());
            }
        }
    }

    // axiom 3, row per h: Σ_{a,c} Δ₃[(a,j,c)][h] ω[(a,i,c)] = ε(h)
    let base3 = 2 * n * n * n;
    let d3 = h.coalgebra.delta_power(3);
    for hh in 0..n {
        for flat in 0..n * n * n {
            let dv = d3.entry(flat, hh);
            if dv.is_zero() {
                continue;
            }
            let c = flat % n;
            let j = (flat / n) % n;
            let aa = flat / (n * n);
            for i in 0..n {
                let ov = h.omega.entry(0, (aa * n + i) * n + c);
                if ov.is_zero() {
                    continue;
                }
                a.add_to(base3 + hh, i * n + j, &dv.mul(ov));
            }
        }
        b[base3 + hh] = h.counit().entry(0, hh).clone();
    }

    (a, b)
}

/// `S := β ∗ s ∗ α` (left associated). The result is verified with
/// [`check_preantipode`] before being returned.
pub fn preantipode_from_antipode(
    h: &CoquasiBialgebra,
    q: &CoquasiHopfData,
) -> Result<Preantipode, Error> {
    let n = h.dim();
    let eye = id(h.field(), n);
    let beta_s = convolve_on_power(&q.beta, &q.s, h.delta(), 1, &eye);
    let s_map = convolve_on_power(&beta_s, &q.alpha, h.delta(), 1, &eye);
    let p = Preantipode { s_map };
    let report = check_preantipode(h, &p);
    if !report.pass {
        return Err(Error::Invalid(format!(
            "β∗s∗α fails the preantipode axioms: {report}"
        )));
    }
    Ok(p)
}

/// Checks the coquasi-antipode axioms for `(s, α, β)`.
pub fn validate_coquasi_hopf(h: &CoquasiBialgebra, q: &CoquasiHopfData) -> Report {
    let n = h.dim();
    let delta = h.delta();
    let eps = h.counit();
    let mut report = Report::new();

    // s is an anti-coalgebra endomorphism
    let lhs = delta.compose(&q.s);
    let ss = q.s.kron(&q.s).unwrap().compose(delta);
    let rhs = permute_cod_slots(&ss, &[n, n], &[1, 0]);
    if let Some(idx) = lhs.first_mismatch(&rhs, &[n]) {
        report.fail("antipode.anti_comultiplicative", idx);
    }
    let lhs = eps.compose(&q.s);
    if let Some(idx) = lhs.first_mismatch(eps, &[n]) {
        report.fail("antipode.counit", idx);
    }

    // Σ h₁ β(h₂) s(h₃) = β(h)·1
    let d3 = h.coalgebra.delta_power(3);
    let step = apply_cod_slot(&d3, &[n, n, n], 2, &q.s);
    let step = contract_cod(&step, &[n, n, n], &[1], &q.beta); // (h1, s(h3))
    let lhs = apply_cod_slot(&step, &[n * n], 0, &h.mult);
    let rhs = h.unit.compose(&q.beta);
    if let Some(idx) = lhs.first_mismatch(&rhs, &[n]) {
        report.fail("antipode.axiom_beta", idx);
    }

    // Σ s(h₁) α(h₂) h₃ = α(h)·1
    let step = apply_cod_slot(&d3, &[n, n, n], 0, &q.s);
    let step = contract_cod(&step, &[n, n, n], &[1], &q.alpha);
    let lhs = apply_cod_slot(&step, &[n * n], 0, &h.mult);
    let rhs = h.unit.compose(&q.alpha);
    if let Some(idx) = lhs.first_mismatch(&rhs, &[n]) {
        report.fail("antipode.axiom_alpha", idx);
    }

    // Σ ω(h₁ ⊗ β(h₂) s(h₃) α(h₄) ⊗ h₅) = ε(h)
    let d5 = h.coalgebra.delta_power(5);
    let step = apply_cod_slot(&d5, &[n, n, n, n, n], 2, &q.s);
    let step = contract_cod(&step, &[n, n, n, n, n], &[1], &q.beta); // (h1, s3, h4, h5)
    let step = contract_cod(&step, &[n, n, n, n], &[2], &q.alpha); // (h1, s3, h5)
    let lhs = h.omega.compose(&step);
    if let Some(idx) = lhs.first_mismatch(eps, &[n]) {
        report.fail("antipode.axiom_omega", idx);
    }

    // Σ ω⁻¹(s(h₁) ⊗ α(h₂) h₃ β(h₄) ⊗ s(h₅)) = ε(h)
    let step = apply_cod_slot(&d5, &[n, n, n, n, n], 0, &q.s);
    let step = apply_cod_slot(&step, &[n, n, n, n, n], 4, &q.s);
    let step = contract_cod(&step, &[n, n, n, n, n], &[1], &q.alpha); // (s1, h3, h4, s5)
    let step = contract_cod(&step, &[n, n, n, n], &[2], &q.beta); // (s1, h3, s5)
    let lhs = h.omega_inv.compose(&step);
    if let Some(idx) = lhs.first_mismatch(eps, &[n]) {
        report.fail("antipode.axiom_omega_inv", idx);
    }
    report
}

/// Checks that `f: H -> L` is a morphism of coquasi-bialgebras, and when both
/// preantipodes are supplied additionally verifies `f ∘ S_H = S_L ∘ f`.
pub fn check_morphism(
    f: &LinearMap,
    h: &CoquasiBialgebra,
    l: &CoquasiBialgebra,
    s_h: Option<&Preantipode>,
    s_l: Option<&Preantipode>,
) -> Report {
    let nh = h.dim();
    let nl = l.dim();
    let mut report = Report::new();
    if f.dom_dim() != nh || f.cod_dim() != nl {
        report.fail("morphism.shape", vec![]);
        return report;
    }

    let lhs = l.delta().compose(f);
    let rhs = f.kron(f).unwrap().compose(h.delta());
    if let Some(idx) = lhs.first_mismatch(&rhs, &[nh]) {
        report.fail("morphism.comultiplicative", idx);
    }
    let lhs = l.counit().compose(f);
    if let Some(idx) = lhs.first_mismatch(h.counit(), &[nh]) {
        report.fail("morphism.counital", idx);
    }
    let lhs = l.mult.compose(&f.kron(f).unwrap());
    let rhs = f.compose(&h.mult);
    if let Some(idx) = lhs.first_mismatch(&rhs, &[nh, nh]) {
        report.fail("morphism.multiplicative", idx);
    }
    let lhs = f.compose(&h.unit);
    if let Some(idx) = lhs.first_mismatch(&l.unit, &[1]) {
        report.fail("morphism.unital", idx);
    }
    let step = apply_dom_slot(&l.omega, &[nl, nl, nl], 0, f);
    let step = apply_dom_slot(&step, &[nh, nl, nl], 1, f);
    let lhs = apply_dom_slot(&step, &[nh, nh, nl], 2, f);
    if let Some(idx) = lhs.first_mismatch(&h.omega, &[nh, nh, nh]) {
        report.fail("morphism.omega", idx);
    }
    if let (Some(sh), Some(sl)) = (s_h, s_l) {
        let lhs = f.compose(&sh.s_map);
        let rhs = sl.s_map.compose(f);
        if let Some(idx) = lhs.first_mismatch(&rhs, &[nh]) {
            report.fail("morphism.preantipode", idx);
        }
    }
    report
}

/// Checks `Σ h₁S(h₂) = εS(h)·1 = Σ S(h₁)h₂` and
/// `Σ ω⁻¹(S(h₁) ⊗ h₂ ⊗ S(h₃)) = εS(h)`; flags `ordinary_antipode` when
/// `ε∘S = ε`.
pub fn epsilon_s_identities(h: &CoquasiBialgebra, s: &Preantipode) -> Report {
    let n = h.dim();
    let delta = h.delta();
    let mut report = Report::new();
    let eps_s = h.counit().compose(&s.s_map);
    let mid = h.unit.compose(&eps_s);

    let step = apply_cod_slot(delta, &[n, n], 1, &s.s_map);
    let lhs = apply_cod_slot(&step, &[n * n], 0, &h.mult);
    if let Some(idx) = lhs.first_mismatch(&mid, &[n]) {
        report.fail("epsilon_s.left", idx);
    }
    let step = apply_cod_slot(delta, &[n, n], 0, &s.s_map);
    let rhs = apply_cod_slot(&step, &[n * n], 0, &h.mult);
    if let Some(idx) = rhs.first_mismatch(&mid, &[n]) {
        report.fail("epsilon_s.right", idx);
    }

    let d3 = h.coalgebra.delta_power(3);
    let step = apply_cod_slot(&d3, &[n, n, n], 0, &s.s_map);
    let step = apply_cod_slot(&step, &[n, n, n], 2, &s.s_map);
    let lhs = h.omega_inv.compose(&step);
    if let Some(idx) = lhs.first_mismatch(&eps_s, &[n]) {
        report.fail("epsilon_s.omega_inv", idx);
    }

    if eps_s == *h.counit() {
        report.flag("ordinary_antipode");
    }
    report
}

/// The materialized pieces of the coquasi-Hopf bicomodule `H ⊗̂ H` and the
/// counit component `ε̂` at it.
pub struct HatEpsilon {
    /// Right coaction `ρʳ(x⊗y) = Σ x₁ ⊗ y₁ ⊗ x₂y₂` on `H ⊗ H`.
    pub rho_right: LinearMap,
    /// The coinvariants `(H ⊗̂ H)^{coH}` as a subspace of `H ⊗ H`.
    pub coinvariants: Subspace,
    /// `ε̂: (H⊗̂H)^{coH} ⊗ H -> H⊗̂H`.
    pub eps_hat: LinearMap,
    /// `ε̂⁻¹: H⊗̂H -> (H⊗̂H)^{coH} ⊗ H`, or `None` when the image fails to land
    /// in the coinvariants (invalid `S` or `H`).
    pub eps_hat_inv: Option<LinearMap>,
}

/// Builds `H ⊗̂ H`, its coinvariants, `ε̂` and `ε̂⁻¹`, and verifies both
/// composites are identities.
pub fn hat_epsilon_roundtrip(h: &CoquasiBialgebra, s: &Preantipode) -> Report {
    let parts = hat_epsilon_parts(h, s);
    let mut report = Report::new();
    let n = h.dim();
    let w = parts.coinvariants.dim();
    let Some(inv) = &parts.eps_hat_inv else {
        report.fail("hat_epsilon.coinvariant_landing", vec![]);
        return report;
    };
    let round = parts.eps_hat.compose(inv);
    if let Some(idx) = round.first_mismatch(&id(h.field(), n * n), &[n, n]) {
        report.fail("hat_epsilon.right_inverse", idx);
    }
    let round = inv.compose(&parts.eps_hat);
    if let Some(idx) = round.first_mismatch(&id(h.field(), w * n), &[w, n]) {
        report.fail("hat_epsilon.left_inverse", idx);
    }
    report
}

/// `ε̂(x⊗y⊗h) = Σ x₁ ⊗ y₁h₁ ω(x₂⊗y₂⊗h₂)` on coinvariant `x⊗y`, and
/// `ε̂⁻¹(x⊗y) = Σ ((x₁ ⊗ S(x₂)) ⊗ x₃)·y
///            = Σ ω⁻¹(S(x₂)₁ ⊗ x₃ ⊗ y₁) (x₁ ⊗ S(x₂)₂) ⊗ x₄y₂`.
pub fn hat_epsilon_parts(h: &CoquasiBialgebra, s: &Preantipode) -> HatEpsilon {
    let n = h.dim();
    let f = h.field();
    let delta = h.delta();
    let eye = id(f, n);

    // ρʳ(x⊗y) = x₁ ⊗ y₁ ⊗ x₂y₂
    let dd = delta.kron(delta).unwrap();
    let shuffled = permute_cod_slots(&dd, &[n, n, n, n], &[0, 2, 1, 3]);
    let rho_right = apply_cod_slot(&shuffled, &[n, n, n * n], 2, &h.mult);

    // coinvariants: kernel of ρʳ - (id ⊗ u)
    let embed_one = id(f, n * n).kron(&h.unit).unwrap();
    let coinvariants = nullspace(&rho_right.sub(&embed_one));

    // action H⊗H⊗H -> H⊗H: (x⊗y⊗h) ↦ Σ x₁ ⊗ y₁h₁ ω(x₂⊗y₂⊗h₂)
    let t = eye.kron(&h.mult).unwrap(); // n² × n³
    let action = convolve_on_power(&t, &h.omega, delta, 3, &id(f, n * n));
    let eps_hat = action.compose(&coinvariants.inclusion().kron(&eye).unwrap());

    // ε̂⁻¹ raw chain on H⊗H
    let d4 = h.coalgebra.delta_power(4);
    let big = d4.kron(delta).unwrap(); // (x1,x2,x3,x4,y1,y2)
    let moved = permute_cod_slots(&big, &[n; 6], &[0, 1, 2, 4, 3, 5]); // (x1,x2,x3,y1,x4,y2)
    // C: (x2,x3,y1) ↦ Σ ω⁻¹(S(x2)₁ ⊗ x3 ⊗ y1) S(x2)₂
    let delta_s = delta.compose(&s.s_map);
    let a = delta_s.kron(&id(f, n * n)).unwrap(); // (s1,s2,x3,y1) from (x2,x3,y1)
    let c = contract_cod(&a, &[n, n, n, n], &[0, 2, 3], &h.omega_inv); // keeps s2
    let step = apply_cod_slot(&moved, &[n, n * n * n, n, n], 1, &c); // (x1, s2, x4, y2)
    let raw = apply_cod_slot(&step, &[n, n, n * n], 2, &h.mult); // (x1, s2, x4·y2)

    // factor the (x1, s2) part through the coinvariants
    let w = coinvariants.dim();
    let mut eps_hat_inv = LinearMap::zero(f, w * n, n * n);
    let mut landed = true;
    'outer: for col in 0..n * n {
        let full = raw.column_vec(col);
        for hh in 0..n {
            let slice: Vec<Scalar> = (0..n * n).map(|m| full[m * n + hh].clone()).collect();
            match coinvariants.coordinates(&slice) {
                Some(coords) => {
                    for (t, v) in coords.into_iter().enumerate() {
                        eps_hat_inv.set(t * n + hh, col, v);
                    }
                }
                None => {
                    landed = false;
                    break 'outer;
                }
            }
        }
    }
    HatEpsilon {
        rho_right,
        coinvariants,
        eps_hat,
        eps_hat_inv: landed.then_some(eps_hat_inv),
    }
}

// --- serialization -----------------------------------------------------------

#[derive(Serialize)]
struct CqbJsonOut<'a> {
    coalgebra: &'a Coalgebra,
    mult: &'a LinearMap,
    unit: Vec<Scalar>,
    omega: Vec<Scalar>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct CqbJsonIn {
    coalgebra: Coalgebra,
    mult: LinearMap,
    unit: Vec<Scalar>,
    omega: Vec<Scalar>,
    // Non-normalized constraint data is rejected with a pointer to the
    // normalization convention rather than a generic unknown-field error.
    l: Option<serde_json::Value>,
    r: Option<serde_json::Value>,
    // Generator output bundles the closed-form preantipode; tolerated (and
    // ignored) so emitted files re-validate on re-ingestion.
    #[serde(rename = "preantipode")]
    _preantipode: Option<serde_json::Value>,
}

impl Serialize for CoquasiBialgebra {
    fn serialize<S: Serializer>(&self, ser: S) -> Result<S::Ok, S::Error> {
        CqbJsonOut {
            coalgebra: &self.coalgebra,
            mult: &self.mult,
            unit: self.unit.column_vec(0),
            omega: self.omega.row_slice(0).to_vec(),
        }
        .serialize(ser)
    }
}

impl<'de> Deserialize<'de> for CoquasiBialgebra {
    fn deserialize<D: Deserializer<'de>>(de: D) -> Result<Self, D::Error> {
        let j = CqbJsonIn::deserialize(de)?;
        if j.l.is_some() || j.r.is_some() {
            return Err(D::Error::custom(Error::NotNormalized));
        }
        let field = j.coalgebra.field();
        let n = j.coalgebra.dim;
        if j.unit.len() != n {
            return Err(D::Error::custom("unit length != dim"));
        }
        if j.omega.len() != n * n * n {
            return Err(D::Error::custom("omega length != dim^3"));
        }
        let unit = LinearMap::column(field, j.unit);
        let omega = LinearMap::row(field, j.omega);
        CoquasiBialgebra::new(j.coalgebra, j.mult, unit, omega).map_err(D::Error::custom)
    }
}

#[derive(Serialize, Deserialize)]
struct PreantipodeJson {
    dim: usize,
    s: LinearMap,
}

impl Serialize for Preantipode {
    fn serialize<S: Serializer>(&self, ser: S) -> Result<S::Ok, S::Error> {
        PreantipodeJson {
            dim: self.s_map.dom_dim(),
            s: self.s_map.clone(),
        }
        .serialize(ser)
    }
}

impl<'de> Deserialize<'de> for Preantipode {
    fn deserialize<D: Deserializer<'de>>(de: D) -> Result<Self, D::Error> {
        let j = PreantipodeJson::deserialize(de)?;
        if j.s.dom_dim() != j.dim || j.s.cod_dim() != j.dim {
            return Err(D::Error::custom("preantipode matrix is not dim x dim"));
        }
        Ok(Preantipode { s_map: j.s })
    }
}

#[derive(Serialize, Deserialize)]
struct CoquasiHopfJson {
    s: LinearMap,
    alpha: Vec<Scalar>,
    beta: Vec<Scalar>,
}

impl Serialize for CoquasiHopfData {
    fn serialize<S: Serializer>(&self, ser: S) -> Result<S::Ok, S::Error> {
        CoquasiHopfJson {
            s: self.s.clone(),
            alpha: self.alpha.row_slice(0).to_vec(),
            beta: self.beta.row_slice(0).to_vec(),
        }
        .serialize(ser)
    }
}

impl<'de> Deserialize<'de> for CoquasiHopfData {
    fn deserialize<D: Deserializer<'de>>(de: D) -> Result<Self, D::Error> {
        let j = CoquasiHopfJson::deserialize(de)?;
        let field = j.s.field();
        Ok(CoquasiHopfData {
            s: j.s,
            alpha: LinearMap::row(field, j.alpha),
            beta: LinearMap::row(field, j.beta),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::zoo::{
        base_change, cyclic_cocycle, gen_group_coquasi, seeded_invertible, trivial_cocycle,
        GroupTable, ZooKind, ZooSpec,
    };

    fn q() -> Field {
        Field::Rational
    }

    /// kZ/2 with ω(x,x,x) = -1: the running example.
    fn z2_sign() -> crate::zoo::GroupCoquasi {
        let c = cyclic_cocycle(q(), 2, &q().from_i64(-1)).unwrap();
        let spec = ZooSpec::new(GroupTable::cyclic(2), c, q(), ZooKind::Coquasi).unwrap();
        gen_group_coquasi(&spec).unwrap()
    }

    fn z2_hopf() -> crate::zoo::GroupCoquasi {
        let spec = ZooSpec::new(
            GroupTable::cyclic(2),
            trivial_cocycle(q(), &GroupTable::cyclic(2)),
            q(),
            ZooKind::Coquasi,
        )
        .unwrap();
        gen_group_coquasi(&spec).unwrap()
    }

    fn one_dim() -> CoquasiBialgebra {
        let spec = ZooSpec::new(
            GroupTable::cyclic(1),
            trivial_cocycle(q(), &GroupTable::cyclic(1)),
            q(),
            ZooKind::Coquasi,
        )
        .unwrap();
        gen_group_coquasi(&spec).unwrap().h
    }

    #[test]
    fn z2_sign_validates() {
        let z = z2_sign();
        let report = validate_coquasi(&z.h);
        assert!(report.pass, "{report}");
        assert!(!report.has_flag("ordinary_bialgebra"));
    }

    #[test]
    fn trivial_omega_flags_ordinary_bialgebra() {
        let z = z2_hopf();
        let report = validate_coquasi(&z.h);
        assert!(report.pass, "{report}");
        assert!(report.has_flag("ordinary_bialgebra"));
    }

    #[test]
    fn unitality_mutation_fails_quasi_unitality() {
        // ω(x, 1, x) = -1 violates the normalized unitality (4')
        let mut z = z2_sign();
        let mut omega = z.h.omega.clone();
        omega.set(0, (1 * 2 + 0) * 2 + 1, q().from_i64(-1));
        z.h.omega = omega;
        let report = validate_coquasi(&z.h);
        assert!(report.failed("omega.quasi_unitality"));
        assert!(!report.pass);
    }

    #[test]
    fn trailing_unit_mutation_trips_the_cocycle_audit() {
        // ω(x, x, 1) = -1 leaves ω(·, u, ·) intact but breaks the 3-cocycle
        // identity (and the inverse pairing against the cached ω⁻¹)
        let mut z = z2_sign();
        let mut omega = z.h.omega.clone();
        omega.set(0, (1 * 2 + 1) * 2 + 0, q().from_i64(-1));
        z.h.omega = omega;
        let report = validate_coquasi(&z.h);
        assert!(!report.pass);
        assert!(report.failed("omega.cocycle"), "{report}");
    }

    #[test]
    fn preantipode_z2_sign_checks_and_solves() {
        let z = z2_sign();
        // S(1) = 1, S(x) = -x
        assert!(z.preantipode.s_map.entry(0, 0).is_one());
        assert_eq!(*z.preantipode.s_map.entry(1, 1), q().from_i64(-1));
        assert!(check_preantipode(&z.h, &z.preantipode).pass);
        let solved = solve_preantipode(&z.h).unique().expect("unique");
        assert_eq!(solved, z.preantipode);
    }

    #[test]
    fn hopf_z2_preantipode_is_identity_matrix() {
        // on Z/2, g ↦ g⁻¹ is the identity permutation
        let z = z2_hopf();
        let solved = solve_preantipode(&z.h).unique().unwrap();
        assert!(solved.s_map.is_identity());
        assert!(check_preantipode(&z.h, &solved).pass);
    }

    #[test]
    fn one_dimensional_preantipode_is_identity() {
        let h = one_dim();
        let solved = solve_preantipode(&h).unique().unwrap();
        assert!(solved.s_map.is_identity());
    }

    #[test]
    fn identity_is_not_a_preantipode_for_nontrivial_omega() {
        let z = z2_sign();
        let s = Preantipode {
            s_map: id(q(), 2),
        };
        let report = check_preantipode(&z.h, &s);
        assert!(report.failed("preantipode.axiom3"));
        assert_eq!(report.failures[0].index, vec![1]);
    }

    #[test]
    fn z4_closed_form_matches_solver() {
        // over F5 with θ = i: S(g^a) = ω(g^a, g^-a, g^a)^{-1} g^{-a}
        let f = Field::fp(5).unwrap();
        let theta = f.root_of_unity(4).unwrap();
        let c = cyclic_cocycle(f, 4, &theta).unwrap();
        let spec = ZooSpec::new(GroupTable::cyclic(4), c, f, ZooKind::Coquasi).unwrap();
        let z = gen_group_coquasi(&spec).unwrap();
        assert!(validate_coquasi(&z.h).pass);
        let solved = solve_preantipode(&z.h).unique().expect("unique");
        assert_eq!(solved, z.preantipode);
        assert!(check_preantipode(&z.h, &solved).pass);
    }

    #[test]
    fn solver_system_matches_checker_on_elementary_matrices() {
        // independent oracle: the system rows evaluated on E_ij must agree with
        // the axiom residuals computed by the checker's matrix chain
        let z = z2_sign();
        let h = &z.h;
        let n = h.dim();
        let (system, rhs) = preantipode_system(h);
        for i in 0..n {
            for j in 0..n {
                let mut e = LinearMap::zero(q(), n, n);
                e.set(i, j, q().one());
                let x: Vec<Scalar> = (0..n * n)
                    .map(|k| e.entry(k / n, k % n).clone())
                    .collect();
                let image = system.apply(&x);

                // axiom residuals via the checker-style chains
                let delta_s = h.delta().compose(&e);
                let step = apply_cod_slot(h.delta(), &[n, n], 0, &delta_s);
                let step = permute_cod_slots(&step, &[n, n, n], &[0, 2, 1]);
                let ax1 = apply_cod_slot(&step, &[n * n, n], 0, &h.mult)
                    .sub(&h.unit.kron(&e).unwrap());
                let step = apply_cod_slot(h.delta(), &[n, n], 1, &delta_s);
                let step = permute_cod_slots(&step, &[n, n, n], &[1, 0, 2]);
                let ax2 = apply_cod_slot(&step, &[n, n * n], 1, &h.mult)
                    .sub(&e.kron(&h.unit).unwrap());
                let d3 = h.coalgebra.delta_power(3);
                let ax3 = h
                    .omega
                    .compose(&apply_cod_slot(&d3, &[n, n, n], 1, &e));

                for hh in 0..n {
                    for p in 0..n {
                        for qq in 0..n {
                            assert_eq!(image[hh * n * n + p * n + qq], *ax1.entry(p * n + qq, hh));
                            assert_eq!(
                                image[n * n * n + hh * n * n + p * n + qq],
                                *ax2.entry(p * n + qq, hh)
                            );
                        }
                    }
                    assert_eq!(image[2 * n * n * n + hh], *ax3.entry(0, hh));
                }
            }
        }
        // rhs carries only the ε column of axiom 3
        for (k, v) in rhs.iter().enumerate() {
            if k < 2 * n * n * n {
                assert!(v.is_zero());
            }
        }
    }

    #[test]
    fn base_changed_zoo_still_validates_and_solves_uniquely() {
        let z = z2_sign();
        let t = seeded_invertible(q(), 2, 7);
        let (hb, sb) = base_change(&z.h, &z.preantipode, &t).unwrap();
        assert!(validate_coquasi(&hb).pass);
        assert!(check_preantipode(&hb, &sb).pass);
        let solved = solve_preantipode(&hb).unique().expect("unique");
        assert_eq!(solved, sb);
    }

    #[test]
    fn coquasi_hopf_data_validates_and_reproduces_preantipode() {
        let z = z2_sign();
        let report = validate_coquasi_hopf(&z.h, &z.hopf_data);
        assert!(report.pass, "{report}");
        let from_hopf = preantipode_from_antipode(&z.h, &z.hopf_data).unwrap();
        assert_eq!(from_hopf, z.preantipode);
        // β(x) = ω(x,x,x)^{-1} = -1, α = ε, s = swap-free inverse
        assert_eq!(*z.hopf_data.beta.entry(0, 1), q().from_i64(-1));
    }

    #[test]
    fn perturbed_beta_fails_hopf_axioms_at_x() {
        // On group-likes Σ h₁β(h₂)s(h₃) = β(h)·1 holds identically in β, so a
        // β perturbation surfaces in the ω-axioms instead — still at basis x.
        let z = z2_sign();
        let mut data = z.hopf_data.clone();
        let mut beta = data.beta.clone();
        beta.set(0, 1, beta.entry(0, 1).add(&q().one()));
        data.beta = beta;
        let report = validate_coquasi_hopf(&z.h, &data);
        assert!(!report.pass);
        assert!(report.failed("antipode.axiom_omega"));
        assert_eq!(report.failures[0].index, vec![1]);
    }

    #[test]
    fn trivial_omega_hopf_data_passes_with_counit_weights() {
        let z = z2_hopf();
        assert!(validate_coquasi_hopf(&z.h, &z.hopf_data).pass);
        assert_eq!(z.hopf_data.alpha, *z.h.counit());
        assert_eq!(z.hopf_data.beta, *z.h.counit());
    }

    #[test]
    fn morphism_identity_and_inversion() {
        let z = z2_sign();
        let s = Some(&z.preantipode);
        let eye = id(q(), 2);
        assert!(check_morphism(&eye, &z.h, &z.h, s, s).pass);
        // g ↦ g⁻¹ is the identity on Z/2, but a group automorphism in general:
        // exercise with the base-changed copy instead
        let t = seeded_invertible(q(), 2, 3);
        let (hb, sb) = base_change(&z.h, &z.preantipode, &t).unwrap();
        let report = check_morphism(&t, &hb, &z.h, Some(&sb), s);
        assert!(report.pass, "{report}");
    }

    #[test]
    fn counit_breaking_map_fails_omega_compatibility() {
        // f(1) = 1, f(x) = 0 into the trivial coquasi-bialgebra k: the
        // ω-compatibility fails at (x,x,x) where ω = -1 meets ω' ∘ f^{⊗3} = 0
        // (and f(x·x) = 1 ≠ 0 = f(x)f(x) breaks multiplicativity at (x,x) too)
        let z = z2_sign();
        let k = one_dim();
        let f_map = LinearMap::from_rows_i64(q(), &[&[1, 0]]);
        let report = check_morphism(&f_map, &z.h, &k, None, None);
        assert!(report.failed("morphism.omega"));
        assert!(report.failed("morphism.counital"));
        assert!(report.failed("morphism.multiplicative"));
        assert!(!report.failed("morphism.unital"));
    }

    #[test]
    fn epsilon_s_values_on_the_running_example() {
        let z = z2_sign();
        let report = epsilon_s_identities(&z.h, &z.preantipode);
        assert!(report.pass, "{report}");
        assert!(!report.has_flag("ordinary_antipode"));
        // εS(x) = -1
        let eps_s = z.h.counit().compose(&z.preantipode.s_map);
        assert_eq!(*eps_s.entry(0, 1), q().from_i64(-1));
    }

    #[test]
    fn epsilon_s_flags_hopf_case() {
        let z = z2_hopf();
        let s = solve_preantipode(&z.h).unique().unwrap();
        let report = epsilon_s_identities(&z.h, &s);
        assert!(report.pass);
        assert!(report.has_flag("ordinary_antipode"));
    }

    #[test]
    fn hat_epsilon_roundtrip_one_dimensional() {
        let h = one_dim();
        let s = solve_preantipode(&h).unique().unwrap();
        let report = hat_epsilon_roundtrip(&h, &s);
        assert!(report.pass, "{report}");
    }

    #[test]
    fn hat_epsilon_roundtrip_z2_sign() {
        let z = z2_sign();
        let parts = hat_epsilon_parts(&z.h, &z.preantipode);
        // coinvariants of H⊗̂H are spanned by x ⊗ x⁻¹: dimension 2
        assert_eq!(parts.coinvariants.dim(), 2);
        let report = hat_epsilon_roundtrip(&z.h, &z.preantipode);
        assert!(report.pass, "{report}");
    }

    #[test]
    fn hat_epsilon_roundtrip_hopf_case() {
        let z = z2_hopf();
        let report = hat_epsilon_roundtrip(&z.h, &z.preantipode);
        assert!(report.pass, "{report}");
    }

    #[test]
    fn json_round_trip_and_l_r_rejection() {
        let z = z2_sign();
        let text = serde_json::to_string_pretty(&z.h).unwrap();
        let back: CoquasiBialgebra = serde_json::from_str(&text).unwrap();
        assert_eq!(back, z.h);
        let with_l = text.trim_end().trim_end_matches('}').to_string()
            + ", \"l\": [\"1\", \"1\"]}";
        let err = serde_json::from_str::<CoquasiBialgebra>(&with_l)
            .unwrap_err()
            .to_string();
        assert!(err.contains("normalized"), "{err}");
    }
}
