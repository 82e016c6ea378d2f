//! Quasi-bialgebras with preantipode, the p/q calculus, module duals and the
//! finite dual.
//!
//! A quasi-bialgebra is an ordinary algebra `A` with algebra morphisms
//! `Δ: A -> A ⊗ A`, `ε: A -> k` where Δ is coassociative only up to
//! conjugation by an invertible counital `Φ ∈ A^{⊗3}` satisfying the dual
//! 3-cocycle identity. A preantipode is an `S: A -> A` with
//!
//! ```text
//! Σ a₁ S(b a₂) = ε(a) S(b) = Σ S(a₁ b) a₂,   Σ Φ¹ S(Φ²) Φ³ = 1.
//! ```
//!
//! Everything here is finite-dimensional, so the finite dual coalgebra is the
//! full linear dual and the dictionary between right A-modules and left
//! A°-comodules is a pair of transposes.

use std::sync::Arc;

use serde::de::Error as DeError;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::coalg::{check_algebra, Algebra, Coalgebra};
use crate::cqb::{check_preantipode, validate_coquasi, CoquasiBialgebra, Preantipode};
use crate::error::Error;
use crate::exactla::tensor::{apply_cod_slot, convolve_on_power, id, kron_many};
use crate::exactla::{quotient, solve_affine, LinearMap, Scalar, Solution, Subspace};
use crate::report::Report;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct QuasiBialgebra {
    pub algebra: Algebra,
    /// `Δ: A -> A ⊗ A` (`n² × n`).
    pub delta: LinearMap,
    /// `ε: A -> k` (`1 × n`).
    pub counit: LinearMap,
    /// `Φ` as a flat `n³` coordinate vector in `A ⊗ A ⊗ A`.
    pub phi: Vec<Scalar>,
    /// `Φ⁻¹`, solved once and cached.
    pub phi_inv: Vec<Scalar>,
}

impl QuasiBialgebra {
    /// Builds the structure, solving the linear system for `Φ⁻¹` and verifying
    /// it is two-sided.
    pub fn new(
        algebra: Algebra,
        delta: LinearMap,
        counit: LinearMap,
        phi: Vec<Scalar>,
    ) -> Result<QuasiBialgebra, Error> {
        let phi_inv = invert_element(&algebra, &phi, 3)?;
        QuasiBialgebra::with_phi_inv(algebra, delta, counit, phi, phi_inv)
    }

    pub fn with_phi_inv(
        algebra: Algebra,
        delta: LinearMap,
        counit: LinearMap,
        phi: Vec<Scalar>,
        phi_inv: Vec<Scalar>,
    ) -> Result<QuasiBialgebra, Error> {
        let n = algebra.dim;
        delta.same_field(&algebra.mult)?;
        counit.same_field(&algebra.mult)?;
        if delta.cod_dim() != n * n || delta.dom_dim() != n {
            return Err(Error::DimensionMismatch {
                context: "quasi delta",
                expected: n * n,
                got: delta.cod_dim(),
            });
        }
        if counit.cod_dim() != 1 || counit.dom_dim() != n {
            return Err(Error::DimensionMismatch {
                context: "quasi counit",
                expected: n,
                got: counit.dom_dim(),
            });
        }
        for v in [&phi, &phi_inv] {
            if v.len() != n * n * n {
                return Err(Error::DimensionMismatch {
                    context: "quasi phi",
                    expected: n * n * n,
                    got: v.len(),
                });
            }
        }
        Ok(QuasiBialgebra {
            algebra,
            delta,
            counit,
            phi,
            phi_inv,
        })
    }

    pub fn dim(&self) -> usize {
        self.algebra.dim
    }

    pub fn field(&self) -> crate::exactla::Field {
        self.algebra.field()
    }

    /// `1 ⊗ 1 ⊗ … ⊗ 1` in `A^{⊗k}`.
    pub fn unit_power(&self, k: usize) -> Vec<Scalar> {
        let u = self.algebra.unit.column_vec(0);
        let mut out = u.clone();
        for _ in 1..k {
            out = tensor_elems(&out, &u);
        }
        out
    }
}

/// Coordinatewise tensor product of elements `x ∈ A^{⊗j}`, `y ∈ A^{⊗k}`.
pub fn tensor_elems(x: &[Scalar], y: &[Scalar]) -> Vec<Scalar> {
    let mut out = Vec::with_capacity(x.len() * y.len());
    for a in x {
        for b in y {
            out.push(a.mul(b));
        }
    }
    out
}

/// Product of two elements of `A^{⊗k}` (slotwise multiplication).
pub fn power_product(a: &Algebra, x: &[Scalar], y: &[Scalar], k: usize) -> Vec<Scalar> {
    let f = a.field();
    let one = LinearMap::row(f, vec![f.one()]);
    let fx = LinearMap::row(f, x.to_vec());
    let fy = LinearMap::row(f, y.to_vec());
    // products in A^{⊗k} are the convolution fold over the dual coalgebra
    let z = convolve_on_power(&fx, &fy, &a.mult.transpose(), k, &one);
    z.row_slice(0).to_vec()
}

/// Solves `x · e = 1^{⊗k}` for `x` in `A^{⊗k}` and verifies `e · x = 1^{⊗k}`.
pub fn invert_element(a: &Algebra, e: &[Scalar], k: usize) -> Result<Vec<Scalar>, Error> {
    let f = a.field();
    let nk = e.len();
    // right-multiplication-by-e operator on A^{⊗k}
    let mut op = LinearMap::zero(f, nk, nk);
    for j in 0..nk {
        let mut basis = vec![f.zero(); nk];
        basis[j] = f.one();
        let col = power_product(a, &basis, e, k);
        for (i, v) in col.into_iter().enumerate() {
            op.set(i, j, v);
        }
    }
    let one_k = {
        let u = a.unit.column_vec(0);
        let mut out = u.clone();
        for _ in 1..k {
            out = tensor_elems(&out, &u);
        }
        out
    };
    match solve_affine(&op, &one_k)? {
        Solution::Inconsistent => Err(Error::NotInvertible { side: "right" }),
        Solution::Solved { particular, .. } => {
            let left = power_product(a, e, &particular, k);
            if left != one_k {
                return Err(Error::NotInvertible { side: "left" });
            }
            Ok(particular)
        }
    }
}

/// A preantipode candidate for a quasi-bialgebra.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct QuasiPreantipode {
    pub s_map: LinearMap,
}

/// Checks all quasi-bialgebra invariants.
pub fn validate_quasi(a: &QuasiBialgebra) -> Report {
    let n = a.dim();
    let f = a.field();
    let eye = id(f, n);
    let alg = &a.algebra;
    let mut report = check_algebra(alg);

    // Δ and ε are algebra morphisms
    let lhs = a.delta.compose(&alg.mult);
    let dd = a.delta.kron(&a.delta).unwrap();
    let shuffled = crate::exactla::tensor::permute_cod_slots(&dd, &[n, n, n, n], &[0, 2, 1, 3]);
    let half = apply_cod_slot(&shuffled, &[n * n, n, n], 0, &alg.mult);
    let rhs = apply_cod_slot(&half, &[n, n * n], 1, &alg.mult);
    if let Some(idx) = lhs.first_mismatch(&rhs, &[n, n]) {
        report.fail("quasi.delta_multiplicative", idx);
    }
    let lhs = a.delta.compose(&alg.unit);
    if let Some(idx) = lhs.first_mismatch(&alg.unit.kron(&alg.unit).unwrap(), &[1]) {
        report.fail("quasi.delta_unital", idx);
    }
    let lhs = a.counit.compose(&alg.mult);
    if let Some(idx) = lhs.first_mismatch(&a.counit.kron(&a.counit).unwrap(), &[n, n]) {
        report.fail("quasi.counit_multiplicative", idx);
    }
    if !a.counit.compose(&alg.unit).entry(0, 0).is_one() {
        report.fail("quasi.counit_unital", vec![0]);
    }

    // counitality of Δ
    let left = a.counit.kron(&eye).unwrap().compose(&a.delta);
    if let Some(idx) = left.first_mismatch(&eye, &[n]) {
        report.fail("quasi.delta_counital_left", idx);
    }
    let right = eye.kron(&a.counit).unwrap().compose(&a.delta);
    if let Some(idx) = right.first_mismatch(&eye, &[n]) {
        report.fail("quasi.delta_counital_right", idx);
    }

    // quasi-coassociativity: Φ·(Δ⊗A)Δ(x) = (A⊗Δ)Δ(x)·Φ per basis x
    let d_left = a.delta.kron(&eye).unwrap().compose(&a.delta);
    let d_right = eye.kron(&a.delta).unwrap().compose(&a.delta);
    for x in 0..n {
        let lhs = power_product(alg, &a.phi, &d_left.column_vec(x), 3);
        let rhs = power_product(alg, &d_right.column_vec(x), &a.phi, 3);
        if lhs != rhs {
            report.fail("quasi.coassociativity", vec![x]);
            break;
        }
    }

    // Φ and Φ⁻¹ counital in every slot
    let phi_col = LinearMap::column(f, a.phi.clone());
    let phi_inv_col = LinearMap::column(f, a.phi_inv.clone());
    let one2 = tensor_elems(&alg.unit.column_vec(0), &alg.unit.column_vec(0));
    for (name, col) in [("phi.counital", &phi_col), ("phi_inv.counital", &phi_inv_col)] {
        for slot in 0..3 {
            let contracted = apply_cod_slot(col, &[n, n, n], slot, &a.counit);
            if contracted.column_vec(0) != one2 {
                report.fail(name, vec![slot]);
            }
        }
    }

    // Φ invertible with the stored inverse, two-sided
    let one3 = a.unit_power(3);
    if power_product(alg, &a.phi, &a.phi_inv, 3) != one3 {
        report.fail("phi.inverse_right", vec![]);
    }
    if power_product(alg, &a.phi_inv, &a.phi, 3) != one3 {
        report.fail("phi.inverse_left", vec![]);
    }

    // dual 3-cocycle: (1⊗Φ)·(A⊗Δ⊗A)(Φ)·(Φ⊗1) = (A⊗A⊗Δ)(Φ)·(Δ⊗A⊗A)(Φ)
    let one1 = alg.unit.column_vec(0);
    let lhs = {
        let t1 = tensor_elems(&one1, &a.phi);
        let t2 = apply_cod_slot(&phi_col, &[n, n, n], 1, &a.delta).column_vec(0);
        let t3 = tensor_elems(&a.phi, &one1);
        power_product(alg, &power_product(alg, &t1, &t2, 4), &t3, 4)
    };
    let rhs = {
        let t1 = apply_cod_slot(&phi_col, &[n, n, n], 2, &a.delta).column_vec(0);
        let t2 = apply_cod_slot(&phi_col, &[n, n, n], 0, &a.delta).column_vec(0);
        power_product(alg, &t1, &t2, 4)
    };
    if lhs != rhs {
        report.fail("phi.cocycle", vec![]);
    }

    if a.phi == a.unit_power(3) {
        report.flag("ordinary_bialgebra");
    }
    report
}

/// Verifies the quasi preantipode axioms
/// `Σ a₁S(ba₂) = ε(a)S(b) = Σ S(a₁b)a₂` and `Σ Φ¹S(Φ²)Φ³ = 1`.
pub fn check_quasi_preantipode(a: &QuasiBialgebra, s: &QuasiPreantipode) -> Report {
    let n = a.dim();
    let alg = &a.algebra;
    let mut report = Report::new();
    if s.s_map.cod_dim() != n || s.s_map.dom_dim() != n {
        report.fail("quasi_preantipode.shape", vec![]);
        return report;
    }
    let el = |k: usize| -> Vec<Scalar> {
        let mut v = vec![a.field().zero(); n];
        v[k] = a.field().one();
        v
    };

    'ax1: for x in 0..n {
        for b in 0..n {
            let mut lhs = vec![a.field().zero(); n];
            for rs in 0..n * n {
                let d = a.delta.entry(rs, x);
                if d.is_zero() {
                    continue;
                }
                let (r, s_idx) = (rs / n, rs % n);
                let ba2 = alg.product(&el(b), &el(s_idx));
                let sba2 = s.s_map.apply(&ba2);
                let term = alg.product(&el(r), &sba2);
                for (i, t) in term.into_iter().enumerate() {
                    lhs[i] = lhs[i].add(&d.mul(&t));
                }
            }
            let rhs: Vec<Scalar> = s
                .s_map
                .column_vec(b)
                .into_iter()
                .map(|v| v.mul(a.counit.entry(0, x)))
                .collect();
            if lhs != rhs {
                report.fail("quasi_preantipode.axiom1", vec![x, b]);
                break 'ax1;
            }
        }
    }

    'ax2: for x in 0..n {
        for b in 0..n {
            let mut lhs = vec![a.field().zero(); n];
            for rs in 0..n * n {
                let d = a.delta.entry(rs, x);
                if d.is_zero() {
                    continue;
                }
                let (r, s_idx) = (rs / n, rs % n);
                let a1b = alg.product(&el(r), &el(b));
                let sa1b = s.s_map.apply(&a1b);
                let term = alg.product(&sa1b, &el(s_idx));
                for (i, t) in term.into_iter().enumerate() {
                    lhs[i] = lhs[i].add(&d.mul(&t));
                }
            }
            let rhs: Vec<Scalar> = s
                .s_map
                .column_vec(b)
                .into_iter()
                .map(|v| v.mul(a.counit.entry(0, x)))
                .collect();
            if lhs != rhs {
                report.fail("quasi_preantipode.axiom2", vec![x, b]);
                break 'ax2;
            }
        }
    }

    // Σ Φ¹ S(Φ²) Φ³ = 1
    let mut acc = vec![a.field().zero(); n];
    for c1 in 0..n {
        for c2 in 0..n {
            for c3 in 0..n {
                let w = &a.phi[(c1 * n + c2) * n + c3];
                if w.is_zero() {
                    continue;
                }
                let s2 = s.s_map.column_vec(c2);
                let term = alg.product(&alg.product(&el(c1), &s2), &el(c3));
                for (i, t) in term.into_iter().enumerate() {
                    acc[i] = acc[i].add(&w.mul(&t));
                }
            }
        }
    }
    if acc != alg.unit.column_vec(0) {
        report.fail("quasi_preantipode.axiom3", vec![]);
    }
    report
}

/// Outcome of the quasi preantipode solve.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum QuasiPreantipodeOutcome {
    Unique(QuasiPreantipode),
    None,
    NonUnique { nullspace_dim: usize },
}

impl QuasiPreantipodeOutcome {
    pub fn unique(self) -> Option<QuasiPreantipode> {
        match self {
            QuasiPreantipodeOutcome::Unique(p) => Some(p),
            _ => None,
        }
    }
}

/// Solves the quasi preantipode axioms as one exact linear system (axiom
/// families stacked in order, basis order within each).
pub fn solve_quasi_preantipode(a: &QuasiBialgebra) -> QuasiPreantipodeOutcome {
    let n = a.dim();
    let f = a.field();
    let alg = &a.algebra;
    let rows = 2 * n * n * n + n;
    let mut sys = LinearMap::zero(f, rows, n * n);
    let mut rhs = vec![f.zero(); rows];

    // axiom 1, rows (x, b, p): Σ_{r,s} Δ[(r,s)][x] m[j][(b,s)] m[p][(r,i)] − ε(x)[j=b][p=i]
    for x in 0..n {
        for rs in 0..n * n {
            let d = a.delta.entry(rs, x);
            if d.is_zero() {
                continue;
            }
            let (r, ss) = (rs / n, rs % n);
            for b in 0..n {
                for j in 0..n {
                    let m1 = alg.mult.entry(j, b * n + ss);
                    if m1.is_zero() {
                        continue;
                    }
                    let dm = d.mul(m1);
                    for i in 0..n {
                        for p in 0..n {
                            let m2 = alg.mult.entry(p, r * n + i);
                            if m2.is_zero() {
                                continue;
                            }
                            sys.add_to((x * n + b) * n + p, i * n + j, &dm.mul(m2));
                        }
                    }
                }
            }
        }
        let e = a.counit.entry(0, x).clone();
        if !e.is_zero() {
            for b in 0..n {
                for p in 0..n {
                    sys.add_to((x * n + b) * n + p, p * n + b, &e.neg());
                }
            }
        }
    }

    // axiom 2, rows (x, b, p): Σ_{r,s} Δ[(r,s)][x] m[j][(r,b)] m[p][(i,s)] − ε(x)[j=b][p=i]
    let base2 = n * n * n;
    for x in 0..n {
        for rs in 0..n * n {
            let d = a.delta.entry(rs, x);
            if d.is_zero() {
                continue;
            }
            let (r, ss) = (rs / n, rs % n);
            for b in 0..n {
                for j in 0..n {
                    let m1 = alg.mult.entry(j, r * n + b);
                    if m1.is_zero() {
                        continue;
                    }
                    let dm = d.mul(m1);
                    for i in 0..n {
                        for p in 0..n {
                            let m2 = alg.mult.entry(p, i * n + ss);
                            if m2.is_zero() {
                                continue;
                            }
                            sys.add_to(base2 + (x * n + b) * n + p, i * n + j, &dm.mul(m2));
                        }
                    }
                }
            }
        }
        let e = a.counit.entry(0, x).clone();
        if !e.is_zero() {
            for b in 0..n {
                for p in 0..n {
                    sys.add_to(base2 + (x * n + b) * n + p, p * n + b, &e.neg());
                }
            }
        }
    }

    // axiom 3, rows p: Σ_{c1,c3} Φ[(c1,j,c3)] (e_{c1} e_i e_{c3})_p = 1_p
    let base3 = 2 * n * n * n;
    for c1 in 0..n {
        for j in 0..n {
            for c3 in 0..n {
                let w = &a.phi[(c1 * n + j) * n + c3];
                if w.is_zero() {
                    continue;
                }
                for i in 0..n {
                    let mut e_i = vec![f.zero(); n];
                    e_i[i] = f.one();
                    let mut e_c1 = vec![f.zero(); n];
                    e_c1[c1] = f.one();
                    let mut e_c3 = vec![f.zero(); n];
                    e_c3[c3] = f.one();
                    let prod = alg.product(&alg.product(&e_c1, &e_i), &e_c3);
                    for (p, v) in prod.into_iter().enumerate() {
                        if !v.is_zero() {
                            sys.add_to(base3 + p, i * n + j, &w.mul(&v));
                        }
                    }
                }
            }
        }
    }
    for (p, v) in a.algebra.unit.column_vec(0).into_iter().enumerate() {
        rhs[base3 + p] = v;
    }

    match solve_affine(&sys, &rhs).expect("system dims consistent") {
        Solution::Inconsistent => QuasiPreantipodeOutcome::None,
        Solution::Solved {
            particular,
            nullspace,
        } => {
            if nullspace.dim() > 0 {
                return QuasiPreantipodeOutcome::NonUnique {
                    nullspace_dim: nullspace.dim(),
                };
            }
            let s_map = LinearMap::from_fn(f, n, n, |i, j| particular[i * n + j].clone());
            QuasiPreantipodeOutcome::Unique(QuasiPreantipode { s_map })
        }
    }
}

/// The elements `p = Σ φ¹ ⊗ φ²(φ³ ⇀ S)` and `q = Σ (S ↼ φ¹)φ² ⊗ φ³`, stored
/// as `n × n × n` coefficient arrays: `p = Σ_x e_x ⊗ P_x`, `q = Σ_x Q_x ⊗ e_x`
/// with the operator legs as matrices.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PQElements {
    pub p: Vec<LinearMap>,
    pub q: Vec<LinearMap>,
}

/// Assembles p and q from `Φ⁻¹` and `S`:
/// `P_x(a) = Σ φ² S(a φ³)` over terms with `φ¹ = e_x`, and
/// `Q_x(a) = Σ S(a φ¹) φ²` over terms with `φ³ = e_x`.
pub fn compute_pq(a: &QuasiBialgebra, s: &QuasiPreantipode) -> PQElements {
    let n = a.dim();
    let f = a.field();
    let alg = &a.algebra;
    let el = |k: usize| -> Vec<Scalar> {
        let mut v = vec![f.zero(); n];
        v[k] = f.one();
        v
    };
    let mut p = vec![LinearMap::zero(f, n, n); n];
    let mut q = vec![LinearMap::zero(f, n, n); n];
    for c1 in 0..n {
        for c2 in 0..n {
            for c3 in 0..n {
                let w = &a.phi_inv[(c1 * n + c2) * n + c3];
                if w.is_zero() {
                    continue;
                }
                for j in 0..n {
                    // P_{c1} column j: φ² S(e_j φ³)
                    let arg = alg.product(&el(j), &el(c3));
                    let s_arg = s.s_map.apply(&arg);
                    let term = alg.product(&el(c2), &s_arg);
                    for (i, t) in term.into_iter().enumerate() {
                        if !t.is_zero() {
                            p[c1].add_to(i, j, &w.mul(&t));
                        }
                    }
                    // Q_{c3} column j: S(e_j φ¹) φ²
                    let arg = alg.product(&el(j), &el(c1));
                    let s_arg = s.s_map.apply(&arg);
                    let term = alg.product(&s_arg, &el(c2));
                    for (i, t) in term.into_iter().enumerate() {
                        if !t.is_zero() {
                            q[c3].add_to(i, j, &w.mul(&t));
                        }
                    }
                }
            }
        }
    }
    PQElements { p, q }
}

/// The expanded closed forms of p and q:
///
/// ```text
/// Σ p¹ ⊗ p²(a) = Σ φ¹₁ψ¹ ⊗ φ¹₂ψ²Φ¹ S(a φ²ψ³₁Φ²) φ³ψ³₂Φ³
/// Σ q¹(a) ⊗ q² = Σ Φ¹φ¹₁ψ¹ S(Φ²φ¹₂ψ² a) Φ³φ²ψ³₁ ⊗ φ³ψ³₂
/// ```
///
/// returned in the same layout as [`compute_pq`]. The four tensor legs are
/// assembled as one product in `A^{⊗4}` — for p,
/// `W = ((Δ⊗A⊗A)(Φ⁻¹)) · ((A⊗A⊗Δ)(Φ⁻¹) shifted) · (1⊗Φ)` — and the `S`
/// contraction runs over the support of `W`.
pub fn pq_closed_forms(a: &QuasiBialgebra, s: &QuasiPreantipode) -> PQElements {
    let n = a.dim();
    let f = a.field();
    let alg = &a.algebra;
    let el = |k: usize| -> Vec<Scalar> {
        let mut v = vec![f.zero(); n];
        v[k] = f.one();
        v
    };
    let phi_inv_col = LinearMap::column(f, a.phi_inv.clone());
    let one1 = alg.unit.column_vec(0);
    // (φ¹₁, φ¹₂, φ², φ³) and (ψ¹, ψ², ψ³₁, ψ³₂)
    let d_first = apply_cod_slot(&phi_inv_col, &[n, n, n], 0, &a.delta).column_vec(0);
    let d_last = apply_cod_slot(&phi_inv_col, &[n, n, n], 2, &a.delta).column_vec(0);

    // p legs: φ¹₁ψ¹·1 ⊗ φ¹₂ψ²Φ¹ ⊗ φ²ψ³₁Φ² ⊗ φ³ψ³₂Φ³
    let one_phi = tensor_elems(&one1, &a.phi);
    let w_p = power_product(alg, &power_product(alg, &d_first, &d_last, 4), &one_phi, 4);
    // q legs: Φ¹φ¹₁ψ¹ ⊗ Φ²φ¹₂ψ² ⊗ Φ³φ²ψ³₁ ⊗ 1·φ³ψ³₂
    let phi_one = tensor_elems(&a.phi, &one1);
    let w_q = power_product(
        alg,
        &power_product(alg, &phi_one, &d_first, 4),
        &d_last,
        4,
    );

    let mut p = vec![LinearMap::zero(f, n, n); n];
    let mut q = vec![LinearMap::zero(f, n, n); n];
    for (flat, w) in w_p.iter().enumerate() {
        if w.is_zero() {
            continue;
        }
        let w4 = flat % n;
        let w3 = (flat / n) % n;
        let w2 = (flat / (n * n)) % n;
        let w1 = flat / (n * n * n);
        for j in 0..n {
            // w2 · S(e_j · w3) · w4
            let s_arg = s.s_map.apply(&alg.product(&el(j), &el(w3)));
            let term = alg.product(&alg.product(&el(w2), &s_arg), &el(w4));
            for (i, t) in term.into_iter().enumerate() {
                if !t.is_zero() {
                    p[w1].add_to(i, j, &w.mul(&t));
                }
            }
        }
    }
    for (flat, w) in w_q.iter().enumerate() {
        if w.is_zero() {
            continue;
        }
        let w4 = flat % n;
        let w3 = (flat / n) % n;
        let w2 = (flat / (n * n)) % n;
        let w1 = flat / (n * n * n);
        for j in 0..n {
            // w1 · S(w2 · e_j) · w3, last leg w4
            let s_arg = s.s_map.apply(&alg.product(&el(w2), &el(j)));
            let term = alg.product(&alg.product(&el(w1), &s_arg), &el(w3));
            for (i, t) in term.into_iter().enumerate() {
                if !t.is_zero() {
                    q[w4].add_to(i, j, &w.mul(&t));
                }
            }
        }
    }
    PQElements { p, q }
}

/// Verifies the invariance identities
/// `Σ p¹a ⊗ p²(b) = Σ a₁₁p¹ ⊗ a₁₂p²(ba₂)` and
/// `Σ q¹(a) ⊗ bq² = Σ q¹(b₁a)b₂₁ ⊗ q²b₂₂` for all basis pairs.
pub fn check_pq_identities(a: &QuasiBialgebra, pq: &PQElements) -> Report {
    let n = a.dim();
    let f = a.field();
    let alg = &a.algebra;
    let mut report = Report::new();
    let el = |k: usize| -> Vec<Scalar> {
        let mut v = vec![f.zero(); n];
        v[k] = f.one();
        v
    };
    let eye = id(f, n);
    let d_left = a.delta.kron(&eye).unwrap().compose(&a.delta); // a₁₁ ⊗ a₁₂ ⊗ a₂
    let d_right = eye.kron(&a.delta).unwrap().compose(&a.delta); // b₁ ⊗ b₂₁ ⊗ b₂₂

    'p_inv: for aa in 0..n {
        for bb in 0..n {
            let mut lhs = vec![f.zero(); n * n];
            for x in 0..n {
                let leg1 = alg.product(&el(x), &el(aa));
                let leg2 = pq.p[x].column_vec(bb);
                for (u, lv) in leg1.iter().enumerate() {
                    if lv.is_zero() {
                        continue;
                    }
                    for (v, rv) in leg2.iter().enumerate() {
                        if !rv.is_zero() {
                            lhs[u * n + v] = lhs[u * n + v].add(&lv.mul(rv));
                        }
                    }
                }
            }
            let mut rhs = vec![f.zero(); n * n];
            for flat in 0..n * n * n {
                let d = d_left.entry(flat, aa);
                if d.is_zero() {
                    continue;
                }
                let (r, sdx, t) = (flat / (n * n), (flat / n) % n, flat % n);
                for x in 0..n {
                    let leg1 = alg.product(&el(r), &el(x));
                    let inner = alg.product(&el(bb), &el(t));
                    let p_of = pq.p[x].apply(&inner);
                    let leg2 = alg.product(&el(sdx), &p_of);
                    for (u, lv) in leg1.iter().enumerate() {
                        if lv.is_zero() {
                            continue;
                        }
                        let dl = d.mul(lv);
                        for (v, rv) in leg2.iter().enumerate() {
                            if !rv.is_zero() {
                                rhs[u * n + v] = rhs[u * n + v].add(&dl.mul(rv));
                            }
                        }
                    }
                }
            }
            if lhs != rhs {
                report.fail("pq.p_invariant", vec![aa, bb]);
                break 'p_inv;
            }
        }
    }

    'q_inv: for aa in 0..n {
        for bb in 0..n {
            let mut lhs = vec![f.zero(); n * n];
            for x in 0..n {
                let leg1 = pq.q[x].column_vec(aa);
                let leg2 = alg.product(&el(bb), &el(x));
                for (u, lv) in leg1.iter().enumerate() {
                    if lv.is_zero() {
                        continue;
                    }
                    for (v, rv) in leg2.iter().enumerate() {
                        if !rv.is_zero() {
                            lhs[u * n + v] = lhs[u * n + v].add(&lv.mul(rv));
                        }
                    }
                }
            }
            let mut rhs = vec![f.zero(); n * n];
            for flat in 0..n * n * n {
                let d = d_right.entry(flat, bb);
                if d.is_zero() {
                    continue;
                }
                let (r, sdx, t) = (flat / (n * n), (flat / n) % n, flat % n);
                for x in 0..n {
                    let inner = alg.product(&el(r), &el(aa));
                    let q_of = pq.q[x].apply(&inner);
                    let leg1 = alg.product(&q_of, &el(sdx));
                    let leg2 = alg.product(&el(x), &el(t));
                    for (u, lv) in leg1.iter().enumerate() {
                        if lv.is_zero() {
                            continue;
                        }
                        let dl = d.mul(lv);
                        for (v, rv) in leg2.iter().enumerate() {
                            if !rv.is_zero() {
                                rhs[u * n + v] = rhs[u * n + v].add(&dl.mul(rv));
                            }
                        }
                    }
                }
            }
            if lhs != rhs {
                report.fail("pq.q_invariant", vec![aa, bb]);
                break 'q_inv;
            }
        }
    }
    report
}

/// Verifies the recovery formula
/// `S(a) = Σ q¹(1) S(p¹ a q²) p²(1) = Σ S(φ¹) φ² S(ψ¹ a φ³) ψ² S(ψ³)`.
pub fn check_s_recovery(a: &QuasiBialgebra, s: &QuasiPreantipode, pq: &PQElements) -> Report {
    let n = a.dim();
    let f = a.field();
    let alg = &a.algebra;
    let one = alg.unit.column_vec(0);
    let mut report = Report::new();
    let el = |k: usize| -> Vec<Scalar> {
        let mut v = vec![f.zero(); n];
        v[k] = f.one();
        v
    };

    'outer: for aa in 0..n {
        let mut acc = vec![f.zero(); n];
        for x in 0..n {
            for y in 0..n {
                // q¹(1) S(e_x a e_y) p²(1), p¹ = e_x, q² = e_y
                let q1 = pq.q[y].apply(&one);
                let p2 = pq.p[x].apply(&one);
                let mid = s
                    .s_map
                    .apply(&alg.product(&alg.product(&el(x), &el(aa)), &el(y)));
                let term = alg.product(&alg.product(&q1, &mid), &p2);
                for (i, t) in term.into_iter().enumerate() {
                    acc[i] = acc[i].add(&t);
                }
            }
        }
        if acc != s.s_map.column_vec(aa) {
            report.fail("pq.s_recovery", vec![aa]);
            break 'outer;
        }
    }

    let nn = n * n;
    'closed: for aa in 0..n {
        let mut acc = vec![f.zero(); n];
        for phi in 0..n * nn {
            let wf = &a.phi_inv[phi];
            if wf.is_zero() {
                continue;
            }
            let (f1, f2, f3) = (phi / nn, (phi / n) % n, phi % n);
            for psi in 0..n * nn {
                let wp = &a.phi_inv[psi];
                if wp.is_zero() {
                    continue;
                }
                let (p1, p2, p3) = (psi / nn, (psi / n) % n, psi % n);
                let w = wf.mul(wp);
                // S(φ¹) φ² S(ψ¹ a φ³) ψ² S(ψ³)
                let t1 = s.s_map.column_vec(f1);
                let mid = s
                    .s_map
                    .apply(&alg.product(&alg.product(&el(p1), &el(aa)), &el(f3)));
                let t5 = s.s_map.column_vec(p3);
                let term = alg.product(
                    &alg.product(&alg.product(&alg.product(&t1, &el(f2)), &mid), &el(p2)),
                    &t5,
                );
                for (i, t) in term.into_iter().enumerate() {
                    acc[i] = acc[i].add(&w.mul(&t));
                }
            }
        }
        if acc != s.s_map.column_vec(aa) {
            report.fail("pq.s_recovery_closed", vec![aa]);
            break 'closed;
        }
    }
    report
}

/// Verifies anti-multiplicativity
/// `S(ab) = Σ S(φ¹b) φ² S(ψ¹φ³) ψ² S(aψ³)` for all basis pairs.
pub fn check_antimultiplicativity(a: &QuasiBialgebra, s: &QuasiPreantipode) -> Report {
    let n = a.dim();
    let f = a.field();
    let alg = &a.algebra;
    let mut report = Report::new();
    let el = |k: usize| -> Vec<Scalar> {
        let mut v = vec![f.zero(); n];
        v[k] = f.one();
        v
    };
    let nn = n * n;
    'outer: for aa in 0..n {
        for bb in 0..n {
            let lhs = s.s_map.apply(&alg.product(&el(aa), &el(bb)));
            let mut rhs = vec![f.zero(); n];
            for phi in 0..n * nn {
                let wf = &a.phi_inv[phi];
                if wf.is_zero() {
                    continue;
                }
                let (f1, f2, f3) = (phi / nn, (phi / n) % n, phi % n);
                for psi in 0..n * nn {
                    let wp = &a.phi_inv[psi];
                    if wp.is_zero() {
                        continue;
                    }
                    let (p1, p2, p3) = (psi / nn, (psi / n) % n, psi % n);
                    let w = wf.mul(wp);
                    let t1 = s.s_map.apply(&alg.product(&el(f1), &el(bb)));
                    let t3 = s.s_map.apply(&alg.product(&el(p1), &el(f3)));
                    let t5 = s.s_map.apply(&alg.product(&el(aa), &el(p3)));
                    let term = alg.product(
                        &alg.product(&alg.product(&alg.product(&t1, &el(f2)), &t3), &el(p2)),
                        &t5,
                    );
                    for (i, t) in term.into_iter().enumerate() {
                        rhs[i] = rhs[i].add(&w.mul(&t));
                    }
                }
            }
            if lhs != rhs {
                report.fail("antimultiplicativity", vec![aa, bb]);
                break 'outer;
            }
        }
    }
    report
}

/// A finite-dimensional right A-module by its action matrix
/// `μ: M ⊗ A -> M` (`d × (d·n)`).
#[derive(Clone, Debug)]
pub struct RightModule {
    pub algebra: Arc<Algebra>,
    pub dim: usize,
    pub action: LinearMap,
}

impl RightModule {
    pub fn new(algebra: Arc<Algebra>, action: LinearMap) -> Result<RightModule, Error> {
        let d = action.cod_dim();
        action.same_field(&algebra.mult)?;
        if action.dom_dim() != d * algebra.dim {
            return Err(Error::DimensionMismatch {
                context: "right module action",
                expected: d * algebra.dim,
                got: action.dom_dim(),
            });
        }
        Ok(RightModule {
            algebra,
            dim: d,
            action,
        })
    }

    /// The regular module `(A, m)`.
    pub fn regular(algebra: Arc<Algebra>) -> RightModule {
        let action = algebra.mult.clone();
        let dim = algebra.dim;
        RightModule {
            algebra,
            dim,
            action,
        }
    }

    /// The trivial module `k` with `v · a = ε(a) v`.
    pub fn trivial(algebra: Arc<Algebra>, counit: &LinearMap) -> RightModule {
        RightModule {
            algebra,
            dim: 1,
            action: counit.clone(),
        }
    }
}

/// Associativity and unitality of a right action.
pub fn check_right_module(m: &RightModule) -> Report {
    let n = m.algebra.dim;
    let d = m.dim;
    let f = m.action.field();
    let mut report = Report::new();
    let lhs = m
        .action
        .compose(&m.action.kron(&id(f, n)).unwrap());
    let rhs = m
        .action
        .compose(&id(f, d).kron(&m.algebra.mult).unwrap());
    if let Some(idx) = lhs.first_mismatch(&rhs, &[d, n, n]) {
        report.fail("module.associativity", idx);
    }
    let unital = m
        .action
        .compose(&id(f, d).kron(&m.algebra.unit).unwrap());
    if let Some(idx) = unital.first_mismatch(&id(f, d), &[d]) {
        report.fail("module.unital", idx);
    }
    report
}

/// The coaction `ρ(m) = Σᵢ (eⁱ ∘ μ_m) ⊗ eᵢ` over `A° = A*` (finite dimension),
/// H-leg first: `ρ[(f·d + i)][t] = μ[i][(t·n + f)]`.
pub fn module_to_comodule(m: &RightModule) -> LinearMap {
    let n = m.algebra.dim;
    let d = m.dim;
    LinearMap::from_fn(m.action.field(), n * d, d, |row, t| {
        let (ff, i) = (row / d, row % d);
        m.action.entry(i, t * n + ff).clone()
    })
}

/// Inverse dictionary: `μ(m ⊗ a) = Σ m₋₁(a) m₀`.
pub fn comodule_to_module(rho: &LinearMap, n: usize) -> LinearMap {
    let d = rho.dom_dim();
    assert_eq!(rho.cod_dim(), n * d, "coaction shape");
    LinearMap::from_fn(rho.field(), d, d * n, |i, col| {
        let (t, ff) = (col / n, col % n);
        rho.entry(ff * d + i, t).clone()
    })
}

/// A right dual in the module category: `M★ = A⊗M* / A⁺(A⊗M*)` with action
/// `class(a⊗f)·x = class(ax⊗f)`, `ev(m ⊗ class(a⊗f)) = f(m·S(a))` and
/// `db(1) = Σᵢ class(1⊗eⁱ) ⊗ eᵢ`.
#[derive(Clone, Debug)]
pub struct ModuleDualData {
    pub dual: RightModule,
    /// `proj: A⊗M* -> M★`.
    pub proj: LinearMap,
    pub ev: LinearMap,
    pub db: LinearMap,
}

pub fn module_dual(
    m: &RightModule,
    a: &QuasiBialgebra,
    s: &QuasiPreantipode,
) -> Result<ModuleDualData, Error> {
    let n = a.dim();
    let d = m.dim;
    let f = a.field();
    let alg = &a.algebra;
    let fail = |what: &str| Error::Invalid(format!("module_dual: {what}"));

    // relations A⁺·(A ⊗ M*) under the diagonal left action
    // z·(a ⊗ f) = Σ (z₁ a) ⊗ (z₂·f) with (z·f)(m) = f(m·z); this is the
    // module-side mirror of the comodule coinvariants (V*⊗B)^{coB}, and the
    // only reading under which ev(m ⊗ class(a⊗f)) = f(m·S(a)) is well-defined
    let aplus = crate::exactla::nullspace(&a.counit);
    let mut rels = Vec::new();
    for z in aplus.basis() {
        let dz = a.delta.apply(z);
        for x in 0..n {
            for ff in 0..d {
                let mut v = vec![f.zero(); n * d];
                for rs in 0..n * n {
                    let w = &dz[rs];
                    if w.is_zero() {
                        continue;
                    }
                    let (r, ss) = (rs / n, rs % n);
                    // A-leg: e_r · e_x
                    for c in 0..n {
                        let mv = alg.mult.entry(c, r * n + x);
                        if mv.is_zero() {
                            continue;
                        }
                        let wa = w.mul(mv);
                        // M*-leg: (e_s · e^ff)(e_t) = e^ff(e_t · e_s)
                        for t in 0..d {
                            let av = m.action.entry(ff, t * n + ss);
                            if !av.is_zero() {
                                v[c * d + t] = v[c * d + t].add(&wa.mul(av));
                            }
                        }
                    }
                }
                rels.push(v);
            }
        }
    }
    let relations = Subspace::from_spanning(f, n * d, rels);
    let quot = quotient(n * d, &relations)?;
    let dstar = quot.proj.cod_dim();

    // action: class(a⊗f)·x = class(ax⊗f)
    let amb_action = LinearMap::from_fn(f, n * d, n * d * n, |row, col| {
        let (cd, ff) = (row / d, row % d);
        let x = col % n;
        let f2 = (col / n) % d;
        let aa = col / (n * d);
        if ff == f2 {
            alg.mult.entry(cd, aa * n + x).clone()
        } else {
            f.zero()
        }
    });
    let act_star = quot
        .proj
        .compose(&amb_action.compose(&quot.section.kron(&id(f, n)).unwrap()));
    // well-definedness through the quotient
    let lhs = quot.proj.compose(&amb_action);
    let rhs = act_star.compose(&quot.proj.kron(&id(f, n)).unwrap());
    if lhs != rhs {
        return Err(fail("action is not well-defined on the quotient"));
    }
    let dual = RightModule::new(Arc::new(alg.clone()), act_star)?;
    if !check_right_module(&dual).pass {
        return Err(fail("dual action fails the module axioms"));
    }

    // ev(e_t ⊗ (e_a ⊗ e^f)) = (e_t · S(e_a))_f
    let ev_amb = LinearMap::from_fn(f, 1, d * n * d, |_, idx| {
        let ff = idx % d;
        let aa = (idx / d) % n;
        let t = idx / (d * n);
        let mut acc = f.zero();
        for ss in 0..n {
            let sv = s.s_map.entry(ss, aa);
            if sv.is_zero() {
                continue;
            }
            // (e_t · e_s) in M
            let mv = m.action.entry(ff, t * n + ss);
            if !mv.is_zero() {
                acc = acc.add(&sv.mul(mv));
            }
        }
        acc
    });
    let ev = ev_amb.compose(&id(f, d).kron(&quot.section).unwrap());

    // db(1) = Σᵢ class(1 ⊗ eⁱ) ⊗ eᵢ
    let one = alg.unit.column_vec(0);
    let mut db = LinearMap::zero(f, dstar * d, 1);
    for i in 0..d {
        let mut v = vec![f.zero(); n * d];
        for (c, coeff) in one.iter().enumerate() {
            v[c * d + i] = coeff.clone();
        }
        let cls = quot.proj.apply(&v);
        for (t, val) in cls.into_iter().enumerate() {
            db.set(t * d + i, 0, val);
        }
    }

    let data = ModuleDualData {
        dual,
        proj: quot.proj,
        ev,
        db,
    };
    let (z1, z2) = module_zigzags(m, a, &data);
    if !z1.is_identity() {
        return Err(fail("zigzag (ev ⊗ M) a⁻¹ (M ⊗ db) is not the identity"));
    }
    if !z2.is_identity() {
        return Err(fail("zigzag (M★ ⊗ ev) a (db ⊗ M★) is not the identity"));
    }
    Ok(data)
}

/// Right multiplication by `e_c` on a module as a matrix.
fn right_mult(m: &RightModule, c: usize) -> LinearMap {
    let n = m.algebra.dim;
    LinearMap::from_fn(m.action.field(), m.dim, m.dim, |i, t| {
        m.action.entry(i, t * n + c).clone()
    })
}

/// Module-category associator `a((m⊗n)⊗p) = (m⊗(n⊗p))·Φ⁻¹` (or its inverse,
/// with Φ) as a matrix on `M ⊗ N ⊗ P`.
pub fn module_associator(
    m: &RightModule,
    nn: &RightModule,
    p: &RightModule,
    element: &[Scalar],
) -> LinearMap {
    let n = m.algebra.dim;
    let f = m.action.field();
    let dims = m.dim * nn.dim * p.dim;
    let mut out = LinearMap::zero(f, dims, dims);
    for c1 in 0..n {
        for c2 in 0..n {
            for c3 in 0..n {
                let w = &element[(c1 * n + c2) * n + c3];
                if w.is_zero() {
                    continue;
                }
                let r1 = right_mult(m, c1);
                let r2 = right_mult(nn, c2);
                let r3 = right_mult(p, c3);
                let term = kron_many(&[&r1, &r2, &r3]).scale(w);
                out = out.add(&term);
            }
        }
    }
    out
}

/// Both zigzag composites for a module dual candidate, with the Φ-associators.
pub fn module_zigzags(
    m: &RightModule,
    a: &QuasiBialgebra,
    data: &ModuleDualData,
) -> (LinearMap, LinearMap) {
    let f = m.action.field();
    let d = m.dim;
    let dstar = data.dual.dim;
    // (ev ⊗ M) ∘ a⁻¹_{M,M★,M} ∘ (M ⊗ db); a⁻¹ multiplies by Φ
    let a_inv = module_associator(m, &data.dual, m, &a.phi);
    let step = a_inv.compose(&id(f, d).kron(&data.db).unwrap());
    let z1 = apply_cod_slot(&step, &[d * dstar, d], 0, &data.ev);
    // (M★ ⊗ ev) ∘ a_{M★,M,M★} ∘ (db ⊗ M★); a multiplies by Φ⁻¹
    let a_mat = module_associator(&data.dual, m, &data.dual, &a.phi_inv);
    let step = a_mat.compose(&data.db.kron(&id(f, dstar)).unwrap());
    let z2 = apply_cod_slot(&step, &[dstar, d * dstar], 1, &data.ev);
    (z1, z2)
}

/// The finite dual: `A° = A*` with `Δ° = m*`, `ε° = ev₁`, `m° = Δ*`, `u° = ε*`,
/// `ω°(f⊗g⊗h) = Σ f(Φ¹)g(Φ²)h(Φ³)` and `S° = S*`. The output is required to
/// pass [`validate_coquasi`] and [`check_preantipode`]; failures abort.
pub fn finite_dual(
    a: &QuasiBialgebra,
    s: &QuasiPreantipode,
) -> Result<(CoquasiBialgebra, Preantipode), Error> {
    let f = a.field();
    let coalgebra = Coalgebra::new(a.algebra.mult.transpose(), a.algebra.unit.transpose())?;
    let mult = a.delta.transpose();
    let unit = a.counit.transpose();
    let omega = LinearMap::row(f, a.phi.clone());
    let omega_inv = LinearMap::row(f, a.phi_inv.clone());
    let h = CoquasiBialgebra::with_omega_inv(coalgebra, mult, unit, omega, omega_inv)?;
    let report = validate_coquasi(&h);
    if !report.pass {
        return Err(Error::Invalid(format!(
            "finite dual fails coquasi validation: {report}"
        )));
    }
    let p = Preantipode {
        s_map: s.s_map.transpose(),
    };
    let report = check_preantipode(&h, &p);
    if !report.pass {
        return Err(Error::Invalid(format!(
            "finite dual preantipode fails verification: {report}"
        )));
    }
    Ok((h, p))
}

// --- serialization -----------------------------------------------------------

#[derive(Serialize)]
struct QbJsonOut<'a> {
    algebra: &'a Algebra,
    delta: &'a LinearMap,
    counit: Vec<Scalar>,
    phi: &'a Vec<Scalar>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct QbJsonIn {
    algebra: Algebra,
    delta: LinearMap,
    counit: Vec<Scalar>,
    phi: Vec<Scalar>,
    // generator output bundles the preantipode; tolerated on input
    #[serde(rename = "preantipode")]
    _preantipode: Option<serde_json::Value>,
}

impl Serialize for QuasiBialgebra {
    fn serialize<S: Serializer>(&self, ser: S) -> Result<S::Ok, S::Error> {
        QbJsonOut {
            algebra: &self.algebra,
            delta: &self.delta,
            counit: self.counit.row_slice(0).to_vec(),
            phi: &self.phi,
        }
        .serialize(ser)
    }
}

impl<'de> Deserialize<'de> for QuasiBialgebra {
    fn deserialize<D: Deserializer<'de>>(de: D) -> Result<Self, D::Error> {
        let j = QbJsonIn::deserialize(de)?;
        let field = j.algebra.field();
        if j.counit.len() != j.algebra.dim {
            return Err(D::Error::custom("counit length != dim"));
        }
        let counit = LinearMap::row(field, j.counit);
        QuasiBialgebra::new(j.algebra, j.delta, counit, j.phi).map_err(D::Error::custom)
    }
}

#[derive(Serialize, Deserialize)]
struct QuasiPreantipodeJson {
    dim: usize,
    s: LinearMap,
}

impl Serialize for QuasiPreantipode {
    fn serialize<S: Serializer>(&self, ser: S) -> Result<S::Ok, S::Error> {
        QuasiPreantipodeJson {
            dim: self.s_map.dom_dim(),
            s: self.s_map.clone(),
        }
        .serialize(ser)
    }
}

impl<'de> Deserialize<'de> for QuasiPreantipode {
    fn deserialize<D: Deserializer<'de>>(de: D) -> Result<Self, D::Error> {
        let j = QuasiPreantipodeJson::deserialize(de)?;
        if j.s.dom_dim() != j.dim || j.s.cod_dim() != j.dim {
            return Err(D::Error::custom("preantipode matrix is not dim x dim"));
        }
        Ok(QuasiPreantipode { s_map: j.s })
    }
}
