//! Coalgebras, algebras and the convolution monoid Hom(C, A).

use serde::de::Error as DeError;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::Error;
use crate::exactla::tensor::{convolve_on_power, id, kron_many};
use crate::exactla::{solve_affine, LinearMap, Field, Scalar, Solution};
use crate::report::Report;

/// A coassociative counital coalgebra by structure constants.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Coalgebra {
    pub dim: usize,
    /// `Δ: C -> C ⊗ C`, an `n² × n` matrix.
    pub delta: LinearMap,
    /// `ε: C -> k`, a `1 × n` matrix.
    pub counit: LinearMap,
}

impl Coalgebra {
    pub fn new(delta: LinearMap, counit: LinearMap) -> Result<Coalgebra, Error> {
        let n = delta.dom_dim();
        delta.same_field(&counit)?;
        if delta.cod_dim() != n * n {
            return Err(Error::DimensionMismatch {
                context: "coalgebra delta codomain",
                expected: n * n,
                got: delta.cod_dim(),
            });
        }
        if counit.dom_dim() != n || counit.cod_dim() != 1 {
            return Err(Error::DimensionMismatch {
                context: "coalgebra counit",
                expected: n,
                got: counit.dom_dim(),
            });
        }
        Ok(Coalgebra {
            dim: n,
            delta,
            counit,
        })
    }

    pub fn field(&self) -> Field {
        self.delta.field()
    }

    /// `ε^{⊗k}`, the convolution unit of scalar maps on the k-th tensor power.
    pub fn counit_power(&self, k: usize) -> LinearMap {
        let maps: Vec<&LinearMap> = (0..k).map(|_| &self.counit).collect();
        kron_many(&maps)
    }

    /// Iterated comultiplication `Δ_k: C -> C^{⊗k}` (leftmost association).
    pub fn delta_power(&self, k: usize) -> LinearMap {
        assert!(k >= 1);
        let f = self.field();
        let mut acc = id(f, self.dim);
        for step in 1..k {
            // apply delta to the first slot of the current C^{⊗step} output
            acc = crate::exactla::tensor::apply_cod_slot(
                &acc,
                &vec![self.dim; step],
                0,
                &self.delta,
            );
        }
        acc
    }

    /// Materialized k-th tensor power coalgebra; test scale only.
    pub fn tensor_power(&self, k: usize) -> Coalgebra {
        let delta = crate::exactla::tensor::tensor_power_delta(&self.delta, k);
        let counit = self.counit_power(k);
        Coalgebra::new(delta, counit).expect("power dims")
    }

    /// Dual algebra at finite dimension: multiplication is the transpose of Δ,
    /// unit the transpose of ε.
    pub fn dual_algebra(&self) -> Algebra {
        Algebra {
            dim: self.dim,
            mult: self.delta.transpose(),
            unit: self.counit.transpose(),
        }
    }
}

/// An associative unital algebra by structure constants.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Algebra {
    pub dim: usize,
    /// `m: A ⊗ A -> A`, an `n × n²` matrix.
    pub mult: LinearMap,
    /// `u: k -> A`, an `n × 1` matrix.
    pub unit: LinearMap,
}

impl Algebra {
    pub fn new(mult: LinearMap, unit: LinearMap) -> Result<Algebra, Error> {
        let n = mult.cod_dim();
        mult.same_field(&unit)?;
        if mult.dom_dim() != n * n {
            return Err(Error::DimensionMismatch {
                context: "algebra mult domain",
                expected: n * n,
                got: mult.dom_dim(),
            });
        }
        if unit.cod_dim() != n || unit.dom_dim() != 1 {
            return Err(Error::DimensionMismatch {
                context: "algebra unit",
                expected: n,
                got: unit.cod_dim(),
            });
        }
        Ok(Algebra { dim: n, mult, unit })
    }

    pub fn field(&self) -> Field {
        self.mult.field()
    }

    pub fn one(&self) -> Vec<Scalar> {
        self.unit.column_vec(0)
    }

    /// Product of two elements given as coordinate vectors.
    pub fn product(&self, a: &[Scalar], b: &[Scalar]) -> Vec<Scalar> {
        let n = self.dim;
        let f = self.field();
        let mut out = vec![f.zero(); n];
        for (i, x) in a.iter().enumerate() {
            if x.is_zero() {
                continue;
            }
            for (j, y) in b.iter().enumerate() {
                if y.is_zero() {
                    continue;
                }
                let xy = x.mul(y);
                for k in 0..n {
                    let c = self.mult.entry(k, i * n + j);
                    if !c.is_zero() {
                        out[k] = out[k].add(&c.mul(&xy));
                    }
                }
            }
        }
        out
    }

    pub fn dual_coalgebra(&self) -> Coalgebra {
        Coalgebra {
            dim: self.dim,
            delta: self.mult.transpose(),
            counit: self.unit.transpose(),
        }
    }
}

/// Checks coassociativity and counitality, reporting the first offending basis
/// index per failed axiom.
pub fn check_coalgebra(c: &Coalgebra) -> Report {
    let f = c.field();
    let n = c.dim;
    let mut report = Report::new();
    let lhs = id(f, n)
        .kron(&c.delta)
        .unwrap()
        .compose(&c.delta);
    let rhs = c.delta.kron(&id(f, n)).unwrap().compose(&c.delta);
    if let Some(idx) = rhs.first_mismatch(&lhs, &[n]) {
        report.fail("coalgebra.coassociativity", idx);
    }
    let left = c.counit.kron(&id(f, n)).unwrap().compose(&c.delta);
    if let Some(idx) = left.first_mismatch(&id(f, n), &[n]) {
        report.fail("coalgebra.counit_left", idx);
    }
    let right = id(f, n).kron(&c.counit).unwrap().compose(&c.delta);
    if let Some(idx) = right.first_mismatch(&id(f, n), &[n]) {
        report.fail("coalgebra.counit_right", idx);
    }
    report
}

/// Checks associativity and unitality.
pub fn check_algebra(a: &Algebra) -> Report {
    let f = a.field();
    let n = a.dim;
    let mut report = Report::new();
    let lhs = a.mult.compose(&a.mult.kron(&id(f, n)).unwrap());
    let rhs = a.mult.compose(&id(f, n).kron(&a.mult).unwrap());
    if let Some(idx) = lhs.first_mismatch(&rhs, &[n, n, n]) {
        report.fail("algebra.associativity", idx);
    }
    let left = a.mult.compose(&a.unit.kron(&id(f, n)).unwrap());
    if let Some(idx) = left.first_mismatch(&id(f, n), &[n]) {
        report.fail("algebra.unit_left", idx);
    }
    let right = a.mult.compose(&id(f, n).kron(&a.unit).unwrap());
    if let Some(idx) = right.first_mismatch(&id(f, n), &[n]) {
        report.fail("algebra.unit_right", idx);
    }
    report
}

/// Convolution product `(f ∗ g) = m ∘ (f ⊗ g) ∘ Δ` of maps `C -> A`.
pub fn convolve(f: &LinearMap, g: &LinearMap, c: &Coalgebra, a: &Algebra) -> Result<LinearMap, Error> {
    f.same_field(&c.delta)?;
    g.same_field(&c.delta)?;
    for (name, m) in [("f", f), ("g", g)] {
        if m.dom_dim() != c.dim || m.cod_dim() != a.dim {
            return Err(Error::DimensionMismatch {
                context: if name == "f" { "convolve f" } else { "convolve g" },
                expected: c.dim,
                got: m.dom_dim(),
            });
        }
    }
    Ok(convolve_on_power(f, g, &c.delta, 1, &a.mult))
}

/// Three-fold convolution `(f ∗ φ ∗ g)(x) = Σ f(x₁) φ(x₂) g(x₃)`, associated
/// on the left.
pub fn convolve_bimodule(
    f: &LinearMap,
    phi: &LinearMap,
    g: &LinearMap,
    c: &Coalgebra,
    a: &Algebra,
) -> Result<LinearMap, Error> {
    let fp = convolve(f, phi, c, a)?;
    convolve(&fp, g, c, a)
}

/// Convolution of a scalar functional with an `H`-valued map (and the mirror
/// order): `(β ∗ s)(x) = Σ β(x₁) s(x₂)`.
pub fn convolve_scalar_left(beta: &LinearMap, s: &LinearMap, c: &Coalgebra) -> LinearMap {
    assert_eq!(beta.cod_dim(), 1);
    let mult = id(s.field(), s.cod_dim());
    convolve_on_power(beta, s, &c.delta, 1, &mult)
}

pub fn convolve_scalar_right(s: &LinearMap, alpha: &LinearMap, c: &Coalgebra) -> LinearMap {
    assert_eq!(alpha.cod_dim(), 1);
    let mult = id(s.field(), s.cod_dim());
    convolve_on_power(s, alpha, &c.delta, 1, &mult)
}

/// Convolution inverse of a functional `f: C^{⊗k} -> k` over the base
/// coalgebra `c` (`k` inferred from the domain of `f`).
///
/// Solves the right-inverse system `f ∗ g = ε^{⊗k}` exactly and then verifies
/// the left identity, reporting which side fails. A consistent system always
/// has a zero-dimensional solution space here (the convolution algebra is
/// finite-dimensional unital, so one-sided inverses are two-sided); this is
/// asserted, not assumed.
pub fn convolution_inverse(f: &LinearMap, c: &Coalgebra) -> Result<LinearMap, Error> {
    f.same_field(&c.delta)?;
    if f.cod_dim() != 1 {
        return Err(Error::DimensionMismatch {
            context: "convolution_inverse functional",
            expected: 1,
            got: f.cod_dim(),
        });
    }
    let n = c.dim;
    let mut k = 0usize;
    let mut pow = 1usize;
    while pow < f.dom_dim() {
        pow *= n;
        k += 1;
    }
    if k == 0 {
        // all powers of a 1-dimensional coalgebra coincide
        k = 1;
    }
    if pow != f.dom_dim() {
        return Err(Error::DimensionMismatch {
            context: "convolution_inverse domain is not a power of dim",
            expected: n,
            got: f.dom_dim(),
        });
    }
    let system = left_convolution_operator(f, &c.delta, k);
    let unit = c.counit_power(k);
    let rhs: Vec<Scalar> = unit.row_slice(0).to_vec();
    match solve_affine(&system, &rhs)? {
        Solution::Inconsistent => Err(Error::NotInvertible { side: "right" }),
        Solution::Solved {
            particular,
            nullspace,
        } => {
            assert_eq!(
                nullspace.dim(),
                0,
                "one-sided convolution inverse must be unique"
            );
            let g = LinearMap::row(f.field(), particular);
            let one = LinearMap::row(f.field(), vec![f.field().one()]);
            let left = convolve_on_power(&g, f, &c.delta, k, &one);
            if left != unit {
                return Err(Error::NotInvertible { side: "left" });
            }
            Ok(g)
        }
    }
}

/// Matrix of `g ↦ f ∗ g` on functionals of the k-th tensor power, assembled by
/// folding Δ one slot at a time (never materializing the power coalgebra).
fn left_convolution_operator(f: &LinearMap, delta: &LinearMap, k: usize) -> LinearMap {
    let field = f.field();
    let n = delta.dom_dim();
    let nk = n.pow(k as u32);
    // state[(j * done_k + kk) * rest + x]: j, kk over n^s, x over n^{k-s}
    let mut state = f.row_slice(0).to_vec();
    let mut done = 1usize;
    let mut rest = nk;
    for _ in 0..k {
        let nrest = rest / n;
        let mut next = vec![field.zero(); (done * n) * (done * n) * nrest];
        for j in 0..done {
            for kk in 0..done {
                for jn in 0..n {
                    for x1 in 0..n {
                        for kn in 0..n {
                            let d = delta.entry(x1 * n + kn, jn);
                            if d.is_zero() {
                                continue;
                            }
                            let src_base = (j * done + kk) * rest + x1 * nrest;
                            let dst_base = ((j * n + jn) * (done * n) + (kk * n + kn)) * nrest;
                            for x in 0..nrest {
                                let v = &state[src_base + x];
                                if v.is_zero() {
                                    continue;
                                }
                                next[dst_base + x] = next[dst_base + x].add(&d.mul(v));
                            }
                        }
                    }
                }
            }
        }
        state = next;
        done *= n;
        rest = nrest;
    }
    LinearMap::new(field, nk, nk, state)
}

// --- serialization -----------------------------------------------------------

#[derive(Serialize, Deserialize)]
struct CoalgebraJson {
    dim: usize,
    delta: LinearMap,
    counit: Vec<Scalar>,
}

impl Serialize for Coalgebra {
    fn serialize<S: Serializer>(&self, ser: S) -> Result<S::Ok, S::Error> {
        CoalgebraJson {
            dim: self.dim,
            delta: self.delta.clone(),
            counit: self.counit.row_slice(0).to_vec(),
        }
        .serialize(ser)
    }
}

impl<'de> Deserialize<'de> for Coalgebra {
    fn deserialize<D: Deserializer<'de>>(de: D) -> Result<Self, D::Error> {
        let j = CoalgebraJson::deserialize(de)?;
        let field = scalar_field(&j.counit, j.delta.field());
        if j.counit.len() != j.dim {
            return Err(D::Error::custom("counit length != dim"));
        }
        let counit = LinearMap::row(field, j.counit);
        Coalgebra::new(j.delta, counit).map_err(D::Error::custom)
    }
}

#[derive(Serialize, Deserialize)]
struct AlgebraJson {
    dim: usize,
    mult: LinearMap,
    unit: Vec<Scalar>,
}

impl Serialize for Algebra {
    fn serialize<S: Serializer>(&self, ser: S) -> Result<S::Ok, S::Error> {
        AlgebraJson {
            dim: self.dim,
            mult: self.mult.clone(),
            unit: self.unit.column_vec(0),
        }
        .serialize(ser)
    }
}

impl<'de> Deserialize<'de> for Algebra {
    fn deserialize<D: Deserializer<'de>>(de: D) -> Result<Self, D::Error> {
        let j = AlgebraJson::deserialize(de)?;
        if j.unit.len() != j.dim {
            return Err(D::Error::custom("unit length != dim"));
        }
        let field = scalar_field(&j.unit, j.mult.field());
        let unit = LinearMap::column(field, j.unit);
        Algebra::new(j.mult, unit).map_err(D::Error::custom)
    }
}

pub(crate) fn scalar_field(v: &[Scalar], fallback: Field) -> Field {
    v.first().map_or(fallback, |s| s.field())
}
