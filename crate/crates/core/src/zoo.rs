//! Twisted group (co)quasi-bialgebra generators.
//!
//! The example population is built from finite groups (explicit multiplication
//! tables, order ≤ 16) and normalized 3-cocycles with values in the ground
//! field: the coquasi side is the group algebra kG with group-like Δ and the
//! cocycle as reassociator, the quasi side is its dual algebra of functions k^G
//! with the cocycle tensor as Φ. Base change by an arbitrary invertible matrix
//! produces structurally dense isomorphic copies for the randomized test
//! populations — raw random tensors essentially never satisfy the cocycle
//! condition, twisted group algebras always do.

use serde::{Deserialize, Serialize};

use crate::coalg::Coalgebra;
use crate::cqb::{CoquasiBialgebra, CoquasiHopfData, Preantipode};
use crate::error::Error;
use crate::exactla::{Field, LinearMap, Scalar};

/// A finite group presented by its multiplication table; element 0 is the
/// identity.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "Vec<Vec<usize>>", into = "Vec<Vec<usize>>")]
pub struct GroupTable {
    order: usize,
    table: Vec<usize>,
    inverses: Vec<usize>,
}

impl GroupTable {
    pub const MAX_ORDER: usize = 16;

    pub fn new(rows: Vec<Vec<usize>>) -> Result<GroupTable, Error> {
        let n = rows.len();
        if n == 0 || n > Self::MAX_ORDER {
            return Err(Error::BadGroup(format!(
                "order must be between 1 and {}, got {n}",
                Self::MAX_ORDER
            )));
        }
        let mut table = Vec::with_capacity(n * n);
        for r in &rows {
            if r.len() != n {
                return Err(Error::BadGroup("table is not square".into()));
            }
            for &v in r {
                if v >= n {
                    return Err(Error::BadGroup(format!("entry {v} out of range")));
                }
                table.push(v);
            }
        }
        let mul = |a: usize, b: usize| table[a * n + b];
        for g in 0..n {
            if mul(0, g) != g || mul(g, 0) != g {
                return Err(Error::BadGroup("element 0 is not the identity".into()));
            }
        }
        for a in 0..n {
            for b in 0..n {
                for c in 0..n {
                    if mul(mul(a, b), c) != mul(a, mul(b, c)) {
                        return Err(Error::BadGroup(format!(
                            "associativity fails at ({a}, {b}, {c})"
                        )));
                    }
                }
            }
        }
        let mut inverses = vec![usize::MAX; n];
        for g in 0..n {
            match (0..n).find(|&h| mul(g, h) == 0 && mul(h, g) == 0) {
                Some(h) => inverses[g] = h,
                None => return Err(Error::BadGroup(format!("element {g} has no inverse"))),
            }
        }
        Ok(GroupTable {
            order: n,
            table,
            inverses,
        })
    }

    pub fn cyclic(n: usize) -> GroupTable {
        let rows = (0..n)
            .map(|a| (0..n).map(|b| (a + b) % n).collect())
            .collect();
        GroupTable::new(rows).expect("cyclic tables are groups")
    }

    /// Direct product; element `(a, b)` is indexed `a * |G2| + b`.
    pub fn product(g1: &GroupTable, g2: &GroupTable) -> Result<GroupTable, Error> {
        let (n1, n2) = (g1.order, g2.order);
        let n = n1 * n2;
        let rows = (0..n)
            .map(|x| {
                (0..n)
                    .map(|y| {
                        let (a1, a2) = (x / n2, x % n2);
                        let (b1, b2) = (y / n2, y % n2);
                        g1.mul(a1, b1) * n2 + g2.mul(a2, b2)
                    })
                    .collect()
            })
            .collect();
        GroupTable::new(rows)
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn mul(&self, a: usize, b: usize) -> usize {
        self.table[a * self.order + b]
    }

    pub fn inv(&self, g: usize) -> usize {
        self.inverses[g]
    }

    pub fn rows(&self) -> Vec<Vec<usize>> {
        (0..self.order)
            .map(|a| (0..self.order).map(|b| self.mul(a, b)).collect())
            .collect()
    }
}

impl TryFrom<Vec<Vec<usize>>> for GroupTable {
    type Error = Error;
    fn try_from(rows: Vec<Vec<usize>>) -> Result<Self, Error> {
        GroupTable::new(rows)
    }
}

impl From<GroupTable> for Vec<Vec<usize>> {
    fn from(g: GroupTable) -> Vec<Vec<usize>> {
        g.rows()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ZooKind {
    Coquasi,
    Quasi,
}

/// A twisted group algebra recipe: group table, normalized 3-cocycle (flat
/// `|G|³` table of field units), ground field, and which side to build.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ZooSpec {
    pub group: GroupTable,
    pub cocycle: Vec<Scalar>,
    pub field: Field,
    pub kind: ZooKind,
}

impl ZooSpec {
    pub fn new(
        group: GroupTable,
        cocycle: Vec<Scalar>,
        field: Field,
        kind: ZooKind,
    ) -> Result<ZooSpec, Error> {
        let spec = ZooSpec {
            group,
            cocycle,
            field,
            kind,
        };
        spec.validate_cocycle()?;
        Ok(spec)
    }

    pub fn cocycle_at(&self, a: usize, b: usize, c: usize) -> &Scalar {
        let n = self.group.order();
        &self.cocycle[(a * n + b) * n + c]
    }

    /// Normalization (`ω = 1` whenever an argument is the unit) and the
    /// 3-cocycle identity `ω(h,k,l) ω(g,hk,l) ω(g,h,k) = ω(gh,k,l) ω(g,h,kl)`,
    /// checked over every 4-tuple. The failing tuple is named.
    pub fn validate_cocycle(&self) -> Result<(), Error> {
        let n = self.group.order();
        if self.cocycle.len() != n * n * n {
            return Err(Error::DimensionMismatch {
                context: "cocycle table",
                expected: n * n * n,
                got: self.cocycle.len(),
            });
        }
        for s in &self.cocycle {
            if s.field() != self.field {
                return Err(Error::FieldMismatch(
                    self.field.to_string(),
                    s.field().to_string(),
                ));
            }
            if s.is_zero() {
                return Err(Error::Invalid("cocycle values must be units".into()));
            }
        }
        for a in 0..n {
            for b in 0..n {
                for c in 0..n {
                    if (a == 0 || b == 0 || c == 0) && !self.cocycle_at(a, b, c).is_one() {
                        return Err(Error::CocycleNotNormalized(a, b, c));
                    }
                }
            }
        }
        let g = &self.group;
        for a in 0..n {
            for b in 0..n {
                for c in 0..n {
                    for d in 0..n {
                        let lhs = self
                            .cocycle_at(b, c, d)
                            .mul(self.cocycle_at(a, g.mul(b, c), d))
                            .mul(self.cocycle_at(a, b, c));
                        let rhs = self
                            .cocycle_at(g.mul(a, b), c, d)
                            .mul(self.cocycle_at(a, b, g.mul(c, d)));
                        if lhs != rhs {
                            return Err(Error::CocycleViolation(a, b, c, d));
                        }
                    }
                }
            }
        }
        Ok(())
    }
}

/// The trivial cocycle on `group`.
pub fn trivial_cocycle(field: Field, group: &GroupTable) -> Vec<Scalar> {
    let n = group.order();
    vec![field.one(); n * n * n]
}

/// The standard cyclic-group cocycle `ω(g^a, g^b, g^c) = θ^{a·⌊(b+c)/n⌋}` for a
/// root of unity `θ` with `θ^n = 1`. Nontrivial whenever `θ ≠ 1`.
pub fn cyclic_cocycle(field: Field, n: usize, theta: &Scalar) -> Result<Vec<Scalar>, Error> {
    if theta.field() != field {
        return Err(Error::FieldMismatch(
            field.to_string(),
            theta.field().to_string(),
        ));
    }
    if !theta.pow(n as u64).is_one() {
        return Err(Error::Invalid(format!(
            "θ^{n} must be 1 for a cyclic cocycle"
        )));
    }
    let mut out = Vec::with_capacity(n * n * n);
    for a in 0..n {
        for b in 0..n {
            for c in 0..n {
                out.push(theta.pow((a * ((b + c) / n)) as u64));
            }
        }
    }
    Ok(out)
}

/// Product cocycle on `G1 × G2` (indexing as in [`GroupTable::product`]).
pub fn product_cocycle(
    g1: &GroupTable,
    c1: &[Scalar],
    g2: &GroupTable,
    c2: &[Scalar],
) -> Vec<Scalar> {
    let (n1, n2) = (g1.order(), g2.order());
    let n = n1 * n2;
    let at1 = |a, b, c| &c1[(a * n1 + b) * n1 + c];
    let at2 = |a, b, c| &c2[(a * n2 + b) * n2 + c];
    let mut out = Vec::with_capacity(n * n * n);
    for a in 0..n {
        for b in 0..n {
            for c in 0..n {
                out.push(
                    at1(a / n2, b / n2, c / n2).mul(at2(a % n2, b % n2, c % n2)),
                );
            }
        }
    }
    out
}

/// Everything the coquasi generator knows in closed form: the structure, the
/// preantipode `S(g) = ω(g, g⁻¹, g)⁻¹ g⁻¹`, and the coquasi-antipode
/// `(s, α, β) = (g ↦ g⁻¹, ε, ω(g, g⁻¹, g)⁻¹)`.
pub struct GroupCoquasi {
    pub h: CoquasiBialgebra,
    pub preantipode: Preantipode,
    pub hopf_data: CoquasiHopfData,
}

/// Builds `kG` with group-like comultiplication, group multiplication, and the
/// cocycle as reassociator. The closed-form preantipode candidate is verified
/// with [`crate::cqb::check_preantipode`] before being returned.
pub fn gen_group_coquasi(spec: &ZooSpec) -> Result<GroupCoquasi, Error> {
    spec.validate_cocycle()?;
    let g = &spec.group;
    let n = g.order();
    let f = spec.field;

    let mut delta = LinearMap::zero(f, n * n, n);
    for k in 0..n {
        delta.set(k * n + k, k, f.one());
    }
    let counit = LinearMap::row(f, vec![f.one(); n]);
    let coalgebra = Coalgebra::new(delta, counit)?;

    let mut mult = LinearMap::zero(f, n, n * n);
    for a in 0..n {
        for b in 0..n {
            mult.set(g.mul(a, b), a * n + b, f.one());
        }
    }
    let mut unit = LinearMap::zero(f, n, 1);
    unit.set(0, 0, f.one());

    let omega = LinearMap::row(f, spec.cocycle.clone());
    let omega_inv = LinearMap::row(
        f,
        spec.cocycle
            .iter()
            .map(|s| s.inv().expect("cocycle values are units"))
            .collect(),
    );
    let h = CoquasiBialgebra::with_omega_inv(coalgebra, mult, unit, omega, omega_inv)?;

    let mut s_map = LinearMap::zero(f, n, n);
    let mut s_plain = LinearMap::zero(f, n, n);
    let mut beta = LinearMap::zero(f, 1, n);
    for j in 0..n {
        let ji = g.inv(j);
        let w = spec
            .cocycle_at(j, ji, j)
            .inv()
            .expect("cocycle values are units");
        s_map.set(ji, j, w.clone());
        s_plain.set(ji, j, f.one());
        beta.set(0, j, w);
    }
    let preantipode = Preantipode { s_map };
    let report = crate::cqb::check_preantipode(&h, &preantipode);
    if !report.pass {
        return Err(Error::Invalid(format!(
            "closed-form preantipode failed verification: {report}"
        )));
    }
    let hopf_data = CoquasiHopfData {
        s: s_plain,
        alpha: h.counit().clone(),
        beta,
    };
    Ok(GroupCoquasi {
        h,
        preantipode,
        hopf_data,
    })
}

/// The quasi side: functions on the group with pointwise product, transported
/// comultiplication, and the cocycle tensor as Φ. The closed-form preantipode
/// is `S(e_g) = ω(g⁻¹, g, g⁻¹)⁻¹ e_{g⁻¹}` (the transpose of the coquasi one).
pub struct GroupQuasi {
    pub a: crate::qb::QuasiBialgebra,
    pub preantipode: crate::qb::QuasiPreantipode,
}

/// Builds `k^G` with `Φ = Σ ω(g,h,k) e_g ⊗ e_h ⊗ e_k`; the closed-form
/// preantipode candidate is verified before being returned.
pub fn gen_group_quasi(spec: &ZooSpec) -> Result<GroupQuasi, Error> {
    spec.validate_cocycle()?;
    let g = &spec.group;
    let n = g.order();
    let f = spec.field;

    let mut mult = LinearMap::zero(f, n, n * n);
    for a in 0..n {
        mult.set(a, a * n + a, f.one());
    }
    let unit = LinearMap::column(f, vec![f.one(); n]);
    let algebra = crate::coalg::Algebra::new(mult, unit)?;

    let mut delta = LinearMap::zero(f, n * n, n);
    for a in 0..n {
        for b in 0..n {
            delta.set(a * n + b, g.mul(a, b), f.one());
        }
    }
    let mut counit = LinearMap::zero(f, 1, n);
    counit.set(0, 0, f.one());

    let phi = spec.cocycle.clone();
    let phi_inv: Vec<Scalar> = spec
        .cocycle
        .iter()
        .map(|s| s.inv().expect("cocycle values are units"))
        .collect();
    let a = crate::qb::QuasiBialgebra::with_phi_inv(algebra, delta, counit, phi, phi_inv)?;

    let mut s_map = LinearMap::zero(f, n, n);
    for j in 0..n {
        let ji = g.inv(j);
        let w = spec
            .cocycle_at(ji, j, ji)
            .inv()
            .expect("cocycle values are units");
        s_map.set(ji, j, w);
    }
    let preantipode = crate::qb::QuasiPreantipode { s_map };
    let report = crate::qb::check_quasi_preantipode(&a, &preantipode);
    if !report.pass {
        return Err(Error::Invalid(format!(
            "closed-form quasi preantipode failed verification: {report}"
        )));
    }
    Ok(GroupQuasi { a, preantipode })
}

/// Transports a quasi-bialgebra structure along an invertible `t: A' -> A`.
pub fn base_change_quasi(
    a: &crate::qb::QuasiBialgebra,
    s: &crate::qb::QuasiPreantipode,
    t: &LinearMap,
) -> Result<(crate::qb::QuasiBialgebra, crate::qb::QuasiPreantipode), Error> {
    let n = a.dim();
    if t.cod_dim() != n || t.dom_dim() != n {
        return Err(Error::DimensionMismatch {
            context: "base change matrix",
            expected: n,
            got: t.cod_dim(),
        });
    }
    t.same_field(&a.algebra.mult)?;
    let tinv = t.inverse()?;
    let tt = t.kron(t)?;
    let tinv2 = tinv.kron(&tinv)?;
    let tinv3 = tinv2.kron(&tinv)?;
    let algebra = crate::coalg::Algebra::new(
        tinv.compose(&a.algebra.mult.compose(&tt)),
        tinv.compose(&a.algebra.unit),
    )?;
    let delta = tinv2.compose(&a.delta.compose(t));
    let counit = a.counit.compose(t);
    let phi = tinv3.apply(&a.phi);
    let phi_inv = tinv3.apply(&a.phi_inv);
    let out = crate::qb::QuasiBialgebra::with_phi_inv(algebra, delta, counit, phi, phi_inv)?;
    let s_new = crate::qb::QuasiPreantipode {
        s_map: tinv.compose(&s.s_map.compose(t)),
    };
    Ok((out, s_new))
}

/// Transports a coquasi-bialgebra structure along an invertible `t: H' -> H`,
/// yielding an isomorphic copy with dense structure constants. The transported
/// preantipode is `t⁻¹ ∘ S ∘ t`.
pub fn base_change(
    h: &CoquasiBialgebra,
    s: &Preantipode,
    t: &LinearMap,
) -> Result<(CoquasiBialgebra, Preantipode), Error> {
    let n = h.dim();
    if t.cod_dim() != n || t.dom_dim() != n {
        return Err(Error::DimensionMismatch {
            context: "base change matrix",
            expected: n,
            got: t.cod_dim(),
        });
    }
    t.same_field(&h.mult)?;
    let tinv = t.inverse()?;
    let tt = t.kron(t)?;
    let ttt = tt.kron(t)?;
    let tinv2 = tinv.kron(&tinv)?;
    let coalgebra = Coalgebra::new(
        tinv2.compose(&h.delta().compose(t)),
        h.counit().compose(t),
    )?;
    let mult = tinv.compose(&h.mult.compose(&tt));
    let unit = tinv.compose(&h.unit);
    let omega = h.omega.compose(&ttt);
    let omega_inv = h.omega_inv.compose(&ttt);
    let out = CoquasiBialgebra::with_omega_inv(coalgebra, mult, unit, omega, omega_inv)?;
    let s_new = Preantipode {
        s_map: tinv.compose(&s.s_map.compose(t)),
    };
    Ok((out, s_new))
}

/// The full grading diagram of a twisted group algebra: one 1-dimensional
/// object `k_g` per group element carrying its grading coaction, trivial φ,
/// associator witnesses `ω(g,h,k)⁻¹`, and the dual pairs
/// `(k_{g⁻¹}, ev = 1, db = ω(g,g⁻¹,g)⁻¹)`.
pub fn grading_diagram(spec: &ZooSpec) -> Result<crate::recon::MonoidalDiagram, Error> {
    spec.validate_cocycle()?;
    let g = &spec.group;
    let n = g.order();
    let f = spec.field;
    let name = |k: usize| format!("k{k}");
    let one = LinearMap::row(f, vec![f.one()]);

    let zoo = gen_group_coquasi(spec)?;
    let objects = (0..n)
        .map(|k| {
            let mut rho = LinearMap::zero(f, n, 1);
            rho.set(k, 0, f.one());
            crate::recon::ObjectDecl {
                name: name(k),
                dim: 1,
                rho: Some(rho),
            }
        })
        .collect();
    let mut tensor = Vec::new();
    for a in 0..n {
        for b in 0..n {
            tensor.push(crate::recon::TensorEntry {
                x: name(a),
                y: name(b),
                z: name(g.mul(a, b)),
                phi: one.clone(),
            });
        }
    }
    let mut associators = Vec::new();
    for a in 0..n {
        for b in 0..n {
            for c in 0..n {
                let w = spec.cocycle_at(a, b, c).inv().expect("cocycle unit");
                associators.push(crate::recon::AssociatorEntry {
                    x: name(a),
                    y: name(b),
                    z: name(c),
                    matrix: LinearMap::row(f, vec![w]),
                });
            }
        }
    }
    // the ω-correction sits in ev: the extracted coquasi-antipode then comes
    // out in the gauge (α, β) = (ε, ω(g,g⁻¹,g)⁻¹); putting it in db gives the
    // equivalent opposite gauge and the same ∇ preantipode
    let duals = (0..n)
        .map(|a| {
            let ai = g.inv(a);
            crate::recon::DualEntry {
                x: name(a),
                dual: name(ai),
                ev: vec![spec.cocycle_at(a, ai, a).inv().expect("cocycle unit")],
                db: vec![f.one()],
            }
        })
        .collect();
    Ok(crate::recon::MonoidalDiagram {
        objects,
        morphisms: Vec::new(),
        unit: crate::recon::UnitDecl {
            object: name(0),
            phi0: vec![f.one()],
        },
        tensor,
        associators,
        duals,
        over: Some(zoo.h),
    })
}

/// Deterministic invertible matrix with small entries, driven by a seed; used
/// to mass-produce base-changed zoo members without an RNG dependency.
pub fn seeded_invertible(field: Field, n: usize, seed: u64) -> LinearMap {
    let mut state = seed.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
    let mut next = move || {
        state = state
            .wrapping_mul(6364136223846793005)
            .wrapping_add(1442695040888963407);
        (state >> 33) as i64
    };
    loop {
        let m = LinearMap::from_fn(field, n, n, |_, _| field.from_i64(next() % 3 - 1 + 2 * (next() % 2)));
        if m.inverse().is_ok() {
            return m;
        }
    }
}
