//! Tannaka reconstruction at desk scale.
//!
//! A [`MonoidalDiagram`] is a finite presentation of a rigid monoidal category
//! with a fiber functor: objects carry their underlying dimensions, morphisms
//! their matrices, the tensor/unit/associator/dual structure is given by
//! explicit witnesses at the underlying-space level. The coendomorphism
//! coalgebra is the direct sum of `U(X) ⊗ U(X)*` blocks modulo the dinaturality
//! relations of the listed morphisms; multiplication, unit, reassociator and
//! preantipode are induced on the quotient, with well-definedness always
//! verified explicitly rather than assumed.
//!
//! Only listed morphisms generate relations; composites are not auto-closed
//! (see [`close_under_composition`] for the opt-in utility). Pentagon data is
//! only checkable on the listed triples, so completeness of the presentation
//! relative to an ambient category is the caller's responsibility.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::coalg::{check_coalgebra, Coalgebra};
use crate::cqb::{
    check_morphism, check_preantipode, validate_coquasi, validate_coquasi_hopf, CoquasiBialgebra,
    CoquasiHopfData, Preantipode,
};
use crate::error::Error;
use crate::exactla::tensor::id;
use crate::exactla::{quotient, LinearMap, Scalar, Subspace};
use crate::report::Report;

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ObjectDecl {
    pub name: String,
    pub dim: usize,
    /// Optional left B-coaction, for diagrams presented over a named
    /// coquasi-bialgebra (used by [`can_map`]).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rho: Option<LinearMap>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct MorphismDecl {
    pub name: String,
    pub from: String,
    pub to: String,
    pub matrix: LinearMap,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct UnitDecl {
    pub object: String,
    /// `φ₀: k -> U(I)` as a column.
    pub phi0: Vec<Scalar>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct TensorEntry {
    pub x: String,
    pub y: String,
    pub z: String,
    /// `φ_{X,Y}: U(X) ⊗ U(Y) -> U(Z)`, an isomorphism.
    pub phi: LinearMap,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct AssociatorEntry {
    pub x: String,
    pub y: String,
    pub z: String,
    /// `U(a_{X,Y,Z}): U((X⊠Y)⊠Z) -> U(X⊠(Y⊠Z))`.
    pub matrix: LinearMap,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct DualEntry {
    pub x: String,
    pub dual: String,
    /// Transported evaluation `U(X) ⊗ U(X★) -> k` as a row.
    pub ev: Vec<Scalar>,
    /// Transported dual basis `k -> U(X★) ⊗ U(X)` as a column.
    pub db: Vec<Scalar>,
}

/// Finite presentation of a rigid monoidal category with fiber functor.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct MonoidalDiagram {
    pub objects: Vec<ObjectDecl>,
    #[serde(default)]
    pub morphisms: Vec<MorphismDecl>,
    pub unit: UnitDecl,
    #[serde(default)]
    pub tensor: Vec<TensorEntry>,
    #[serde(default)]
    pub associators: Vec<AssociatorEntry>,
    #[serde(default)]
    pub duals: Vec<DualEntry>,
    /// Optional coquasi-bialgebra the diagram is presented over.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub over: Option<CoquasiBialgebra>,
}

impl MonoidalDiagram {
    pub fn object(&self, name: &str) -> Result<&ObjectDecl, Error> {
        self.objects
            .iter()
            .find(|o| o.name == name)
            .ok_or_else(|| Error::UnknownObject(name.to_string()))
    }

    pub fn dim(&self, name: &str) -> Result<usize, Error> {
        Ok(self.object(name)?.dim)
    }

    pub fn tensor_entry(&self, x: &str, y: &str) -> Result<&TensorEntry, Error> {
        self.tensor
            .iter()
            .find(|t| t.x == x && t.y == y)
            .ok_or_else(|| Error::MissingTensorEntry(x.to_string(), y.to_string()))
    }

    pub fn associator_entry(&self, x: &str, y: &str, z: &str) -> Result<&AssociatorEntry, Error> {
        self.associators
            .iter()
            .find(|a| a.x == x && a.y == y && a.z == z)
            .ok_or_else(|| Error::MissingAssociator(x.to_string(), y.to_string(), z.to_string()))
    }

    pub fn dual_entry(&self, x: &str) -> Result<&DualEntry, Error> {
        self.duals
            .iter()
            .find(|d| d.x == x)
            .ok_or_else(|| Error::MissingDual(x.to_string()))
    }

    fn field(&self) -> crate::exactla::Field {
        self.unit
            .phi0
            .first()
            .map(|s| s.field())
            .unwrap_or(crate::exactla::Field::Rational)
    }

    /// The realized composite
    /// `(φ_{X,Y}⁻¹ ⊗ U(Z)) ∘ φ_{X⊠Y,Z}⁻¹ ∘ U(a⁻¹) ∘ φ_{X,Y⊠Z} ∘ (U(X) ⊗ φ_{Y,Z})`
    /// on `U(X)⊗U(Y)⊗U(Z)` — the matrix whose pairing with `ξ⊗η⊗ζ` defines the
    /// reconstructed reassociator.
    pub fn realized_assoc(&self, x: &str, y: &str, z: &str) -> Result<LinearMap, Error> {
        let f = self.field();
        let (dx, dz) = (self.dim(x)?, self.dim(z)?);
        let t_yz = self.tensor_entry(y, z)?;
        let t_x_yz = self.tensor_entry(x, &t_yz.z)?;
        let t_xy = self.tensor_entry(x, y)?;
        let t_xy_z = self.tensor_entry(&t_xy.z, z)?;
        let witness = self.associator_entry(x, y, z)?;
        let a_inv = witness.matrix.inverse()?;
        let step = t_x_yz.phi.compose(&id(f, dx).kron(&t_yz.phi)?);
        let step = a_inv.compose(&step);
        let step = t_xy_z.phi.inverse()?.compose(&step);
        Ok(t_xy.phi.inverse()?.kron(&id(f, dz))?.compose(&step))
    }
}

/// Checks the diagram invariants: iso witnesses, strict neutrality of the
/// unit, functoriality shapes, and the transported zigzags for every listed
/// dual pair.
pub fn validate_diagram(d: &MonoidalDiagram) -> Report {
    let mut report = Report::new();
    let f = d.field();

    let unit_ok = match d.object(&d.unit.object) {
        Ok(o) if o.dim == 1 && d.unit.phi0.len() == 1 && !d.unit.phi0[0].is_zero() => true,
        _ => {
            report.fail("diagram.phi0_iso", vec![]);
            false
        }
    };

    for m in &d.morphisms {
        match (d.dim(&m.from), d.dim(&m.to)) {
            (Ok(df), Ok(dt)) if m.matrix.dom_dim() == df && m.matrix.cod_dim() == dt => {}
            _ => report.fail(format!("diagram.morphism_shape:{}", m.name), vec![]),
        }
    }

    for t in &d.tensor {
        let ok = match (d.dim(&t.x), d.dim(&t.y), d.dim(&t.z)) {
            (Ok(dx), Ok(dy), Ok(dz)) => {
                t.phi.dom_dim() == dx * dy && t.phi.cod_dim() == dz && t.phi.inverse().is_ok()
            }
            _ => false,
        };
        if !ok {
            report.fail(format!("diagram.phi_iso:{},{}", t.x, t.y), vec![]);
        }
    }

    // strict neutrality: (I, X) and (X, I) entries must land on X with
    // φ ∘ (φ₀ ⊗ id) = id = φ ∘ (id ⊗ φ₀)
    if unit_ok {
        let phi0 = LinearMap::column(f, d.unit.phi0.clone());
        for t in &d.tensor {
            if t.x == d.unit.object {
                let dy = d.dim(&t.y).unwrap_or(0);
                let ok = t.z == t.y
                    && t.phi
                        .compose(&phi0.kron(&id(f, dy)).unwrap())
                        .is_identity();
                if !ok {
                    report.fail(format!("diagram.neutrality:{}", t.y), vec![]);
                }
            }
            if t.y == d.unit.object && t.x != d.unit.object {
                let dx = d.dim(&t.x).unwrap_or(0);
                let ok = t.z == t.x
                    && t.phi
                        .compose(&id(f, dx).kron(&phi0).unwrap())
                        .is_identity();
                if !ok {
                    report.fail(format!("diagram.neutrality:{}", t.x), vec![]);
                }
            }
        }
    }

    for dual in &d.duals {
        let (Ok(dx), Ok(ds)) = (d.dim(&dual.x), d.dim(&dual.dual)) else {
            report.fail(format!("diagram.dual_dims:{}", dual.x), vec![]);
            continue;
        };
        if dual.ev.len() != dx * ds || dual.db.len() != ds * dx {
            report.fail(format!("diagram.dual_dims:{}", dual.x), vec![]);
            continue;
        }
        let ev = LinearMap::row(f, dual.ev.clone());
        let db = LinearMap::column(f, dual.db.clone());
        // zigzag 1: (ev ⊗ X) A_{X,X★,X} (X ⊗ db) = id, where A realizes the
        // reconstructed a⁻¹
        match d.realized_assoc(&dual.x, &dual.dual, &dual.x) {
            Ok(a) => {
                let step = a.compose(&id(f, dx).kron(&db).unwrap());
                let z1 = crate::exactla::tensor::apply_cod_slot(&step, &[dx * ds, dx], 0, &ev);
                if !z1.is_identity() {
                    report.fail(format!("diagram.zigzag1:{}", dual.x), vec![]);
                }
            }
            Err(_) => report.fail(format!("diagram.zigzag1:{}", dual.x), vec![]),
        }
        // zigzag 2: (X★ ⊗ ev) A⁻¹_{X★,X,X★} (db ⊗ X★) = id
        match d.realized_assoc(&dual.dual, &dual.x, &dual.dual) {
            Ok(a) => match a.inverse() {
                Ok(a_inv) => {
                    let step = a_inv.compose(&db.kron(&id(f, ds)).unwrap());
                    let z2 =
                        crate::exactla::tensor::apply_cod_slot(&step, &[ds, dx * ds], 1, &ev);
                    if !z2.is_identity() {
                        report.fail(format!("diagram.zigzag2:{}", dual.x), vec![]);
                    }
                }
                Err(_) => report.fail(format!("diagram.zigzag2:{}", dual.x), vec![]),
            },
            Err(_) => report.fail(format!("diagram.zigzag2:{}", dual.x), vec![]),
        }
    }
    report
}

/// Compose-and-append closure utility (off by default in every pipeline):
/// repeatedly adds matrices of composable pairs until no new matrix appears or
/// the cap is hit.
pub fn close_under_composition(d: &mut MonoidalDiagram, cap: usize) {
    let mut changed = true;
    while changed && d.morphisms.len() < cap {
        changed = false;
        let snapshot = d.morphisms.clone();
        for g in &snapshot {
            for f in &snapshot {
                if f.to != g.from {
                    continue;
                }
                let matrix = g.matrix.compose(&f.matrix);
                let exists = d
                    .morphisms
                    .iter()
                    .any(|m| m.from == f.from && m.to == g.to && m.matrix == matrix);
                if !exists && d.morphisms.len() < cap {
                    d.morphisms.push(MorphismDecl {
                        name: format!("{}∘{}", g.name, f.name),
                        from: f.from.clone(),
                        to: g.to.clone(),
                        matrix,
                    });
                    changed = true;
                }
            }
        }
    }
}

/// The coend coalgebra `H = (⊕_X U(X) ⊗ U(X)*) / dinaturality` together with
/// the block projections `π_X` and the universal coactions `δ_X`.
#[derive(Clone, Debug)]
pub struct CoendCoalgebra {
    pub coalgebra: Coalgebra,
    /// Flat index bookkeeping: block offset per object, block size `d²`,
    /// with `ι_X(e_i ⊗ e^j)` at `offset + i·d + j`.
    pub offsets: BTreeMap<String, usize>,
    pub ambient_dim: usize,
    /// `proj: ambient -> H` (the quotient map through all π_X).
    pub projection: LinearMap,
    /// A section of the projection.
    pub section: LinearMap,
    /// `π_X: U(X) ⊗ U(X)* -> H` per object.
    pub proj: BTreeMap<String, LinearMap>,
    /// `δ_X: U(X) -> H ⊗ U(X)` per object.
    pub delta_univ: BTreeMap<String, LinearMap>,
}

impl CoendCoalgebra {
    pub fn dim(&self) -> usize {
        self.coalgebra.dim
    }

    /// `π_X(e_i ⊗ e^j)` as an H-vector.
    pub fn pi(&self, name: &str, i: usize, j: usize) -> Vec<Scalar> {
        let d = self.proj[name].dom_dim();
        let mut dx = 0;
        while dx * dx < d {
            dx += 1;
        }
        debug_assert_eq!(dx * dx, d, "block is d x d");
        self.proj[name].column_vec(i * dx + j)
    }
}

/// The dinaturality relation vectors of a morphism: for `f: X -> Y`, all
/// `ι_X(x ⊗ ψ∘U(f)) − ι_Y(U(f)x ⊗ ψ)`.
fn morphism_relations(
    d: &MonoidalDiagram,
    offsets: &BTreeMap<String, usize>,
    ambient: usize,
    m: &MorphismDecl,
) -> Result<Vec<Vec<Scalar>>, Error> {
    let f = d.field();
    let dx = d.dim(&m.from)?;
    let dy = d.dim(&m.to)?;
    let ox = offsets[&m.from];
    let oy = offsets[&m.to];
    let mut out = Vec::with_capacity(dx * dy);
    for i in 0..dx {
        for j in 0..dy {
            let mut v = vec![f.zero(); ambient];
            // x ⊗ (e^j ∘ F): components (i, l) = F[j][l]
            for l in 0..dx {
                let c = m.matrix.entry(j, l);
                if !c.is_zero() {
                    v[ox + i * dx + l] = v[ox + i * dx + l].add(c);
                }
            }
            // -(F x ⊗ e^j): components (k, j) = -F[k][i]
            for k in 0..dy {
                let c = m.matrix.entry(k, i);
                if !c.is_zero() {
                    v[oy + k * dy + j] = v[oy + k * dy + j].sub(c);
                }
            }
            out.push(v);
        }
    }
    Ok(out)
}

/// Builds the coend coalgebra. The counit must kill every relation (otherwise
/// the offending morphism is reported); comultiplication well-definedness,
/// the comodule axioms of each `δ_X` and colinearity of every listed morphism
/// are verified.
pub fn coend_coalgebra(d: &MonoidalDiagram) -> Result<CoendCoalgebra, Error> {
    let f = d.field();
    let mut offsets = BTreeMap::new();
    let mut ambient = 0usize;
    for o in &d.objects {
        if offsets.insert(o.name.clone(), ambient).is_some() {
            return Err(Error::Schema(format!("duplicate object {:?}", o.name)));
        }
        ambient += o.dim * o.dim;
    }

    // ε on the ambient sum: ε(ι_X(e_i ⊗ e^j)) = δ_ij
    let mut eps_amb = LinearMap::zero(f, 1, ambient);
    for o in &d.objects {
        let off = offsets[&o.name];
        for i in 0..o.dim {
            eps_amb.set(0, off + i * o.dim + i, f.one());
        }
    }

    let mut all_relations: Vec<Vec<Scalar>> = Vec::new();
    for m in &d.morphisms {
        let rels = morphism_relations(d, &offsets, ambient, m)?;
        for r in &rels {
            let val = eps_amb.apply(r);
            if !val[0].is_zero() {
                return Err(Error::NotWellDefined {
                    map: "counit",
                    morphism: m.name.clone(),
                });
            }
        }
        all_relations.extend(rels);
    }
    let relations = Subspace::from_spanning(f, ambient, all_relations);
    let quot = quotient(ambient, &relations)?;
    let hdim = quot.proj.cod_dim();

    // Δ on the ambient sum: Δ(ι_X(e_i ⊗ e^j)) = Σ_k π_X(e_i ⊗ e^k) ⊗ π_X(e_k ⊗ e^j)
    let mut delta_amb = LinearMap::zero(f, hdim * hdim, ambient);
    for o in &d.objects {
        let off = offsets[&o.name];
        for i in 0..o.dim {
            for j in 0..o.dim {
                let col = off + i * o.dim + j;
                for k in 0..o.dim {
                    let left = quot.proj.column_vec(off + i * o.dim + k);
                    let right = quot.proj.column_vec(off + k * o.dim + j);
                    for (a, lv) in left.iter().enumerate() {
                        if lv.is_zero() {
                            continue;
                        }
                        for (b, rv) in right.iter().enumerate() {
                            if !rv.is_zero() {
                                delta_amb.add_to(a * hdim + b, col, &lv.mul(rv));
                            }
                        }
                    }
                }
            }
        }
    }
    let delta = delta_amb.compose(&quot.section);
    if delta.compose(&quot.proj) != delta_amb {
        // localize the offending morphism
        for m in &d.morphisms {
            for r in morphism_relations(d, &offsets, ambient, m)? {
                if delta_amb.apply(&r).iter().any(|s| !s.is_zero()) {
                    return Err(Error::NotWellDefined {
                        map: "comultiplication",
                        morphism: m.name.clone(),
                    });
                }
            }
        }
        return Err(Error::NotWellDefined {
            map: "comultiplication",
            morphism: "<unknown>".into(),
        });
    }
    let counit = eps_amb.compose(&quot.section);
    let coalgebra = Coalgebra::new(delta, counit)?;
    let rep = check_coalgebra(&coalgebra);
    if !rep.pass {
        return Err(Error::Invalid(format!(
            "coend coalgebra fails axioms: {rep}"
        )));
    }

    let mut proj = BTreeMap::new();
    let mut delta_univ = BTreeMap::new();
    for o in &d.objects {
        let off = offsets[&o.name];
        let block = LinearMap::from_fn(f, hdim, o.dim * o.dim, |a, c| {
            quot.proj.entry(a, off + c).clone()
        });
        // δ_X(e_i) = Σ_j π_X(e_i ⊗ e^j) ⊗ e_j
        let mut du = LinearMap::zero(f, hdim * o.dim, o.dim);
        for i in 0..o.dim {
            for j in 0..o.dim {
                let hv = block.column_vec(i * o.dim + j);
                for (a, v) in hv.into_iter().enumerate() {
                    if !v.is_zero() {
                        du.set(a * o.dim + j, i, v);
                    }
                }
            }
        }
        proj.insert(o.name.clone(), block);
        delta_univ.insert(o.name.clone(), du);
    }

    let coend = CoendCoalgebra {
        coalgebra,
        offsets,
        ambient_dim: ambient,
        projection: quot.proj,
        section: quot.section,
        proj,
        delta_univ,
    };

    // dinaturality holds by construction; re-verify post-quotient that π maps
    // both sides of every relation to the same element
    for m in &d.morphisms {
        for r in morphism_relations(d, &coend.offsets, ambient, m)? {
            if coend.projection.apply(&r).iter().any(|s| !s.is_zero()) {
                return Err(Error::NotWellDefined {
                    map: "projection",
                    morphism: m.name.clone(),
                });
            }
        }
    }

    // each δ_X is a comodule and each listed morphism is colinear
    for o in &d.objects {
        let du = &coend.delta_univ[&o.name];
        let lhs = coend
            .coalgebra
            .delta
            .kron(&id(f, o.dim))
            .unwrap()
            .compose(du);
        let rhs = id(f, hdim).kron(du).unwrap().compose(du);
        let counit_side = coend
            .coalgebra
            .counit
            .kron(&id(f, o.dim))
            .unwrap()
            .compose(du);
        if lhs != rhs || !counit_side.is_identity() {
            return Err(Error::Invalid(format!(
                "universal coaction of {:?} fails the comodule axioms",
                o.name
            )));
        }
    }
    for m in &d.morphisms {
        let du_x = &coend.delta_univ[&m.from];
        let du_y = &coend.delta_univ[&m.to];
        let lhs = du_y.compose(&m.matrix);
        let rhs = id(f, hdim).kron(&m.matrix).unwrap().compose(du_x);
        if lhs != rhs {
            return Err(Error::Invalid(format!(
                "morphism {:?} is not colinear for the universal coactions",
                m.name
            )));
        }
    }
    Ok(coend)
}

/// Induces `m`, `u`, `ω` on the coend and validates the result.
///
/// `m(π_X(x⊗ξ) ⊗ π_Y(y⊗η)) = π_{X⊠Y}(φ(x⊗y) ⊗ (ξ⊗η)∘φ⁻¹)`,
/// `u = π_I(φ₀(1) ⊗ φ₀⁻¹)`, and `ω` pairs the functional legs with the
/// realized associator composite.
pub fn coend_bialgebra(
    d: &MonoidalDiagram,
    coend: &CoendCoalgebra,
) -> Result<CoquasiBialgebra, Error> {
    let f = d.field();
    let hdim = coend.dim();
    let amb = coend.ambient_dim;

    // multiplication on the ambient square
    let mut m_amb = LinearMap::zero(f, hdim, amb * amb);
    for ox in &d.objects {
        for oy in &d.objects {
            let t = d.tensor_entry(&ox.name, &oy.name)?;
            let dz = d.dim(&t.z)?;
            let phi_inv = t.phi.inverse()?;
            let pz = &coend.proj[&t.z];
            let (offx, offy) = (coend.offsets[&ox.name], coend.offsets[&oy.name]);
            let (dx, dy) = (ox.dim, oy.dim);
            for a in 0..dx {
                for b in 0..dx {
                    for c in 0..dy {
                        for e in 0..dy {
                            let col = (offx + a * dx + b) * amb + (offy + c * dy + e);
                            // φ(e_a ⊗ e_c) and (e^b ⊗ e^e) ∘ φ⁻¹
                            for p in 0..dz {
                                let left = t.phi.entry(p, a * dy + c);
                                if left.is_zero() {
                                    continue;
                                }
                                for q in 0..dz {
                                    let right = phi_inv.entry(b * dy + e, q);
                                    if right.is_zero() {
                                        continue;
                                    }
                                    let w = left.mul(right);
                                    let hv = pz.column_vec(p * dz + q);
                                    for (h, v) in hv.into_iter().enumerate() {
                                        if !v.is_zero() {
                                            m_amb.add_to(h, col, &w.mul(&v));
                                        }
                                    }
                                }
                            }
                        }
                    }
                }
            }
        }
    }
    let mult = m_amb.compose(&coend.section.kron(&coend.section)?);
    let check = mult.compose(&coend.projection.kron(&coend.projection)?);
    if check != m_amb {
        return Err(well_definedness_failure(d, coend, &m_amb, "multiplication"));
    }

    // unit
    let unit_obj = &d.unit.object;
    let phi0 = &d.unit.phi0;
    if d.dim(unit_obj)? != 1 || phi0.len() != 1 || phi0[0].is_zero() {
        return Err(Error::Schema("unit object must be 1-dimensional with invertible phi0".into()));
    }
    // π_I(φ₀(1) ⊗ φ₀⁻¹): the scalars cancel for a 1-dimensional unit block
    let unit = LinearMap::column(f, coend.proj[unit_obj].column_vec(0));

    // reassociator on the ambient cube
    let mut omega_amb = LinearMap::zero(f, 1, amb * amb * amb);
    for ox in &d.objects {
        for oy in &d.objects {
            for oz in &d.objects {
                let a_mat = d.realized_assoc(&ox.name, &oy.name, &oz.name)?;
                let (dx, dy, dz) = (ox.dim, oy.dim, oz.dim);
                let (offx, offy, offz) = (
                    coend.offsets[&ox.name],
                    coend.offsets[&oy.name],
                    coend.offsets[&oz.name],
                );
                for a in 0..dx {
                    for b in 0..dx {
                        for c in 0..dy {
                            for e in 0..dy {
                                for g in 0..dz {
                                    for h in 0..dz {
                                        // ω(π(a,b) ⊗ π(c,e) ⊗ π(g,h)) = A[(b,e,h)][(a,c,g)]
                                        let val =
                                            a_mat.entry((b * dy + e) * dz + h, (a * dy + c) * dz + g);
                                        if val.is_zero() {
                                            continue;
                                        }
                                        let col = ((offx + a * dx + b) * amb
                                            + (offy + c * dy + e))
                                            * amb
                                            + (offz + g * dz + h);
                                        omega_amb.set(0, col, val.clone());
                                    }
                                }
                            }
                        }
                    }
                }
            }
        }
    }
    let sec3 = coend.section.kron(&coend.section)?.kron(&coend.section)?;
    let omega = omega_amb.compose(&sec3);
    let proj3 = coend
        .projection
        .kron(&coend.projection)?
        .kron(&coend.projection)?;
    if omega.compose(&proj3) != omega_amb {
        return Err(well_definedness_failure(d, coend, &omega_amb, "omega"));
    }

    let h = CoquasiBialgebra::new(coend.coalgebra.clone(), mult, unit, omega)?;
    let report = validate_coquasi(&h);
    if !report.pass {
        return Err(Error::Invalid(format!(
            "reconstructed structure fails coquasi validation: {report}"
        )));
    }
    Ok(h)
}

/// Names the morphism whose relation escapes the kernel of an induced map.
fn well_definedness_failure(
    d: &MonoidalDiagram,
    coend: &CoendCoalgebra,
    amb_map: &LinearMap,
    what: &'static str,
) -> Error {
    let f = d.field();
    let amb = coend.ambient_dim;
    for m in &d.morphisms {
        if let Ok(rels) = morphism_relations(d, &coend.offsets, amb, m) {
            for r in rels {
                // probe the relation in each tensor slot against basis vectors
                let arity = if amb_map.dom_dim() == amb {
                    1
                } else if amb_map.dom_dim() == amb * amb {
                    2
                } else {
                    3
                };
                if arity == 1 {
                    if amb_map.apply(&r).iter().any(|s| !s.is_zero()) {
                        return Error::NotWellDefined {
                            map: what,
                            morphism: m.name.clone(),
                        };
                    }
                    continue;
                }
                let mut probe = vec![f.zero(); amb_map.dom_dim()];
                for slot in 0..arity {
                    for basis in 0..amb.pow((arity - 1) as u32) {
                        for p in probe.iter_mut() {
                            *p = f.zero();
                        }
                        // embed r in `slot`, basis elsewhere
                        let mut rest = basis;
                        let mut coords = vec![0usize; arity - 1];
                        for c in coords.iter_mut().rev() {
                            *c = rest % amb;
                            rest /= amb;
                        }
                        for (ri, rv) in r.iter().enumerate() {
                            if rv.is_zero() {
                                continue;
                            }
                            let mut idx = 0usize;
                            let mut ci = 0usize;
                            for s in 0..arity {
                                idx = idx * amb + if s == slot { ri } else { coords[ci] };
                                if s != slot {
                                    ci += 1;
                                }
                            }
                            probe[idx] = rv.clone();
                        }
                        if amb_map.apply(&probe).iter().any(|s| !s.is_zero()) {
                            return Error::NotWellDefined {
                                map: what,
                                morphism: m.name.clone(),
                            };
                        }
                    }
                }
            }
        }
    }
    Error::NotWellDefined {
        map: what,
        morphism: "<unknown>".into(),
    }
}

/// The preantipode from the ∇ formula: on generators, with
/// `db_X(1) = Σ_j f_j ⊗ w_j` and dual basis `φⁱ` of `U(X★)`,
///
/// ```text
/// S(π_X(x ⊗ ξ)) = Σ_{i,j} ξ(w_j) · ev_X(x ⊗ φᵢ) · π_{X★}(f_j ⊗ φⁱ).
/// ```
///
/// Well-definedness through the quotient is verified, and the result must pass
/// `check_preantipode` — a failure signals a diagram that is not genuinely
/// rigid-monoidal.
pub fn coend_preantipode(
    d: &MonoidalDiagram,
    coend: &CoendCoalgebra,
    h: &CoquasiBialgebra,
) -> Result<Preantipode, Error> {
    let f = d.field();
    let hdim = coend.dim();
    let amb = coend.ambient_dim;
    let mut s_amb = LinearMap::zero(f, hdim, amb);
    for o in &d.objects {
        let dual = d.dual_entry(&o.name)?;
        let ds = d.dim(&dual.dual)?;
        let dx = o.dim;
        if dual.ev.len() != dx * ds || dual.db.len() != ds * dx {
            return Err(Error::DimensionMismatch {
                context: "dual entry shapes",
                expected: dx * ds,
                got: dual.ev.len(),
            });
        }
        let pstar = &coend.proj[&dual.dual];
        let off = coend.offsets[&o.name];
        for a in 0..dx {
            for b in 0..dx {
                let col = off + a * dx + b;
                for i in 0..ds {
                    let evv = &dual.ev[a * ds + i];
                    if evv.is_zero() {
                        continue;
                    }
                    for t in 0..ds {
                        let dbv = &dual.db[t * dx + b];
                        if dbv.is_zero() {
                            continue;
                        }
                        let w = evv.mul(dbv);
                        let hv = pstar.column_vec(t * ds + i);
                        for (hh, v) in hv.into_iter().enumerate() {
                            if !v.is_zero() {
                                s_amb.add_to(hh, col, &w.mul(&v));
                            }
                        }
                    }
                }
            }
        }
    }
    let s_map = s_amb.compose(&coend.section);
    if s_map.compose(&coend.projection) != s_amb {
        return Err(well_definedness_failure(d, coend, &s_amb, "preantipode"));
    }
    let p = Preantipode { s_map };
    let report = check_preantipode(h, &p);
    if !report.pass {
        return Err(Error::Invalid(format!(
            "∇ formula does not yield a preantipode (diagram is not rigid-monoidal): {report}"
        )));
    }
    Ok(p)
}

/// Extracts the coquasi-antipode `(s, α, β)` from a natural family of
/// isomorphisms `ν_X: U(X★) -> U(X)*`:
///
/// ```text
/// α(π_X(x⊗ξ)) = ξ applied to the db^{(*)} leg at x,
/// β(π_X(x⊗ξ)) = ev_X(x ⊗ ν⁻¹ξ),
/// s(π_X(x⊗ξ)) = Σ_j ξ(e_j) (eʲ)₋₁ (eʲ)₀(x)  under δ_{X*} = (H⊗ν) δ_{X★} ν⁻¹.
/// ```
///
/// The data must pass `validate_coquasi_hopf`, and `β ∗ s ∗ α` must equal the
/// ∇ preantipode.
pub fn coend_coquasi_antipode(
    d: &MonoidalDiagram,
    coend: &CoendCoalgebra,
    h: &CoquasiBialgebra,
    nu: &BTreeMap<String, LinearMap>,
) -> Result<CoquasiHopfData, Error> {
    let f = d.field();
    let hdim = coend.dim();
    let amb = coend.ambient_dim;
    let mut s_amb = LinearMap::zero(f, hdim, amb);
    let mut alpha_amb = LinearMap::zero(f, 1, amb);
    let mut beta_amb = LinearMap::zero(f, 1, amb);

    for o in &d.objects {
        let dual = d.dual_entry(&o.name)?;
        let dx = o.dim;
        let ds = d.dim(&dual.dual)?;
        let nu_x = nu
            .get(&o.name)
            .ok_or_else(|| Error::UnknownObject(format!("nu[{}]", o.name)))?;
        if nu_x.cod_dim() != dx || nu_x.dom_dim() != ds {
            return Err(Error::DimensionMismatch {
                context: "nu shape",
                expected: dx,
                got: nu_x.cod_dim(),
            });
        }
        let nu_inv = nu_x.inverse()?;
        let off = coend.offsets[&o.name];

        // db* = (ν ⊗ id) db: 1 -> U(X)* ⊗ U(X)
        let mut db_star = vec![f.zero(); dx * dx];
        for g in 0..dx {
            for s in 0..dx {
                let mut acc = f.zero();
                for t in 0..ds {
                    let nv = nu_x.entry(g, t);
                    if !nv.is_zero() {
                        acc = acc.add(&nv.mul(&dual.db[t * dx + s]));
                    }
                }
                db_star[g * dx + s] = acc;
            }
        }
        // ev* = ev ∘ (id ⊗ ν⁻¹): U(X) ⊗ U(X)* -> k
        let mut ev_star = vec![f.zero(); dx * dx];
        for a in 0..dx {
            for g in 0..dx {
                let mut acc = f.zero();
                for t in 0..ds {
                    let nv = nu_inv.entry(t, g);
                    if !nv.is_zero() {
                        acc = acc.add(&dual.ev[a * ds + t].mul(nv));
                    }
                }
                ev_star[a * dx + g] = acc;
            }
        }
        // δ_{X*} = (H ⊗ ν) δ_{X★} ν⁻¹: U(X)* -> H ⊗ U(X)*
        let du_star = crate::exactla::tensor::apply_cod_slot(
            &coend.delta_univ[&dual.dual].compose(&nu_inv),
            &[hdim, ds],
            1,
            nu_x,
        );

        for a in 0..dx {
            for b in 0..dx {
                let col = off + a * dx + b;
                // α(π(a,b)) = db*[(a,b)], β(π(a,b)) = ev*[(a,b)]
                alpha_amb.set(0, col, db_star[a * dx + b].clone());
                beta_amb.set(0, col, ev_star[a * dx + b].clone());
                // s(π(a,b)) = Σ_h δ_{X*}[(h, a)][b] e_h
                for hh in 0..hdim {
                    let v = du_star.entry(hh * dx + a, b);
                    if !v.is_zero() {
                        s_amb.add_to(hh, col, v);
                    }
                }
            }
        }
    }

    let s = s_amb.compose(&coend.section);
    if s.compose(&coend.projection) != s_amb {
        return Err(well_definedness_failure(d, coend, &s_amb, "antipode s"));
    }
    let alpha = alpha_amb.compose(&coend.section);
    if alpha.compose(&coend.projection) != alpha_amb {
        return Err(well_definedness_failure(d, coend, &alpha_amb, "alpha"));
    }
    let beta = beta_amb.compose(&coend.section);
    if beta.compose(&coend.projection) != beta_amb {
        return Err(well_definedness_failure(d, coend, &beta_amb, "beta"));
    }

    let data = CoquasiHopfData { s, alpha, beta };
    let report = validate_coquasi_hopf(h, &data);
    if !report.pass {
        return Err(Error::Invalid(format!(
            "extracted (s, α, β) is not a coquasi-antipode for this ν: {report}"
        )));
    }
    let from_hopf = crate::cqb::preantipode_from_antipode(h, &data)?;
    let nabla = coend_preantipode(d, coend, h)?;
    if from_hopf != nabla {
        return Err(Error::Invalid(
            "β∗s∗α differs from the ∇ preantipode".into(),
        ));
    }
    Ok(data)
}

/// The canonical comparison `can(π_X(x⊗ξ)) = Σ x₋₁ ξ(x₀)` into a named
/// coquasi-bialgebra the diagram lives over. Every object must carry a
/// B-coaction and every listed morphism must be colinear (rejected otherwise).
/// The report states whether `can` is a coquasi-bialgebra morphism (when the
/// reconstructed bialgebra is supplied) and whether it is bijective, flagging
/// `galois` in that case.
pub fn can_map(
    d: &MonoidalDiagram,
    coend: &CoendCoalgebra,
    h: Option<&CoquasiBialgebra>,
    s_h: Option<&Preantipode>,
    b: &CoquasiBialgebra,
    s_b: Option<&Preantipode>,
) -> Result<(LinearMap, Report), Error> {
    let f = d.field();
    let nb = b.dim();
    let amb = coend.ambient_dim;

    // collect and check the coactions
    let mut rhos: BTreeMap<&str, &LinearMap> = BTreeMap::new();
    for o in &d.objects {
        let rho = o.rho.as_ref().ok_or_else(|| {
            Error::Schema(format!("object {:?} carries no B-coaction", o.name))
        })?;
        if rho.cod_dim() != nb * o.dim || rho.dom_dim() != o.dim {
            return Err(Error::DimensionMismatch {
                context: "object coaction",
                expected: nb * o.dim,
                got: rho.cod_dim(),
            });
        }
        let v = crate::comodcat::Comodule::new(std::sync::Arc::new(b.clone()), rho.clone())?;
        if !crate::comodcat::check_comodule(&v).pass {
            return Err(Error::Invalid(format!(
                "object {:?} is not a B-comodule",
                o.name
            )));
        }
        rhos.insert(&o.name, rho);
    }
    for m in &d.morphisms {
        let rx = rhos[m.from.as_str()];
        let ry = rhos[m.to.as_str()];
        let lhs = ry.compose(&m.matrix);
        let rhs = id(f, nb).kron(&m.matrix)?.compose(rx);
        if lhs != rhs {
            return Err(Error::Invalid(format!(
                "morphism {:?} is not B-colinear",
                m.name
            )));
        }
    }

    let mut can_amb = LinearMap::zero(f, nb, amb);
    for o in &d.objects {
        let rho = rhos[o.name.as_str()];
        let off = coend.offsets[&o.name];
        for a in 0..o.dim {
            for bb in 0..o.dim {
                // can(ι_X(e_a ⊗ e^bb)) = Σ_h ρ[(h, bb)][a] e_h
                for hh in 0..nb {
                    let v = rho.entry(hh * o.dim + bb, a);
                    if !v.is_zero() {
                        can_amb.add_to(hh, off + a * o.dim + bb, v);
                    }
                }
            }
        }
    }
    let can = can_amb.compose(&coend.section);
    if can.compose(&coend.projection) != can_amb {
        return Err(well_definedness_failure(d, coend, &can_amb, "can"));
    }

    let mut report = Report::new();
    let bijective = can.cod_dim() == can.dom_dim() && can.inverse().is_ok();
    if bijective {
        report.flag("galois");
    } else {
        report.fail("can.bijective", vec![]);
    }
    if let Some(h) = h {
        report.absorb_under("can", check_morphism(&can, h, b, s_h, s_b));
    }
    Ok((can, report))
}
