//! The monoidal category of finite-dimensional left H-comodules.
//!
//! Left coactions are stored H-leg first (`ρ: V -> H ⊗ V`), right coactions
//! H-leg last (`ρ: V -> V ⊗ H`); the constructors enforce the shapes, which
//! keeps the ρ-heavy formulas free of silent transpositions. Tensor products
//! carry the diagonal coaction, the associator is the ω⁻¹-twist, units are
//! strict, and right duals come from the coinvariants of `V* ⊗ H` with the
//! preantipode feeding the dual basis map.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::cqb::{CoquasiBialgebra, Preantipode};
use crate::error::Error;
use crate::exactla::tensor::{apply_cod_slot, contract_cod, id, permute_cod_slots};
use crate::exactla::{nullspace, LinearMap, Scalar, Subspace};
use crate::report::Report;

/// A finite-dimensional left H-comodule.
#[derive(Clone, Debug)]
pub struct Comodule {
    pub h: Arc<CoquasiBialgebra>,
    pub dim: usize,
    /// `ρ: V -> H ⊗ V`, an `(n·d) × d` matrix, H-leg first.
    pub rho: LinearMap,
}

impl Comodule {
    pub fn new(h: Arc<CoquasiBialgebra>, rho: LinearMap) -> Result<Comodule, Error> {
        let d = rho.dom_dim();
        rho.same_field(&h.mult)?;
        if rho.cod_dim() != h.dim() * d {
            return Err(Error::DimensionMismatch {
                context: "left coaction codomain",
                expected: h.dim() * d,
                got: rho.cod_dim(),
            });
        }
        Ok(Comodule { h, dim: d, rho })
    }

    /// The trivial coaction `ρ(v) = 1 ⊗ v` on a `d`-dimensional space.
    pub fn trivial(h: Arc<CoquasiBialgebra>, d: usize) -> Comodule {
        let rho = h.unit.kron(&id(h.field(), d)).unwrap();
        Comodule { h, dim: d, rho }
    }

    /// The regular comodule `(H, Δ)`.
    pub fn regular(h: Arc<CoquasiBialgebra>) -> Comodule {
        let rho = h.delta().clone();
        let dim = h.dim();
        Comodule { h, dim, rho }
    }

    /// A line `k·v` with `ρ(v) = e_g ⊗ v`; a comodule exactly when `e_g` is
    /// group-like.
    pub fn graded_line(h: Arc<CoquasiBialgebra>, g: usize) -> Comodule {
        let f = h.field();
        let n = h.dim();
        let mut rho = LinearMap::zero(f, n, 1);
        rho.set(g, 0, f.one());
        Comodule { h, dim: 1, rho }
    }

    /// Block-diagonal direct sum.
    pub fn direct_sum(&self, other: &Comodule) -> Result<Comodule, Error> {
        self.same_h(other)?;
        let n = self.h.dim();
        let (d1, d2) = (self.dim, other.dim);
        let d = d1 + d2;
        let f = self.rho.field();
        let mut rho = LinearMap::zero(f, n * d, d);
        for hh in 0..n {
            for i in 0..d1 {
                for j in 0..d1 {
                    rho.set(hh * d + i, j, self.rho.entry(hh * d1 + i, j).clone());
                }
            }
            for i in 0..d2 {
                for j in 0..d2 {
                    rho.set(
                        hh * d + d1 + i,
                        d1 + j,
                        other.rho.entry(hh * d2 + i, j).clone(),
                    );
                }
            }
        }
        Comodule::new(Arc::clone(&self.h), rho)
    }

    fn same_h(&self, other: &Comodule) -> Result<(), Error> {
        if !Arc::ptr_eq(&self.h, &other.h) && self.h != other.h {
            return Err(Error::Invalid(
                "comodules live over different coquasi-bialgebras".into(),
            ));
        }
        Ok(())
    }
}

/// A right H-comodule (`ρ: V -> V ⊗ H`, H-leg last).
#[derive(Clone, Debug)]
pub struct RightComodule {
    pub h: Arc<CoquasiBialgebra>,
    pub dim: usize,
    pub rho: LinearMap,
}

impl RightComodule {
    pub fn new(h: Arc<CoquasiBialgebra>, rho: LinearMap) -> Result<RightComodule, Error> {
        let d = rho.dom_dim();
        rho.same_field(&h.mult)?;
        if rho.cod_dim() != d * h.dim() {
            return Err(Error::DimensionMismatch {
                context: "right coaction codomain",
                expected: d * h.dim(),
                got: rho.cod_dim(),
            });
        }
        Ok(RightComodule { h, dim: d, rho })
    }

    pub fn trivial(h: Arc<CoquasiBialgebra>, d: usize) -> RightComodule {
        let rho = id(h.field(), d).kron(&h.unit).unwrap();
        RightComodule { h, dim: d, rho }
    }

    /// `(H, Δ)` as a right comodule.
    pub fn regular(h: Arc<CoquasiBialgebra>) -> RightComodule {
        let rho = h.delta().clone();
        let dim = h.dim();
        RightComodule { h, dim, rho }
    }
}

/// Coassociativity and counitality of a left coaction.
pub fn check_comodule(v: &Comodule) -> Report {
    let n = v.h.dim();
    let d = v.dim;
    let f = v.rho.field();
    let mut report = Report::new();
    let lhs = v.h.delta().kron(&id(f, d)).unwrap().compose(&v.rho);
    let rhs = id(f, n).kron(&v.rho).unwrap().compose(&v.rho);
    if let Some(idx) = lhs.first_mismatch(&rhs, &[d]) {
        report.fail("comodule.coassociativity", idx);
    }
    let counit = v.h.counit().kron(&id(f, d)).unwrap().compose(&v.rho);
    if let Some(idx) = counit.first_mismatch(&id(f, d), &[d]) {
        report.fail("comodule.counit", idx);
    }
    report
}

/// Coassociativity and counitality of a right coaction.
pub fn check_right_comodule(v: &RightComodule) -> Report {
    let n = v.h.dim();
    let d = v.dim;
    let f = v.rho.field();
    let mut report = Report::new();
    let lhs = id(f, d).kron(v.h.delta()).unwrap().compose(&v.rho);
    let rhs = v.rho.kron(&id(f, n)).unwrap().compose(&v.rho);
    if let Some(idx) = lhs.first_mismatch(&rhs, &[d]) {
        report.fail("comodule.coassociativity", idx);
    }
    let counit = id(f, d).kron(v.h.counit()).unwrap().compose(&v.rho);
    if let Some(idx) = counit.first_mismatch(&id(f, d), &[d]) {
        report.fail("comodule.counit", idx);
    }
    report
}

/// Diagonal tensor coaction `ρ(v⊗w) = Σ v₋₁w₋₁ ⊗ v₀ ⊗ w₀`.
pub fn tensor_comodule(v: &Comodule, w: &Comodule) -> Result<Comodule, Error> {
    v.same_h(w)?;
    let n = v.h.dim();
    let big = v.rho.kron(&w.rho)?; // (h1, v0, h2, w0)
    let moved = permute_cod_slots(&big, &[n, v.dim, n, w.dim], &[0, 2, 1, 3]);
    let rho = apply_cod_slot(&moved, &[n * n, v.dim, w.dim], 0, &v.h.mult);
    Comodule::new(Arc::clone(&v.h), rho)
}

/// The associator `a(u⊗v⊗w) = Σ ω⁻¹(u₋₁ ⊗ v₋₁ ⊗ w₋₁) u₀ ⊗ v₀ ⊗ w₀`,
/// verified to be an H-colinear isomorphism before being returned.
pub fn associator(u: &Comodule, v: &Comodule, w: &Comodule) -> Result<LinearMap, Error> {
    u.same_h(v)?;
    u.same_h(w)?;
    let a = associator_raw(u, v, w, &u.h.omega_inv);
    let a_inv = associator_raw(u, v, w, &u.h.omega);
    if !a.compose(&a_inv).is_identity() {
        return Err(Error::Invalid("associator is not invertible".into()));
    }
    // colinearity: ρ_{U⊗(V⊗W)} ∘ a = (H ⊗ a) ∘ ρ_{(U⊗V)⊗W}
    let left_assoc = tensor_comodule(&tensor_comodule(u, v)?, w)?;
    let right_assoc = tensor_comodule(u, &tensor_comodule(v, w)?)?;
    let lhs = right_assoc.rho.compose(&a);
    let rhs = id(a.field(), u.h.dim()).kron(&a)?.compose(&left_assoc.rho);
    if lhs != rhs {
        return Err(Error::Invalid("associator is not H-colinear".into()));
    }
    Ok(a)
}

/// The ω-twist matrix without the validity checks (also used for a⁻¹ by
/// passing ω instead of ω⁻¹).
pub fn associator_raw(
    u: &Comodule,
    v: &Comodule,
    w: &Comodule,
    functional: &LinearMap,
) -> LinearMap {
    let n = u.h.dim();
    let big = u.rho.kron(&v.rho).unwrap().kron(&w.rho).unwrap();
    contract_cod(
        &big,
        &[n, u.dim, n, v.dim, n, w.dim],
        &[0, 2, 4],
        functional,
    )
}

/// The space of right coinvariants `{m : ρ(m) = m ⊗ 1}`, as the kernel of
/// `ρ - (id ⊗ u)`, echelonized.
pub fn coinvariants(m: &RightComodule) -> Subspace {
    let embed = id(m.rho.field(), m.dim).kron(&m.h.unit).unwrap();
    nullspace(&m.rho.sub(&embed))
}

/// A right dual `(V★, ev, db)` inside the comodule category.
#[derive(Clone, Debug)]
pub struct DualComoduleData {
    pub dual: Comodule,
    /// `ev: V ⊗ V★ -> k`.
    pub ev: LinearMap,
    /// `db: k -> V★ ⊗ V`.
    pub db: LinearMap,
}

/// The induced right coaction on `V*`: `Σ f₀(w) f₁ = Σ w₋₁ f(w₀)`.
pub fn dual_right_coaction(v: &Comodule) -> RightComodule {
    let n = v.h.dim();
    let d = v.dim;
    let rho = LinearMap::from_fn(v.rho.field(), d * n, d, |row, i| {
        let (w, hh) = (row / n, row % n);
        v.rho.entry(hh * d + i, w).clone()
    });
    RightComodule {
        h: Arc::clone(&v.h),
        dim: d,
        rho,
    }
}

/// Constructs the right dual `V★ = (V* ⊗ H)^{coH}` with
/// `ρ(Σ f_t ⊗ b_t) = Σ (b_t)₁ ⊗ (f_t ⊗ (b_t)₂)`,
/// `ev(u ⊗ Σ f_t ⊗ b_t) = Σ f_t(u) ε(b_t)` and
/// `db(1) = Σᵢ (vⁱ₀ ⊗ S(vⁱ₁)) ⊗ vᵢ`.
///
/// Colinearity of ev and db and both zigzag identities (with the ω-associators)
/// are verified before returning; failures signal invalid `S` or `H` and
/// produce an error rather than unverified dual data.
pub fn dual_comodule(v: &Comodule, s: &Preantipode) -> Result<DualComoduleData, Error> {
    let h = &v.h;
    let n = h.dim();
    let d = v.dim;
    let f = v.rho.field();
    let star_fail = |what: &str| Error::Invalid(format!("dual_comodule: {what}"));

    // X = V* ⊗ H with the diagonal right coaction
    let vstar = dual_right_coaction(v);
    let big = vstar.rho.kron(h.delta()).unwrap(); // (f0, f1, b1, b2) from (f, b)
    let moved = permute_cod_slots(&big, &[d, n, n, n], &[0, 2, 1, 3]); // (f0, b1, f1, b2)
    // (f0, b1, f1·b2): the first two slots are X = V*⊗H, the last is the H-leg
    let rho_x = apply_cod_slot(&moved, &[d, n, n * n], 2, &h.mult);
    let x = RightComodule::new(Arc::clone(h), rho_x)?;
    let w = coinvariants(&x);
    let dstar = w.dim();
    let incl = w.inclusion(); // (d·n) × d★

    // coaction on V★: (f ⊗ b) ↦ b₁ ⊗ (f ⊗ b₂), restricted to W
    let c = permute_cod_slots(
        &id(f, d).kron(h.delta()).unwrap(),
        &[d, n, n],
        &[1, 0, 2],
    ); // (b1, f, b2)
    let c_on_w = c.compose(&incl); // (n·d·n) × d★
    let mut rho_dual = LinearMap::zero(f, n * dstar, dstar);
    for col in 0..dstar {
        let full = c_on_w.column_vec(col);
        for hh in 0..n {
            let slice: Vec<Scalar> =
                (0..d * n).map(|m| full[hh * d * n + m].clone()).collect();
            let coords = w
                .coordinates(&slice)
                .ok_or_else(|| star_fail("coaction does not close on the coinvariants"))?;
            for (t, val) in coords.into_iter().enumerate() {
                rho_dual.set(hh * dstar + t, col, val);
            }
        }
    }
    let dual = Comodule::new(Arc::clone(h), rho_dual)?;
    let rep = check_comodule(&dual);
    if !rep.pass {
        return Err(star_fail("dual coaction fails the comodule axioms"));
    }

    // ev(u ⊗ (f ⊗ b)) = f(u) ε(b), restricted along W in the second slot
    let ev_amb = LinearMap::from_fn(f, 1, d * d * n, |_, idx| {
        let b = idx % n;
        let ff = (idx / n) % d;
        let uu = idx / (n * d);
        if uu == ff {
            h.counit().entry(0, b).clone()
        } else {
            f.zero()
        }
    });
    let ev = ev_amb.compose(&id(f, d).kron(&incl).unwrap());

    // db(1) = Σᵢ (vⁱ₀ ⊗ S(vⁱ₁)) ⊗ vᵢ ∈ (V*⊗H) ⊗ V, each X-slice through W
    let s_on_leg = apply_cod_slot(&vstar.rho, &[d, n], 1, &s.s_map); // (f0, S(f1)) from f
    let mut db = LinearMap::zero(f, dstar * d, 1);
    for i in 0..d {
        let slice = s_on_leg.column_vec(i);
        let coords = w
            .coordinates(&slice)
            .ok_or_else(|| star_fail("dual basis leg does not land in the coinvariants"))?;
        for (t, val) in coords.into_iter().enumerate() {
            db.set(t * d + i, 0, val);
        }
    }

    // colinearity of ev and db
    let v_vstar = tensor_comodule(v, &dual)?;
    let lhs = h.unit.compose(&ev);
    let rhs = id(f, n).kron(&ev).unwrap().compose(&v_vstar.rho);
    if lhs != rhs {
        return Err(star_fail("evaluation is not colinear"));
    }
    let vstar_v = tensor_comodule(&dual, v)?;
    let lhs = vstar_v.rho.compose(&db);
    let rhs = h.unit.kron(&db).unwrap();
    if lhs != rhs {
        return Err(star_fail("dual basis is not colinear"));
    }

    // zigzags with the ω-associators
    let data = DualComoduleData { dual, ev, db };
    let (z1, z2) = zigzags(v, &data);
    if !z1.is_identity() {
        return Err(star_fail("zigzag (ev ⊗ V) a⁻¹ (V ⊗ db) is not the identity"));
    }
    if !z2.is_identity() {
        return Err(star_fail("zigzag (V★ ⊗ ev) a (db ⊗ V★) is not the identity"));
    }
    Ok(data)
}

/// The two zigzag composites of a dual candidate, computed with the
/// ω-associators and strict units.
pub fn zigzags(v: &Comodule, data: &DualComoduleData) -> (LinearMap, LinearMap) {
    let d = v.dim;
    let dstar = data.dual.dim;
    let f = v.rho.field();
    // (ev ⊗ V) ∘ a⁻¹_{V,V★,V} ∘ (V ⊗ db)
    let a_inv = associator_raw(v, &data.dual, v, &v.h.omega);
    let step = a_inv.compose(&id(f, d).kron(&data.db).unwrap());
    let z1 = apply_cod_slot(&step, &[d * dstar, d], 0, &data.ev);
    // (V★ ⊗ ev) ∘ a_{V★,V,V★} ∘ (db ⊗ V★)
    let a = associator_raw(&data.dual, v, &data.dual, &v.h.omega_inv);
    let step = a.compose(&data.db.kron(&id(f, dstar)).unwrap());
    let z2 = apply_cod_slot(&step, &[dstar, d * dstar], 1, &data.ev);
    (z1, z2)
}

/// The comparison isomorphism between two right duals of the same comodule:
/// `κ = (id ⊗ ev⁽¹⁾) ∘ a ∘ (db⁽²⁾ ⊗ id)` (strict units), verified to satisfy
/// `(κ ⊗ id) db⁽¹⁾ = db⁽²⁾` and `ev⁽²⁾ (id ⊗ κ) = ev⁽¹⁾`.
pub fn kappa(
    v: &Comodule,
    d1: &DualComoduleData,
    d2: &DualComoduleData,
) -> Result<LinearMap, Error> {
    let f = v.rho.field();
    let d = v.dim;
    let (k1, k2) = (d1.dual.dim, d2.dual.dim);
    let a = associator_raw(&d2.dual, v, &d1.dual, &v.h.omega_inv);
    let step = a.compose(&d2.db.kron(&id(f, k1)).unwrap());
    let kap = apply_cod_slot(&step, &[k2, d * k1], 1, &d1.ev);
    let lhs = kap.kron(&id(f, d)).unwrap().compose(&d1.db);
    if lhs != d2.db {
        return Err(Error::Invalid("kappa does not transport db".into()));
    }
    let lhs = d2.ev.compose(&id(f, d).kron(&kap).unwrap());
    if lhs != d1.ev {
        return Err(Error::Invalid("kappa does not transport ev".into()));
    }
    Ok(kap)
}

// --- serialization -----------------------------------------------------------

/// Reference to the coquasi-bialgebra a comodule file lives over: either a
/// name resolved by the caller or the full inline structure.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(untagged)]
pub enum OverRef {
    Name(String),
    Inline(Box<CoquasiBialgebra>),
}

/// On-disk form of a comodule: `{"over": …, "dim": d, "rho": [[…]]}`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ComoduleFile {
    pub over: OverRef,
    pub dim: usize,
    pub rho: LinearMap,
}

impl ComoduleFile {
    pub fn into_comodule(self, resolve: impl FnOnce(&str) -> Option<CoquasiBialgebra>) -> Result<Comodule, Error> {
        let h = match self.over {
            OverRef::Inline(h) => *h,
            OverRef::Name(name) => {
                resolve(&name).ok_or_else(|| Error::UnknownObject(name))?
            }
        };
        if self.rho.dom_dim() != self.dim {
            return Err(Error::DimensionMismatch {
                context: "comodule rho domain",
                expected: self.dim,
                got: self.rho.dom_dim(),
            });
        }
        Comodule::new(Arc::new(h), self.rho)
    }
}
