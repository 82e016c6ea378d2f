//! Exact linear solving, nullspaces, subspaces and quotient spaces.
//!
//! All bases are kept in reduced row-echelon normal form with leftmost pivots,
//! which fixes every tie-break: identical inputs yield identical bases, and the
//! quotient basis is the set of non-pivot coordinates in increasing order.

use serde::{Deserialize, Serialize};

use super::matrix::LinearMap;
use super::scalar::{Field, Scalar};
use crate::error::Error;

/// A subspace of `k^ambient_dim`, stored as an RREF basis (pivot columns
/// strictly increasing, pivot entries 1, pivots the only nonzero entries in
/// their column).
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Subspace {
    pub ambient_dim: usize,
    pub field: Field,
    basis: Vec<Vec<Scalar>>,
}

impl Subspace {
    pub fn zero(field: Field, ambient_dim: usize) -> Subspace {
        Subspace {
            ambient_dim,
            field,
            basis: Vec::new(),
        }
    }

    /// Span of arbitrary vectors, echelonized.
    pub fn from_spanning(field: Field, ambient_dim: usize, vectors: Vec<Vec<Scalar>>) -> Subspace {
        for v in &vectors {
            assert_eq!(v.len(), ambient_dim, "spanning vector length mismatch");
        }
        let basis = rref(field, vectors);
        Subspace {
            ambient_dim,
            field,
            basis,
        }
    }

    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    pub fn basis(&self) -> &[Vec<Scalar>] {
        &self.basis
    }

    pub fn pivots(&self) -> Vec<usize> {
        self.basis
            .iter()
            .map(|r| r.iter().position(|s| !s.is_zero()).expect("nonzero basis row"))
            .collect()
    }

    /// Columns are the basis vectors: a map from the subspace into the ambient
    /// space.
    pub fn inclusion(&self) -> LinearMap {
        LinearMap::from_fn(self.field, self.ambient_dim, self.dim(), |i, j| {
            self.basis[j][i].clone()
        })
    }

    /// Expresses `v` in basis coordinates if it lies in the subspace.
    ///
    /// With an RREF basis the candidate coordinates are just the entries of `v`
    /// at the pivot positions; membership is then verified exactly.
    pub fn coordinates(&self, v: &[Scalar]) -> Option<Vec<Scalar>> {
        assert_eq!(v.len(), self.ambient_dim);
        let pivots = self.pivots();
        let coords: Vec<Scalar> = pivots.iter().map(|&p| v[p].clone()).collect();
        let mut recon = vec![self.field.zero(); self.ambient_dim];
        for (c, row) in coords.iter().zip(&self.basis) {
            if c.is_zero() {
                continue;
            }
            for (r, b) in recon.iter_mut().zip(row) {
                *r = r.add(&c.mul(b));
            }
        }
        if recon.iter().zip(v).all(|(a, b)| a == b) {
            Some(coords)
        } else {
            None
        }
    }

    pub fn contains(&self, v: &[Scalar]) -> bool {
        self.coordinates(v).is_some()
    }
}

/// Reduced row-echelon form; returns the nonzero rows.
pub fn rref(field: Field, mut rows: Vec<Vec<Scalar>>) -> Vec<Vec<Scalar>> {
    if rows.is_empty() {
        return rows;
    }
    let ncols = rows[0].len();
    let nrows = rows.len();
    let mut pivot_row = 0;
    for col in 0..ncols {
        let Some(p) = (pivot_row..nrows).find(|&r| !rows[r][col].is_zero()) else {
            continue;
        };
        rows.swap(pivot_row, p);
        let inv = rows[pivot_row][col].inv().expect("nonzero pivot");
        for v in rows[pivot_row].iter_mut() {
            *v = v.mul(&inv);
        }
        for r in 0..nrows {
            if r != pivot_row && !rows[r][col].is_zero() {
                let factor = rows[r][col].clone();
                for k in col..ncols {
                    let s = rows[pivot_row][k].mul(&factor);
                    rows[r][k] = rows[r][k].sub(&s);
                }
                rows[r][col] = field.zero();
            }
        }
        pivot_row += 1;
        if pivot_row == nrows {
            break;
        }
    }
    rows.truncate(pivot_row);
    rows
}

/// Outcome of [`solve_affine`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Solution {
    Inconsistent,
    Solved {
        /// One solution (free variables set to zero).
        particular: Vec<Scalar>,
        /// RREF basis of the homogeneous solution space.
        nullspace: Subspace,
    },
}

impl Solution {
    pub fn unique(&self) -> Option<&Vec<Scalar>> {
        match self {
            Solution::Solved {
                particular,
                nullspace,
            } if nullspace.dim() == 0 => Some(particular),
            _ => None,
        }
    }
}

/// Solves `A x = b` exactly. Returns one particular solution (free variables
/// zero) plus an RREF nullspace basis, or reports inconsistency.
pub fn solve_affine(a: &LinearMap, b: &[Scalar]) -> Result<Solution, Error> {
    if b.len() != a.cod_dim() {
        return Err(Error::DimensionMismatch {
            context: "solve_affine rhs",
            expected: a.cod_dim(),
            got: b.len(),
        });
    }
    let field = a.field();
    for s in b {
        if s.field() != field {
            return Err(Error::FieldMismatch(field.to_string(), s.field().to_string()));
        }
    }
    let n = a.dom_dim();
    // augmented RREF
    let rows: Vec<Vec<Scalar>> = (0..a.cod_dim())
        .map(|i| {
            let mut r = a.row_slice(i).to_vec();
            r.push(b[i].clone());
            r
        })
        .collect();
    let red = rref(field, rows);
    let mut pivots = Vec::new();
    for row in &red {
        let lead = row.iter().position(|s| !s.is_zero()).expect("nonzero row");
        if lead == n {
            return Ok(Solution::Inconsistent);
        }
        pivots.push(lead);
    }
    let is_pivot = {
        let mut v = vec![false; n];
        for &p in &pivots {
            v[p] = true;
        }
        v
    };
    let mut particular = vec![field.zero(); n];
    for (row, &p) in red.iter().zip(&pivots) {
        particular[p] = row[n].clone();
    }
    // standard nullspace basis, one vector per free column, then re-echelonized
    // into normal form
    let mut null_vectors = Vec::new();
    for free in 0..n {
        if is_pivot[free] {
            continue;
        }
        let mut v = vec![field.zero(); n];
        v[free] = field.one();
        for (row, &p) in red.iter().zip(&pivots) {
            v[p] = row[free].neg();
        }
        null_vectors.push(v);
    }
    let nullspace = Subspace::from_spanning(field, n, null_vectors);
    Ok(Solution::Solved {
        particular,
        nullspace,
    })
}

/// Nullspace of `A` as a subspace of the domain.
pub fn nullspace(a: &LinearMap) -> Subspace {
    let zero = vec![a.field().zero(); a.cod_dim()];
    match solve_affine(a, &zero).expect("dims fixed") {
        Solution::Solved { nullspace, .. } => nullspace,
        Solution::Inconsistent => unreachable!("homogeneous systems are consistent"),
    }
}

/// Projection and section for the quotient of `k^ambient_dim` by `relations`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Quotient {
    /// `ambient -> quotient`; full row rank, kernel = relations.
    pub proj: LinearMap,
    /// `quotient -> ambient`; `proj ∘ section = id`. Sends the class basis to
    /// the non-pivot coordinates of the echelonized relations, in increasing
    /// order.
    pub section: LinearMap,
}

pub fn quotient(ambient_dim: usize, relations: &Subspace) -> Result<Quotient, Error> {
    if relations.ambient_dim != ambient_dim {
        return Err(Error::DimensionMismatch {
            context: "quotient relations",
            expected: ambient_dim,
            got: relations.ambient_dim,
        });
    }
    let field = relations.field;
    let pivots = relations.pivots();
    let mut is_pivot = vec![false; ambient_dim];
    for &p in &pivots {
        is_pivot[p] = true;
    }
    let free: Vec<usize> = (0..ambient_dim).filter(|i| !is_pivot[*i]).collect();
    let q = free.len();
    let mut proj = LinearMap::zero(field, q, ambient_dim);
    for (k, &f) in free.iter().enumerate() {
        proj.set(k, f, field.one());
    }
    // pivot coordinate e_p is congruent to minus the free tail of its relation row
    for (row, &p) in relations.basis().iter().zip(&pivots) {
        for (k, &f) in free.iter().enumerate() {
            if !row[f].is_zero() {
                proj.set(k, p, row[f].neg());
            }
        }
    }
    let mut section = LinearMap::zero(field, ambient_dim, q);
    for (k, &f) in free.iter().enumerate() {
        section.set(f, k, field.one());
    }
    Ok(Quotient { proj, section })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q() -> Field {
        Field::Rational
    }

    fn vec_i64(field: Field, v: &[i64]) -> Vec<Scalar> {
        v.iter().map(|&x| field.from_i64(x)).collect()
    }

    #[test]
    fn solve_identity() {
        let a = LinearMap::identity(q(), 2);
        let sol = solve_affine(&a, &vec_i64(q(), &[1, 0])).unwrap();
        match sol {
            Solution::Solved {
                particular,
                nullspace,
            } => {
                assert_eq!(particular, vec_i64(q(), &[1, 0]));
                assert_eq!(nullspace.dim(), 0);
            }
            _ => panic!("expected solution"),
        }
    }

    #[test]
    fn solve_inconsistent() {
        let a = LinearMap::zero(q(), 2, 2);
        let sol = solve_affine(&a, &vec_i64(q(), &[1, 0])).unwrap();
        assert_eq!(sol, Solution::Inconsistent);
    }

    #[test]
    fn solve_rank_deficient() {
        // hand Gaussian elimination: x0 + x1 = 3 (twice) => particular (3, 0),
        // nullspace spanned by (1, -1)
        let a = LinearMap::from_rows_i64(q(), &[&[1, 1], &[2, 2]]);
        let sol = solve_affine(&a, &vec_i64(q(), &[3, 6])).unwrap();
        match sol {
            Solution::Solved {
                particular,
                nullspace,
            } => {
                assert_eq!(particular, vec_i64(q(), &[3, 0]));
                assert_eq!(nullspace.dim(), 1);
                assert_eq!(nullspace.basis()[0], vec_i64(q(), &[1, -1]));
            }
            _ => panic!("expected solution"),
        }
    }

    #[test]
    fn quotient_by_zero_and_full() {
        let zero = Subspace::zero(q(), 3);
        let quot = quotient(3, &zero).unwrap();
        assert!(quot.proj.is_identity());
        assert!(quot.section.is_identity());

        let full = Subspace::from_spanning(
            q(),
            2,
            vec![vec_i64(q(), &[1, 0]), vec_i64(q(), &[0, 1])],
        );
        let quot = quotient(2, &full).unwrap();
        assert_eq!(quot.proj.cod_dim(), 0);
    }

    #[test]
    fn quotient_identifies_classes() {
        // relations = span{(1, -1)}: pivot at 0, so proj(e0) = proj(e1)
        let rel = Subspace::from_spanning(q(), 2, vec![vec_i64(q(), &[1, -1])]);
        let quot = quotient(2, &rel).unwrap();
        assert_eq!(quot.proj.cod_dim(), 1);
        assert_eq!(quot.proj.entry(0, 0), quot.proj.entry(0, 1));
        assert!(quot.proj.compose(&quot.section).is_identity());
        // relations die in the quotient
        let img = quot.proj.apply(&vec_i64(q(), &[1, -1]));
        assert!(img.iter().all(|s| s.is_zero()));
    }

    #[test]
    fn subspace_membership() {
        let s = Subspace::from_spanning(
            q(),
            3,
            vec![vec_i64(q(), &[1, 2, 0]), vec_i64(q(), &[0, 0, 1])],
        );
        assert!(s.contains(&vec_i64(q(), &[2, 4, 5])));
        assert!(!s.contains(&vec_i64(q(), &[1, 0, 0])));
        assert_eq!(
            s.coordinates(&vec_i64(q(), &[2, 4, 5])).unwrap(),
            vec_i64(q(), &[2, 5])
        );
    }
}
