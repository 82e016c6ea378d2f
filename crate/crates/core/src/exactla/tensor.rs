//! Slot operations on maps into and out of tensor-power spaces.
//!
//! Formulas in Sweedler notation become chains of these primitives: apply a map
//! to one tensor slot, contract a functional against several slots, permute
//! slots. All of them loop over nonzero entries instead of materializing
//! Kronecker factors, which keeps the n^k intermediates at desk scale.
//!
//! Slot index bookkeeping is the caller's job: each helper takes the current
//! dimension list and returns maps whose codomain/domain dims the caller tracks.

use super::matrix::{decode_index, encode_index, LinearMap};
use super::scalar::Field;

fn product(dims: &[usize]) -> usize {
    dims.iter().product()
}

/// Applies `op` to the `slot`-th codomain slot: `result = (I ⊗ op ⊗ I) ∘ map`.
/// The slot's dimension changes from `dims[slot]` to `op.cod_dim()`.
///
/// To apply a map like a multiplication to two *adjacent* slots, pass a merged
/// dims list (`[.., d1 * d2, ..]`): flat Kronecker indexing makes the merged
/// view literally the same coordinates.
pub fn apply_cod_slot(map: &LinearMap, dims: &[usize], slot: usize, op: &LinearMap) -> LinearMap {
    assert_eq!(product(dims), map.cod_dim(), "cod dims mismatch");
    assert_eq!(op.dom_dim(), dims[slot], "op domain vs slot dim");
    let lead: usize = product(&dims[..slot]);
    let mid = dims[slot];
    let tail: usize = product(&dims[slot + 1..]);
    let out_mid = op.cod_dim();
    let mut out = LinearMap::zero(map.field(), lead * out_mid * tail, map.dom_dim());
    for i in 0..map.cod_dim() {
        let t = i % tail;
        let m = (i / tail) % mid;
        let l = i / (tail * mid);
        for j in 0..map.dom_dim() {
            let v = map.entry(i, j);
            if v.is_zero() {
                continue;
            }
            for o in 0..out_mid {
                let c = op.entry(o, m);
                if c.is_zero() {
                    continue;
                }
                out.add_to((l * out_mid + o) * tail + t, j, &c.mul(v));
            }
        }
    }
    out
}

/// Precomposes `op` at the `slot`-th domain slot: `result = map ∘ (I ⊗ op ⊗ I)`.
/// The slot's dimension changes from `dims[slot]` to `op.dom_dim()`.
pub fn apply_dom_slot(map: &LinearMap, dims: &[usize], slot: usize, op: &LinearMap) -> LinearMap {
    assert_eq!(product(dims), map.dom_dim(), "dom dims mismatch");
    assert_eq!(op.cod_dim(), dims[slot], "op codomain vs slot dim");
    let lead: usize = product(&dims[..slot]);
    let mid = dims[slot];
    let tail: usize = product(&dims[slot + 1..]);
    let in_mid = op.dom_dim();
    let mut out = LinearMap::zero(map.field(), map.cod_dim(), lead * in_mid * tail);
    for j in 0..map.dom_dim() {
        let t = j % tail;
        let m = (j / tail) % mid;
        let l = j / (tail * mid);
        for nj in 0..in_mid {
            let c = op.entry(m, nj);
            if c.is_zero() {
                continue;
            }
            let col = (l * in_mid + nj) * tail + t;
            for i in 0..map.cod_dim() {
                let v = map.entry(i, j);
                if v.is_zero() {
                    continue;
                }
                out.add_to(i, col, &v.mul(c));
            }
        }
    }
    out
}

/// Contracts a functional (`1 × prod(dims[slots])`) against the chosen codomain
/// slots, taken in the order given. Remaining slots keep their original order.
pub fn contract_cod(
    map: &LinearMap,
    dims: &[usize],
    slots: &[usize],
    functional: &LinearMap,
) -> LinearMap {
    assert_eq!(product(dims), map.cod_dim(), "cod dims mismatch");
    assert_eq!(functional.cod_dim(), 1, "contraction needs a functional");
    let slot_dims: Vec<usize> = slots.iter().map(|&s| dims[s]).collect();
    assert_eq!(functional.dom_dim(), product(&slot_dims));
    let keep: Vec<usize> = (0..dims.len()).filter(|s| !slots.contains(s)).collect();
    let keep_dims: Vec<usize> = keep.iter().map(|&s| dims[s]).collect();
    let mut out = LinearMap::zero(map.field(), product(&keep_dims), map.dom_dim());
    for i in 0..map.cod_dim() {
        let multi = decode_index(i, dims);
        let s_idx: Vec<usize> = slots.iter().map(|&s| multi[s]).collect();
        let c = functional.entry(0, encode_index(&s_idx, &slot_dims));
        if c.is_zero() {
            continue;
        }
        let k_idx: Vec<usize> = keep.iter().map(|&s| multi[s]).collect();
        let row = encode_index(&k_idx, &keep_dims);
        for j in 0..map.dom_dim() {
            let v = map.entry(i, j);
            if !v.is_zero() {
                out.add_to(row, j, &c.mul(v));
            }
        }
    }
    out
}

/// Permutes codomain slots: output slot `t` carries input slot `perm[t]`, so
/// the result has dims `[dims[perm[0]], dims[perm[1]], ...]`.
pub fn permute_cod_slots(map: &LinearMap, dims: &[usize], perm: &[usize]) -> LinearMap {
    assert_eq!(product(dims), map.cod_dim());
    assert_eq!(perm.len(), dims.len());
    let new_dims: Vec<usize> = perm.iter().map(|&p| dims[p]).collect();
    let mut out = LinearMap::zero(map.field(), map.cod_dim(), map.dom_dim());
    for i in 0..map.cod_dim() {
        let multi = decode_index(i, dims);
        let moved: Vec<usize> = perm.iter().map(|&p| multi[p]).collect();
        let ni = encode_index(&moved, &new_dims);
        for j in 0..map.dom_dim() {
            let v = map.entry(i, j);
            if !v.is_zero() {
                out.set(ni, j, v.clone());
            }
        }
    }
    out
}

/// Permutes domain slots: the result, applied to a tensor whose slot `t` is the
/// original slot `perm[t]`, agrees with `map`.
pub fn permute_dom_slots(map: &LinearMap, dims: &[usize], perm: &[usize]) -> LinearMap {
    assert_eq!(product(dims), map.dom_dim());
    assert_eq!(perm.len(), dims.len());
    let new_dims: Vec<usize> = perm.iter().map(|&p| dims[p]).collect();
    let mut out = LinearMap::zero(map.field(), map.cod_dim(), map.dom_dim());
    for j in 0..map.dom_dim() {
        let multi = decode_index(j, dims);
        let moved: Vec<usize> = perm.iter().map(|&p| multi[p]).collect();
        let nj = encode_index(&moved, &new_dims);
        for i in 0..map.cod_dim() {
            let v = map.entry(i, j);
            if !v.is_zero() {
                out.set(i, nj, v.clone());
            }
        }
    }
    out
}

/// Kronecker product of several maps, left to right.
pub fn kron_many(maps: &[&LinearMap]) -> LinearMap {
    assert!(!maps.is_empty());
    let mut acc = maps[0].clone();
    for m in &maps[1..] {
        acc = acc.kron(m).expect("kron field mismatch");
    }
    acc
}

/// Convolution of maps out of the k-th tensor power of a coalgebra with
/// comultiplication `delta` (`n² × n`).
///
/// `f: c_f × n^k` and `g: c_g × n^k` are convolved slotwise —
/// `(f ∗ g)(x) = mult(f(x_1) ⊗ g(x_2))` with `Δ` applied in every slot — and
/// `mult: c_out × (c_f · c_g)` multiplies the two values. For scalar-valued
/// maps pass `mult = [[1]]`; for an H-valued map against a scalar one pass the
/// identity. The fold never materializes the tensor-power comultiplication.
pub fn convolve_on_power(
    f: &LinearMap,
    g: &LinearMap,
    delta: &LinearMap,
    k: usize,
    mult: &LinearMap,
) -> LinearMap {
    assert!(k >= 1);
    let field = f.field();
    let n = delta.dom_dim();
    assert_eq!(delta.cod_dim(), n * n, "delta must be n -> n^2");
    let nk = n.pow(k as u32);
    assert_eq!(f.dom_dim(), nk, "f domain is not the k-th power");
    assert_eq!(g.dom_dim(), nk, "g domain is not the k-th power");
    let (cf, cg) = (f.cod_dim(), g.cod_dim());
    let c = cf * cg;
    assert_eq!(mult.dom_dim(), c, "mult domain vs value pair");

    // state[((r * n^s + j) * rest + x) * rest + y] after folding s slots,
    // rest = n^(k-s)
    let rest1 = n.pow((k - 1) as u32);
    let mut state = vec![field.zero(); c * n * rest1 * rest1];
    // fused first fold straight out of f and g
    for j in 0..n {
        for x1 in 0..n {
            for y1 in 0..n {
                let d = delta.entry(x1 * n + y1, j);
                if d.is_zero() {
                    continue;
                }
                for rf in 0..cf {
                    for rg in 0..cg {
                        let r = rf * cg + rg;
                        let base = ((r * n + j) * rest1) * rest1;
                        for x in 0..rest1 {
                            let fv = f.entry(rf, x1 * rest1 + x);
                            if fv.is_zero() {
                                continue;
                            }
                            let dfv = d.mul(fv);
                            for y in 0..rest1 {
                                let gv = g.entry(rg, y1 * rest1 + y);
                                if gv.is_zero() {
                                    continue;
                                }
                                let idx = base + x * rest1 + y;
                                state[idx] = state[idx].add(&dfv.mul(gv));
                            }
                        }
                    }
                }
            }
        }
    }
    let mut done = n; // n^s
    let mut rest = rest1; // n^(k-s)
    for _ in 1..k {
        let nrest = rest / n;
        let mut next = vec![field.zero(); c * done * n * nrest * nrest];
        for r in 0..c {
            for jj in 0..done {
                for j in 0..n {
                    for x1 in 0..n {
                        for y1 in 0..n {
                            let d = delta.entry(x1 * n + y1, j);
                            if d.is_zero() {
                                continue;
                            }
                            let src_base = ((r * done + jj) * rest + x1 * nrest) * rest + y1 * nrest;
                            let dst_base = (((r * done + jj) * n + j) * nrest) * nrest;
                            for x in 0..nrest {
                                for y in 0..nrest {
                                    let v = &state[src_base + x * rest + y];
                                    if v.is_zero() {
                                        continue;
                                    }
                                    let idx = dst_base + x * nrest + y;
                                    next[idx] = next[idx].add(&d.mul(v));
                                }
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
    // state is now c × n^k; apply mult
    let mut out = LinearMap::zero(field, mult.cod_dim(), nk);
    for o in 0..mult.cod_dim() {
        for r in 0..c {
            let w = mult.entry(o, r);
            if w.is_zero() {
                continue;
            }
            for jj in 0..nk {
                let v = &state[r * nk + jj];
                if !v.is_zero() {
                    out.add_to(o, jj, &w.mul(v));
                }
            }
        }
    }
    out
}

/// Materialized comultiplication of the k-th tensor power coalgebra
/// (interleave ∘ Δ^{⊗k}); test-scale only, the convolution engine above is the
/// production path.
pub fn tensor_power_delta(delta: &LinearMap, k: usize) -> LinearMap {
    let n = delta.dom_dim();
    let mut maps = Vec::new();
    for _ in 0..k {
        maps.push(delta);
    }
    let kd = kron_many(&maps);
    // slots (x1, y1, x2, y2, ...) -> (x1..xk, y1..yk)
    let dims = vec![n; 2 * k];
    let perm: Vec<usize> = (0..k).map(|t| 2 * t).chain((0..k).map(|t| 2 * t + 1)).collect();
    permute_cod_slots(&kd, &dims, &perm)
}

/// `id_{dim}` shorthand used all over the formula code.
pub fn id(field: Field, dim: usize) -> LinearMap {
    LinearMap::identity(field, dim)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exactla::matrix::LinearMap;
    use crate::exactla::scalar::Field;

    fn q() -> Field {
        Field::Rational
    }

    #[test]
    fn cod_slot_application_matches_kron() {
        let map = LinearMap::from_rows_i64(q(), &[&[1], &[2], &[3], &[4], &[5], &[6]]); // 1 -> 2x3
        let op = LinearMap::from_rows_i64(q(), &[&[1, 1, 0], &[0, 1, 2]]); // 3 -> 2
        let direct = LinearMap::identity(q(), 2).kron(&op).unwrap().compose(&map);
        let slotted = apply_cod_slot(&map, &[2, 3], 1, &op);
        assert_eq!(direct, slotted);
    }

    #[test]
    fn dom_slot_application_matches_kron() {
        let map = LinearMap::from_rows_i64(q(), &[&[1, 2, 3, 4, 5, 6]]); // 2x3 -> 1
        let op = LinearMap::from_rows_i64(q(), &[&[1, 0], &[1, 1], &[0, 2]]); // 2 -> 3
        let direct = map.compose(&LinearMap::identity(q(), 2).kron(&op).unwrap());
        let slotted = apply_dom_slot(&map, &[2, 3], 1, &op);
        assert_eq!(direct, slotted);
    }

    #[test]
    fn permutations_invert() {
        let map = LinearMap::from_fn(q(), 24, 1, |i, _| q().from_i64(i as i64));
        let dims = [2, 3, 4];
        let perm = [2, 0, 1];
        let moved = permute_cod_slots(&map, &dims, &perm);
        // inverse permutation restores
        let inv = [1, 2, 0];
        let new_dims: Vec<usize> = perm.iter().map(|&p| dims[p]).collect();
        let back = permute_cod_slots(&moved, &new_dims, &inv);
        assert_eq!(back, map);
    }

    #[test]
    fn contract_matches_permute_then_apply() {
        let map = LinearMap::from_fn(q(), 8, 2, |i, j| q().from_i64((i * 2 + j) as i64 % 5));
        let f = LinearMap::from_rows_i64(q(), &[&[1, -1, 2, 0]]); // contracts slots of dims 2x2
        let contracted = contract_cod(&map, &[2, 2, 2], &[0, 2], &f);
        // oracle: permute (0,2) to front, then apply f to merged front slot
        let moved = permute_cod_slots(&map, &[2, 2, 2], &[0, 2, 1]);
        let oracle = apply_cod_slot(&moved, &[4, 2], 0, &f);
        assert_eq!(contracted, oracle);
    }

    #[test]
    fn convolution_engine_matches_dense_path_k1() {
        // group-like Z/2 coalgebra
        let delta = LinearMap::from_rows_i64(q(), &[&[1, 0], &[0, 0], &[0, 0], &[0, 1]]);
        let f = LinearMap::from_rows_i64(q(), &[&[3, 1], &[0, 2]]);
        let g = LinearMap::from_rows_i64(q(), &[&[1, 5], &[2, 0]]);
        let mult = LinearMap::from_rows_i64(q(), &[&[1, 0, 0, 1], &[0, 1, 1, 0]]);
        let engine = convolve_on_power(&f, &g, &delta, 1, &mult);
        let dense = mult.compose(&f.kron(&g).unwrap()).compose(&delta);
        assert_eq!(engine, dense);
    }

    #[test]
    fn convolution_engine_matches_dense_path_k2() {
        // non-group-like coalgebra entries to stress the fold
        let delta = LinearMap::from_rows_i64(q(), &[&[1, 0], &[0, 1], &[0, 1], &[1, 0]]);
        let f = LinearMap::from_rows_i64(q(), &[&[1, 2, 3, 4]]);
        let g = LinearMap::from_rows_i64(q(), &[&[5, 6, 7, 8]]);
        let one = LinearMap::from_rows_i64(q(), &[&[1]]);
        let engine = convolve_on_power(&f, &g, &delta, 2, &one);
        let dense = f
            .kron(&g)
            .unwrap()
            .compose(&tensor_power_delta(&delta, 2));
        assert_eq!(engine, dense);
    }
}
