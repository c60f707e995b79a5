//! Subspaces of `F_q^m` for prime `q`.
//!
//! Every subspace is represented by its reduced row echelon basis, which is
//! unique, so two [`Subspace`] values are equal iff their bases coincide.
//! Layers are ordered lexicographically on the RREF entries read row-major.

use std::collections::HashMap;
use std::fmt;

use num_bigint::BigUint;
use num_traits::{One, ToPrimitive};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::Matrix;

/// Largest dimension layer a lattice may contain.
pub const MAX_LAYER_SIZE: usize = 100_000;

/// Largest ambient dimension.
pub const MAX_AMBIENT_DIM: usize = 6;

fn is_prime(q: u32) -> bool {
    q >= 2 && (2..).take_while(|d| d * d <= q).all(|d| !q.is_multiple_of(d))
}

fn check_field(q: u32) -> Result<()> {
    if !is_prime(q) {
        return Err(Error::param(format!("field order {q} is not prime")));
    }
    if q > u8::MAX as u32 {
        return Err(Error::param(format!("field order {q} is too large")));
    }
    Ok(())
}

/// Number of `k`-dimensional subspaces of `F_q^m`, computed exactly.
pub fn gaussian_binomial(m: usize, k: usize, q: u32) -> Result<BigUint> {
    check_field(q)?;
    if k > m {
        return Err(Error::param(format!("subspace dimension {k} exceeds {m}")));
    }
    let q = BigUint::from(q);
    let mut num = BigUint::one();
    let mut den = BigUint::one();
    for i in 0..k {
        num *= q.pow((m - i) as u32) - 1u32;
        den *= q.pow((i + 1) as u32) - 1u32;
    }
    Ok(num / den)
}

/// Gaussian binomial as a machine integer, for sizes already known to be small.
pub(crate) fn gaussian_binomial_usize(m: usize, k: usize, q: u32) -> Result<usize> {
    gaussian_binomial(m, k, q)?
        .to_usize()
        .ok_or_else(|| Error::param("layer size overflows usize"))
}

/// The triple `(q, m, l)`: field order, ambient dimension, constant input dimension.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct LatticeParams {
    q: u32,
    m: usize,
    l: usize,
}

impl LatticeParams {
    pub fn new(q: u32, m: usize, l: usize) -> Result<Self> {
        check_field(q)?;
        if m == 0 || m > MAX_AMBIENT_DIM {
            return Err(Error::param(format!(
                "ambient dimension must be in 1..={MAX_AMBIENT_DIM}, got {m}"
            )));
        }
        if l > m {
            return Err(Error::param(format!("input dimension {l} exceeds ambient dimension {m}")));
        }
        let limit = BigUint::from(MAX_LAYER_SIZE);
        for d in 0..=m {
            if gaussian_binomial(m, d, q)? > limit {
                return Err(Error::param(format!(
                    "layer {d} of F_{q}^{m} has more than {MAX_LAYER_SIZE} subspaces"
                )));
            }
        }
        Ok(Self { q, m, l })
    }

    pub fn q(&self) -> u32 {
        self.q
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn l(&self) -> usize {
        self.l
    }

    pub fn layer_size(&self, dim: usize) -> Result<usize> {
        gaussian_binomial_usize(self.m, dim, self.q)
    }

    /// Input alphabet size `|X|`.
    pub fn input_size(&self) -> usize {
        self.layer_size(self.l).expect("validated at construction")
    }

    /// Output alphabet size: all subspaces of dimension at most `l`.
    pub fn output_size(&self) -> usize {
        (0..=self.l)
            .map(|s| self.layer_size(s).expect("validated at construction"))
            .sum()
    }
}

impl fmt::Display for LatticeParams {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(q={}, m={}, l={})", self.q, self.m, self.l)
    }
}

/// A subspace of `F_q^m` given by its RREF basis.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Subspace {
    q: u8,
    m: usize,
    dim: usize,
    basis: Vec<u8>,
    index: usize,
}

impl Subspace {
    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Position within the canonical ordering of its layer.
    pub fn index(&self) -> usize {
        self.index
    }

    pub fn ambient_dim(&self) -> usize {
        self.m
    }

    pub fn field_order(&self) -> u32 {
        self.q as u32
    }

    /// RREF basis, one row per basis vector.
    pub fn basis_rows(&self) -> impl Iterator<Item = &[u8]> {
        self.basis.chunks(self.m.max(1)).take(self.dim)
    }

    /// Span of arbitrary vectors over `F_q`, located in its layer of `lattice`.
    pub fn span(lattice: &Lattice, vectors: &[Vec<u8>]) -> Result<Subspace> {
        let p = lattice.params();
        let q = p.q() as u8;
        let m = p.m();
        if vectors.iter().any(|v| v.len() != m || v.iter().any(|&x| x >= q)) {
            return Err(Error::param("vector outside F_q^m"));
        }
        let basis = rref(vectors, q, m);
        let dim = basis.len() / m;
        lattice.find(dim, &basis).cloned().ok_or_else(|| {
            Error::param("span not found in lattice (dimension outside enumerated layers)")
        })
    }

    /// Reduce `v` modulo the row space; zero iff `v` lies in the subspace.
    fn reduce(&self, v: &mut [u8]) {
        let q = self.q as u16;
        for row in self.basis_rows() {
            let pivot = row.iter().position(|&x| x != 0).expect("RREF rows are nonzero");
            let c = v[pivot] as u16;
            if c == 0 {
                continue;
            }
            for (x, &r) in v.iter_mut().zip(row) {
                *x = ((*x as u16 + q * q - c * r as u16) % q) as u8;
            }
        }
    }
}

fn inv_mod(a: u8, q: u8) -> u8 {
    // Fermat: a^(q-2) mod q.
    let (q, mut base, mut exp, mut acc) = (q as u32, a as u32, q as u32 - 2, 1u32);
    while exp > 0 {
        if exp & 1 == 1 {
            acc = acc * base % q;
        }
        base = base * base % q;
        exp >>= 1;
    }
    acc as u8
}

/// Reduced row echelon form of the span of `vectors`; zero rows dropped, flattened row-major.
fn rref(vectors: &[Vec<u8>], q: u8, m: usize) -> Vec<u8> {
    let qq = q as u16;
    let mut rows: Vec<Vec<u8>> = vectors.to_vec();
    let mut rank = 0;
    for col in 0..m {
        let Some(p) = (rank..rows.len()).find(|&r| rows[r][col] != 0) else {
            continue;
        };
        rows.swap(rank, p);
        let inv = inv_mod(rows[rank][col], q) as u16;
        for x in rows[rank].iter_mut() {
            *x = (*x as u16 * inv % qq) as u8;
        }
        let pivot_row = rows[rank].clone();
        for (r, row) in rows.iter_mut().enumerate() {
            let c = row[col] as u16;
            if r == rank || c == 0 {
                continue;
            }
            for (x, &pr) in row.iter_mut().zip(&pivot_row) {
                *x = ((*x as u16 + qq * qq - c * pr as u16) % qq) as u8;
            }
        }
        rank += 1;
    }
    rows.truncate(rank);
    rows.concat()
}

fn combinations(n: usize, k: usize) -> Vec<Vec<usize>> {
    fn go(start: usize, n: usize, k: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for i in start..n {
            cur.push(i);
            go(i + 1, n, k, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    go(0, n, k, &mut Vec::with_capacity(k), &mut out);
    out
}

fn enumerate_layer(q: u8, m: usize, dim: usize) -> Vec<Subspace> {
    let mut bases: Vec<Vec<u8>> = Vec::new();
    for pivots in combinations(m, dim) {
        let free: Vec<(usize, usize)> = pivots
            .iter()
            .enumerate()
            .flat_map(|(r, &p)| {
                let pivots = &pivots;
                ((p + 1)..m)
                    .filter(move |c| !pivots.contains(c))
                    .map(move |c| (r, c))
            })
            .collect();
        let mut digits = vec![0u8; free.len()];
        loop {
            let mut basis = vec![0u8; dim * m];
            for (r, &p) in pivots.iter().enumerate() {
                basis[r * m + p] = 1;
            }
            for (&(r, c), &d) in free.iter().zip(&digits) {
                basis[r * m + c] = d;
            }
            bases.push(basis);
            // odometer increment over F_q^free
            let mut i = 0;
            while i < digits.len() {
                digits[i] += 1;
                if digits[i] < q {
                    break;
                }
                digits[i] = 0;
                i += 1;
            }
            if i == digits.len() {
                break;
            }
        }
    }
    bases.sort();
    bases
        .into_iter()
        .enumerate()
        .map(|(index, basis)| Subspace { q, m, dim, basis, index })
        .collect()
}

/// All subspaces of dimension `dim`, in canonical order.
pub fn enumerate_subspaces(params: LatticeParams, dim: usize) -> Result<Vec<Subspace>> {
    if dim > params.m() {
        return Err(Error::param(format!(
            "dimension {dim} exceeds ambient dimension {}",
            params.m()
        )));
    }
    Ok(enumerate_layer(params.q() as u8, params.m(), dim))
}

/// `true` iff `b` is contained in `a`.
pub fn subspace_contains(a: &Subspace, b: &Subspace) -> Result<bool> {
    if a.q != b.q || a.m != b.m {
        return Err(Error::param("subspaces live in different lattices"));
    }
    if b.dim > a.dim {
        return Ok(false);
    }
    Ok(b.basis_rows().all(|row| {
        let mut v = row.to_vec();
        a.reduce(&mut v);
        v.iter().all(|&x| x == 0)
    }))
}

/// Inclusion incidence between the `l`- and `s`-dimensional layers.
#[derive(Debug, Clone, PartialEq)]
pub struct IncidenceMatrix {
    l: usize,
    s: usize,
    stochastic: bool,
    scale: usize,
    entries: Matrix,
}

impl IncidenceMatrix {
    pub fn l(&self) -> usize {
        self.l
    }

    pub fn s(&self) -> usize {
        self.s
    }

    pub fn rows(&self) -> usize {
        self.entries.nrows()
    }

    pub fn cols(&self) -> usize {
        self.entries.ncols()
    }

    pub fn is_stochastic(&self) -> bool {
        self.stochastic
    }

    /// Common row sum of the plain matrix, the Gaussian binomial `[l, s]_q`.
    pub fn scale(&self) -> usize {
        self.scale
    }

    pub fn entries(&self) -> &Matrix {
        &self.entries
    }

    pub fn into_entries(self) -> Matrix {
        self.entries
    }
}

/// Every layer of `F_q^m`, with lookup from RREF basis to index.
#[derive(Debug, Clone)]
pub struct Lattice {
    params: LatticeParams,
    layers: Vec<Vec<Subspace>>,
    lookup: Vec<HashMap<Vec<u8>, usize>>,
}

impl Lattice {
    pub fn new(params: LatticeParams) -> Self {
        let q = params.q() as u8;
        let layers: Vec<Vec<Subspace>> =
            (0..=params.m()).map(|d| enumerate_layer(q, params.m(), d)).collect();
        let lookup = layers
            .iter()
            .map(|layer| layer.iter().map(|s| (s.basis.clone(), s.index)).collect())
            .collect();
        Self { params, layers, lookup }
    }

    pub fn params(&self) -> LatticeParams {
        self.params
    }

    pub fn layer(&self, dim: usize) -> Result<&[Subspace]> {
        self.layers
            .get(dim)
            .map(Vec::as_slice)
            .ok_or_else(|| Error::param(format!("no layer of dimension {dim}")))
    }

    fn find(&self, dim: usize, basis: &[u8]) -> Option<&Subspace> {
        let idx = *self.lookup.get(dim)?.get(basis)?;
        Some(&self.layers[dim][idx])
    }

    /// `D_ls` (plain) or `S_ls = D_ls / [l, s]_q` (stochastic).
    pub fn incidence(&self, l: usize, s: usize, stochastic: bool) -> Result<IncidenceMatrix> {
        if s > l {
            return Err(Error::param(format!("incidence needs s <= l, got s={s}, l={l}")));
        }
        let big = self.layer(l)?;
        let small = self.layer(s)?;
        let scale = gaussian_binomial_usize(l, s, self.params.q())?;
        let value = if stochastic { 1.0 / scale as f64 } else { 1.0 };
        let mut entries = Matrix::zeros(big.len(), small.len());
        for (i, u) in big.iter().enumerate() {
            for (j, v) in small.iter().enumerate() {
                if subspace_contains(u, v)? {
                    entries[(i, j)] = value;
                }
            }
        }
        Ok(IncidenceMatrix { l, s, stochastic, scale, entries })
    }
}

/// Incidence matrix between layers `l >= s` of the lattice fixed by `params`.
pub fn incidence_matrix(
    params: LatticeParams,
    l: usize,
    s: usize,
    stochastic: bool,
) -> Result<IncidenceMatrix> {
    if l > params.m() {
        return Err(Error::param(format!("layer {l} exceeds ambient dimension {}", params.m())));
    }
    Lattice::new(params).incidence(l, s, stochastic)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matrix::{max_abs_diff, max_row_sum_deviation};

    fn params(q: u32, m: usize) -> LatticeParams {
        LatticeParams::new(q, m, m).unwrap()
    }

    #[test]
    fn gaussian_binomial_values() {
        assert_eq!(gaussian_binomial(3, 1, 2).unwrap(), BigUint::from(7u32));
        assert_eq!(gaussian_binomial(4, 2, 2).unwrap(), BigUint::from(35u32));
        assert_eq!(gaussian_binomial(5, 0, 3).unwrap(), BigUint::one());
        assert_eq!(gaussian_binomial(2, 1, 3).unwrap(), BigUint::from(4u32));
        assert!(gaussian_binomial(3, 4, 2).is_err());
        assert!(gaussian_binomial(3, 1, 4).is_err());
    }

    /// Brute force: count distinct spans of all `k`-tuples of vectors of rank `k`.
    fn brute_force_count(q: u8, m: usize, k: usize) -> usize {
        let vectors: Vec<Vec<u8>> = (0..(q as usize).pow(m as u32))
            .map(|mut n| {
                (0..m)
                    .map(|_| {
                        let d = (n % q as usize) as u8;
                        n /= q as usize;
                        d
                    })
                    .collect()
            })
            .collect();
        let mut seen = std::collections::HashSet::new();
        let mut idx = vec![0usize; k];
        loop {
            let picked: Vec<Vec<u8>> = idx.iter().map(|&i| vectors[i].clone()).collect();
            let basis = rref(&picked, q, m);
            if basis.len() == k * m {
                seen.insert(basis);
            }
            let mut i = 0;
            while i < k {
                idx[i] += 1;
                if idx[i] < vectors.len() {
                    break;
                }
                idx[i] = 0;
                i += 1;
            }
            if i == k {
                break;
            }
        }
        seen.len()
    }

    #[test]
    fn gaussian_binomial_matches_brute_force() {
        assert_eq!(brute_force_count(2, 4, 2), 35);
        assert_eq!(brute_force_count(3, 2, 1), 4);
        assert_eq!(brute_force_count(2, 3, 2), 7);
    }

    #[test]
    fn layer_sizes_match_gaussian_binomial() {
        for q in [2, 3, 5] {
            for m in 1..=4 {
                let p = params(q, m);
                for d in 0..=m {
                    let layer = enumerate_subspaces(p, d).unwrap();
                    assert_eq!(layer.len(), p.layer_size(d).unwrap(), "q={q} m={m} d={d}");
                    assert!(layer.iter().enumerate().all(|(i, s)| s.index() == i));
                }
            }
        }
    }

    #[test]
    fn enumeration_edge_cases() {
        let p = params(2, 3);
        let zero = enumerate_subspaces(p, 0).unwrap();
        assert_eq!(zero.len(), 1);
        assert_eq!(zero[0].basis_rows().count(), 0);
        assert_eq!(enumerate_subspaces(p, 1).unwrap().len(), 7);
        assert_eq!(enumerate_subspaces(params(3, 2), 1).unwrap().len(), 4);
        assert!(enumerate_subspaces(p, 4).is_err());
        assert_eq!(enumerate_subspaces(p, 2).unwrap(), enumerate_subspaces(p, 2).unwrap());
    }

    #[test]
    fn canonical_order_is_lexicographic() {
        let layer = enumerate_subspaces(params(2, 3), 1).unwrap();
        let rows: Vec<Vec<u8>> = layer.iter().map(|s| s.basis.clone()).collect();
        assert_eq!(rows[0], vec![0, 0, 1]);
        assert_eq!(rows[6], vec![1, 1, 1]);
        assert!(rows.windows(2).all(|w| w[0] < w[1]));
    }

    #[test]
    fn containment() {
        let lat = Lattice::new(params(2, 3));
        let a = Subspace::span(&lat, &[vec![1, 0, 0], vec![0, 1, 0]]).unwrap();
        let b = Subspace::span(&lat, &[vec![1, 1, 0]]).unwrap();
        let c = Subspace::span(&lat, &[vec![0, 0, 1]]).unwrap();
        let zero = &lat.layer(0).unwrap()[0];
        assert!(subspace_contains(&a, &b).unwrap());
        assert!(!subspace_contains(&a, &c).unwrap());
        assert!(subspace_contains(&a, &a).unwrap());
        assert!(subspace_contains(zero, zero).unwrap());
        assert!(!subspace_contains(&b, &a).unwrap());

        let other = Lattice::new(params(3, 3));
        let d = &other.layer(1).unwrap()[0];
        assert!(subspace_contains(&a, d).is_err());
    }

    #[test]
    fn span_reduces_dependent_vectors() {
        let lat = Lattice::new(params(3, 3));
        let s = Subspace::span(&lat, &[vec![1, 2, 0], vec![2, 1, 0], vec![0, 0, 0]]).unwrap();
        assert_eq!(s.dim(), 1);
    }

    #[test]
    fn fano_plane_incidence() {
        let p = LatticeParams::new(2, 3, 2).unwrap();
        let s21 = incidence_matrix(p, 2, 1, true).unwrap();
        assert_eq!((s21.rows(), s21.cols()), (7, 7));
        let e = s21.entries();
        for i in 0..7 {
            let row: Vec<f64> = e.row(i).iter().copied().filter(|&x| x > 0.0).collect();
            let col: Vec<f64> = e.column(i).iter().copied().filter(|&x| x > 0.0).collect();
            assert_eq!(row.len(), 3);
            assert_eq!(col.len(), 3);
            assert!(row.iter().all(|&x| x == 1.0 / 3.0));
        }
        assert!(max_row_sum_deviation(e) < 1e-12);
    }

    #[test]
    fn trivial_incidences() {
        let p = LatticeParams::new(2, 4, 2).unwrap();
        let lat = Lattice::new(p);
        let same = lat.incidence(2, 2, true).unwrap();
        assert_eq!(max_abs_diff(same.entries(), &Matrix::identity(35, 35)), 0.0);
        let to_zero = lat.incidence(2, 0, true).unwrap();
        assert_eq!(to_zero.cols(), 1);
        assert!(to_zero.entries().iter().all(|&x| x == 1.0));
        assert!(lat.incidence(1, 2, true).is_err());
    }

    #[test]
    fn plain_row_sums_equal_gaussian_binomial() {
        for (q, m) in [(2, 3), (2, 4), (3, 3)] {
            let lat = Lattice::new(params(q, m));
            for l in 0..=m {
                for s in 0..=l {
                    let d = lat.incidence(l, s, false).unwrap();
                    let expected = gaussian_binomial_usize(l, s, q).unwrap() as f64;
                    assert_eq!(d.scale() as f64, expected);
                    assert!(d.entries().row_iter().all(|r| r.sum() == expected));
                }
            }
        }
    }

    #[test]
    fn params_validation() {
        assert!(LatticeParams::new(4, 3, 2).is_err());
        assert!(LatticeParams::new(2, 0, 0).is_err());
        assert!(LatticeParams::new(2, 7, 2).is_err());
        assert!(LatticeParams::new(2, 3, 4).is_err());
        // [6,3]_5 is far beyond the size guard.
        assert!(LatticeParams::new(5, 6, 3).is_err());
        assert!(LatticeParams::new(7, 2, 1).is_ok());
    }
}
