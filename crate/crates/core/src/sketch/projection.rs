use std::cell::Cell;

use rand::RngCore;
use rand::seq::index;
use rand_chacha::ChaCha8Rng;
use rand::SeedableRng;

use super::{SketchKind, SketchSpec};
use crate::error::{Error, Result};
use crate::matrix::DenseMatrix;
use crate::rng::{derive_seed, rng};
use crate::synth::gaussian_matrix;

/// A matrix that can be read one column at a time. Count sketch consumes
/// its input through this trait so that a single pass can be enforced and
/// counted.
pub trait ColumnSource {
    fn nrows(&self) -> usize;
    fn ncols(&self) -> usize;
    /// Hands column `j` to `f`.
    fn visit_column(&self, j: usize, f: &mut dyn FnMut(&[f64]));
}

impl ColumnSource for DenseMatrix {
    fn nrows(&self) -> usize {
        self.rows()
    }

    fn ncols(&self) -> usize {
        self.cols()
    }

    fn visit_column(&self, j: usize, f: &mut dyn FnMut(&[f64])) {
        f(self.column(j))
    }
}

/// Wraps a [`ColumnSource`] and counts column visits.
pub struct CountingColumns<'a, S: ColumnSource + ?Sized> {
    source: &'a S,
    visits: Cell<usize>,
}

impl<'a, S: ColumnSource + ?Sized> CountingColumns<'a, S> {
    pub fn new(source: &'a S) -> Self {
        Self {
            source,
            visits: Cell::new(0),
        }
    }

    pub fn visits(&self) -> usize {
        self.visits.get()
    }
}

impl<S: ColumnSource + ?Sized> ColumnSource for CountingColumns<'_, S> {
    fn nrows(&self) -> usize {
        self.source.nrows()
    }

    fn ncols(&self) -> usize {
        self.source.ncols()
    }

    fn visit_column(&self, j: usize, f: &mut dyn FnMut(&[f64])) {
        self.visits.set(self.visits.get() + 1);
        self.source.visit_column(j, f)
    }
}

/// `C = A G / sqrt(s)` with `G` an `n x s` standard normal matrix drawn from
/// `seed`.
pub fn gaussian_sketch(a: &DenseMatrix, s: usize, seed: u64) -> Result<DenseMatrix> {
    if s == 0 {
        return Err(Error::param("gaussian_sketch", "s must be at least 1"));
    }
    let g = gaussian_matrix(a.cols(), s, seed);
    Ok((a * &g).scale(1.0 / (s as f64).sqrt()))
}

/// In-place unnormalized Walsh–Hadamard transform, `x <- H_N x` with
/// `H_{2N} = [[H_N, H_N], [H_N, -H_N]]`.
///
/// # Panics
/// If the length is not a power of two.
pub fn fwht(x: &mut [f64]) {
    let len = x.len();
    assert!(len.is_power_of_two(), "fwht length {len} is not a power of two");
    let mut h = 1;
    while h < len {
        for block in x.chunks_mut(2 * h) {
            let (lo, hi) = block.split_at_mut(h);
            for (a, b) in lo.iter_mut().zip(hi.iter_mut()) {
                let (u, v) = (*a, *b);
                *a = u + v;
                *b = u - v;
            }
        }
        h *= 2;
    }
}

/// Subsampled randomized Hadamard transform `C = A D H_N P / sqrt(s)`.
///
/// Rows of `A` are zero-padded to `N`, the next power of two at or above
/// `n`. `D` holds random signs and `P` keeps `s` of the `N` transformed
/// coordinates, chosen uniformly without replacement.
pub fn srht_sketch(a: &DenseMatrix, s: usize, seed: u64) -> Result<DenseMatrix> {
    let (m, n) = a.shape();
    let big_n = n.max(1).next_power_of_two();
    if s == 0 || s > big_n {
        return Err(Error::param(
            "srht_sketch",
            format!("s = {s} must lie in 1..={big_n}"),
        ));
    }
    let mut r = rng(derive_seed(seed, 1));
    let signs: Vec<f64> = (0..n)
        .map(|_| if r.next_u32() & 1 == 0 { 1.0 } else { -1.0 })
        .collect();
    let mut r = rng(derive_seed(seed, 2));
    let mut keep = index::sample(&mut r, big_n, s).into_vec();
    keep.sort_unstable();

    let scale = 1.0 / (s as f64).sqrt();
    let at = a.transpose();
    let mut buf = vec![0.0; big_n];
    let mut out = vec![0.0; m * s];
    for i in 0..m {
        let row = at.column(i);
        for ((b, &x), &d) in buf.iter_mut().zip(row).zip(&signs) {
            *b = x * d;
        }
        buf[n..].fill(0.0);
        fwht(&mut buf);
        for (t, &k) in keep.iter().enumerate() {
            out[t * m + i] = buf[k] * scale;
        }
    }
    DenseMatrix::from_column_major(m, s, out)
}

/// Bucket and sign of each input coordinate for a count sketch with `s`
/// buckets. Both are read from a counter-based stream keyed by
/// `(seed, index)`, so they do not depend on traversal order.
#[derive(Clone)]
pub struct CountSketchHash {
    base: ChaCha8Rng,
    s: usize,
}

impl CountSketchHash {
    pub fn new(s: usize, seed: u64) -> Self {
        Self {
            base: ChaCha8Rng::seed_from_u64(derive_seed(seed, 0xC5)),
            s,
        }
    }

    /// `(bucket, sign)` for coordinate `j`.
    pub fn get(&self, j: usize) -> (usize, f64) {
        let mut r = self.base.clone();
        r.set_word_pos((j as u128) << 2);
        let bucket = ((r.next_u64() as u128 * self.s as u128) >> 64) as usize;
        let sign = if r.next_u64() >> 63 == 0 { 1.0 } else { -1.0 };
        (bucket, sign)
    }
}

/// Single-pass count sketch: column `j` of `A` is added, with a random sign,
/// to one of `s` output columns.
pub fn count_sketch(a: &(impl ColumnSource + ?Sized), s: usize, seed: u64) -> Result<DenseMatrix> {
    if s == 0 {
        return Err(Error::param("count_sketch", "s must be at least 1"));
    }
    let m = a.nrows();
    let hash = CountSketchHash::new(s, seed);
    let mut out = vec![0.0; m * s];
    for j in 0..a.ncols() {
        let (l, g) = hash.get(j);
        let dst = &mut out[l * m..(l + 1) * m];
        a.visit_column(j, &mut |col| {
            for (o, x) in dst.iter_mut().zip(col) {
                *o += g * x;
            }
        });
    }
    DenseMatrix::from_column_major(m, s, out)
}

/// `Sᵀ A` for the count sketch `S` (`m x s`) acting on the rows of `A`.
/// Bit-identical to `count_sketch(Aᵀ)ᵀ`.
pub fn count_sketch_rows(a: &DenseMatrix, s: usize, seed: u64) -> Result<DenseMatrix> {
    if s == 0 {
        return Err(Error::param("count_sketch", "s must be at least 1"));
    }
    let (m, n) = a.shape();
    let hash = CountSketchHash::new(s, seed);
    let map: Vec<(usize, f64)> = (0..m).map(|i| hash.get(i)).collect();
    let mut out = vec![0.0; s * n];
    for j in 0..n {
        let dst = &mut out[j * s..(j + 1) * s];
        for (&(l, g), x) in map.iter().zip(a.column(j)) {
            dst[l] += g * x;
        }
    }
    DenseMatrix::from_column_major(s, n, out)
}

/// The `n x s` count-sketch matrix implied by `(s, seed)`; one signed unit
/// entry per row.
pub fn count_sketch_operator(n: usize, s: usize, seed: u64) -> Result<DenseMatrix> {
    if s == 0 {
        return Err(Error::param("count_sketch", "s must be at least 1"));
    }
    let hash = CountSketchHash::new(s, seed);
    let mut out = vec![0.0; n * s];
    for j in 0..n {
        let (l, g) = hash.get(j);
        out[l * n + j] = g;
    }
    DenseMatrix::from_column_major(n, s, out)
}

/// Count sketch to `spec.s` columns, then the dense second stage.
pub fn combined_sketch(a: &DenseMatrix, spec: &SketchSpec) -> Result<DenseMatrix> {
    spec.validate(a.cols())?;
    let st = spec.stage2.as_ref().expect("validated");
    let first = count_sketch(a, spec.s, spec.seed)?;
    match st.kind {
        SketchKind::Gaussian => gaussian_sketch(&first, st.s, st.seed),
        SketchKind::Srht => srht_sketch(&first, st.s, st.seed),
        _ => unreachable!("validated second stage"),
    }
}
