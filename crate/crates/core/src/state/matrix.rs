use nalgebra::DMatrix;
use num_complex::Complex64 as C64;

pub type CMatrix = DMatrix<C64>;

pub const ONE: C64 = C64::new(1.0, 0.0);
pub const ZERO: C64 = C64::new(0.0, 0.0);
pub const I: C64 = C64::new(0.0, 1.0);

pub fn c(re: f64) -> C64 {
    C64::new(re, 0.0)
}

/// Square matrix from real row-major entries.
pub fn real(n: usize, entries: &[f64]) -> CMatrix {
    assert_eq!(entries.len(), n * n);
    CMatrix::from_fn(n, n, |i, j| c(entries[i * n + j]))
}

/// Matrix mapping basis state `j` to `phase(j) |map(j)>`.
pub fn signed_permutation(n: usize, map: impl Fn(usize) -> (usize, C64)) -> CMatrix {
    let mut m = CMatrix::zeros(n, n);
    for j in 0..n {
        let (i, ph) = map(j);
        m[(i, j)] += ph;
    }
    m
}

pub fn diagonal(entries: &[C64]) -> CMatrix {
    CMatrix::from_fn(entries.len(), entries.len(), |i, j| {
        if i == j {
            entries[i]
        } else {
            ZERO
        }
    })
}

/// Largest entry of |M^dagger M - I|.
pub fn isometry_deviation(m: &CMatrix) -> f64 {
    let g = m.adjoint() * m;
    let id = CMatrix::identity(g.nrows(), g.ncols());
    (g - id).iter().map(|z| z.norm()).fold(0.0, f64::max)
}

pub fn unitarity_deviation(m: &CMatrix) -> f64 {
    if m.nrows() != m.ncols() {
        return f64::INFINITY;
    }
    isometry_deviation(m)
}

pub fn projector(v: &[C64]) -> CMatrix {
    CMatrix::from_fn(v.len(), v.len(), |i, j| v[i] * v[j].conj())
}

pub fn kron(a: &CMatrix, b: &CMatrix) -> CMatrix {
    a.kronecker(b)
}

/// Block-diagonal control: `blocks[k]` acts when the control digit is `k`.
pub fn controlled(blocks: &[CMatrix]) -> CMatrix {
    let n = blocks[0].nrows();
    let mut m = CMatrix::zeros(n * blocks.len(), n * blocks.len());
    for (k, b) in blocks.iter().enumerate() {
        m.view_mut((k * n, k * n), (n, n)).copy_from(b);
    }
    m
}
