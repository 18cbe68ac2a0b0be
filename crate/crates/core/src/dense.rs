//! Dense complex matrices and tensor-index helpers. Multi-register indices
//! are row-major: the first subsystem is the slowest-varying digit.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;

pub type CMat = DMatrix<Complex64>;
pub type CVec = DVector<Complex64>;

pub const ZERO: Complex64 = Complex64::new(0.0, 0.0);
pub const ONE: Complex64 = Complex64::new(1.0, 0.0);

pub fn kron(a: &CMat, b: &CMat) -> CMat {
    a.kronecker(b)
}

pub fn identity(d: usize) -> CMat {
    CMat::identity(d, d)
}

pub fn max_abs_diff(a: &CMat, b: &CMat) -> f64 {
    assert_eq!(a.shape(), b.shape());
    a.iter().zip(b.iter()).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
}

pub fn is_unitary(u: &CMat, tol: f64) -> bool {
    u.is_square() && max_abs_diff(&(u.adjoint() * u), &identity(u.nrows())) <= tol
}

/// Maps a multi-index over `dims` to the flat index.
pub fn flat_index(digits: &[usize], dims: &[usize]) -> usize {
    digits.iter().zip(dims).fold(0, |acc, (&x, &d)| acc * d + x)
}

/// Inverse of [`flat_index`].
pub fn digits_of(mut index: usize, dims: &[usize]) -> Vec<usize> {
    let mut out = vec![0; dims.len()];
    for k in (0..dims.len()).rev() {
        out[k] = index % dims[k];
        index /= dims[k];
    }
    out
}

/// Index bookkeeping for an operator acting on a subset of subsystems.
struct Placement {
    /// Flat offsets of every target sub-index (first target slowest).
    offsets: Vec<usize>,
    /// Flat indices with all target digits zero.
    bases: Vec<usize>,
}

fn placement(dims: &[usize], targets: &[usize]) -> Placement {
    let n = dims.len();
    let mut strides = vec![1usize; n];
    for k in (0..n.saturating_sub(1)).rev() {
        strides[k] = strides[k + 1] * dims[k + 1];
    }
    let tdims: Vec<usize> = targets.iter().map(|&t| dims[t]).collect();
    let tsize: usize = tdims.iter().product();
    let offsets = (0..tsize)
        .map(|a| digits_of(a, &tdims).iter().zip(targets).map(|(&x, &t)| x * strides[t]).sum())
        .collect();
    let rest: Vec<usize> = (0..n).filter(|k| !targets.contains(k)).collect();
    let rdims: Vec<usize> = rest.iter().map(|&k| dims[k]).collect();
    let rsize: usize = rdims.iter().product();
    let bases = (0..rsize)
        .map(|b| digits_of(b, &rdims).iter().zip(&rest).map(|(&x, &k)| x * strides[k]).sum())
        .collect();
    Placement { offsets, bases }
}

/// `(op ⊗ I) m` where `op` acts on the subsystems `targets` of the row space.
pub fn apply_op(op: &CMat, dims: &[usize], targets: &[usize], m: &CMat) -> CMat {
    let total: usize = dims.iter().product();
    assert_eq!(m.nrows(), total, "row dimension mismatch");
    let pl = placement(dims, targets);
    let t = pl.offsets.len();
    assert_eq!(op.shape(), (t, t), "operator does not match targets");
    let mut out = CMat::zeros(total, m.ncols());
    let mut buf = vec![ZERO; t];
    for c in 0..m.ncols() {
        let col = m.column(c);
        for &b in &pl.bases {
            for (slot, &ob) in buf.iter_mut().zip(&pl.offsets) {
                *slot = col[b + ob];
            }
            if buf.iter().all(|z| z.re == 0.0 && z.im == 0.0) {
                continue;
            }
            for (a, &oa) in pl.offsets.iter().enumerate() {
                let mut acc = ZERO;
                for (bb, v) in buf.iter().enumerate() {
                    acc += op[(a, bb)] * v;
                }
                out[(b + oa, c)] = acc;
            }
        }
    }
    out
}

/// `O rho O^†` with `O` acting on `targets`.
pub fn conjugate(op: &CMat, dims: &[usize], targets: &[usize], rho: &CMat) -> CMat {
    let left = apply_op(op, dims, targets, rho);
    apply_op(op, dims, targets, &left.adjoint()).adjoint()
}

/// Embeds `op` on `targets` into the full space.
pub fn embed(op: &CMat, dims: &[usize], targets: &[usize]) -> CMat {
    let total: usize = dims.iter().product();
    apply_op(op, dims, targets, &identity(total))
}

/// Traces out every subsystem not listed in `keep`; kept subsystems stay in
/// their original order.
pub fn partial_trace(rho: &CMat, dims: &[usize], keep: &[usize]) -> CMat {
    let mut keep = keep.to_vec();
    keep.sort_unstable();
    let pl = placement(dims, &keep);
    let k = pl.offsets.len();
    CMat::from_fn(k, k, |a, b| pl.bases.iter().map(|&base| rho[(base + pl.offsets[a], base + pl.offsets[b])]).sum())
}

/// Eigenvalues of a Hermitian matrix, ascending.
pub fn hermitian_eigenvalues(m: &CMat) -> Vec<f64> {
    let h = (m + m.adjoint()) * Complex64::new(0.5, 0.0);
    let mut ev: Vec<f64> = h.symmetric_eigen().eigenvalues.iter().copied().collect();
    ev.sort_by(|a, b| a.partial_cmp(b).expect("finite eigenvalues"));
    ev
}

/// Eigen-decomposition of a Hermitian matrix: `(eigenvalues, eigenvectors as columns)`.
pub fn hermitian_eigen(m: &CMat) -> (Vec<f64>, CMat) {
    let h = (m + m.adjoint()) * Complex64::new(0.5, 0.0);
    let e = h.symmetric_eigen();
    (e.eigenvalues.iter().copied().collect(), e.eigenvectors)
}

pub fn trace(m: &CMat) -> Complex64 {
    m.diagonal().sum()
}

fn gaussian_matrix<R: Rng + ?Sized>(rows: usize, cols: usize, rng: &mut R) -> CMat {
    CMat::from_fn(rows, cols, |_, _| {
        Complex64::new(rng.sample::<f64, _>(StandardNormal), rng.sample::<f64, _>(StandardNormal))
    })
}

/// Haar-random unitary: QR of a complex Gaussian matrix with the diagonal
/// phases of `R` pushed into `Q`.
pub fn haar_unitary<R: Rng + ?Sized>(d: usize, rng: &mut R) -> CMat {
    let qr = gaussian_matrix(d, d, rng).qr();
    let (mut q, r) = (qr.q(), qr.r());
    for j in 0..d {
        let rd = r[(j, j)];
        let ph = if rd.norm() > 0.0 { rd / rd.norm() } else { ONE };
        for i in 0..d {
            q[(i, j)] *= ph;
        }
    }
    q
}

/// Random density matrix of the given rank (Ginibre ensemble).
pub fn random_density<R: Rng + ?Sized>(d: usize, rank: usize, rng: &mut R) -> CMat {
    let a = gaussian_matrix(d, rank.max(1), rng);
    let m = &a * a.adjoint();
    let tr = trace(&m);
    m / tr
}

pub fn random_pure<R: Rng + ?Sized>(d: usize, rng: &mut R) -> CVec {
    let v = CVec::from_fn(d, |_, _| Complex64::new(rng.sample::<f64, _>(StandardNormal), rng.sample::<f64, _>(StandardNormal)));
    let n = v.norm();
    v / Complex64::new(n, 0.0)
}

pub fn projector(v: &CVec) -> CMat {
    v * v.adjoint()
}

/// Complex matrix with one `1` per column: `|perm[x]><x|`.
pub fn permutation_matrix(perm: &[usize]) -> CMat {
    let mut m = CMat::zeros(perm.len(), perm.len());
    for (x, &y) in perm.iter().enumerate() {
        m[(y, x)] = ONE;
    }
    m
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn apply_op_matches_kron() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let a = haar_unitary(2, &mut rng);
        let b = haar_unitary(3, &mut rng);
        let m = gaussian_matrix(12, 5, &mut rng);
        let dims = [2, 3, 2];
        let full = kron(&kron(&a, &identity(3)), &identity(2));
        assert!(max_abs_diff(&apply_op(&a, &dims, &[0], &m), &(&full * &m)) < 1e-12);
        let full = kron(&identity(2), &kron(&b, &identity(2)));
        assert!(max_abs_diff(&apply_op(&b, &dims, &[1], &m), &(&full * &m)) < 1e-12);
        // non-adjacent targets: op on (0, 2) equals swap-conjugated kron
        let c = haar_unitary(4, &mut rng);
        let swap12 = CMat::from_fn(12, 12, |r, col| {
            let d = digits_of(col, &dims);
            let swapped = flat_index(&[d[0], d[2], d[1]], &[2, 2, 3]);
            if swapped == r { ONE } else { ZERO }
        });
        let on_front = kron(&c, &identity(3));
        let expect = swap12.adjoint() * on_front * &swap12;
        assert!(max_abs_diff(&embed(&c, &dims, &[0, 2]), &expect) < 1e-12);
    }

    #[test]
    fn partial_trace_of_product() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let a = random_density(2, 2, &mut rng);
        let b = random_density(3, 1, &mut rng);
        let ab = kron(&a, &b);
        assert!(max_abs_diff(&partial_trace(&ab, &[2, 3], &[0]), &a) < 1e-12);
        assert!(max_abs_diff(&partial_trace(&ab, &[2, 3], &[1]), &b) < 1e-12);
    }

    #[test]
    fn haar_is_unitary() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for d in [1, 2, 5, 16] {
            assert!(is_unitary(&haar_unitary(d, &mut rng), 1e-12));
        }
    }

    #[test]
    fn eigenvalues_of_diagonal() {
        let m = CMat::from_diagonal(&CVec::from_vec(vec![Complex64::new(0.75, 0.0), Complex64::new(0.25, 0.0)]));
        let ev = hermitian_eigenvalues(&m);
        assert!((ev[0] - 0.25).abs() < 1e-14 && (ev[1] - 0.75).abs() < 1e-14);
    }
}
