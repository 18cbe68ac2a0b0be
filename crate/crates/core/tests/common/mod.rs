//! Reference implementations used as oracles by the integration tests. They
//! share no code with the library beyond the `CMat` type and field moduli.
#![allow(dead_code)]

use nalgebra::DMatrix;
use num_complex::Complex64;
use qnc_core::CMat;

pub const I: Complex64 = Complex64::new(0.0, 1.0);

/// `F_q` on integer codes, by polynomial arithmetic modulo `modulus`.
#[derive(Debug, Clone)]
pub struct OracleField {
    pub p: u64,
    pub modulus: Vec<u64>,
}

impl OracleField {
    pub fn new(p: u64, modulus: &[u32]) -> Self {
        Self { p, modulus: modulus.iter().map(|&c| c as u64).collect() }
    }

    pub fn degree(&self) -> usize {
        self.modulus.len() - 1
    }

    pub fn order(&self) -> u64 {
        self.p.pow(self.degree() as u32)
    }

    fn coeffs(&self, mut code: u64) -> Vec<u64> {
        (0..self.degree())
            .map(|_| {
                let c = code % self.p;
                code /= self.p;
                c
            })
            .collect()
    }

    fn code(&self, c: &[u64]) -> u64 {
        c.iter().rev().fold(0, |acc, &x| acc * self.p + x)
    }

    pub fn add(&self, a: u64, b: u64) -> u64 {
        let (x, y) = (self.coeffs(a), self.coeffs(b));
        self.code(&x.iter().zip(&y).map(|(u, v)| (u + v) % self.p).collect::<Vec<_>>())
    }

    pub fn neg(&self, a: u64) -> u64 {
        self.code(&self.coeffs(a).iter().map(|u| (self.p - u) % self.p).collect::<Vec<_>>())
    }

    pub fn mul(&self, a: u64, b: u64) -> u64 {
        let (x, y) = (self.coeffs(a), self.coeffs(b));
        let d = self.degree();
        let mut prod = vec![0u64; 2 * d];
        for (i, u) in x.iter().enumerate() {
            for (j, v) in y.iter().enumerate() {
                prod[i + j] = (prod[i + j] + u * v) % self.p;
            }
        }
        for k in (d..2 * d).rev() {
            let c = prod[k];
            if c != 0 {
                for (j, m) in self.modulus.iter().enumerate() {
                    let idx = k - d + j;
                    prod[idx] = (prod[idx] + self.p * self.p - c * m % self.p) % self.p;
                }
            }
        }
        self.code(&prod[..d])
    }

    pub fn pow(&self, a: u64, e: u64) -> u64 {
        (0..e).fold(1, |acc, _| self.mul(acc, a))
    }

    /// `z + z^p + ... + z^{p^{d-1}}`, an element of the prime field.
    pub fn trace(&self, z: u64) -> u64 {
        let mut acc = 0;
        let mut t = z;
        for _ in 0..self.degree() {
            acc = self.add(acc, t);
            t = self.pow(t, self.p);
        }
        assert!(acc < self.p, "trace must land in the prime field");
        acc
    }

    pub fn omega(&self, k: u64) -> Complex64 {
        (I * (2.0 * std::f64::consts::PI * (k % self.p) as f64 / self.p as f64)).exp()
    }

    /// `<(s,t), J (s',t')> = Σ tr(t_i s'_i - s_i t'_i)` in `F_p`.
    pub fn symplectic_pairing(&self, s: &[u64], t: &[u64], s2: &[u64], t2: &[u64]) -> u64 {
        let mut acc = 0;
        for i in 0..s.len() {
            acc = self.add(acc, self.mul(t[i], s2[i]));
            acc = self.add(acc, self.neg(self.mul(s[i], t2[i])));
        }
        self.trace(acc)
    }

    /// `W(s,t) = X(s) Z(t)` on `n` registers, register 1 slowest.
    pub fn weyl(&self, s: &[u64], t: &[u64]) -> CMat {
        let n = s.len();
        let q = self.order();
        let dim = q.pow(n as u32) as usize;
        let digits = |mut x: usize| -> Vec<u64> {
            let mut v = vec![0; n];
            for k in (0..n).rev() {
                v[k] = (x as u64) % q;
                x /= q as usize;
            }
            v
        };
        let index = |v: &[u64]| -> usize { v.iter().fold(0usize, |acc, &d| acc * q as usize + d as usize) };
        let mut m = CMat::zeros(dim, dim);
        for x in 0..dim {
            let xd = digits(x);
            let mut phase = 0;
            for k in 0..n {
                phase = self.add(phase, self.mul(xd[k], t[k]));
            }
            let y: Vec<u64> = (0..n).map(|k| self.add(xd[k], s[k])).collect();
            m[(index(&y), x)] = self.omega(self.trace(phase));
        }
        m
    }
}

/// Rank over `F_p` by Gaussian elimination on integer rows.
pub fn rank_mod_p(rows: &[Vec<u64>], p: u64) -> usize {
    let mut m: Vec<Vec<u64>> = rows.iter().map(|r| r.iter().map(|x| x % p).collect()).collect();
    let cols = m.first().map_or(0, Vec::len);
    let inv = |a: u64| -> u64 { (1..p).find(|b| a * b % p == 1).expect("nonzero element") };
    let mut rank = 0;
    for c in 0..cols {
        let Some(piv) = (rank..m.len()).find(|&r| m[r][c] != 0) else { continue };
        m.swap(rank, piv);
        let s = inv(m[rank][c]);
        for x in m[rank].iter_mut() {
            *x = *x * s % p;
        }
        let pivot = m[rank].clone();
        for (r, row) in m.iter_mut().enumerate() {
            if r != rank && row[c] != 0 {
                let f = row[c];
                for (x, y) in row.iter_mut().zip(&pivot) {
                    *x = (*x + p * p - f * y % p) % p;
                }
            }
        }
        rank += 1;
    }
    rank
}

pub fn mat_mul_mod(a: &[Vec<u64>], b: &[Vec<u64>], p: u64) -> Vec<Vec<u64>> {
    let n = a.len();
    let k = b.len();
    let m = b[0].len();
    (0..n).map(|i| (0..m).map(|j| (0..k).map(|l| a[i][l] * b[l][j]).sum::<u64>() % p).collect()).collect()
}

pub fn transpose(a: &[Vec<u64>]) -> Vec<Vec<u64>> {
    (0..a[0].len()).map(|j| a.iter().map(|r| r[j]).collect()).collect()
}

/// Inverse over `F_p` by Gauss–Jordan on `[A | I]`.
pub fn inverse_mod_p(a: &[Vec<u64>], p: u64) -> Vec<Vec<u64>> {
    let n = a.len();
    let mut m: Vec<Vec<u64>> = a
        .iter()
        .enumerate()
        .map(|(i, r)| r.iter().map(|x| x % p).chain((0..n).map(|j| u64::from(i == j))).collect())
        .collect();
    let inv = |x: u64| -> u64 { (1..p).find(|b| x * b % p == 1).expect("invertible") };
    for c in 0..n {
        let piv = (c..n).find(|&r| m[r][c] != 0).expect("matrix must be invertible");
        m.swap(c, piv);
        let s = inv(m[c][c]);
        for x in m[c].iter_mut() {
            *x = *x * s % p;
        }
        let pivot = m[c].clone();
        for (r, row) in m.iter_mut().enumerate() {
            if r != c && row[c] != 0 {
                let f = row[c];
                for (x, y) in row.iter_mut().zip(&pivot) {
                    *x = (*x + p * p - f * y % p) % p;
                }
            }
        }
    }
    m.into_iter().map(|r| r[n..].to_vec()).collect()
}

/// Full operator acting as `op` on the factors `targets` (in that order) of
/// a system with local dimensions `dims`, identity elsewhere.
pub fn embed_op(op: &CMat, dims: &[usize], targets: &[usize]) -> CMat {
    let total: usize = dims.iter().product();
    let split = |mut x: usize| -> Vec<usize> {
        let mut v = vec![0; dims.len()];
        for k in (0..dims.len()).rev() {
            v[k] = x % dims[k];
            x /= dims[k];
        }
        v
    };
    let sub = |v: &[usize]| targets.iter().fold(0usize, |acc, &t| acc * dims[t] + v[t]);
    let mut full = CMat::zeros(total, total);
    for col in 0..total {
        let cv = split(col);
        for row in 0..total {
            let rv = split(row);
            if (0..dims.len()).all(|k| targets.contains(&k) || rv[k] == cv[k]) {
                full[(row, col)] = op[(sub(&rv), sub(&cv))];
            }
        }
    }
    full
}

/// Traces out every factor not in `keep` (kept factors stay in order).
pub fn partial_trace_keep(rho: &CMat, dims: &[usize], keep: &[usize]) -> CMat {
    let total: usize = dims.iter().product();
    let kd: usize = keep.iter().map(|&k| dims[k]).product();
    let split = |mut x: usize| -> Vec<usize> {
        let mut v = vec![0; dims.len()];
        for k in (0..dims.len()).rev() {
            v[k] = x % dims[k];
            x /= dims[k];
        }
        v
    };
    let sub = |v: &[usize]| keep.iter().fold(0usize, |acc, &t| acc * dims[t] + v[t]);
    let mut out = CMat::zeros(kd, kd);
    for r in 0..total {
        let rv = split(r);
        for c in 0..total {
            let cv = split(c);
            if (0..dims.len()).all(|k| keep.contains(&k) || rv[k] == cv[k]) {
                out[(sub(&rv), sub(&cv))] += rho[(r, c)];
            }
        }
    }
    out
}

pub fn kron(a: &CMat, b: &CMat) -> CMat {
    a.kronecker(b)
}

pub fn hermitian_spectrum(m: &CMat) -> (Vec<f64>, CMat) {
    let h: DMatrix<Complex64> = (m + m.adjoint()) * Complex64::new(0.5, 0.0);
    let e = h.symmetric_eigen();
    (e.eigenvalues.iter().copied().collect(), e.eigenvectors)
}

pub fn entropy_bits(m: &CMat) -> f64 {
    hermitian_spectrum(m).0.iter().filter(|&&l| l > 1e-13).map(|&l| -l * l.log2()).sum()
}

/// `I_c(ρ, N) = H(B) - H(RB)` on the purification of `ρ`; `channel` must be
/// linear on arbitrary matrices.
pub fn coherent_info_purified(rho: &CMat, channel: &dyn Fn(&CMat) -> CMat) -> f64 {
    let d = rho.nrows();
    let (vals, vecs) = hermitian_spectrum(rho);
    let support: Vec<usize> = (0..d).filter(|&i| vals[i] > 1e-13).collect();
    let r = support.len();
    let mut blocks: Vec<Vec<CMat>> = Vec::with_capacity(r);
    for &i in &support {
        let mut row = Vec::with_capacity(r);
        for &j in &support {
            let x = vecs.column(i) * vecs.column(j).adjoint();
            row.push(channel(&x) * Complex64::new((vals[i] * vals[j]).sqrt(), 0.0));
        }
        blocks.push(row);
    }
    let dout = blocks[0][0].nrows();
    let mut rb = CMat::zeros(r * dout, r * dout);
    let mut b = CMat::zeros(dout, dout);
    for (a, row) in blocks.iter().enumerate() {
        for (c, blk) in row.iter().enumerate() {
            rb.view_mut((a * dout, c * dout), (dout, dout)).copy_from(blk);
        }
        b += &row[a];
    }
    entropy_bits(&b) - entropy_bits(&rb)
}

pub fn kraus_map(ops: &[CMat]) -> impl Fn(&CMat) -> CMat + '_ {
    move |x: &CMat| ops.iter().fold(CMat::zeros(ops[0].nrows(), ops[0].nrows()), |acc, k| acc + k * x * k.adjoint())
}

pub fn max_entry(m: &CMat) -> f64 {
    m.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

/// `ρ -> I/q ⊗ Tr_1 ρ` on `q x rest`.
pub fn replace_first(x: &CMat, q: usize) -> CMat {
    let rest = x.nrows() / q;
    let mut red = CMat::zeros(rest, rest);
    for a in 0..q {
        red += x.view((a * rest, a * rest), (rest, rest));
    }
    kron(&(CMat::identity(q, q) / Complex64::new(q as f64, 0.0)), &red)
}

/// Exact `I(X;Y)` in bits from a joint table.
pub fn mutual_information(joint: &[Vec<f64>]) -> f64 {
    let px: Vec<f64> = joint.iter().map(|r| r.iter().sum()).collect();
    let ny = joint[0].len();
    let py: Vec<f64> = (0..ny).map(|y| joint.iter().map(|r| r[y]).sum()).collect();
    let mut mi = 0.0;
    for (x, r) in joint.iter().enumerate() {
        for (y, &pxy) in r.iter().enumerate() {
            if pxy > 0.0 {
                mi += pxy * (pxy / (px[x] * py[y])).log2();
            }
        }
    }
    mi
}
