//! Dominant generalized eigenpairs of Hermitian matrix pairs restricted to a
//! port subset.
//!
//! For a fixed port set `S`, the combiner maximising the SINR is the dominant
//! generalized eigenvector of `(A_S, B_S)`, and the attained SINR is the
//! corresponding eigenvalue. Because `A = g g^H` has rank one the pair admits
//! the closed form `lambda = g_S^H B_S^{-1} g_S`, `w ∝ B_S^{-1} g_S`, which is
//! what every selector uses; [`dominant_gev`] is the general solver.
//!
//! Combiners are returned with unit 2-norm and with their largest-magnitude
//! entry rotated onto the non-negative real axis.

use std::fmt;

use nalgebra::{Cholesky, DMatrix, DVector, Dyn, SymmetricEigen};
use serde::{Deserialize, Serialize};

use crate::model::SignalModel;
use crate::{Error, Result, C64};

/// Sorted set of distinct port indices.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct PortSet(Vec<usize>);

impl PortSet {
    /// Canonicalises `indices` (sorted ascending). Rejects duplicates, empty
    /// sets and indices `>= ports`.
    pub fn new(mut indices: Vec<usize>, ports: usize) -> Result<Self> {
        if indices.is_empty() {
            return Err(Error::InvalidArgument("port set is empty".into()));
        }
        indices.sort_unstable();
        if let Some(w) = indices.windows(2).find(|w| w[0] == w[1]) {
            return Err(Error::InvalidArgument(format!("duplicate port {}", w[0])));
        }
        if let Some(&last) = indices.last() {
            if last >= ports {
                return Err(Error::InvalidArgument(format!(
                    "port {last} out of range for P = {ports}"
                )));
            }
        }
        Ok(PortSet(indices))
    }

    pub fn all(ports: usize) -> Self {
        PortSet((0..ports).collect())
    }

    pub fn single(port: usize) -> Self {
        PortSet(vec![port])
    }

    /// Builds from indices already known to be sorted, distinct and in range.
    pub(crate) fn from_sorted_unchecked(indices: Vec<usize>) -> Self {
        debug_assert!(indices.windows(2).all(|w| w[0] < w[1]));
        PortSet(indices)
    }

    pub fn indices(&self) -> &[usize] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn contains(&self, port: usize) -> bool {
        self.0.binary_search(&port).is_ok()
    }

    /// `self ∪ {port}`.
    pub fn with(&self, port: usize) -> Self {
        let mut v = self.0.clone();
        if let Err(pos) = v.binary_search(&port) {
            v.insert(pos, port);
        }
        PortSet(v)
    }

    /// `(self \ {out}) ∪ {inp}`.
    pub fn swapped(&self, out: usize, inp: usize) -> Self {
        let mut v: Vec<usize> = self.0.iter().copied().filter(|&p| p != out).collect();
        if let Err(pos) = v.binary_search(&inp) {
            v.insert(pos, inp);
        }
        PortSet(v)
    }

    pub fn into_vec(self) -> Vec<usize> {
        self.0
    }
}

impl fmt::Display for PortSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{")?;
        for (i, p) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{p}")?;
        }
        write!(f, "}}")
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GevSolution {
    pub lambda_max: f64,
    /// Unit-norm combiner.
    pub w: DVector<C64>,
    /// Set when the signal vector is identically zero; `w` is then `e_1`.
    pub degenerate: bool,
}

/// Principal submatrix of `m` on the rows and columns in `set`.
pub fn restrict(m: &DMatrix<C64>, set: &PortSet) -> Result<DMatrix<C64>> {
    check_range(set, m.nrows())?;
    Ok(restrict_unchecked(m, set.indices()))
}

pub fn restrict_vector(v: &DVector<C64>, set: &PortSet) -> Result<DVector<C64>> {
    check_range(set, v.len())?;
    Ok(DVector::from_iterator(set.len(), set.indices().iter().map(|&i| v[i])))
}

fn check_range(set: &PortSet, n: usize) -> Result<()> {
    match set.indices().last() {
        Some(&last) if last >= n => Err(Error::InvalidArgument(format!(
            "port {last} out of range for a {n}x{n} matrix"
        ))),
        _ => Ok(()),
    }
}

fn restrict_unchecked(m: &DMatrix<C64>, idx: &[usize]) -> DMatrix<C64> {
    let n = idx.len();
    DMatrix::from_fn(n, n, |i, j| m[(idx[i], idx[j])])
}

/// Cholesky factor of a Hermitian PD matrix. The complex square root never
/// fails, so positive definiteness is checked on the factor's diagonal,
/// which must come out real and positive.
fn cholesky(b: DMatrix<C64>) -> Result<Cholesky<C64, Dyn>> {
    let n = b.nrows();
    let not_pd = || Error::NumericDomain(format!("{n}x{n} interference-plus-noise matrix is not positive definite"));
    let chol = Cholesky::new(b).ok_or_else(not_pd)?;
    let l = chol.l_dirty();
    let pd = (0..n).all(|i| {
        let d = l[(i, i)];
        d.re > 0.0 && d.re.is_finite() && d.im.abs() <= 1e-12 * d.re
    });
    if pd {
        Ok(chol)
    } else {
        Err(not_pd())
    }
}

/// Unit 2-norm, largest-magnitude entry real and non-negative (first one on ties).
pub fn canonical_phase(mut w: DVector<C64>) -> DVector<C64> {
    let mut best = 0;
    let mut best_abs = -1.0;
    for (i, z) in w.iter().enumerate() {
        let a = z.norm();
        if a > best_abs {
            best = i;
            best_abs = a;
        }
    }
    if best_abs > 0.0 {
        let rot = w[best].conj() / best_abs;
        w *= rot;
        w[best] = C64::new(w[best].re, 0.0);
    }
    let norm = w.norm();
    if norm > 0.0 {
        w /= C64::from(norm);
    }
    w
}

/// Dominant generalized eigenpair of a Hermitian PSD / PD pair via Cholesky
/// whitening `C = L^{-1} A L^{-H}` and a Hermitian eigensolve of `C`.
pub fn dominant_gev(a: &DMatrix<C64>, b: &DMatrix<C64>) -> Result<GevSolution> {
    let n = a.nrows();
    if n == 0 || a.ncols() != n || b.nrows() != n || b.ncols() != n {
        return Err(Error::InvalidArgument(format!(
            "matrix pair shapes {:?} and {:?} are not square and equal",
            a.shape(),
            b.shape()
        )));
    }
    let chol = cholesky(b.clone())?;
    let l = chol.l();
    let la = l
        .solve_lower_triangular(a)
        .ok_or_else(|| Error::NumericDomain("singular Cholesky factor".into()))?;
    let c = l
        .solve_lower_triangular(&la.adjoint())
        .ok_or_else(|| Error::NumericDomain("singular Cholesky factor".into()))?;
    let c = DMatrix::from_fn(n, n, |i, j| (c[(i, j)] + c[(j, i)].conj()) * 0.5);

    let eig = SymmetricEigen::new(c);
    let top = eig
        .eigenvalues
        .iter()
        .enumerate()
        .fold(0, |best, (i, &v)| if v > eig.eigenvalues[best] { i } else { best });
    let y = eig.eigenvectors.column(top).into_owned();
    let w = l
        .ad_solve_lower_triangular(&y)
        .ok_or_else(|| Error::NumericDomain("singular Cholesky factor".into()))?;
    let degenerate = a.iter().all(|z| *z == C64::from(0.0));
    Ok(GevSolution {
        lambda_max: eig.eigenvalues[top].max(0.0),
        w: canonical_phase(w),
        degenerate,
    })
}

/// Closed-form dominant pair of `(g g^H, B)`: `lambda = g^H B^{-1} g`,
/// `w ∝ B^{-1} g`, both through a Cholesky solve.
pub fn rank1_gev(g: &DVector<C64>, b: &DMatrix<C64>) -> Result<GevSolution> {
    let n = g.len();
    if n == 0 || b.nrows() != n || b.ncols() != n {
        return Err(Error::InvalidArgument(format!(
            "vector of length {n} does not match matrix {:?}",
            b.shape()
        )));
    }
    let chol = cholesky(b.clone())?;
    if g.iter().all(|z| *z == C64::from(0.0)) {
        let mut w = DVector::zeros(n);
        w[0] = C64::from(1.0);
        return Ok(GevSolution {
            lambda_max: 0.0,
            w,
            degenerate: true,
        });
    }
    let x = chol.solve(g);
    let lambda = g.dotc(&x).re.max(0.0);
    Ok(GevSolution {
        lambda_max: lambda,
        w: canonical_phase(x),
        degenerate: false,
    })
}

/// Optimal combiner and SINR for the ports in `set`. A single port reduces to
/// the scalar ratio `A[p,p] / B[p,p]` with `w = (1)`.
pub fn subset_gev(model: &SignalModel, set: &PortSet) -> Result<GevSolution> {
    check_range(set, model.ports())?;
    match set.indices() {
        [] => Err(Error::InvalidArgument("port set is empty".into())),
        &[p] => Ok(GevSolution {
            lambda_max: model.port_sinr(p),
            w: DVector::from_element(1, C64::from(1.0)),
            degenerate: model.g[p] == C64::from(0.0),
        }),
        idx => {
            let g = DVector::from_iterator(idx.len(), idx.iter().map(|&i| model.g[i]));
            rank1_gev(&g, &restrict_unchecked(&model.b, idx))
        }
    }
}

/// `lambda_max(A_S, B_S)`.
pub fn subset_sinr(model: &SignalModel, set: &PortSet) -> Result<f64> {
    subset_gev(model, set).map(|s| s.lambda_max)
}

/// SINR delivered by an arbitrary (not necessarily normalised) combiner on
/// `set`: `|w^H g_S|^2 / (w^H B_S w)`. With `||w|| = 1` this is the per-user
/// SINR with the noise term `1 / snr`.
pub fn combiner_sinr(model: &SignalModel, set: &PortSet, w: &DVector<C64>) -> Result<f64> {
    check_range(set, model.ports())?;
    if w.len() != set.len() {
        return Err(Error::InvalidArgument(format!(
            "combiner length {} does not match {} ports",
            w.len(),
            set.len()
        )));
    }
    let idx = set.indices();
    let num = idx
        .iter()
        .zip(w.iter())
        .map(|(&p, wi)| wi.conj() * model.g[p])
        .sum::<C64>()
        .norm_sqr();
    let mut den = C64::from(0.0);
    for (i, &p) in idx.iter().enumerate() {
        for (j, &q) in idx.iter().enumerate() {
            den += w[i].conj() * model.b[(p, q)] * w[j];
        }
    }
    Ok(num / den.re)
}

/// `log2(1 + sinr)` in bits/s/Hz.
pub fn spectral_efficiency(sinr: f64) -> Result<f64> {
    if sinr >= 0.0 {
        Ok(sinr.ln_1p() / std::f64::consts::LN_2)
    } else {
        Err(Error::InvalidArgument(format!("SINR must be non-negative, got {sinr}")))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::testutil::{random_pair, random_vector};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    #[test]
    fn portset_canonicalises_and_validates() {
        let s = PortSet::new(vec![4, 1, 3], 5).unwrap();
        assert_eq!(s.indices(), &[1, 3, 4]);
        assert!(PortSet::new(vec![1, 1], 5).is_err());
        assert!(PortSet::new(vec![5], 5).is_err());
        assert!(PortSet::new(vec![], 5).is_err());
        assert_eq!(s.with(0).indices(), &[0, 1, 3, 4]);
        assert_eq!(s.swapped(3, 2).indices(), &[1, 2, 4]);
        assert_eq!(s.to_string(), "{1,3,4}");
    }

    #[test]
    fn restrict_cases() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let (a, _) = random_pair(&mut rng, 6, 6);
        assert_eq!(restrict(&a, &PortSet::all(6)).unwrap(), a);
        let one = restrict(&a, &PortSet::single(2)).unwrap();
        assert_eq!(one.shape(), (1, 1));
        assert_eq!(one[(0, 0)], a[(2, 2)]);
        let s = PortSet::new(vec![4, 1], 6).unwrap();
        let r = restrict(&a, &s).unwrap();
        for (i, &p) in [1, 4].iter().enumerate() {
            for (j, &q) in [1, 4].iter().enumerate() {
                assert_eq!(r[(i, j)], a[(p, q)]);
            }
        }
        assert!(matches!(
            restrict(&a, &PortSet::new(vec![7], 8).unwrap()),
            Err(Error::InvalidArgument(_))
        ));
    }

    #[test]
    fn diagonal_pair() {
        let a = DMatrix::from_diagonal(&DVector::from_vec(vec![c(2.0, 0.0), c(1.0, 0.0)]));
        let b = DMatrix::identity(2, 2);
        let s = dominant_gev(&a, &b).unwrap();
        assert!((s.lambda_max - 2.0).abs() < 1e-14);
        assert!((s.w[0] - c(1.0, 0.0)).norm() < 1e-14 && s.w[1].norm() < 1e-14);
    }

    #[test]
    fn rank1_identity_pair() {
        let g = DVector::from_vec(vec![c(1.0, 0.0), c(0.0, 0.0)]);
        let a = &g * g.adjoint();
        let b = DMatrix::identity(2, 2);
        for s in [dominant_gev(&a, &b).unwrap(), rank1_gev(&g, &b).unwrap()] {
            assert!((s.lambda_max - 1.0).abs() < 1e-14);
            assert!((s.w[0] - c(1.0, 0.0)).norm() < 1e-14 && s.w[1].norm() < 1e-14);
        }
    }

    #[test]
    fn rank1_scalar_noise() {
        let g = DVector::from_vec(vec![c(1.0, 0.0), c(0.0, 2.0)]);
        let b = DMatrix::identity(2, 2) * c(0.1, 0.0);
        let s = rank1_gev(&g, &b).unwrap();
        assert!((s.lambda_max - 50.0).abs() < 1e-12);
    }

    #[test]
    fn zero_signal_is_flagged() {
        let g = DVector::zeros(3);
        let s = rank1_gev(&g, &DMatrix::identity(3, 3)).unwrap();
        assert_eq!(s.lambda_max, 0.0);
        assert!(s.degenerate);
        assert_eq!(s.w[0], c(1.0, 0.0));
    }

    #[test]
    fn indefinite_b_is_a_domain_error() {
        let g = DVector::from_element(2, c(1.0, 0.0));
        let b = DMatrix::from_diagonal(&DVector::from_vec(vec![c(1.0, 0.0), c(-1.0, 0.0)]));
        assert!(matches!(rank1_gev(&g, &b), Err(Error::NumericDomain(_))));
        assert!(matches!(dominant_gev(&(&g * g.adjoint()), &b), Err(Error::NumericDomain(_))));
    }

    #[test]
    fn rank1_matches_generic_solver() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..200 {
            let n = rng.random_range(1..=5);
            let (_, b) = random_pair(&mut rng, n, n + 2);
            let g = random_vector(&mut rng, n);
            let r1 = rank1_gev(&g, &b).unwrap();
            let gen = dominant_gev(&(&g * g.adjoint()), &b).unwrap();
            let rel = (r1.lambda_max - gen.lambda_max).abs() / r1.lambda_max;
            assert!(rel <= 1e-9, "rel {rel}");
            assert!((r1.w.dotc(&gen.w).norm() - 1.0).abs() < 1e-6);
        }
    }

    #[test]
    fn combiner_quotient_is_scale_invariant() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let (a, b) = random_pair(&mut rng, 5, 3);
        let sol = dominant_gev(&a, &b).unwrap();
        let q = |w: &DVector<C64>| {
            let num = w.dotc(&(&a * w)).re;
            let den = w.dotc(&(&b * w)).re;
            num / den
        };
        let base = q(&sol.w);
        assert!((base - sol.lambda_max).abs() <= 1e-8 * sol.lambda_max);
        for _ in 0..10 {
            let s = c(rng.random_range(-3.0..3.0), rng.random_range(-3.0..3.0));
            let scaled = &sol.w * s;
            assert!((q(&scaled) - base).abs() <= 1e-12 * base);
        }
    }

    #[test]
    fn canonical_phase_convention() {
        let w = DVector::from_vec(vec![c(0.1, 0.2), c(0.0, -3.0), c(1.0, 1.0)]);
        let w = canonical_phase(w);
        assert!((w.norm() - 1.0).abs() < 1e-15);
        assert_eq!(w[1].im, 0.0);
        assert!(w[1].re > 0.0);
    }

    #[test]
    fn spectral_efficiency_values() {
        assert_eq!(spectral_efficiency(0.0).unwrap(), 0.0);
        assert!((spectral_efficiency(1.0).unwrap() - 1.0).abs() < 1e-15);
        assert!((spectral_efficiency(3.0).unwrap() - 2.0).abs() < 1e-15);
        assert!(spectral_efficiency(-0.1).is_err());
        assert!(spectral_efficiency(f64::NAN).is_err());
    }
}
