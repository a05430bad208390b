//! Quaternion scalars, vectors, and matrices.
//!
//! A quaternion q = q_r + q_i·i + q_j·j + q_k·k with i² = j² = k² = ijk = −1.
//! Matrices over the quaternions are stored component-major: four dense real
//! matrices sharing one shape. The Hamilton product of a quaternion matrix
//! with a quaternion vector then decomposes into 16 real matrix products
//! whose sign pattern is the compile-time [`HAMILTON_TABLE`].

use crate::error::{Error, Result};
use crate::Mat;
use ndarray::concatenate;
use ndarray::Axis;

/// Basis-product table for quaternion multiplication.
///
/// Component `c` of `q ⊗ p` is `Σ sign · q[a] · p[b]` over the four entries
/// `(a, b, sign)` in `HAMILTON_TABLE[c]`, with components indexed r=0, i=1,
/// j=2, k=3. Every product (scalar, matrix-vector, and the gradient engine's
/// op) is driven by this one table.
pub const HAMILTON_TABLE: [[(usize, usize, f64); 4]; 4] = [
    // r = q_r p_r − q_i p_i − q_j p_j − q_k p_k
    [(0, 0, 1.0), (1, 1, -1.0), (2, 2, -1.0), (3, 3, -1.0)],
    // i = q_i p_r + q_r p_i − q_k p_j + q_j p_k
    [(1, 0, 1.0), (0, 1, 1.0), (3, 2, -1.0), (2, 3, 1.0)],
    // j = q_j p_r + q_k p_i + q_r p_j − q_i p_k
    [(2, 0, 1.0), (3, 1, 1.0), (0, 2, 1.0), (1, 3, -1.0)],
    // k = q_k p_r − q_j p_i + q_i p_j + q_r p_k
    [(3, 0, 1.0), (2, 1, -1.0), (1, 2, 1.0), (0, 3, 1.0)],
];

/// A single quaternion with `f64` components.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Quaternion {
    pub r: f64,
    pub i: f64,
    pub j: f64,
    pub k: f64,
}

impl Quaternion {
    pub const fn new(r: f64, i: f64, j: f64, k: f64) -> Self {
        Self { r, i, j, k }
    }

    pub const fn zero() -> Self {
        Self::new(0.0, 0.0, 0.0, 0.0)
    }

    /// Multiplicative identity 1 + 0i + 0j + 0k.
    pub const fn one() -> Self {
        Self::new(1.0, 0.0, 0.0, 0.0)
    }

    pub fn component(&self, idx: usize) -> f64 {
        match idx {
            0 => self.r,
            1 => self.i,
            2 => self.j,
            3 => self.k,
            _ => panic!("quaternion component index must be 0..4"),
        }
    }
}

/// Hamilton product q ⊗ p, written out componentwise.
pub fn hamilton(q: Quaternion, p: Quaternion) -> Quaternion {
    Quaternion {
        r: q.r * p.r - q.i * p.i - q.j * p.j - q.k * p.k,
        i: q.i * p.r + q.r * p.i - q.k * p.j + q.j * p.k,
        j: q.j * p.r + q.k * p.i + q.r * p.j - q.i * p.k,
        k: q.k * p.r - q.j * p.i + q.i * p.j + q.r * p.k,
    }
}

/// Conjugate q* = r − i·i − j·j − k·k.
pub fn qconjugate(q: Quaternion) -> Quaternion {
    Quaternion::new(q.r, -q.i, -q.j, -q.k)
}

/// Norm ‖q‖ = sqrt(r² + i² + j² + k²).
pub fn qnorm(q: Quaternion) -> f64 {
    (q.r * q.r + q.i * q.i + q.j * q.j + q.k * q.k).sqrt()
}

/// Unit quaternion q / ‖q‖. Fails on the zero quaternion.
pub fn qnormalize(q: Quaternion) -> Result<Quaternion> {
    let n = qnorm(q);
    if n == 0.0 {
        return Err(Error::ZeroQuaternion);
    }
    Ok(Quaternion::new(q.r / n, q.i / n, q.j / n, q.k / n))
}

/// A quaternion-valued matrix stored as four real component matrices.
///
/// A `QTensor` with `cols == 1` is a quaternion vector in H^rows. Values are
/// immutable after construction.
#[derive(Debug, Clone, PartialEq)]
pub struct QTensor {
    rows: usize,
    cols: usize,
    comps: [Mat; 4],
}

impl QTensor {
    /// Builds a tensor from its four component matrices (r, i, j, k),
    /// which must share one shape.
    pub fn from_components(r: Mat, i: Mat, j: Mat, k: Mat) -> Result<Self> {
        let dim = r.dim();
        for (name, c) in [("i", &i), ("j", &j), ("k", &k)] {
            if c.dim() != dim {
                return Err(Error::ShapeMismatch {
                    op: "QTensor::from_components",
                    details: format!("component {name} is {:?}, expected {:?}", c.dim(), dim),
                });
            }
        }
        Ok(Self {
            rows: dim.0,
            cols: dim.1,
            comps: [r, i, j, k],
        })
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            comps: std::array::from_fn(|_| Mat::zeros((rows, cols))),
        }
    }

    /// A column vector (`n`×1) from per-entry quaternions.
    pub fn from_quaternions(entries: &[Quaternion]) -> Self {
        let n = entries.len();
        let mut comps: [Mat; 4] = std::array::from_fn(|_| Mat::zeros((n, 1)));
        for (idx, q) in entries.iter().enumerate() {
            for c in 0..4 {
                comps[c][(idx, 0)] = q.component(c);
            }
        }
        Self { rows: n, cols: 1, comps }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    /// Component matrix, indexed r=0, i=1, j=2, k=3.
    pub fn comp(&self, idx: usize) -> &Mat {
        &self.comps[idx]
    }

    pub fn get(&self, row: usize, col: usize) -> Quaternion {
        Quaternion::new(
            self.comps[0][(row, col)],
            self.comps[1][(row, col)],
            self.comps[2][(row, col)],
            self.comps[3][(row, col)],
        )
    }

    pub fn components(&self) -> &[Mat; 4] {
        &self.comps
    }

    /// Mutable component access, used by the optimizer between steps.
    pub fn components_mut(&mut self) -> &mut [Mat; 4] {
        &mut self.comps
    }

    /// Largest absolute difference over all components.
    pub fn max_abs_diff(&self, other: &QTensor) -> f64 {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        let mut m = 0.0f64;
        for c in 0..4 {
            for (a, b) in self.comps[c].iter().zip(other.comps[c].iter()) {
                m = m.max((a - b).abs());
            }
        }
        m
    }
}

/// Componentwise sum of two equally shaped quaternion tensors.
pub fn qadd(q: &QTensor, p: &QTensor) -> Result<QTensor> {
    if (q.rows, q.cols) != (p.rows, p.cols) {
        return Err(Error::ShapeMismatch {
            op: "qadd",
            details: format!("{}x{} vs {}x{}", q.rows, q.cols, p.rows, p.cols),
        });
    }
    Ok(QTensor {
        rows: q.rows,
        cols: q.cols,
        comps: std::array::from_fn(|c| &q.comps[c] + &p.comps[c]),
    })
}

/// Scalar multiplication: every component scaled by λ.
pub fn qscale(lambda: f64, q: &QTensor) -> QTensor {
    QTensor {
        rows: q.rows,
        cols: q.cols,
        comps: std::array::from_fn(|c| &q.comps[c] * lambda),
    }
}

/// Hamilton product of a quaternion matrix `w` (m×n) with a quaternion
/// matrix `x` (n×p), entrywise quaternion dot products.
///
/// Equals the real (4m)×(4n) block matrix of the signed component layout
/// applied to the stacked components of `x` (see [`block_matrix`]).
pub fn hamilton_matmul(w: &QTensor, x: &QTensor) -> Result<QTensor> {
    if w.cols != x.rows {
        return Err(Error::ShapeMismatch {
            op: "hamilton_matmul",
            details: format!("w is {}x{}, x is {}x{}", w.rows, w.cols, x.rows, x.cols),
        });
    }
    let mut comps: [Mat; 4] = std::array::from_fn(|_| Mat::zeros((w.rows, x.cols)));
    for (c, terms) in HAMILTON_TABLE.iter().enumerate() {
        for &(a, b, sign) in terms {
            comps[c].scaled_add(sign, &w.comps[a].dot(&x.comps[b]));
        }
    }
    Ok(QTensor {
        rows: w.rows,
        cols: x.cols,
        comps,
    })
}

/// The real (4m)×(4n) signed block matrix representing left Hamilton
/// multiplication by `w`, i.e. `block_matrix(w) · stack(x) = stack(w ⊗ x)`
/// where `stack` is [x_r; x_i; x_j; x_k].
pub fn block_matrix(w: &QTensor) -> Mat {
    let (m, n) = (w.rows, w.cols);
    let mut out = Mat::zeros((4 * m, 4 * n));
    for (c, terms) in HAMILTON_TABLE.iter().enumerate() {
        for &(a, b, sign) in terms {
            let mut block = out.slice_mut(ndarray::s![c * m..(c + 1) * m, b * n..(b + 1) * n]);
            block.scaled_add(sign, &w.comps[a]);
        }
    }
    out
}

/// Concatenation of two quaternion column vectors, componentwise.
pub fn qconcat(q: &QTensor, p: &QTensor) -> Result<QTensor> {
    if q.cols != 1 || p.cols != 1 {
        return Err(Error::ShapeMismatch {
            op: "qconcat",
            details: format!("expected column vectors, got {}x{} and {}x{}", q.rows, q.cols, p.rows, p.cols),
        });
    }
    let comps: [Mat; 4] = std::array::from_fn(|c| {
        concatenate(Axis(0), &[q.comps[c].view(), p.comps[c].view()])
            .expect("columns match by construction")
    });
    Ok(QTensor {
        rows: q.rows + p.rows,
        cols: 1,
        comps,
    })
}

/// Vectorization of a quaternion column vector: the four real component
/// blocks concatenated in r, i, j, k order.
pub fn vec(q: &QTensor) -> Vec<f64> {
    assert_eq!(q.cols, 1, "vec expects a column vector");
    let mut out = Vec::with_capacity(4 * q.rows);
    for c in 0..4 {
        out.extend(q.comps[c].column(0).iter().copied());
    }
    out
}

/// Inverse of [`vec`]: rebuilds the quaternion column vector from its
/// stacked component blocks.
pub fn unvec(v: &[f64]) -> Result<QTensor> {
    if v.len() % 4 != 0 {
        return Err(Error::ShapeMismatch {
            op: "unvec",
            details: format!("length {} is not a multiple of 4", v.len()),
        });
    }
    let n = v.len() / 4;
    let comps: [Mat; 4] = std::array::from_fn(|c| {
        Mat::from_shape_vec((n, 1), v[c * n..(c + 1) * n].to_vec()).expect("shape matches")
    });
    Ok(QTensor { rows: n, cols: 1, comps })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    const I: Quaternion = Quaternion::new(0.0, 1.0, 0.0, 0.0);
    const J: Quaternion = Quaternion::new(0.0, 0.0, 1.0, 0.0);
    const K: Quaternion = Quaternion::new(0.0, 0.0, 0.0, 1.0);

    fn table_hamilton(q: Quaternion, p: Quaternion) -> Quaternion {
        let mut out = [0.0; 4];
        for (c, terms) in HAMILTON_TABLE.iter().enumerate() {
            for &(a, b, sign) in terms {
                out[c] += sign * q.component(a) * p.component(b);
            }
        }
        Quaternion::new(out[0], out[1], out[2], out[3])
    }

    #[test]
    fn hamilton_identity() {
        let p = Quaternion::new(1.5, -2.0, 3.25, 4.0);
        assert_eq!(hamilton(Quaternion::one(), p), p);
        assert_eq!(hamilton(p, Quaternion::one()), p);
    }

    #[test]
    fn hamilton_basis_products() {
        assert_eq!(hamilton(I, J), K);
        assert_eq!(hamilton(J, I), Quaternion::new(0.0, 0.0, 0.0, -1.0));
        assert_eq!(hamilton(J, K), I);
        assert_eq!(hamilton(I, I), Quaternion::new(-1.0, 0.0, 0.0, 0.0));
    }

    #[test]
    fn table_matches_expanded_product() {
        let q = Quaternion::new(0.3, -1.2, 0.7, 2.1);
        let p = Quaternion::new(-0.5, 0.25, 1.75, -3.0);
        let a = hamilton(q, p);
        let b = table_hamilton(q, p);
        assert_eq!(a, b);
    }

    #[test]
    fn conjugate_involution_and_norm() {
        let q = Quaternion::new(1.0, -2.0, 0.5, 3.0);
        assert_eq!(qconjugate(qconjugate(q)), q);
        let qq = hamilton(q, qconjugate(q));
        let n2 = qnorm(q) * qnorm(q);
        assert!((qq.r - n2).abs() < 1e-12);
        assert!(qq.i.abs() < 1e-12 && qq.j.abs() < 1e-12 && qq.k.abs() < 1e-12);
    }

    #[test]
    fn norm_examples() {
        assert_eq!(qnorm(Quaternion::new(1.0, 1.0, 1.0, 1.0)), 2.0);
        assert_eq!(qnorm(Quaternion::zero()), 0.0);
    }

    #[test]
    fn normalize_examples() {
        let q = qnormalize(Quaternion::new(2.0, 0.0, 0.0, 0.0)).unwrap();
        assert_eq!(q, Quaternion::one());
        let q = qnormalize(Quaternion::new(0.0, 3.0, 4.0, 0.0)).unwrap();
        assert_eq!(q, Quaternion::new(0.0, 0.6, 0.8, 0.0));
        assert!(matches!(qnormalize(Quaternion::zero()), Err(Error::ZeroQuaternion)));
    }

    #[test]
    fn qadd_and_qscale_examples() {
        let q = QTensor::from_quaternions(&[Quaternion::new(1.0, 2.0, 3.0, 4.0)]);
        let p = QTensor::from_quaternions(&[Quaternion::new(4.0, 3.0, 2.0, 1.0)]);
        let s = qadd(&q, &p).unwrap();
        assert_eq!(s.get(0, 0), Quaternion::new(5.0, 5.0, 5.0, 5.0));
        let z = qadd(&q, &QTensor::zeros(1, 1)).unwrap();
        assert_eq!(z.get(0, 0), q.get(0, 0));

        let v = QTensor::from_quaternions(&[Quaternion::new(1.0, -1.0, 0.5, 0.0)]);
        assert_eq!(qscale(2.0, &v).get(0, 0), Quaternion::new(2.0, -2.0, 1.0, 0.0));
        assert_eq!(qscale(1.0, &v).get(0, 0), v.get(0, 0));
        assert_eq!(qscale(0.0, &v).get(0, 0), Quaternion::zero());
    }

    #[test]
    fn hamilton_matmul_real_identity() {
        // W with real identity component and zero imaginary parts maps x to x.
        let mut r = Mat::zeros((3, 3));
        for d in 0..3 {
            r[(d, d)] = 1.0;
        }
        let w = QTensor::from_components(r, Mat::zeros((3, 3)), Mat::zeros((3, 3)), Mat::zeros((3, 3))).unwrap();
        let x = QTensor::from_quaternions(&[
            Quaternion::new(1.0, 2.0, 3.0, 4.0),
            Quaternion::new(-1.0, 0.5, 0.0, 2.0),
            Quaternion::new(0.0, 0.0, 1.0, 0.0),
        ]);
        let y = hamilton_matmul(&w, &x).unwrap();
        assert_eq!(y.max_abs_diff(&x), 0.0);
    }

    #[test]
    fn hamilton_matmul_1x1_reduces_to_scalar_product() {
        let w = QTensor::from_quaternions(&[I]);
        let x = QTensor::from_quaternions(&[J]);
        let y = hamilton_matmul(&w, &x).unwrap();
        assert_eq!(y.get(0, 0), K);
    }

    #[test]
    fn hamilton_matmul_shape_mismatch() {
        let w = QTensor::zeros(2, 3);
        let x = QTensor::zeros(4, 1);
        assert!(matches!(hamilton_matmul(&w, &x), Err(Error::ShapeMismatch { .. })));
    }

    fn rng_qtensor(rows: usize, cols: usize, seed: u64) -> QTensor {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let comps: [Mat; 4] = std::array::from_fn(|_| {
            Mat::from_shape_fn((rows, cols), |_| rng.random_range(-1.0..1.0))
        });
        QTensor::from_components(
            comps[0].clone(),
            comps[1].clone(),
            comps[2].clone(),
            comps[3].clone(),
        )
        .unwrap()
    }

    #[test]
    fn hamilton_matmul_matches_block_matrix() {
        // 3x5 weight against a 5-vector, checked against the explicit
        // 12x20 real block matrix applied to the stacked 20-vector.
        let w = rng_qtensor(3, 5, 7);
        let x = rng_qtensor(5, 1, 8);
        let y = hamilton_matmul(&w, &x).unwrap();

        let big = block_matrix(&w);
        let stacked = Mat::from_shape_vec((20, 1), vec(&x)).unwrap();
        let got = big.dot(&stacked);
        let want = Mat::from_shape_vec((12, 1), vec(&y)).unwrap();
        let diff = (&got - &want).iter().fold(0.0f64, |m, v| m.max(v.abs()));
        assert!(diff < 1e-12, "max diff {diff}");
    }

    #[test]
    fn qconcat_examples() {
        let q = rng_qtensor(2, 1, 1);
        let p = rng_qtensor(3, 1, 2);
        let c = qconcat(&q, &p).unwrap();
        assert_eq!(c.rows(), 5);
        for comp in 0..4 {
            for r in 0..2 {
                assert_eq!(c.comp(comp)[(r, 0)], q.comp(comp)[(r, 0)]);
            }
            for r in 0..3 {
                assert_eq!(c.comp(comp)[(2 + r, 0)], p.comp(comp)[(r, 0)]);
            }
        }
        let empty = QTensor::zeros(0, 1);
        let same = qconcat(&q, &empty).unwrap();
        assert_eq!(same.max_abs_diff(&q), 0.0);
    }

    #[test]
    fn vec_ordering_and_unvec_roundtrip() {
        let q = QTensor::from_quaternions(&[Quaternion::new(10.0, 20.0, 30.0, 40.0)]);
        assert_eq!(vec(&q), [10.0, 20.0, 30.0, 40.0]);
        assert_eq!(vec(&QTensor::zeros(3, 1)), [0.0; 12]);

        let q = rng_qtensor(6, 1, 3);
        let back = unvec(&vec(&q)).unwrap();
        assert_eq!(back, q);
    }

    #[test]
    fn vec_of_concat_is_block_permutation() {
        // vec(concat(q, p)) interleaves component blocks: for each component
        // c, the block is [q_c; p_c].
        let q = rng_qtensor(2, 1, 4);
        let p = rng_qtensor(3, 1, 5);
        let joint = vec(&qconcat(&q, &p).unwrap());
        let vq = vec(&q);
        let vp = vec(&p);
        let (nq, np) = (2, 3);
        for c in 0..4 {
            for r in 0..nq {
                assert_eq!(joint[c * (nq + np) + r], vq[c * nq + r]);
            }
            for r in 0..np {
                assert_eq!(joint[c * (nq + np) + nq + r], vp[c * np + r]);
            }
        }
    }

    fn arb_quaternion() -> impl Strategy<Value = Quaternion> {
        let c = -10.0..10.0f64;
        (c.clone(), c.clone(), c.clone(), c).prop_map(|(r, i, j, k)| Quaternion::new(r, i, j, k))
    }

    proptest! {
        #[test]
        fn norm_is_multiplicative(q in arb_quaternion(), p in arb_quaternion()) {
            let lhs = qnorm(hamilton(q, p));
            let rhs = qnorm(q) * qnorm(p);
            prop_assert!((lhs - rhs).abs() <= 1e-12 * rhs.max(1.0));
        }

        #[test]
        fn product_is_associative(
            q in arb_quaternion(),
            p in arb_quaternion(),
            s in arb_quaternion(),
        ) {
            let l = hamilton(hamilton(q, p), s);
            let r = hamilton(q, hamilton(p, s));
            let scale = qnorm(q) * qnorm(p) * qnorm(s);
            prop_assert!((l.r - r.r).abs() <= 1e-12 * scale.max(1.0));
            prop_assert!((l.i - r.i).abs() <= 1e-12 * scale.max(1.0));
            prop_assert!((l.j - r.j).abs() <= 1e-12 * scale.max(1.0));
            prop_assert!((l.k - r.k).abs() <= 1e-12 * scale.max(1.0));
        }

        #[test]
        fn block_form_agrees_on_random_shapes(
            m in 1usize..=8,
            n in 1usize..=8,
            seed in 0u64..1000,
        ) {
            let w = rng_qtensor(m, n, seed);
            let x = rng_qtensor(n, 1, seed.wrapping_add(1));
            let y = hamilton_matmul(&w, &x).unwrap();
            let got = block_matrix(&w).dot(&Mat::from_shape_vec((4 * n, 1), vec(&x)).unwrap());
            let want = Mat::from_shape_vec((4 * m, 1), vec(&y)).unwrap();
            let diff = (&got - &want).iter().fold(0.0f64, |acc, v| acc.max(v.abs()));
            prop_assert!(diff < 1e-12);
        }

        #[test]
        fn random_qadd_matches_scalar_loop(seed in 0u64..500) {
            let q = rng_qtensor(4, 3, seed);
            let p = rng_qtensor(4, 3, seed.wrapping_add(9));
            let s = qadd(&q, &p).unwrap();
            for row in 0..4 {
                for col in 0..3 {
                    let a = q.get(row, col);
                    let b = p.get(row, col);
                    let c = s.get(row, col);
                    prop_assert_eq!(c.r, a.r + b.r);
                    prop_assert_eq!(c.i, a.i + b.i);
                    prop_assert_eq!(c.j, a.j + b.j);
                    prop_assert_eq!(c.k, a.k + b.k);
                }
            }
        }
    }
}
