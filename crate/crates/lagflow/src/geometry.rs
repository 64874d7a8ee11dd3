//! Flat Calabi-Yau linear algebra: the standard complex structure on R^{2n},
//! lagrangian frames, the lagrangian angle and its first variation.
//!
//! Coordinates are ordered so that the complex coordinate `z_k = x_k + i x_{n+k}`;
//! the complex structure acts block-wise as `J (x, y) = (-y, x)`.

use nalgebra::{Complex, DMatrix, DVector};
use thiserror::Error;

/// Frames must reproduce a unit complex determinant to within this tolerance
/// to count as lagrangian.
pub const TAU_LAG: f64 = 1e-6;

/// Orthonormality tolerance after Gram-Schmidt.
pub const TAU_FRAME: f64 = 1e-10;

/// Rank tolerance: a Gram-Schmidt pivot below this (relative to the column
/// scale) means the frame is degenerate.
const TAU_RANK: f64 = 1e-12;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GeometryError {
    #[error("frame is not lagrangian: |det_C| deviates from 1 by {deviation:e}")]
    NonLagrangianFrame { deviation: f64 },
    #[error("frame is degenerate (rank < n)")]
    DegenerateFrame,
    #[error("dimension mismatch: expected ambient dimension {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
}

/// The standard complex structure `J` on R^{2n}, with `omega(u, v) = <Ju, v>`.
///
/// `J` pairs coordinate `k` with coordinate `n + k`; it is an exact isometry
/// and `J*J = -Id` holds in floating point without error (the action is a
/// signed permutation of coordinates).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ComplexStructure {
    n: usize,
}

impl ComplexStructure {
    pub fn new(n: usize) -> Self {
        assert!(n >= 1, "complex dimension must be at least 1");
        ComplexStructure { n }
    }

    #[inline]
    pub fn n(&self) -> usize {
        self.n
    }

    /// Ambient dimension 2n.
    #[inline]
    pub fn ambient_dim(&self) -> usize {
        2 * self.n
    }

    /// Apply `J` in place of an output slice: `out = J v`.
    #[inline]
    pub fn apply_into(&self, v: &[f64], out: &mut [f64]) {
        let n = self.n;
        debug_assert_eq!(v.len(), 2 * n);
        debug_assert_eq!(out.len(), 2 * n);
        for k in 0..n {
            out[k] = -v[n + k];
            out[n + k] = v[k];
        }
    }

    pub fn apply(&self, v: &DVector<f64>) -> DVector<f64> {
        let mut out = DVector::zeros(2 * self.n);
        self.apply_into(v.as_slice(), out.as_mut_slice());
        out
    }

    /// Apply `J` to every column of a matrix: `J M`.
    pub fn apply_matrix(&self, m: &DMatrix<f64>) -> DMatrix<f64> {
        let n = self.n;
        debug_assert_eq!(m.nrows(), 2 * n);
        let mut out = DMatrix::zeros(m.nrows(), m.ncols());
        for c in 0..m.ncols() {
            for k in 0..n {
                out[(k, c)] = -m[(n + k, c)];
                out[(n + k, c)] = m[(k, c)];
            }
        }
        out
    }

    /// Symplectic form `omega(u, v) = <Ju, v>`.
    #[inline]
    pub fn omega(&self, u: &[f64], v: &[f64]) -> f64 {
        let n = self.n;
        let mut s = 0.0;
        for k in 0..n {
            s += u[k] * v[n + k] - u[n + k] * v[k];
        }
        s
    }

    /// Dense matrix of `J`, mostly for tests.
    pub fn matrix(&self) -> DMatrix<f64> {
        let n = self.n;
        let mut m = DMatrix::zeros(2 * n, 2 * n);
        for k in 0..n {
            m[(k, n + k)] = -1.0;
            m[(n + k, k)] = 1.0;
        }
        m
    }
}

/// An orthonormal frame spanning an n-plane in R^{2n}, stored column-wise.
///
/// Frames are orthonormalized on construction by deterministic Gram-Schmidt
/// in index order, so repeated push-forwards are reproducible bit for bit.
/// The plane need not be lagrangian; [`lagrangian_angle`] checks that.
#[derive(Debug, Clone, PartialEq)]
pub struct LagrangianFrame {
    /// 2n x n matrix whose columns are the frame vectors.
    vectors: DMatrix<f64>,
    /// +1 or -1; a negative orientation shifts the angle by pi.
    orientation: i8,
}

impl LagrangianFrame {
    /// Build a frame from `n` ambient vectors, orthonormalizing in index order.
    pub fn new(columns: Vec<DVector<f64>>) -> Result<Self, GeometryError> {
        let n = columns.len();
        assert!(n >= 1, "frame needs at least one vector");
        let dim = columns[0].len();
        if dim != 2 * n {
            return Err(GeometryError::DimensionMismatch {
                expected: 2 * n,
                got: dim,
            });
        }
        let mut m = DMatrix::zeros(dim, n);
        for (c, col) in columns.iter().enumerate() {
            if col.len() != dim {
                return Err(GeometryError::DimensionMismatch {
                    expected: dim,
                    got: col.len(),
                });
            }
            m.set_column(c, col);
        }
        let (q, _factors) = gram_schmidt(&m)?;
        Ok(LagrangianFrame {
            vectors: q,
            orientation: 1,
        })
    }

    /// Wrap an already orthonormal 2n x n matrix without re-orthonormalizing,
    /// keeping the stored bits intact (used by lossless deserialization).
    pub fn from_orthonormal(m: DMatrix<f64>) -> Result<Self, GeometryError> {
        if m.nrows() != 2 * m.ncols() {
            return Err(GeometryError::DimensionMismatch {
                expected: 2 * m.ncols(),
                got: m.nrows(),
            });
        }
        let n = m.ncols();
        for a in 0..n {
            for b in a..n {
                let dot = m.column(a).dot(&m.column(b));
                let expect = if a == b { 1.0 } else { 0.0 };
                if (dot - expect).abs() > TAU_FRAME {
                    return Err(GeometryError::DegenerateFrame);
                }
            }
        }
        Ok(LagrangianFrame {
            vectors: m,
            orientation: 1,
        })
    }

    /// Frame from a prepared 2n x n matrix (orthonormalizes).
    pub fn from_matrix(m: DMatrix<f64>) -> Result<Self, GeometryError> {
        if m.nrows() != 2 * m.ncols() {
            return Err(GeometryError::DimensionMismatch {
                expected: 2 * m.ncols(),
                got: m.nrows(),
            });
        }
        let (q, _factors) = gram_schmidt(&m)?;
        Ok(LagrangianFrame {
            vectors: q,
            orientation: 1,
        })
    }

    #[inline]
    pub fn n(&self) -> usize {
        self.vectors.ncols()
    }

    #[inline]
    pub fn ambient_dim(&self) -> usize {
        self.vectors.nrows()
    }

    /// The orthonormal basis as a 2n x n matrix.
    #[inline]
    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.vectors
    }

    #[inline]
    pub fn column(&self, k: usize) -> nalgebra::DVectorView<'_, f64> {
        self.vectors.column(k)
    }

    #[inline]
    pub fn orientation(&self) -> i8 {
        self.orientation
    }

    pub fn with_orientation(mut self, orientation: i8) -> Self {
        assert!(orientation == 1 || orientation == -1);
        self.orientation = orientation;
        self
    }

    /// Reverse the orientation without touching the basis.
    pub fn flip_orientation(&mut self) {
        self.orientation = -self.orientation;
    }

    /// Orthogonal projection matrix onto the spanned plane, `P = F F^T`.
    pub fn projection(&self) -> DMatrix<f64> {
        &self.vectors * self.vectors.transpose()
    }

    /// Project an ambient vector onto the spanned plane.
    pub fn project(&self, v: &DVector<f64>) -> DVector<f64> {
        let coeffs = self.vectors.transpose() * v;
        &self.vectors * coeffs
    }

    /// Trace of the restriction of an ambient 2n x 2n operator to the plane:
    /// `tr_S M = sum_k <M e_k, e_k>`.
    pub fn trace_restricted(&self, m: &DMatrix<f64>) -> f64 {
        let mut tr = 0.0;
        for k in 0..self.n() {
            let col = self.vectors.column(k);
            let mcol = m * col;
            tr += mcol.dot(&col);
        }
        tr
    }
}

/// Deterministic modified Gram-Schmidt in index order.
///
/// Returns the orthonormal basis and the pivot norms (the diagonal of the R
/// factor); the product of the pivots is the n-volume of the parallelepiped
/// spanned by the input columns.
fn gram_schmidt(m: &DMatrix<f64>) -> Result<(DMatrix<f64>, Vec<f64>), GeometryError> {
    let mut q = m.clone();
    let n = m.ncols();
    let scale = m.amax().max(1e-300);
    let mut factors = Vec::with_capacity(n);
    for k in 0..n {
        for j in 0..k {
            let proj = q.column(j).dot(&q.column(k));
            let col_j = q.column(j).clone_owned();
            let mut col_k = q.column_mut(k);
            col_k.axpy(-proj, &col_j, 1.0);
        }
        let norm = q.column(k).norm();
        if norm <= TAU_RANK * scale {
            return Err(GeometryError::DegenerateFrame);
        }
        q.column_mut(k).unscale_mut(norm);
        factors.push(norm);
    }
    Ok((q, factors))
}

/// A vector field sampled at one point together with its exact jacobian.
#[derive(Debug, Clone)]
pub struct VectorFieldSample {
    pub value: DVector<f64>,
    /// 2n x 2n matrix, `jacobian[(i, j)] = d X_i / d x_j`.
    pub jacobian: DMatrix<f64>,
}

/// An ambient vector field that can report exact analytic jacobians.
pub trait AmbientField {
    fn sample(&self, x: &DVector<f64>) -> VectorFieldSample;
}

impl<F> AmbientField for F
where
    F: Fn(&DVector<f64>) -> VectorFieldSample,
{
    fn sample(&self, x: &DVector<f64>) -> VectorFieldSample {
        self(x)
    }
}

/// Complex n x n matrix whose columns are the frame vectors read in complex
/// coordinates `z_k = x_k + i x_{n+k}`.
fn complex_matrix(frame: &LagrangianFrame) -> DMatrix<Complex<f64>> {
    let n = frame.n();
    let f = frame.matrix();
    DMatrix::from_fn(n, n, |j, k| Complex::new(f[(j, k)], f[(n + j, k)]))
}

/// The oriented lagrangian angle of a frame, in `[0, 2*pi)`.
///
/// Computed as the argument of the complex determinant of the frame read in
/// complex coordinates; for an orthonormal frame the modulus of that
/// determinant is 1 exactly when the plane is lagrangian, which is checked
/// against [`TAU_LAG`].
pub fn lagrangian_angle(frame: &LagrangianFrame) -> Result<f64, GeometryError> {
    let a = complex_matrix(frame);
    let det = a.determinant();
    let modulus = det.norm();
    let deviation = (modulus - 1.0).abs();
    if deviation > TAU_LAG {
        if modulus < TAU_RANK {
            return Err(GeometryError::DegenerateFrame);
        }
        return Err(GeometryError::NonLagrangianFrame { deviation });
    }
    let mut beta = det.arg();
    if frame.orientation() < 0 {
        beta += std::f64::consts::PI;
    }
    Ok(beta.rem_euclid(2.0 * std::f64::consts::PI))
}

/// Largest symplectic pairing among frame vectors,
/// `max_{i<j} |omega(e_i, e_j)|`. Zero exactly on lagrangian planes.
pub fn omega_residual(frame: &LagrangianFrame) -> Result<f64, GeometryError> {
    let n = frame.n();
    let j = ComplexStructure::new(n);
    let mut max = 0.0_f64;
    for a in 0..n {
        for b in (a + 1)..n {
            let w = j
                .omega(frame.column(a).as_slice(), frame.column(b).as_slice())
                .abs();
            max = max.max(w);
        }
    }
    Ok(max)
}

/// First variation of the lagrangian angle under an ambient deformation
/// field: `delta_X beta(S) = -tr_S D(JX)`.
///
/// `D(JX) = J DX` since `J` is constant, so only the field's jacobian enters.
pub fn beta_first_variation(frame: &LagrangianFrame, field: &VectorFieldSample) -> f64 {
    let j = ComplexStructure::new(frame.n());
    let djx = j.apply_matrix(&field.jacobian);
    -frame.trace_restricted(&djx)
}

/// Push a frame forward through an invertible linear map.
///
/// Returns the orthonormalized image frame (Gram-Schmidt in index order) and
/// the n-volume of the image parallelepiped, the weight multiplier for mass
/// transport.
pub fn push_forward_frame(
    frame: &LagrangianFrame,
    dpsi: &DMatrix<f64>,
) -> Result<(LagrangianFrame, f64), GeometryError> {
    let image = dpsi * frame.matrix();
    let (q, factors) = gram_schmidt(&image)?;
    let volume = factors.iter().product();
    Ok((
        LagrangianFrame {
            vectors: q,
            orientation: frame.orientation,
        },
        volume,
    ))
}

/// Orthonormalize the columns of a 2n x n matrix over the complex inner
/// product (deterministic Gram-Schmidt in index order, positive pivots),
/// producing the nearby lagrangian orthonormal frame: a complex-unitary
/// column system read in real coordinates is exactly lagrangian. The
/// argument of the complex determinant, and with it the lagrangian angle,
/// is unchanged.
pub fn lagrangian_orthonormalize(m: &DMatrix<f64>) -> Result<LagrangianFrame, GeometryError> {
    let n = m.ncols();
    if m.nrows() != 2 * n {
        return Err(GeometryError::DimensionMismatch {
            expected: 2 * n,
            got: m.nrows(),
        });
    }
    let mut a = DMatrix::<Complex<f64>>::from_fn(n, n, |j, k| Complex::new(m[(j, k)], m[(n + j, k)]));
    let scale = m.amax().max(1e-300);
    for k in 0..n {
        for j in 0..k {
            // complex projection <a_k, a_j>
            let mut proj = Complex::new(0.0, 0.0);
            for r in 0..n {
                proj += a[(r, j)].conj() * a[(r, k)];
            }
            for r in 0..n {
                let correction = proj * a[(r, j)];
                a[(r, k)] -= correction;
            }
        }
        let norm = a.column(k).norm();
        if norm <= TAU_RANK * scale {
            return Err(GeometryError::DegenerateFrame);
        }
        for r in 0..n {
            a[(r, k)] /= Complex::new(norm, 0.0);
        }
    }
    let mut out = DMatrix::<f64>::zeros(2 * n, n);
    for k in 0..n {
        for j in 0..n {
            out[(j, k)] = a[(j, k)].re;
            out[(n + j, k)] = a[(j, k)].im;
        }
    }
    Ok(LagrangianFrame {
        vectors: out,
        orientation: 1,
    })
}

/// n-volume of the parallelepiped spanned by the columns.
pub fn parallelepiped_volume(m: &DMatrix<f64>) -> f64 {
    let gram = m.transpose() * m;
    gram.determinant().max(0.0).sqrt()
}

/// Wrap an angle difference to the principal branch `(-pi, pi]`.
#[inline]
pub fn wrap_angle(delta: f64) -> f64 {
    use std::f64::consts::PI;
    let mut d = delta.rem_euclid(2.0 * PI);
    if d > PI {
        d -= 2.0 * PI;
    }
    d
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use std::f64::consts::PI;

    fn frame1(dir: [f64; 2]) -> LagrangianFrame {
        LagrangianFrame::new(vec![DVector::from_column_slice(&dir)]).unwrap()
    }

    #[test]
    fn j_squares_to_minus_identity_exactly() {
        for n in 1..=4 {
            let j = ComplexStructure::new(n);
            let m = j.matrix();
            let jj = &m * &m;
            assert_eq!(jj, -DMatrix::<f64>::identity(2 * n, 2 * n));
        }
    }

    #[test]
    fn j_is_an_exact_isometry() {
        let j = ComplexStructure::new(3);
        let u = DVector::from_fn(6, |i, _| (i as f64 + 1.0) * 0.37);
        let v = DVector::from_fn(6, |i, _| (i as f64 - 2.5) * 1.21);
        let ju = j.apply(&u);
        let jv = j.apply(&v);
        assert_eq!(ju.dot(&jv), u.dot(&v));
    }

    #[test]
    fn omega_is_antisymmetric() {
        let j = ComplexStructure::new(2);
        let u = [1.0, 2.0, 3.0, 4.0];
        let v = [-0.5, 0.25, 2.0, -1.0];
        assert_eq!(j.omega(&u, &v), -j.omega(&v, &u));
    }

    #[test]
    fn angle_of_axis_aligned_line_is_zero() {
        let f = frame1([1.0, 0.0]);
        assert_relative_eq!(lagrangian_angle(&f).unwrap(), 0.0, epsilon = 1e-14);
    }

    #[test]
    fn angle_of_rotated_line_is_theta_plus_half_pi() {
        for &theta in &[0.2_f64, 1.0, 2.5, 4.0] {
            let f = frame1([-theta.sin(), theta.cos()]);
            let beta = lagrangian_angle(&f).unwrap();
            assert_relative_eq!(beta, (theta + PI / 2.0).rem_euclid(2.0 * PI), epsilon = 1e-12);
        }
    }

    #[test]
    fn angle_of_real_plane_in_c2_is_zero() {
        let f = LagrangianFrame::new(vec![
            DVector::from_column_slice(&[1.0, 0.0, 0.0, 0.0]),
            DVector::from_column_slice(&[0.0, 1.0, 0.0, 0.0]),
        ])
        .unwrap();
        assert_relative_eq!(lagrangian_angle(&f).unwrap(), 0.0, epsilon = 1e-14);
    }

    #[test]
    fn angle_of_product_frame_matches_complex_determinant_oracle() {
        // Tangent frame of a product of two unit circles at parameters
        // (t1, t2): columns i e^{i t1}, i e^{i t2} on the diagonal, so the
        // determinant argument is t1 + t2 + pi.
        for &(t1, t2) in &[(0.3, 1.1), (2.0, 4.5), (0.0, 0.0), (5.9, 0.4)] {
            let e1 = DVector::from_column_slice(&[-f64::sin(t1), 0.0, f64::cos(t1), 0.0]);
            let e2 = DVector::from_column_slice(&[0.0, -f64::sin(t2), 0.0, f64::cos(t2)]);
            let f = LagrangianFrame::new(vec![e1, e2]).unwrap();
            let beta = lagrangian_angle(&f).unwrap();
            let expect = (t1 + t2 + PI).rem_euclid(2.0 * PI);
            assert_relative_eq!(beta, expect, epsilon = 1e-12);
        }
    }

    #[test]
    fn swapping_frame_vectors_shifts_angle_by_pi() {
        let e1 = DVector::from_column_slice(&[1.0, 0.0, 0.0, 0.0]);
        let e2 = DVector::from_column_slice(&[0.0, 1.0, 0.0, 0.0]);
        let f = LagrangianFrame::new(vec![e1.clone(), e2.clone()]).unwrap();
        let g = LagrangianFrame::new(vec![e2, e1]).unwrap();
        let bf = lagrangian_angle(&f).unwrap();
        let bg = lagrangian_angle(&g).unwrap();
        assert_relative_eq!(wrap_angle(bg - bf).abs(), PI, epsilon = 1e-12);
    }

    #[test]
    fn orientation_flip_shifts_angle_by_pi() {
        let f = frame1([0.6, 0.8]);
        let b = lagrangian_angle(&f).unwrap();
        let flipped = f.clone().with_orientation(-1);
        let bf = lagrangian_angle(&flipped).unwrap();
        assert_relative_eq!(wrap_angle(bf - b).abs(), PI, epsilon = 1e-12);
    }

    #[test]
    fn non_lagrangian_plane_is_rejected() {
        // span{e1, J e1} in C^2 is a complex line, as far from lagrangian
        // as possible.
        let f = LagrangianFrame::new(vec![
            DVector::from_column_slice(&[1.0, 0.0, 0.0, 0.0]),
            DVector::from_column_slice(&[0.0, 0.0, 1.0, 0.0]),
        ])
        .unwrap();
        assert!(matches!(
            lagrangian_angle(&f),
            Err(GeometryError::NonLagrangianFrame { .. }) | Err(GeometryError::DegenerateFrame)
        ));
    }

    #[test]
    fn omega_residual_examples() {
        let line = frame1([0.6, 0.8]);
        assert_eq!(omega_residual(&line).unwrap(), 0.0);

        let real_plane = LagrangianFrame::new(vec![
            DVector::from_column_slice(&[1.0, 0.0, 0.0, 0.0]),
            DVector::from_column_slice(&[0.0, 1.0, 0.0, 0.0]),
        ])
        .unwrap();
        assert_relative_eq!(omega_residual(&real_plane).unwrap(), 0.0, epsilon = 1e-15);

        let complex_line = LagrangianFrame::new(vec![
            DVector::from_column_slice(&[1.0, 0.0, 0.0, 0.0]),
            DVector::from_column_slice(&[0.0, 0.0, 1.0, 0.0]),
        ])
        .unwrap();
        assert_relative_eq!(omega_residual(&complex_line).unwrap(), 1.0, epsilon = 1e-15);
    }

    #[test]
    fn degenerate_frame_is_rejected() {
        let r = LagrangianFrame::new(vec![
            DVector::from_column_slice(&[1.0, 0.0, 0.0, 0.0]),
            DVector::from_column_slice(&[2.0, 0.0, 0.0, 0.0]),
        ]);
        assert!(matches!(r, Err(GeometryError::DegenerateFrame)));
    }

    #[test]
    fn constant_field_has_zero_angle_variation() {
        let f = frame1([0.6, 0.8]);
        let sample = VectorFieldSample {
            value: DVector::from_column_slice(&[3.0, -1.0]),
            jacobian: DMatrix::zeros(2, 2),
        };
        assert_eq!(beta_first_variation(&f, &sample), 0.0);
    }

    #[test]
    fn rotation_field_turns_angle_at_unit_rate() {
        // X = Jx on R^2 has DX = J, so -tr_S D(JX) = -tr_S (J J) = tr_S Id = 1.
        let j = ComplexStructure::new(1);
        for &theta in &[0.0_f64, 0.7, 2.0] {
            let f = frame1([-theta.sin(), theta.cos()]);
            let sample = VectorFieldSample {
                value: DVector::zeros(2),
                jacobian: j.matrix(),
            };
            assert_relative_eq!(beta_first_variation(&f, &sample), 1.0, epsilon = 1e-15);
        }
    }

    #[test]
    fn beta_first_variation_is_linear_in_the_field() {
        let f = LagrangianFrame::new(vec![
            DVector::from_column_slice(&[1.0, 0.0, 0.0, 0.0]),
            DVector::from_column_slice(&[0.0, 0.8, 0.0, 0.6]),
        ])
        .unwrap();
        let a = VectorFieldSample {
            value: DVector::zeros(4),
            jacobian: DMatrix::from_fn(4, 4, |i, j| ((i * 7 + j * 3) % 5) as f64 - 2.0),
        };
        let b = VectorFieldSample {
            value: DVector::zeros(4),
            jacobian: DMatrix::from_fn(4, 4, |i, j| ((i * 2 + j) % 7) as f64 * 0.5 - 1.0),
        };
        let combo = VectorFieldSample {
            value: DVector::zeros(4),
            jacobian: 2.0 * &a.jacobian - 0.5 * &b.jacobian,
        };
        let lhs = beta_first_variation(&f, &combo);
        let rhs = 2.0 * beta_first_variation(&f, &a) - 0.5 * beta_first_variation(&f, &b);
        assert_relative_eq!(lhs, rhs, epsilon = 1e-12);
    }

    #[test]
    fn push_forward_identity_and_scaling() {
        let f = frame1([0.6, 0.8]);
        let (g, vol) = push_forward_frame(&f, &DMatrix::identity(2, 2)).unwrap();
        assert_eq!(g.matrix(), f.matrix());
        assert_relative_eq!(vol, 1.0, epsilon = 1e-15);

        let (g2, vol2) = push_forward_frame(&f, &(2.0 * DMatrix::identity(2, 2))).unwrap();
        assert_relative_eq!((g2.matrix() - f.matrix()).norm(), 0.0, epsilon = 1e-15);
        assert_relative_eq!(vol2, 2.0, epsilon = 1e-15);
    }

    #[test]
    fn push_forward_by_singular_map_is_degenerate() {
        let f = LagrangianFrame::new(vec![
            DVector::from_column_slice(&[1.0, 0.0, 0.0, 0.0]),
            DVector::from_column_slice(&[0.0, 1.0, 0.0, 0.0]),
        ])
        .unwrap();
        let mut dpsi = DMatrix::identity(4, 4);
        dpsi[(1, 1)] = 0.0;
        assert!(matches!(
            push_forward_frame(&f, &dpsi),
            Err(GeometryError::DegenerateFrame)
        ));
    }
}
