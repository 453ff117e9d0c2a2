//! Liouvillian superoperator of the driven two-level system.
//!
//! Density matrices are vectorized by column stacking: for a 2x2 matrix
//! `rho`, the vector is `[rho_00, rho_10, rho_01, rho_11]` (index
//! `2*col + row`), so `vec(A rho B) = (B^T kron A) vec(rho)`.

use nalgebra::{Complex, Matrix2, Matrix4, Vector4};

use crate::error::{Error, Result};
use crate::physics::SystemParams;

type C = Complex<f64>;

/// Generalized Liouvillian: `rho -> -i (H(left) rho - rho H(right)) + dissipator`.
///
/// With `left == right` this is the ordinary Lindblad generator, which has a
/// zero eigenvalue (the steady state) and preserves the trace.
#[derive(Debug, Clone)]
pub struct Liouvillian {
    pub matrix: Matrix4<C>,
    pub left: SystemParams,
    pub right: SystemParams,
}

/// Build the (generalized) Liouvillian matrix for the given parameter pair.
pub fn liouvillian(left: SystemParams, right: SystemParams) -> Result<Liouvillian> {
    if left.gamma != right.gamma {
        return Err(Error::Domain(
            "left and right parameters must share the decay rate".into(),
        ));
    }
    Ok(Liouvillian {
        matrix: liouvillian_raw(left.delta, right.delta, left.omega, right.omega, left.gamma),
        left,
        right,
    })
}

/// Unchecked matrix builder; accepts negative detunings for stencil
/// evaluations of parameter derivatives.
pub(crate) fn liouvillian_raw(
    delta_left: f64,
    delta_right: f64,
    omega_left: f64,
    omega_right: f64,
    gamma: f64,
) -> Matrix4<C> {
    let h = |delta: f64, omega: f64| {
        Matrix2::new(
            C::new(0.0, 0.0),
            C::new(omega, 0.0),
            C::new(omega, 0.0),
            C::new(delta, 0.0),
        )
    };
    let eye = Matrix2::identity();
    let sigma = Matrix2::new(
        C::new(0.0, 0.0),
        C::new(1.0, 0.0),
        C::new(0.0, 0.0),
        C::new(0.0, 0.0),
    );
    let number = Matrix2::new(
        C::new(0.0, 0.0),
        C::new(0.0, 0.0),
        C::new(0.0, 0.0),
        C::new(1.0, 0.0),
    );

    let minus_i = C::new(0.0, -1.0);
    let g = C::new(gamma, 0.0);
    let half_g = C::new(0.5 * gamma, 0.0);

    let commutator = kron2(&eye, &h(delta_left, omega_left)) * minus_i
        - kron2(&h(delta_right, omega_right).transpose(), &eye) * minus_i;
    let jump = kron2(&sigma, &sigma) * g;
    let anti = (kron2(&eye, &number) + kron2(&number.transpose(), &eye)) * half_g;
    commutator + jump - anti
}

fn kron2(a: &Matrix2<C>, b: &Matrix2<C>) -> Matrix4<C> {
    let mut out = Matrix4::zeros();
    for i in 0..2 {
        for j in 0..2 {
            for k in 0..2 {
                for l in 0..2 {
                    out[(2 * i + k, 2 * j + l)] = a[(i, j)] * b[(k, l)];
                }
            }
        }
    }
    out
}

impl Liouvillian {
    pub fn is_ordinary(&self) -> bool {
        self.left == self.right
    }

    /// All four eigenvalues, sorted by descending real part (ties by
    /// descending imaginary part).
    pub fn eigenvalues(&self) -> Result<Vec<C>> {
        eigenvalues4(&self.matrix)
    }

    /// Stationary state of the ordinary Liouvillian, vectorized, trace 1.
    pub fn steady_state(&self) -> Result<Vector4<C>> {
        if !self.is_ordinary() {
            return Err(Error::Domain(
                "steady state is defined for the ordinary Liouvillian only".into(),
            ));
        }
        // Replace one row by the trace functional and solve L' x = e_row.
        for row in 0..4 {
            let mut m = self.matrix;
            for col in 0..4 {
                m[(row, col)] = C::new(0.0, 0.0);
            }
            m[(row, 0)] = C::new(1.0, 0.0);
            m[(row, 3)] = C::new(1.0, 0.0);
            let mut rhs = Vector4::zeros();
            rhs[row] = C::new(1.0, 0.0);
            if let Some(x) = m.lu().solve(&rhs) {
                let residual = (self.matrix * x).norm();
                if residual < 1e-9 {
                    return Ok(x);
                }
            }
        }
        Err(Error::Domain("steady-state solve failed".into()))
    }

    /// Excited-state population of the steady state.
    pub fn steady_population(&self) -> Result<f64> {
        Ok(self.steady_state()?[3].re)
    }
}

pub(crate) fn eigenvalues4(m: &Matrix4<C>) -> Result<Vec<C>> {
    let schur = m
        .try_schur(1e-14, 50_000)
        .ok_or_else(|| Error::EigenvalueTracking("Schur iteration did not converge".into()))?;
    let (_, t) = schur.unpack();
    let mut eig: Vec<C> = (0..4).map(|i| t[(i, i)]).collect();
    eig.sort_by(|a, b| {
        b.re.partial_cmp(&a.re)
            .unwrap()
            .then(b.im.partial_cmp(&a.im).unwrap())
    });
    Ok(eig)
}
