//! Pfaffians of antisymmetric matrices by Parlett–Reid elimination.

use crate::error::{Error, Result};
use crate::linalg::antisymmetry_defect;
use ndarray::Array2;
use ndarray_linalg::Scalar;

/// `Pf = phase · exp(ln_abs)`; a vanishing Pfaffian has `phase = 0` and
/// `ln_abs = -inf`. Kept in log form because Pfaffians of 1024×1024
/// Lindbladian matrices overflow `f64` long before they lose precision.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LogPfaffian<A> {
    pub phase: A,
    pub ln_abs: f64,
}

impl<A: Scalar<Real = f64>> LogPfaffian<A> {
    pub fn value(&self) -> A {
        if self.ln_abs == f64::NEG_INFINITY {
            return A::zero();
        }
        self.phase * A::from_real(self.ln_abs.exp())
    }
}

fn check<A: Scalar<Real = f64>>(m: &Array2<A>) -> Result<()> {
    let n = m.nrows();
    if m.ncols() != n {
        return Err(Error::Linalg(format!("Pfaffian of a non-square {}x{} matrix", n, m.ncols())));
    }
    if n % 2 == 1 {
        return Err(Error::OddDimension(n));
    }
    let scale = m.iter().map(|x| x.abs()).fold(0.0, f64::max);
    let defect = antisymmetry_defect(&m.view());
    if defect > 1e-12 * scale.max(f64::MIN_POSITIVE) {
        return Err(Error::NotAntisymmetric(defect));
    }
    Ok(())
}

/// Pfaffian in log form. Skew-symmetric LTLᵀ elimination with partial
/// pivoting: each step takes the largest entry of the next column as pivot
/// and applies the rank-2 update to the trailing block.
pub fn pfaffian_log<A: Scalar<Real = f64>>(m: &Array2<A>) -> Result<LogPfaffian<A>> {
    check(m)?;
    let n = m.nrows();
    let mut a = m.as_standard_layout().to_owned();
    let mut phase = A::one();
    let mut ln_abs = 0.0f64;
    let mut col = vec![A::zero(); n];
    let mut tau = vec![A::zero(); n];

    for k in (0..n.saturating_sub(1)).step_by(2) {
        let mut kp = k + 1;
        let mut best = a[[k + 1, k]].abs();
        for i in k + 2..n {
            let v = a[[i, k]].abs();
            if v > best {
                best = v;
                kp = i;
            }
        }
        if kp != k + 1 {
            for j in 0..n {
                a.swap([k + 1, j], [kp, j]);
            }
            for i in 0..n {
                a.swap([i, k + 1], [i, kp]);
            }
            phase = -phase;
        }
        let pivot = a[[k, k + 1]];
        if best == 0.0 {
            return Ok(LogPfaffian { phase: A::zero(), ln_abs: f64::NEG_INFINITY });
        }
        let mag = pivot.abs();
        ln_abs += mag.ln();
        phase *= pivot / A::from_real(mag);

        if k + 2 < n {
            for j in k + 2..n {
                tau[j] = a[[k, j]] / pivot;
                col[j] = a[[j, k + 1]];
            }
            let data = a.as_slice_mut().expect("standard layout");
            for i in k + 2..n {
                let (ti, ci) = (tau[i], col[i]);
                let row = &mut data[i * n + k + 2..(i + 1) * n];
                for ((x, &cj), &tj) in row.iter_mut().zip(&col[k + 2..]).zip(&tau[k + 2..]) {
                    *x += ti * cj - ci * tj;
                }
            }
        }
    }
    Ok(LogPfaffian { phase, ln_abs })
}

pub fn pfaffian<A: Scalar<Real = f64>>(m: &Array2<A>) -> Result<A> {
    Ok(pfaffian_log(m)?.value())
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;
    use ndarray_linalg::Determinant;
    use num_complex::Complex64 as C64;
    use proptest::prelude::*;

    fn antisym_real(n: usize, entries: &[f64]) -> Array2<f64> {
        let mut m = Array2::zeros((n, n));
        let mut it = entries.iter().cycle();
        for i in 0..n {
            for j in i + 1..n {
                let v = *it.next().unwrap();
                m[[i, j]] = v;
                m[[j, i]] = -v;
            }
        }
        m
    }

    #[test]
    fn two_by_two() {
        assert_eq!(pfaffian(&array![[0.0, 3.5], [-3.5, 0.0]]).unwrap(), 3.5);
    }

    #[test]
    fn four_by_four_expansion() {
        let (a12, a13, a14, a23, a24, a34) = (1.3, -0.7, 2.1, 0.4, -1.9, 0.8);
        let m = array![
            [0.0, a12, a13, a14],
            [-a12, 0.0, a23, a24],
            [-a13, -a23, 0.0, a34],
            [-a14, -a24, -a34, 0.0]
        ];
        let want = a12 * a34 - a13 * a24 + a14 * a23;
        assert!((pfaffian(&m).unwrap() - want).abs() < 1e-14);
    }

    #[test]
    fn odd_and_asymmetric_rejected() {
        assert!(matches!(pfaffian(&Array2::<f64>::zeros((3, 3))), Err(Error::OddDimension(3))));
        assert!(matches!(pfaffian(&array![[0.0, 1.0], [1.0, 0.0]]), Err(Error::NotAntisymmetric(_))));
    }

    #[test]
    fn zero_pfaffian_is_legal() {
        let m = antisym_real(4, &[1.0, 1.0, 1.0, 1.0, 1.0, 1.0]).mapv(|x| x * 0.0);
        assert_eq!(pfaffian(&m).unwrap(), 0.0);
    }

    #[test]
    fn log_form_survives_overflow() {
        let n = 800;
        let mut m = Array2::<f64>::zeros((n, n));
        for k in (0..n).step_by(2) {
            m[[k, k + 1]] = 1e4;
            m[[k + 1, k]] = -1e4;
        }
        let lp = pfaffian_log(&m).unwrap();
        assert_eq!(lp.phase, 1.0);
        assert!((lp.ln_abs - 400.0 * 1e4f64.ln()).abs() < 1e-9);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn square_is_determinant_real(half in 1usize..=8, entries in proptest::collection::vec(-2.0f64..2.0, 120)) {
            let m = antisym_real(2 * half, &entries);
            let pf = pfaffian(&m).unwrap();
            let det = m.det().unwrap();
            prop_assert!((pf * pf - det).abs() <= 1e-8 * det.abs().max(1e-300) + 1e-13);
        }

        #[test]
        fn square_is_determinant_complex(half in 1usize..=8,
            re in proptest::collection::vec(-2.0f64..2.0, 120),
            im in proptest::collection::vec(-2.0f64..2.0, 120)) {
            let n = 2 * half;
            let mut m = Array2::<C64>::zeros((n, n));
            let mut k = 0;
            for i in 0..n {
                for j in i + 1..n {
                    let v = C64::new(re[k % 120], im[k % 120]);
                    k += 1;
                    m[[i, j]] = v;
                    m[[j, i]] = -v;
                }
            }
            let pf = pfaffian(&m).unwrap();
            let det = m.det().unwrap();
            prop_assert!((pf * pf - det).norm() <= 1e-8 * det.norm());
        }

        #[test]
        fn congruence_scales_by_determinant(half in 1usize..=5, entries in proptest::collection::vec(-2.0f64..2.0, 60),
            b in proptest::collection::vec(-1.0f64..1.0, 100)) {
            let n = 2 * half;
            let m = antisym_real(n, &entries);
            let bm = Array2::from_shape_fn((n, n), |(i, j)| b[(i * n + j) % 100] + if i == j { 2.0 } else { 0.0 });
            let lhs = pfaffian(&bm.dot(&m).dot(&bm.t())).unwrap();
            let rhs = bm.det().unwrap() * pfaffian(&m).unwrap();
            prop_assert!((lhs - rhs).abs() <= 1e-9 * rhs.abs().max(1.0));
        }
    }
}
