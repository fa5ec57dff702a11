//! Finite-difference probes and the seam check for piecewise maps.

use serde::Serialize;

use super::SmoothMap;
use crate::error::{domain, Error, Result};

pub const DEFAULT_FD_STEP: f64 = 1e-4;

fn shifted(p: &[f64], axis: usize, d: f64) -> Vec<f64> {
    let mut q = p.to_vec();
    q[axis] += d;
    q
}

fn combine(terms: &[(f64, &[f64])], scale: f64) -> Vec<f64> {
    let m = terms[0].1.len();
    (0..m)
        .map(|i| terms.iter().map(|(c, v)| c * v[i]).sum::<f64>() / scale)
        .collect()
}

fn one_sided(f: &SmoothMap, p: &[f64], axis: usize, h: f64) -> Result<Vec<f64>> {
    // second-order: (-3 f(x) + 4 f(x + h) - f(x + 2h)) / 2h, h may be negative
    let f0 = f.eval(p)?;
    let f1 = f.eval(&shifted(p, axis, h))?;
    let f2 = f.eval(&shifted(p, axis, 2.0 * h))?;
    Ok(combine(&[(-3.0, &f0), (4.0, &f1), (-1.0, &f2)], 2.0 * h))
}

/// Partial derivative of `f` along `axis` at `p`.
///
/// Central difference when both `p ± h e_axis` are in the domain, otherwise
/// a second-order one-sided difference into the domain.
pub fn fd_partial(f: &SmoothMap, p: &[f64], axis: usize, h: f64) -> Result<Vec<f64>> {
    if !(h > 0.0) || !h.is_finite() {
        return Err(domain(format!("finite-difference step must be positive, got {h}")));
    }
    if axis >= f.in_dim() {
        return Err(domain(format!("axis {axis} out of range")));
    }
    let plus = f.eval(&shifted(p, axis, h));
    let minus = f.eval(&shifted(p, axis, -h));
    match (plus, minus) {
        (Ok(a), Ok(b)) => Ok(combine(&[(1.0, &a), (-1.0, &b)], 2.0 * h)),
        (Ok(_), Err(Error::Domain(_))) => one_sided(f, p, axis, h),
        (Err(Error::Domain(_)), Ok(_)) => one_sided(f, p, axis, -h),
        (Err(e), _) | (_, Err(e)) => Err(e),
    }
}

/// `(4 D(h/2) - D(h)) / 3`.
pub fn fd_partial_richardson(f: &SmoothMap, p: &[f64], axis: usize, h: f64) -> Result<Vec<f64>> {
    let coarse = fd_partial(f, p, axis, h)?;
    let fine = fd_partial(f, p, axis, h / 2.0)?;
    Ok(combine(&[(4.0, &fine), (-1.0, &coarse)], 3.0))
}

/// Worst disagreement of adjacent pieces across the breakpoints of a
/// piecewise map.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SeamReport {
    pub value_gap: f64,
    pub slope_gap: f64,
    pub worst_point: Option<Vec<f64>>,
    pub samples: usize,
}

impl SeamReport {
    pub fn passed(&self, eq_tol: f64, deriv_tol: f64) -> bool {
        self.value_gap <= eq_tol && self.slope_gap <= deriv_tol
    }
}

fn max_gap(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

/// For every breakpoint `b` and every base point (its split coordinate is
/// overwritten with `b`), compares the two adjacent pieces' values and their
/// one-sided slopes along the split axis: the left piece differenced
/// backwards, the right piece forwards.
pub fn seam_check(f: &SmoothMap, base_points: &[Vec<f64>], h: f64) -> Result<SeamReport> {
    let (axis, breaks, pieces) = f
        .as_piecewise()
        .ok_or_else(|| domain("seam check needs a piecewise map"))?;
    let mut report = SeamReport {
        value_gap: 0.0,
        slope_gap: 0.0,
        worst_point: None,
        samples: 0,
    };
    let mut worst = -1.0;
    for (i, &b) in breaks.iter().enumerate() {
        let (left, right) = (&pieces[i], &pieces[i + 1]);
        for base in base_points {
            let mut p = base.clone();
            p[axis] = b;
            let value_gap = max_gap(&left.eval(&p)?, &right.eval(&p)?);
            let slope_gap = max_gap(
                &one_sided(left, &p, axis, -h)?,
                &one_sided(right, &p, axis, h)?,
            );
            report.value_gap = report.value_gap.max(value_gap);
            report.slope_gap = report.slope_gap.max(slope_gap);
            report.samples += 1;
            let score = value_gap.max(slope_gap);
            if score > worst {
                worst = score;
                report.worst_point = Some(p);
            }
        }
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernels::SmashParams;

    #[test]
    fn constants_and_lines() {
        let c = SmoothMap::constant(2, vec![4.2]).unwrap();
        assert_eq!(fd_partial(&c, &[0.3, 0.4], 1, 1e-4).unwrap(), vec![0.0]);
        let x = SmoothMap::coord(2, 0).unwrap();
        let d = fd_partial(&x, &[0.3, 0.4], 0, 1e-4).unwrap()[0];
        assert!((d - 1.0).abs() < 1e-8);
        assert!(fd_partial(&x, &[0.3, 0.4], 0, 0.0).is_err());
        assert!(fd_partial(&x, &[0.3, 0.4], 0, -1.0).is_err());
    }

    #[test]
    fn lambda_is_flat_at_zero() {
        let f = SmoothMap::coord(1, 0).unwrap().then(SmoothMap::lambda(1)).unwrap();
        let d = fd_partial(&f, &[0.0], 0, 1e-3).unwrap()[0];
        assert!(d.abs() <= 1e-6);
    }

    #[test]
    fn falls_back_to_one_sided_at_cube_boundary() {
        let sq = SmoothMap::product(vec![
            SmoothMap::coord(1, 0).unwrap(),
            SmoothMap::coord(1, 0).unwrap(),
        ])
        .unwrap()
        .on_cube();
        let d0 = fd_partial(&sq, &[0.0], 0, 1e-3).unwrap()[0];
        let d1 = fd_partial(&sq, &[1.0], 0, 1e-3).unwrap()[0];
        assert!(d0.abs() < 1e-12);
        assert!((d1 - 2.0).abs() < 1e-9);
    }

    #[test]
    fn richardson_on_smash_is_second_order() {
        // the Richardson combination must improve on the plain central difference
        let p = SmashParams::new(0.1, 0.3).unwrap();
        let f = SmoothMap::smash(p, 1);
        for &t in &[0.15, 0.2, 0.25] {
            let h = 1e-2;
            let d1 = fd_partial(&f, &[t], 0, h).unwrap()[0];
            let d2 = fd_partial(&f, &[t], 0, h / 2.0).unwrap()[0];
            let r = fd_partial_richardson(&f, &[t], 0, h).unwrap()[0];
            let reference = fd_partial_richardson(&f, &[t], 0, 1e-4).unwrap()[0];
            let err_central = (d2 - reference).abs();
            let err_rich = (r - reference).abs();
            assert!(err_rich <= err_central, "t={t}: {err_rich} vs {err_central}");
            // D(h) - D(h/2) shrinks by ~4 when h halves
            let d3 = fd_partial(&f, &[t], 0, h / 4.0).unwrap()[0];
            let ratio = (d1 - d2).abs() / (d2 - d3).abs();
            assert!((3.0..5.0).contains(&ratio), "t={t}: ratio {ratio}");
        }
    }

    #[test]
    fn seam_check_detects_kinks() {
        let x = SmoothMap::coord(1, 0).unwrap();
        let half = SmoothMap::constant(1, vec![0.5]).unwrap();
        let kink = SmoothMap::piecewise(0, vec![0.5], vec![x.clone(), half]).unwrap();
        let r = seam_check(&kink, &[vec![0.0]], 1e-4).unwrap();
        assert!(r.value_gap < 1e-15);
        assert!((r.slope_gap - 1.0).abs() < 1e-6);
        let smooth = SmoothMap::piecewise(0, vec![0.5], vec![x.clone(), x]).unwrap();
        assert!(seam_check(&smooth, &[vec![0.0]], 1e-4).unwrap().passed(1e-9, 1e-6));
        assert!(seam_check(&SmoothMap::lambda(1), &[vec![0.0]], 1e-4).is_err());
    }
}
