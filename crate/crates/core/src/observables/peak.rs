use crate::error::SimError;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Peak {
    pub r_star: f64,
    pub t_star: f64,
    pub index: usize,
    /// Maximum sits on the first or last grid point.
    pub at_boundary: bool,
}

/// Discrete argmax refined by a parabola through the bracketing points.
pub fn find_peak(r: &[f64], grid: &[f64]) -> Result<Peak, SimError> {
    if r.len() != grid.len() {
        return Err(SimError::Grid("series and grid lengths differ".into()));
    }
    if r.len() < 3 {
        return Err(SimError::Grid("need at least 3 points".into()));
    }
    let mut k = 0;
    for (i, &v) in r.iter().enumerate() {
        if v > r[k] || r[k].is_nan() {
            k = i;
        }
    }
    if k == 0 || k + 1 == r.len() {
        return Ok(Peak { r_star: r[k], t_star: grid[k], index: k, at_boundary: true });
    }
    let (t0, t1, t2) = (grid[k - 1], grid[k], grid[k + 1]);
    let (y0, y1, y2) = (r[k - 1], r[k], r[k + 1]);
    let d01 = (y1 - y0) / (t1 - t0);
    let d12 = (y2 - y1) / (t2 - t1);
    let a = (d12 - d01) / (t2 - t0);
    if !(a < 0.0) {
        return Ok(Peak { r_star: y1, t_star: t1, index: k, at_boundary: false });
    }
    // y = y1 + b (t − t1) + a (t − t1)^2 with b fixed by the outer points
    let b = d01 + a * (t1 - t0);
    let ts = (t1 - b / (2.0 * a)).clamp(t0, t2);
    let ys = y1 + b * (ts - t1) + a * (ts - t1).powi(2);
    Ok(Peak { r_star: ys.max(y1), t_star: ts, index: k, at_boundary: false })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::uniform_grid;
    use proptest::prelude::*;

    #[test]
    fn exact_parabola() {
        let g = uniform_grid(1.0, 101);
        let r: Vec<f64> = g.iter().map(|t| 1.0 - (t - 0.3f64).powi(2)).collect();
        let p = find_peak(&r, &g).unwrap();
        assert!((p.t_star - 0.3).abs() < 1e-12);
        assert!((p.r_star - 1.0).abs() < 1e-12);
        assert!(!p.at_boundary);
    }

    #[test]
    fn off_grid_parabola() {
        let g = uniform_grid(1.0, 11);
        let r: Vec<f64> = g.iter().map(|t| 2.0 - 3.0 * (t - 0.437f64).powi(2)).collect();
        let p = find_peak(&r, &g).unwrap();
        assert!((p.t_star - 0.437).abs() < 1e-12);
    }

    #[test]
    fn monotone_decay_flags_boundary() {
        let g = uniform_grid(3.0, 50);
        let r: Vec<f64> = g.iter().map(|t| (-t).exp()).collect();
        let p = find_peak(&r, &g).unwrap();
        assert!(p.at_boundary);
        assert_eq!(p.t_star, 0.0);
        assert_eq!(p.r_star, 1.0);
    }

    #[test]
    fn ties_go_to_earliest() {
        let g = uniform_grid(4.0, 5);
        let p = find_peak(&[0.0, 1.0, 0.0, 1.0, 0.0], &g).unwrap();
        assert_eq!(p.index, 1);
    }

    #[test]
    fn too_short() {
        assert!(find_peak(&[1.0, 2.0], &[0.0, 1.0]).is_err());
    }

    proptest! {
        #[test]
        fn argmax_invariant_under_rescaling(scale in 0.01f64..100.0, c in 0.1f64..0.9, w in 0.5f64..20.0) {
            let g = uniform_grid(1.0, 201);
            let r: Vec<f64> = g.iter().map(|t| (-w * (t - c).powi(2)).exp()).collect();
            let rs: Vec<f64> = r.iter().map(|v| v * scale).collect();
            let a = find_peak(&r, &g).unwrap();
            let b = find_peak(&rs, &g).unwrap();
            prop_assert!((a.t_star - b.t_star).abs() < 1e-12);
            prop_assert!((a.r_star * scale - b.r_star).abs() < 1e-9 * b.r_star);
        }
    }
}
