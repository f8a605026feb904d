use serde::{Deserialize, Serialize};

use super::Certificate;
use crate::error::{Error, Result};
use crate::signal::{wrap_distance, Frequency2D};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ValidationOptions {
    /// Uniform grid resolution per axis for the far-region test.
    pub grid_points: usize,
    /// Radius of the near region around each atom; `None` means `0.09 / m`.
    pub near_radius: Option<f64>,
    /// Tolerance on `|Q(f_i) - h_i|` and on the spike coefficients.
    pub tol_interp: f64,
    /// Required margin below 1 for the far-region and off-support tests.
    pub tol_strict: f64,
    /// Far-region grid maxima refined by Newton ascent.
    pub refine_peaks: usize,
    /// Samples per axis of the local grid covering each near region.
    pub near_samples: usize,
}

impl Default for ValidationOptions {
    fn default() -> Self {
        ValidationOptions {
            grid_points: 1024,
            near_radius: None,
            tol_interp: 1e-8,
            tol_strict: 0.0,
            refine_peaks: 32,
            near_samples: 17,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ValidationReport {
    pub grid_points: usize,
    pub near_radius: f64,
    /// max_i |Q(f_i) - h_i|
    pub interp_error: f64,
    pub interp_pass: bool,
    /// max |Q| over grid nodes outside the near regions.
    pub far_max_grid: f64,
    /// The same after refining the largest far-region maxima and sampling
    /// the near-region boundaries at a quarter of the grid spacing.
    pub far_max: f64,
    pub far_argmax: Option<Frequency2D>,
    pub far_pass: bool,
    /// Largest eigenvalue of the Hessian of |Q|^2 over the near samples.
    pub near_hessian_max_eig: f64,
    /// max over near samples of Re(conj(h_i) Q^{20}) / m^2 and of the 02 analogue.
    pub near_curvature: f64,
    /// max over near samples of |Q^{11}| / m^2.
    pub near_cross: f64,
    pub near_pass: bool,
    /// max_l |C_{k_l} / lambda - r_l|
    pub spike_error: f64,
    pub spike_pass: bool,
    /// max over k outside the spike support of |C_k|.
    pub off_support_max: f64,
    pub lambda: f64,
    pub off_support_pass: bool,
    pub pass: bool,
}

fn max_eig_sym(h: [[f64; 2]; 2]) -> f64 {
    let mean = 0.5 * (h[0][0] + h[1][1]);
    let half = 0.5 * (h[0][0] - h[1][1]);
    mean + (half * half + h[0][1] * h[0][1]).sqrt()
}

/// Numerically checks the four certificate conditions: interpolation of the
/// signs, `|Q| < 1` away from the atoms, spike saturation and strict
/// off-support bound.
pub fn validate_certificate(cert: &Certificate, opts: &ValidationOptions) -> Result<ValidationReport> {
    if opts.grid_points < 64 {
        return Err(Error::InvalidInput(format!(
            "validation grid needs at least 64 points per axis, got {}",
            opts.grid_points
        )));
    }
    let q = cert.poly();
    let m = cert.m() as f64;
    let radius = opts.near_radius.unwrap_or(0.09 / m);
    let bound = 1.0 - opts.tol_strict;

    let interp_error = cert
        .freqs
        .iter()
        .zip(&cert.signs.h)
        .map(|(f, h)| (q.eval(*f, 0, 0) - h).norm())
        .fold(0.0, f64::max);

    let p = opts.grid_points;
    let grid = q.abs_grid(p);
    let node = |a: usize, b: usize| Frequency2D::new(a as f64 / p as f64, b as f64 / p as f64);
    let is_near = |f: Frequency2D| cert.freqs.iter().any(|g| wrap_distance(f, *g) <= radius);
    let mut far_max_grid = 0.0f64;
    let mut far_argmax = None;
    let mut peaks = Vec::new();
    for b in 0..p {
        for a in 0..p {
            let v = grid[b * p + a];
            let f = node(a, b);
            if is_near(f) {
                continue;
            }
            if v > far_max_grid {
                far_max_grid = v;
                far_argmax = Some(f);
            }
            let mut top = true;
            'nb: for db in [p - 1, 0, 1] {
                for da in [p - 1, 0, 1] {
                    if (da, db) != (0, 0) && grid[((b + db) % p) * p + (a + da) % p] > v {
                        top = false;
                        break 'nb;
                    }
                }
            }
            if top {
                peaks.push((v, f));
            }
        }
    }
    peaks.sort_by(|x, y| y.0.total_cmp(&x.0));
    let mut far_max = far_max_grid;
    for &(_, f) in peaks.iter().take(opts.refine_peaks) {
        let (g, v) = q.refine_peak(f, 1.0 / p as f64, 30);
        if !is_near(g) && v > far_max {
            far_max = v;
            far_argmax = Some(g);
        }
    }

    // |Q| rises towards each atom, so the far-region supremum can sit on the
    // boundary of a near region where no grid maximum lives
    let per_side = ((2.0 * radius * 4.0 * p as f64).ceil() as usize).max(opts.near_samples).max(2);
    for f in &cert.freqs {
        for t in 0..per_side {
            let u = -radius + 2.0 * radius * t as f64 / per_side as f64;
            for (d1, d2) in [(u, -radius), (radius, u), (-u, radius), (-radius, -u)] {
                let g = f.offset(d1, d2);
                if cert.freqs.iter().any(|h| wrap_distance(g, *h) < radius) {
                    continue;
                }
                let v = q.eval(g, 0, 0).norm();
                if v > far_max {
                    far_max = v;
                    far_argmax = Some(g);
                }
            }
        }
    }

    let mut near_hessian_max_eig = f64::NEG_INFINITY;
    let mut near_curvature = f64::NEG_INFINITY;
    let mut near_cross = 0.0f64;
    let ns = opts.near_samples.max(2);
    for (f, h) in cert.freqs.iter().zip(&cert.signs.h) {
        for b in 0..ns {
            for a in 0..ns {
                let d1 = -radius + 2.0 * radius * a as f64 / (ns - 1) as f64;
                let d2 = -radius + 2.0 * radius * b as f64 / (ns - 1) as f64;
                let d = q.derivatives(f.offset(d1, d2));
                let (_, hess) = d.modulus_sq_grad_hess();
                near_hessian_max_eig = near_hessian_max_eig.max(max_eig_sym(hess));
                let rot = h.conj();
                near_curvature = near_curvature.max((rot * d.d20).re / (m * m)).max((rot * d.d02).re / (m * m));
                near_cross = near_cross.max(d.d11.norm() / (m * m));
            }
        }
    }

    let mut spike_error = 0.0f64;
    for (k, r) in cert.omega.iter().zip(&cert.signs.rsign) {
        spike_error = spike_error.max((q.coeff(*k) / cert.lambda - r).norm());
    }
    let on_omega: std::collections::HashSet<_> = cert.omega.iter().copied().collect();
    let n = q.n();
    let off_support_max = (0..n * n)
        .filter(|&i| !on_omega.contains(&crate::signal::grid_index(n, i)))
        .map(|i| q.coeffs()[i].norm())
        .fold(0.0, f64::max);

    let interp_pass = interp_error <= opts.tol_interp;
    let far_pass = far_max < bound;
    let near_pass = near_hessian_max_eig < 0.0;
    let spike_pass = spike_error <= opts.tol_interp;
    let off_support_pass = off_support_max < cert.lambda * bound;
    Ok(ValidationReport {
        grid_points: p,
        near_radius: radius,
        interp_error,
        interp_pass,
        far_max_grid,
        far_max,
        far_argmax,
        far_pass,
        near_hessian_max_eig,
        near_curvature,
        near_cross,
        near_pass,
        spike_error,
        spike_pass,
        off_support_max,
        lambda: cert.lambda,
        off_support_pass,
        pass: interp_pass && far_pass && near_pass && spike_pass && off_support_pass,
    })
}
