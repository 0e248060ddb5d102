use num_complex::Complex64;

use super::spectral::Sector;
use crate::error::{invalid, Result};
use crate::net::{CouplingGraph, SiteId};

pub const DEFAULT_GRID: usize = 4096;
pub const DEFAULT_T_MAX: f64 = 8.0 * std::f64::consts::PI;
const ACCEPT: f64 = 1e-6;

/// Transition amplitude `⟨dst|e^{−iHt}|src⟩ = Σ_k c_k e^{−iλ_k t}`.
struct Amplitude {
    c: Vec<Complex64>,
    lambda: Vec<f64>,
}

impl Amplitude {
    fn derivs(&self, t: f64) -> [Complex64; 3] {
        let mut a = [Complex64::new(0.0, 0.0); 3];
        for (&c, &l) in self.c.iter().zip(&self.lambda) {
            let e = c * Complex64::from_polar(1.0, -l * t);
            a[0] += e;
            a[1] += e * Complex64::new(0.0, -l);
            a[2] += e * (-l * l);
        }
        a
    }

    fn fidelity(&self, t: f64) -> f64 {
        self.derivs(t)[0].norm()
    }

    /// First and second derivative of `|a(t)|²`.
    fn slope(&self, t: f64) -> (f64, f64) {
        let [a, da, dda] = self.derivs(t);
        let f1 = 2.0 * (a.conj() * da).re;
        let f2 = 2.0 * (da.norm_sqr() + (a.conj() * dda).re);
        (f1, f2)
    }
}

/// Earliest time in `(0, t_max]` at which `src` transfers to `dst` with
/// fidelity above `1 − 1e−6`. The grid maximum is refined by golden-section
/// search and polished with Newton steps on `d|a|²/dt`.
pub fn transfer_time(
    graph: &CouplingGraph,
    src: &SiteId,
    dst: &SiteId,
    t_max: f64,
    grid: usize,
) -> Result<Option<(f64, f64)>> {
    if !(t_max > 0.0 && t_max.is_finite()) {
        return Err(invalid(format!("t_max = {t_max}")));
    }
    if grid < 3 {
        return Err(invalid("grid needs at least 3 points"));
    }
    let sector = Sector::single(graph)?;
    let b = sector.basis();
    let (i, j) = (b.site_index(src)?, b.site_index(dst)?);
    let v = sector.cache().eigenvectors();
    let amp = Amplitude {
        c: (0..sector.dim()).map(|k| v[(j, k)] * v[(i, k)].conj()).collect(),
        lambda: sector.cache().eigenvalues().iter().copied().collect(),
    };

    let h = t_max / (grid - 1) as f64;
    let vals: Vec<f64> = (0..grid).map(|g| amp.fidelity(g as f64 * h)).collect();
    let best = vals.iter().copied().fold(0.0, f64::max);
    for g in 1..grid {
        let v = vals[g];
        let left = vals[g - 1];
        let right = vals.get(g + 1).copied().unwrap_or(0.0);
        if v < left || v < right || v < best - 0.05 {
            continue;
        }
        let t = refine(&amp, ((g - 1) as f64 * h).max(0.0), ((g + 1) as f64 * h).min(t_max));
        let f = amp.fidelity(t);
        if f >= 1.0 - ACCEPT {
            return Ok(Some((t, f.min(1.0))));
        }
    }
    Ok(None)
}

fn refine(amp: &Amplitude, mut a: f64, mut b: f64) -> f64 {
    let r = (5f64.sqrt() - 1.0) / 2.0;
    let mut x1 = b - r * (b - a);
    let mut x2 = a + r * (b - a);
    let (mut f1, mut f2) = (amp.fidelity(x1), amp.fidelity(x2));
    while b - a > 1e-12 {
        if f1 < f2 {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + r * (b - a);
            f2 = amp.fidelity(x2);
        } else {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - r * (b - a);
            f1 = amp.fidelity(x1);
        }
    }
    let mut t = 0.5 * (a + b);
    for _ in 0..4 {
        let (d1, d2) = amp.slope(t);
        if d2 >= 0.0 {
            break;
        }
        let next = t - d1 / d2;
        if (next - t).abs() > 1e-6 || amp.fidelity(next) < amp.fidelity(t) {
            break;
        }
        t = next;
    }
    t
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::net::{chain_graph, pst_chain};
    use std::f64::consts::{FRAC_PI_2, PI};

    #[test]
    fn two_site() {
        let g = chain_graph(&[2f64.sqrt()]).unwrap();
        let (t, f) = transfer_time(&g, &SiteId::Index(1), &SiteId::Index(2), DEFAULT_T_MAX, DEFAULT_GRID)
            .unwrap()
            .unwrap();
        assert!((t - PI / (2.0 * 2f64.sqrt())).abs() < 1e-12, "{t}");
        assert!(1.0 - f < 1e-15);
    }

    #[test]
    fn pst_chain_five() {
        let g = pst_chain(5).unwrap();
        let (t, _) = transfer_time(&g, &SiteId::Index(1), &SiteId::Index(5), DEFAULT_T_MAX, DEFAULT_GRID)
            .unwrap()
            .unwrap();
        assert!((t - PI / 2f64.sqrt()).abs() < 1e-12, "{t}");
    }

    #[test]
    fn uniform_three_chain() {
        let r = 2f64.sqrt();
        let g = chain_graph(&[r, r]).unwrap();
        let (t, _) = transfer_time(&g, &SiteId::Index(1), &SiteId::Index(3), DEFAULT_T_MAX, DEFAULT_GRID)
            .unwrap()
            .unwrap();
        assert!((t - FRAC_PI_2).abs() < 1e-12, "{t}");
    }

    #[test]
    fn uniform_four_chain_has_no_transfer() {
        let g = chain_graph(&[1.0, 1.0, 1.0]).unwrap();
        let r = transfer_time(&g, &SiteId::Index(1), &SiteId::Index(4), DEFAULT_T_MAX, DEFAULT_GRID).unwrap();
        assert!(r.is_none());
        assert!(transfer_time(&g, &SiteId::Index(1), &SiteId::Index(4), -1.0, 10).is_err());
    }
}
