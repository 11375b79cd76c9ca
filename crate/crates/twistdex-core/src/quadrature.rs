//! Composite Simpson quadrature on a closed interval.

use alloc::vec::Vec;

use crate::linalg::C64;

/// Nodes and weights of composite Simpson with `panels` panels; `2·panels + 1` nodes.
pub fn simpson_nodes(a: f64, b: f64, panels: usize) -> Vec<(f64, f64)> {
    let panels = panels.max(1);
    let h = (b - a) / panels as f64;
    let mut out = Vec::with_capacity(2 * panels + 1);
    for i in 0..=2 * panels {
        let t = a + h * i as f64 / 2.0;
        let w = if i == 0 || i == 2 * panels {
            h / 6.0
        } else if i % 2 == 1 {
            4.0 * h / 6.0
        } else {
            2.0 * h / 6.0
        };
        out.push((t, w));
    }
    out
}

pub fn simpson<F: FnMut(f64) -> C64>(mut f: F, a: f64, b: f64, panels: usize) -> C64 {
    simpson_nodes(a, b, panels).into_iter().map(|(t, w)| f(t) * w).sum()
}

/// Richardson error estimate for a fourth-order rule from two resolutions.
pub fn richardson_estimate(coarse: C64, fine: C64) -> f64 {
    (fine - coarse).norm() / 15.0
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_for_cubics() {
        let v = simpson(|t| C64::new(t * t * t - 2.0 * t, 0.0), 0.0, 1.0, 1);
        assert!((v.re - (0.25 - 1.0)).abs() < 1e-15);
    }

    #[test]
    fn weights_sum_to_length() {
        let s: f64 = simpson_nodes(0.0, 2.0, 7).iter().map(|p| p.1).sum();
        assert!((s - 2.0).abs() < 1e-14);
        assert_eq!(simpson_nodes(0.0, 1.0, 4).len(), 9);
    }

    #[test]
    fn fourth_order_decay() {
        let f = |t: f64| C64::new(libm::exp(t), 0.0);
        let exact = core::f64::consts::E - 1.0;
        let e1 = (simpson(f, 0.0, 1.0, 4).re - exact).abs();
        let e2 = (simpson(f, 0.0, 1.0, 8).re - exact).abs();
        assert!(e1 / e2 > 14.0);
    }
}
