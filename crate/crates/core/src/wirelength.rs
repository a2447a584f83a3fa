//! Weighted-average (WA) smooth wirelength and its analytic gradient.
//!
//! Per net and axis the model is the difference between an
//! `exp(x/γ)`-weighted mean (a smooth max) and an `exp(-x/γ)`-weighted mean
//! (a smooth min). Both means are evaluated relative to the per-net extreme
//! so the exponentials never exceed one.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::metrics::compensated_sum;
use crate::model::{pin_position, Netlist, Placement};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WaParams {
    gamma: f64,
}

impl WaParams {
    pub fn new(gamma: f64) -> Result<Self> {
        if gamma > 0.0 && gamma.is_finite() {
            Ok(WaParams { gamma })
        } else {
            Err(Error::NonPositiveGamma(gamma))
        }
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }
}

/// Per-cell partial derivatives. Fixed cells hold zeros.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Gradient {
    pub d_x: Vec<f64>,
    pub d_y: Vec<f64>,
}

impl Gradient {
    pub fn zeros(n: usize) -> Self {
        Gradient {
            d_x: vec![0.0; n],
            d_y: vec![0.0; n],
        }
    }

    pub fn l1_norm(&self) -> f64 {
        compensated_sum(self.d_x.iter().chain(&self.d_y).map(|v| v.abs()))
    }

    pub fn max_abs(&self) -> f64 {
        self.d_x
            .iter()
            .chain(&self.d_y)
            .fold(0.0f64, |m, v| m.max(v.abs()))
    }
}

/// WA wirelength of one axis, optionally writing `d WL / d coord[i]`.
fn wa_axis(coords: &[f64], gamma: f64, grad: Option<&mut [f64]>) -> f64 {
    let (lo, hi) = coords
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &x| (lo.min(x), hi.max(x)));
    if coords.len() < 2 || hi == lo {
        if let Some(g) = grad {
            g.fill(0.0);
        }
        return 0.0;
    }
    let inv = 1.0 / gamma;
    let (mut s_hi, mut t_hi, mut s_lo, mut t_lo) = (0.0, 0.0, 0.0, 0.0);
    for &x in coords {
        let a = ((x - hi) * inv).exp();
        let b = ((lo - x) * inv).exp();
        s_hi += a;
        t_hi += (x - hi) * a;
        s_lo += b;
        t_lo += (x - lo) * b;
    }
    // shifted means: below_hi <= 0, above_lo >= 0
    let below_hi = t_hi / s_hi;
    let above_lo = t_lo / s_lo;
    if let Some(g) = grad {
        for (gi, &x) in g.iter_mut().zip(coords) {
            let a = ((x - hi) * inv).exp();
            let b = ((lo - x) * inv).exp();
            let d_hi = a / s_hi * (1.0 + ((x - hi) - below_hi) * inv);
            let d_lo = b / s_lo * (1.0 - ((x - lo) - above_lo) * inv);
            *gi = d_hi - d_lo;
        }
    }
    ((hi - lo) + below_hi) - above_lo
}

/// WA wirelength of one axis of a net given its pin coordinates.
pub fn wa_net(coords: &[f64], params: &WaParams) -> f64 {
    wa_axis(coords, params.gamma, None)
}

/// Derivative of [`wa_net`] with respect to each coordinate.
pub fn wa_net_gradient(coords: &[f64], params: &WaParams) -> Vec<f64> {
    let mut g = vec![0.0; coords.len()];
    wa_axis(coords, params.gamma, Some(&mut g));
    g
}

fn net_value(netlist: &Netlist, placement: &Placement, net: usize, gamma: f64, buf: &mut (Vec<f64>, Vec<f64>)) -> f64 {
    let (xs, ys) = buf;
    xs.clear();
    ys.clear();
    for pin in &netlist.nets()[net].pins {
        let p = pin_position(placement, pin);
        xs.push(p.x);
        ys.push(p.y);
    }
    wa_axis(xs, gamma, None) + wa_axis(ys, gamma, None)
}

/// Sum of WA wirelength over both axes of every net, reduced in net order.
pub fn wa_total(netlist: &Netlist, placement: &Placement, params: &WaParams) -> f64 {
    let per_net: Vec<f64> = (0..netlist.num_nets())
        .into_par_iter()
        .map_init(
            || (Vec::new(), Vec::new()),
            |buf, n| net_value(netlist, placement, n, params.gamma, buf),
        )
        .collect();
    compensated_sum(per_net)
}

/// Splits a flat per-pin buffer into one mutable slice per net.
fn split_by_net<'a>(netlist: &Netlist, mut flat: &'a mut [f64]) -> Vec<&'a mut [f64]> {
    let mut out = Vec::with_capacity(netlist.num_nets());
    for net in netlist.nets() {
        let (head, tail) = flat.split_at_mut(net.pins.len());
        out.push(head);
        flat = tail;
    }
    out
}

/// WA wirelength together with its gradient.
///
/// Per-pin derivatives are computed net by net, then each cell gathers the
/// derivatives of its own pins in ascending pin order, so the result does
/// not depend on the thread count.
pub fn wa_value_and_gradient(netlist: &Netlist, placement: &Placement, params: &WaParams) -> (f64, Gradient) {
    let num_pins = netlist.num_pins();
    let mut pin_gx = vec![0.0; num_pins];
    let mut pin_gy = vec![0.0; num_pins];
    let gamma = params.gamma;
    let per_net: Vec<f64> = netlist
        .nets()
        .par_iter()
        .zip(split_by_net(netlist, &mut pin_gx))
        .zip(split_by_net(netlist, &mut pin_gy))
        .map_init(
            || (Vec::new(), Vec::new()),
            |(xs, ys), ((net, gx), gy)| {
                xs.clear();
                ys.clear();
                for pin in &net.pins {
                    let p = pin_position(placement, pin);
                    xs.push(p.x);
                    ys.push(p.y);
                }
                wa_axis(xs, gamma, Some(gx)) + wa_axis(ys, gamma, Some(gy))
            },
        )
        .collect();
    let value = compensated_sum(per_net);

    let cells = netlist.cells();
    let (d_x, d_y): (Vec<f64>, Vec<f64>) = (0..netlist.num_cells())
        .into_par_iter()
        .map(|c| {
            if cells[c].is_fixed() {
                return (0.0, 0.0);
            }
            netlist
                .cell_pins(c)
                .iter()
                .fold((0.0, 0.0), |(sx, sy), &p| (sx + pin_gx[p], sy + pin_gy[p]))
        })
        .unzip();
    (value, Gradient { d_x, d_y })
}

pub fn wa_gradient(netlist: &Netlist, placement: &Placement, params: &WaParams) -> Gradient {
    wa_value_and_gradient(netlist, placement, params).1
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{Cell, CellKind, Net, Pin, Point};
    use approx::assert_relative_eq;

    fn p(g: f64) -> WaParams {
        WaParams::new(g).unwrap()
    }

    /// Eq.-level evaluation without shifting, for moderate inputs.
    fn naive(xs: &[f64], gamma: f64) -> f64 {
        let num_hi: f64 = xs.iter().map(|x| x * (x / gamma).exp()).sum();
        let den_hi: f64 = xs.iter().map(|x| (x / gamma).exp()).sum();
        let num_lo: f64 = xs.iter().map(|x| x * (-x / gamma).exp()).sum();
        let den_lo: f64 = xs.iter().map(|x| (-x / gamma).exp()).sum();
        num_hi / den_hi - num_lo / den_lo
    }

    #[test]
    fn rejects_non_positive_gamma() {
        assert!(matches!(WaParams::new(0.0), Err(Error::NonPositiveGamma(_))));
        assert!(matches!(WaParams::new(-1.0), Err(Error::NonPositiveGamma(_))));
        assert!(WaParams::new(f64::NAN).is_err());
    }

    #[test]
    fn coincident_pins_give_zero() {
        assert_eq!(wa_net(&[3.0, 3.0, 3.0], &p(1.0)), 0.0);
        assert_eq!(wa_net(&[7.5], &p(0.1)), 0.0);
    }

    #[test]
    fn two_pin_value() {
        // 10 e^10/(1+e^10) - 10/(1+e^10) = 10 tanh(5)
        let expected = 10.0 * 5.0f64.tanh();
        assert_relative_eq!(wa_net(&[0.0, 10.0], &p(1.0)), expected, max_relative = 1e-14);
        assert_relative_eq!(naive(&[0.0, 10.0], 1.0), expected, max_relative = 1e-12);
        assert!((wa_net(&[0.0, 10.0], &p(1.0)) - 9.99909).abs() < 1e-5);
    }

    #[test]
    fn matches_unshifted_formula() {
        let xs = [1.0, 4.0, 2.5, 7.0, 6.9];
        for g in [0.5, 1.0, 3.0] {
            assert_relative_eq!(wa_net(&xs, &p(g)), naive(&xs, g), max_relative = 1e-12);
        }
    }

    #[test]
    fn shrinking_gamma_approaches_span() {
        let mut prev = 0.0;
        let mut g = 1.0;
        for _ in 0..8 {
            let v = wa_net(&[0.0, 10.0], &p(g));
            assert!(v <= 10.0 && v >= prev);
            prev = v;
            g *= 0.5;
        }
    }

    #[test]
    fn large_coordinates_stay_finite() {
        let xs = [1e6, 1e6 + 3.0, 1e6 - 250.0];
        let v = wa_net(&xs, &p(10.0));
        assert!(v.is_finite() && v <= 253.0 && v > 200.0);
        assert!(wa_net_gradient(&xs, &p(10.0)).iter().all(|g| g.is_finite()));
    }

    #[test]
    fn two_pin_gradient_signs() {
        let g = wa_net_gradient(&[0.0, 10.0], &p(1.0));
        assert!((g[1] - 1.0).abs() < 1e-3);
        assert!((g[0] + 1.0).abs() < 1e-3);
    }

    #[test]
    fn gradient_accounts_for_repeated_pins_and_fixed_cells() {
        let cells = vec![
            Cell { id: 0, name: "a".into(), width: 2.0, height: 2.0, kind: CellKind::Movable, is_macro: false },
            Cell { id: 1, name: "b".into(), width: 1.0, height: 1.0, kind: CellKind::Fixed, is_macro: false },
        ];
        let nets = vec![Net {
            id: 0,
            name: "n".into(),
            pins: vec![
                Pin { cell: 0, dx: 0.0, dy: 0.0 },
                Pin { cell: 0, dx: 2.0, dy: 1.0 },
                Pin { cell: 1, dx: 0.5, dy: 0.5 },
            ],
        }];
        let nl = Netlist::new(cells, nets).unwrap();
        let pl = Placement::new(vec![Point::new(0.0, 0.0), Point::new(10.0, 4.0)]);
        let params = p(1.5);
        let grad = wa_gradient(&nl, &pl, &params);
        assert_eq!((grad.d_x[1], grad.d_y[1]), (0.0, 0.0));
        let h = 1e-5;
        let f = |dx: f64, dy: f64| {
            let mut q = pl.clone();
            q.set(0, Point::new(dx, dy));
            wa_total(&nl, &q, &params)
        };
        let fd_x = (f(h, 0.0) - f(-h, 0.0)) / (2.0 * h);
        let fd_y = (f(0.0, h) - f(0.0, -h)) / (2.0 * h);
        assert_relative_eq!(grad.d_x[0], fd_x, max_relative = 1e-7);
        assert_relative_eq!(grad.d_y[0], fd_y, max_relative = 1e-7);
    }
}
