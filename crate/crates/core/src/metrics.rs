//! Exact (non-smoothed) wirelength evaluation.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::model::{pin_position, Net, Netlist, Placement};

/// Neumaier compensated sum, accumulated in iteration order.
pub fn compensated_sum<I: IntoIterator<Item = f64>>(values: I) -> f64 {
    let mut sum = 0.0f64;
    let mut comp = 0.0f64;
    for v in values {
        let t = sum + v;
        if sum.abs() >= v.abs() {
            comp += (sum - t) + v;
        } else {
            comp += (v - t) + sum;
        }
        sum = t;
    }
    sum + comp
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HpwlReport {
    pub total: f64,
    pub per_net: Vec<f64>,
    pub macro_total: f64,
}

/// Which pins count towards the macro HPWL.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum MacroHpwlMode {
    /// Each net restricted to its pins on macros and fixed cells.
    #[default]
    InducedSubnet,
    /// Full HPWL of every net that touches a macro.
    FullNets,
}

/// Half-perimeter of the bounding box of the net's pins.
pub fn hpwl_net(placement: &Placement, net: &Net) -> f64 {
    let mut it = net.pins.iter().map(|p| pin_position(placement, p));
    let Some(first) = it.next() else { return 0.0 };
    let (mut x0, mut x1, mut y0, mut y1) = (first.x, first.x, first.y, first.y);
    for p in it {
        x0 = x0.min(p.x);
        x1 = x1.max(p.x);
        y0 = y0.min(p.y);
        y1 = y1.max(p.y);
    }
    (x1 - x0) + (y1 - y0)
}

/// Per-net HPWL for every net; `total` is the compensated sum in net order.
pub fn hpwl_total(netlist: &Netlist, placement: &Placement) -> HpwlReport {
    let per_net: Vec<f64> = netlist
        .nets()
        .par_iter()
        .map(|net| hpwl_net(placement, net))
        .collect();
    HpwlReport {
        total: compensated_sum(per_net.iter().copied()),
        per_net,
        macro_total: macro_hpwl(netlist, placement, MacroHpwlMode::default()),
    }
}

/// Total HPWL only.
pub fn hpwl(netlist: &Netlist, placement: &Placement) -> f64 {
    let per_net: Vec<f64> = netlist
        .nets()
        .par_iter()
        .map(|net| hpwl_net(placement, net))
        .collect();
    compensated_sum(per_net)
}

/// HPWL attributed to macros; zero when the design has no macros.
pub fn macro_hpwl(netlist: &Netlist, placement: &Placement, mode: MacroHpwlMode) -> f64 {
    if netlist.num_macros() == 0 {
        return 0.0;
    }
    let cells = netlist.cells();
    let per_net = netlist.nets().iter().map(|net| match mode {
        MacroHpwlMode::InducedSubnet => {
            let kept: Vec<_> = net
                .pins
                .iter()
                .filter(|p| {
                    let c = &cells[p.cell];
                    c.is_macro || c.is_fixed()
                })
                .copied()
                .collect();
            if kept.len() < 2 {
                0.0
            } else {
                hpwl_net(
                    placement,
                    &Net {
                        id: net.id,
                        name: String::new(),
                        pins: kept,
                    },
                )
            }
        }
        MacroHpwlMode::FullNets => {
            if net.pins.iter().any(|p| cells[p.cell].is_macro) {
                hpwl_net(placement, net)
            } else {
                0.0
            }
        }
    });
    compensated_sum(per_net)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{Cell, CellKind, Pin, Point};

    fn cells(n: usize) -> Vec<Cell> {
        (0..n)
            .map(|id| Cell {
                id,
                name: format!("c{id}"),
                width: 1.0,
                height: 1.0,
                kind: CellKind::Movable,
                is_macro: false,
            })
            .collect()
    }

    fn net(id: usize, cells: &[usize]) -> Net {
        Net {
            id,
            name: format!("n{id}"),
            pins: cells.iter().map(|&cell| Pin { cell, dx: 0.0, dy: 0.0 }).collect(),
        }
    }

    fn placement(points: &[(f64, f64)]) -> Placement {
        Placement::new(points.iter().map(|&(x, y)| Point::new(x, y)).collect())
    }

    #[test]
    fn net_examples() {
        let pl = placement(&[(0.0, 0.0), (3.0, 4.0), (5.0, 1.0), (2.0, 9.0)]);
        assert_eq!(hpwl_net(&pl, &net(0, &[0])), 0.0);
        assert_eq!(hpwl_net(&pl, &net(0, &[0, 1])), 7.0);
        assert_eq!(hpwl_net(&pl, &net(0, &[0, 2, 3])), 14.0);
    }

    #[test]
    fn total_is_additive() {
        let pl = placement(&[(0.0, 0.0), (3.0, 4.0), (10.0, 10.0), (12.0, 11.0)]);
        let nl = Netlist::new(cells(4), vec![net(0, &[0, 1]), net(1, &[2, 3])]).unwrap();
        let r = hpwl_total(&nl, &pl);
        assert_eq!(r.per_net, vec![7.0, 3.0]);
        assert_eq!(r.total, 10.0);
        let empty = Netlist::new(cells(4), vec![]).unwrap();
        assert_eq!(hpwl_total(&empty, &pl).total, 0.0);
    }

    #[test]
    fn macro_hpwl_examples() {
        let pl = placement(&[(0.0, 0.0), (10.0, 10.0), (3.0, 3.0), (4.0, 4.0)]);
        let nl = Netlist::new(cells(4), vec![net(0, &[0, 1])]).unwrap();
        assert_eq!(macro_hpwl(&nl, &pl, MacroHpwlMode::InducedSubnet), 0.0);

        let nl = nl.with_macros(&[0, 1]);
        assert_eq!(macro_hpwl(&nl, &pl, MacroHpwlMode::InducedSubnet), 20.0);

        let nl = Netlist::new(cells(4), vec![net(0, &[0, 2, 3])]).unwrap().with_macros(&[0]);
        assert_eq!(macro_hpwl(&nl, &pl, MacroHpwlMode::InducedSubnet), 0.0);
        assert_eq!(macro_hpwl(&nl, &pl, MacroHpwlMode::FullNets), 8.0);
    }

    #[test]
    fn compensated_sum_recovers_small_terms() {
        let values = [1e16, 1.0, -1e16, 1.0];
        assert_eq!(compensated_sum(values), 2.0);
        assert_eq!(values.iter().sum::<f64>(), 1.0);
    }
}
