//! Membership in the pyramids `S^u` of the p = 2 coupling space and their
//! union, where both Nishimori temperatures of the gauge axis `u` stay below
//! the triple-point inverse temperature `beta_t`.
//!
//! Membership depends on the six couplings only through the three ratios
//! `r_w = mu_2^w / Delta_2^w`, which are treated as the canonical coordinates.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::operators::{Axis, AxisTriple};

/// Upper bound on exported grid sizes.
pub const MAX_GRID_POINTS: usize = 10_000_000;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegionQuery {
    pub std: AxisTriple<f64>,
    pub mean: AxisTriple<f64>,
    pub beta_t: f64,
}

impl RegionQuery {
    pub fn new(std: AxisTriple<f64>, mean: AxisTriple<f64>, beta_t: f64) -> Result<Self> {
        let q = Self { std, mean, beta_t };
        q.validate()?;
        Ok(q)
    }

    pub fn validate(&self) -> Result<()> {
        check_beta_t(self.beta_t)?;
        for a in Axis::ALL {
            if !(self.std[a] > 0.0) || !self.std[a].is_finite() {
                return Err(Error::Domain(format!("Delta_2^{a} must be positive and finite")));
            }
            if !self.mean[a].is_finite() {
                return Err(Error::Domain(format!("mu_2^{a} must be finite")));
            }
        }
        Ok(())
    }

    pub fn ratios(&self) -> AxisTriple<f64> {
        AxisTriple::new(
            self.mean.x / self.std.x,
            self.mean.y / self.std.y,
            self.mean.z / self.std.z,
        )
    }

    pub fn beta2(&self, u: Axis) -> f64 {
        beta2_from_ratios(&self.ratios(), u)
    }

    pub fn in_subspace(&self, u: Axis) -> bool {
        in_subspace_ratios(&self.ratios(), self.beta_t, u)
    }

    pub fn membership(&self) -> Membership {
        Membership::from_ratios(&self.ratios(), self.beta_t)
    }
}

fn check_beta_t(beta_t: f64) -> Result<()> {
    if !(beta_t > 0.0) || !beta_t.is_finite() {
        return Err(Error::Domain(format!(
            "beta_t must be a positive finite number, got {beta_t}"
        )));
    }
    Ok(())
}

/// `beta_2^u = sqrt(r_v^2 + r_w^2)` over the axes other than `u`.
pub fn beta2_from_ratios(ratios: &AxisTriple<f64>, u: Axis) -> f64 {
    let [v, w] = u.others();
    ratios[v].hypot(ratios[w])
}

/// `S^u`: both `beta_2^v` and `beta_2^w` strictly below `beta_t`.
pub fn in_subspace_ratios(ratios: &AxisTriple<f64>, beta_t: f64, u: Axis) -> bool {
    u.others()
        .into_iter()
        .all(|a| beta2_from_ratios(ratios, a) < beta_t)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Membership {
    pub in_s: AxisTriple<bool>,
    /// Zero spontaneous magnetization on every axis is certified when set.
    pub in_union: bool,
}

impl Membership {
    pub fn from_ratios(ratios: &AxisTriple<f64>, beta_t: f64) -> Self {
        let in_s = AxisTriple::new(
            in_subspace_ratios(ratios, beta_t, Axis::X),
            in_subspace_ratios(ratios, beta_t, Axis::Y),
            in_subspace_ratios(ratios, beta_t, Axis::Z),
        );
        Self {
            in_s,
            in_union: in_s.x || in_s.y || in_s.z,
        }
    }
}

/// Evenly spaced values on `[min, max]`; `count = 1` gives `min`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AxisRange {
    pub min: f64,
    pub max: f64,
    pub count: usize,
}

impl AxisRange {
    pub fn values(&self) -> Vec<f64> {
        match self.count {
            0 => Vec::new(),
            1 => vec![self.min],
            n => (0..n)
                .map(|k| self.min + (self.max - self.min) * k as f64 / (n - 1) as f64)
                .collect(),
        }
    }
}

/// Grid over the three ratios `mu_2^w / Delta_2^w`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RatioGrid {
    pub x: AxisRange,
    pub y: AxisRange,
    pub z: AxisRange,
}

impl RatioGrid {
    pub fn origin() -> Self {
        let r = AxisRange {
            min: 0.0,
            max: 0.0,
            count: 1,
        };
        Self { x: r, y: r, z: r }
    }

    pub fn cube(min: f64, max: f64, count: usize) -> Self {
        let r = AxisRange { min, max, count };
        Self { x: r, y: r, z: r }
    }

    pub fn len(&self) -> usize {
        self.x.count.saturating_mul(self.y.count).saturating_mul(self.z.count)
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RegionRow {
    pub ratios: AxisTriple<f64>,
    pub membership: Membership,
}

/// Membership of every grid point; rows ordered x-major, then y, then z.
pub fn sample_region(grid: &RatioGrid, beta_t: f64) -> Result<Vec<RegionRow>> {
    check_beta_t(beta_t)?;
    let total = grid.len();
    if total > MAX_GRID_POINTS {
        return Err(Error::Capacity {
            what: "phase-region grid points",
            value: total,
            cap: MAX_GRID_POINTS,
        });
    }
    let (xs, ys, zs) = (grid.x.values(), grid.y.values(), grid.z.values());
    Ok(xs
        .par_iter()
        .flat_map_iter(|&x| {
            let zs = &zs;
            ys.iter().flat_map(move |&y| {
                zs.iter().map(move |&z| {
                    let ratios = AxisTriple::new(x, y, z);
                    RegionRow {
                        ratios,
                        membership: Membership::from_ratios(&ratios, beta_t),
                    }
                })
            })
        })
        .collect())
}

pub const CSV_HEADER: &str = "ratio_x,ratio_y,ratio_z,in_Sx,in_Sy,in_Sz,in_union";

pub fn write_region_csv<W: std::io::Write>(rows: &[RegionRow], mut out: W) -> std::io::Result<()> {
    writeln!(out, "{CSV_HEADER}")?;
    let flag = |b: bool| u8::from(b);
    for r in rows {
        let m = &r.membership;
        writeln!(
            out,
            "{},{},{},{},{},{},{}",
            r.ratios.x,
            r.ratios.y,
            r.ratios.z,
            flag(m.in_s.x),
            flag(m.in_s.y),
            flag(m.in_s.z),
            flag(m.in_union)
        )?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn query(mean: [f64; 3], std: [f64; 3], beta_t: f64) -> RegionQuery {
        RegionQuery::new(
            AxisTriple::new(std[0], std[1], std[2]),
            AxisTriple::new(mean[0], mean[1], mean[2]),
            beta_t,
        )
        .unwrap()
    }

    #[test]
    fn beta2_values() {
        let q = query([0.0; 3], [1.0; 3], 1.0);
        for u in Axis::ALL {
            assert_eq!(q.beta2(u), 0.0);
        }
        // r_y = 3, r_z = 4
        let q = query([7.0, 6.0, 2.0], [1.0, 2.0, 0.5], 1.0);
        assert!((q.beta2(Axis::X) - 5.0).abs() < 1e-15);
        let c = 0.8;
        let q = query([c * 2.0, c * 3.0, c * 0.5], [2.0, 3.0, 0.5], 1.0);
        for u in Axis::ALL {
            assert!((q.beta2(u) - c * 2f64.sqrt()).abs() < 1e-15);
        }
    }

    #[test]
    fn membership_cases() {
        let origin = query([0.0; 3], [1.0; 3], 0.3).membership();
        assert_eq!(origin.in_s, AxisTriple::splat(true));
        assert!(origin.in_union);

        // r_x enters beta_2^y and beta_2^z, and every pyramid needs one of them
        let big_x = query([50.0, 0.1, 0.2], [1.0; 3], 1.0);
        assert!(!big_x.in_subspace(Axis::Y));
        assert!(!big_x.in_subspace(Axis::Z));
        assert!(!big_x.in_subspace(Axis::X));

        // boundary is excluded: r_y = 1 = beta_t makes beta_2^x = beta_2^z = 1,
        // and each pyramid needs one of those two
        let edge = query([0.0, 1.0, 0.0], [1.0; 3], 1.0);
        assert!(!edge.membership().in_union);
        let inside = query([0.0, 0.99, 0.0], [1.0; 3], 1.0);
        assert_eq!(inside.membership().in_s, AxisTriple::splat(true));
    }

    #[test]
    fn constructed_points() {
        let bt = 1.0;
        // r = 0.9 on every axis: each beta_2 = 0.9 sqrt(2) > beta_t
        let outside = Membership::from_ratios(&AxisTriple::splat(0.9), bt);
        assert!(!outside.in_union);
        let outside = Membership::from_ratios(&AxisTriple::new(2.0, 0.3, 0.4), bt);
        assert!(!outside.in_union);
        let r = AxisTriple::new(0.95, 0.0, 0.0);
        let m = Membership::from_ratios(&r, bt);
        assert_eq!(m.in_s, AxisTriple::new(true, true, true));
        let r = AxisTriple::new(0.8, 0.7, 0.0);
        // beta_2^x = 0.7, beta_2^y = 0.8, beta_2^z = sqrt(1.13) > 1
        let m = Membership::from_ratios(&r, bt);
        assert_eq!(m.in_s, AxisTriple::new(false, false, true));
        assert!(m.in_union);
    }

    #[test]
    fn query_validation() {
        assert!(RegionQuery::new(AxisTriple::splat(1.0), AxisTriple::splat(0.0), 0.0).is_err());
        assert!(
            RegionQuery::new(AxisTriple::new(1.0, 0.0, 1.0), AxisTriple::splat(0.0), 1.0).is_err()
        );
    }

    #[test]
    fn origin_grid_and_csv() {
        let rows = sample_region(&RatioGrid::origin(), 1.0).unwrap();
        assert_eq!(rows.len(), 1);
        assert!(rows[0].membership.in_union);
        let mut buf = Vec::new();
        write_region_csv(&rows, &mut buf).unwrap();
        assert_eq!(
            String::from_utf8(buf).unwrap(),
            format!("{CSV_HEADER}\n0,0,0,1,1,1,1\n")
        );
    }

    #[test]
    fn grid_guard() {
        let grid = RatioGrid::cube(0.0, 1.0, 300);
        assert!(matches!(sample_region(&grid, 1.0), Err(Error::Capacity { .. })));
        assert!(sample_region(&RatioGrid::origin(), -1.0).is_err());
    }

    #[test]
    fn ray_exits_once() {
        let grid = RatioGrid {
            x: AxisRange { min: 0.0, max: 3.0, count: 301 },
            y: AxisRange { min: 0.2, max: 0.2, count: 1 },
            z: AxisRange { min: 0.1, max: 0.1, count: 1 },
        };
        let rows = sample_region(&grid, 1.0).unwrap();
        let flips = rows
            .windows(2)
            .filter(|w| w[0].membership.in_union != w[1].membership.in_union)
            .count();
        assert_eq!(flips, 1);
        assert!(rows[0].membership.in_union);
        assert!(!rows.last().unwrap().membership.in_union);
    }

    proptest! {
        #[test]
        fn permutation_and_scaling(
            r in prop::array::uniform3(-2.0f64..2.0),
            scale in 0.1f64..10.0,
            bt in 0.2f64..2.0,
        ) {
            let base = Membership::from_ratios(&AxisTriple::new(r[0], r[1], r[2]), bt);
            // cyclic relabeling x -> y -> z -> x
            let rot = Membership::from_ratios(&AxisTriple::new(r[2], r[0], r[1]), bt);
            prop_assert_eq!(rot.in_s, AxisTriple::new(base.in_s.z, base.in_s.x, base.in_s.y));
            // swap x <-> y
            let swap = Membership::from_ratios(&AxisTriple::new(r[1], r[0], r[2]), bt);
            prop_assert_eq!(swap.in_s, AxisTriple::new(base.in_s.y, base.in_s.x, base.in_s.z));

            let std = AxisTriple::new(1.0 + r[0].abs(), 2.0, 0.5 + r[2].abs());
            let mean = AxisTriple::new(r[0] * std.x, r[1] * std.y, r[2] * std.z);
            let q = RegionQuery::new(std, mean, bt).unwrap();
            let scaled = RegionQuery::new(std.map(|s| s * scale), mean.map(|m| m * scale), bt).unwrap();
            prop_assert_eq!(q.membership(), scaled.membership());
        }

        #[test]
        fn monotone_in_ratios(
            r in prop::array::uniform3(0.0f64..2.0),
            bump in 0.0f64..1.0,
            bt in 0.2f64..2.0,
        ) {
            let base = AxisTriple::new(r[0], r[1], r[2]);
            for a in Axis::ALL {
                let mut grown = base;
                grown[a] += bump;
                for u in Axis::ALL {
                    // leaving S^u is possible, re-entering is not
                    prop_assert!(
                        in_subspace_ratios(&base, bt, u) || !in_subspace_ratios(&grown, bt, u)
                    );
                }
            }
        }
    }
}
