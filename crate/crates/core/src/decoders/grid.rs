//! Finite `zeta/2`-covering of the closed ball `B_k(r)`.
//!
//! Construction: the cubic lattice `h Z^k` with `h = zeta / (2 sqrt k)`
//! (covering radius `h sqrt(k) / 2 = zeta / 4`). Lattice points inside the ball
//! are kept; points at most `zeta/2` outside are radially projected onto the
//! sphere. Projection onto a convex set is nonexpansive, so every ball point
//! stays within `zeta/4` of some grid point. The lattice is symmetric under
//! coordinate permutations and sign flips, and so is the grid.

use crate::{Error, Result};

/// Default refusal threshold on materialized grid size.
pub const DEFAULT_GRID_CAP: f64 = 1e7;

/// The lattice rule behind a grid, usable without materializing the points.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Lattice {
    pub r: f64,
    pub zeta: f64,
    pub k: usize,
    pub spacing: f64,
    /// Largest coordinate index that can map to a grid point.
    pub extent: i64,
}

impl Lattice {
    pub fn new(r: f64, zeta: f64, k: usize) -> Result<Self> {
        if !(r >= 0.0 && r.is_finite()) {
            return Err(Error::config(format!("grid radius must be finite and >= 0, got {r}")));
        }
        if !(zeta > 0.0 && zeta.is_finite()) {
            return Err(Error::config(format!("grid parameter zeta must be positive, got {zeta}")));
        }
        if k == 0 {
            return Err(Error::config("grid dimension k must be at least 1"));
        }
        let spacing = zeta / (2.0 * (k as f64).sqrt());
        let reach = (r + zeta / 2.0) / spacing;
        if reach > 1e15 {
            return Err(Error::config(format!(
                "grid spacing {spacing:e} is too fine for radius {r}"
            )));
        }
        Ok(Self {
            r,
            zeta,
            k,
            spacing,
            extent: reach.floor() as i64,
        })
    }

    /// Writes the grid point for a lattice index into `out`; `false` if the
    /// lattice point is more than `zeta/2` outside the ball.
    #[inline]
    pub fn point(&self, idx: &[i64], out: &mut [f64]) -> bool {
        let mut nsq = 0.0;
        for (o, &i) in out.iter_mut().zip(idx) {
            *o = i as f64 * self.spacing;
            nsq += *o * *o;
        }
        let outer = self.r + self.zeta / 2.0;
        if nsq <= self.r * self.r {
            true
        } else if nsq <= outer * outer {
            let scale = self.r / nsq.sqrt();
            out.iter_mut().for_each(|v| *v *= scale);
            true
        } else {
            false
        }
    }

    /// Upper bound on the number of grid points: lattice points in the cube
    /// `[-(r + zeta/2), r + zeta/2]^k`.
    pub fn cardinality_bound(&self) -> f64 {
        ((2 * self.extent + 1) as f64).powi(self.k as i32)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct QuantizationGrid {
    lattice: Lattice,
    points: Vec<Vec<f64>>,
}

impl QuantizationGrid {
    pub fn lattice(&self) -> &Lattice {
        &self.lattice
    }

    pub fn r(&self) -> f64 {
        self.lattice.r
    }

    pub fn zeta(&self) -> f64 {
        self.lattice.zeta
    }

    pub fn k(&self) -> usize {
        self.lattice.k
    }

    pub fn points(&self) -> &[Vec<f64>] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}

/// Builds `Q(r, zeta)` in dimension `k`, refusing if the cube bound on its
/// size exceeds `cap`.
pub fn build_grid(r: f64, zeta: f64, k: usize, cap: f64) -> Result<QuantizationGrid> {
    let lattice = Lattice::new(r, zeta, k)?;
    let estimate = lattice.cardinality_bound();
    if estimate > cap {
        return Err(Error::WorkCap {
            what: "quantization grid",
            estimate,
            cap,
        });
    }
    let mut points = Vec::new();
    let mut idx = vec![0i64; k];
    let mut buf = vec![0.0; k];
    collect(&lattice, 0, 0.0, &mut idx, &mut buf, &mut points);
    points.sort_by(|a, b| {
        a.iter()
            .zip(b)
            .map(|(x, y)| x.total_cmp(y))
            .find(|o| o.is_ne())
            .unwrap_or(std::cmp::Ordering::Equal)
    });
    points.dedup();
    Ok(QuantizationGrid { lattice, points })
}

fn collect(
    lat: &Lattice,
    depth: usize,
    partial_sq: f64,
    idx: &mut [i64],
    buf: &mut [f64],
    out: &mut Vec<Vec<f64>>,
) {
    let outer = lat.r + lat.zeta / 2.0;
    if depth == lat.k {
        if lat.point(idx, buf) {
            out.push(buf.to_vec());
        }
        return;
    }
    let room = (outer * outer - partial_sq).max(0.0).sqrt();
    let lim = ((room / lat.spacing).floor() as i64).min(lat.extent);
    for i in -lim..=lim {
        idx[depth] = i;
        let c = i as f64 * lat.spacing;
        collect(lat, depth + 1, partial_sq + c * c, idx, buf, out);
    }
}
