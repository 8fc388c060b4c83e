//! Free-space Stokes kernels at unit viscosity.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::geom::{Block, Vec3};

const INV_8PI: f64 = 1.0 / (8.0 * PI);
const STRESS: f64 = -3.0 / (4.0 * PI);

/// Stokeslet `G(x, y)`.
pub fn stokeslet(x: &Vec3, y: &Vec3) -> Result<Block> {
    let r = x - y;
    if r.norm_squared() == 0.0 {
        return Err(Error::CoincidentPoints);
    }
    Ok(stokeslet_r(&r))
}

/// Stresslet contracted with the normal at `y`, `T_ijk n_k`.
pub fn stresslet(x: &Vec3, y: &Vec3, n: &Vec3) -> Result<Block> {
    let r = x - y;
    if r.norm_squared() == 0.0 {
        return Err(Error::CoincidentPoints);
    }
    Ok(stresslet_r(&r, n))
}

/// Stokeslet for the offset `r = x - y`, which must be nonzero.
#[inline]
pub(crate) fn stokeslet_r(r: &Vec3) -> Block {
    let r2 = r.norm_squared();
    let inv = 1.0 / r2.sqrt();
    let inv3 = inv / r2;
    let mut g = [[0.0; 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            g[i][j] = INV_8PI * (r[i] * r[j] * inv3);
        }
        g[i][i] += INV_8PI * inv;
    }
    g
}

/// Contracted stresslet for the offset `r = x - y`, which must be nonzero.
#[inline]
pub(crate) fn stresslet_r(r: &Vec3, n: &Vec3) -> Block {
    let r2 = r.norm_squared();
    let s = STRESS * r.dot(n) / (r2 * r2 * r2.sqrt());
    let mut t = [[0.0; 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            t[i][j] = s * r[i] * r[j];
        }
    }
    t
}
